#include "gsmrac/saturation.hpp"

#include <cmath>
#include <limits>

namespace gsmrac {

SatLimits::SatLimits(Vector v_max) : v_max_(std::move(v_max))
{
    require_finite(v_max_, "SatLimits");
    if (v_max_.size() == 0 || (v_max_.array() <= 0.0).any())
        throw std::domain_error("SatLimits: every limit must be strictly positive");
}

static void check_dim(const Vector& v, const SatLimits& lim, const char* op)
{
    if (v.size() != lim.dim())
        throw std::invalid_argument(std::string(op) + ": vector and limits dimensions differ");
}

Vector sat(const Vector& v, const SatLimits& lim)
{
    check_dim(v, lim, "sat");
    require_finite(v, "sat");
    return v.cwiseMax(-lim.limits()).cwiseMin(lim.limits());
}

Vector deficiency(const Vector& v, const SatLimits& lim)
{
    check_dim(v, lim, "deficiency");
    require_finite(v, "deficiency");
    return v - sat(v, lim);
}

SatDecomposition decompose(const Vector& v, const SatLimits& lim)
{
    check_dim(v, lim, "decompose");
    require_finite(v, "decompose");
    Vector clamped = sat(v, lim);
    if (clamped == v) return {v, Vector::Zero(v.size())};

    double s = std::numeric_limits<double>::infinity();
    for (Eigen::Index i = 0; i < v.size(); ++i)
        if (v(i) != 0.0) s = std::min(s, lim.limits()(i) / std::abs(v(i)));
    Vector v_d = s * v;
    return {v_d, clamped - v_d};
}

}  // namespace gsmrac
