#pragma once

#include "gsmrac/numerics.hpp"

namespace gsmrac {

/// Per-channel symmetric control limits, all strictly positive.
class SatLimits {
public:
    explicit SatLimits(Vector v_max);

    const Vector& limits() const { return v_max_; }
    Eigen::Index dim() const { return v_max_.size(); }

    double v_min() const { return v_max_.minCoeff(); }
    double v_bar_max() const { return v_max_.maxCoeff(); }
    double v0() const { return v_max_.norm(); }

private:
    Vector v_max_;
};

/// Componentwise clamp of v to the limit box.
Vector sat(const Vector& v, const SatLimits& lim);

/// Part of the command cut off by the clamp: v - sat(v).
Vector deficiency(const Vector& v, const SatLimits& lim);

/// Split of sat(v) into a component along v and a residual:
/// direction_part = s * v with s the ray-box intersection scale,
/// error_part = sat(v) - direction_part.
struct SatDecomposition {
    Vector direction_part;
    Vector error_part;
};

SatDecomposition decompose(const Vector& v, const SatLimits& lim);

}  // namespace gsmrac
