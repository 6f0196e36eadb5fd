#include "gsmrac/projection.hpp"

#include <cassert>

namespace gsmrac {

double boundary_fn(const Vector& theta, const ConvexBound& b)
{
    require_finite(theta, "boundary_fn");
    if (b.theta_max <= 0.0)
        throw std::domain_error("boundary_fn: theta_max must be positive for projection");
    return (theta.squaredNorm() - b.theta_max * b.theta_max) /
           (b.eps_theta * b.theta_max * b.theta_max);
}

Vector boundary_grad(const Vector& theta, const ConvexBound& b)
{
    require_finite(theta, "boundary_grad");
    if (b.theta_max <= 0.0)
        throw std::domain_error("boundary_grad: theta_max must be positive for projection");
    return 2.0 * theta / (b.eps_theta * b.theta_max * b.theta_max);
}

Vector proj_vec(const Vector& theta, const Vector& y, const ConvexBound& b)
{
    if (theta.size() != y.size())
        throw std::invalid_argument("proj_vec: theta and y must have the same length");
    require_finite(y, "proj_vec");
    const double f = boundary_fn(theta, b);
    if (f <= 0.0) return y;
    Vector g = boundary_grad(theta, b);
    const double gnorm2 = g.squaredNorm();
    assert(gnorm2 > 0.0);
    const double gy = g.dot(y);
    if (gy <= 0.0) return y;
    return y - g * (gy * f / gnorm2);
}

Matrix proj_mat(const Matrix& Theta, const Matrix& Y, const ColumnBounds& b)
{
    if (Theta.rows() != Y.rows() || Theta.cols() != Y.cols())
        throw std::invalid_argument("proj_mat: shape mismatch");
    if (static_cast<size_t>(Theta.cols()) != b.size())
        throw std::invalid_argument("proj_mat: need one bound per column");
    Matrix out(Y.rows(), Y.cols());
    for (Eigen::Index j = 0; j < Theta.cols(); ++j)
        out.col(j) = proj_vec(Theta.col(j), Y.col(j), b[j]);
    return out;
}

static void check_gamma(const Matrix& Gamma, Eigen::Index dim)
{
    if (Gamma.rows() != Gamma.cols() || Gamma.rows() != dim)
        throw std::invalid_argument("proj_gamma: Gamma shape does not match the parameter");
    Eigen::LLT<Matrix> llt(0.5 * (Gamma + Gamma.transpose()));
    if (llt.info() != Eigen::Success)
        throw std::domain_error("proj_gamma: Gamma must be symmetric positive definite");
}

Vector proj_gamma_vec(const Vector& theta, const Vector& y, const Matrix& Gamma,
                      const ConvexBound& b)
{
    if (theta.size() != y.size())
        throw std::invalid_argument("proj_gamma_vec: theta and y must have the same length");
    require_finite(y, "proj_gamma_vec");
    check_gamma(Gamma, theta.size());
    Vector gy = Gamma * y;
    const double f = boundary_fn(theta, b);
    if (f <= 0.0) return gy;
    Vector g = boundary_grad(theta, b);
    const double drive = g.dot(gy);
    if (drive <= 0.0) return gy;
    Vector gg = Gamma * g;
    const double denom = g.dot(gg);
    assert(denom > 0.0);
    return gy - gg * (drive * f / denom);
}

Matrix proj_gamma_mat(const Matrix& Theta, const Matrix& Y, const Matrix& Gamma,
                      const ColumnBounds& b)
{
    if (Theta.rows() != Y.rows() || Theta.cols() != Y.cols())
        throw std::invalid_argument("proj_gamma_mat: shape mismatch");
    if (static_cast<size_t>(Theta.cols()) != b.size())
        throw std::invalid_argument("proj_gamma_mat: need one bound per column");
    Matrix out(Y.rows(), Y.cols());
    for (Eigen::Index j = 0; j < Theta.cols(); ++j)
        out.col(j) = proj_gamma_vec(Theta.col(j), Y.col(j), Gamma, b[j]);
    return out;
}

}  // namespace gsmrac
