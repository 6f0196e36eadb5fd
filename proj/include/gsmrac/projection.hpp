#pragma once

#include "gsmrac/numerics.hpp"

namespace gsmrac {

/// Norm-ball parameter set: f(theta) = (|theta|^2 - theta_max^2) / (eps_theta * theta_max^2).
/// Omega_c = { theta : f(theta) <= c }.
struct ConvexBound {
    double theta_max;
    double eps_theta;

    // theta_max = 0 (an empty set) is admitted so bound calculators can
    // express the no-uncertainty case; the projection operators reject it.
    ConvexBound(double theta_max_, double eps_theta_) : theta_max(theta_max_), eps_theta(eps_theta_)
    {
        if (!(theta_max >= 0.0) || !(eps_theta > 0.0))
            throw std::domain_error("ConvexBound: theta_max must be nonnegative, eps_theta positive");
    }
};

using ColumnBounds = std::vector<ConvexBound>;

double boundary_fn(const Vector& theta, const ConvexBound& b);
Vector boundary_grad(const Vector& theta, const ConvexBound& b);

/// Projection-modified update: deflects y when theta is outside the norm
/// ball and y points further out; pass-through otherwise.
Vector proj_vec(const Vector& theta, const Vector& y, const ConvexBound& b);

/// Column-wise proj_vec.
Matrix proj_mat(const Matrix& Theta, const Matrix& Y, const ColumnBounds& b);

/// Learning-rate weighted variant; reduces to gamma * proj_vec for Gamma = gamma * I.
Vector proj_gamma_vec(const Vector& theta, const Vector& y, const Matrix& Gamma,
                      const ConvexBound& b);

/// Column-wise proj_gamma_vec.
Matrix proj_gamma_mat(const Matrix& Theta, const Matrix& Y, const Matrix& Gamma,
                      const ColumnBounds& b);

}  // namespace gsmrac
