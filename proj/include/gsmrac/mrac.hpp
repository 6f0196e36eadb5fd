#pragma once

#include "gsmrac/projection.hpp"
#include "gsmrac/saturation.hpp"

#include <string>

namespace gsmrac {

/// Adaptive gain with its parameter set and learning rate.
struct AdaptiveState {
    Matrix K_hat;        // (n+2m) x m, or a column for a scalar-input subsystem
    ColumnBounds bounds; // one norm ball per column
    Matrix Gamma;        // PD learning rate, acts on columns
};

Vector control_basic(const AdaptiveState& s, const Vector& x);

/// dK_hat/dt for the unconstrained law.
Matrix adapt_basic(const AdaptiveState& s, const Vector& x, const Vector& e, const Matrix& P,
                   const Matrix& B);

struct Theorem2Bounds {
    double k_m = 0.0;
    double e_bound = 0.0;
};

/// Ultimate bound on the tracking error from the parameter-set radii, the
/// Lyapunov pair, and the scheduled-gain rate bounds d_k (one per column).
Theorem2Bounds theorem2_bounds(const ColumnBounds& bounds, const Matrix& Gamma, const Matrix& P,
                               const Matrix& Q, const Vector& d_k);

/// Adaptive gain plus the saturation-compensation machinery: an auxiliary
/// error state absorbing the clipped control and its own adapted gain.
struct ConstrainedAdaptiveState {
    AdaptiveState gain;
    Matrix K_delta;            // (n+2m) x m
    ColumnBounds bounds_delta; // per column of K_delta^T
    Matrix Gamma_delta;        // m x m
    Matrix delta_mask;         // m x (n+2m); 1 marks adapted entries of K_delta^T
    Vector e_delta;
};

struct ConstrainedStep {
    Vector v_raw;
    Vector v_applied;
    Vector dv;         // clipped-off part of the command
    Vector de_delta;
    Matrix dK_hat;
    Matrix dK_delta_T; // m x (n+2m)
};

ConstrainedStep step_constrained(const ConstrainedAdaptiveState& s, const Vector& x,
                                 const Vector& x_m, const SatLimits& lim, const Matrix& P,
                                 const Matrix& B, const Matrix& A_m);

struct Theorem4Bounds {
    double gamma_max = 0.0;
    double v_min = 0.0;
    double v_bar_max = 0.0;
    double v0 = 0.0;
    double rho = 0.0;
    double Z_B = 0.0;
    double theta_star_max = 0.0;
    double theta_max = 0.0;
    int n_int = 0;
    double x_min = 0.0;
    double x_max = 0.0;
    double Z_max = 0.0;
    bool applicable = false;
    bool condition_i = false;
    bool condition_ii = false;
    std::string note;
};

/// Semi-global trajectory bound for the saturated loop. When the decay
/// budget lambda_min(Q) - (3n+2) Z_B theta_max is nonpositive the result is
/// flagged inapplicable rather than thrown.
Theorem4Bounds theorem4_bounds(const ColumnBounds& bounds, const ColumnBounds& bounds_delta,
                               const Matrix& Gamma, const Matrix& Gamma_delta, const Matrix& P,
                               const Matrix& Q, const SatLimits& lim, double r_max,
                               const Matrix& B, const Matrix& B_r, double x0_norm, double V0);

double control_decentralized(const AdaptiveState& s_k, const Vector& dx_k);

Vector adapt_decentralized(const AdaptiveState& s_k, const Vector& dx_k, const Vector& e_k,
                           const Matrix& P_k, const Vector& b_k);

struct SubsystemBoundData {
    Matrix P;
    Matrix Q;
    Matrix Gamma;
    double theta_max = 0.0; // gain-set radius, stands in for max |K*_k|
    double d_bar = 0.0;     // scheduled-gain rate bound
    double x_m_bar = 0.0;   // sup_t sum_q c_kq |x_m_q(t)|
};

struct Theorem5Bounds {
    Matrix Pi;
    Vector xi;
    double psi = 0.0;
    double lambda_min_Pi = 0.0;
    double ubb_radius = 0.0;
    bool applicable = false;
};

/// Ultimate bound on the stacked subsystem error norms under interconnection
/// gains c_kq. Flagged inapplicable when the coupled decay matrix Pi loses
/// definiteness.
Theorem5Bounds theorem5_bounds(const std::vector<SubsystemBoundData>& subs,
                               const Matrix& coupling_gains);

}  // namespace gsmrac
