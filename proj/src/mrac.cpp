#include "gsmrac/mrac.hpp"

#include <cmath>

namespace gsmrac {

namespace {

double inv_norm(const Matrix& Gamma)
{
    SymEig eig = sym_eig(Gamma);
    if (eig.eigenvalues(0) <= 0.0)
        throw std::domain_error("learning-rate matrix must be positive definite");
    return 1.0 / eig.eigenvalues(0);
}

double lambda_min(const Matrix& S)
{
    return sym_eig(S).eigenvalues(0);
}

double lambda_max(const Matrix& S)
{
    SymEig eig = sym_eig(S);
    return eig.eigenvalues(eig.eigenvalues.size() - 1);
}

double ball_frobenius(const ColumnBounds& bounds)
{
    double s = 0.0;
    for (const auto& b : bounds) s += b.theta_max * b.theta_max;
    return std::sqrt(s);
}

}  // namespace

Vector control_basic(const AdaptiveState& s, const Vector& x)
{
    if (s.K_hat.rows() != x.size())
        throw std::invalid_argument("control_basic: gain rows must match the state dimension");
    require_finite(x, "control_basic");
    return s.K_hat.transpose() * x;
}

Matrix adapt_basic(const AdaptiveState& s, const Vector& x, const Vector& e, const Matrix& P,
                   const Matrix& B)
{
    Matrix Y = -x * (e.transpose() * P * B);
    return proj_gamma_mat(s.K_hat, Y, s.Gamma, s.bounds);
}

Theorem2Bounds theorem2_bounds(const ColumnBounds& bounds, const Matrix& Gamma, const Matrix& P,
                               const Matrix& Q, const Vector& d_k)
{
    if (static_cast<size_t>(d_k.size()) != bounds.size())
        throw std::invalid_argument("theorem2_bounds: one rate bound per gain column");
    const double gi = inv_norm(Gamma);
    const double lP = lambda_max(P);
    const double lQ = lambda_min(Q);
    if (lQ <= 0.0) throw std::domain_error("theorem2_bounds: Q must be PD");

    double sq = 0.0, cross = 0.0;
    for (size_t j = 0; j < bounds.size(); ++j) {
        sq += bounds[j].theta_max * bounds[j].theta_max;
        cross += bounds[j].theta_max * d_k(static_cast<Eigen::Index>(j));
    }
    Theorem2Bounds out;
    out.k_m = 4.0 * sq + 4.0 * (lP / lQ) * gi * cross;
    out.e_bound = std::sqrt(out.k_m * gi / lambda_min(P));
    return out;
}

ConstrainedStep step_constrained(const ConstrainedAdaptiveState& s, const Vector& x,
                                 const Vector& x_m, const SatLimits& lim, const Matrix& P,
                                 const Matrix& B, const Matrix& A_m)
{
    if (x.size() != x_m.size() || x.size() != s.gain.K_hat.rows() ||
        x.size() != s.e_delta.size())
        throw std::invalid_argument("step_constrained: state dimensions disagree");

    ConstrainedStep out;
    out.v_raw = s.gain.K_hat.transpose() * x;
    out.v_applied = sat(out.v_raw, lim);
    out.dv = out.v_raw - out.v_applied;

    Vector e = x - x_m;
    Vector e_v = e - s.e_delta;

    Matrix Y_K = -x * (e_v.transpose() * P * B);
    out.dK_hat = proj_gamma_mat(s.gain.K_hat, Y_K, s.gain.Gamma, s.gain.bounds);

    Matrix Y_D = (out.dv * (e_v.transpose() * P)).cwiseProduct(s.delta_mask);
    out.dK_delta_T =
        proj_gamma_mat(s.K_delta.transpose(), Y_D, s.Gamma_delta, s.bounds_delta);

    out.de_delta = A_m * s.e_delta - s.K_delta * out.dv;
    return out;
}

Theorem4Bounds theorem4_bounds(const ColumnBounds& bounds, const ColumnBounds& bounds_delta,
                               const Matrix& Gamma, const Matrix& Gamma_delta, const Matrix& P,
                               const Matrix& Q, const SatLimits& lim, double r_max,
                               const Matrix& B, const Matrix& B_r, double x0_norm, double V0)
{
    Theorem4Bounds out;
    out.gamma_max = std::max(inv_norm(Gamma), inv_norm(Gamma_delta));
    out.v_min = lim.v_min();
    out.v_bar_max = lim.v_bar_max();
    out.v0 = lim.v0();
    const double lPmin = lambda_min(P);
    if (lPmin <= 0.0) throw std::domain_error("theorem4_bounds: P must be PD");
    out.rho = std::sqrt(lambda_max(P) / lPmin);

    Matrix stacked(P.rows(), B.cols() + B_r.cols());
    stacked << P * B, P * B_r;
    out.Z_B = spectral_norm(stacked);

    out.theta_star_max = ball_frobenius(bounds);
    // The gain estimation errors live in sets twice as wide as the gain
    // sets themselves; the compensator gain error additionally carries the
    // fixed input column it estimates.
    out.theta_max = std::max(2.0 * out.theta_star_max,
                             spectral_norm(B) + ball_frobenius(bounds_delta));
    out.n_int = std::max(1, static_cast<int>(std::ceil(out.theta_star_max / out.theta_max)));

    const double lQ = lambda_min(Q);
    if (lQ <= 0.0) throw std::domain_error("theorem4_bounds: Q must be PD");
    const double decay = lQ - (3.0 * out.n_int + 2.0) * out.Z_B * out.theta_max;
    out.x_max = out.Z_B * out.v_min / std::abs(lQ - 2.0 * out.Z_B * out.theta_star_max);
    if (decay <= 0.0) {
        out.applicable = false;
        out.note = "inapplicable: lambda_min(Q) - (3n+2) Z_B theta_max = " +
                   std::to_string(decay) + " <= 0";
        return out;
    }
    out.applicable = true;
    out.x_min = out.Z_B * (2.0 * out.v0 + 2.0 * r_max) / decay;
    const double rx = out.rho / out.x_max;
    out.Z_max = (lQ - out.Z_B * rx * (2.0 * out.v0 + 2.0 * r_max)) /
                (out.Z_B * (3.0 * rx + 3.0 * out.n_int + 2.0));
    if (out.x_min >= out.x_max) out.note = "empty attraction region: x_min >= x_max";
    out.condition_i = x0_norm < out.x_max / out.rho;
    out.condition_ii = V0 >= 0.0 && std::sqrt(V0) < out.Z_max / std::sqrt(out.gamma_max);
    return out;
}

double control_decentralized(const AdaptiveState& s_k, const Vector& dx_k)
{
    if (s_k.K_hat.cols() != 1 || s_k.K_hat.rows() != dx_k.size())
        throw std::invalid_argument("control_decentralized: expected a gain column matching x");
    return s_k.K_hat.col(0).dot(dx_k);
}

Vector adapt_decentralized(const AdaptiveState& s_k, const Vector& dx_k, const Vector& e_k,
                           const Matrix& P_k, const Vector& b_k)
{
    if (s_k.K_hat.cols() != 1)
        throw std::invalid_argument("adapt_decentralized: expected a gain column");
    Vector y = -dx_k * (e_k.dot(P_k * b_k));
    return proj_gamma_vec(s_k.K_hat.col(0), y, s_k.Gamma, s_k.bounds.at(0));
}

Theorem5Bounds theorem5_bounds(const std::vector<SubsystemBoundData>& subs,
                               const Matrix& coupling_gains)
{
    const int N = static_cast<int>(subs.size());
    if (N == 0) throw std::invalid_argument("theorem5_bounds: no subsystems");
    if (coupling_gains.rows() != N || coupling_gains.cols() != N)
        throw std::invalid_argument("theorem5_bounds: coupling gain matrix must be N x N");

    Theorem5Bounds out;
    Matrix Phi = Matrix::Zero(N, N);
    Matrix Lambda = Matrix::Zero(N, N);
    out.xi = Vector::Zero(N);
    out.psi = 0.0;
    for (int k = 0; k < N; ++k) {
        const auto& s = subs[k];
        const double rho_k = 2.0 * lambda_max(s.P);
        Lambda(k, k) = lambda_min(s.Q);
        for (int q = 0; q < N; ++q)
            if (q != k) Phi(k, q) = rho_k * coupling_gains(k, q);
        out.xi(k) = rho_k * s.x_m_bar;
        out.psi += 2.0 * inv_norm(s.Gamma) * s.theta_max * s.d_bar;
    }
    out.Pi = Lambda - Phi;
    out.lambda_min_Pi = lambda_min(0.5 * (out.Pi + out.Pi.transpose()));
    out.applicable = out.lambda_min_Pi > 0.0;
    if (out.applicable) {
        const double xn = out.xi.norm();
        out.ubb_radius = (xn + std::sqrt(xn * xn + 4.0 * out.lambda_min_Pi * out.psi)) /
                         (2.0 * out.lambda_min_Pi);
    }
    return out;
}

}  // namespace gsmrac
