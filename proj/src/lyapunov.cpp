#include "gsmrac/lyapunov.hpp"

#include <algorithm>
#include <cmath>
#include <random>

namespace gsmrac {

VertexSet vertices_from_family(const PlantFamily& fam, int grid_knots, int perturbed_count,
                               double delta, std::uint64_t seed)
{
    if (grid_knots < 2) throw std::invalid_argument("vertices_from_family: need at least 2 knots");
    VertexSet V;
    const double lo = fam.alpha_lo(), hi = fam.alpha_hi();
    for (int i = 0; i < grid_knots; ++i) {
        double a = lo + (hi - lo) * static_cast<double>(i) / (grid_knots - 1);
        V.matrices.push_back(reference_matrix(fam, a));
    }
    for (const auto& p : fam.points()) V.matrices.push_back(reference_matrix(fam, p.alpha_e));

    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> ua(lo, hi);
    std::normal_distribution<double> gauss(0.0, 1.0);
    const int D = fam.aug_dim();
    for (int i = 0; i < perturbed_count; ++i) {
        double a = ua(rng);
        Matrix E(D, D);
        for (int r = 0; r < D; ++r)
            for (int c = 0; c < D; ++c) E(r, c) = gauss(rng);
        E /= E.norm();
        V.matrices.push_back(reference_matrix(fam, a) + delta * E);
    }
    return V;
}

double Certificate::worst_margin() const
{
    double w = -std::numeric_limits<double>::infinity();
    for (double m : margins) w = std::max(w, m);
    return w;
}

namespace {

constexpr double kVerifySlack = 1e-6;

void check_vertex_set(const VertexSet& V)
{
    if (V.matrices.empty()) throw std::invalid_argument("VertexSet: empty");
    const Eigen::Index D = V.matrices[0].rows();
    for (const Matrix& A : V.matrices) {
        if (A.rows() != D || A.cols() != D)
            throw std::invalid_argument("VertexSet: matrices must be square with one shape");
        require_finite(A, "VertexSet");
    }
}

std::vector<double> vertex_margins(const Matrix& P, const Matrix& Q, const VertexSet& V)
{
    std::vector<double> margins;
    margins.reserve(V.matrices.size());
    for (const Matrix& A : V.matrices) {
        Matrix R = P * A + A.transpose() * P + Q;
        SymEig eig = sym_eig(R);
        margins.push_back(eig.eigenvalues(eig.eigenvalues.size() - 1));
    }
    return margins;
}

/// Projection onto {lambda_i >= eps, sum lambda_i <= cap} in the eigenbasis.
Matrix project_feasible(const Matrix& P, double eps, double cap)
{
    SymEig eig = sym_eig(P);
    Vector w = eig.eigenvalues.cwiseMax(eps);
    if (w.sum() > cap) {
        double lo = 0.0, hi = w.maxCoeff() - eps;
        for (int it = 0; it < 200; ++it) {
            double tau = 0.5 * (lo + hi);
            double s = (w.array() - tau).max(eps).sum();
            (s > cap ? lo : hi) = tau;
        }
        w = (w.array() - hi).max(eps);
    }
    return eig.eigenvectors * w.asDiagonal() * eig.eigenvectors.transpose();
}

}  // namespace

Certificate verify_common_P(const Matrix& P, const Matrix& Q, const VertexSet& V)
{
    check_vertex_set(V);
    const Eigen::Index D = V.matrices[0].rows();
    if (P.rows() != D || P.cols() != D || Q.rows() != D || Q.cols() != D)
        throw std::invalid_argument("verify_common_P: P/Q shape does not match the vertex set");
    if ((P - P.transpose()).cwiseAbs().maxCoeff() > 1e-9)
        throw std::invalid_argument("verify_common_P: P not symmetric within 1e-9");
    require_finite(P, "verify_common_P");
    require_finite(Q, "verify_common_P");

    Certificate cert;
    cert.P = P;
    cert.Q = Q;
    cert.margins = vertex_margins(P, Q, V);
    SymEig pe = sym_eig(P);
    cert.lambda_min_P = pe.eigenvalues(0);
    cert.kappa = cert.lambda_min_P > 0.0
                     ? pe.eigenvalues(pe.eigenvalues.size() - 1) / cert.lambda_min_P
                     : 0.0;
    cert.valid = cert.lambda_min_P > 0.0 && cert.worst_margin() <= kVerifySlack;
    if (cert.lambda_min_P <= 0.0)
        cert.note = "P not positive definite, lambda_min = " + std::to_string(cert.lambda_min_P);
    else if (!cert.valid)
        cert.note = "worst vertex margin " + std::to_string(cert.worst_margin());
    return cert;
}

Certificate solve_common_P(const VertexSet& V, const Matrix& Q, const SolveOptions& opts)
{
    check_vertex_set(V);
    const Eigen::Index D = V.matrices[0].rows();
    if (Q.rows() != D || Q.cols() != D)
        throw std::invalid_argument("solve_common_P: Q shape does not match the vertex set");
    SymEig qe = sym_eig(Q);
    if (qe.eigenvalues(0) <= 0.0) throw std::domain_error("solve_common_P: Q must be PD");
    const double cap = opts.trace_cap > 0.0 ? opts.trace_cap : 10.0 * D;
    if (cap < opts.eps_pd * D)
        throw std::domain_error("solve_common_P: trace cap below eps_pd * dimension");

    Certificate cert;
    cert.Q = Q;
    for (size_t i = 0; i < V.matrices.size(); ++i) {
        double h = hurwitz_margin(V.matrices[i]);
        if (h >= 0.0) {
            cert.P = Matrix::Identity(D, D);
            cert.margins = vertex_margins(cert.P, Q, V);
            cert.valid = false;
            cert.note = "infeasible: vertex " + std::to_string(i) +
                        " is not Hurwitz (margin " + std::to_string(h) + ")";
            cert.lambda_min_P = 1.0;
            cert.kappa = 1.0;
            return cert;
        }
    }

    Matrix P = Matrix::Identity(D, D);
    double best_phi = std::numeric_limits<double>::infinity();
    Matrix best_P = P;
    for (int it = 0; it < opts.max_iter; ++it) {
        double phi = -std::numeric_limits<double>::infinity();
        Matrix grad;
        for (const Matrix& A : V.matrices) {
            Matrix R = P * A + A.transpose() * P + Q;
            SymEig eig = sym_eig(R);
            double top = eig.eigenvalues(eig.eigenvalues.size() - 1);
            if (top > phi) {
                phi = top;
                Vector v = eig.eigenvectors.col(eig.eigenvectors.cols() - 1);
                Matrix outer = v * v.transpose();
                grad = A * outer + outer * A.transpose();
                grad = 0.5 * (grad + grad.transpose());
            }
        }
        if (phi < best_phi) {
            best_phi = phi;
            best_P = P;
        }
        if (phi <= -opts.target_margin) break;
        // Polyak step aimed past the target so the final iterate clears it
        // with slack rather than landing on the boundary.
        double step = (phi + 2.0 * opts.target_margin) / std::max(grad.squaredNorm(), 1e-300);
        step = std::min(step, 10.0);
        P = project_feasible(P - step * grad, opts.eps_pd, cap);
    }

    cert.P = best_P;
    cert.margins = vertex_margins(best_P, Q, V);
    SymEig pe = sym_eig(best_P);
    cert.lambda_min_P = pe.eigenvalues(0);
    cert.kappa = cert.lambda_min_P > 0.0
                     ? pe.eigenvalues(pe.eigenvalues.size() - 1) / cert.lambda_min_P
                     : 0.0;
    cert.valid = cert.worst_margin() <= -opts.target_margin && cert.lambda_min_P > 0.0;
    if (!cert.valid)
        cert.note = "no certificate within max_iter; best worst margin " +
                    std::to_string(cert.worst_margin());
    return cert;
}

double norm_bound_kA(const PlantFamily& fam, const std::vector<double>& alpha_grid)
{
    if (alpha_grid.empty()) throw std::invalid_argument("norm_bound_kA: empty grid");
    double k = 0.0;
    for (double a : alpha_grid) k = std::max(k, spectral_norm(reference_matrix(fam, a)));
    return k;
}

nlohmann::json certificate_to_json(const Certificate& cert)
{
    nlohmann::json j;
    j["P"] = matrix_to_json(cert.P);
    j["Q"] = matrix_to_json(cert.Q);
    j["margins"] = cert.margins;
    j["kappa"] = cert.kappa;
    j["lambda_min_P"] = cert.lambda_min_P;
    j["valid"] = cert.valid;
    if (!cert.note.empty()) j["note"] = cert.note;
    return j;
}

}  // namespace gsmrac
