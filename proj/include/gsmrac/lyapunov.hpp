#pragma once

#include "gsmrac/lpv_model.hpp"
#include "gsmrac/numerics.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace gsmrac {

/// Finite sample of closed-loop matrices standing in for the scheduled family.
struct VertexSet {
    std::vector<Matrix> matrices;
};

/// Reference-matrix samples over a uniform alpha grid, the family knots,
/// and optionally a seeded batch of unit-norm additive perturbations.
VertexSet vertices_from_family(const PlantFamily& fam, int grid_knots, int perturbed_count = 0,
                               double delta = 0.05, std::uint64_t seed = 0);

/// Outcome of checking P A_i + A_i^T P <= -Q over a vertex set.
struct Certificate {
    Matrix P;
    Matrix Q;
    std::vector<double> margins;  // lambda_max(P A_i + A_i^T P + Q) per vertex
    double kappa = 0.0;
    double lambda_min_P = 0.0;
    bool valid = false;
    std::string note;

    double worst_margin() const;
};

/// Margins are compared against zero with slack 1e-6 (inputs come from
/// decimal text).
Certificate verify_common_P(const Matrix& P, const Matrix& Q, const VertexSet& V);

struct SolveOptions {
    double eps_pd = 1e-3;
    double trace_cap = 0.0;  // 0: defaults to 10 * dimension
    int max_iter = 50000;
    double target_margin = 1e-8;
};

/// Projected-subgradient feasibility search for a common P: minimizes the
/// worst vertex margin over {P symmetric, P >= eps_pd I, trace <= cap}.
Certificate solve_common_P(const VertexSet& V, const Matrix& Q, const SolveOptions& opts = {});

/// Largest spectral norm of the reference matrix over an alpha grid.
double norm_bound_kA(const PlantFamily& fam, const std::vector<double>& alpha_grid);

nlohmann::json certificate_to_json(const Certificate& cert);

}  // namespace gsmrac
