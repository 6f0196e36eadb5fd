#pragma once

#include <Eigen/Dense>
#include <json.hpp>

#include <stdexcept>
#include <string>
#include <vector>

namespace gsmrac {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

/// Thrown when an integrated state leaves the admissible region.
struct DivergenceError : std::runtime_error {
    DivergenceError(double time, std::vector<double> last_row, const std::string& msg)
        : std::runtime_error(msg), t(time), last(std::move(last_row)) {}
    double t;
    std::vector<double> last;
};

void require_finite(const Matrix& M, const std::string& what);
void require_finite(const Vector& v, const std::string& what);

/// Eigen-decomposition of a symmetric matrix. Eigenvalues ascending,
/// eigenvector column k pairs with eigenvalue k.
struct SymEig {
    Vector eigenvalues;
    Matrix eigenvectors;
};

SymEig sym_eig(const Matrix& S);

double spectral_norm(const Matrix& M);

/// lambda_max / lambda_min of a symmetric positive definite matrix.
double condition_number(const Matrix& S);

/// Nearest (Frobenius) positive semidefinite matrix.
Matrix psd_project(const Matrix& S);

/// Piecewise-linear family of equally shaped matrices indexed by a
/// strictly increasing scheduling value. Queries clamp outside the knots.
class MatrixTable {
public:
    MatrixTable(std::vector<double> knots, std::vector<Matrix> values);

    const std::vector<double>& knots() const { return knots_; }
    const std::vector<Matrix>& values() const { return values_; }

private:
    std::vector<double> knots_;
    std::vector<Matrix> values_;

    friend Matrix interp_matrix(const MatrixTable&, double);
};

Matrix interp_matrix(const MatrixTable& table, double alpha);

nlohmann::json matrix_to_json(const Matrix& M);
Matrix matrix_from_json(const nlohmann::json& j);
nlohmann::json vector_to_json(const Vector& v);
Vector vector_from_json(const nlohmann::json& j);

}  // namespace gsmrac
