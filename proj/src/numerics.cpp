#include "gsmrac/numerics.hpp"

#include <cmath>

namespace gsmrac {

void require_finite(const Matrix& M, const std::string& what)
{
    if (!M.allFinite()) throw std::invalid_argument(what + ": non-finite entries");
}

void require_finite(const Vector& v, const std::string& what)
{
    if (!v.allFinite()) throw std::invalid_argument(what + ": non-finite entries");
}

SymEig sym_eig(const Matrix& S)
{
    if (S.rows() != S.cols()) throw std::invalid_argument("sym_eig: matrix must be square");
    require_finite(S, "sym_eig");
    Matrix sym = 0.5 * (S + S.transpose());
    Eigen::SelfAdjointEigenSolver<Matrix> es(sym);
    if (es.info() != Eigen::Success) throw std::runtime_error("sym_eig: decomposition failed");
    return {es.eigenvalues(), es.eigenvectors()};
}

double spectral_norm(const Matrix& M)
{
    require_finite(M, "spectral_norm");
    if (M.size() == 0) return 0.0;
    return M.jacobiSvd().singularValues()(0);
}

double condition_number(const Matrix& S)
{
    SymEig eig = sym_eig(S);
    double lo = eig.eigenvalues(0);
    double hi = eig.eigenvalues(eig.eigenvalues.size() - 1);
    if (lo <= 0.0)
        throw std::domain_error("condition_number: matrix not positive definite, lambda_min = " +
                                std::to_string(lo));
    return hi / lo;
}

Matrix psd_project(const Matrix& S)
{
    SymEig eig = sym_eig(S);
    Vector clipped = eig.eigenvalues.cwiseMax(0.0);
    return eig.eigenvectors * clipped.asDiagonal() * eig.eigenvectors.transpose();
}

MatrixTable::MatrixTable(std::vector<double> knots, std::vector<Matrix> values)
    : knots_(std::move(knots)), values_(std::move(values))
{
    if (knots_.empty() || knots_.size() != values_.size())
        throw std::invalid_argument("MatrixTable: need one matrix per knot, at least one knot");
    for (size_t i = 0; i + 1 < knots_.size(); ++i)
        if (!(knots_[i] < knots_[i + 1]))
            throw std::invalid_argument("MatrixTable: knots must be strictly increasing");
    for (const Matrix& M : values_) {
        require_finite(M, "MatrixTable");
        if (M.rows() != values_[0].rows() || M.cols() != values_[0].cols())
            throw std::invalid_argument("MatrixTable: matrices must share one shape");
    }
}

Matrix interp_matrix(const MatrixTable& table, double alpha)
{
    const auto& k = table.knots_;
    const auto& v = table.values_;
    if (alpha <= k.front()) return v.front();
    if (alpha >= k.back()) return v.back();
    size_t i = 0;
    while (alpha > k[i + 1]) ++i;
    if (alpha == k[i]) return v[i];
    if (alpha == k[i + 1]) return v[i + 1];
    double w = (alpha - k[i]) / (k[i + 1] - k[i]);
    return (1.0 - w) * v[i] + w * v[i + 1];
}

nlohmann::json matrix_to_json(const Matrix& M)
{
    nlohmann::json rows = nlohmann::json::array();
    for (Eigen::Index r = 0; r < M.rows(); ++r) {
        nlohmann::json row = nlohmann::json::array();
        for (Eigen::Index c = 0; c < M.cols(); ++c) row.push_back(M(r, c));
        rows.push_back(std::move(row));
    }
    return rows;
}

Matrix matrix_from_json(const nlohmann::json& j)
{
    if (!j.is_array() || j.empty() || !j[0].is_array())
        throw std::invalid_argument("matrix_from_json: expected an array of rows");
    const size_t rows = j.size();
    const size_t cols = j[0].size();
    Matrix M(rows, cols);
    for (size_t r = 0; r < rows; ++r) {
        if (!j[r].is_array() || j[r].size() != cols)
            throw std::invalid_argument("matrix_from_json: ragged rows");
        for (size_t c = 0; c < cols; ++c) M(r, c) = j[r][c].get<double>();
    }
    require_finite(M, "matrix_from_json");
    return M;
}

nlohmann::json vector_to_json(const Vector& v)
{
    nlohmann::json out = nlohmann::json::array();
    for (Eigen::Index i = 0; i < v.size(); ++i) out.push_back(v(i));
    return out;
}

Vector vector_from_json(const nlohmann::json& j)
{
    if (!j.is_array()) throw std::invalid_argument("vector_from_json: expected an array");
    Vector v(j.size());
    for (size_t i = 0; i < j.size(); ++i) v(i) = j[i].get<double>();
    require_finite(v, "vector_from_json");
    return v;
}

}  // namespace gsmrac
