#include "gsmrac/lpv_model.hpp"

#include <cmath>
#include <fstream>

namespace gsmrac {

double scheduling(const Vector& x_p)
{
    require_finite(x_p, "scheduling");
    return x_p.norm();
}

double hurwitz_margin(const Matrix& A)
{
    if (A.rows() != A.cols()) throw std::invalid_argument("hurwitz_margin: matrix must be square");
    require_finite(A, "hurwitz_margin");
    Eigen::EigenSolver<Matrix> es(A, false);
    if (es.info() != Eigen::Success) throw std::runtime_error("hurwitz_margin: eigen solve failed");
    return es.eigenvalues().real().maxCoeff();
}

namespace {

constexpr double kAlphaConsistencyTol = 1e-4;

std::vector<Matrix> collect(const std::vector<EquilibriumPoint>& pts, Matrix EquilibriumPoint::*f)
{
    std::vector<Matrix> out;
    out.reserve(pts.size());
    for (const auto& p : pts) out.push_back(p.*f);
    return out;
}

Matrix as_row(const Vector& v)
{
    return v.transpose();
}

}  // namespace

PlantFamily::PlantFamily(std::vector<EquilibriumPoint> points, double eta_c, double eps_c)
    : points_(std::move(points)), eta_c_(eta_c), eps_c_(eps_c)
{
    if (points_.size() < 2) throw std::invalid_argument("PlantFamily: need at least two points");
    if (!(eta_c_ > 0.0) || !(eps_c_ > 0.0))
        throw std::domain_error("PlantFamily: eta_c and eps_c must be positive");

    n_ = static_cast<int>(points_[0].x_p_e.size());
    m_ = static_cast<int>(points_[0].u_e.size());
    if (n_ != m_)
        throw std::invalid_argument(
            "PlantFamily: state and input dimensions must match (the controller integrates the "
            "full plant state)");

    std::vector<double> knots;
    for (size_t i = 0; i < points_.size(); ++i) {
        const auto& p = points_[i];
        if (p.x_p_e.size() != n_ || p.u_e.size() != m_ || p.A_p.rows() != n_ ||
            p.A_p.cols() != n_ || p.B_p.rows() != n_ || p.B_p.cols() != m_ ||
            p.K_i.rows() != m_ || p.K_i.cols() != m_)
            throw std::invalid_argument("PlantFamily: inconsistent matrix shapes at point " +
                                        std::to_string(i));
        if (std::abs(p.alpha_e - p.x_p_e.norm()) > kAlphaConsistencyTol)
            throw std::invalid_argument("PlantFamily: alpha_e must equal |x_p_e| at point " +
                                        std::to_string(i));
        if (i > 0 && !(points_[i - 1].alpha_e < p.alpha_e))
            throw std::invalid_argument("PlantFamily: points must be strictly increasing in alpha");
        if (hurwitz_margin(p.A_p) >= 0.0)
            throw std::invalid_argument("PlantFamily: A_p not Hurwitz at point " +
                                        std::to_string(i));
        knots.push_back(p.alpha_e);
    }

    tab_A_ = std::make_unique<MatrixTable>(knots, collect(points_, &EquilibriumPoint::A_p));
    tab_B_ = std::make_unique<MatrixTable>(knots, collect(points_, &EquilibriumPoint::B_p));
    tab_K_ = std::make_unique<MatrixTable>(knots, collect(points_, &EquilibriumPoint::K_i));
    std::vector<Matrix> xs, us;
    for (const auto& p : points_) {
        xs.push_back(as_row(p.x_p_e));
        us.push_back(as_row(p.u_e));
    }
    tab_x_ = std::make_unique<MatrixTable>(knots, xs);
    tab_u_ = std::make_unique<MatrixTable>(knots, us);
}

Matrix PlantFamily::A_p(double alpha) const { return interp_matrix(*tab_A_, alpha); }
Matrix PlantFamily::B_p(double alpha) const { return interp_matrix(*tab_B_, alpha); }
Matrix PlantFamily::K_i(double alpha) const { return interp_matrix(*tab_K_, alpha); }
Vector PlantFamily::x_p_e(double alpha) const { return interp_matrix(*tab_x_, alpha).transpose(); }
Vector PlantFamily::u_e(double alpha) const { return interp_matrix(*tab_u_, alpha).transpose(); }

PlantFamily PlantFamily::from_json(const nlohmann::json& j)
{
    try {
        double eta = j.at("eta_c").get<double>();
        double eps = j.at("eps_c").get<double>();
        std::vector<EquilibriumPoint> pts;
        for (const auto& pj : j.at("points")) {
            EquilibriumPoint p;
            p.alpha_e = pj.at("alpha").get<double>();
            p.x_p_e = vector_from_json(pj.at("x_e"));
            p.u_e = vector_from_json(pj.at("u_e"));
            p.A_p = matrix_from_json(pj.at("A_p"));
            p.B_p = matrix_from_json(pj.at("B_p"));
            p.K_i = matrix_from_json(pj.at("K_i"));
            pts.push_back(std::move(p));
        }
        return PlantFamily(std::move(pts), eta, eps);
    } catch (const nlohmann::json::exception& e) {
        throw std::invalid_argument(std::string("PlantFamily: malformed document: ") + e.what());
    }
}

PlantFamily PlantFamily::load(const std::string& path)
{
    std::ifstream in(path);
    if (!in) throw std::invalid_argument("PlantFamily: cannot open " + path);
    nlohmann::json j;
    try {
        in >> j;
    } catch (const nlohmann::json::exception& e) {
        throw std::invalid_argument("PlantFamily: parse failure in " + path + ": " + e.what());
    }
    return from_json(j);
}

PlantFamily PlantFamily::perturbed(double delta_A, double delta_B) const
{
    if (delta_A < 0.0 || delta_A > 0.3 || delta_B < 0.0 || delta_B > 0.3)
        throw std::domain_error("PlantFamily: perturbation magnitudes must lie in [0, 0.3]");
    std::vector<EquilibriumPoint> pts = points_;
    for (auto& p : pts) {
        for (int r = 0; r < n_; ++r)
            for (int c = 0; c < n_; ++c)
                if (r != c) p.A_p(r, c) *= 1.0 + delta_A;
        p.B_p *= 1.0 - delta_B;
    }
    return PlantFamily(std::move(pts), eta_c_, eps_c_);
}

PlantMatrices plant_matrices(const PlantFamily& fam, double alpha)
{
    const int n = fam.n(), m = fam.m(), D = fam.aug_dim();
    Matrix A = Matrix::Zero(D, D);
    A.topLeftCorner(n, n) = fam.A_p(alpha);
    A.block(0, n, n, m) = fam.B_p(alpha);
    A.block(n, n, m, m) = -fam.eta_c() * Matrix::Identity(m, m);
    A.block(n + m, 0, m, n) = Matrix::Identity(m, n);
    A.bottomRightCorner(m, m) = -fam.eps_c() * Matrix::Identity(m, m);

    Matrix B = Matrix::Zero(D, m);
    B.block(n, 0, m, m) = fam.eta_c() * Matrix::Identity(m, m);

    Matrix B_r = Matrix::Zero(D, m);
    B_r.block(n + m, 0, m, m) = -Matrix::Identity(m, m);
    return {A, B, B_r};
}

Matrix gain_schedule(const PlantFamily& fam, double alpha)
{
    const int n = fam.n(), m = fam.m();
    Matrix K = Matrix::Zero(fam.aug_dim(), m);
    K.block(n + m, 0, m, m) = fam.K_i(alpha);
    return K;
}

Matrix reference_matrix(const PlantFamily& fam, double alpha)
{
    const int n = fam.n(), m = fam.m(), D = fam.aug_dim();
    Matrix Am = Matrix::Zero(D, D);
    Am.topLeftCorner(n, n) = fam.A_p(alpha);
    Am.block(0, n, n, m) = fam.B_p(alpha);
    Am.block(n, n, m, m) = -fam.eta_c() * Matrix::Identity(m, m);
    Am.block(n, n + m, m, m) = fam.eta_c() * fam.K_i(alpha).transpose();
    Am.block(n + m, 0, m, n) = Matrix::Identity(m, n);
    Am.bottomRightCorner(m, m) = -fam.eps_c() * Matrix::Identity(m, m);
    return Am;
}

SubsystemFamily::SubsystemFamily(std::vector<Subsystem> subs, Matrix coupling_gains, double eta_c,
                                 double eps_c)
    : subs_(std::move(subs)), coupling_gains_(std::move(coupling_gains)), eta_c_(eta_c),
      eps_c_(eps_c)
{
    if (subs_.empty()) throw std::invalid_argument("SubsystemFamily: no subsystems");
    if (!(eta_c_ > 0.0) || !(eps_c_ > 0.0))
        throw std::domain_error("SubsystemFamily: eta_c and eps_c must be positive");
    const int N = count();
    if (coupling_gains_.rows() != N || coupling_gains_.cols() != N)
        throw std::invalid_argument("SubsystemFamily: coupling gain matrix must be N x N");
    if ((coupling_gains_.array() < 0.0).any() ||
        (coupling_gains_.diagonal().array() != 0.0).any())
        throw std::invalid_argument(
            "SubsystemFamily: coupling gains must be nonnegative with zero diagonal");
    for (const auto& s : subs_) {
        if (s.points.size() < 2)
            throw std::invalid_argument("SubsystemFamily: each subsystem needs two points");
        for (size_t i = 0; i < s.points.size(); ++i) {
            const auto& p = s.points[i];
            if (i > 0 && !(s.points[i - 1].alpha_e < p.alpha_e))
                throw std::invalid_argument("SubsystemFamily: points must increase in alpha");
            if (p.a_p >= 0.0)
                throw std::invalid_argument("SubsystemFamily: a_p must be negative (Hurwitz)");
        }
    }
}

double SubsystemFamily::alpha_lo() const
{
    double lo = subs_[0].points.front().alpha_e;
    for (const auto& s : subs_) lo = std::max(lo, s.points.front().alpha_e);
    return lo;
}

double SubsystemFamily::alpha_hi() const
{
    double hi = subs_[0].points.back().alpha_e;
    for (const auto& s : subs_) hi = std::min(hi, s.points.back().alpha_e);
    return hi;
}

double SubsystemFamily::interp_field(int k, double alpha, double SubsystemPoint::*field) const
{
    const auto& pts = subs_.at(k).points;
    if (alpha <= pts.front().alpha_e) return pts.front().*field;
    if (alpha >= pts.back().alpha_e) return pts.back().*field;
    size_t i = 0;
    while (alpha > pts[i + 1].alpha_e) ++i;
    double w = (alpha - pts[i].alpha_e) / (pts[i + 1].alpha_e - pts[i].alpha_e);
    return (1.0 - w) * (pts[i].*field) + w * (pts[i + 1].*field);
}

double SubsystemFamily::a_p(int k, double alpha) const
{
    return interp_field(k, alpha, &SubsystemPoint::a_p);
}
double SubsystemFamily::b_p(int k, double alpha) const
{
    return interp_field(k, alpha, &SubsystemPoint::b_p);
}
double SubsystemFamily::k_i(int k, double alpha) const
{
    return interp_field(k, alpha, &SubsystemPoint::k_i);
}
double SubsystemFamily::x_e(int k, double alpha) const
{
    return interp_field(k, alpha, &SubsystemPoint::x_e);
}
double SubsystemFamily::u_e(int k, double alpha) const
{
    return interp_field(k, alpha, &SubsystemPoint::u_e);
}

Vector SubsystemFamily::b() const
{
    Vector v = Vector::Zero(3);
    v(1) = eta_c_;
    return v;
}

Vector SubsystemFamily::b_r() const
{
    Vector v = Vector::Zero(3);
    v(2) = -1.0;
    return v;
}

Matrix SubsystemFamily::subsystem_plant(int k, double alpha) const
{
    Matrix A = Matrix::Zero(3, 3);
    A(0, 0) = a_p(k, alpha);
    A(0, 1) = b_p(k, alpha);
    A(1, 1) = -eta_c_;
    A(2, 0) = 1.0;
    A(2, 2) = -eps_c_;
    return A;
}

Matrix SubsystemFamily::coupling(int k, int q) const
{
    Matrix C = Matrix::Zero(3, 3);
    C(0, 0) = coupling_gains_(k, q);
    return C;
}

Vector SubsystemFamily::gain(int k, double alpha) const
{
    Vector g = Vector::Zero(3);
    g(2) = k_i(k, alpha);
    return g;
}

SubsystemFamily SubsystemFamily::perturbed(double delta_A, double delta_B) const
{
    if (delta_A < 0.0 || delta_A > 0.3 || delta_B < 0.0 || delta_B > 0.3)
        throw std::domain_error("SubsystemFamily: perturbation magnitudes must lie in [0, 0.3]");
    std::vector<Subsystem> subs = subs_;
    for (auto& s : subs)
        for (auto& p : s.points) p.b_p *= 1.0 - delta_B;
    Matrix cg = coupling_gains_ * (1.0 + delta_A);
    return SubsystemFamily(std::move(subs), std::move(cg), eta_c_, eps_c_);
}

SubsystemFamily SubsystemFamily::from_json(const nlohmann::json& j)
{
    try {
        double eta = j.at("eta_c").get<double>();
        double eps = j.at("eps_c").get<double>();
        Matrix cg = matrix_from_json(j.at("coupling"));
        std::vector<Subsystem> subs;
        for (const auto& sj : j.at("subsystems")) {
            Subsystem s;
            s.name = sj.at("name").get<std::string>();
            for (const auto& pj : sj.at("points")) {
                SubsystemPoint p;
                p.alpha_e = pj.at("alpha").get<double>();
                p.x_e = pj.at("x_e").get<double>();
                p.u_e = pj.at("u_e").get<double>();
                p.a_p = pj.at("a_p").get<double>();
                p.b_p = pj.at("b_p").get<double>();
                p.k_i = pj.at("k_i").get<double>();
                s.points.push_back(p);
            }
            subs.push_back(std::move(s));
        }
        return SubsystemFamily(std::move(subs), std::move(cg), eta, eps);
    } catch (const nlohmann::json::exception& e) {
        throw std::invalid_argument(std::string("SubsystemFamily: malformed document: ") +
                                    e.what());
    }
}

SubsystemFamily SubsystemFamily::load(const std::string& path)
{
    std::ifstream in(path);
    if (!in) throw std::invalid_argument("SubsystemFamily: cannot open " + path);
    nlohmann::json j;
    try {
        in >> j;
    } catch (const nlohmann::json::exception& e) {
        throw std::invalid_argument("SubsystemFamily: parse failure in " + path + ": " + e.what());
    }
    return from_json(j);
}

Matrix subsystem_reference(const SubsystemFamily& sub, int k, double alpha)
{
    Matrix Am = sub.subsystem_plant(k, alpha);
    Am += sub.b() * sub.gain(k, alpha).transpose();
    return Am;
}

}  // namespace gsmrac
