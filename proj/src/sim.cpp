#include "gsmrac/sim.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

namespace gsmrac {

namespace {

Matrix diag_or_matrix(const nlohmann::json& j)
{
    if (j.is_array() && !j.empty() && j[0].is_number()) {
        Vector d = vector_from_json(j);
        return Matrix(d.asDiagonal());
    }
    return matrix_from_json(j);
}

nlohmann::json load_json_file(const std::string& path)
{
    std::ifstream in(path);
    if (!in) throw std::invalid_argument("cannot open " + path);
    nlohmann::json j;
    try {
        in >> j;
    } catch (const nlohmann::json::exception& e) {
        throw std::invalid_argument("parse failure in " + path + ": " + e.what());
    }
    return j;
}

Matrix matrix_or_file(const nlohmann::json& j, const std::string& base_dir)
{
    if (j.is_string())
        return matrix_from_json(
            load_json_file((std::filesystem::path(base_dir) / j.get<std::string>()).string()));
    return matrix_from_json(j);
}

ColumnBounds uniform_bounds(double theta_max, double eps_theta, int cols)
{
    return ColumnBounds(cols, ConvexBound(theta_max, eps_theta));
}

Matrix q_from_config(const nlohmann::json& cj, int dim)
{
    if (cj.contains("Q_scale"))
        return cj.at("Q_scale").get<double>() * Matrix::Identity(dim, dim);
    return matrix_from_json(cj.at("Q"));
}

}  // namespace

Scenario Scenario::from_json(const nlohmann::json& j, const std::string& base_dir)
{
    Scenario s;
    try {
        const std::string v = j.at("variant").get<std::string>();
        if (v == "basic")
            s.variant = Variant::basic;
        else if (v == "constrained")
            s.variant = Variant::constrained;
        else if (v == "decentralized")
            s.variant = Variant::decentralized;
        else
            throw std::invalid_argument("Scenario: unknown variant " + v);

        s.duration = j.value("duration", 60.0);
        s.dt = j.value("dt", 1e-3);
        s.seed = j.value("seed", std::uint64_t{0});
        for (const auto& seg : j.at("profile"))
            s.profile.push_back({seg.at("time").get<double>(), seg.at("alpha").get<double>()});
        if (j.contains("degradation")) {
            s.delta_A = j["degradation"].value("delta_A", 0.0);
            s.delta_B = j["degradation"].value("delta_B", 0.0);
        }
        if (j.contains("sat_limits")) s.sat_limits = SatLimits(vector_from_json(j["sat_limits"]));

        if (s.variant == Variant::decentralized) {
            auto path = std::filesystem::path(base_dir) / j.at("subsystems").get<std::string>();
            s.subsystems = std::make_shared<SubsystemFamily>(SubsystemFamily::load(path.string()));
            for (const auto& cj : j.at("sub_controllers")) {
                SubsystemConfig c{matrix_or_file(cj.at("P"), base_dir), q_from_config(cj, 3),
                                  diag_or_matrix(cj.at("Gamma")), vector_from_json(cj.at("K_hat0")),
                                  ConvexBound(cj.at("theta_max").get<double>(),
                                              cj.at("eps_theta").get<double>())};
                s.sub_ctrl.push_back(std::move(c));
            }
        } else {
            auto path = std::filesystem::path(base_dir) / j.at("family").get<std::string>();
            s.family = std::make_shared<PlantFamily>(PlantFamily::load(path.string()));
            const int D = s.family->aug_dim();
            const int m = s.family->m();
            const auto& cj = j.at("controller");
            s.ctrl.P = matrix_or_file(cj.at("P"), base_dir);
            s.ctrl.Q = q_from_config(cj, D);
            s.ctrl.Gamma = diag_or_matrix(cj.at("Gamma"));
            s.ctrl.K_hat0 = matrix_from_json(cj.at("K_hat0"));
            s.ctrl.bounds = uniform_bounds(cj.at("theta_max").get<double>(),
                                           cj.at("eps_theta").get<double>(), m);
            if (s.variant == Variant::constrained) {
                s.ctrl.Gamma_delta = diag_or_matrix(cj.at("Gamma_delta"));
                s.ctrl.K_delta0 = matrix_from_json(cj.at("K_delta0"));
                s.ctrl.delta_mask = matrix_from_json(cj.at("delta_mask"));
                s.ctrl.bounds_delta = uniform_bounds(cj.at("theta_max_delta").get<double>(),
                                                     cj.at("eps_theta_delta").get<double>(), D);
            } else {
                s.ctrl.Gamma_delta = Matrix::Identity(m, m);
                s.ctrl.K_delta0 = Matrix::Zero(D, m);
                s.ctrl.delta_mask = Matrix::Zero(m, D);
                s.ctrl.bounds_delta = uniform_bounds(1.0, 1.0, D);
            }
        }
    } catch (const nlohmann::json::exception& e) {
        throw std::invalid_argument(std::string("Scenario: malformed document: ") + e.what());
    }
    s.validate();
    return s;
}

Scenario Scenario::load(const std::string& path)
{
    return from_json(load_json_file(path), std::filesystem::path(path).parent_path().string());
}

void Scenario::validate() const
{
    if (!(dt > 0.0) || duration < dt)
        throw std::invalid_argument("Scenario: need dt > 0 and duration >= dt");
    if (profile.empty()) throw std::invalid_argument("Scenario: empty command profile");
    if (delta_A < 0.0 || delta_A > 0.3 || delta_B < 0.0 || delta_B > 0.3)
        throw std::invalid_argument("Scenario: degradation magnitudes must lie in [0, 0.3]");
    double lo, hi;
    if (variant == Variant::decentralized) {
        if (!subsystems) throw std::invalid_argument("Scenario: missing subsystem family");
        if (static_cast<int>(sub_ctrl.size()) != subsystems->count())
            throw std::invalid_argument("Scenario: one controller per subsystem required");
        lo = subsystems->alpha_lo();
        hi = subsystems->alpha_hi();
    } else {
        if (!family) throw std::invalid_argument("Scenario: missing plant family");
        lo = family->alpha_lo();
        hi = family->alpha_hi();
    }
    double prev = -std::numeric_limits<double>::infinity();
    for (const auto& seg : profile) {
        if (seg.time < 0.0 || seg.time <= prev)
            throw std::invalid_argument("Scenario: profile times must be strictly increasing");
        prev = seg.time;
        if (seg.alpha_target < lo - 1e-12 || seg.alpha_target > hi + 1e-12)
            throw std::invalid_argument("Scenario: profile target outside the family alpha range");
    }
    if (variant == Variant::constrained && !sat_limits)
        throw std::invalid_argument("Scenario: constrained variant needs sat_limits");
}

Vector rk4_step(const std::function<Vector(double, const Vector&)>& f, double t,
                const Vector& state, double dt)
{
    if (!(dt > 0.0)) throw std::invalid_argument("rk4_step: dt must be positive");
    auto checked = [&](Vector&& k, const char* stage) -> Vector {
        for (Eigen::Index i = 0; i < k.size(); ++i)
            if (!std::isfinite(k(i)))
                throw std::runtime_error(std::string("rk4_step: non-finite derivative at ") +
                                         stage + ", component " + std::to_string(i));
        return std::move(k);
    };
    Vector k1 = checked(f(t, state), "stage 1");
    Vector k2 = checked(f(t + 0.5 * dt, state + 0.5 * dt * k1), "stage 2");
    Vector k3 = checked(f(t + 0.5 * dt, state + 0.5 * dt * k2), "stage 3");
    Vector k4 = checked(f(t + dt, state + dt * k3), "stage 4");
    return state + (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
}

namespace {

Vector target_output(const Scenario& s, double alpha)
{
    if (s.variant == Variant::decentralized) {
        Vector r(s.subsystems->count());
        for (int k = 0; k < s.subsystems->count(); ++k) r(k) = s.subsystems->x_e(k, alpha);
        return r;
    }
    return s.family->x_p_e(alpha);
}

}  // namespace

Vector command_profile(const Scenario& s, double t)
{
    if (t < 0.0 || t > s.duration + 1e-12)
        throw std::domain_error("command_profile: t outside [0, duration]");
    const auto& p = s.profile;
    if (t <= p.front().time) return target_output(s, p.front().alpha_target);
    if (t >= p.back().time) return target_output(s, p.back().alpha_target);
    size_t i = 0;
    while (t > p[i + 1].time) ++i;
    double w = (t - p[i].time) / (p[i + 1].time - p[i].time);
    return (1.0 - w) * target_output(s, p[i].alpha_target) +
           w * target_output(s, p[i + 1].alpha_target);
}

double profile_r_max(const Scenario& s)
{
    double r = 0.0;
    for (const auto& seg : s.profile)
        r = std::max(r, target_output(s, seg.alpha_target).norm());
    return r;
}

int SimTrace::column(const std::string& name) const
{
    for (size_t i = 0; i < header.size(); ++i)
        if (header[i] == name) return static_cast<int>(i);
    return -1;
}

double SimTrace::value(size_t row, const std::string& name) const
{
    int c = column(name);
    if (c < 0) throw std::invalid_argument("SimTrace: no column named " + name);
    return rows.at(row).at(static_cast<size_t>(c));
}

void SimTrace::write_csv(std::ostream& out) const
{
    for (size_t i = 0; i < header.size(); ++i) {
        if (i) out << ',';
        out << header[i];
    }
    out << '\n';
    char buf[40];
    for (const auto& row : rows) {
        for (size_t i = 0; i < row.size(); ++i) {
            std::snprintf(buf, sizeof(buf), "%.17g", row[i]);
            if (i) out << ',';
            out << buf;
        }
        out << '\n';
    }
}

SimTrace SimTrace::read_csv(std::istream& in)
{
    SimTrace t;
    std::string line;
    if (!std::getline(in, line)) throw std::invalid_argument("SimTrace: empty input");
    std::stringstream hs(line);
    std::string cell;
    while (std::getline(hs, cell, ',')) t.header.push_back(cell);
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        std::vector<double> row;
        std::stringstream rs(line);
        while (std::getline(rs, cell, ',')) row.push_back(std::stod(cell));
        if (row.size() != t.header.size())
            throw std::invalid_argument("SimTrace: row width differs from header");
        t.rows.push_back(std::move(row));
    }
    return t;
}

namespace {

constexpr double kDivergenceLimit = 1e6;
constexpr double kReprojectSlack = 1e-9;

void reproject_columns(Matrix& K, const ColumnBounds& bounds)
{
    for (Eigen::Index j = 0; j < K.cols(); ++j) {
        const auto& b = bounds[static_cast<size_t>(j)];
        if (b.theta_max <= 0.0) continue;
        double f = boundary_fn(K.col(j), b);
        if (f > 1.0 + kReprojectSlack) {
            double target = b.theta_max * std::sqrt(1.0 + b.eps_theta);
            K.col(j) *= target / K.col(j).norm();
        }
    }
}

void check_divergence(const Vector& y, double t, const std::vector<double>& last_row)
{
    if (!y.allFinite() || y.cwiseAbs().maxCoeff() > kDivergenceLimit)
        throw DivergenceError(t, last_row,
                              "simulation diverged at t = " + std::to_string(t) +
                                  " (state norm above 1e6)");
}

SimTrace run_monolithic(const Scenario& s)
{
    const PlantFamily& fam = *s.family;
    PlantFamily pert = fam.perturbed(s.delta_A, s.delta_B);
    const int n = fam.n(), m = fam.m(), D = fam.aug_dim();
    const bool constrained = s.variant == Variant::constrained;

    const SatLimits lim = s.sat_limits ? *s.sat_limits
                                       : SatLimits(Vector::Constant(m, 1e300));

    // stacked state: [x; x_m; vec(K_hat); e_delta; vec(K_delta)]
    const int oX = 0, oXm = D, oK = 2 * D, oE = 2 * D + D * m, oKd = 3 * D + D * m;
    const int total = 3 * D + 2 * D * m;

    const double alpha0 = s.profile.front().alpha_target;
    Vector y = Vector::Zero(total);
    y.segment(oX, n) = fam.x_p_e(alpha0);
    y.segment(oX + n, m) = fam.u_e(alpha0);
    y.segment(oXm, D) = y.segment(oX, D);
    Eigen::Map<Matrix>(y.data() + oK, D, m) = s.ctrl.K_hat0;
    Eigen::Map<Matrix>(y.data() + oKd, D, m) = s.ctrl.K_delta0;

    auto deriv = [&](double t, const Vector& z) -> Vector {
        Eigen::Map<const Matrix> Khat(z.data() + oK, D, m);
        Eigen::Map<const Matrix> Kdelta(z.data() + oKd, D, m);
        Vector x = z.segment(oX, D);
        Vector xm = z.segment(oXm, D);
        Vector e_delta = z.segment(oE, D);
        double alpha = x.head(n).norm();
        Vector r = command_profile(s, std::min(t, s.duration));
        Matrix Am = reference_matrix(fam, alpha);
        PlantMatrices pm = plant_matrices(pert, alpha);

        ConstrainedAdaptiveState cs{{Khat, s.ctrl.bounds, s.ctrl.Gamma},
                                    Kdelta,
                                    s.ctrl.bounds_delta,
                                    s.ctrl.Gamma_delta,
                                    s.ctrl.delta_mask,
                                    e_delta};
        ConstrainedStep st = step_constrained(cs, x, xm, lim, s.ctrl.P, pm.B, Am);

        Vector dz(total);
        dz.segment(oX, D) = pm.A * x + pm.B * st.v_applied + pm.B_r * r;
        dz.segment(oXm, D) = Am * xm + pm.B_r * r;
        Eigen::Map<Matrix>(dz.data() + oK, D, m) = st.dK_hat;
        dz.segment(oE, D) = st.de_delta;
        Eigen::Map<Matrix>(dz.data() + oKd, D, m) = st.dK_delta_T.transpose();
        return dz;
    };

    SimTrace trace;
    trace.header.push_back("t");
    for (int i = 1; i <= D; ++i) trace.header.push_back("x" + std::to_string(i));
    for (int i = 1; i <= D; ++i) trace.header.push_back("xm" + std::to_string(i));
    trace.header.push_back("e_norm");
    if (constrained) trace.header.push_back("ev_norm");
    for (int i = 1; i <= m; ++i) trace.header.push_back("v" + std::to_string(i) + "_raw");
    for (int i = 1; i <= m; ++i) trace.header.push_back("v" + std::to_string(i) + "_app");
    for (int i = 1; i <= m; ++i) trace.header.push_back("u" + std::to_string(i));
    trace.header.push_back("alpha");
    for (int r = 1; r <= D; ++r)
        for (int c = 1; c <= m; ++c)
            trace.header.push_back("Khat_" + std::to_string(r) + "_" + std::to_string(c));
    if (constrained)
        for (int r = 1; r <= D; ++r)
            for (int c = 1; c <= m; ++c)
                trace.header.push_back("Kdelta_" + std::to_string(r) + "_" + std::to_string(c));

    const auto steps = static_cast<long>(std::llround(s.duration / s.dt));
    auto log_row = [&](double t) {
        Eigen::Map<const Matrix> Khat(y.data() + oK, D, m);
        Eigen::Map<const Matrix> Kdelta(y.data() + oKd, D, m);
        Vector x = y.segment(oX, D);
        Vector xm = y.segment(oXm, D);
        Vector v_raw = Khat.transpose() * x;
        Vector v_app = sat(v_raw, lim);
        std::vector<double> row;
        row.reserve(trace.header.size());
        row.push_back(t);
        for (int i = 0; i < D; ++i) row.push_back(x(i));
        for (int i = 0; i < D; ++i) row.push_back(xm(i));
        row.push_back((x - xm).norm());
        if (constrained) row.push_back((x - xm - y.segment(oE, D)).norm());
        for (int i = 0; i < m; ++i) row.push_back(v_raw(i));
        for (int i = 0; i < m; ++i) row.push_back(v_app(i));
        for (int i = 0; i < m; ++i) row.push_back(x(n + i));
        row.push_back(x.head(n).norm());
        for (int r = 0; r < D; ++r)
            for (int c = 0; c < m; ++c) row.push_back(Khat(r, c));
        if (constrained)
            for (int r = 0; r < D; ++r)
                for (int c = 0; c < m; ++c) row.push_back(Kdelta(r, c));
        trace.rows.push_back(std::move(row));
    };

    log_row(0.0);
    for (long i = 0; i < steps; ++i) {
        double t = static_cast<double>(i) * s.dt;
        y = rk4_step(deriv, t, y, s.dt);
        Matrix Khat = Eigen::Map<Matrix>(y.data() + oK, D, m);
        reproject_columns(Khat, s.ctrl.bounds);
        Eigen::Map<Matrix>(y.data() + oK, D, m) = Khat;
        Matrix KdT = Eigen::Map<Matrix>(y.data() + oKd, D, m).transpose();
        reproject_columns(KdT, s.ctrl.bounds_delta);
        Eigen::Map<Matrix>(y.data() + oKd, D, m) = KdT.transpose();
        check_divergence(y, t + s.dt, trace.rows.back());
        log_row(static_cast<double>(i + 1) * s.dt);
    }
    return trace;
}

SimTrace run_decentralized(const Scenario& s)
{
    const SubsystemFamily& fam = *s.subsystems;
    SubsystemFamily pert = fam.perturbed(s.delta_A, s.delta_B);
    const int N = fam.count();
    const int d = fam.sub_dim();
    const int oX = 0, oXm = N * d, oK = 2 * N * d;
    const int total = 3 * N * d;

    const double alpha0 = s.profile.front().alpha_target;
    Vector y = Vector::Zero(total);
    for (int k = 0; k < N; ++k) {
        y(oX + k * d + 0) = fam.x_e(k, alpha0);
        y(oX + k * d + 1) = fam.u_e(k, alpha0);
        y.segment(oXm + k * d, d) = y.segment(oX + k * d, d);
        y.segment(oK + k * d, d) = s.sub_ctrl[k].K_hat0;
    }

    const Vector b = fam.b();
    const Vector b_r = fam.b_r();

    auto global_alpha = [&](const Vector& z) {
        double a2 = 0.0;
        for (int k = 0; k < N; ++k) a2 += z(oX + k * d) * z(oX + k * d);
        return std::sqrt(a2);
    };

    auto deriv = [&](double t, const Vector& z) -> Vector {
        double alpha = global_alpha(z);
        Vector r = command_profile(s, std::min(t, s.duration));
        Vector dz(total);
        for (int k = 0; k < N; ++k) {
            Vector xk = z.segment(oX + k * d, d);
            Vector xmk = z.segment(oXm + k * d, d);
            Vector Kk = z.segment(oK + k * d, d);
            Matrix Ak = pert.subsystem_plant(k, alpha);
            Matrix Amk = subsystem_reference(fam, k, alpha);
            double vk = Kk.dot(xk);
            Vector dxk = Ak * xk + b * vk + b_r * r(k);
            for (int q = 0; q < N; ++q)
                if (q != k) dxk += pert.coupling(k, q) * z.segment(oX + q * d, d);
            dz.segment(oX + k * d, d) = dxk;
            dz.segment(oXm + k * d, d) = Amk * xmk + b_r * r(k);
            Vector ek = xk - xmk;
            AdaptiveState st{Kk, ColumnBounds{s.sub_ctrl[k].bound}, s.sub_ctrl[k].Gamma};
            dz.segment(oK + k * d, d) = adapt_decentralized(st, xk, ek, s.sub_ctrl[k].P, b);
        }
        return dz;
    };

    SimTrace trace;
    trace.header.push_back("t");
    for (int i = 1; i <= N * d; ++i) trace.header.push_back("x" + std::to_string(i));
    for (int i = 1; i <= N * d; ++i) trace.header.push_back("xm" + std::to_string(i));
    trace.header.push_back("e_norm");
    for (int k = 1; k <= N; ++k) trace.header.push_back("v" + std::to_string(k) + "_raw");
    for (int k = 1; k <= N; ++k) trace.header.push_back("v" + std::to_string(k) + "_app");
    for (int k = 1; k <= N; ++k) trace.header.push_back("u" + std::to_string(k));
    trace.header.push_back("alpha");
    for (int r = 1; r <= d; ++r)
        for (int c = 1; c <= N; ++c)
            trace.header.push_back("Khat_" + std::to_string(r) + "_" + std::to_string(c));

    auto log_row = [&](double t) {
        std::vector<double> row;
        row.reserve(trace.header.size());
        row.push_back(t);
        for (int i = 0; i < N * d; ++i) row.push_back(y(oX + i));
        for (int i = 0; i < N * d; ++i) row.push_back(y(oXm + i));
        row.push_back((y.segment(oX, N * d) - y.segment(oXm, N * d)).norm());
        for (int k = 0; k < N; ++k)
            row.push_back(y.segment(oK + k * d, d).dot(y.segment(oX + k * d, d)));
        for (int k = 0; k < N; ++k)
            row.push_back(y.segment(oK + k * d, d).dot(y.segment(oX + k * d, d)));
        for (int k = 0; k < N; ++k) row.push_back(y(oX + k * d + 1));
        row.push_back(global_alpha(y));
        for (int r = 0; r < d; ++r)
            for (int k = 0; k < N; ++k) row.push_back(y(oK + k * d + r));
        trace.rows.push_back(std::move(row));
    };

    const auto steps = static_cast<long>(std::llround(s.duration / s.dt));
    log_row(0.0);
    for (long i = 0; i < steps; ++i) {
        double t = static_cast<double>(i) * s.dt;
        y = rk4_step(deriv, t, y, s.dt);
        for (int k = 0; k < N; ++k) {
            Matrix Kk = y.segment(oK + k * d, d);
            reproject_columns(Kk, ColumnBounds{s.sub_ctrl[k].bound});
            y.segment(oK + k * d, d) = Kk;
        }
        check_divergence(y, t + s.dt, trace.rows.back());
        log_row(static_cast<double>(i + 1) * s.dt);
    }
    return trace;
}

}  // namespace

SimTrace run(const Scenario& s)
{
    s.validate();
    if (s.variant == Variant::decentralized) return run_decentralized(s);
    return run_monolithic(s);
}

namespace {

constexpr double kBoundSlack = 1e-6;

/// Rate bounds for the scheduled ideal gain along the commanded trajectory,
/// column-wise, with a 1.5 safety factor.
Vector commanded_gain_rates(const Scenario& s)
{
    if (s.variant == Variant::decentralized) {
        const int N = s.subsystems->count();
        Vector d = Vector::Zero(N);
        double prev_a = command_profile(s, 0.0).norm();
        for (double t = s.dt; t <= s.duration + 1e-12; t += s.dt) {
            double a = command_profile(s, std::min(t, s.duration)).norm();
            for (int k = 0; k < N; ++k) {
                double rate =
                    (s.subsystems->gain(k, a) - s.subsystems->gain(k, prev_a)).norm() / s.dt;
                d(k) = std::max(d(k), rate);
            }
            prev_a = a;
        }
        return 1.5 * d;
    }
    const int m = s.family->m();
    Vector d = Vector::Zero(m);
    double prev_a = command_profile(s, 0.0).norm();
    Matrix prev_K = gain_schedule(*s.family, prev_a);
    for (double t = s.dt; t <= s.duration + 1e-12; t += s.dt) {
        double a = command_profile(s, std::min(t, s.duration)).norm();
        Matrix K = gain_schedule(*s.family, a);
        for (int j = 0; j < m; ++j)
            d(j) = std::max(d(j), (K.col(j) - prev_K.col(j)).norm() / s.dt);
        prev_K = std::move(K);
    }
    return 1.5 * d;
}

double max_column(const SimTrace& tr, const std::string& name)
{
    int c = tr.column(name);
    if (c < 0) throw std::invalid_argument("bounds_report: missing column " + name);
    double mx = -std::numeric_limits<double>::infinity();
    for (const auto& row : tr.rows) mx = std::max(mx, row[static_cast<size_t>(c)]);
    return mx;
}

double max_containment(const SimTrace& tr, const std::string& prefix, int rows, int cols,
                       const ColumnBounds& bounds)
{
    std::vector<int> idx;
    for (int r = 1; r <= rows; ++r)
        for (int c = 1; c <= cols; ++c)
            idx.push_back(tr.column(prefix + "_" + std::to_string(r) + "_" + std::to_string(c)));
    double worst = -std::numeric_limits<double>::infinity();
    Vector col(rows);
    for (const auto& row : tr.rows)
        for (int c = 0; c < cols; ++c) {
            if (bounds[static_cast<size_t>(c)].theta_max <= 0.0) continue;
            for (int r = 0; r < rows; ++r) col(r) = row[static_cast<size_t>(idx[r * cols + c])];
            worst = std::max(worst, boundary_fn(col, bounds[static_cast<size_t>(c)]));
        }
    return worst;
}

nlohmann::json monolithic_report(const Scenario& s, const SimTrace& tr, bool& all_pass)
{
    nlohmann::json rep;
    const PlantFamily& fam = *s.family;
    const int D = fam.aug_dim(), m = fam.m();
    const double r_max = profile_r_max(s);
    rep["r_max"] = r_max;

    Vector d_k = commanded_gain_rates(s);
    rep["d_k"] = std::vector<double>(d_k.data(), d_k.data() + d_k.size());

    Theorem2Bounds t2 = theorem2_bounds(s.ctrl.bounds, s.ctrl.Gamma, s.ctrl.P, s.ctrl.Q, d_k);
    const bool constrained = s.variant == Variant::constrained;
    const std::string err_col = constrained ? "ev_norm" : "e_norm";
    double observed = max_column(tr, err_col);
    bool t2_pass = observed <= t2.e_bound + kBoundSlack;
    rep[constrained ? "theorem3" : "theorem2"] = {{"k_m", t2.k_m},
                                                  {"e_bound", t2.e_bound},
                                                  {"error_column", err_col},
                                                  {"observed_max", observed},
                                                  {"pass", t2_pass}};
    all_pass = all_pass && t2_pass;

    double worst_f = max_containment(tr, "Khat", D, m, s.ctrl.bounds);
    bool contain_pass = worst_f <= 1.0 + kBoundSlack;
    rep["containment"] = {{"worst_f", worst_f}, {"pass", contain_pass}};
    all_pass = all_pass && contain_pass;

    if (constrained) {
        const SatLimits& lim = *s.sat_limits;
        double worst_excess = -std::numeric_limits<double>::infinity();
        for (int i = 1; i <= m; ++i) {
            int c = tr.column("v" + std::to_string(i) + "_app");
            for (const auto& row : tr.rows)
                worst_excess = std::max(
                    worst_excess, std::abs(row[static_cast<size_t>(c)]) - lim.limits()(i - 1));
        }
        bool sat_pass = worst_excess <= 0.0;
        rep["saturation"] = {{"worst_excess", worst_excess}, {"pass", sat_pass}};
        all_pass = all_pass && sat_pass;

        double alpha0 = tr.value(0, "alpha");
        PlantMatrices pm = plant_matrices(fam, alpha0);
        Matrix Ktil0 = s.ctrl.K_hat0 - gain_schedule(fam, alpha0);
        Matrix Kdtil0 = s.ctrl.K_delta0 - pm.B;
        double V0 = (Ktil0.transpose() * s.ctrl.Gamma.inverse() * Ktil0).trace() +
                    (Kdtil0 * s.ctrl.Gamma_delta.inverse() * Kdtil0.transpose()).trace();
        Vector x0(D);
        for (int i = 0; i < D; ++i) x0(i) = tr.value(0, "x" + std::to_string(i + 1));

        Theorem4Bounds t4 =
            theorem4_bounds(s.ctrl.bounds, s.ctrl.bounds_delta, s.ctrl.Gamma, s.ctrl.Gamma_delta,
                            s.ctrl.P, s.ctrl.Q, lim, r_max, pm.B, pm.B_r, x0.norm(), V0);
        nlohmann::json t4j = {{"applicable", t4.applicable}, {"gamma_max", t4.gamma_max},
                              {"v_min", t4.v_min},           {"v0", t4.v0},
                              {"rho", t4.rho},               {"Z_B", t4.Z_B},
                              {"theta_star_max", t4.theta_star_max},
                              {"theta_max", t4.theta_max},   {"x_max", t4.x_max}};
        if (!t4.note.empty()) t4j["note"] = t4.note;
        if (t4.applicable) {
            t4j["x_min"] = t4.x_min;
            t4j["Z_max"] = t4.Z_max;
            t4j["condition_i"] = t4.condition_i;
            t4j["condition_ii"] = t4.condition_ii;
            if (t4.condition_i && t4.condition_ii) {
                double max_x = 0.0;
                Vector x(D);
                std::vector<int> xi;
                for (int i = 1; i <= D; ++i) xi.push_back(tr.column("x" + std::to_string(i)));
                for (const auto& row : tr.rows) {
                    for (int i = 0; i < D; ++i) x(i) = row[static_cast<size_t>(xi[i])];
                    max_x = std::max(max_x, x.norm());
                }
                bool pass = max_x < t4.x_max;
                t4j["observed_max_x"] = max_x;
                t4j["pass"] = pass;
                all_pass = all_pass && pass;
            }
        }
        rep["theorem4"] = t4j;

        // bounds_delta applies to the columns of K_delta^T, i.e. the rows of
        // the logged Kdelta entries
        double worst_fd = -std::numeric_limits<double>::infinity();
        Vector kd_row(m);
        for (int r = 0; r < D; ++r) {
            const auto& b = s.ctrl.bounds_delta[static_cast<size_t>(r)];
            if (b.theta_max <= 0.0) continue;
            std::vector<int> idx;
            for (int c = 1; c <= m; ++c)
                idx.push_back(tr.column("Kdelta_" + std::to_string(r + 1) + "_" +
                                        std::to_string(c)));
            for (const auto& row : tr.rows) {
                for (int c = 0; c < m; ++c) kd_row(c) = row[static_cast<size_t>(idx[c])];
                worst_fd = std::max(worst_fd, boundary_fn(kd_row, b));
            }
        }
        bool fd_pass = worst_fd <= 1.0 + kBoundSlack;
        rep["containment_delta"] = {{"worst_f", worst_fd}, {"pass", fd_pass}};
        all_pass = all_pass && fd_pass;
    }
    return rep;
}

nlohmann::json decentralized_report(const Scenario& s, const SimTrace& tr, bool& all_pass)
{
    nlohmann::json rep;
    const SubsystemFamily& fam = *s.subsystems;
    const int N = fam.count(), d = fam.sub_dim();
    Vector d_k = commanded_gain_rates(s);

    Matrix cg(N, N);
    for (int k = 0; k < N; ++k)
        for (int q = 0; q < N; ++q) cg(k, q) = k == q ? 0.0 : fam.coupling_gain(k, q);

    // reference ceilings: sup_t of the coupled reference-norm sums
    std::vector<double> xm_bar(N, 0.0);
    std::vector<std::vector<int>> xm_idx(N);
    for (int k = 0; k < N; ++k)
        for (int i = 0; i < d; ++i)
            xm_idx[k].push_back(tr.column("xm" + std::to_string(k * d + i + 1)));
    for (const auto& row : tr.rows) {
        std::vector<double> norms(N);
        for (int k = 0; k < N; ++k) {
            double s2 = 0.0;
            for (int i = 0; i < d; ++i) {
                double v = row[static_cast<size_t>(xm_idx[k][i])];
                s2 += v * v;
            }
            norms[k] = std::sqrt(s2);
        }
        for (int k = 0; k < N; ++k) {
            double acc = 0.0;
            for (int q = 0; q < N; ++q)
                if (q != k) acc += cg(k, q) * norms[q];
            xm_bar[k] = std::max(xm_bar[k], acc);
        }
    }

    std::vector<SubsystemBoundData> subs;
    for (int k = 0; k < N; ++k)
        subs.push_back({s.sub_ctrl[k].P, s.sub_ctrl[k].Q, s.sub_ctrl[k].Gamma,
                        s.sub_ctrl[k].bound.theta_max, d_k(k), xm_bar[k]});
    Theorem5Bounds t5 = theorem5_bounds(subs, cg);

    nlohmann::json t5j = {{"applicable", t5.applicable},
                          {"lambda_min_Pi", t5.lambda_min_Pi},
                          {"psi", t5.psi},
                          {"xi_norm", t5.xi.norm()},
                          {"x_m_bar", xm_bar}};
    if (t5.applicable) {
        const double radius = t5.ubb_radius;
        const double band = 1.05 * radius;
        t5j["ubb_radius"] = radius;
        int ec = tr.column("e_norm");
        long entry = -1;
        for (long i = static_cast<long>(tr.rows.size()) - 1; i >= 0; --i) {
            if (tr.rows[static_cast<size_t>(i)][static_cast<size_t>(ec)] > band) {
                entry = i + 1;
                break;
            }
        }
        if (entry < 0) entry = 0;
        bool entered = entry < static_cast<long>(tr.rows.size());
        double entry_time = entered ? tr.rows[static_cast<size_t>(entry)][0]
                                    : std::numeric_limits<double>::infinity();
        bool pass = entered && entry_time < 0.5 * s.duration;
        t5j["entry_time"] = entry_time;
        t5j["pass"] = pass;
        all_pass = all_pass && pass;
    } else {
        all_pass = false;
    }
    rep["theorem5"] = t5j;

    double worst_f = -std::numeric_limits<double>::infinity();
    for (int k = 0; k < N; ++k) {
        Vector col(d);
        std::vector<int> idx;
        for (int r = 1; r <= d; ++r)
            idx.push_back(tr.column("Khat_" + std::to_string(r) + "_" + std::to_string(k + 1)));
        for (const auto& row : tr.rows) {
            for (int r = 0; r < d; ++r) col(r) = row[static_cast<size_t>(idx[r])];
            worst_f = std::max(worst_f, boundary_fn(col, s.sub_ctrl[k].bound));
        }
    }
    bool contain_pass = worst_f <= 1.0 + kBoundSlack;
    rep["containment"] = {{"worst_f", worst_f}, {"pass", contain_pass}};
    all_pass = all_pass && contain_pass;
    return rep;
}

}  // namespace

BoundsReport bounds_report(const Scenario& s, const SimTrace& trace)
{
    BoundsReport out;
    out.all_pass = true;
    nlohmann::json rep;
    rep["variant"] = s.variant == Variant::basic        ? "basic"
                     : s.variant == Variant::constrained ? "constrained"
                                                          : "decentralized";
    if (s.variant == Variant::decentralized)
        rep.update(decentralized_report(s, trace, out.all_pass));
    else
        rep.update(monolithic_report(s, trace, out.all_pass));
    rep["all_pass"] = out.all_pass;
    out.json = rep;
    return out;
}

}  // namespace gsmrac
