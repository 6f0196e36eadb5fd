#include <doctest.h>

#include "gsmrac/lpv_model.hpp"
#include "gsmrac/mrac.hpp"

#include <fstream>

using namespace gsmrac;

namespace {

Matrix load_matrix(const std::string& path) {
    std::ifstream in(path);
    REQUIRE(in.good());
    nlohmann::json j;
    in >> j;
    return matrix_from_json(j);
}

ColumnBounds uniform_bounds(size_t count, double theta_max, double eps_theta) {
    return ColumnBounds(count, ConvexBound(theta_max, eps_theta));
}

}  // namespace

TEST_CASE("control_basic: linear feedback through the adapted gain") {
    AdaptiveState s{Matrix::Zero(3, 2), uniform_bounds(2, 1.0, 0.5), Matrix::Identity(3, 3)};
    s.K_hat << 1.0, 0.0, 0.0, 2.0, -1.0, 0.5;
    Vector x(3);
    x << 1.0, 1.0, 2.0;
    Vector v = control_basic(s, x);
    CHECK(v(0) == doctest::Approx(-1.0).epsilon(1e-14));
    CHECK(v(1) == doctest::Approx(3.0).epsilon(1e-14));
    CHECK_THROWS(control_basic(s, Vector::Zero(2)));
}

TEST_CASE("adapt_basic: interior gain follows the raw gradient law") {
    // with Gamma = I and every column strictly inside its ball the update is
    // exactly -x e^T P B
    AdaptiveState s{Matrix::Zero(3, 2), uniform_bounds(2, 10.0, 0.5), Matrix::Identity(3, 3)};
    Matrix P = 2.0 * Matrix::Identity(3, 3);
    Matrix B(3, 2);
    B << 0.0, 0.0, 1.0, 0.0, 0.0, 1.0;
    Vector x(3), e(3);
    x << 1.0, -1.0, 0.5;
    e << 0.2, 0.1, -0.3;
    Matrix dK = adapt_basic(s, x, e, P, B);
    Matrix expect = -x * (e.transpose() * P * B);
    CHECK((dK - expect).cwiseAbs().maxCoeff() < 1e-14);
}

TEST_CASE("adapt_basic: boundary update is tangential or inward") {
    AdaptiveState s{Matrix::Zero(2, 1), uniform_bounds(1, 1.0, 0.5), Matrix::Identity(2, 2)};
    // place the column on the outer shell f = 1
    double outer = 1.0 * std::sqrt(1.5);
    s.K_hat << outer, 0.0;
    Matrix P = Matrix::Identity(2, 2);
    Matrix B(2, 1);
    B << 1.0, 0.0;
    Vector x(2), e(2);
    x << -1.0, 0.0;  // makes Y = -x e^T P B point radially outward
    e << 1.0, 0.0;
    Matrix dK = adapt_basic(s, x, e, P, B);
    Vector g = boundary_grad(s.K_hat.col(0), s.bounds[0]);
    CHECK(g.dot(dK.col(0)) <= 1e-12);  // no outward component survives at f = 1
}

TEST_CASE("theorem2_bounds: closed forms in simple regimes") {
    Matrix P = Matrix::Identity(4, 4);
    Matrix Q = Matrix::Identity(4, 4);
    Matrix Gamma = 2.0 * Matrix::Identity(4, 4);

    // frozen schedule (d = 0): k_m collapses to 4 sum theta_j^2
    ColumnBounds b = uniform_bounds(2, 3.0, 0.1);
    Theorem2Bounds t = theorem2_bounds(b, Gamma, P, Q, Vector::Zero(2));
    CHECK(t.k_m == doctest::Approx(4.0 * 2.0 * 9.0).epsilon(1e-14));
    CHECK(t.e_bound == doctest::Approx(std::sqrt(72.0 * 0.5)).epsilon(1e-14));

    // no uncertainty at all: the bound vanishes
    ColumnBounds zero = uniform_bounds(2, 0.0, 0.1);
    Theorem2Bounds tz = theorem2_bounds(zero, Gamma, P, Q, Vector::Zero(2));
    CHECK(tz.k_m == 0.0);
    CHECK(tz.e_bound == 0.0);

    CHECK_THROWS(theorem2_bounds(b, Gamma, P, Q, Vector::Zero(3)));
    CHECK_THROWS(theorem2_bounds(b, Gamma, P, -Q, Vector::Zero(2)));
}

TEST_CASE("theorem2_bounds: engine configuration regression") {
    Matrix P = load_matrix(FIXTURES_DIR "/engine_P.json");
    Matrix Q = 0.1 * Matrix::Identity(6, 6);
    Matrix Gamma = 100.0 * Matrix::Identity(6, 6);
    ColumnBounds b = uniform_bounds(2, 3.4641016151377544, 0.1);
    Vector d_k = Vector::Constant(2, 0.024766722401734713);
    Theorem2Bounds t = theorem2_bounds(b, Gamma, P, Q, d_k);
    CHECK(t.k_m == doctest::Approx(96.04394616403502).epsilon(1e-12));
    CHECK(t.e_bound == doctest::Approx(3.1536472785231457).epsilon(1e-12));
}

TEST_CASE("step_constrained: wide limits reduce to the unconstrained law") {
    const int D = 4, m = 2;
    ConstrainedAdaptiveState s{
        AdaptiveState{Matrix::Zero(D, m), uniform_bounds(m, 5.0, 0.5),
                      Matrix::Identity(D, D)},
        Matrix::Zero(D, m), uniform_bounds(D, 5.0, 0.5), Matrix::Identity(m, m),
        Matrix::Ones(m, D), Vector::Zero(D)};
    s.gain.K_hat(0, 0) = 0.7;
    s.gain.K_hat(2, 1) = -0.4;

    Matrix P = Matrix::Identity(D, D);
    Matrix B = Matrix::Zero(D, m);
    B(1, 0) = 1.0;
    B(2, 1) = 1.0;
    Matrix A_m = -Matrix::Identity(D, D);
    SatLimits wide(Vector::Constant(m, 1e300));

    Vector x(D), x_m(D);
    x << 0.5, -0.2, 0.1, 0.3;
    x_m << 0.4, -0.1, 0.0, 0.2;

    ConstrainedStep out = step_constrained(s, x, x_m, wide, P, B, A_m);
    CHECK((out.v_raw - s.gain.K_hat.transpose() * x).cwiseAbs().maxCoeff() == 0.0);
    CHECK((out.v_applied - out.v_raw).cwiseAbs().maxCoeff() == 0.0);
    CHECK(out.dv.cwiseAbs().maxCoeff() == 0.0);
    CHECK(out.de_delta.cwiseAbs().maxCoeff() == 0.0);       // e_delta = 0 stays put
    CHECK(out.dK_delta_T.cwiseAbs().maxCoeff() == 0.0);     // no clipped command

    Matrix expect = adapt_basic(s.gain, x, x - x_m, P, B);
    CHECK((out.dK_hat - expect).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("step_constrained: clipping feeds the compensation error state") {
    const int D = 2, m = 1;
    ConstrainedAdaptiveState s{
        AdaptiveState{Matrix::Zero(D, m), uniform_bounds(m, 5.0, 0.5),
                      Matrix::Identity(D, D)},
        Matrix::Zero(D, m), uniform_bounds(D, 5.0, 0.5), Matrix::Identity(m, m),
        Matrix::Ones(m, D), Vector::Zero(D)};
    s.gain.K_hat << 1.0, 0.0;
    s.K_delta << 0.5, 0.25;

    Matrix P = Matrix::Identity(D, D);
    Matrix B(D, m);
    B << 0.0, 1.0;
    Matrix A_m = -Matrix::Identity(D, D);
    SatLimits lim(Vector::Constant(m, 0.3));

    Vector x(D), x_m(D);
    x << 1.0, 0.0;  // raw command 1.0 clips to 0.3
    x_m << 0.0, 0.0;

    ConstrainedStep out = step_constrained(s, x, x_m, lim, P, B, A_m);
    CHECK(out.v_raw(0) == doctest::Approx(1.0).epsilon(1e-14));
    CHECK(out.v_applied(0) == doctest::Approx(0.3).epsilon(1e-14));
    CHECK(out.dv(0) == doctest::Approx(0.7).epsilon(1e-14));

    // de_delta = A_m e_delta - K_delta dv with e_delta = 0
    CHECK(out.de_delta(0) == doctest::Approx(-0.5 * 0.7).epsilon(1e-14));
    CHECK(out.de_delta(1) == doctest::Approx(-0.25 * 0.7).epsilon(1e-14));

    // interior compensator gain follows the raw clipped-command gradient
    Vector e_v = x - x_m;  // e_delta = 0
    Matrix Y_D = out.dv * (e_v.transpose() * P);
    CHECK((out.dK_delta_T - Y_D).cwiseAbs().maxCoeff() < 1e-14);
}

TEST_CASE("theorem4_bounds: self-consistent pieces on a simple configuration") {
    Matrix P = Matrix::Identity(2, 2);
    Matrix Q = Matrix::Identity(2, 2);
    Matrix Gamma = 4.0 * Matrix::Identity(2, 2);
    Matrix Gamma_d = 2.0 * Matrix::Identity(1, 1);
    Matrix B(2, 1), B_r(2, 1);
    B << 0.01, 0.0;
    B_r << 0.0, -0.01;
    ColumnBounds b = uniform_bounds(1, 0.5, 0.5);
    ColumnBounds bd = uniform_bounds(2, 0.1, 0.5);
    SatLimits lim(Vector::Constant(1, 0.12));

    Theorem4Bounds t = theorem4_bounds(b, bd, Gamma, Gamma_d, P, Q, lim, 0.5, B, B_r, 0.0, 0.0);
    CHECK(t.gamma_max == doctest::Approx(0.5).epsilon(1e-14));
    CHECK(t.rho == doctest::Approx(1.0).epsilon(1e-14));  // P = I
    CHECK(t.v_min == 0.12);
    CHECK(t.v0 == doctest::Approx(0.12).epsilon(1e-14));
    CHECK(t.Z_B == doctest::Approx(0.01).epsilon(1e-12));
    CHECK(t.theta_star_max == doctest::Approx(0.5).epsilon(1e-14));
    // estimation-error radius: max(2 * 0.5, |B| + sqrt(2) * 0.1)
    CHECK(t.theta_max == doctest::Approx(1.0).epsilon(1e-14));
    CHECK(t.n_int == 1);
    CHECK(t.applicable);  // decay = 1 - 5 * 0.01 * 1 > 0
    CHECK(t.x_min == doctest::Approx(0.01 * (2.0 * 0.12 + 1.0) / 0.95).epsilon(1e-13));
    CHECK(t.x_max == doctest::Approx(0.01 * 0.12 / 0.99).epsilon(1e-13));
    CHECK(t.condition_i);  // starting at the origin
}

TEST_CASE("theorem4_bounds: engine configuration is flagged inapplicable") {
    Matrix P = load_matrix(FIXTURES_DIR "/engine_P.json");
    Matrix Q = 0.1 * Matrix::Identity(6, 6);
    Matrix Gamma = 50.0 * Matrix::Identity(6, 6);
    Matrix Gamma_d = 30.0 * Matrix::Identity(2, 2);
    Matrix B = Matrix::Zero(6, 2);
    B.block(2, 0, 2, 2) = 3.0 * Matrix::Identity(2, 2);
    Matrix B_r = Matrix::Zero(6, 2);
    B_r.block(4, 0, 2, 2) = -Matrix::Identity(2, 2);
    ColumnBounds b = uniform_bounds(2, 3.4641016151377544, 0.1);
    ColumnBounds bd = uniform_bounds(6, 10.0, 0.1);
    Vector vmax(2);
    vmax << 0.12, 0.15;
    SatLimits lim(vmax);

    Theorem4Bounds t = theorem4_bounds(b, bd, Gamma, Gamma_d, P, Q, lim,
                                       0.881848603786387, B, B_r, 0.0, 0.0);
    CHECK_FALSE(t.applicable);
    CHECK(t.note.find("inapplicable") != std::string::npos);
    CHECK(t.gamma_max == doctest::Approx(1.0 / 30.0).epsilon(1e-14));
    CHECK(t.rho == doctest::Approx(2.5749217340925252).epsilon(1e-12));
    CHECK(t.Z_B == doctest::Approx(0.7226282875568162).epsilon(1e-12));
    CHECK(t.theta_star_max == doctest::Approx(std::sqrt(24.0)).epsilon(1e-14));
    CHECK(t.theta_max == doctest::Approx(3.0 + std::sqrt(600.0)).epsilon(1e-14));
    CHECK(t.x_max == doctest::Approx(0.012422906498644012).epsilon(1e-12));
}

TEST_CASE("control_decentralized and adapt_decentralized: scalar-input laws") {
    AdaptiveState s{Matrix::Zero(3, 1), uniform_bounds(1, 5.0, 0.5), Matrix::Identity(3, 3)};
    s.K_hat << 0.0, 0.0, -0.49;
    Vector dx(3);
    dx << 0.0, 0.0, 1.0;
    CHECK(control_decentralized(s, dx) == doctest::Approx(-0.49).epsilon(1e-14));

    // interior gain: dK = -dx (e^T P b)
    Matrix P = Matrix::Identity(3, 3);
    Vector b(3), e(3);
    b << 0.0, 3.0, 0.0;
    e << 0.1, 0.2, -0.1;
    Vector dK = adapt_decentralized(s, dx, e, P, b);
    Vector expect = -dx * (e.dot(P * b));
    CHECK((dK - expect).cwiseAbs().maxCoeff() < 1e-14);

    AdaptiveState wide{Matrix::Zero(3, 2), uniform_bounds(2, 5.0, 0.5), Matrix::Identity(3, 3)};
    CHECK_THROWS(control_decentralized(wide, dx));
}

TEST_CASE("theorem5_bounds: single subsystem closed form") {
    SubsystemBoundData s;
    s.P = Matrix::Identity(3, 3);
    s.Q = Matrix::Identity(3, 3);
    s.Gamma = Matrix::Identity(3, 3);
    s.theta_max = 1.0;
    s.d_bar = 0.5;
    s.x_m_bar = 0.0;

    Theorem5Bounds t = theorem5_bounds({s}, Matrix::Zero(1, 1));
    CHECK(t.applicable);
    CHECK(t.lambda_min_Pi == doctest::Approx(1.0).epsilon(1e-14));
    CHECK(t.psi == doctest::Approx(1.0).epsilon(1e-14));  // 2 * 1 * 1 * 0.5
    CHECK(t.xi.norm() == 0.0);
    CHECK(t.ubb_radius == doctest::Approx(1.0).epsilon(1e-14));  // sqrt(psi / lambda)
}

TEST_CASE("theorem5_bounds: two coupled subsystems, hand-checked Pi") {
    SubsystemBoundData s;
    s.P = Matrix::Identity(3, 3);  // rho = 2
    s.Q = Matrix::Identity(3, 3);
    s.Gamma = Matrix::Identity(3, 3);
    s.theta_max = 1.0;
    s.d_bar = 0.0;
    s.x_m_bar = 0.5;
    std::vector<SubsystemBoundData> subs{s, s};

    Matrix C(2, 2);
    C << 0.0, 0.25, 0.25, 0.0;  // Phi off-diagonals = 2 * 0.25 = 0.5

    Theorem5Bounds t = theorem5_bounds(subs, C);
    CHECK(t.Pi(0, 0) == doctest::Approx(1.0).epsilon(1e-14));
    CHECK(t.Pi(0, 1) == doctest::Approx(-0.5).epsilon(1e-14));
    CHECK(t.lambda_min_Pi == doctest::Approx(0.5).epsilon(1e-13));
    CHECK(t.applicable);
    // psi = 0, xi = [1, 1]: radius = |xi| / lambda_min = 2 sqrt(2)
    CHECK(t.ubb_radius == doctest::Approx(2.0 * std::sqrt(2.0)).epsilon(1e-13));

    // strong coupling defeats the decay and the bound is withdrawn
    Matrix Cbig(2, 2);
    Cbig << 0.0, 1.0, 1.0, 0.0;
    Theorem5Bounds bad = theorem5_bounds(subs, Cbig);
    CHECK_FALSE(bad.applicable);
    CHECK(bad.lambda_min_Pi <= 0.0);
}
