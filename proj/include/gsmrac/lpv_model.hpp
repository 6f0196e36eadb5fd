#pragma once

#include "gsmrac/numerics.hpp"

#include <memory>
#include <string>
#include <vector>

namespace gsmrac {

/// Scheduling value from the plant state: alpha = |x_p|.
double scheduling(const Vector& x_p);

/// Largest real part over the (possibly complex) spectrum; negative iff Hurwitz.
double hurwitz_margin(const Matrix& A);

/// One operating point of the scheduled family: steady states, local
/// linearization, and the nominal integral gain.
struct EquilibriumPoint {
    double alpha_e;
    Vector x_p_e;
    Vector u_e;
    Matrix A_p;
    Matrix B_p;
    Matrix K_i;
};

/// Ordered family of operating points with a shared input-filter pole
/// eta_c and controller leak eps_c. Queries interpolate piecewise-linearly
/// in alpha and clamp outside the covered range.
class PlantFamily {
public:
    PlantFamily(std::vector<EquilibriumPoint> points, double eta_c, double eps_c);

    static PlantFamily from_json(const nlohmann::json& j);
    static PlantFamily load(const std::string& path);

    int n() const { return n_; }
    int m() const { return m_; }
    int aug_dim() const { return n_ + 2 * m_; }
    double eta_c() const { return eta_c_; }
    double eps_c() const { return eps_c_; }
    double alpha_lo() const { return points_.front().alpha_e; }
    double alpha_hi() const { return points_.back().alpha_e; }
    const std::vector<EquilibriumPoint>& points() const { return points_; }

    Matrix A_p(double alpha) const;
    Matrix B_p(double alpha) const;
    Matrix K_i(double alpha) const;
    Vector x_p_e(double alpha) const;
    Vector u_e(double alpha) const;

    /// Family with A_p off-diagonals scaled by (1 + delta_A) and B_p by
    /// (1 - delta_B); models plant drift away from the nominal design.
    PlantFamily perturbed(double delta_A, double delta_B) const;

private:
    std::vector<EquilibriumPoint> points_;
    double eta_c_;
    double eps_c_;
    int n_;
    int m_;
    std::unique_ptr<MatrixTable> tab_A_, tab_B_, tab_K_, tab_x_, tab_u_;

    PlantFamily(const PlantFamily&) = delete;

public:
    PlantFamily(PlantFamily&&) = default;
};

/// Open-loop augmented system [x_p; u; x_c]: dx = A(alpha) x + B v + B_r r.
struct PlantMatrices {
    Matrix A;
    Matrix B;
    Matrix B_r;
};

PlantMatrices plant_matrices(const PlantFamily& fam, double alpha);

/// Nominal scheduled gain K(alpha), zero except for the integral block.
Matrix gain_schedule(const PlantFamily& fam, double alpha);

/// Closed-loop reference matrix A_m(alpha) = A(alpha) + B K(alpha)^T.
Matrix reference_matrix(const PlantFamily& fam, double alpha);

/// Scalar operating point of one single-input subsystem.
struct SubsystemPoint {
    double alpha_e;
    double x_e;
    double u_e;
    double a_p;
    double b_p;
    double k_i;
};

/// Collection of scalar-plant subsystems sharing eta_c/eps_c, plus
/// constant interconnection matrices A_kq with norm gains c_kq.
class SubsystemFamily {
public:
    struct Subsystem {
        std::string name;
        std::vector<SubsystemPoint> points;
    };

    SubsystemFamily(std::vector<Subsystem> subs, Matrix coupling_gains, double eta_c,
                    double eps_c);

    static SubsystemFamily from_json(const nlohmann::json& j);
    static SubsystemFamily load(const std::string& path);

    int count() const { return static_cast<int>(subs_.size()); }
    int sub_dim() const { return 3; }
    double eta_c() const { return eta_c_; }
    double eps_c() const { return eps_c_; }
    double alpha_lo() const;
    double alpha_hi() const;
    const Subsystem& subsystem(int k) const { return subs_.at(k); }

    double a_p(int k, double alpha) const;
    double b_p(int k, double alpha) const;
    double k_i(int k, double alpha) const;
    double x_e(int k, double alpha) const;
    double u_e(int k, double alpha) const;

    /// Per-subsystem input/command columns of the augmented dynamics.
    Vector b() const;
    Vector b_r() const;

    /// Open-loop subsystem matrix A_k(alpha).
    Matrix subsystem_plant(int k, double alpha) const;

    /// Coupling block A_kq and its norm gain c_kq.
    Matrix coupling(int k, int q) const;
    double coupling_gain(int k, int q) const { return coupling_gains_(k, q); }

    /// Scheduled gain column K_k(alpha) = [0, 0, k_i]^T.
    Vector gain(int k, double alpha) const;

    SubsystemFamily perturbed(double delta_A, double delta_B) const;

private:
    std::vector<Subsystem> subs_;
    Matrix coupling_gains_;
    double eta_c_;
    double eps_c_;

    double interp_field(int k, double alpha, double SubsystemPoint::*field) const;
};

/// Closed-loop reference matrix A_mk(alpha) for one subsystem.
Matrix subsystem_reference(const SubsystemFamily& sub, int k, double alpha);

}  // namespace gsmrac
