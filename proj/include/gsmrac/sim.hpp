#pragma once

#include "gsmrac/lpv_model.hpp"
#include "gsmrac/lyapunov.hpp"
#include "gsmrac/mrac.hpp"
#include "gsmrac/saturation.hpp"

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <memory>
#include <optional>
#include <string>
#include <vector>

namespace gsmrac {

enum class Variant { basic, constrained, decentralized };

/// One command segment: hold/ramp toward the equilibrium at alpha_target,
/// reaching it at the given time.
struct ProfileSegment {
    double time;
    double alpha_target;
};

/// Controller configuration for the single multi-input loop.
struct MonolithicConfig {
    Matrix P;
    Matrix Q;
    Matrix Gamma;
    Matrix K_hat0;
    ColumnBounds bounds;
    Matrix Gamma_delta;
    Matrix K_delta0;
    Matrix delta_mask;  // m x (n+2m); zero rows of the compensator stay zero
    ColumnBounds bounds_delta;
};

/// Controller configuration for one subsystem loop.
struct SubsystemConfig {
    Matrix P;
    Matrix Q;
    Matrix Gamma;
    Vector K_hat0;
    ConvexBound bound;
};

struct Scenario {
    Variant variant = Variant::basic;
    double duration = 60.0;
    double dt = 1e-3;
    std::vector<ProfileSegment> profile;
    double delta_A = 0.0;
    double delta_B = 0.0;
    std::optional<SatLimits> sat_limits;
    std::uint64_t seed = 0;

    std::shared_ptr<PlantFamily> family;          // basic / constrained
    std::shared_ptr<SubsystemFamily> subsystems;  // decentralized
    MonolithicConfig ctrl;
    std::vector<SubsystemConfig> sub_ctrl;

    /// Referenced files (family, P matrices) resolve relative to the
    /// scenario file's directory.
    static Scenario load(const std::string& path);
    static Scenario from_json(const nlohmann::json& j, const std::string& base_dir);

    void validate() const;
};

/// Classical 4-stage Runge-Kutta update.
Vector rk4_step(const std::function<Vector(double, const Vector&)>& f, double t,
                const Vector& state, double dt);

/// Reference command r(t): piecewise-linear in time between the equilibrium
/// outputs of consecutive segment targets. For the decentralized variant the
/// components are the per-subsystem scalar commands.
Vector command_profile(const Scenario& s, double t);

/// Largest command magnitude over the profile (attained at segment ends).
double profile_r_max(const Scenario& s);

class SimTrace {
public:
    std::vector<std::string> header;
    std::vector<std::vector<double>> rows;

    int column(const std::string& name) const;  // -1 when absent
    double value(size_t row, const std::string& name) const;

    void write_csv(std::ostream& out) const;
    static SimTrace read_csv(std::istream& in);
};

SimTrace run(const Scenario& s);

/// Theorem-bound evaluations plus observed trace maxima and a verdict per
/// applicable bound.
struct BoundsReport {
    nlohmann::json json;
    bool all_pass = false;
};

BoundsReport bounds_report(const Scenario& s, const SimTrace& trace);

}  // namespace gsmrac
