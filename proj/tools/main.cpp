#include "gsmrac/sim.hpp"

#include <CLI11.hpp>

#include <atomic>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <thread>

namespace {

enum Exit : int { kOk = 0, kInvalid = 1, kBadInput = 2, kDiverged = 3 };

gsmrac::Matrix load_matrix_file(const std::string& path)
{
    std::ifstream in(path);
    if (!in) throw std::invalid_argument("cannot open " + path);
    nlohmann::json j;
    in >> j;
    return gsmrac::matrix_from_json(j);
}

struct QSpec {
    double scale = 0.1;
    std::string file;

    gsmrac::Matrix build(int dim) const
    {
        if (!file.empty()) return load_matrix_file(file);
        return scale * gsmrac::Matrix::Identity(dim, dim);
    }
};

struct GridSpec {
    int grid = 30;
    int perturbed = 0;
    double delta = 0.05;
    std::uint64_t seed = 0;
};

void add_q_options(CLI::App* cmd, QSpec& q)
{
    cmd->add_option("--Q-scale", q.scale, "Q = scale * identity")->capture_default_str();
    cmd->add_option("--Q", q.file, "JSON file holding Q explicitly (overrides --Q-scale)");
}

void add_grid_options(CLI::App* cmd, GridSpec& g)
{
    cmd->add_option("--grid", g.grid, "uniform alpha knots in the vertex set")
        ->capture_default_str();
    cmd->add_option("--perturbed", g.perturbed, "additional randomly perturbed vertices")
        ->capture_default_str();
    cmd->add_option("--delta", g.delta, "perturbation magnitude")->capture_default_str();
    cmd->add_option("--seed", g.seed, "seed for perturbed vertices")->capture_default_str();
}

int cmd_lyapunov_verify(const std::string& family_file, const std::string& p_file, const QSpec& q,
                        const GridSpec& g)
{
    auto fam = gsmrac::PlantFamily::load(family_file);
    gsmrac::Matrix P = load_matrix_file(p_file);
    gsmrac::VertexSet V =
        gsmrac::vertices_from_family(fam, g.grid, g.perturbed, g.delta, g.seed);
    gsmrac::Certificate cert = gsmrac::verify_common_P(P, q.build(fam.aug_dim()), V);
    std::cout << gsmrac::certificate_to_json(cert).dump(2) << "\n";
    if (!cert.valid) std::cerr << "certificate invalid: " << cert.note << "\n";
    return cert.valid ? kOk : kInvalid;
}

int cmd_lyapunov_solve(const std::string& family_file, const QSpec& q, const GridSpec& g,
                       const gsmrac::SolveOptions& opts)
{
    auto fam = gsmrac::PlantFamily::load(family_file);
    gsmrac::VertexSet V =
        gsmrac::vertices_from_family(fam, g.grid, g.perturbed, g.delta, g.seed);
    gsmrac::Certificate cert = gsmrac::solve_common_P(V, q.build(fam.aug_dim()), opts);
    std::cout << gsmrac::certificate_to_json(cert).dump(2) << "\n";
    if (!cert.valid) std::cerr << "no valid certificate: " << cert.note << "\n";
    return cert.valid ? kOk : kInvalid;
}

int simulate_one(const std::string& scenario_file, const std::string& out_csv,
                 const std::string& bounds_out)
{
    gsmrac::Scenario s = gsmrac::Scenario::load(scenario_file);
    gsmrac::SimTrace trace = gsmrac::run(s);
    {
        std::ofstream out(out_csv);
        if (!out) throw std::invalid_argument("cannot write " + out_csv);
        trace.write_csv(out);
    }
    gsmrac::BoundsReport rep = gsmrac::bounds_report(s, trace);
    if (!bounds_out.empty()) {
        std::ofstream out(bounds_out);
        if (!out) throw std::invalid_argument("cannot write " + bounds_out);
        out << rep.json.dump(2) << "\n";
    }
    if (!rep.all_pass) {
        std::cerr << scenario_file << ": an applicable bound failed; see "
                  << (bounds_out.empty() ? "bounds report" : bounds_out) << "\n";
        return kInvalid;
    }
    return kOk;
}

int cmd_simulate(const std::vector<std::string>& scenarios, const std::string& out_csv,
                 const std::string& bounds_out, const std::string& out_dir, int jobs)
{
    if (scenarios.size() == 1 && out_dir.empty())
        return simulate_one(scenarios[0], out_csv.empty() ? "trace.csv" : out_csv, bounds_out);
    if (out_dir.empty())
        throw std::invalid_argument("batch simulation needs --out-dir");
    std::filesystem::create_directories(out_dir);

    std::atomic<size_t> next{0};
    std::vector<int> status(scenarios.size(), kOk);
    auto worker = [&]() {
        for (size_t i = next.fetch_add(1); i < scenarios.size(); i = next.fetch_add(1)) {
            auto stem = std::filesystem::path(scenarios[i]).stem().string();
            auto dir = std::filesystem::path(out_dir);
            try {
                status[i] = simulate_one(scenarios[i], (dir / (stem + ".csv")).string(),
                                         (dir / (stem + "_bounds.json")).string());
            } catch (const gsmrac::DivergenceError& e) {
                std::cerr << scenarios[i] << ": " << e.what() << "\n";
                status[i] = kDiverged;
            } catch (const std::exception& e) {
                std::cerr << scenarios[i] << ": " << e.what() << "\n";
                status[i] = kBadInput;
            }
        }
    };
    std::vector<std::thread> pool;
    for (int j = 0; j < std::max(1, jobs); ++j) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
    int worst = kOk;
    for (int st : status) worst = std::max(worst, st);
    return worst;
}

int cmd_plotdata(const std::string& trace_file, const std::vector<std::string>& columns,
                 const std::string& out_prefix)
{
    std::ifstream in(trace_file);
    if (!in) throw std::invalid_argument("cannot open " + trace_file);
    gsmrac::SimTrace trace = gsmrac::SimTrace::read_csv(in);
    if (trace.rows.empty()) throw std::invalid_argument("trace has no data rows");
    int tc = trace.column("t");
    if (tc < 0) throw std::invalid_argument("trace has no t column");
    for (const auto& name : columns) {
        int c = trace.column(name);
        if (c < 0) {
            std::string avail;
            for (const auto& h : trace.header) avail += (avail.empty() ? "" : ", ") + h;
            throw std::invalid_argument("unknown column " + name + "; available: " + avail);
        }
        std::string path = out_prefix + "_" + name + ".dat";
        std::ofstream out(path);
        if (!out) throw std::invalid_argument("cannot write " + path);
        char buf[96];
        for (const auto& row : trace.rows) {
            std::snprintf(buf, sizeof(buf), "%.17g %.17g\n", row[static_cast<size_t>(tc)],
                          row[static_cast<size_t>(c)]);
            out << buf;
        }
    }
    return kOk;
}

}  // namespace

int main(int argc, char** argv)
{
    CLI::App app{"gain-scheduled adaptive control toolbox"};
    app.require_subcommand(1);

    std::string family_file, p_file;
    QSpec qspec;
    GridSpec grid;
    gsmrac::SolveOptions solve_opts;

    auto* verify = app.add_subcommand("lyapunov-verify", "check a candidate P on a vertex set");
    verify->add_option("--family", family_file, "plant family JSON")->required();
    verify->add_option("--P", p_file, "candidate P JSON")->required();
    add_q_options(verify, qspec);
    add_grid_options(verify, grid);

    auto* solve = app.add_subcommand("lyapunov-solve", "search for a common P");
    solve->add_option("--family", family_file, "plant family JSON")->required();
    add_q_options(solve, qspec);
    add_grid_options(solve, grid);
    solve->add_option("--eps-pd", solve_opts.eps_pd)->capture_default_str();
    solve->add_option("--trace-cap", solve_opts.trace_cap, "0 means 10 * dimension")
        ->capture_default_str();
    solve->add_option("--max-iter", solve_opts.max_iter)->capture_default_str();
    solve->add_option("--target-margin", solve_opts.target_margin)->capture_default_str();

    std::vector<std::string> scenario_files;
    std::string out_csv, bounds_out, out_dir;
    int jobs = 1;
    auto* simulate = app.add_subcommand("simulate", "run a scenario and check its bounds");
    simulate->add_option("--scenario", scenario_files, "scenario JSON (repeatable)")->required();
    simulate->add_option("--out", out_csv, "trace CSV path (single scenario)");
    simulate->add_option("--bounds-out", bounds_out, "bounds report JSON (single scenario)");
    simulate->add_option("--out-dir", out_dir, "output directory for batch runs");
    simulate->add_option("--jobs", jobs, "parallel batch workers")->capture_default_str();

    std::string trace_file, out_prefix = "series", columns_arg;
    auto* plotdata = app.add_subcommand("plotdata", "extract (t, value) series from a trace");
    plotdata->add_option("--trace", trace_file, "trace CSV")->required();
    plotdata->add_option("--columns", columns_arg, "comma-separated column names")->required();
    plotdata->add_option("--out-prefix", out_prefix)->capture_default_str();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        if (e.get_exit_code() == 0) return app.exit(e);
        app.exit(e);
        return kBadInput;
    }

    try {
        if (verify->parsed()) return cmd_lyapunov_verify(family_file, p_file, qspec, grid);
        if (solve->parsed()) return cmd_lyapunov_solve(family_file, qspec, grid, solve_opts);
        if (simulate->parsed())
            return cmd_simulate(scenario_files, out_csv, bounds_out, out_dir, jobs);
        if (plotdata->parsed()) {
            std::vector<std::string> cols;
            std::stringstream ss(columns_arg);
            std::string cell;
            while (std::getline(ss, cell, ',')) cols.push_back(cell);
            return cmd_plotdata(trace_file, cols, out_prefix);
        }
    } catch (const gsmrac::DivergenceError& e) {
        std::cerr << e.what() << "\n";
        return kDiverged;
    } catch (const std::exception& e) {
        std::cerr << e.what() << "\n";
        return kBadInput;
    }
    return kBadInput;
}
