#include <json.hpp>

#include <algorithm>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>

namespace fs = std::filesystem;

namespace {

int g_failures = 0;

#define EXPECT(cond, what)                                                       \
    do {                                                                         \
        if (cond) {                                                              \
            std::cout << "ok   " << what << "\n";                               \
        } else {                                                                 \
            std::cout << "FAIL " << what << " (" << #cond << ")\n";             \
            ++g_failures;                                                        \
        }                                                                        \
    } while (0)

int run_cli(const std::string& args) {
    std::string cmd = std::string(CLI_PATH) + " " + args;
    int rc = std::system(cmd.c_str());
#ifdef _WIN32
    return rc;
#else
    if (rc == -1) return -1;
    return WEXITSTATUS(rc);
#endif
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

}  // namespace

int main() {
    fs::path tmp = fs::temp_directory_path() / "gsmrac-cli-tests";
    fs::create_directories(tmp);
    const std::string fixtures = FIXTURES_DIR;
    const std::string quiet = " > " + (tmp / "stdout.txt").string() + " 2> " +
                              (tmp / "stderr.txt").string();

    // solve produces a certificate that verify accepts
    int rc = run_cli("lyapunov-solve --family " + fixtures + "/engine_family.json > " +
                     (tmp / "cert.json").string() + " 2> " + (tmp / "stderr.txt").string());
    EXPECT(rc == 0, "lyapunov-solve exits 0 on the engine family");

    {
        std::ifstream in(tmp / "cert.json");
        nlohmann::json cert;
        in >> cert;
        EXPECT(cert.at("valid").get<bool>(), "solver certificate marked valid");
        std::ofstream out(tmp / "P_solved.json");
        out << cert.at("P").dump(2) << "\n";
    }
    rc = run_cli("lyapunov-verify --family " + fixtures + "/engine_family.json --P " +
                 (tmp / "P_solved.json").string() + quiet);
    EXPECT(rc == 0, "lyapunov-verify accepts the solved P");

    // a negative definite candidate is rejected with the invalid-certificate code
    {
        std::ofstream out(tmp / "P_bad.json");
        out << "[[-1,0,0,0,0,0],[0,-1,0,0,0,0],[0,0,-1,0,0,0],"
               "[0,0,0,-1,0,0],[0,0,0,0,-1,0],[0,0,0,0,0,-1]]\n";
    }
    rc = run_cli("lyapunov-verify --family " + fixtures + "/engine_family.json --P " +
                 (tmp / "P_bad.json").string() + quiet);
    EXPECT(rc == 1, "lyapunov-verify rejects a negative definite P with exit 1");

    // missing inputs map to the bad-input code
    rc = run_cli("lyapunov-verify --family " + (tmp / "missing.json").string() + " --P " +
                 (tmp / "P_solved.json").string() + quiet);
    EXPECT(rc == 2, "missing family file exits 2");
    rc = run_cli("simulate --scenario " + (tmp / "missing.json").string() + quiet);
    EXPECT(rc == 2, "missing scenario file exits 2");

    // a short scenario referencing the shipped fixtures by absolute path
    fs::path short_scn = tmp / "short_basic.json";
    {
        nlohmann::json j;
        std::ifstream in(fixtures + "/scenario_basic.json");
        in >> j;
        j["duration"] = 1.0;
        j["family"] = fixtures + "/engine_family.json";
        j["controller"]["P"] = fixtures + "/engine_P.json";
        std::ofstream out(short_scn);
        out << j.dump(2) << "\n";
    }

    fs::path csv_a = tmp / "run_a.csv";
    fs::path csv_b = tmp / "run_b.csv";
    rc = run_cli("simulate --scenario " + short_scn.string() + " --out " + csv_a.string() +
                 " --bounds-out " + (tmp / "bounds_a.json").string() + quiet);
    EXPECT(rc == 0, "simulate exits 0 when every applicable bound holds");
    rc = run_cli("simulate --scenario " + short_scn.string() + " --out " + csv_b.string() + quiet);
    EXPECT(rc == 0, "simulate exits 0 on a repeat run");

    std::string a = slurp(csv_a);
    std::string b = slurp(csv_b);
    EXPECT(!a.empty() && a == b, "repeated runs produce byte-identical traces");
    {
        size_t lines = static_cast<size_t>(std::count(a.begin(), a.end(), '\n'));
        EXPECT(lines == 1002, "1 s at 1 ms yields a header plus 1001 rows");
        std::ifstream in(tmp / "bounds_a.json");
        nlohmann::json rep;
        in >> rep;
        EXPECT(rep.at("all_pass").get<bool>(), "bounds report records all_pass");
    }

    // plotdata extracts named columns as two-column text
    fs::path prefix = tmp / "plot";
    rc = run_cli("plotdata --trace " + csv_a.string() + " --columns e_norm,alpha --out-prefix " +
                 prefix.string() + quiet);
    EXPECT(rc == 0, "plotdata exits 0 for known columns");
    {
        std::string dat = slurp(tmp / "plot_e_norm.dat");
        size_t lines = static_cast<size_t>(std::count(dat.begin(), dat.end(), '\n'));
        EXPECT(lines == 1001, "plotdata emits one line per trace row");
        EXPECT(fs::exists(tmp / "plot_alpha.dat"), "plotdata writes every requested column");
    }
    rc = run_cli("plotdata --trace " + csv_a.string() + " --columns not_a_column --out-prefix " +
                 prefix.string() + quiet);
    EXPECT(rc == 2, "plotdata rejects an unknown column with exit 2");

    // batch mode fans out over scenarios and aggregates the exit code
    fs::path batch_dir = tmp / "batch";
    rc = run_cli("simulate --scenario " + short_scn.string() + " --scenario " + short_scn.string() +
                 " --out-dir " + batch_dir.string() + " --jobs 2" + quiet);
    EXPECT(rc == 0, "batch simulate exits 0");
    EXPECT(fs::exists(batch_dir / "short_basic.csv") &&
               fs::exists(batch_dir / "short_basic_bounds.json"),
           "batch simulate writes per-scenario outputs");

    if (g_failures) {
        std::cout << g_failures << " CLI check(s) failed\n";
        return 1;
    }
    std::cout << "all CLI checks passed\n";
    return 0;
}
