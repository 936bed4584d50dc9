// Integration tests for the stepsched binary: exit codes, CSV schemas and
// byte-level determinism. The binary path comes from --cli or $STEPSCHED_CLI.

#define DOCTEST_CONFIG_IMPLEMENT
#include <sys/wait.h>
#include <unistd.h>

#include <algorithm>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "doctest.h"

namespace {

std::string g_cli;
std::filesystem::path g_tmp;

int run_cmd(const std::string& args, const std::string& log_name = "out.txt") {
    const std::filesystem::path log = g_tmp / log_name;
    const std::string cmd = g_cli + " " + args + " > " + log.string() + " 2>&1";
    const int rc = std::system(cmd.c_str());
    if (rc == -1) return -1;
    return WIFEXITED(rc) ? WEXITSTATUS(rc) : -1;
}

std::string slurp(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    REQUIRE_MESSAGE(static_cast<bool>(in), "missing file ", path.string());
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

void spit(const std::filesystem::path& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    out << text;
}

const char* kRunConfig =
    "problem.kind = \"quadratic\"\n"
    "problem.lambdas = [1, 4]\n"
    "noise.kind = \"additive\"\n"
    "noise.sigma = 0.1\n"
    "schedule.kind = \"cosine\"\n"
    "run.T = 300\n"
    "run.n_seeds = 6\n"
    "run.base_seed = 11\n"
    "output.curve_every = 10\n";

}  // namespace

TEST_CASE("run: valid config exits 0 and writes the pinned trace header") {
    const auto cfg = g_tmp / "run.cfg";
    spit(cfg, kRunConfig);
    const auto out = g_tmp / "run_out";
    CHECK(run_cmd("run " + cfg.string() + " --output-dir " + out.string()) == 0);

    const std::string trace = slurp(out / "trace.csv");
    CHECK(trace.rfind("t,eta,value_gap,grad_sq\n", 0) == 0);
    CHECK(std::count(trace.begin(), trace.end(), '\n') == 301);  // header + 300 rows

    const std::string summary = slurp(out / "summary.csv");
    CHECK(summary.rfind("n_seeds,T,mean_gap,std_gap,ci95\n", 0) == 0);
    CHECK(slurp(out / "curve.csv").rfind("t,mean_gap\n", 0) == 0);
}

TEST_CASE("run: missing and malformed configs exit 2") {
    CHECK(run_cmd("run /nonexistent/path.cfg") == 2);
    const auto bad = g_tmp / "bad.cfg";
    spit(bad, "problem.kind =\n");
    CHECK(run_cmd("run " + bad.string()) == 2);
}

TEST_CASE("run: a blow-up run exits 3") {
    const auto cfg = g_tmp / "diverge.cfg";
    spit(cfg,
         "problem.kind = \"polar_pl\"\n"
         "schedule.kind = \"constant\"\n"
         "schedule.eta0 = 1000\n"
         "run.T = 2000\n");
    CHECK(run_cmd("run " + cfg.string() + " --output-dir " + (g_tmp / "div_out").string()) == 3);
}

TEST_CASE("bounds: term CSV on stdout, exit 2 on bad theorem or hypothesis") {
    CHECK(run_cmd("bounds cos-pl --L 1 --mu 1 --a 0 --b 0 --T 11 --delta1 1", "b1.txt") == 0);
    const std::string out = slurp(g_tmp / "b1.txt");
    CHECK(out.rfind("theorem,term,value,total\n", 0) == 0);
    CHECK(out.find("0.006737946999085") != std::string::npos);

    CHECK(run_cmd("bounds no-such-theorem --T 10") == 2);
    CHECK(run_cmd("bounds exp-pl --T 2 --beta 3 --mu 1 --delta1 1", "b2.txt") == 2);
    const std::string err = slurp(g_tmp / "b2.txt");
    CHECK(err.find("T >= max(3, beta)") != std::string::npos);
    CHECK(run_cmd("bounds poly-pl --L 1 --mu 1 --a 0 --b 0 --T 10 --delta1 1", "b3.txt") == 0);
    CHECK(slurp(g_tmp / "b3.txt").find("poly-pl,transient,0,0") != std::string::npos);
}

TEST_CASE("--help exits 0; a bare invocation exits 2") {
    CHECK(run_cmd("--help") == 0);
    CHECK(run_cmd("") == 2);
    CHECK(run_cmd("frobnicate") == 2);
}

TEST_CASE("verify: unknown suite exits 2, pl and lemmas suites exit 0") {
    CHECK(run_cmd("verify pl", "v1.txt") == 0);
    CHECK(slurp(g_tmp / "v1.txt").find("[PASS]") != std::string::npos);
    CHECK(run_cmd("verify lemmas", "v2.txt") == 0);
    CHECK(slurp(g_tmp / "v2.txt").find("suite lemmas: PASS") != std::string::npos);
    CHECK(run_cmd("verify nothing") == 2);
}

TEST_CASE("study bound-validation: small grid exits 0 with within_bound = true") {
    const auto cfg = g_tmp / "bv.cfg";
    spit(cfg,
         "problem.kind = \"quadratic\"\n"
         "problem.lambdas = [1, 4]\n"
         "study.sigmas = [0, 0.2]\n"
         "study.schedules = \"cosine,poly_pl\"\n"
         "study.T_grid = [50, 100]\n"
         "run.n_seeds = 40\n"
         "run.base_seed = 4\n");
    const auto out = g_tmp / "bv_out";
    CHECK(run_cmd("study bound-validation " + cfg.string() + " --jobs 2 --output-dir " +
                  out.string()) == 0);
    const std::string csv = slurp(out / "bound_validation.csv");
    CHECK(csv.rfind("level,schedule,T,mean_gap,ci95,bound,within_bound\n", 0) == 0);
    CHECK(csv.find(",true") != std::string::npos);
    CHECK(csv.find(",false") == std::string::npos);
}

TEST_CASE("study rates: synthetic power laws hit exact slopes") {
    const auto cfg = g_tmp / "rates.cfg";
    spit(cfg,
         "study.synthetic = \"inverse_t\"\n"
         "study.T_grid = [10, 100, 1000, 10000]\n");
    const auto out = g_tmp / "rates_out";
    CHECK(run_cmd("study rates " + cfg.string() + " --output-dir " + out.string(), "r1.txt") == 0);
    const std::string fit = slurp(out / "rates_fit.csv");
    CHECK(fit.rfind("schedule,slope,intercept,r_squared\n", 0) == 0);
    const std::size_t row = fit.find("inverse_t,");
    REQUIRE(row != std::string::npos);
    const double slope = std::strtod(fit.c_str() + row + 10, nullptr);
    CHECK(slope == doctest::Approx(-1.0).epsilon(1e-12));

    // an embedded slope assertion that cannot hold exits 1
    const auto cfg2 = g_tmp / "rates_fail.cfg";
    spit(cfg2,
         "study.synthetic = \"constant\"\n"
         "study.T_grid = [10, 100, 1000]\n"
         "study.slope_max.constant = -0.5\n");
    CHECK(run_cmd("study rates " + cfg2.string() + " --output-dir " +
                  (g_tmp / "rates_out2").string()) == 1);
}

TEST_CASE("study bound-validation: the built-in default config runs clean") {
    const auto out = g_tmp / "bv_default";
    CHECK(run_cmd("study bound-validation --jobs 2 --output-dir " + out.string(), "bvd.txt") == 0);
    const std::string text = slurp(g_tmp / "bvd.txt");
    CHECK(text.find("all within bound: yes") != std::string::npos);
    CHECK(slurp(out / "bound_validation.csv")
              .rfind("level,schedule,T,mean_gap,ci95,bound,within_bound\n", 0) == 0);
}

TEST_CASE("reruns are byte-identical across --jobs settings") {
    const auto cfg = g_tmp / "det.cfg";
    spit(cfg, kRunConfig);
    const auto d1 = g_tmp / "det1", d2 = g_tmp / "det2", d3 = g_tmp / "det3";
    REQUIRE(run_cmd("run " + cfg.string() + " --jobs 1 --output-dir " + d1.string()) == 0);
    REQUIRE(run_cmd("run " + cfg.string() + " --jobs 1 --output-dir " + d2.string()) == 0);
    REQUIRE(run_cmd("run " + cfg.string() + " --jobs 8 --output-dir " + d3.string()) == 0);
    for (const char* name : {"trace.csv", "summary.csv", "curve.csv"}) {
        const std::string base = slurp(d1 / name);
        CHECK(base == slurp(d2 / name));
        CHECK(base == slurp(d3 / name));
    }
}

int main(int argc, char** argv) {
    std::vector<char*> forwarded;
    for (int i = 0; i < argc; ++i) {
        if (std::string(argv[i]) == "--cli" && i + 1 < argc) {
            g_cli = argv[++i];
        } else {
            forwarded.push_back(argv[i]);
        }
    }
    if (g_cli.empty()) {
        if (const char* env = std::getenv("STEPSCHED_CLI")) g_cli = env;
    }
    if (g_cli.empty()) {
        std::fprintf(stderr, "test_cli: pass --cli <path-to-stepsched> or set STEPSCHED_CLI\n");
        return 1;
    }
    g_tmp = std::filesystem::temp_directory_path() /
            ("stepsched_cli_test_" + std::to_string(::getpid()));
    std::filesystem::create_directories(g_tmp);

    doctest::Context ctx;
    ctx.applyCommandLine(static_cast<int>(forwarded.size()), forwarded.data());
    const int rc = ctx.run();
    std::filesystem::remove_all(g_tmp);
    return rc;
}
