// stepsched — step-size schedule experiments for SGD.
//
// Subcommands:
//   run <config>                one ensemble; writes trace/summary/curve CSVs
//   bounds <theorem> [--k v..]  term breakdown of a convergence bound
//   verify <suite>              lemma / pl / noise / descent invariant suites
//   study <name> [config]       noise-adaptation, bound-validation or rates
//
// Exit codes: 0 success, 1 assertion failure, 2 usage/config error,
// 3 numerical divergence.

#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "stepsched/bounds.hpp"
#include "stepsched/config.hpp"
#include "stepsched/csv.hpp"
#include "stepsched/errors.hpp"
#include "stepsched/experiments.hpp"
#include "stepsched/optimizer.hpp"
#include "stepsched/problems.hpp"
#include "stepsched/schedules.hpp"
#include "stepsched/verify.hpp"

namespace {

using namespace stepsched;

constexpr int kExitOk = 0;
constexpr int kExitAssertion = 1;
constexpr int kExitUsage = 2;
constexpr int kExitDivergence = 3;

constexpr std::uint64_t kDrawSalt = 0x44524157ULL;  // weighted-draw side stream

std::filesystem::path resolve_out(const std::string& dir, const std::string& name) {
    std::filesystem::path p(dir);
    std::filesystem::create_directories(p);
    return p / name;
}

std::ofstream open_out(const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary);  // '\n' line endings everywhere
    if (!out) throw ParamError("cannot open output file " + path.string());
    return out;
}

void write_study_rows(std::ostream& out, const std::vector<StudyRow>& rows) {
    out << "level,schedule,T,mean_gap,ci95,bound,within_bound\n";
    for (const StudyRow& row : rows) {
        out << format17(row.level) << ',' << row.schedule << ',' << row.T << ','
            << format17(row.mean_gap) << ',' << format17(row.ci95) << ',';
        if (row.bound) out << format17(*row.bound);
        out << ',';
        if (row.within_bound) out << (*row.within_bound ? "true" : "false");
        out << '\n';
    }
}

std::vector<std::string> split_csv_list(const std::string& text) {
    std::vector<std::string> items;
    std::string item;
    std::istringstream in(text);
    while (std::getline(in, item, ',')) {
        const auto begin = item.find_first_not_of(" \t");
        const auto end = item.find_last_not_of(" \t");
        if (begin == std::string::npos) continue;
        items.push_back(item.substr(begin, end - begin + 1));
    }
    return items;
}

std::vector<std::int64_t> integer_list(const Config& cfg, std::string_view key,
                                       std::vector<std::int64_t> fallback) {
    if (!cfg.has(key)) return fallback;
    std::vector<std::int64_t> out;
    for (const double v : cfg.number_list(key)) out.push_back(static_cast<std::int64_t>(v));
    return out;
}

// ---------------------------------------------------------------------------
// run
// ---------------------------------------------------------------------------

int cmd_run(const std::string& config_path, const std::string& out_dir, int jobs) {
    const Config cfg = Config::parse_file(config_path);
    RunSetup setup = run_setup_from_config(cfg);

    EnsembleSpec spec{.T = setup.T,
                      .n_seeds = setup.n_seeds,
                      .base_seed = setup.base_seed,
                      .x1 = setup.x1,
                      .random_start = setup.random_start,
                      .momentum = setup.momentum,
                      .curve_every = setup.curve_every,
                      .jobs = jobs};
    const EnsembleResult ensemble = run_ensemble(setup.objective, setup.oracle, setup.schedule, spec);

    // Full per-iteration trace of the first seed.
    RunConfig rc{.x1 = ensemble_start(setup.objective, spec, setup.base_seed),
                 .T = setup.T,
                 .schedule = setup.schedule,
                 .momentum = setup.momentum,
                 .seed = setup.base_seed,
                 .record = setup.record};
    const RunTrace trace = sgd_run(setup.objective, setup.oracle, rc);

    const std::string trace_name = cfg.str_or("output.path", "trace.csv");
    {
        std::ofstream out = open_out(resolve_out(out_dir, trace_name));
        write_trace_csv(trace, out);
    }
    {
        std::ofstream out = open_out(resolve_out(out_dir, "summary.csv"));
        out << "n_seeds,T,mean_gap,std_gap,ci95\n";
        out << ensemble.n_seeds << ',' << setup.T << ',' << format17(ensemble.mean_gap) << ','
            << format17(ensemble.std_gap) << ',' << format17(ensemble.ci95_halfwidth) << '\n';
    }
    if (!ensemble.curve_steps.empty()) {
        std::ofstream out = open_out(resolve_out(out_dir, "curve.csv"));
        out << "t,mean_gap\n";
        for (std::size_t i = 0; i < ensemble.curve_steps.size(); ++i) {
            out << ensemble.curve_steps[i] << ',' << format17(ensemble.mean_gap_curve[i]) << '\n';
        }
    }

    std::cout << "run: " << setup.objective.name() << " + " << to_string(setup.schedule.kind())
              << ", T = " << setup.T << ", seeds = " << ensemble.n_seeds << "\n";
    std::cout << "mean final gap = " << format17(ensemble.mean_gap)
              << " (ci95 " << format17(ensemble.ci95_halfwidth) << ")\n";
    std::cout << "weighted E||grad||^2 (seed " << setup.base_seed
              << ") = " << format17(weighted_grad_sq(trace)) << "\n";
    if (setup.record.mode == RecordIterates::All) {
        Xoshiro256pp draw_rng(setup.base_seed ^ kDrawSalt);
        const auto [index, point] = sample_weighted_iterate(trace, draw_rng);
        std::cout << "weighted iterate draw: t = " << index << "\n";
    }
    return kExitOk;
}

// ---------------------------------------------------------------------------
// bounds
// ---------------------------------------------------------------------------

int cmd_bounds(const std::string& theorem, const BoundInputs& inputs, bool as_printed,
               bool proof_form) {
    BoundValue value;
    if (theorem == "exp-pl") {
        value = bound_exp_pl(inputs, as_printed ? ExpPlExponent::AsPrinted
                                                : ExpPlExponent::ProofForm);
    } else if (theorem == "cos-pl") {
        value = bound_cos_pl(inputs,
                             proof_form ? CosineNoiseForm::Proof : CosineNoiseForm::Statement);
    } else if (theorem == "exp-nc") {
        value = bound_exp_noncvx(inputs);
    } else if (theorem == "cos-nc") {
        value = bound_cos_noncvx(inputs);
    } else if (theorem == "poly-pl") {
        value = bound_poly_pl(inputs);
    } else if (theorem == "restart") {
        value = bound_restart_pl(inputs);
    } else {
        throw ParamError("unknown theorem '" + theorem +
                         "' (expected exp-pl, cos-pl, exp-nc, cos-nc, poly-pl or restart)");
    }

    std::cout << "theorem,term,value,total\n";
    for (const auto& [name, term] : value.terms) {
        std::cout << theorem << ',' << name << ',' << format17(term) << ','
                  << format17(value.total) << '\n';
    }
    return kExitOk;
}

// ---------------------------------------------------------------------------
// verify
// ---------------------------------------------------------------------------

int cmd_verify(const std::string& suite_name) {
    SuiteResult suite;
    if (suite_name == "lemmas") {
        suite = verify_lemmas_suite();
    } else if (suite_name == "pl") {
        suite = verify_pl_suite();
    } else if (suite_name == "noise") {
        suite = verify_noise_suite();
    } else if (suite_name == "descent") {
        suite = verify_descent_suite();
    } else {
        throw ParamError("unknown suite '" + suite_name +
                         "' (expected lemmas, pl, noise or descent)");
    }

    for (const CheckResult& check : suite.checks) {
        std::cout << (check.pass ? "[PASS] " : "[FAIL] ") << check.name;
        if (!check.detail.empty()) std::cout << "  (" << check.detail << ")";
        std::cout << "\n";
    }
    std::cout << "suite " << suite.suite << ": " << (suite.all_pass() ? "PASS" : "FAIL") << "\n";
    return suite.all_pass() ? kExitOk : kExitAssertion;
}

// ---------------------------------------------------------------------------
// study
// ---------------------------------------------------------------------------

const char* kNoiseAdaptationDefaults = R"(# noise-adaptation study defaults
problem.kind = "polar_pl"
run.T = 10000
run.n_seeds = 100
run.base_seed = 1
study.levels = [0, 0.05, 1]
study.schedules = "constant,exponential,cosine,inverse_sqrt,inverse_linear"
output.curve_every = 1
)";

const char* kBoundValidationDefaults = R"(# bound-validation study defaults
problem.kind = "quadratic"
problem.lambdas = [1, 4]
study.sigmas = [0, 0.1]
study.schedules = "exponential,cosine,poly_pl"
study.T_grid = [100, 1000, 10000]
run.n_seeds = 100
run.base_seed = 1000
schedule.beta = 1
)";

const char* kRatesDefaults = R"(# rates study defaults
problem.kind = "quadratic"
problem.lambdas = [1, 1, 1, 1, 1, 1, 1, 1, 1, 1]
noise.kind = "additive"
noise.sigma = 0.1
study.schedules = "exponential,cosine"
study.T_grid = [100, 1000, 10000, 100000]
run.n_seeds = 100
run.base_seed = 1
schedule.beta = 1
study.slope_max.exponential = -0.7
study.slope_max.cosine = -0.6
study.r2_min = 0.9
)";

int study_noise_adaptation(const Config& cfg, const std::string& out_dir, int jobs) {
    const Objective obj = objective_from_config(cfg);
    const std::vector<double> levels =
        cfg.has("study.levels") ? cfg.number_list("study.levels") : std::vector<double>{0.0, 0.05, 1.0};
    const std::int64_t T = cfg.integer_or("run.T", 10000);
    const int n_seeds = static_cast<int>(cfg.integer_or("run.n_seeds", 100));
    const std::uint64_t base_seed = static_cast<std::uint64_t>(cfg.integer_or("run.base_seed", 1));
    const std::int64_t curve_every = cfg.integer_or("output.curve_every", 1);

    // Hyperparameters are fixed once (the theory-prescribed eta0 at sigma = 0)
    // and reused across all noise levels.
    const double eta0 = cfg.number_or("schedule.eta0", 1.0 / obj.lipschitz());
    const double beta = cfg.number_or("schedule.beta", 1.0);
    const double inverse_alpha = cfg.number_or("schedule.alpha", 1.0);
    std::vector<ScheduleSpec> schedules;
    for (const std::string& name : split_csv_list(
             cfg.str_or("study.schedules", "constant,exponential,cosine"))) {
        schedules.push_back(make_study_schedule(schedule_kind_from_string(name), eta0, T, beta,
                                                obj.pl_mu(), inverse_alpha));
    }

    const NoiseAdaptationReport report =
        noise_adaptation_study(obj, levels, schedules, T, n_seeds, base_seed, jobs, {}, curve_every);

    {
        std::ofstream out = open_out(resolve_out(out_dir, "noise_adaptation.csv"));
        write_study_rows(out, report.rows);
    }
    if (curve_every > 0) {
        std::ofstream out = open_out(resolve_out(out_dir, "noise_adaptation_curves.csv"));
        out << "level,schedule,t,mean_gap\n";
        for (std::size_t i = 0; i < report.rows.size(); ++i) {
            for (std::size_t p = 0; p < report.curve_steps[i].size(); ++p) {
                out << format17(report.rows[i].level) << ',' << report.rows[i].schedule << ','
                    << report.curve_steps[i][p] << ',' << format17(report.curves[i][p]) << '\n';
            }
        }
    }

    std::cout << "noise-adaptation: " << report.rows.size() << " (level, schedule) cells, T = "
              << T << ", seeds = " << n_seeds << "\n";
    for (const StudyRow& row : report.rows) {
        std::cout << "  sigma = " << row.level << "  " << row.schedule
                  << "  mean final gap = " << format17(row.mean_gap) << "\n";
    }
    if (report.assessment.evaluated) {
        const auto& a = report.assessment;
        std::cout << "shape at sigma = " << a.level << ": constant last-quarter decrease = "
                  << a.plateau_decrease << (a.constant_plateaus ? " (plateau)" : " (NO plateau)")
                  << "\n";
        for (const auto& [name, ratio] : a.final_ratio) {
            std::cout << "  constant/" << name << " final-gap ratio = " << ratio << "\n";
        }
        std::cout << "assessment: " << (a.pass ? "PASS" : "FAIL") << "\n";
        return a.pass ? kExitOk : kExitAssertion;
    }
    return kExitOk;
}

int study_bound_validation(const Config& cfg, const std::string& out_dir, int jobs) {
    const Objective obj = objective_from_config(cfg);
    std::vector<NoiseOracle> oracles;
    const std::vector<double> sigmas =
        cfg.has("study.sigmas") ? cfg.number_list("study.sigmas") : std::vector<double>{0.0, 0.1};
    for (const double sigma : sigmas) {
        oracles.push_back(sigma == 0.0 ? NoiseOracle::exact()
                                       : NoiseOracle::additive_gaussian(sigma));
    }
    std::vector<ScheduleKind> kinds;
    for (const std::string& name :
         split_csv_list(cfg.str_or("study.schedules", "exponential,cosine,poly_pl"))) {
        kinds.push_back(schedule_kind_from_string(name));
    }
    const std::vector<std::int64_t> Ts = integer_list(cfg, "study.T_grid", {100, 1000, 10000});
    const int n_seeds = static_cast<int>(cfg.integer_or("run.n_seeds", 100));
    const std::uint64_t base_seed =
        static_cast<std::uint64_t>(cfg.integer_or("run.base_seed", 1000));
    const double beta = cfg.number_or("schedule.beta", 1.0);

    const BoundValidationReport report =
        bound_validation(obj, oracles, kinds, Ts, n_seeds, base_seed, jobs, beta);

    {
        std::ofstream out = open_out(resolve_out(out_dir, "bound_validation.csv"));
        write_study_rows(out, report.rows);
    }
    std::cout << "bound-validation: " << report.rows.size() << " cells, seeds = " << n_seeds
              << "\n";
    for (const StudyRow& row : report.rows) {
        std::cout << "  sigma = " << row.level << "  " << row.schedule << "  T = " << row.T
                  << "  gap+ci = " << format17(row.mean_gap + row.ci95)
                  << "  bound = " << format17(*row.bound) << "  "
                  << (*row.within_bound ? "ok" : "VIOLATED") << "\n";
    }
    std::cout << "all within bound: " << (report.all_within ? "yes" : "NO") << "\n";
    return report.all_within ? kExitOk : kExitAssertion;
}

int study_rates(const Config& cfg, const std::string& out_dir, int jobs) {
    std::vector<StudyRow> rows;
    std::vector<std::pair<std::string, RateFit>> fits;

    const std::string synthetic = cfg.str_or("study.synthetic", "");
    if (!synthetic.empty()) {
        // Exact power-law inputs exercise the fitter itself.
        const std::vector<std::int64_t> Ts =
            integer_list(cfg, "study.T_grid", {100, 1000, 10000, 100000});
        const double scale = cfg.number_or("study.synthetic_scale", 1.0);
        std::vector<double> gaps;
        for (const std::int64_t T : Ts) {
            double gap = scale;
            if (synthetic == "inverse_t") {
                gap = scale / static_cast<double>(T);
            } else if (synthetic == "inverse_sqrt_t") {
                gap = scale / std::sqrt(static_cast<double>(T));
            } else if (synthetic != "constant") {
                throw ParamError("study.synthetic must be inverse_t, inverse_sqrt_t or constant");
            }
            gaps.push_back(gap);
            rows.push_back(StudyRow{.level = 0.0, .schedule = synthetic, .T = T, .mean_gap = gap});
        }
        fits.emplace_back(synthetic, fit_rate(Ts, gaps));
    } else {
        const Objective obj = objective_from_config(cfg);
        const NoiseOracle oracle = oracle_from_config(cfg);
        std::vector<ScheduleKind> kinds;
        for (const std::string& name :
             split_csv_list(cfg.str_or("study.schedules", "exponential,cosine"))) {
            kinds.push_back(schedule_kind_from_string(name));
        }
        const std::vector<std::int64_t> Ts =
            integer_list(cfg, "study.T_grid", {100, 1000, 10000, 100000});
        const int n_seeds = static_cast<int>(cfg.integer_or("run.n_seeds", 100));
        const std::uint64_t base_seed =
            static_cast<std::uint64_t>(cfg.integer_or("run.base_seed", 1));
        const RatesReport report = rate_study(obj, oracle, kinds, Ts, n_seeds, base_seed, jobs,
                                              cfg.number_or("schedule.beta", 1.0));
        rows = report.rows;
        fits = report.fits;
    }

    {
        std::ofstream out = open_out(resolve_out(out_dir, "rates.csv"));
        write_study_rows(out, rows);
    }
    {
        std::ofstream out = open_out(resolve_out(out_dir, "rates_fit.csv"));
        out << "schedule,slope,intercept,r_squared\n";
        for (const auto& [name, fit] : fits) {
            out << name << ',' << format17(fit.slope) << ',' << format17(fit.intercept) << ','
                << format17(fit.r_squared) << '\n';
        }
    }

    bool pass = true;
    const double r2_min = cfg.number_or("study.r2_min", 0.0);
    for (const auto& [name, fit] : fits) {
        std::cout << name << ": slope = " << format17(fit.slope)
                  << ", r^2 = " << format17(fit.r_squared) << "\n";
        const std::string key = "study.slope_max." + name;
        if (cfg.has(key) && fit.slope > cfg.number(key)) {
            std::cout << "  slope exceeds the ceiling " << cfg.number(key) << "\n";
            pass = false;
        }
        if (fit.r_squared < r2_min) {
            std::cout << "  r^2 below the floor " << r2_min << "\n";
            pass = false;
        }
    }
    return pass ? kExitOk : kExitAssertion;
}

int cmd_study(const std::string& study, const std::string& config_path, const std::string& out_dir,
              int jobs) {
    Config cfg = [&] {
        if (!config_path.empty()) return Config::parse_file(config_path);
        if (study == "noise-adaptation") {
            return Config::parse_string(kNoiseAdaptationDefaults, "<noise-adaptation defaults>");
        }
        if (study == "bound-validation") {
            return Config::parse_string(kBoundValidationDefaults, "<bound-validation defaults>");
        }
        return Config::parse_string(kRatesDefaults, "<rates defaults>");
    }();

    if (study == "noise-adaptation") return study_noise_adaptation(cfg, out_dir, jobs);
    if (study == "bound-validation") return study_bound_validation(cfg, out_dir, jobs);
    if (study == "rates") return study_rates(cfg, out_dir, jobs);
    throw ParamError("unknown study '" + study +
                     "' (expected noise-adaptation, bound-validation or rates)");
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"SGD step-size schedules: runs, theorem bounds, verification suites"};
    app.require_subcommand(1);

    std::string config_path, out_dir = ".", theorem, suite, study;
    int jobs = 1;

    auto* run = app.add_subcommand("run", "Run one SGD ensemble from a config file");
    run->add_option("config", config_path, "config file")->required();
    run->add_option("--jobs", jobs, "parallel runs (default 1)");
    run->add_option("--output-dir", out_dir, "output directory (default .)");

    BoundInputs inputs;
    bool as_printed = false, proof_form = false;
    auto* bounds = app.add_subcommand("bounds", "Evaluate a convergence bound");
    bounds->add_option("theorem", theorem, "exp-pl | cos-pl | exp-nc | cos-nc | poly-pl | restart")
        ->required();
    bounds->add_option("--L", inputs.L, "smoothness constant");
    bounds->add_option("--mu", inputs.mu, "PL constant");
    bounds->add_option("--a", inputs.a, "relative-noise coefficient");
    bounds->add_option("--b", inputs.b, "additive-noise floor");
    bounds->add_option("--beta", inputs.beta, "exponential shape parameter");
    bounds->add_option("--c", inputs.c, "step-size slack (non-PL theorems)");
    bounds->add_option("--delta1", inputs.delta1, "initial gap f(x1) - f*");
    bounds->add_option("--T", inputs.T, "horizon");
    bounds->add_option("--T0", inputs.restart_T0, "restart stage length");
    bounds->add_option("--r", inputs.restart_r, "restart growth factor");
    bounds->add_option("--l", inputs.restart_l, "number of restarts");
    bounds->add_flag("--as-printed", as_printed,
                     "exp-pl: use the theorem's printed (L+a) decay denominator");
    bounds->add_flag("--proof-form", proof_form,
                     "cos-pl: keep the proof's 2 exp(-4/3) factor in the noise term");

    auto* verify = app.add_subcommand("verify", "Run an invariant suite");
    verify->add_option("suite", suite, "lemmas | pl | noise | descent")->required();

    auto* study_cmd = app.add_subcommand("study", "Run a named study");
    study_cmd->add_option("name", study, "noise-adaptation | bound-validation | rates")
        ->required();
    study_cmd->add_option("config", config_path, "config file (optional; defaults built in)");
    study_cmd->add_option("--jobs", jobs, "parallel runs (default 1)");
    study_cmd->add_option("--output-dir", out_dir, "output directory (default .)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        std::cerr << e.what() << "\n";
        return kExitUsage;
    }

    try {
        if (*run) return cmd_run(config_path, out_dir, jobs);
        if (*bounds) return cmd_bounds(theorem, inputs, as_printed, proof_form);
        if (*verify) return cmd_verify(suite);
        if (*study_cmd) return cmd_study(study, config_path, out_dir, jobs);
        std::cerr << "no subcommand given\n";
        return kExitUsage;
    } catch (const DivergenceError& e) {
        std::cerr << "divergence: " << e.what() << "\n";
        return kExitDivergence;
    } catch (const ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return kExitUsage;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitUsage;
    }
}
