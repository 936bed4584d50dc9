#include "stepsched/config.hpp"

#include <cctype>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>

#include "stepsched/errors.hpp"

namespace stepsched {

namespace {

std::string format_error(const std::string& origin, int line, int col, const std::string& msg) {
    std::ostringstream out;
    out << origin << ':' << line << ':' << col << ": " << msg;
    return out.str();
}

bool is_key_char(char c) {
    return std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '.' || c == '-';
}

bool is_bare_char(char c) {
    return std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '-' || c == '(' ||
           c == ')';
}

std::string g17(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

}  // namespace

ConfigError::ConfigError(const std::string& origin, int line, int col, const std::string& msg)
    : std::runtime_error(format_error(origin, line, col, msg)), line_(line), col_(col) {}

Config Config::parse_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError(path, 0, 0, "cannot open config file");
    std::ostringstream buffer;
    buffer << in.rdbuf();
    return parse_string(buffer.str(), path);
}

Config Config::parse_string(std::string_view text, std::string origin) {
    Config cfg;
    cfg.origin_ = std::move(origin);

    int line_no = 0;
    std::size_t pos = 0;
    while (pos <= text.size()) {
        const std::size_t eol = text.find('\n', pos);
        std::string_view line = text.substr(pos, eol == std::string_view::npos ? std::string_view::npos
                                                                               : eol - pos);
        pos = eol == std::string_view::npos ? text.size() + 1 : eol + 1;
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.remove_suffix(1);

        std::size_t i = 0;
        auto skip_ws = [&] {
            while (i < line.size() && (line[i] == ' ' || line[i] == '\t')) ++i;
        };
        auto fail = [&](std::size_t col, const std::string& msg) -> void {
            throw ConfigError(cfg.origin_, line_no, static_cast<int>(col + 1), msg);
        };

        skip_ws();
        if (i >= line.size() || line[i] == '#') continue;

        const std::size_t key_start = i;
        while (i < line.size() && is_key_char(line[i])) ++i;
        if (i == key_start) fail(i, "expected a key");
        const std::string key(line.substr(key_start, i - key_start));

        skip_ws();
        if (i >= line.size() || line[i] != '=') fail(i, "expected '=' after key '" + key + "'");
        ++i;
        skip_ws();
        if (i >= line.size()) fail(i, "expected a value for key '" + key + "'");

        Value value;
        value.line = line_no;
        const char c = line[i];
        if (c == '"') {
            const std::size_t close = line.find('"', i + 1);
            if (close == std::string_view::npos) fail(i, "unterminated string");
            value.type = Value::Type::String;
            value.text = std::string(line.substr(i + 1, close - i - 1));
            i = close + 1;
        } else if (c == '[') {
            ++i;
            value.type = Value::Type::NumberList;
            skip_ws();
            bool expect_number = line.size() > i && line[i] != ']';
            while (true) {
                skip_ws();
                if (i >= line.size()) fail(i, "unterminated list");
                if (line[i] == ']') {
                    if (expect_number) fail(i, "trailing comma in list");
                    ++i;
                    break;
                }
                const char* begin = line.data() + i;
                char* end = nullptr;
                const double num = std::strtod(begin, &end);
                if (end == begin) fail(i, "expected a number in list");
                value.list.push_back(num);
                i += static_cast<std::size_t>(end - begin);
                skip_ws();
                if (i < line.size() && line[i] == ',') {
                    ++i;
                    expect_number = true;
                } else {
                    expect_number = false;
                }
            }
        } else if (std::isdigit(static_cast<unsigned char>(c)) || c == '+' || c == '-' ||
                   c == '.') {
            const char* begin = line.data() + i;
            char* end = nullptr;
            value.number = std::strtod(begin, &end);
            if (end == begin) fail(i, "malformed number");
            value.type = Value::Type::Number;
            i += static_cast<std::size_t>(end - begin);
        } else {
            const std::size_t word_start = i;
            while (i < line.size() && is_bare_char(line[i])) ++i;
            if (i == word_start) fail(i, "unrecognized value");
            const std::string word(line.substr(word_start, i - word_start));
            if (word == "true" || word == "false") {
                value.type = Value::Type::Bool;
                value.flag = word == "true";
            } else {
                value.type = Value::Type::String;
                value.text = word;
            }
        }

        skip_ws();
        if (i < line.size() && line[i] != '#') fail(i, "unexpected trailing characters");

        if (cfg.values_.count(key) != 0) {
            fail(key_start, "duplicate key '" + key + "'");
        }
        cfg.values_.emplace(key, std::move(value));
    }
    return cfg;
}

const Config::Value& Config::lookup(std::string_view key) const {
    const auto it = values_.find(key);
    if (it == values_.end()) {
        throw ConfigError(origin_, 0, 0, "missing required key '" + std::string(key) + "'");
    }
    return it->second;
}

void Config::fail(std::string_view key, const Value* value, const std::string& msg) const {
    throw ConfigError(origin_, value ? value->line : 0, 0,
                      "key '" + std::string(key) + "': " + msg);
}

bool Config::has(std::string_view key) const { return values_.find(key) != values_.end(); }

double Config::number(std::string_view key) const {
    const Value& v = lookup(key);
    if (v.type != Value::Type::Number) fail(key, &v, "expected a number");
    return v.number;
}

double Config::number_or(std::string_view key, double fallback) const {
    return has(key) ? number(key) : fallback;
}

std::int64_t Config::integer(std::string_view key) const {
    const Value& v = lookup(key);
    if (v.type != Value::Type::Number) fail(key, &v, "expected an integer");
    const double rounded = std::nearbyint(v.number);
    if (std::fabs(v.number - rounded) > 1e-9 || std::fabs(v.number) > 9.007199254740992e15) {
        fail(key, &v, "expected an integer");
    }
    return static_cast<std::int64_t>(rounded);
}

std::int64_t Config::integer_or(std::string_view key, std::int64_t fallback) const {
    return has(key) ? integer(key) : fallback;
}

std::string Config::str(std::string_view key) const {
    const Value& v = lookup(key);
    if (v.type != Value::Type::String) fail(key, &v, "expected a string");
    return v.text;
}

std::string Config::str_or(std::string_view key, std::string fallback) const {
    return has(key) ? str(key) : std::move(fallback);
}

bool Config::bool_or(std::string_view key, bool fallback) const {
    if (!has(key)) return fallback;
    const Value& v = lookup(key);
    if (v.type != Value::Type::Bool) fail(key, &v, "expected true or false");
    return v.flag;
}

std::vector<double> Config::number_list(std::string_view key) const {
    const Value& v = lookup(key);
    if (v.type != Value::Type::NumberList) fail(key, &v, "expected a numeric list like [1, 2]");
    return v.list;
}

Objective objective_from_config(const Config& cfg) {
    const std::string kind = cfg.str_or("problem.kind", "quadratic");
    if (kind == "quadratic") {
        return quadratic_objective(cfg.number_list("problem.lambdas"));
    }
    if (kind == "polar_pl") {
        return polar_pl_objective(cfg.number_or("problem.L", kPolarDefaultL));
    }
    throw ParamError("problem.kind must be \"quadratic\" or \"polar_pl\", got \"" + kind + "\"");
}

NoiseOracle oracle_from_config(const Config& cfg) {
    const NoiseKind kind = noise_kind_from_string(cfg.str_or("noise.kind", "exact"));
    switch (kind) {
        case NoiseKind::Exact: return NoiseOracle::exact();
        case NoiseKind::AdditiveGaussian:
            return NoiseOracle::additive_gaussian(cfg.number("noise.sigma"));
        case NoiseKind::Relative: return NoiseOracle::relative(cfg.number("noise.a"));
        case NoiseKind::Mixed:
            return NoiseOracle::mixed(cfg.number("noise.a"), cfg.number("noise.sigma"));
    }
    throw ParamError("unknown noise kind");
}

ScheduleSpec schedule_from_config(const Config& cfg, std::optional<std::int64_t> fallback_T,
                                  std::optional<double> fallback_eta0,
                                  std::optional<double> fallback_mu) {
    const ScheduleKind kind = schedule_kind_from_string(cfg.str("schedule.kind"));

    std::int64_t T = 0;
    if (cfg.has("schedule.T")) {
        T = cfg.integer("schedule.T");
    } else if (fallback_T) {
        T = *fallback_T;
    } else if (kind != ScheduleKind::CosineRestart) {
        throw ParamError("schedule.T is required (no run.T to fall back on)");
    }

    double eta0 = 0.0;
    if (cfg.has("schedule.eta0")) {
        eta0 = cfg.number("schedule.eta0");
    } else if (fallback_eta0) {
        eta0 = *fallback_eta0;
    } else {
        throw ParamError("schedule.eta0 is required");
    }

    switch (kind) {
        case ScheduleKind::Exponential: {
            const bool has_alpha = cfg.has("schedule.alpha");
            const bool has_beta = cfg.has("schedule.beta");
            if (has_alpha && has_beta) {
                return ScheduleSpec::exponential(eta0, T, cfg.number("schedule.alpha"),
                                                 cfg.number("schedule.beta"));
            }
            if (has_alpha) {
                return ScheduleSpec::exponential_alpha(eta0, T, cfg.number("schedule.alpha"));
            }
            return ScheduleSpec::exponential_beta(eta0, T, cfg.number_or("schedule.beta", 1.0));
        }
        case ScheduleKind::Cosine: return ScheduleSpec::cosine(eta0, T);
        case ScheduleKind::CosineRestart:
            return ScheduleSpec::cosine_restart(eta0, cfg.integer("schedule.T0"),
                                                cfg.number_or("schedule.r", 1.0),
                                                cfg.integer_or("schedule.l", 0));
        case ScheduleKind::InverseSqrt:
            return ScheduleSpec::inverse_sqrt(eta0, T, cfg.number_or("schedule.alpha", 1.0));
        case ScheduleKind::InverseLinear:
            return ScheduleSpec::inverse_linear(eta0, T, cfg.number_or("schedule.alpha", 1.0));
        case ScheduleKind::Stagewise: {
            const std::vector<double> raw = cfg.number_list("schedule.milestones");
            std::vector<std::int64_t> milestones;
            milestones.reserve(raw.size());
            for (const double m : raw) {
                if (m != std::nearbyint(m)) {
                    throw ParamError("schedule.milestones must be integer iteration indices");
                }
                milestones.push_back(static_cast<std::int64_t>(m));
            }
            return ScheduleSpec::stagewise(eta0, T, std::move(milestones),
                                           cfg.number("schedule.factor"));
        }
        case ScheduleKind::Constant: return ScheduleSpec::constant(eta0, T);
        case ScheduleKind::PolyPL: {
            if (cfg.has("schedule.mu")) {
                return ScheduleSpec::poly_pl(eta0, T, cfg.number("schedule.mu"));
            }
            if (fallback_mu) return ScheduleSpec::poly_pl(eta0, T, *fallback_mu);
            throw CapabilityError("poly_pl schedule needs schedule.mu or a PL objective");
        }
    }
    throw ParamError("unknown schedule kind");
}

std::string schedule_to_config(const ScheduleSpec& spec) {
    std::ostringstream out;
    out << "schedule.kind = \"" << to_string(spec.kind()) << "\"\n";
    out << "schedule.eta0 = " << g17(spec.eta0()) << "\n";
    switch (spec.kind()) {
        case ScheduleKind::Exponential:
            out << "schedule.T = " << spec.horizon() << "\n";
            if (spec.beta()) {
                out << "schedule.beta = " << g17(*spec.beta()) << "\n";
            } else {
                out << "schedule.alpha = " << g17(spec.alpha()) << "\n";
            }
            break;
        case ScheduleKind::CosineRestart:
            out << "schedule.T0 = " << spec.restart_T0() << "\n";
            out << "schedule.r = " << g17(spec.restart_r()) << "\n";
            out << "schedule.l = " << spec.restart_l() << "\n";
            break;
        case ScheduleKind::InverseSqrt:
        case ScheduleKind::InverseLinear:
            out << "schedule.T = " << spec.horizon() << "\n";
            out << "schedule.alpha = " << g17(spec.alpha()) << "\n";
            break;
        case ScheduleKind::Stagewise: {
            out << "schedule.T = " << spec.horizon() << "\n";
            out << "schedule.milestones = [";
            for (std::size_t i = 0; i < spec.milestones().size(); ++i) {
                if (i > 0) out << ", ";
                out << spec.milestones()[i];
            }
            out << "]\n";
            out << "schedule.factor = " << g17(spec.decay_factor()) << "\n";
            break;
        }
        case ScheduleKind::PolyPL:
            out << "schedule.T = " << spec.horizon() << "\n";
            out << "schedule.mu = " << g17(spec.mu()) << "\n";
            break;
        case ScheduleKind::Cosine:
        case ScheduleKind::Constant:
            out << "schedule.T = " << spec.horizon() << "\n";
            break;
    }
    return out.str();
}

IterateRecording record_from_string(const std::string& text) {
    if (text == "none") return {RecordIterates::None, 1};
    if (text == "all") return {RecordIterates::All, 1};
    if (text.rfind("thinned(", 0) == 0 && text.back() == ')') {
        const std::string inner = text.substr(8, text.size() - 9);
        char* end = nullptr;
        const long long every = std::strtoll(inner.c_str(), &end, 10);
        if (end != inner.c_str() + inner.size() || every < 1) {
            throw ParamError("record_iterates: thinned(k) needs a positive integer k");
        }
        return {RecordIterates::Thinned, every};
    }
    throw ParamError("record_iterates must be \"none\", \"all\" or \"thinned(k)\", got \"" + text +
                     "\"");
}

RunSetup run_setup_from_config(const Config& cfg) {
    Objective objective = objective_from_config(cfg);
    NoiseOracle oracle = oracle_from_config(cfg);

    std::optional<std::int64_t> run_T;
    if (cfg.has("run.T")) run_T = cfg.integer("run.T");
    const double theory_eta0 = 1.0 / (objective.lipschitz() * (1.0 + oracle.a()));
    ScheduleSpec schedule = schedule_from_config(cfg, run_T, theory_eta0, objective.pl_mu());
    // run.T may be omitted when the schedule carries its own horizon
    // (cosine_restart in particular).
    const std::int64_t T = run_T ? *run_T : schedule.horizon();

    RunSetup setup{.objective = std::move(objective),
                   .oracle = oracle,
                   .schedule = std::move(schedule),
                   .T = T,
                   .n_seeds = static_cast<int>(cfg.integer_or("run.n_seeds", 1)),
                   .base_seed = static_cast<std::uint64_t>(cfg.integer_or("run.base_seed", 0)),
                   .momentum = cfg.number_or("run.momentum", 0.0),
                   .record = record_from_string(cfg.str_or("run.record_iterates", "none")),
                   .x1 = {},
                   .random_start = cfg.bool_or("run.random_start", false),
                   .curve_every = cfg.integer_or("output.curve_every", 0)};
    if (cfg.has("run.x1")) setup.x1 = cfg.number_list("run.x1");
    return setup;
}

}  // namespace stepsched
