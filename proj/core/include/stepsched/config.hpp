#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "stepsched/optimizer.hpp"
#include "stepsched/problems.hpp"
#include "stepsched/schedules.hpp"

namespace stepsched {

/// Malformed config text; carries the 1-based line and column of the defect.
class ConfigError : public std::runtime_error {
public:
    ConfigError(const std::string& origin, int line, int col, const std::string& msg);
    int line() const noexcept { return line_; }
    int col() const noexcept { return col_; }

private:
    int line_;
    int col_;
};

/// Flat dotted-key configuration: one `section.key = value` per line, `#`
/// comments. Values are numbers, quoted or bare strings, true/false, or
/// numeric lists like [1, 4].
class Config {
public:
    struct Value {
        enum class Type { Number, String, Bool, NumberList };
        Type type = Type::String;
        double number = 0.0;
        std::string text;
        bool flag = false;
        std::vector<double> list;
        int line = 0;
    };

    static Config parse_file(const std::string& path);
    static Config parse_string(std::string_view text, std::string origin = "<string>");

    bool has(std::string_view key) const;

    double number(std::string_view key) const;
    double number_or(std::string_view key, double fallback) const;
    std::int64_t integer(std::string_view key) const;
    std::int64_t integer_or(std::string_view key, std::int64_t fallback) const;
    std::string str(std::string_view key) const;
    std::string str_or(std::string_view key, std::string fallback) const;
    bool bool_or(std::string_view key, bool fallback) const;
    std::vector<double> number_list(std::string_view key) const;

    const std::map<std::string, Value, std::less<>>& entries() const { return values_; }
    const std::string& origin() const { return origin_; }

private:
    const Value& lookup(std::string_view key) const;
    [[noreturn]] void fail(std::string_view key, const Value* value, const std::string& msg) const;

    std::string origin_;
    std::map<std::string, Value, std::less<>> values_;
};

// ---- builders from the `problem.*` / `noise.*` / `schedule.*` / `run.*` keys ----

Objective objective_from_config(const Config& cfg);
NoiseOracle oracle_from_config(const Config& cfg);

/// Builds the schedule from `schedule.*`. Fallbacks fill in what the file
/// omits: horizon (usually run.T), eta0 (usually 1/(L(1+a))) and the PL
/// constant for PolyPL.
ScheduleSpec schedule_from_config(const Config& cfg, std::optional<std::int64_t> fallback_T,
                                  std::optional<double> fallback_eta0,
                                  std::optional<double> fallback_mu);

/// Serializes a schedule back to flat `schedule.*` lines (17 significant
/// digits, lossless round-trip).
std::string schedule_to_config(const ScheduleSpec& spec);

IterateRecording record_from_string(const std::string& text);

/// Everything `run` and the studies need from one config file.
struct RunSetup {
    Objective objective;
    NoiseOracle oracle;
    ScheduleSpec schedule;
    std::int64_t T;
    int n_seeds;
    std::uint64_t base_seed;
    double momentum;
    IterateRecording record;
    std::vector<double> x1;  // empty = default start
    bool random_start;
    std::int64_t curve_every;
};

RunSetup run_setup_from_config(const Config& cfg);

}  // namespace stepsched
