#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "mecbandit/harness.hpp"
#include "mecbandit/policies.hpp"

namespace mecbandit::cli {

inline constexpr std::string_view kVersion = "0.1.0";
inline constexpr std::string_view kPaperPreset = "paper-5";

enum class ExperimentKind { single, compare, alpha_sweep, arm_sweep };

std::string_view to_string(ExperimentKind kind);

/// Hyperparameters shared by every policy built for an experiment.
struct Hyperparameters {
    double alpha = 0.6;
    double sigma = 0.1;
    double dts_discount = 0.8;
    double dots_discount = 0.7;
    double ducb_discount = 0.5;
    double ducb_xi = 0.5;

    bool operator==(const Hyperparameters&) const = default;
};

struct ExperimentSpec {
    ExperimentKind kind = ExperimentKind::compare;
    /// "paper-5" or "inline" when servers are given explicitly.
    std::string preset = std::string(kPaperPreset);
    harness::RunConfig run;  // run.policy is unused; see policy/policies
    Hyperparameters hyper;
    policies::PolicyKind policy = policies::PolicyKind::ssph;  // single runs
    std::vector<policies::PolicyKind> policies = {
        policies::PolicyKind::ssph, policies::PolicyKind::ts, policies::PolicyKind::dts,
        policies::PolicyKind::dots, policies::PolicyKind::ducb};
    std::vector<double> alpha_grid = {0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9};
    std::vector<std::size_t> arm_grid = {5, 10, 15, 20, 25};
    std::filesystem::path out = "results";

    /// Fully parameterized spec for one policy kind.
    policies::PolicySpec policy_spec(policies::PolicyKind kind) const;
    /// Policies run by this experiment, in output order.
    std::vector<policies::PolicyKind> active_policies() const;

    bool operator==(const ExperimentSpec&) const = default;
};

/// Command-line values that take precedence over the file.
struct Overrides {
    std::optional<ExperimentKind> kind;
    std::optional<std::uint64_t> seed;
    std::optional<std::size_t> horizon;
    std::optional<std::size_t> runs;
    std::optional<std::size_t> arms;
    std::optional<std::filesystem::path> out;
    std::optional<std::string> policy;
};

class ConfigError : public std::runtime_error {
public:
    enum class Category { missing_file, syntax, schema };

    ConfigError(Category category, std::string key, const std::string& message)
        : std::runtime_error(message), category_(category), key_(std::move(key)) {}

    Category category() const { return category_; }
    /// Offending key; empty for file-level errors.
    const std::string& key() const { return key_; }

private:
    Category category_;
    std::string key_;
};

/// Parses `key = value` lines. `#` starts a comment; blank lines are ignored.
ExperimentSpec parse_spec_text(std::string_view text, const Overrides& overrides = {});
ExperimentSpec parse_spec(const std::filesystem::path& path, const Overrides& overrides = {});

/// Canonical configuration text for spec; parse_spec_text inverts it.
std::string to_config_text(const ExperimentSpec& spec);

/// Runs the experiment and writes its CSV artifacts into spec.out.
/// Returns 0 on success and 3 on runtime or I/O failure, after removing any
/// partially written outputs.
int run_and_emit(const ExperimentSpec& spec);

/// Shortest decimal form that reads back to the same double.
std::string format_number(double x);

}  // namespace mecbandit::cli
