#include <iostream>
#include <optional>
#include <string>

#include "CLI11.hpp"
#include "mecbandit/experiment.hpp"

namespace {

using mecbandit::cli::ConfigError;
using mecbandit::cli::ExperimentKind;
using mecbandit::cli::Overrides;

constexpr int kConfigError = 2;

struct Flags {
    std::string config;
    std::optional<std::uint64_t> seed;
    std::optional<std::size_t> horizon;
    std::optional<std::size_t> runs;
    std::optional<std::size_t> arms;
    std::optional<std::string> out;
    std::optional<std::string> policy;
};

void add_flags(CLI::App* cmd, Flags& flags) {
    cmd->add_option("--config", flags.config, "Experiment configuration file (key = value)");
    cmd->add_option("--seed", flags.seed, "Base seed; run i uses seed + i");
    cmd->add_option("--horizon", flags.horizon, "Time-steps per run");
    cmd->add_option("--runs", flags.runs, "Monte Carlo repetitions");
    cmd->add_option("--arms", flags.arms, "Number of servers (classes repeat modulo the preset)");
    cmd->add_option("--out", flags.out, "Output directory");
    cmd->add_option("--policy", flags.policy, "ssph, ts, dts, dots, ducb, random or oracle");
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Non-stationary bandit benchmark for MEC server selection"};
    app.require_subcommand(1);
    app.set_version_flag("--version", std::string(mecbandit::cli::kVersion));

    Flags flags;
    struct Verb {
        const char* name;
        const char* help;
        std::optional<ExperimentKind> kind;
    };
    const Verb verbs[] = {
        {"run", "Run a single policy", ExperimentKind::single},
        {"compare", "Run every configured policy on paired trajectories", ExperimentKind::compare},
        {"sweep-alpha", "Sweep the SSPH retention rate", ExperimentKind::alpha_sweep},
        {"sweep-arms", "Sweep the number of servers", ExperimentKind::arm_sweep},
        {"validate", "Parse and print the resolved configuration", std::nullopt},
    };
    std::vector<CLI::App*> commands;
    for (const auto& verb : verbs) {
        auto* cmd = app.add_subcommand(verb.name, verb.help);
        add_flags(cmd, flags);
        commands.push_back(cmd);
    }

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : kConfigError;
    }

    std::size_t chosen = 0;
    while (!commands[chosen]->parsed()) ++chosen;
    const Verb& verb = verbs[chosen];

    Overrides overrides;
    overrides.kind = verb.kind;
    overrides.seed = flags.seed;
    overrides.horizon = flags.horizon;
    overrides.runs = flags.runs;
    overrides.arms = flags.arms;
    if (flags.out) overrides.out = *flags.out;
    overrides.policy = flags.policy;

    mecbandit::cli::ExperimentSpec spec;
    try {
        spec = flags.config.empty() ? mecbandit::cli::parse_spec_text("", overrides)
                                    : mecbandit::cli::parse_spec(flags.config, overrides);
    } catch (const ConfigError& e) {
        const char* what = "schema violation";
        if (e.category() == ConfigError::Category::missing_file) what = "missing file";
        if (e.category() == ConfigError::Category::syntax) what = "syntax error";
        std::cerr << "config error (" << what << "): " << e.what() << '\n';
        return kConfigError;
    }

    if (!verb.kind) {
        std::cout << mecbandit::cli::to_config_text(spec);
        return 0;
    }
    return mecbandit::cli::run_and_emit(spec);
}
