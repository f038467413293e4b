#include <fstream>
#include <iostream>
#include <system_error>

#include "mecbandit/experiment.hpp"

namespace mecbandit::cli {

namespace {

namespace fs = std::filesystem;
using policies::PolicyKind;

class IoError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Output files created so far, removed again if the experiment fails.
class OutputSet {
public:
    explicit OutputSet(fs::path dir) : dir_(std::move(dir)) {}

    std::ofstream open(const std::string& name) {
        const auto path = dir_ / name;
        std::ofstream out(path, std::ios::binary | std::ios::trunc);
        if (!out) throw IoError("cannot write " + path.string());
        created_.push_back(path);
        return out;
    }

    void close(std::ofstream& out, const std::string& name) {
        out.flush();
        if (!out) throw IoError("write failed for " + (dir_ / name).string());
        out.close();
    }

    void discard() {
        std::error_code ec;
        for (const auto& p : created_) fs::remove(p, ec);
        created_.clear();
    }

private:
    fs::path dir_;
    std::vector<fs::path> created_;
};

std::string label(PolicyKind kind) { return std::string(policies::display_name(kind)); }

harness::RunConfig config_for(const ExperimentSpec& spec, PolicyKind kind) {
    auto cfg = spec.run;
    cfg.policy = spec.policy_spec(kind);
    return cfg;
}

void write_meta(OutputSet& outputs, const ExperimentSpec& spec) {
    auto out = outputs.open("meta");
    out << "# mecbandit " << kVersion << '\n'
        << "# experiment: " << to_string(spec.kind) << '\n'
        << "# base seed: " << spec.run.base_seed << " (run i uses seed + i)\n"
        << "# latency cap for reporting: " << format_number(spec.run.latency_cap) << " s\n"
        << "# resolved configuration follows; it re-parses to the same experiment\n"
        << to_config_text(spec);
    outputs.close(out, "meta");
}

const char* kSummaryHeader =
    "policy,alpha,arms,runs,horizon,mean_regret,stdev_regret,mean_latency_s,stdev_latency_s\n";

void summary_row(std::ostream& out, const std::string& policy, PolicyKind kind, double alpha,
                 std::size_t arms, std::size_t runs, std::size_t horizon,
                 const harness::Moments& regret, const harness::Moments& latency) {
    out << policy << ',' << (kind == PolicyKind::ssph ? format_number(alpha) : std::string())
        << ',' << arms << ',' << runs << ',' << horizon << ',' << format_number(regret.mean) << ','
        << format_number(regret.stdev()) << ',' << format_number(latency.mean) << ','
        << format_number(latency.stdev()) << '\n';
}

void emit_runs(OutputSet& outputs, const ExperimentSpec& spec) {
    const auto kinds = spec.active_policies();
    auto ts = outputs.open("timeseries.csv");
    auto agg = outputs.open("aggregate.csv");
    auto summary = outputs.open("summary.csv");
    ts << "run,t,policy,chosen_arm,reward,best_reward,delay_s,running_regret,running_latency_s\n";
    agg << "policy,t,mean_regret,var_regret,mean_latency_s,var_latency_s\n";
    summary << kSummaryHeader;

    for (auto kind : kinds) {
        const auto cfg = config_for(spec, kind);
        const auto name = label(kind);
        const auto records = harness::run_batch(cfg);
        for (std::size_t run = 0; run < records.size(); ++run) {
            const auto& rec = records[run];
            for (std::size_t i = 0; i < rec.horizon(); ++i) {
                ts << run << ',' << i + 1 << ',' << name << ',' << rec.chosen[i] << ','
                   << format_number(rec.reward[i]) << ',' << format_number(rec.best_reward[i])
                   << ',' << format_number(rec.delay[i]) << ','
                   << format_number(rec.running_regret[i]) << ','
                   << format_number(rec.running_latency[i]) << '\n';
            }
        }
        const auto a = harness::aggregate(records);
        for (std::size_t i = 0; i < a.regret.size(); ++i) {
            agg << name << ',' << i + 1 << ',' << format_number(a.regret[i].mean) << ','
                << format_number(a.regret[i].variance) << ',' << format_number(a.latency[i].mean)
                << ',' << format_number(a.latency[i].variance) << '\n';
        }
        summary_row(summary, name, kind, cfg.policy.alpha, cfg.num_arms, cfg.num_runs,
                    cfg.horizon, a.final_regret, a.final_latency);
    }
    outputs.close(ts, "timeseries.csv");
    outputs.close(agg, "aggregate.csv");
    outputs.close(summary, "summary.csv");
}

void emit_sweep(OutputSet& outputs, const ExperimentSpec& spec) {
    std::vector<harness::SweepPoint> points;
    const bool by_alpha = spec.kind == ExperimentKind::alpha_sweep;
    if (by_alpha) {
        points = harness::sweep_alpha(spec.alpha_grid, config_for(spec, PolicyKind::ssph));
    } else {
        std::vector<policies::PolicySpec> specs;
        for (auto kind : spec.policies) specs.push_back(spec.policy_spec(kind));
        points = harness::sweep_arms(spec.arm_grid, specs, spec.run);
    }

    auto sweep = outputs.open("sweep.csv");
    auto runs = outputs.open("sweep_runs.csv");
    auto summary = outputs.open("summary.csv");
    if (by_alpha) {
        sweep << "alpha,runs,mean_regret,stdev_regret,mean_latency_s,stdev_latency_s\n";
        runs << "alpha,run,final_regret,final_latency_s\n";
    } else {
        sweep << "arms,policy,runs,mean_regret,stdev_regret,mean_latency_s,stdev_latency_s\n";
        runs << "arms,policy,run,final_regret,final_latency_s\n";
    }
    summary << kSummaryHeader;

    for (const auto& p : points) {
        const auto name = label(p.policy);
        const std::string key =
            by_alpha ? format_number(p.alpha) : std::to_string(p.arms) + ',' + name;
        sweep << key << ',' << p.final_regrets.size() << ',' << format_number(p.regret.mean)
              << ',' << format_number(p.regret.stdev()) << ',' << format_number(p.latency.mean)
              << ',' << format_number(p.latency.stdev()) << '\n';
        for (std::size_t i = 0; i < p.final_regrets.size(); ++i) {
            runs << key << ',' << i << ',' << format_number(p.final_regrets[i]) << ','
                 << format_number(p.final_latencies[i]) << '\n';
        }
        summary_row(summary, name, p.policy, p.alpha, p.arms, p.final_regrets.size(),
                    spec.run.horizon, p.regret, p.latency);
    }
    outputs.close(sweep, "sweep.csv");
    outputs.close(runs, "sweep_runs.csv");
    outputs.close(summary, "summary.csv");
}

}  // namespace

int run_and_emit(const ExperimentSpec& spec) {
    std::error_code ec;
    fs::create_directories(spec.out, ec);
    if (ec || !fs::is_directory(spec.out)) {
        std::cerr << "error: cannot create output directory " << spec.out.string() << ": "
                  << ec.message() << '\n';
        return 3;
    }

    OutputSet outputs(spec.out);
    try {
        switch (spec.kind) {
            case ExperimentKind::single:
            case ExperimentKind::compare: emit_runs(outputs, spec); break;
            case ExperimentKind::alpha_sweep:
            case ExperimentKind::arm_sweep: emit_sweep(outputs, spec); break;
        }
        write_meta(outputs, spec);
    } catch (const std::exception& e) {
        outputs.discard();
        std::cerr << "error: " << e.what() << '\n';
        return 3;
    }
    return 0;
}

}  // namespace mecbandit::cli
