#include "mecbandit/harness.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace mecbandit::harness {

namespace {

void require(bool ok, const char* what) {
    if (!ok) throw std::invalid_argument(what);
}

}  // namespace

std::vector<env::ServerConfig> RunConfig::servers() const {
    return env::replicate_bank(server_classes, num_arms);
}

void RunConfig::validate() const {
    require(horizon >= 1, "horizon must be >= 1");
    require(num_runs >= 1, "num_runs must be >= 1");
    require(num_arms >= 1, "num_arms must be >= 1");
    require(!server_classes.empty(), "at least one server class is required");
    require(latency_cap > 0.0, "latency_cap must be > 0");
    for (const auto& s : server_classes) s.validate();
    profile.validate();
    policy.validate();
}

RunRecord run_episode(const RunConfig& config, std::uint64_t seed) {
    return run_episode(config, seed, StepObserver{});
}

RunRecord run_episode(const RunConfig& config, std::uint64_t seed, const StepObserver& observer) {
    config.validate();
    const auto servers = config.servers();
    auto state = env::init_state(servers, seed);

    const bool oracle = config.policy.kind == policies::PolicyKind::oracle;
    std::unique_ptr<policies::Policy> policy;
    if (!oracle) {
        policy = policies::make_policy(config.policy, servers.size());
        policy->reset(seed);
    }

    RunRecord rec;
    const std::size_t horizon = config.horizon;
    rec.chosen.reserve(horizon);
    rec.reward.reserve(horizon);
    rec.best_reward.reserve(horizon);
    rec.delay.reserve(horizon);
    rec.running_regret.reserve(horizon);
    rec.running_latency.reserve(horizon);

    double regret_sum = 0.0;
    double latency_sum = 0.0;
    for (std::size_t t = 1; t <= horizon; ++t) {
        const auto outcome = env::env_step(state, servers, config.profile);
        if (observer) observer(t, outcome);
        const std::size_t arm = oracle ? policies::oracle_select(outcome) : policy->select(t);
        const auto& picked = outcome.arms.at(arm);
        if (!oracle) policy->update(arm, picked.rho);

        const double best = outcome.best_reward();
        const double delay = std::min(picked.d, config.latency_cap);
        regret_sum += best - picked.rho;
        latency_sum += delay;

        rec.chosen.push_back(arm);
        rec.reward.push_back(picked.rho);
        rec.best_reward.push_back(best);
        rec.delay.push_back(delay);
        rec.running_regret.push_back(regret_sum / static_cast<double>(t));
        rec.running_latency.push_back(latency_sum / static_cast<double>(t));
    }
    return rec;
}

double normalized_regret(const RunRecord& record, std::size_t upto) {
    require(upto >= 1 && upto <= record.horizon(), "upto must lie in [1, T]");
    double sum = 0.0;
    for (std::size_t i = 0; i < upto; ++i) sum += record.best_reward[i] - record.reward[i];
    return sum / static_cast<double>(upto);
}

double normalized_latency(const RunRecord& record, std::size_t upto) {
    require(upto >= 1 && upto <= record.horizon(), "upto must lie in [1, T]");
    double sum = 0.0;
    for (std::size_t i = 0; i < upto; ++i) sum += record.delay[i];
    return sum / static_cast<double>(upto);
}

double Moments::stdev() const { return std::sqrt(variance); }

Moments moments(const std::vector<double>& xs) {
    require(!xs.empty(), "moments of an empty sample");
    const double n = static_cast<double>(xs.size());
    double mean = 0.0;
    for (double x : xs) mean += x;
    mean /= n;
    double ss = 0.0;
    for (double x : xs) ss += (x - mean) * (x - mean);
    return {mean, ss / n};
}

Aggregate aggregate(const std::vector<RunRecord>& records) {
    require(!records.empty(), "nothing to aggregate");
    const std::size_t horizon = records.front().horizon();
    for (const auto& r : records) require(r.horizon() == horizon, "records differ in horizon");

    Aggregate agg;
    agg.runs = records.size();
    agg.regret.reserve(horizon);
    agg.latency.reserve(horizon);
    std::vector<double> column(records.size());
    for (std::size_t t = 0; t < horizon; ++t) {
        for (std::size_t i = 0; i < records.size(); ++i) column[i] = records[i].running_regret[t];
        agg.regret.push_back(moments(column));
        for (std::size_t i = 0; i < records.size(); ++i) column[i] = records[i].running_latency[t];
        agg.latency.push_back(moments(column));
    }
    agg.final_regret = agg.regret.back();
    agg.final_latency = agg.latency.back();
    return agg;
}

std::vector<RunRecord> run_batch(const RunConfig& config) {
    config.validate();
    std::vector<RunRecord> records;
    records.reserve(config.num_runs);
    for (std::size_t i = 0; i < config.num_runs; ++i) {
        records.push_back(run_episode(config, run_seed(config.base_seed, i)));
    }
    return records;
}

namespace {

SweepPoint summarize(const RunConfig& config) {
    SweepPoint point;
    point.alpha = config.policy.alpha;
    point.arms = config.num_arms;
    point.policy = config.policy.kind;
    for (std::size_t i = 0; i < config.num_runs; ++i) {
        const auto rec = run_episode(config, run_seed(config.base_seed, i));
        point.final_regrets.push_back(rec.final_regret());
        point.final_latencies.push_back(rec.final_latency());
    }
    point.regret = moments(point.final_regrets);
    point.latency = moments(point.final_latencies);
    return point;
}

}  // namespace

std::vector<SweepPoint> sweep_alpha(const std::vector<double>& grid, const RunConfig& config) {
    for (double a : grid) require(a >= 0.0 && a < 1.0, "alpha must lie in [0,1)");
    std::vector<SweepPoint> points;
    for (double a : grid) {
        RunConfig cfg = config;
        cfg.policy.kind = policies::PolicyKind::ssph;
        cfg.policy.alpha = a;
        cfg.validate();
        points.push_back(summarize(cfg));
    }
    return points;
}

std::vector<SweepPoint> sweep_arms(const std::vector<std::size_t>& arm_counts,
                                   const std::vector<policies::PolicySpec>& policy_specs,
                                   const RunConfig& config) {
    for (auto n : arm_counts) require(n >= 1, "arm counts must be >= 1");
    std::vector<SweepPoint> points;
    for (auto n : arm_counts) {
        for (const auto& spec : policy_specs) {
            RunConfig cfg = config;
            cfg.num_arms = n;
            cfg.policy = spec;
            cfg.validate();
            points.push_back(summarize(cfg));
        }
    }
    return points;
}

}  // namespace mecbandit::harness
