#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <vector>

#include "mecbandit/env.hpp"
#include "mecbandit/policies.hpp"

namespace mecbandit::harness {

struct RunConfig {
    std::size_t horizon = 5000;
    std::size_t num_runs = 50;
    std::uint64_t base_seed = 1;
    policies::PolicySpec policy;
    /// Server classes; arm j uses class j mod |server_classes|.
    std::vector<env::ServerConfig> server_classes = env::reference_classes();
    std::size_t num_arms = 5;
    env::TaskProfile profile;
    /// Ceiling applied to the chosen arm's delay in the latency metric only.
    double latency_cap = 10.0;

    std::vector<env::ServerConfig> servers() const;
    void validate() const;
    bool operator==(const RunConfig&) const = default;
};

/// Seed of run `index` (0-based) under `base_seed`.
inline std::uint64_t run_seed(std::uint64_t base_seed, std::size_t index) {
    return base_seed + index;
}

/// One episode. Vectors are indexed by step (t - 1).
struct RunRecord {
    std::vector<std::size_t> chosen;
    std::vector<double> reward;
    std::vector<double> best_reward;
    std::vector<double> delay;            // capped chosen-arm delay
    std::vector<double> running_regret;   // normalized regret up to t
    std::vector<double> running_latency;  // normalized latency up to t

    std::size_t horizon() const { return chosen.size(); }
    double final_regret() const { return running_regret.back(); }
    double final_latency() const { return running_latency.back(); }
};

/// Drives one policy against one environment for config.horizon steps.
/// The environment is seeded from `seed` alone, so every policy run at the
/// same seed faces the same trajectory.
RunRecord run_episode(const RunConfig& config, std::uint64_t seed);

/// Called with (t, outcome of every arm) before the policy acts.
using StepObserver = std::function<void(std::size_t, const env::StepOutcome&)>;
RunRecord run_episode(const RunConfig& config, std::uint64_t seed, const StepObserver& observer);

double normalized_regret(const RunRecord& record, std::size_t upto);
double normalized_latency(const RunRecord& record, std::size_t upto);

struct Moments {
    double mean = 0.0;
    double variance = 0.0;  // population variance
    double stdev() const;
};

/// Population mean and variance.
Moments moments(const std::vector<double>& xs);

struct Aggregate {
    std::size_t runs = 0;
    std::vector<Moments> regret;   // per step
    std::vector<Moments> latency;  // per step
    Moments final_regret;
    Moments final_latency;
};

Aggregate aggregate(const std::vector<RunRecord>& records);

/// Runs config.num_runs episodes with seeds run_seed(base_seed, i).
std::vector<RunRecord> run_batch(const RunConfig& config);

struct SweepPoint {
    double alpha = 0.0;
    std::size_t arms = 0;
    policies::PolicyKind policy = policies::PolicyKind::ssph;
    std::vector<double> final_regrets;
    std::vector<double> final_latencies;
    Moments regret;
    Moments latency;
};

/// Sisyphus at every retention rate in grid.
std::vector<SweepPoint> sweep_alpha(const std::vector<double>& grid, const RunConfig& config);

/// Every (arm count, policy) cell; arm counts override config.num_arms. Cells are ordered by arm count,
/// then by position in `policy_specs`.
std::vector<SweepPoint> sweep_arms(const std::vector<std::size_t>& arm_counts,
                                   const std::vector<policies::PolicySpec>& policy_specs,
                                   const RunConfig& config);

}  // namespace mecbandit::harness
