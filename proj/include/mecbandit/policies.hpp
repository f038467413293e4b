#pragma once

#include <cstddef>
#include <cstdint>
#include <memory>
#include <random>
#include <string>
#include <string_view>
#include <vector>

#include "mecbandit/env.hpp"

namespace mecbandit::policies {

using Rng = std::mt19937_64;

/// Common contract for every learner. Policies only ever see the reward of
/// the arm they chose.
class Policy {
public:
    virtual ~Policy() = default;

    /// Arm to play at step t (1-based).
    virtual std::size_t select(std::size_t t) = 0;
    /// Feeds back the realized reward of the arm returned by select.
    virtual void update(std::size_t arm, double reward) = 0;
    /// Clears all learning state and reseeds the policy's random stream.
    virtual void reset(std::uint64_t seed) = 0;

    virtual std::size_t num_arms() const = 0;
    virtual std::string name() const = 0;
    virtual std::unique_ptr<Policy> clone() const = 0;
};

// ---------------------------------------------------------------------------
// Sisyphus score machinery

/// One step of the score recursion after the k-th play of an arm.
double ssph_score_update(double mu_prev, double rho, std::uint64_t k, double alpha);

/// Effective weight of the m-th reward in the score after k plays.
double ssph_memory_weight(std::uint64_t k, std::uint64_t m, double alpha);

struct SsphState {
    std::vector<double> mu;
    std::vector<std::uint64_t> k;
    double alpha = 0.6;
    double sigma = 0.1;

    SsphState(std::size_t arms, double alpha, double sigma);
    bool never_played(std::size_t arm) const { return k[arm] == 0; }
};

/// Gaussian perturbation of every score, argmax with lowest-index ties.
std::size_t ssph_select(const SsphState& state, Rng& rng);
void ssph_update(SsphState& state, std::size_t arm, double rho);

class Sisyphus final : public Policy {
public:
    Sisyphus(std::size_t arms, double alpha = 0.6, double sigma = 0.1);

    std::size_t select(std::size_t t) override;
    void update(std::size_t arm, double reward) override;
    void reset(std::uint64_t seed) override;
    std::size_t num_arms() const override { return state_.mu.size(); }
    std::string name() const override { return "SSPH"; }
    std::unique_ptr<Policy> clone() const override;

    const SsphState& state() const { return state_; }

private:
    SsphState state_;
    Rng rng_;
};

// ---------------------------------------------------------------------------
// Thompson sampling family: TS, dTS, dOTS

struct TsState {
    std::vector<double> s;
    std::vector<double> f;
    double discount = 1.0;
    bool optimistic = false;

    TsState(std::size_t arms, double discount, bool optimistic);
};

std::size_t ts_select(const TsState& state, Rng& rng);
void ts_update(TsState& state, std::size_t arm, double rho);

class ThompsonSampling final : public Policy {
public:
    ThompsonSampling(std::size_t arms, double discount = 1.0, bool optimistic = false);

    std::size_t select(std::size_t t) override;
    void update(std::size_t arm, double reward) override;
    void reset(std::uint64_t seed) override;
    std::size_t num_arms() const override { return state_.s.size(); }
    std::string name() const override;
    std::unique_ptr<Policy> clone() const override;

    const TsState& state() const { return state_; }

private:
    TsState state_;
    Rng rng_;
};

// ---------------------------------------------------------------------------
// Discounted UCB

struct DucbState {
    std::vector<double> sum;
    std::vector<double> count;
    double gamma = 0.5;
    double xi = 0.5;
    double bound = 1.0;

    DucbState(std::size_t arms, double gamma, double xi);
    double total_count() const;
};

std::size_t ducb_select(const DucbState& state);
void ducb_update(DucbState& state, std::size_t arm, double rho);

class DiscountedUcb final : public Policy {
public:
    DiscountedUcb(std::size_t arms, double gamma = 0.5, double xi = 0.5);

    std::size_t select(std::size_t t) override;
    void update(std::size_t arm, double reward) override;
    void reset(std::uint64_t seed) override;
    std::size_t num_arms() const override { return state_.sum.size(); }
    std::string name() const override { return "D-UCB"; }
    std::unique_ptr<Policy> clone() const override;

    const DucbState& state() const { return state_; }

private:
    DucbState state_;
};

// ---------------------------------------------------------------------------
// References

/// Uniformly random arm every step.
class UniformRandom final : public Policy {
public:
    explicit UniformRandom(std::size_t arms);

    std::size_t select(std::size_t t) override;
    void update(std::size_t arm, double reward) override;
    void reset(std::uint64_t seed) override;
    std::size_t num_arms() const override { return arms_; }
    std::string name() const override { return "Random"; }
    std::unique_ptr<Policy> clone() const override;

private:
    std::size_t arms_;
    Rng rng_;
};

/// Clairvoyant choice: an arm with maximal reward, ties broken by the
/// smallest delay and then the lowest index. Needs the full counterfactual
/// outcome, so it lives outside the Policy interface.
std::size_t oracle_select(const env::StepOutcome& outcome);

// ---------------------------------------------------------------------------
// Named construction

enum class PolicyKind { ssph, ts, dts, dots, ducb, random, oracle };

struct PolicySpec {
    PolicyKind kind = PolicyKind::ssph;
    double alpha = 0.6;
    double sigma = 0.1;
    double discount = 1.0;  // TS family discount or D-UCB gamma
    double xi = 0.5;

    static PolicySpec defaults_for(PolicyKind kind);
    void validate() const;
    bool operator==(const PolicySpec&) const = default;
};

std::string_view to_string(PolicyKind kind);      // config token, e.g. "dots"
std::string_view display_name(PolicyKind kind);   // report label, e.g. "dOTS"
PolicyKind parse_policy_kind(std::string_view token);  // throws std::invalid_argument

/// Builds the learner for spec. Not valid for PolicyKind::oracle.
std::unique_ptr<Policy> make_policy(const PolicySpec& spec, std::size_t arms);

}  // namespace mecbandit::policies
