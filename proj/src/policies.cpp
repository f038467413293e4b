#include "mecbandit/policies.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

namespace mecbandit::policies {

namespace {

void require(bool ok, const char* what) {
    if (!ok) throw std::invalid_argument(what);
}

void check_reward(double rho) { require(rho >= 0.0 && rho <= 1.0, "reward must lie in [0,1]"); }

void check_arm(std::size_t arm, std::size_t arms) { require(arm < arms, "arm index out of range"); }

// Lowest index wins ties.
std::size_t argmax(const std::vector<double>& values) {
    std::size_t best = 0;
    for (std::size_t i = 1; i < values.size(); ++i) {
        if (values[i] > values[best]) best = i;
    }
    return best;
}

double sample_beta(double a, double b, Rng& rng) {
    const double x = std::gamma_distribution<double>(a, 1.0)(rng);
    const double y = std::gamma_distribution<double>(b, 1.0)(rng);
    return x / (x + y);
}

}  // namespace

// ---------------------------------------------------------------------------
// Sisyphus

double ssph_score_update(double mu_prev, double rho, std::uint64_t k, double alpha) {
    require(alpha >= 0.0 && alpha < 1.0, "alpha must lie in [0,1)");
    require(k >= 1, "play count must be >= 1");
    // First play: the history coefficient vanishes and the innovation weight
    // reduces to exactly 1/2.
    if (k == 1) return 0.5 * rho;
    const double ak = std::pow(alpha, static_cast<double>(k));
    const double ak1 = std::pow(alpha, static_cast<double>(k - 1));
    const double denom = 2.0 - alpha - ak;
    return (1.0 - ak1) / denom * mu_prev + (1.0 - alpha) / denom * rho;
}

double ssph_memory_weight(std::uint64_t k, std::uint64_t m, double alpha) {
    require(alpha >= 0.0 && alpha < 1.0, "alpha must lie in [0,1)");
    require(m >= 1 && m <= k, "play index must satisfy 1 <= m <= k");
    double weight =
        m == 1 ? 0.5 : (1.0 - alpha) / (2.0 - alpha - std::pow(alpha, static_cast<double>(m)));
    for (std::uint64_t j = m + 1; j <= k; ++j) {
        const double aj = std::pow(alpha, static_cast<double>(j));
        const double aj1 = std::pow(alpha, static_cast<double>(j - 1));
        weight *= (1.0 - aj1) / (2.0 - alpha - aj);
    }
    return weight;
}

SsphState::SsphState(std::size_t arms, double alpha_, double sigma_)
    : mu(arms, 0.0), k(arms, 0), alpha(alpha_), sigma(sigma_) {
    require(arms >= 1, "need at least one arm");
    require(alpha >= 0.0 && alpha < 1.0, "alpha must lie in [0,1)");
    require(sigma > 0.0 && std::isfinite(sigma), "sigma must be > 0");
}

std::size_t ssph_select(const SsphState& state, Rng& rng) {
    std::normal_distribution<double> noise(0.0, state.sigma);
    std::vector<double> theta(state.mu.size());
    for (std::size_t i = 0; i < theta.size(); ++i) theta[i] = state.mu[i] + noise(rng);
    return argmax(theta);
}

void ssph_update(SsphState& state, std::size_t arm, double rho) {
    check_arm(arm, state.mu.size());
    check_reward(rho);
    state.k[arm] += 1;
    state.mu[arm] = ssph_score_update(state.mu[arm], rho, state.k[arm], state.alpha);

    // Unplayed arms track the mean score of the played ones.
    double played_sum = 0.0;
    std::size_t played = 0;
    bool any_unplayed = false;
    for (std::size_t i = 0; i < state.mu.size(); ++i) {
        if (state.k[i] > 0) {
            played_sum += state.mu[i];
            ++played;
        } else {
            any_unplayed = true;
        }
    }
    if (!any_unplayed) return;
    const double mean = played_sum / static_cast<double>(played);
    for (std::size_t i = 0; i < state.mu.size(); ++i) {
        if (state.k[i] == 0) state.mu[i] = mean;
    }
}

Sisyphus::Sisyphus(std::size_t arms, double alpha, double sigma)
    : state_(arms, alpha, sigma) {}

std::size_t Sisyphus::select(std::size_t) { return ssph_select(state_, rng_); }

void Sisyphus::update(std::size_t arm, double reward) { ssph_update(state_, arm, reward); }

void Sisyphus::reset(std::uint64_t seed) {
    state_ = SsphState(state_.mu.size(), state_.alpha, state_.sigma);
    rng_ = env::make_stream(seed, 0);
}

std::unique_ptr<Policy> Sisyphus::clone() const { return std::make_unique<Sisyphus>(*this); }

// ---------------------------------------------------------------------------
// Thompson sampling family

TsState::TsState(std::size_t arms, double discount_, bool optimistic_)
    : s(arms, 0.0), f(arms, 0.0), discount(discount_), optimistic(optimistic_) {
    require(arms >= 1, "need at least one arm");
    require(discount > 0.0 && discount <= 1.0, "discount must lie in (0,1]");
}

std::size_t ts_select(const TsState& state, Rng& rng) {
    std::vector<double> theta(state.s.size());
    for (std::size_t i = 0; i < theta.size(); ++i) {
        const double a = state.s[i] + 1.0;
        const double b = state.f[i] + 1.0;
        theta[i] = sample_beta(a, b, rng);
        if (state.optimistic) theta[i] = std::max(theta[i], a / (a + b));
    }
    return argmax(theta);
}

void ts_update(TsState& state, std::size_t arm, double rho) {
    check_arm(arm, state.s.size());
    check_reward(rho);
    if (state.discount != 1.0) {
        for (auto& x : state.s) x *= state.discount;
        for (auto& x : state.f) x *= state.discount;
    }
    state.s[arm] += rho;
    state.f[arm] += 1.0 - rho;
}

ThompsonSampling::ThompsonSampling(std::size_t arms, double discount, bool optimistic)
    : state_(arms, discount, optimistic) {}

std::size_t ThompsonSampling::select(std::size_t) { return ts_select(state_, rng_); }

void ThompsonSampling::update(std::size_t arm, double reward) { ts_update(state_, arm, reward); }

void ThompsonSampling::reset(std::uint64_t seed) {
    state_ = TsState(state_.s.size(), state_.discount, state_.optimistic);
    rng_ = env::make_stream(seed, 0);
}

std::string ThompsonSampling::name() const {
    if (state_.optimistic) return "dOTS";
    return state_.discount == 1.0 ? "TS" : "dTS";
}

std::unique_ptr<Policy> ThompsonSampling::clone() const {
    return std::make_unique<ThompsonSampling>(*this);
}

// ---------------------------------------------------------------------------
// Discounted UCB

DucbState::DucbState(std::size_t arms, double gamma_, double xi_)
    : sum(arms, 0.0), count(arms, 0.0), gamma(gamma_), xi(xi_) {
    require(arms >= 1, "need at least one arm");
    require(gamma > 0.0 && gamma <= 1.0, "discount must lie in (0,1]");
    require(xi > 0.0, "xi must be > 0");
}

double DucbState::total_count() const {
    double n = 0.0;
    for (double c : count) n += c;
    return n;
}

std::size_t ducb_select(const DucbState& state) {
    for (std::size_t i = 0; i < state.count.size(); ++i) {
        if (state.count[i] == 0.0) return i;
    }
    // With strong discounting the total count can stay below e; the
    // exploration radius is clamped at zero rather than going imaginary.
    const double log_n = std::max(std::log(state.total_count()), 0.0);
    std::vector<double> index(state.count.size());
    for (std::size_t i = 0; i < index.size(); ++i) {
        const double mean = state.sum[i] / state.count[i];
        index[i] = mean + 2.0 * state.bound * std::sqrt(state.xi * log_n / state.count[i]);
    }
    return argmax(index);
}

void ducb_update(DucbState& state, std::size_t arm, double rho) {
    check_arm(arm, state.sum.size());
    check_reward(rho);
    for (auto& x : state.sum) x *= state.gamma;
    for (auto& x : state.count) x *= state.gamma;
    state.sum[arm] += rho;
    state.count[arm] += 1.0;
}

DiscountedUcb::DiscountedUcb(std::size_t arms, double gamma, double xi)
    : state_(arms, gamma, xi) {}

std::size_t DiscountedUcb::select(std::size_t) { return ducb_select(state_); }

void DiscountedUcb::update(std::size_t arm, double reward) { ducb_update(state_, arm, reward); }

void DiscountedUcb::reset(std::uint64_t) {
    state_ = DucbState(state_.sum.size(), state_.gamma, state_.xi);
}

std::unique_ptr<Policy> DiscountedUcb::clone() const {
    return std::make_unique<DiscountedUcb>(*this);
}

// ---------------------------------------------------------------------------
// References

UniformRandom::UniformRandom(std::size_t arms) : arms_(arms) {
    require(arms >= 1, "need at least one arm");
}

std::size_t UniformRandom::select(std::size_t) {
    return std::uniform_int_distribution<std::size_t>(0, arms_ - 1)(rng_);
}

void UniformRandom::update(std::size_t arm, double reward) {
    check_arm(arm, arms_);
    check_reward(reward);
}

void UniformRandom::reset(std::uint64_t seed) { rng_ = env::make_stream(seed, 0); }

std::unique_ptr<Policy> UniformRandom::clone() const {
    return std::make_unique<UniformRandom>(*this);
}

std::size_t oracle_select(const env::StepOutcome& outcome) {
    require(!outcome.arms.empty(), "outcome has no arms");
    std::size_t best = 0;
    for (std::size_t i = 1; i < outcome.arms.size(); ++i) {
        const auto& cand = outcome.arms[i];
        const auto& cur = outcome.arms[best];
        if (cand.rho > cur.rho || (cand.rho == cur.rho && cand.d < cur.d)) best = i;
    }
    return best;
}

// ---------------------------------------------------------------------------
// Named construction

PolicySpec PolicySpec::defaults_for(PolicyKind kind) {
    PolicySpec spec;
    spec.kind = kind;
    switch (kind) {
        case PolicyKind::dts: spec.discount = 0.8; break;
        case PolicyKind::dots: spec.discount = 0.7; break;
        case PolicyKind::ducb: spec.discount = 0.5; break;
        default: spec.discount = 1.0; break;
    }
    return spec;
}

void PolicySpec::validate() const {
    require(alpha >= 0.0 && alpha < 1.0, "alpha must lie in [0,1)");
    require(sigma > 0.0 && std::isfinite(sigma), "sigma must be > 0");
    require(discount > 0.0 && discount <= 1.0, "discount must lie in (0,1]");
    require(xi > 0.0, "xi must be > 0");
}

std::string_view to_string(PolicyKind kind) {
    switch (kind) {
        case PolicyKind::ssph: return "ssph";
        case PolicyKind::ts: return "ts";
        case PolicyKind::dts: return "dts";
        case PolicyKind::dots: return "dots";
        case PolicyKind::ducb: return "ducb";
        case PolicyKind::random: return "random";
        case PolicyKind::oracle: return "oracle";
    }
    return "?";
}

std::string_view display_name(PolicyKind kind) {
    switch (kind) {
        case PolicyKind::ssph: return "SSPH";
        case PolicyKind::ts: return "TS";
        case PolicyKind::dts: return "dTS";
        case PolicyKind::dots: return "dOTS";
        case PolicyKind::ducb: return "D-UCB";
        case PolicyKind::random: return "Random";
        case PolicyKind::oracle: return "Oracle";
    }
    return "?";
}

PolicyKind parse_policy_kind(std::string_view token) {
    for (auto kind : {PolicyKind::ssph, PolicyKind::ts, PolicyKind::dts, PolicyKind::dots,
                      PolicyKind::ducb, PolicyKind::random, PolicyKind::oracle}) {
        if (token == to_string(kind)) return kind;
    }
    throw std::invalid_argument("unknown policy '" + std::string(token) + "'");
}

std::unique_ptr<Policy> make_policy(const PolicySpec& spec, std::size_t arms) {
    spec.validate();
    switch (spec.kind) {
        case PolicyKind::ssph: return std::make_unique<Sisyphus>(arms, spec.alpha, spec.sigma);
        case PolicyKind::ts: return std::make_unique<ThompsonSampling>(arms, 1.0, false);
        case PolicyKind::dts: return std::make_unique<ThompsonSampling>(arms, spec.discount, false);
        case PolicyKind::dots: return std::make_unique<ThompsonSampling>(arms, spec.discount, true);
        case PolicyKind::ducb: return std::make_unique<DiscountedUcb>(arms, spec.discount, spec.xi);
        case PolicyKind::random: return std::make_unique<UniformRandom>(arms);
        case PolicyKind::oracle: break;
    }
    throw std::invalid_argument("the oracle is driven by the harness, not constructed as a policy");
}

}  // namespace mecbandit::policies
