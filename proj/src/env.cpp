#include "mecbandit/env.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

namespace mecbandit::env {

namespace {

void require(bool ok, const char* what) {
    if (!ok) throw std::invalid_argument(what);
}

bool is_probability(double p) { return p >= 0.0 && p <= 1.0; }

double db_to_linear(double db) { return std::pow(10.0, db / 10.0); }

}  // namespace

void ServerConfig::validate() const {
    require(is_probability(psi0), "psi0 must lie in [0,1]");
    require(is_probability(psi1), "psi1 must lie in [0,1]");
    require(is_probability(p_b), "p_b must lie in [0,1]");
    require(w >= 1, "w must be >= 1");
    require(n >= 1, "n must be >= 1");
    require(lambda >= 1.0, "lambda must be >= 1");
    require(r > 0.0, "r must be > 0");
    require(c > 0.0, "c must be > 0");
}

void TaskProfile::validate() const {
    require(l_u > 0.0, "l_u must be > 0");
    require(omega > 0.0, "omega must be > 0");
    require(kappa > 0.0, "kappa must be > 0");
    require(b_u > 0.0 && b_d > 0.0, "bandwidths must be > 0");
    require(d_max > 0.0, "d_max must be > 0");
    require(delta > 0.0, "delta must be > 0");
    require(gamma_los > 0.0 && gamma_los <= gamma_nlos,
            "path-loss exponents must satisfy 0 < gamma_los <= gamma_nlos");
}

double StepOutcome::best_reward() const {
    double best = 0.0;
    for (const auto& arm : arms) best = std::max(best, arm.rho);
    return best;
}

std::int64_t sample_epoch_duration(double lambda, Rng& rng) {
    require(lambda >= 1.0, "lambda must be >= 1");
    // std::geometric_distribution counts failures before the first success,
    // so shift by one to get support {1, 2, ...} with mean lambda.
    std::geometric_distribution<std::int64_t> failures(1.0 / lambda);
    return failures(rng) + 1;
}

int sample_connected(int w, double psi0, Rng& rng) {
    require(is_probability(psi0), "psi0 must lie in [0,1]");
    require(w >= 0, "w must be >= 0");
    return std::binomial_distribution<int>(w, psi0)(rng);
}

int sample_offloaders(int v, double psi1, Rng& rng) {
    require(is_probability(psi1), "psi1 must lie in [0,1]");
    require(v >= 0, "v must be >= 0");
    return std::binomial_distribution<int>(v, psi1)(rng);
}

double availability(int q, int n) {
    require(n >= 1, "n must be >= 1");
    require(q >= 0 && q <= n, "q must lie in [0, n]");
    return 1.0 - static_cast<double>(q) / static_cast<double>(n);
}

double transmission_delay(const TaskProfile& profile, double r, bool blocked) {
    require(r > 0.0, "r must be > 0");
    const double gamma = blocked ? profile.gamma_nlos : profile.gamma_los;
    const double path_gain = std::pow(r, -gamma);
    const double bits_up = profile.l_u * 8.0;
    const double bits_down = profile.omega * profile.l_u * 8.0;
    const double rate_up =
        profile.b_u * std::log2(1.0 + db_to_linear(profile.p_u_db) * path_gain);
    const double rate_down =
        profile.b_d * std::log2(1.0 + db_to_linear(profile.p_d_db) * path_gain);
    return bits_up / rate_up + bits_down / rate_down;
}

double computation_delay(const TaskProfile& profile, double c, double a) {
    require(c > 0.0, "c must be > 0");
    require(a >= 0.0 && a <= 1.0, "a must lie in [0,1]");
    if (a == 0.0) return kInfiniteDelay;
    return profile.kappa * profile.l_u / (c * a);
}

ArmOutcome evaluate_arm(const TaskProfile& profile, const ServerConfig& server,
                        int q, bool blocked) {
    ArmOutcome out;
    out.q = q;
    out.blocked = blocked;
    out.a = availability(q, server.n);
    out.tau = transmission_delay(profile, server.r, blocked);
    out.eta = computation_delay(profile, server.c, out.a);
    out.d = out.tau + out.eta;
    out.rho = out.d <= profile.d_max ? 1.0 : 0.0;
    return out;
}

Rng make_stream(std::uint64_t seed, std::uint64_t stream) {
    std::seed_seq seq{static_cast<std::uint32_t>(seed),
                      static_cast<std::uint32_t>(seed >> 32),
                      static_cast<std::uint32_t>(stream),
                      static_cast<std::uint32_t>(stream >> 32)};
    return Rng(seq);
}

EnvState init_state(std::span<const ServerConfig> configs, std::uint64_t seed) {
    require(!configs.empty(), "at least one server is required");
    EnvState state;
    state.servers.reserve(configs.size());
    for (std::size_t i = 0; i < configs.size(); ++i) {
        configs[i].validate();
        ServerState server;
        server.rng = make_stream(seed, i + 1);
        server.epoch_remaining = sample_epoch_duration(configs[i].lambda, server.rng);
        server.v = sample_connected(configs[i].w, configs[i].psi0, server.rng);
        state.servers.push_back(std::move(server));
    }
    return state;
}

StepOutcome env_step(EnvState& state, std::span<const ServerConfig> configs,
                     const TaskProfile& profile) {
    require(state.servers.size() == configs.size(),
            "state and server list disagree on the number of arms");
    StepOutcome outcome;
    outcome.arms.reserve(configs.size());
    for (std::size_t i = 0; i < configs.size(); ++i) {
        auto& server = state.servers[i];
        const auto& cfg = configs[i];

        // q is bounded by v <= w; a server with n < w may still saturate.
        const int q = std::min(sample_offloaders(server.v, cfg.psi1, server.rng), cfg.n);
        const bool blocked = std::bernoulli_distribution(cfg.p_b)(server.rng);
        outcome.arms.push_back(evaluate_arm(profile, cfg, q, blocked));

        if (--server.epoch_remaining <= 0) {
            server.epoch_remaining = sample_epoch_duration(cfg.lambda, server.rng);
            server.v = sample_connected(cfg.w, cfg.psi0, server.rng);
        }
    }
    return outcome;
}

std::vector<ServerConfig> reference_classes() {
    struct Row {
        double psi0, lambda, r, p_b, c;
    };
    constexpr Row rows[] = {
        {0.7, 100.0, 7.0, 0.3, 5.0e9},
        {0.6, 150.0, 10.0, 0.4, 3.3e9},
        {0.5, 100.0, 12.0, 0.5, 3.3e9},
        {0.4, 100.0, 14.0, 0.6, 3.3e9},
        {0.3, 50.0, 16.0, 0.7, 5.0e9},
    };
    std::vector<ServerConfig> classes;
    for (const auto& row : rows) {
        ServerConfig s;
        s.psi0 = row.psi0;
        s.psi1 = 0.5;
        s.w = 100;
        s.n = 100;
        s.lambda = row.lambda;
        s.r = row.r;
        s.p_b = row.p_b;
        s.c = row.c;
        classes.push_back(s);
    }
    return classes;
}

std::vector<ServerConfig> replicate_bank(std::span<const ServerConfig> base,
                                         std::size_t num_arms) {
    require(num_arms >= 1, "num_arms must be >= 1");
    require(!base.empty(), "server bank needs at least one class");
    std::vector<ServerConfig> bank;
    bank.reserve(num_arms);
    for (std::size_t j = 0; j < num_arms; ++j) bank.push_back(base[j % base.size()]);
    return bank;
}

std::vector<ServerConfig> make_server_bank(std::size_t num_arms) {
    const auto classes = reference_classes();
    return replicate_bank(classes, num_arms);
}

}  // namespace mecbandit::env
