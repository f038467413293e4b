#pragma once

#include <cstddef>
#include <cstdint>
#include <limits>
#include <random>
#include <span>
#include <vector>

namespace mecbandit::env {

using Rng = std::mt19937_64;

/// Static description of one MEC server (one arm).
struct ServerConfig {
    double psi0 = 0.7;      // probability an in-range UE is connected
    double psi1 = 0.5;      // probability a connected UE offloads in a step
    int w = 100;            // UEs in range
    int n = 100;            // max concurrent users
    double lambda = 100.0;  // mean epoch duration, time-steps
    double r = 7.0;         // UE-server distance, meters
    double p_b = 0.3;       // blockage probability per step
    double c = 5e9;         // computing capacity, Hz

    void validate() const;
    bool operator==(const ServerConfig&) const = default;
};

/// Offloaded task and radio link parameters shared by all servers.
struct TaskProfile {
    double l_u = 20e6;        // uplink task size, bytes
    double omega = 1.0;       // downlink ratio, L_D = omega * L_U
    double kappa = 10.0;      // cycles per byte
    double b_u = 500e6;       // uplink bandwidth, Hz
    double b_d = 500e6;       // downlink bandwidth, Hz
    double p_u_db = 20.0;     // reference uplink SINR at 1 m, dB
    double p_d_db = 40.0;     // reference downlink SINR at 1 m, dB
    double gamma_los = 2.0;
    double gamma_nlos = 4.0;
    double d_max = 1.0;       // latency requirement, s
    double delta = 1.0;       // time-step duration, s

    void validate() const;
    bool operator==(const TaskProfile&) const = default;
};

inline constexpr double kInfiniteDelay = std::numeric_limits<double>::infinity();

/// Per-server dynamic state. Each server owns its random stream so that its
/// trajectory is independent of every other server and of the policy.
struct ServerState {
    std::int64_t epoch_remaining = 0;
    int v = 0;
    Rng rng;
};

struct EnvState {
    std::vector<ServerState> servers;
};

/// What one server would have delivered at one step.
struct ArmOutcome {
    double a = 1.0;
    bool blocked = false;
    int q = 0;
    double tau = 0.0;
    double eta = 0.0;
    double d = 0.0;
    double rho = 0.0;

    bool operator==(const ArmOutcome&) const = default;
};

/// Counterfactual outcome for every arm at one step.
struct StepOutcome {
    std::vector<ArmOutcome> arms;

    double best_reward() const;
    bool operator==(const StepOutcome&) const = default;
};

// Stochastic primitives.
std::int64_t sample_epoch_duration(double lambda, Rng& rng);
int sample_connected(int w, double psi0, Rng& rng);
int sample_offloaders(int v, double psi1, Rng& rng);

// Deterministic delay model.
double availability(int q, int n);
double transmission_delay(const TaskProfile& profile, double r, bool blocked);
double computation_delay(const TaskProfile& profile, double c, double a);
ArmOutcome evaluate_arm(const TaskProfile& profile, const ServerConfig& server,
                        int q, bool blocked);

/// Draws the first epoch (duration and connected count) for every server.
/// Server i gets the stream derived from (seed, i + 1); stream 0 is reserved
/// for the policy.
EnvState init_state(std::span<const ServerConfig> configs, std::uint64_t seed);

/// Advances every server by one step and returns the outcome of all arms.
/// Each server serves the current step with its current v, then consumes one
/// step of its epoch; when the epoch is exhausted a new (duration, v) pair is
/// drawn for the following steps.
StepOutcome env_step(EnvState& state, std::span<const ServerConfig> configs,
                     const TaskProfile& profile);

/// The five reference server classes, in order.
std::vector<ServerConfig> reference_classes();

/// num_arms servers cycling through `base` (arm j gets base[j mod |base|]).
std::vector<ServerConfig> replicate_bank(std::span<const ServerConfig> base,
                                         std::size_t num_arms);
std::vector<ServerConfig> make_server_bank(std::size_t num_arms);

/// Independent generator for stream `stream` of run seed `seed`.
Rng make_stream(std::uint64_t seed, std::uint64_t stream);

}  // namespace mecbandit::env
