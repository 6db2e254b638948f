#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "cqed/liouville.hpp"
#include "cqed/qstate.hpp"

namespace cqed {

/// Measurement operators for one fixed time step.
///
/// ops[0] is the no-jump operator before any mixing; `mixing` records the
/// unitary U that produced the current ops from the raw jump set (identity
/// when unmixed).
struct ChannelSet {
    double dt = 0.0;
    std::vector<OperatorMatrix> ops;
    Matrix mixing;
    std::vector<double> source_rates;

    std::size_t size() const noexcept { return ops.size(); }
    const HilbertLayout& layout() const { return ops.front().layout(); }

    /// sum_k M_k^dag M_k
    Matrix completeness() const;
    /// max |sum_k M_k^dag M_k - I|
    double completeness_residual() const;
};

/// J_0 = I - dt/2 sum_k rate_k L_k^dag L_k and J_k = sqrt(rate_k dt) L_k.
/// Requires dt * max rate <= 0.05.
ChannelSet build_jump_channels(const std::vector<Channel>& rates, double dt);

/// ops'_j = sum_k U_jk ops_k.
ChannelSet mix_channels(const ChannelSet& cs, const Matrix& u);

/// Block-diagonal diag(1, U): mixes jump channels, leaves the no-jump channel alone.
Matrix embed_jump_mixing(const Matrix& jump_unitary);

/// Balanced mixing of two jump channels, (J_1 + e^{i phi} J_2, J_1 - e^{i phi} J_2) / sqrt 2.
Matrix balanced_pair_mixing(double phi = 0.0);

struct StepResult {
    std::size_t outcome;
    StateVector state;
};

/// One measurement step: p_k = <psi|M_k^dag M_k|psi>, renormalised to sum to
/// one, outcome chosen by inverse CDF over channel order, post-measurement
/// state M_k psi / |M_k psi|. `draw` is uniform in [0, 1).
StepResult trajectory_step(const StateVector& psi, const ChannelSet& cs, double draw);

// -- Seeding ------------------------------------------------------------------

/// SplitMix64 finaliser.
std::uint64_t splitmix64(std::uint64_t x) noexcept;

/// Per-trajectory seed: splitmix64(master ^ splitmix64(index + 1)).
std::uint64_t trajectory_seed(std::uint64_t master_seed, std::uint64_t index) noexcept;

// -- Trajectories and ensembles -----------------------------------------------

/// A named function of the (normalised) conditional state, sampled along trajectories.
struct TrackedQuantity {
    std::string name;
    std::function<double(const StateVector&)> evaluate;
};

TrackedQuantity track_expectation(std::string name, const OperatorMatrix& op);

struct NamedSeries {
    std::string name;
    std::vector<double> values;
};

struct TrajectoryRecord {
    std::uint64_t seed = 0;
    std::vector<double> times;          // sample times
    std::vector<std::uint8_t> outcomes; // one per step; empty when not kept
    std::vector<NamedSeries> observables;
};

struct TrajectoryOptions {
    double t_final = 0.0;
    std::size_t sample_every = 1;  // steps between samples
    bool keep_outcomes = true;
    std::vector<TrackedQuantity> tracked;
};

/// Number of fixed steps of length cs.dt covering [0, t_final].
std::size_t step_count(double t_final, double dt);

/// Runs one seeded trajectory. `on_sample` (optional) sees the state at every
/// sample index, including t = 0.
TrajectoryRecord run_trajectory(
    const StateVector& psi0, const ChannelSet& cs, const TrajectoryOptions& options,
    std::uint64_t seed,
    const std::function<void(std::size_t, const Vector&)>& on_sample = {});

struct EnsembleOptions {
    TrajectoryOptions trajectory;
    std::size_t n_traj = 1;
    std::uint64_t master_seed = 0;
    bool keep_records = true;
    unsigned threads = 0;  // 0: hardware concurrency
};

struct EnsembleResult {
    std::vector<double> times;
    std::vector<DensityMatrix> average;  // mean of |psi_i><psi_i| per sample
    std::vector<TrajectoryRecord> records;
};

/// Independent trajectories with seeds trajectory_seed(master_seed, i).
/// Accumulation is done in fixed index blocks, so the result is bit-identical
/// for any thread count or scheduling.
EnsembleResult ensemble_average(const StateVector& psi0, const ChannelSet& cs,
                                const EnsembleOptions& options);

}  // namespace cqed
