#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "cqed/liouville.hpp"
#include "cqed/qstate.hpp"
#include "cqed/unraveller.hpp"

namespace cqed::entanglement {

/// Wootters concurrence of a two-qubit state, max(0, mu1 - mu2 - mu3 - mu4)
/// with mu the decreasing square roots of the eigenvalues of
/// sqrt(rho) (sy x sy) rho* (sy x sy) sqrt(rho).
/// Throws ValidationError for states that are not 2x2 or not positive
/// (min eigenvalue below -1e-8).
double concurrence(const DensityMatrix& rho);

/// |psi^T (sy x sy) psi| / <psi|psi> for a pure two-qubit state.
double concurrence(const StateVector& psi);

/// (|gg> + |ee>)/sqrt 2
StateVector bell_phi_plus();

/// Each qubit in its own infinite-temperature bath: gamma D[s-] + gamma D[s+] locally.
LindbladModel local_bath_model(double gamma);

/// Five measurement channels: joint no-jump, then (s-, s+) of qubit A and of
/// qubit B, each local pair mixed by the plate-out detector basis.
ChannelSet protection_channels(double gamma, double dt);

struct ProtectionOptions {
    double gamma = 0.1;
    double t_final = 30.0;
    std::size_t n_traj = 200;
    std::uint64_t seed = 0;
    double dt = 1e-3;
    std::size_t sample_every = 100;
    double master_step = 1e-2;
};

struct ProtectionResult {
    std::vector<double> times;
    std::vector<std::vector<double>> trajectory_concurrence;  // [trajectory][sample]
    std::vector<double> master_concurrence;
    std::vector<DensityMatrix> master_states;
    std::vector<DensityMatrix> ensemble_average;
    std::vector<double> averaged_state_concurrence;  // C(mean of trajectory projectors)
    std::vector<double> ensemble_distance;           // trace distance to master solution
    double max_concurrence_deviation = 0.0;          // max |C_traj - 1|
    Hygiene master_hygiene;

    /// First sampled time with master-equation concurrence strictly below `threshold`.
    std::optional<double> master_time_below(double threshold) const;
};

ProtectionResult protection_run(const ProtectionOptions& options);

}  // namespace cqed::entanglement
