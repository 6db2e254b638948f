#include "cqed/entanglement.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include <Eigen/Eigenvalues>

#include "cqed/purcell_reservoir.hpp"

namespace cqed::entanglement {

namespace {

const HilbertLayout& two_qubits() {
    static const HilbertLayout layout({2, 2});
    return layout;
}

// sigma_y (x) sigma_y is real: anti-diagonal (-1, 1, 1, -1).
Matrix spin_flip_operator() {
    Matrix y = Matrix::Zero(4, 4);
    y(0, 3) = -1.0;
    y(1, 2) = 1.0;
    y(2, 1) = 1.0;
    y(3, 0) = -1.0;
    return y;
}

void require_two_qubits(const HilbertLayout& layout) {
    if (layout.factors() != std::vector<std::size_t>{2, 2}) {
        throw DimensionError("concurrence: expected a [2,2] layout, got " + layout.to_string());
    }
}

}  // namespace

double concurrence(const DensityMatrix& rho) {
    require_two_qubits(rho.layout());
    const Matrix herm = 0.5 * (rho.entries() + rho.entries().adjoint());
    Eigen::SelfAdjointEigenSolver<Matrix> es(herm);
    if (es.eigenvalues().minCoeff() < Hygiene::kEigenFloor) {
        std::ostringstream os;
        os << "concurrence: state is not positive (min eigenvalue " << es.eigenvalues().minCoeff() << ")";
        throw ValidationError(os.str());
    }
    const Eigen::VectorXd roots = es.eigenvalues().cwiseMax(0.0).cwiseSqrt();
    const Matrix sqrt_rho = es.eigenvectors() * roots.asDiagonal() * es.eigenvectors().adjoint();
    const Matrix y = spin_flip_operator();
    const Matrix flipped = y * herm.conjugate() * y;
    const Matrix r = sqrt_rho * flipped * sqrt_rho;
    Eigen::SelfAdjointEigenSolver<Matrix> rs(0.5 * (r + r.adjoint()), Eigen::EigenvaluesOnly);
    Eigen::VectorXd mu = rs.eigenvalues().cwiseMax(0.0).cwiseSqrt();
    std::sort(mu.data(), mu.data() + mu.size(), std::greater<>());
    return std::clamp(mu(0) - mu(1) - mu(2) - mu(3), 0.0, 1.0);
}

double concurrence(const StateVector& psi) {
    require_two_qubits(psi.layout());
    const Vector& v = psi.amplitudes();
    const double n2 = v.squaredNorm();
    if (n2 == 0.0) throw DegenerateStateError("concurrence: zero state vector");
    const cplx overlap = v.transpose() * spin_flip_operator() * v;
    return std::min(1.0, std::abs(overlap) / n2);
}

StateVector bell_phi_plus() {
    Vector v = Vector::Zero(4);
    const double s = 1.0 / std::sqrt(2.0);
    v(static_cast<Eigen::Index>(two_qubits().index_of({level::g, level::g}))) = s;
    v(static_cast<Eigen::Index>(two_qubits().index_of({level::e, level::e}))) = s;
    return StateVector(two_qubits(), std::move(v), true);
}

namespace {

std::vector<Channel> local_channels(double gamma) {
    const HilbertLayout& l = two_qubits();
    return {{gamma, embed(sigma_minus(), l, 0)},
            {gamma, embed(sigma_plus(), l, 0)},
            {gamma, embed(sigma_minus(), l, 1)},
            {gamma, embed(sigma_plus(), l, 1)}};
}

}  // namespace

LindbladModel local_bath_model(double gamma) {
    if (!(gamma > 0.0)) throw DomainError("local_bath_model: gamma must be positive");
    return LindbladModel{zero_op(two_qubits()), local_channels(gamma)};
}

ChannelSet protection_channels(double gamma, double dt) {
    if (!(gamma > 0.0)) throw DomainError("protection_channels: gamma must be positive");
    const ChannelSet raw = build_jump_channels(local_channels(gamma), dt);
    const Matrix pair = scheme_b::detector_basis(false);
    Matrix u = Matrix::Identity(5, 5);
    u.block(1, 1, 2, 2) = pair;
    u.block(3, 3, 2, 2) = pair;
    return mix_channels(raw, u);
}

std::optional<double> ProtectionResult::master_time_below(double threshold) const {
    for (std::size_t k = 0; k < times.size(); ++k) {
        if (master_concurrence[k] < threshold) return times[k];
    }
    return std::nullopt;
}

ProtectionResult protection_run(const ProtectionOptions& options) {
    if (!(options.gamma > 0.0)) throw DomainError("protection_run: gamma must be positive");
    const ChannelSet cs = protection_channels(options.gamma, options.dt);
    const StateVector psi0 = bell_phi_plus();

    EnsembleOptions ens;
    ens.n_traj = options.n_traj;
    ens.master_seed = options.seed;
    ens.trajectory.t_final = options.t_final;
    ens.trajectory.sample_every = options.sample_every;
    ens.trajectory.keep_outcomes = false;
    ens.trajectory.tracked.push_back(
        {"concurrence", [](const StateVector& psi) { return concurrence(psi); }});
    EnsembleResult traj = ensemble_average(psi0, cs, ens);

    ProtectionResult out;
    out.times = traj.times;
    out.master_states = integrate(local_bath_model(options.gamma), DensityMatrix::from_pure(psi0),
                                  out.times, options.master_step);
    for (const auto& rho : out.master_states) {
        out.master_hygiene.absorb(rho.hygiene());
        out.master_concurrence.push_back(concurrence(rho));
    }
    for (auto& rec : traj.records) {
        for (double c : rec.observables.front().values) {
            out.max_concurrence_deviation = std::max(out.max_concurrence_deviation, std::abs(c - 1.0));
        }
        out.trajectory_concurrence.push_back(std::move(rec.observables.front().values));
    }
    for (std::size_t k = 0; k < out.times.size(); ++k) {
        out.averaged_state_concurrence.push_back(concurrence(traj.average[k]));
        out.ensemble_distance.push_back(trace_distance(traj.average[k], out.master_states[k]));
    }
    out.ensemble_average = std::move(traj.average);
    return out;
}

}  // namespace cqed::entanglement
