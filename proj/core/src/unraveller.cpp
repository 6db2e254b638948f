#include "cqed/unraveller.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <mutex>
#include <random>
#include <sstream>
#include <thread>

namespace cqed {

namespace {

constexpr double kMaxRateStep = 0.05;
constexpr double kDegenerateFloor = 1e-15;
constexpr std::size_t kBlock = 64;

// Stacks all measurement operators so one mat-vec yields every M_k psi.
class Stepper {
public:
    explicit Stepper(const ChannelSet& cs)
        : n_(cs.size()), d_(static_cast<Eigen::Index>(cs.layout().total_dim())),
          stacked_(static_cast<Eigen::Index>(n_) * d_, d_), out_(static_cast<Eigen::Index>(n_) * d_),
          p_(n_) {
        for (std::size_t k = 0; k < n_; ++k) {
            stacked_.middleRows(static_cast<Eigen::Index>(k) * d_, d_) = cs.ops[k].entries();
        }
    }

    std::size_t step(Vector& psi, double draw) {
        out_.noalias() = stacked_ * psi;
        double total = 0.0;
        double largest = 0.0;
        for (std::size_t k = 0; k < n_; ++k) {
            p_[k] = out_.segment(static_cast<Eigen::Index>(k) * d_, d_).squaredNorm();
            total += p_[k];
            largest = std::max(largest, p_[k]);
        }
        if (!(largest >= kDegenerateFloor)) {
            throw DegenerateStateError("trajectory_step: every channel probability is below 1e-15");
        }
        const double target = draw * total;
        double cumulative = 0.0;
        std::size_t chosen = n_;
        for (std::size_t k = 0; k < n_; ++k) {
            if (p_[k] == 0.0) continue;
            cumulative += p_[k];
            chosen = k;
            if (target < cumulative) break;
        }
        psi = out_.segment(static_cast<Eigen::Index>(chosen) * d_, d_) / std::sqrt(p_[chosen]);
        return chosen;
    }

private:
    std::size_t n_;
    Eigen::Index d_;
    Matrix stacked_;
    Vector out_;
    std::vector<double> p_;
};

double uniform01(std::mt19937_64& gen) {
    return static_cast<double>(gen() >> 11) * 0x1.0p-53;
}

void validate_channel_set(const ChannelSet& cs) {
    if (cs.ops.empty()) {
        throw ValidationError("ChannelSet: no measurement operators");
    }
    if (cs.ops.size() > 255) {
        throw ValidationError("ChannelSet: at most 255 channels are supported");
    }
    for (const auto& op : cs.ops) {
        if (op.layout() != cs.ops.front().layout()) {
            throw DimensionError("ChannelSet: operators act on different layouts");
        }
    }
}

}  // namespace

Matrix ChannelSet::completeness() const {
    const auto d = static_cast<Eigen::Index>(layout().total_dim());
    Matrix sum = Matrix::Zero(d, d);
    for (const auto& op : ops) sum += op.entries().adjoint() * op.entries();
    return sum;
}

double ChannelSet::completeness_residual() const {
    const Matrix s = completeness();
    return max_abs(s - Matrix::Identity(s.rows(), s.cols()));
}

ChannelSet build_jump_channels(const std::vector<Channel>& rates, double dt) {
    if (rates.empty()) {
        throw ValidationError("build_jump_channels: at least one channel required");
    }
    if (!(dt > 0.0)) {
        throw StepSizeError("build_jump_channels: dt must be positive");
    }
    double max_rate = 0.0;
    for (const auto& ch : rates) {
        if (!(ch.rate >= 0.0)) {
            throw ValidationError("build_jump_channels: negative rate on '" + ch.op.label() + "'");
        }
        if (ch.op.layout() != rates.front().op.layout()) {
            throw DimensionError("build_jump_channels: channels act on different layouts");
        }
        max_rate = std::max(max_rate, ch.rate);
    }
    if (dt * max_rate > kMaxRateStep) {
        std::ostringstream os;
        os << "build_jump_channels: dt * max rate = " << dt * max_rate << " exceeds " << kMaxRateStep;
        throw StepSizeError(os.str());
    }

    const HilbertLayout& layout = rates.front().op.layout();
    const auto d = static_cast<Eigen::Index>(layout.total_dim());
    ChannelSet cs;
    cs.dt = dt;
    Matrix no_jump = Matrix::Identity(d, d);
    for (const auto& ch : rates) {
        no_jump -= (0.5 * dt * ch.rate) * (ch.op.entries().adjoint() * ch.op.entries());
        cs.source_rates.push_back(ch.rate);
    }
    cs.ops.emplace_back(layout, std::move(no_jump), "J0");
    for (const auto& ch : rates) {
        cs.ops.emplace_back(layout, std::sqrt(ch.rate * dt) * ch.op.entries(), "J[" + ch.op.label() + "]");
    }
    const auto n = static_cast<Eigen::Index>(cs.ops.size());
    cs.mixing = Matrix::Identity(n, n);
    return cs;
}

ChannelSet mix_channels(const ChannelSet& cs, const Matrix& u) {
    validate_channel_set(cs);
    const auto n = static_cast<Eigen::Index>(cs.size());
    if (u.rows() != n || u.cols() != n) {
        throw DimensionError("mix_channels: mixing matrix must be " + std::to_string(n) + "x" +
                             std::to_string(n));
    }
    if (!is_unitary(u, 1e-12)) {
        throw ValidationError("mix_channels: mixing matrix is not unitary to 1e-12");
    }
    const HilbertLayout& layout = cs.layout();
    const auto d = static_cast<Eigen::Index>(layout.total_dim());
    ChannelSet out;
    out.dt = cs.dt;
    out.source_rates = cs.source_rates;
    out.mixing = u * cs.mixing;
    for (Eigen::Index j = 0; j < n; ++j) {
        Matrix m = Matrix::Zero(d, d);
        for (Eigen::Index k = 0; k < n; ++k) {
            if (u(j, k) != cplx(0.0)) m += u(j, k) * cs.ops[static_cast<std::size_t>(k)].entries();
        }
        out.ops.emplace_back(layout, std::move(m), "M" + std::to_string(j));
    }
    return out;
}

Matrix embed_jump_mixing(const Matrix& jump_unitary) {
    const Eigen::Index n = jump_unitary.rows() + 1;
    Matrix u = Matrix::Identity(n, n);
    u.bottomRightCorner(n - 1, n - 1) = jump_unitary;
    return u;
}

Matrix balanced_pair_mixing(double phi) {
    const cplx phase = std::polar(1.0, phi);
    const double s = 1.0 / std::sqrt(2.0);
    Matrix u(2, 2);
    u << s, s * phase, s, -s * phase;
    return u;
}

StepResult trajectory_step(const StateVector& psi, const ChannelSet& cs, double draw) {
    validate_channel_set(cs);
    if (psi.layout() != cs.layout()) {
        throw DimensionError("trajectory_step: state and channels act on different layouts");
    }
    if (std::abs(psi.amplitudes().squaredNorm() - 1.0) > StateVector::kNormTol) {
        throw ValidationError("trajectory_step: state is not normalized");
    }
    if (!(draw >= 0.0 && draw < 1.0)) {
        throw DomainError("trajectory_step: draw must lie in [0, 1)");
    }
    Stepper stepper(cs);
    Vector v = psi.amplitudes();
    const std::size_t k = stepper.step(v, draw);
    return {k, StateVector(psi.layout(), std::move(v), true)};
}

std::uint64_t splitmix64(std::uint64_t x) noexcept {
    x += 0x9E3779B97F4A7C15ULL;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
    return x ^ (x >> 31);
}

std::uint64_t trajectory_seed(std::uint64_t master_seed, std::uint64_t index) noexcept {
    return splitmix64(master_seed ^ splitmix64(index + 1));
}

TrackedQuantity track_expectation(std::string name, const OperatorMatrix& op) {
    return {std::move(name), [op](const StateVector& psi) { return expectation(psi, op).real(); }};
}

std::size_t step_count(double t_final, double dt) {
    if (!(dt > 0.0) || !(t_final >= 0.0)) {
        throw ValidationError("step_count: need dt > 0 and t_final >= 0");
    }
    return static_cast<std::size_t>(std::llround(t_final / dt));
}

TrajectoryRecord run_trajectory(const StateVector& psi0, const ChannelSet& cs,
                                const TrajectoryOptions& options, std::uint64_t seed,
                                const std::function<void(std::size_t, const Vector&)>& on_sample) {
    validate_channel_set(cs);
    if (psi0.layout() != cs.layout()) {
        throw DimensionError("run_trajectory: state and channels act on different layouts");
    }
    if (options.sample_every == 0) {
        throw ValidationError("run_trajectory: sample_every must be >= 1");
    }
    const std::size_t n_steps = step_count(options.t_final, cs.dt);

    TrajectoryRecord rec;
    rec.seed = seed;
    if (options.keep_outcomes) rec.outcomes.reserve(n_steps);
    for (const auto& q : options.tracked) rec.observables.push_back({q.name, {}});

    std::mt19937_64 gen(seed);
    Stepper stepper(cs);
    Vector psi = psi0.amplitudes() / psi0.amplitudes().norm();
    std::size_t sample = 0;

    auto take_sample = [&](std::size_t step) {
        rec.times.push_back(cs.dt * static_cast<double>(step));
        if (!options.tracked.empty()) {
            const StateVector state(psi0.layout(), psi, false);
            for (std::size_t q = 0; q < options.tracked.size(); ++q) {
                rec.observables[q].values.push_back(options.tracked[q].evaluate(state));
            }
        }
        if (on_sample) on_sample(sample, psi);
        ++sample;
    };

    take_sample(0);
    for (std::size_t s = 1; s <= n_steps; ++s) {
        const std::size_t k = stepper.step(psi, uniform01(gen));
        if (options.keep_outcomes) rec.outcomes.push_back(static_cast<std::uint8_t>(k));
        if (s % options.sample_every == 0) take_sample(s);
    }
    return rec;
}

EnsembleResult ensemble_average(const StateVector& psi0, const ChannelSet& cs,
                                const EnsembleOptions& options) {
    if (options.n_traj == 0) {
        throw ValidationError("ensemble_average: n_traj must be >= 1");
    }
    validate_channel_set(cs);
    const std::size_t n_steps = step_count(options.trajectory.t_final, cs.dt);
    const std::size_t every = std::max<std::size_t>(1, options.trajectory.sample_every);
    const std::size_t n_samples = n_steps / every + 1;
    const auto d = static_cast<Eigen::Index>(cs.layout().total_dim());

    const std::size_t n_blocks = (options.n_traj + kBlock - 1) / kBlock;
    std::vector<std::vector<Matrix>> block_sums(n_blocks);
    std::vector<TrajectoryRecord> records(options.keep_records ? options.n_traj : 0);

    std::atomic<std::size_t> next_block{0};
    std::exception_ptr failure;
    std::mutex failure_mutex;

    auto worker = [&]() {
        for (;;) {
            const std::size_t b = next_block.fetch_add(1);
            if (b >= n_blocks) return;
            {
                std::lock_guard lock(failure_mutex);
                if (failure) return;
            }
            std::vector<Matrix> acc(n_samples, Matrix::Zero(d, d));
            const std::size_t first = b * kBlock;
            const std::size_t last = std::min(options.n_traj, first + kBlock);
            try {
                for (std::size_t i = first; i < last; ++i) {
                    auto add = [&](std::size_t sample, const Vector& psi) {
                        acc[sample].noalias() += psi * psi.adjoint();
                    };
                    TrajectoryRecord rec;
                    try {
                        rec = run_trajectory(psi0, cs, options.trajectory,
                                             trajectory_seed(options.master_seed, i), add);
                    } catch (const DegenerateStateError& e) {
                        throw DegenerateStateError("trajectory " + std::to_string(i) + ": " + e.what());
                    } catch (const NumericalError& e) {
                        throw NumericalError("trajectory " + std::to_string(i) + ": " + e.what());
                    }
                    if (options.keep_records) records[i] = std::move(rec);
                }
            } catch (...) {
                std::lock_guard lock(failure_mutex);
                if (!failure) failure = std::current_exception();
                return;
            }
            block_sums[b] = std::move(acc);
        }
    };

    unsigned n_threads = options.threads ? options.threads : std::thread::hardware_concurrency();
    n_threads = std::max(1u, std::min<unsigned>(n_threads, static_cast<unsigned>(n_blocks)));
    if (n_threads == 1) {
        worker();
    } else {
        std::vector<std::jthread> pool;
        for (unsigned t = 0; t < n_threads; ++t) pool.emplace_back(worker);
    }
    if (failure) std::rethrow_exception(failure);

    EnsembleResult result;
    result.times.resize(n_samples);
    for (std::size_t s = 0; s < n_samples; ++s) {
        result.times[s] = cs.dt * static_cast<double>(s * every);
    }
    const double inv_n = 1.0 / static_cast<double>(options.n_traj);
    result.average.reserve(n_samples);
    for (std::size_t s = 0; s < n_samples; ++s) {
        Matrix sum = Matrix::Zero(d, d);
        for (std::size_t b = 0; b < n_blocks; ++b) sum += block_sums[b][s];
        result.average.emplace_back(cs.layout(), sum * inv_n);
    }
    result.records = std::move(records);
    return result;
}

}  // namespace cqed
