#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "cqed/liouville.hpp"
#include "cqed/qstate.hpp"
#include "cqed/unraveller.hpp"

namespace cqed::scheme_a {

/// Engineered thermal bath for a cavity mode built from a beam of three-level
/// cascade atoms (g, e, i). Each atom enters in |e>, is resonant with the
/// e-g transition for dt1 and then with the i-e transition for dt2, and is
/// finally detected, possibly after a rotation R of its levels.
struct SchemeAParams {
    double lambda1 = 0.0;  // g-e stage coupling
    double lambda2 = 0.0;  // e-i stage coupling
    double dt1 = 0.0;
    double dt2 = 0.0;
    double r = 1.0;  // atoms per unit time, one atom per bin of length 1/r
    std::size_t n_trunc = 12;

    // Two-level variant: atoms injected in e or g with fluxes r_e, r_g.
    std::optional<double> r_e;
    std::optional<double> r_g;
    std::optional<double> n_bar;

    double theta1() const noexcept { return lambda1 * dt1; }
    double theta2() const noexcept { return lambda2 * dt2; }

    /// Non-negative couplings and durations, r > 0, truncation >= 2 and, when
    /// configured, r_e/r_g = n_bar/(1+n_bar).
    void validate_physical() const;

    /// validate_physical() plus the short-interaction regime lambda*dt <= 0.1 per stage.
    void validate() const;
};

/// r_e / r_g = n_bar / (1 + n_bar) for a bath of mean occupation n_bar.
double thermal_flux_ratio(double n_bar);

/// Split a total flux into (r_e, r_g) that realise `n_bar`.
std::pair<double, double> thermal_fluxes(double n_bar, double r_total);

struct StagePropagators {
    OperatorMatrix u1;  // exp(-i H1 dt1), H1 = lambda1 (|e><g| a + |g><e| a^dag)
    OperatorMatrix u2;  // exp(-i H2 dt2), H2 = lambda2 (|i><e| a + |e><i| a^dag)
};

/// Exact propagators on atom (x) field, assembled from the 2x2 rotations of
/// each Jaynes-Cummings doublet. Valid for any interaction angle, so only
/// validate_physical() is applied.
StagePropagators stage_propagators(const SchemeAParams& p);

/// Atomic rotation by pi/2 between |g> and |i>:
/// exp(-i pi/4 (e^{-i phase}|g><i| + e^{i phase}|i><g|)), |e> untouched.
Matrix pi_half_gi_rotation(double phase = 0.0);

/// K_m = <m| R U2 U1 |e> as field operators, m in (g, e, i) order.
std::vector<OperatorMatrix> detection_kraus(const SchemeAParams& p, const Matrix& rotation);

struct EngineeredRates {
    double gamma_plus = 0.0;   // r (lambda1 dt1)^2
    double gamma_minus = 0.0;  // r (lambda2 dt2)^2

    /// gamma_plus / (gamma_minus - gamma_plus); infinite when gamma_plus >= gamma_minus.
    double steady_occupation() const;
};

EngineeredRates engineered_rates(const SchemeAParams& p);

/// Field master equation gamma_minus D[a] + gamma_plus D[a^dag].
LindbladModel thermal_field_model(double gamma_minus, double gamma_plus, std::size_t n_trunc);

/// The detection Kraus set as a ChannelSet ordered (K_e, K_g, K_i) so that
/// index 0 is the no-jump outcome, with dt = 1/r.
ChannelSet detection_channels(const SchemeAParams& p, const Matrix& rotation);

/// rho -> sum_m K_m rho K_m^dag (one atom, outcome ignored).
Matrix apply_traced_map(const std::vector<OperatorMatrix>& kraus, const Matrix& rho);

/// Phi(rho) - rho - L(rho)/r: how far one atom's map departs from a 1/r step
/// of the engineered master equation.
Matrix generator_residual(const SchemeAParams& p, const Matrix& rotation, const Matrix& rho);

/// Largest generator_residual over the matrix units |j><k|, j,k < n_max.
double generator_residual_on_units(const SchemeAParams& p, std::size_t n_max);

struct TracedRun {
    std::vector<double> times;
    std::vector<DensityMatrix> states;
    double max_top_population = 0.0;
};

/// Atoms traced out: applies the channel map once per atom. Samples every
/// `sample_every` atoms (plus the initial state). Throws TruncationError once
/// the top Fock level holds more than 1e-4.
TracedRun run_traced(const SchemeAParams& p, const Matrix& rotation, const DensityMatrix& rho0,
                     std::size_t n_atoms, std::size_t sample_every = 1);

/// Atoms detected: one sampled Kraus outcome per atom, channel order (e, g, i).
TrajectoryRecord run_monitored(const SchemeAParams& p, const Matrix& rotation,
                               const StateVector& psi0, std::size_t n_atoms, std::uint64_t seed,
                               std::size_t sample_every = 1);

/// Least-squares fit K ~ alpha a + beta a^dag on a truncated mode.
struct QuadratureFit {
    double phase = 0.0;           // arg(beta / alpha)
    double modulus_ratio = 0.0;   // |beta / alpha|
    cplx scale = 0.0;             // best c in K ~ c (a + e^{i phase} a^dag)
    double residual = 0.0;        // max |K - c (a + e^{i phase} a^dag)|
};

QuadratureFit fit_quadrature(const OperatorMatrix& k);

inline constexpr double kTopPopulationLimit = 1e-4;

}  // namespace cqed::scheme_a
