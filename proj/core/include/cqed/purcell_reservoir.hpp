#pragma once

#include <string>
#include <vector>

#include "cqed/liouville.hpp"
#include "cqed/qstate.hpp"
#include "cqed/unraveller.hpp"

namespace cqed::scheme_b {

/// A stationary three-level atom inside a very lossy two-mode cavity. The i-e
/// transition emits into the right-polarised mode, e-g into the left one, and a
/// classical field drives g-i. All models are built in the rotating frame;
/// the frame frequencies are kept for bookkeeping only.
struct SchemeBParams {
    double kappa = 1000.0;
    double lambda_ge = 5.0;
    double lambda_ie = 100.0;
    double omega_drive = 1.0;
    double gamma_nat = 0.01;  // natural e-g linewidth
    double Gamma_nat = 0.01;  // natural i-e linewidth
    double delta_ge = 0.0;    // omega_e - omega_L
    std::size_t n_trunc_R = 3;
    std::size_t n_trunc_L = 3;

    double omega_e = 0.0;
    double omega_i = 0.0;
    double omega_R = 0.0;
    double omega_L = 0.0;

    /// Rejects non-physical values (negative rates, truncation < 2).
    void validate() const;

    /// Human readable violations of kappa >> lambda_ie > lambda_ge > Omega >> gamma, Gamma,
    /// read as ratios (5, 2, 2, 10). Empty when the hierarchy holds.
    std::vector<std::string> hierarchy_warnings() const;
};

/// Layout positions inside atom (x) mode_R (x) mode_L.
inline constexpr std::size_t kAtom = 0;
inline constexpr std::size_t kModeR = 1;
inline constexpr std::size_t kModeL = 2;

HilbertLayout full_layout(const SchemeBParams& p);

/// Full atom + two-mode model with channels gamma D[s_eg], Gamma D[s_ie],
/// kappa D[a_R], kappa D[a_L].
LindbladModel full_model(const SchemeBParams& p);

/// sigma_ee + 2 sigma_ii + a_R^dag a_R + a_L^dag a_L on the full layout.
OperatorMatrix excitation_number(const SchemeBParams& p);

struct EffectiveRates {
    double gamma_minus = 0.0;  // 4 lambda_ge^2 / (kappa (1 + 4 delta^2/kappa^2))
    double gamma_plus = 0.0;   // Omega^2 kappa / lambda_ie^2
    double gamma_ie = 0.0;     // 4 lambda_ie^2 / kappa
};

EffectiveRates effective_rates(const SchemeBParams& p);

/// gamma_minus D[sigma_-] + gamma_plus D[sigma_+] on the (g, e) qubit.
LindbladModel effective_model(const SchemeBParams& p);
LindbladModel effective_model(double gamma_minus, double gamma_plus);

/// Mixing of the two jump channels (sigma_-, sigma_+) produced by the detection
/// optics: identity with the quarter-wave plate, balanced (sigma_x / sigma_- - sigma_+)
/// mixing without it.
Matrix detector_basis(bool plate_in);

/// Monitored effective qubit: channels (J0, sigma_-, sigma_+) mixed by detector_basis.
ChannelSet qubit_channels(double gamma_minus, double gamma_plus, double dt, bool plate_in);

struct ReducedComparison {
    std::vector<double> times;
    std::vector<Matrix> full_qubit;          // (g, e) block of the reduced atomic state
    std::vector<DensityMatrix> effective;
    std::vector<double> distance;
    std::vector<double> excited_population;  // full model
    std::vector<double> i_population;
    double max_distance = 0.0;
    double max_i_population = 0.0;
    double max_top_population = 0.0;  // over both modes
    Hygiene hygiene;                   // worst over full-model snapshots
};

/// Integrates the full model from rho0_atom (x) |0><0| (x) |0><0| and the
/// effective model from the (g, e) block of rho0_atom, and compares them on
/// `t_grid`. The |i> population is reported separately, not folded into the
/// distance. Throws TruncationError if a mode's top level exceeds 1e-4.
ReducedComparison reduced_compare(const SchemeBParams& p, const DensityMatrix& rho0_atom,
                                  const std::vector<double>& t_grid, double full_step);

/// Slope of -log(values) against time by least squares over samples with t >= t_min.
double fitted_decay_rate(const std::vector<double>& times, const std::vector<double>& values,
                         double t_min = 0.0);

inline constexpr double kTopPopulationLimit = 1e-4;

}  // namespace cqed::scheme_b
