#include "cqed/atom_reservoir.hpp"

#include <cmath>
#include <limits>
#include <random>
#include <sstream>

namespace cqed::scheme_a {

namespace {

constexpr double kMaxTheta = 0.1;

std::size_t idx(std::size_t atom_level, std::size_t n, std::size_t n_trunc) {
    return atom_level * n_trunc + n;
}

// exp(-i theta_n sigma_x) on every doublet (|lower, n>, |upper, n-1>), coupling sqrt(n).
Matrix doublet_propagator(std::size_t lower, std::size_t upper, double theta, std::size_t n_trunc) {
    const auto dim = static_cast<Eigen::Index>(3 * n_trunc);
    Matrix u = Matrix::Identity(dim, dim);
    for (std::size_t n = 1; n < n_trunc; ++n) {
        const double angle = theta * std::sqrt(static_cast<double>(n));
        const auto a = static_cast<Eigen::Index>(idx(lower, n, n_trunc));
        const auto b = static_cast<Eigen::Index>(idx(upper, n - 1, n_trunc));
        const double c = std::cos(angle);
        const cplx s(0.0, -std::sin(angle));
        u(a, a) = c;
        u(b, b) = c;
        u(a, b) = s;
        u(b, a) = s;
    }
    return u;
}

void check_top_population(const Matrix& rho, std::size_t n_trunc, std::size_t atom) {
    const double top = rho(static_cast<Eigen::Index>(n_trunc - 1),
                           static_cast<Eigen::Index>(n_trunc - 1)).real();
    if (top > kTopPopulationLimit) {
        std::ostringstream os;
        os << "scheme A: population " << top << " in top Fock level " << n_trunc - 1
           << " after atom " << atom << " (limit " << kTopPopulationLimit
           << "); increase n_trunc";
        throw TruncationError(os.str());
    }
}

}  // namespace

void SchemeAParams::validate() const {
    validate_physical();
    if (theta1() > kMaxTheta) {
        throw ValidationError("scheme_a: lambda1*dt1 exceeds the short-interaction limit 0.1");
    }
    if (theta2() > kMaxTheta) {
        throw ValidationError("scheme_a: lambda2*dt2 exceeds the short-interaction limit 0.1");
    }
}

void SchemeAParams::validate_physical() const {
    auto bad = [](const std::string& what) { throw ValidationError("scheme_a: " + what); };
    if (!(lambda1 >= 0.0) || !(lambda2 >= 0.0)) bad("couplings must be non-negative");
    if (!(dt1 >= 0.0) || !(dt2 >= 0.0)) bad("stage durations must be non-negative");
    if (!(r > 0.0)) bad("atom rate r must be positive");
    if (n_trunc < 2) throw DimensionError("scheme_a: n_trunc must be >= 2");
    if (r_e || r_g || n_bar) {
        if (!(r_e && r_g && n_bar)) bad("two-level variant needs r_e, r_g and n_bar together");
        if (!(*r_g > 0.0) || !(*r_e >= 0.0)) bad("fluxes must satisfy r_g > 0, r_e >= 0");
        const double want = thermal_flux_ratio(*n_bar);
        if (std::abs(*r_e / *r_g - want) > 1e-9 * std::max(1.0, want)) {
            std::ostringstream os;
            os << "r_e/r_g = " << *r_e / *r_g << " but n_bar/(1+n_bar) = " << want;
            bad(os.str());
        }
    }
}

double thermal_flux_ratio(double n_bar) {
    if (!(n_bar >= 0.0)) {
        throw DomainError("thermal_flux_ratio: n_bar must be non-negative");
    }
    return n_bar / (1.0 + n_bar);
}

std::pair<double, double> thermal_fluxes(double n_bar, double r_total) {
    if (!(r_total > 0.0)) throw DomainError("thermal_fluxes: total flux must be positive");
    const double ratio = thermal_flux_ratio(n_bar);
    const double r_g = r_total / (1.0 + ratio);
    return {r_total - r_g, r_g};
}

StagePropagators stage_propagators(const SchemeAParams& p) {
    p.validate_physical();
    const HilbertLayout layout({3, p.n_trunc});
    return {
        OperatorMatrix(layout, doublet_propagator(level::g, level::e, p.theta1(), p.n_trunc), "U1"),
        OperatorMatrix(layout, doublet_propagator(level::e, level::i, p.theta2(), p.n_trunc), "U2"),
    };
}

Matrix pi_half_gi_rotation(double phase) {
    const double s = 1.0 / std::sqrt(2.0);
    Matrix r = Matrix::Zero(3, 3);
    r(level::e, level::e) = 1.0;
    r(level::g, level::g) = s;
    r(level::i, level::i) = s;
    r(level::g, level::i) = cplx(0.0, -s) * std::polar(1.0, -phase);
    r(level::i, level::g) = cplx(0.0, -s) * std::polar(1.0, phase);
    return r;
}

std::vector<OperatorMatrix> detection_kraus(const SchemeAParams& p, const Matrix& rotation) {
    if (rotation.rows() != 3 || rotation.cols() != 3) {
        throw DimensionError("detection_kraus: rotation must be 3x3");
    }
    if (!is_unitary(rotation, 1e-12)) {
        throw ValidationError("detection_kraus: rotation is not unitary to 1e-12");
    }
    p.validate();
    const auto [u1, u2] = stage_propagators(p);
    const std::size_t n = p.n_trunc;
    const auto nn = static_cast<Eigen::Index>(n);
    const Matrix w = u2.entries() * u1.entries();
    // Columns of w that start from |e, k>; rows grouped by atomic level.
    const Matrix from_e = w.middleCols(static_cast<Eigen::Index>(level::e) * nn, nn);

    const HilbertLayout field = HilbertLayout::single(n);
    const char* names[3] = {"K_g", "K_e", "K_i"};
    std::vector<OperatorMatrix> kraus;
    for (std::size_t m = 0; m < 3; ++m) {
        Matrix k = Matrix::Zero(nn, nn);
        for (std::size_t l = 0; l < 3; ++l) {
            const cplx r_ml = rotation(static_cast<Eigen::Index>(m), static_cast<Eigen::Index>(l));
            if (r_ml == cplx(0.0)) continue;
            k += r_ml * from_e.middleRows(static_cast<Eigen::Index>(l) * nn, nn);
        }
        kraus.emplace_back(field, std::move(k), names[m]);
    }
    return kraus;
}

double EngineeredRates::steady_occupation() const {
    if (gamma_plus >= gamma_minus) return std::numeric_limits<double>::infinity();
    return gamma_plus / (gamma_minus - gamma_plus);
}

EngineeredRates engineered_rates(const SchemeAParams& p) {
    return {p.r * p.theta1() * p.theta1(), p.r * p.theta2() * p.theta2()};
}

LindbladModel thermal_field_model(double gamma_minus, double gamma_plus, std::size_t n_trunc) {
    const HilbertLayout layout = HilbertLayout::single(n_trunc);
    return LindbladModel{zero_op(layout),
                         {{gamma_minus, annihilation_op(n_trunc)}, {gamma_plus, creation_op(n_trunc)}}};
}

ChannelSet detection_channels(const SchemeAParams& p, const Matrix& rotation) {
    const auto kraus = detection_kraus(p, rotation);
    const auto rates = engineered_rates(p);
    ChannelSet cs;
    cs.dt = 1.0 / p.r;
    cs.ops = {kraus[level::e], kraus[level::g], kraus[level::i]};
    cs.source_rates = {rates.gamma_plus, rates.gamma_minus};
    // Channel order (e, g, i) = (J0, J+, J-); express R in that order.
    const std::size_t order[3] = {level::e, level::g, level::i};
    cs.mixing = Matrix(3, 3);
    for (Eigen::Index a = 0; a < 3; ++a) {
        for (Eigen::Index b = 0; b < 3; ++b) {
            cs.mixing(a, b) = rotation(static_cast<Eigen::Index>(order[a]),
                                       static_cast<Eigen::Index>(order[b]));
        }
    }
    return cs;
}

Matrix apply_traced_map(const std::vector<OperatorMatrix>& kraus, const Matrix& rho) {
    Matrix out = Matrix::Zero(rho.rows(), rho.cols());
    for (const auto& k : kraus) out.noalias() += k.entries() * rho * k.entries().adjoint();
    return out;
}

Matrix generator_residual(const SchemeAParams& p, const Matrix& rotation, const Matrix& rho) {
    const auto kraus = detection_kraus(p, rotation);
    const auto rates = engineered_rates(p);
    const LindbladModel model = thermal_field_model(rates.gamma_minus, rates.gamma_plus, p.n_trunc);
    const DensityMatrix state(HilbertLayout::single(p.n_trunc), rho);
    return apply_traced_map(kraus, rho) - rho - lindblad_rhs(model, state) / p.r;
}

double generator_residual_on_units(const SchemeAParams& p, std::size_t n_max) {
    const auto kraus = detection_kraus(p, Matrix::Identity(3, 3));
    const auto rates = engineered_rates(p);
    const LindbladModel model = thermal_field_model(rates.gamma_minus, rates.gamma_plus, p.n_trunc);
    const auto n = static_cast<Eigen::Index>(p.n_trunc);
    const std::size_t limit = std::min(n_max, p.n_trunc);
    double worst = 0.0;
    for (std::size_t j = 0; j < limit; ++j) {
        for (std::size_t k = 0; k < limit; ++k) {
            Matrix unit = Matrix::Zero(n, n);
            unit(static_cast<Eigen::Index>(j), static_cast<Eigen::Index>(k)) = 1.0;
            const DensityMatrix state(HilbertLayout::single(p.n_trunc), unit);
            const Matrix diff = apply_traced_map(kraus, unit) - unit - lindblad_rhs(model, state) / p.r;
            worst = std::max(worst, max_abs(diff));
        }
    }
    return worst;
}

TracedRun run_traced(const SchemeAParams& p, const Matrix& rotation, const DensityMatrix& rho0,
                     std::size_t n_atoms, std::size_t sample_every) {
    if (rho0.layout() != HilbertLayout::single(p.n_trunc)) {
        throw DimensionError("run_traced: initial field state must live on [" +
                             std::to_string(p.n_trunc) + "]");
    }
    if (sample_every == 0) throw ValidationError("run_traced: sample_every must be >= 1");
    const auto kraus = detection_kraus(p, rotation);

    TracedRun run;
    Matrix rho = rho0.entries();
    auto sample = [&](std::size_t atom) {
        run.times.push_back(static_cast<double>(atom) / p.r);
        run.states.emplace_back(rho0.layout(), rho);
    };
    sample(0);
    run.max_top_population = rho(rho.rows() - 1, rho.cols() - 1).real();
    for (std::size_t atom = 1; atom <= n_atoms; ++atom) {
        rho = apply_traced_map(kraus, rho);
        rho = (0.5 * (rho + rho.adjoint())).eval();
        check_top_population(rho, p.n_trunc, atom);
        run.max_top_population = std::max(run.max_top_population, rho(rho.rows() - 1, rho.cols() - 1).real());
        if (atom % sample_every == 0) sample(atom);
    }
    return run;
}

TrajectoryRecord run_monitored(const SchemeAParams& p, const Matrix& rotation,
                               const StateVector& psi0, std::size_t n_atoms, std::uint64_t seed,
                               std::size_t sample_every) {
    const ChannelSet cs = detection_channels(p, rotation);
    const std::size_t n = p.n_trunc;
    TrajectoryOptions options;
    options.t_final = static_cast<double>(n_atoms) / p.r;
    options.sample_every = sample_every;
    options.tracked.push_back(track_expectation("n_mean", number_op(n)));
    auto guard = [n](std::size_t sample, const Vector& psi) {
        const double top = std::norm(psi(static_cast<Eigen::Index>(n - 1)));
        if (top > kTopPopulationLimit) {
            std::ostringstream os;
            os << "scheme A (monitored): population " << top << " in top Fock level at sample "
               << sample << "; increase n_trunc";
            throw TruncationError(os.str());
        }
    };
    return run_trajectory(psi0, cs, options, seed, guard);
}

QuadratureFit fit_quadrature(const OperatorMatrix& k) {
    const std::size_t n = k.layout().total_dim();
    const Matrix a = annihilation_op(n).entries();
    const Matrix ad = a.adjoint();
    const Matrix& km = k.entries();
    // a and a^dag have disjoint support, so the projections decouple.
    const cplx alpha = (a.conjugate().cwiseProduct(km)).sum() / a.squaredNorm();
    const cplx beta = (ad.conjugate().cwiseProduct(km)).sum() / ad.squaredNorm();
    if (std::abs(alpha) == 0.0) {
        throw DegenerateStateError("fit_quadrature: operator has no a component");
    }
    QuadratureFit fit;
    const cplx ratio = beta / alpha;
    fit.phase = std::arg(ratio);
    fit.modulus_ratio = std::abs(ratio);
    const Matrix shape = a + std::polar(1.0, fit.phase) * ad;
    fit.scale = (shape.conjugate().cwiseProduct(km)).sum() / shape.squaredNorm();
    fit.residual = max_abs(km - fit.scale * shape);
    return fit;
}

}  // namespace cqed::scheme_a
