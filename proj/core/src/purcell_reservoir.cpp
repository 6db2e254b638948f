#include "cqed/purcell_reservoir.hpp"

#include <cmath>
#include <sstream>

namespace cqed::scheme_b {

namespace {

OperatorMatrix atom_op(const HilbertLayout& layout, std::size_t to, std::size_t from) {
    return embed(transition_op(3, to, from), layout, kAtom);
}

}  // namespace

void SchemeBParams::validate() const {
    auto bad = [](const std::string& what) { throw ValidationError("scheme_b: " + what); };
    if (!(kappa > 0.0)) bad("kappa must be positive");
    if (!(lambda_ge >= 0.0) || !(lambda_ie >= 0.0)) bad("couplings must be non-negative");
    if (!(omega_drive >= 0.0)) bad("omega_drive must be non-negative");
    if (!(gamma_nat >= 0.0) || !(Gamma_nat >= 0.0)) bad("natural linewidths must be non-negative");
    if (!std::isfinite(delta_ge)) bad("delta_ge must be finite");
    if (n_trunc_R < 2 || n_trunc_L < 2) throw DimensionError("scheme_b: mode truncations must be >= 2");
}

std::vector<std::string> SchemeBParams::hierarchy_warnings() const {
    std::vector<std::string> out;
    auto need = [&](double ratio, double min, const char* what) {
        if (!(ratio >= min)) {
            std::ostringstream os;
            os << what << " = " << ratio << " < " << min;
            out.push_back(os.str());
        }
    };
    need(kappa / lambda_ie, 5.0, "kappa/lambda_ie");
    need(lambda_ie / lambda_ge, 2.0, "lambda_ie/lambda_ge");
    need(lambda_ge / omega_drive, 2.0, "lambda_ge/omega_drive");
    const double nat = std::max(gamma_nat, Gamma_nat);
    if (nat > 0.0) need(omega_drive / nat, 10.0, "omega_drive/max(gamma, Gamma)");
    return out;
}

HilbertLayout full_layout(const SchemeBParams& p) {
    return HilbertLayout({3, p.n_trunc_R, p.n_trunc_L});
}

LindbladModel full_model(const SchemeBParams& p) {
    p.validate();
    const HilbertLayout layout = full_layout(p);
    const OperatorMatrix a_r = embed(annihilation_op(p.n_trunc_R), layout, kModeR);
    const OperatorMatrix a_l = embed(annihilation_op(p.n_trunc_L), layout, kModeL);
    const OperatorMatrix s_eg_up = atom_op(layout, level::e, level::g);
    const OperatorMatrix s_ie_up = atom_op(layout, level::i, level::e);
    const OperatorMatrix s_ig_up = atom_op(layout, level::i, level::g);
    const cplx im(0.0, 1.0);

    const OperatorMatrix coupling_ge = a_l * s_eg_up;
    const OperatorMatrix coupling_ie = a_r * s_ie_up;
    Matrix h = im * p.lambda_ge * (coupling_ge.entries() - coupling_ge.entries().adjoint()) +
               im * p.lambda_ie * (coupling_ie.entries() - coupling_ie.entries().adjoint()) +
               im * p.omega_drive * (s_ig_up.entries() - s_ig_up.entries().adjoint()) -
               p.delta_ge * (a_l.entries().adjoint() * a_l.entries());
    // Exact hermiticity for the sparse superoperator.
    h = (0.5 * (h + h.adjoint())).eval();

    LindbladModel model{OperatorMatrix(layout, std::move(h), "H_full"), {}};
    model.channels.push_back({p.gamma_nat, atom_op(layout, level::g, level::e)});
    model.channels.push_back({p.Gamma_nat, atom_op(layout, level::e, level::i)});
    model.channels.push_back({p.kappa, a_r});
    model.channels.push_back({p.kappa, a_l});
    return model;
}

OperatorMatrix excitation_number(const SchemeBParams& p) {
    const HilbertLayout layout = full_layout(p);
    return atom_op(layout, level::e, level::e) + atom_op(layout, level::i, level::i) * 2.0 +
           embed(number_op(p.n_trunc_R), layout, kModeR) + embed(number_op(p.n_trunc_L), layout, kModeL);
}

EffectiveRates effective_rates(const SchemeBParams& p) {
    if (!(p.kappa > 0.0)) throw DomainError("effective_rates: kappa must be positive");
    if (!(p.lambda_ie > 0.0)) throw DomainError("effective_rates: lambda_ie must be positive");
    EffectiveRates r;
    const double detuning = 2.0 * p.delta_ge / p.kappa;
    r.gamma_minus = 4.0 * p.lambda_ge * p.lambda_ge / (p.kappa * (1.0 + detuning * detuning));
    r.gamma_ie = 4.0 * p.lambda_ie * p.lambda_ie / p.kappa;
    r.gamma_plus = p.omega_drive * p.omega_drive * p.kappa / (p.lambda_ie * p.lambda_ie);
    return r;
}

LindbladModel effective_model(double gamma_minus, double gamma_plus) {
    const HilbertLayout qubit = HilbertLayout::single(2);
    return LindbladModel{zero_op(qubit), {{gamma_minus, sigma_minus()}, {gamma_plus, sigma_plus()}}};
}

LindbladModel effective_model(const SchemeBParams& p) {
    const EffectiveRates r = effective_rates(p);
    return effective_model(r.gamma_minus, r.gamma_plus);
}

Matrix detector_basis(bool plate_in) {
    return plate_in ? Matrix(Matrix::Identity(2, 2)) : balanced_pair_mixing(0.0);
}

ChannelSet qubit_channels(double gamma_minus, double gamma_plus, double dt, bool plate_in) {
    const ChannelSet raw = build_jump_channels({{gamma_minus, sigma_minus()}, {gamma_plus, sigma_plus()}}, dt);
    return plate_in ? raw : mix_channels(raw, embed_jump_mixing(detector_basis(false)));
}

ReducedComparison reduced_compare(const SchemeBParams& p, const DensityMatrix& rho0_atom,
                                  const std::vector<double>& t_grid, double full_step) {
    if (rho0_atom.layout() != HilbertLayout::single(3)) {
        throw DimensionError("reduced_compare: initial atomic state must be 3x3");
    }
    const LindbladModel full = full_model(p);
    const auto vac = [](std::size_t n) {
        return DensityMatrix::from_pure(StateVector::basis(HilbertLayout::single(n), {0}));
    };
    const DensityMatrix rho0 = tensor_product(tensor_product(rho0_atom, vac(p.n_trunc_R)), vac(p.n_trunc_L));
    const auto full_states = integrate(full, rho0, t_grid, full_step);

    const Matrix qubit0 = rho0_atom.entries().topLeftCorner(2, 2);
    const LindbladModel eff = effective_model(p);
    const EffectiveRates rates = effective_rates(p);
    const double eff_scale = std::max(rates.gamma_minus, rates.gamma_plus);
    double eff_step = full_step;
    if (eff_scale > 0.0) eff_step = std::max(full_step, std::min(1e-2, 0.05 / eff_scale));
    const auto eff_states = integrate(eff, DensityMatrix(HilbertLayout::single(2), qubit0), t_grid, eff_step);

    ReducedComparison cmp;
    cmp.times = t_grid;
    for (std::size_t k = 0; k < t_grid.size(); ++k) {
        const DensityMatrix& rho = full_states[k];
        cmp.hygiene.absorb(rho.hygiene());
        const double top = std::max(top_level_population(rho, kModeR), top_level_population(rho, kModeL));
        if (top > kTopPopulationLimit) {
            std::ostringstream os;
            os << "reduced_compare: top Fock population " << top << " at t = " << t_grid[k]
               << "; increase n_trunc_R / n_trunc_L";
            throw TruncationError(os.str());
        }
        cmp.max_top_population = std::max(cmp.max_top_population, top);

        const DensityMatrix atom = partial_trace(rho, kAtom);
        Matrix block = atom.entries().topLeftCorner(2, 2);
        const double d = trace_distance(block, eff_states[k].entries());
        const double pi = atom.entries()(level::i, level::i).real();
        cmp.full_qubit.push_back(block);
        cmp.effective.push_back(eff_states[k]);
        cmp.distance.push_back(d);
        cmp.excited_population.push_back(atom.entries()(level::e, level::e).real());
        cmp.i_population.push_back(pi);
        cmp.max_distance = std::max(cmp.max_distance, d);
        cmp.max_i_population = std::max(cmp.max_i_population, pi);
    }
    return cmp;
}

double fitted_decay_rate(const std::vector<double>& times, const std::vector<double>& values,
                         double t_min) {
    if (times.size() != values.size()) {
        throw DimensionError("fitted_decay_rate: series lengths differ");
    }
    double sx = 0.0, sy = 0.0, sxx = 0.0, sxy = 0.0;
    std::size_t n = 0;
    for (std::size_t k = 0; k < times.size(); ++k) {
        if (times[k] < t_min) continue;
        if (!(values[k] > 0.0)) {
            throw DomainError("fitted_decay_rate: non-positive value in fit window");
        }
        const double x = times[k];
        const double y = std::log(values[k]);
        sx += x;
        sy += y;
        sxx += x * x;
        sxy += x * y;
        ++n;
    }
    if (n < 2) throw DomainError("fitted_decay_rate: need at least two samples");
    const double nn = static_cast<double>(n);
    const double slope = (nn * sxy - sx * sy) / (nn * sxx - sx * sx);
    return -slope;
}

}  // namespace cqed::scheme_b
