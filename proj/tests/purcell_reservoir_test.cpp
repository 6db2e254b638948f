#include "cqed/purcell_reservoir.hpp"

#include <cmath>

#include <gtest/gtest.h>

#include "test_support.hpp"

using namespace cqed;
using namespace cqed::scheme_b;

namespace {

// Same effective rates as the default tuple (0.1, 0.1) at a much smaller kappa,
// so the full model can be integrated with a coarser step.
SchemeBParams scaled(double kappa) {
    SchemeBParams p;
    p.kappa = kappa;
    p.omega_drive = std::sqrt(0.1);
    p.lambda_ge = std::sqrt(0.1 * kappa / 4.0);
    p.lambda_ie = std::sqrt(p.omega_drive * p.omega_drive * kappa / 0.1);
    p.gamma_nat = 0.0;
    p.Gamma_nat = 0.0;
    return p;
}

double full_step(const SchemeBParams& p) {
    return 0.09 / full_model(p).generator_scale();
}

DensityMatrix atom_level(std::size_t lvl) {
    return DensityMatrix::from_pure(StateVector::basis(HilbertLayout::single(3), {lvl}));
}

}  // namespace

TEST(EffectiveRates, DefaultTuple) {
    const auto r = effective_rates(SchemeBParams{});
    EXPECT_NEAR(r.gamma_minus, 0.1, 1e-15);
    EXPECT_NEAR(r.gamma_plus, 0.1, 1e-15);
    EXPECT_NEAR(r.gamma_ie, 40.0, 1e-12);
}

TEST(EffectiveRates, DetuningAndDrive) {
    SchemeBParams p;
    p.delta_ge = p.kappa / 2.0;
    EXPECT_NEAR(effective_rates(p).gamma_minus, 0.05, 1e-15);
    p.omega_drive = 0.0;
    EXPECT_EQ(effective_rates(p).gamma_plus, 0.0);
    p.kappa = 0.0;
    EXPECT_THROW(effective_rates(p), DomainError);
}

TEST(SchemeBParams, ValidationAndHierarchy) {
    SchemeBParams p;
    EXPECT_NO_THROW(p.validate());
    EXPECT_TRUE(p.hierarchy_warnings().empty());
    p.lambda_ie = 600.0;
    const auto w = p.hierarchy_warnings();
    ASSERT_EQ(w.size(), 1u);
    EXPECT_NE(w[0].find("kappa/lambda_ie"), std::string::npos);
    p = SchemeBParams{};
    p.gamma_nat = -1.0;
    EXPECT_THROW(p.validate(), ValidationError);
    p = SchemeBParams{};
    p.n_trunc_L = 1;
    EXPECT_THROW(p.validate(), DimensionError);
    p = SchemeBParams{};
    p.kappa = 0.0;
    EXPECT_THROW(full_model(p), ValidationError);
}

TEST(FullModel, StructureAndExcitationConservation) {
    SchemeBParams p;
    const auto m = full_model(p);
    EXPECT_EQ(m.layout(), HilbertLayout({3, 3, 3}));
    EXPECT_TRUE(m.hamiltonian.is_hermitian(1e-14));
    ASSERT_EQ(m.channels.size(), 4u);
    EXPECT_EQ(m.channels[2].rate, p.kappa);

    // The drive is the only term that changes the excitation number.
    p.omega_drive = 0.0;
    const Matrix h = full_model(p).hamiltonian.entries();
    const Matrix n = excitation_number(p).entries();
    EXPECT_LE(max_abs(h * n - n * h), 1e-12);
}

TEST(FullModel, ClosedDynamicsConserveExcitations) {
    SchemeBParams p = scaled(100.0);
    p.omega_drive = 0.0;
    auto m = full_model(p);
    for (auto& c : m.channels) c.rate = 0.0;
    const auto layout = full_layout(p);
    const auto rho0 = DensityMatrix::from_pure(StateVector::basis(layout, {level::i, 0, 0}));
    const auto out = integrate(m, rho0, uniform_grid(1.0, 0.1), full_step(p));
    const auto n = excitation_number(p);
    for (const auto& rho : out) EXPECT_NEAR(expectation(rho, n).real(), 2.0, 1e-8);
    EXPECT_LT(partial_trace(out.back(), kAtom).entries()(level::i, level::i).real(), 0.99);
}

TEST(DetectorBasis, PlateInAndOut) {
    EXPECT_EQ(detector_basis(true), Matrix(Matrix::Identity(2, 2)));
    const Matrix out = detector_basis(false);
    EXPECT_TRUE(is_unitary(out));
    EXPECT_NEAR(std::abs(out(0, 0)), 1.0 / std::sqrt(2.0), 1e-15);
}

TEST(QubitChannels, JumpProbabilities) {
    const double dt = 1e-3;
    const auto excited = StateVector::basis(HilbertLayout::single(2), {level::e});
    auto prob = [&](const ChannelSet& cs, std::size_t k) {
        return (cs.ops[k].entries() * excited.amplitudes()).squaredNorm();
    };
    const auto in = qubit_channels(0.2, 0.1, dt, true);
    EXPECT_NEAR(prob(in, 1), 0.2 * dt, 1e-15);
    EXPECT_EQ(prob(in, 2), 0.0);
    const auto out = qubit_channels(0.2, 0.1, dt, false);
    EXPECT_NEAR(prob(out, 1), 0.1 * dt, 1e-15);
    EXPECT_NEAR(prob(out, 2), 0.1 * dt, 1e-15);
    EXPECT_LE(out.completeness_residual(), dt * dt);
}

TEST(EffectiveModel, SteadyPopulation) {
    const auto m = effective_model(0.1, 0.3);
    const auto out = integrate(m, DensityMatrix::from_pure(StateVector::basis(HilbertLayout::single(2), {0})),
                               {0.0, 100.0}, 1e-2);
    EXPECT_NEAR(out.back().entries()(level::e, level::e).real(), 0.75, 1e-9);
    EXPECT_NEAR(std::abs(out.back().entries()(0, 1)), 0.0, 1e-12);
}

TEST(FittedDecayRate, ExactExponential) {
    std::vector<double> t, v;
    for (int k = 0; k < 50; ++k) {
        t.push_back(0.1 * k);
        v.push_back(3.0 * std::exp(-0.37 * t.back()));
    }
    EXPECT_NEAR(fitted_decay_rate(t, v), 0.37, 1e-12);
    EXPECT_NEAR(fitted_decay_rate(t, v, 2.0), 0.37, 1e-12);
    v[3] = 0.0;
    EXPECT_THROW(fitted_decay_rate(t, v), DomainError);
}

TEST(ReducedCompare, UndrivenDecayMatchesPurcellRate) {
    SchemeBParams p = scaled(100.0);
    p.omega_drive = 0.0;
    const auto grid = uniform_grid(3.0, 0.05);
    const auto cmp = reduced_compare(p, atom_level(level::e), grid, full_step(p));
    EXPECT_NEAR(fitted_decay_rate(cmp.times, cmp.excited_population, 0.2), 0.1, 0.005);
    EXPECT_LT(cmp.max_distance, 0.01);
    EXPECT_TRUE(cmp.hygiene.ok());

    p.gamma_nat = 0.01;
    const auto with_width = reduced_compare(p, atom_level(level::e), grid, full_step(p));
    EXPECT_NEAR(fitted_decay_rate(with_width.times, with_width.excited_population, 0.2), 0.11, 0.005);
}

TEST(ReducedCompare, UncoupledAtomIsStatic) {
    SchemeBParams p = scaled(100.0);
    p.lambda_ge = p.omega_drive = 0.0;
    std::mt19937_64 gen(5);
    Matrix q = testkit::random_density(HilbertLayout::single(2), gen).entries();
    Matrix rho = Matrix::Zero(3, 3);
    rho.topLeftCorner(2, 2) = q;
    const auto cmp = reduced_compare(p, DensityMatrix(HilbertLayout::single(3), rho), uniform_grid(0.5, 0.1),
                                     full_step(p));
    EXPECT_LE(cmp.max_distance, 1e-12);
    EXPECT_EQ(cmp.max_i_population, 0.0);
}

TEST(ReducedCompare, DecayErrorShrinksWithKappa) {
    const auto grid = uniform_grid(2.0, 0.1);
    double prev = 1.0;
    for (double kappa : {25.0, 50.0, 100.0}) {
        SchemeBParams p = scaled(kappa);
        p.omega_drive = 0.0;
        const auto cmp = reduced_compare(p, atom_level(level::e), grid, full_step(p));
        EXPECT_LT(cmp.max_distance, prev) << "kappa = " << kappa;
        prev = cmp.max_distance;
    }
}

TEST(ReducedCompare, IntermediateLevelEmptiesWithFasterPurcellDecay) {
    // Steady |i> population ~ gamma_plus / gamma_ie, so it falls as lambda_ie^-4.
    const auto grid = uniform_grid(2.0, 0.1);
    double prev = 1.0;
    for (double lambda_ie : {10.0, 14.0, 20.0}) {
        SchemeBParams p = scaled(100.0);
        p.lambda_ie = lambda_ie;
        const auto cmp = reduced_compare(p, atom_level(level::g), grid, full_step(p));
        EXPECT_LT(cmp.max_i_population, prev) << "lambda_ie = " << lambda_ie;
        prev = cmp.max_i_population;
    }
    EXPECT_LT(prev, 0.005);
}

TEST(ReducedCompare, RejectsNonAtomicState) {
    EXPECT_THROW(reduced_compare(SchemeBParams{}, DensityMatrix::from_pure(
                                                      StateVector::basis(HilbertLayout::single(2), {0})),
                                 {0.0, 1.0}, 1e-5),
                 DimensionError);
}
