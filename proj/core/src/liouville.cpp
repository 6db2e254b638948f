#include "cqed/liouville.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include <Eigen/Eigenvalues>

namespace cqed {

namespace {

double spectral_norm(const Matrix& m) {
    if (m.size() == 0) return 0.0;
    Eigen::SelfAdjointEigenSolver<Matrix> es(m.adjoint() * m, Eigen::EigenvaluesOnly);
    return std::sqrt(std::max(0.0, es.eigenvalues().maxCoeff()));
}

using Triplets = std::vector<Eigen::Triplet<cplx>>;

// Appends scale * (a (x) b) to the triplet list, skipping exact zeros.
void add_kron(Triplets& out, const Matrix& a, const Matrix& b, cplx scale) {
    const Eigen::Index rb = b.rows();
    const Eigen::Index cb = b.cols();
    for (Eigen::Index i = 0; i < a.rows(); ++i) {
        for (Eigen::Index j = 0; j < a.cols(); ++j) {
            const cplx aij = a(i, j);
            if (aij == cplx(0.0)) continue;
            for (Eigen::Index k = 0; k < rb; ++k) {
                for (Eigen::Index l = 0; l < cb; ++l) {
                    const cplx bkl = b(k, l);
                    if (bkl == cplx(0.0)) continue;
                    out.emplace_back(i * rb + k, j * cb + l, scale * aij * bkl);
                }
            }
        }
    }
}

}  // namespace

void LindbladModel::validate() const {
    if (!hamiltonian.is_hermitian(1e-10)) {
        throw ValidationError("LindbladModel: Hamiltonian is not hermitian");
    }
    for (const auto& ch : channels) {
        if (!(ch.rate >= 0.0) || !std::isfinite(ch.rate)) {
            throw ValidationError("LindbladModel: channel '" + ch.op.label() +
                                  "' has invalid rate " + std::to_string(ch.rate));
        }
        if (ch.op.layout() != layout()) {
            throw DimensionError("LindbladModel: channel '" + ch.op.label() +
                                 "' layout differs from the Hamiltonian's");
        }
    }
}

double LindbladModel::generator_scale() const {
    double scale = spectral_norm(hamiltonian.entries());
    for (const auto& ch : channels) {
        const double n = spectral_norm(ch.op.entries());
        scale = std::max(scale, ch.rate * n * n);
    }
    return scale;
}

Matrix dissipator(const OperatorMatrix& c, const DensityMatrix& rho) {
    if (c.layout() != rho.layout()) {
        throw DimensionError("dissipator: layout mismatch");
    }
    const Matrix& cm = c.entries();
    const Matrix& r = rho.entries();
    const Matrix cdc = cm.adjoint() * cm;
    return cm * r * cm.adjoint() - 0.5 * (cdc * r + r * cdc);
}

Matrix lindblad_rhs(const LindbladModel& model, const DensityMatrix& rho) {
    if (model.layout() != rho.layout()) {
        throw DimensionError("lindblad_rhs: layout mismatch");
    }
    const Matrix& h = model.hamiltonian.entries();
    const Matrix& r = rho.entries();
    Matrix out = cplx(0.0, -1.0) * (h * r - r * h);
    for (const auto& ch : model.channels) {
        if (ch.rate == 0.0) continue;
        out += ch.rate * dissipator(ch.op, rho);
    }
    return out;
}

SparseLiouvillian::SparseLiouvillian(const LindbladModel& model)
    : dim_(static_cast<Eigen::Index>(model.layout().total_dim())) {
    // vec(A rho B) = (B^T (x) A) vec(rho) for column-major vec.
    const Eigen::Index d = dim_;
    const Matrix id = Matrix::Identity(d, d);
    const Matrix& h = model.hamiltonian.entries();
    Triplets t;
    add_kron(t, id, h, cplx(0.0, -1.0));
    add_kron(t, h.transpose(), id, cplx(0.0, 1.0));
    for (const auto& ch : model.channels) {
        if (ch.rate == 0.0) continue;
        const Matrix& c = ch.op.entries();
        const Matrix cdc = c.adjoint() * c;
        add_kron(t, c.conjugate(), c, ch.rate);
        add_kron(t, id, cdc, -0.5 * ch.rate);
        add_kron(t, cdc.transpose(), id, -0.5 * ch.rate);
    }
    super_.resize(d * d, d * d);
    super_.setFromTriplets(t.begin(), t.end());
    super_.prune(cplx(0.0));
    super_.makeCompressed();
}

Matrix SparseLiouvillian::apply(const Matrix& rho) const {
    Vector v = Eigen::Map<const Vector>(rho.data(), rho.size());
    Vector out(v.size());
    apply(v, out);
    return Eigen::Map<const Matrix>(out.data(), dim_, dim_);
}

std::vector<DensityMatrix> integrate(const LindbladModel& model, const DensityMatrix& rho0,
                                     const std::vector<double>& t_grid, double step,
                                     const IntegrationOptions& options) {
    model.validate();
    if (model.layout() != rho0.layout()) {
        throw DimensionError("integrate: initial state layout differs from model layout");
    }
    if (!(step > 0.0)) {
        throw StepSizeError("integrate: step must be positive");
    }
    for (std::size_t k = 1; k < t_grid.size(); ++k) {
        if (!(t_grid[k] > t_grid[k - 1])) {
            throw ValidationError("integrate: time grid must be strictly increasing");
        }
    }
    const double scale = model.generator_scale();
    if (scale > 0.0 && step > options.stability_factor / scale * (1.0 + 1e-12)) {
        std::ostringstream os;
        os << "integrate: step " << step << " does not resolve generator scale " << scale
           << " (need step <= " << options.stability_factor / scale << ")";
        throw StepSizeError(os.str());
    }

    const SparseLiouvillian liouvillian(model);
    const Eigen::Index d = liouvillian.dim();
    const cplx trace0 = rho0.entries().trace();

    Vector y = Eigen::Map<const Vector>(rho0.entries().data(), d * d);
    Vector k1(d * d), k2(d * d), k3(d * d), k4(d * d), tmp(d * d);

    std::vector<DensityMatrix> out;
    out.reserve(t_grid.size());
    if (t_grid.empty()) return out;
    out.emplace_back(rho0.layout(), rho0.entries());

    for (std::size_t k = 1; k < t_grid.size(); ++k) {
        const double span = t_grid[k] - t_grid[k - 1];
        const auto n_sub = static_cast<long>(std::ceil(span / step - 1e-9));
        const double h = span / static_cast<double>(std::max(1L, n_sub));
        for (long s = 0; s < std::max(1L, n_sub); ++s) {
            liouvillian.apply(y, k1);
            tmp = y + (0.5 * h) * k1;
            liouvillian.apply(tmp, k2);
            tmp = y + (0.5 * h) * k2;
            liouvillian.apply(tmp, k3);
            tmp = y + h * k3;
            liouvillian.apply(tmp, k4);
            y += (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);

            Eigen::Map<Matrix> rho(y.data(), d, d);
            rho = (0.5 * (rho + rho.adjoint())).eval();
            const double drift = std::abs(rho.trace() - trace0);
            if (!(drift <= options.trace_drift_tol)) {
                std::ostringstream os;
                os << "integrate: trace drift " << drift << " at t = "
                   << t_grid[k - 1] + h * static_cast<double>(s + 1);
                throw IntegrationError(os.str());
            }
        }
        out.emplace_back(rho0.layout(), Eigen::Map<const Matrix>(y.data(), d, d));
    }
    return out;
}

std::vector<double> uniform_grid(double t_final, double spacing) {
    if (!(spacing > 0.0) || !(t_final >= 0.0)) {
        throw ValidationError("uniform_grid: need spacing > 0 and t_final >= 0");
    }
    const auto n = static_cast<std::size_t>(std::llround(t_final / spacing));
    std::vector<double> grid(n + 1);
    for (std::size_t k = 0; k <= n; ++k) grid[k] = spacing * static_cast<double>(k);
    return grid;
}

}  // namespace cqed
