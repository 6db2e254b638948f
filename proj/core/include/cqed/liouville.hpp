#pragma once

#include <functional>
#include <vector>

#include <Eigen/SparseCore>

#include "cqed/qstate.hpp"

namespace cqed {

/// One Lindblad channel rate * D[op].
struct Channel {
    double rate = 0.0;
    OperatorMatrix op;
};

/// Generator  -i[H, rho] + sum_k rate_k D[c_k] rho  (hbar = 1, rotating frame).
struct LindbladModel {
    OperatorMatrix hamiltonian;
    std::vector<Channel> channels;

    const HilbertLayout& layout() const noexcept { return hamiltonian.layout(); }

    /// Hermitian H to 1e-10, non-negative rates, consistent layouts.
    void validate() const;

    /// Fastest scale of the generator: max(||H||, max_k rate_k ||c_k||^2).
    double generator_scale() const;
};

/// D[c] rho = c rho c^dag - 1/2 (c^dag c rho + rho c^dag c)
Matrix dissipator(const OperatorMatrix& c, const DensityMatrix& rho);

/// Dense evaluation of the full Lindblad right-hand side.
Matrix lindblad_rhs(const LindbladModel& model, const DensityMatrix& rho);

/// The same generator assembled once as a sparse superoperator acting on the
/// column-major vectorisation of rho. Used by integrate() for speed; its output
/// agrees with lindblad_rhs to rounding.
class SparseLiouvillian {
public:
    explicit SparseLiouvillian(const LindbladModel& model);

    Eigen::Index dim() const noexcept { return dim_; }
    Eigen::Index nonzeros() const noexcept { return super_.nonZeros(); }

    void apply(const Vector& vec_rho, Vector& out) const { out.noalias() = super_ * vec_rho; }
    Matrix apply(const Matrix& rho) const;

private:
    Eigen::Index dim_;
    Eigen::SparseMatrix<cplx, Eigen::RowMajor> super_;
};

struct IntegrationOptions {
    /// Abort with IntegrationError once |tr rho - tr rho0| exceeds this.
    double trace_drift_tol = 1e-6;
    /// Steps above stability_factor / generator_scale() are rejected.
    double stability_factor = 0.1;
};

/// Fixed-step classical RK4 integration of the master equation.
///
/// Each interval of `t_grid` is split into the smallest number of equal
/// substeps no longer than `step`; rho is re-hermitized after every substep.
/// Returns one snapshot per grid point (the first is rho0 itself when
/// t_grid[0] equals the start time, which is always t_grid[0]).
std::vector<DensityMatrix> integrate(const LindbladModel& model, const DensityMatrix& rho0,
                                     const std::vector<double>& t_grid, double step,
                                     const IntegrationOptions& options = {});

/// Evenly spaced grid 0, dt, ..., t_final (inclusive, t_final/dt rounded).
std::vector<double> uniform_grid(double t_final, double spacing);

}  // namespace cqed
