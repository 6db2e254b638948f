#pragma once

#include <complex>
#include <cstddef>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "cqed/errors.hpp"

namespace cqed {

using cplx = std::complex<double>;
using Matrix = Eigen::MatrixXcd;
using Vector = Eigen::VectorXcd;

/// Basis indices of the three-level cascade atom. Two-level (qubit) subsystems
/// use the first two, so |g> = 0 and |e> = 1 there as well.
namespace level {
inline constexpr std::size_t g = 0;
inline constexpr std::size_t e = 1;
inline constexpr std::size_t i = 2;
}  // namespace level

/// Ordered tensor-product structure of a finite Hilbert space.
///
/// Composite indices are row-major over the factor list: the first factor
/// varies slowest, so |x> (x) |y> on [dx, dy] sits at index x*dy + y.
class HilbertLayout {
public:
    explicit HilbertLayout(std::vector<std::size_t> factors);

    static HilbertLayout single(std::size_t dim) { return HilbertLayout({dim}); }

    const std::vector<std::size_t>& factors() const noexcept { return factors_; }
    std::size_t factor(std::size_t k) const { return factors_.at(k); }
    std::size_t num_factors() const noexcept { return factors_.size(); }
    std::size_t total_dim() const noexcept { return total_dim_; }

    /// Layout of the composite A (x) B.
    HilbertLayout concat(const HilbertLayout& other) const;

    /// Flat index of a product basis state, one level per factor.
    std::size_t index_of(const std::vector<std::size_t>& levels) const;

    std::string to_string() const;

    bool operator==(const HilbertLayout&) const = default;

private:
    std::vector<std::size_t> factors_;
    std::size_t total_dim_ = 1;
};

/// Numerical health of a density matrix.
struct Hygiene {
    double trace_error = 0.0;        // |tr rho - 1|
    double hermiticity_error = 0.0;  // max |rho - rho^dagger|
    double min_eigenvalue = 0.0;

    static constexpr double kTraceTol = 1e-9;
    static constexpr double kHermiticityTol = 1e-10;
    static constexpr double kEigenFloor = -1e-8;

    bool ok() const noexcept {
        return trace_error <= kTraceTol && hermiticity_error <= kHermiticityTol &&
               min_eigenvalue >= kEigenFloor;
    }
    /// Worst-case merge, used when checking a whole time series.
    void absorb(const Hygiene& other) noexcept;
};

class StateVector {
public:
    /// When `normalized` is set the norm is checked to 1e-10.
    StateVector(HilbertLayout layout, Vector amplitudes, bool normalized = false);

    /// Product basis state |l0> (x) |l1> (x) ...
    static StateVector basis(const HilbertLayout& layout, const std::vector<std::size_t>& levels);

    const HilbertLayout& layout() const noexcept { return layout_; }
    const Vector& amplitudes() const noexcept { return amplitudes_; }
    bool is_normalized() const noexcept { return normalized_; }
    double norm() const { return amplitudes_.norm(); }

    StateVector normalized() const;

    static constexpr double kNormTol = 1e-10;

private:
    HilbertLayout layout_;
    Vector amplitudes_;
    bool normalized_;
};

class DensityMatrix {
public:
    /// Only the shape is checked here; call validate() for the physical invariants.
    DensityMatrix(HilbertLayout layout, Matrix entries);

    static DensityMatrix from_pure(const StateVector& psi);

    const HilbertLayout& layout() const noexcept { return layout_; }
    const Matrix& entries() const noexcept { return entries_; }
    cplx trace() const { return entries_.trace(); }

    Hygiene hygiene() const;

    /// Throws ValidationError unless hermitian, unit trace and PSD within tolerances.
    void validate() const;

private:
    HilbertLayout layout_;
    Matrix entries_;
};

class OperatorMatrix {
public:
    OperatorMatrix(HilbertLayout layout, Matrix entries, std::string label = {});

    const HilbertLayout& layout() const noexcept { return layout_; }
    const Matrix& entries() const noexcept { return entries_; }
    const std::string& label() const noexcept { return label_; }

    OperatorMatrix adjoint() const;
    bool is_hermitian(double tol = 1e-10) const;

    OperatorMatrix operator*(const OperatorMatrix& rhs) const;
    OperatorMatrix operator+(const OperatorMatrix& rhs) const;
    OperatorMatrix operator-(const OperatorMatrix& rhs) const;
    OperatorMatrix operator*(cplx scale) const;
    StateVector operator*(const StateVector& psi) const;

private:
    HilbertLayout layout_;
    Matrix entries_;
    std::string label_;
};

inline OperatorMatrix operator*(cplx scale, const OperatorMatrix& op) { return op * scale; }

// -- Standard operators -------------------------------------------------------

/// Truncated bosonic lowering operator, <m-1|a|m> = sqrt(m).
OperatorMatrix annihilation_op(std::size_t n_trunc);
OperatorMatrix creation_op(std::size_t n_trunc);
OperatorMatrix number_op(std::size_t n_trunc);
OperatorMatrix identity_op(const HilbertLayout& layout);
OperatorMatrix zero_op(const HilbertLayout& layout);

/// |to><from| on a single `dim`-level system.
OperatorMatrix transition_op(std::size_t dim, std::size_t to, std::size_t from);

// Qubit operators in the (|g>, |e>) basis. sigma_minus = |g><e|.
OperatorMatrix sigma_minus();
OperatorMatrix sigma_plus();
OperatorMatrix sigma_x();
OperatorMatrix sigma_y();
OperatorMatrix sigma_z();

/// I (x) ... (x) op (x) ... (x) I with `op` acting on factor `position`.
OperatorMatrix embed(const OperatorMatrix& op, const HilbertLayout& layout, std::size_t position);

// -- Composition and reduction ------------------------------------------------

OperatorMatrix tensor_product(const OperatorMatrix& a, const OperatorMatrix& b);
StateVector tensor_product(const StateVector& a, const StateVector& b);
DensityMatrix tensor_product(const DensityMatrix& a, const DensityMatrix& b);

/// Reduced state on factor `keep`, all other factors traced out.
DensityMatrix partial_trace(const DensityMatrix& rho, std::size_t keep);

// -- Observables --------------------------------------------------------------

cplx expectation(const DensityMatrix& rho, const OperatorMatrix& op);
cplx expectation(const StateVector& psi, const OperatorMatrix& op);

/// Population of the highest level of factor `position`.
double top_level_population(const DensityMatrix& rho, std::size_t position);

/// 1/2 tr|rho - sigma|, from the eigenvalues of the hermitian difference.
double trace_distance(const DensityMatrix& rho, const DensityMatrix& sigma);
double trace_distance(const Matrix& rho, const Matrix& sigma);

double max_abs(const Matrix& m);
bool is_unitary(const Matrix& u, double tol = 1e-12);

}  // namespace cqed
