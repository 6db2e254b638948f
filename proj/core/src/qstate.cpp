#include "cqed/qstate.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include <Eigen/Eigenvalues>

namespace cqed {

namespace {

void require_same_layout(const HilbertLayout& a, const HilbertLayout& b, const char* what) {
    if (a != b) {
        throw DimensionError(std::string(what) + ": layout mismatch " + a.to_string() + " vs " +
                             b.to_string());
    }
}

Matrix kron(const Matrix& a, const Matrix& b) {
    Matrix out(a.rows() * b.rows(), a.cols() * b.cols());
    for (Eigen::Index i = 0; i < a.rows(); ++i) {
        for (Eigen::Index j = 0; j < a.cols(); ++j) {
            out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
        }
    }
    return out;
}

}  // namespace

// -- HilbertLayout ------------------------------------------------------------

HilbertLayout::HilbertLayout(std::vector<std::size_t> factors) : factors_(std::move(factors)) {
    if (factors_.empty()) {
        throw DimensionError("HilbertLayout: at least one factor required");
    }
    for (std::size_t d : factors_) {
        if (d < 2) {
            throw DimensionError("HilbertLayout: factor dimension " + std::to_string(d) +
                                 " < 2");
        }
        total_dim_ *= d;
    }
}

HilbertLayout HilbertLayout::concat(const HilbertLayout& other) const {
    std::vector<std::size_t> f = factors_;
    f.insert(f.end(), other.factors_.begin(), other.factors_.end());
    return HilbertLayout(std::move(f));
}

std::size_t HilbertLayout::index_of(const std::vector<std::size_t>& levels) const {
    if (levels.size() != factors_.size()) {
        throw DimensionError("HilbertLayout::index_of: expected " +
                             std::to_string(factors_.size()) + " levels");
    }
    std::size_t idx = 0;
    for (std::size_t k = 0; k < factors_.size(); ++k) {
        if (levels[k] >= factors_[k]) {
            throw DimensionError("HilbertLayout::index_of: level out of range for factor " +
                                 std::to_string(k));
        }
        idx = idx * factors_[k] + levels[k];
    }
    return idx;
}

std::string HilbertLayout::to_string() const {
    std::ostringstream os;
    os << '[';
    for (std::size_t k = 0; k < factors_.size(); ++k) {
        os << (k ? "," : "") << factors_[k];
    }
    os << ']';
    return os.str();
}

void Hygiene::absorb(const Hygiene& other) noexcept {
    trace_error = std::max(trace_error, other.trace_error);
    hermiticity_error = std::max(hermiticity_error, other.hermiticity_error);
    min_eigenvalue = std::min(min_eigenvalue, other.min_eigenvalue);
}

// -- StateVector --------------------------------------------------------------

StateVector::StateVector(HilbertLayout layout, Vector amplitudes, bool normalized)
    : layout_(std::move(layout)), amplitudes_(std::move(amplitudes)), normalized_(normalized) {
    if (static_cast<std::size_t>(amplitudes_.size()) != layout_.total_dim()) {
        throw DimensionError("StateVector: " + std::to_string(amplitudes_.size()) +
                             " amplitudes for layout " + layout_.to_string());
    }
    if (normalized_ && std::abs(amplitudes_.squaredNorm() - 1.0) > kNormTol) {
        throw ValidationError("StateVector: flagged normalized but <psi|psi> = " +
                              std::to_string(amplitudes_.squaredNorm()));
    }
}

StateVector StateVector::basis(const HilbertLayout& layout, const std::vector<std::size_t>& levels) {
    Vector v = Vector::Zero(static_cast<Eigen::Index>(layout.total_dim()));
    v(static_cast<Eigen::Index>(layout.index_of(levels))) = 1.0;
    return StateVector(layout, std::move(v), true);
}

StateVector StateVector::normalized() const {
    const double n = amplitudes_.norm();
    if (n == 0.0) {
        throw DegenerateStateError("StateVector::normalized: zero vector");
    }
    return StateVector(layout_, amplitudes_ / n, true);
}

// -- DensityMatrix ------------------------------------------------------------

DensityMatrix::DensityMatrix(HilbertLayout layout, Matrix entries)
    : layout_(std::move(layout)), entries_(std::move(entries)) {
    const auto d = static_cast<Eigen::Index>(layout_.total_dim());
    if (entries_.rows() != d || entries_.cols() != d) {
        throw DimensionError("DensityMatrix: shape does not match layout " + layout_.to_string());
    }
}

DensityMatrix DensityMatrix::from_pure(const StateVector& psi) {
    const Vector& v = psi.amplitudes();
    return DensityMatrix(psi.layout(), v * v.adjoint());
}

Hygiene DensityMatrix::hygiene() const {
    Hygiene h;
    h.trace_error = std::abs(entries_.trace() - cplx(1.0, 0.0));
    h.hermiticity_error = max_abs(entries_ - entries_.adjoint());
    const Matrix herm = 0.5 * (entries_ + entries_.adjoint());
    Eigen::SelfAdjointEigenSolver<Matrix> es(herm, Eigen::EigenvaluesOnly);
    h.min_eigenvalue = es.eigenvalues().minCoeff();
    return h;
}

void DensityMatrix::validate() const {
    const Hygiene h = hygiene();
    if (!h.ok()) {
        std::ostringstream os;
        os << "DensityMatrix: invariant violated (trace error " << h.trace_error
           << ", hermiticity error " << h.hermiticity_error << ", min eigenvalue "
           << h.min_eigenvalue << ")";
        throw ValidationError(os.str());
    }
}

// -- OperatorMatrix -----------------------------------------------------------

OperatorMatrix::OperatorMatrix(HilbertLayout layout, Matrix entries, std::string label)
    : layout_(std::move(layout)), entries_(std::move(entries)), label_(std::move(label)) {
    const auto d = static_cast<Eigen::Index>(layout_.total_dim());
    if (entries_.rows() != d || entries_.cols() != d) {
        throw DimensionError("OperatorMatrix '" + label_ + "': shape does not match layout " +
                             layout_.to_string());
    }
}

OperatorMatrix OperatorMatrix::adjoint() const {
    return OperatorMatrix(layout_, entries_.adjoint(), label_ + "^dag");
}

bool OperatorMatrix::is_hermitian(double tol) const {
    return max_abs(entries_ - entries_.adjoint()) <= tol;
}

OperatorMatrix OperatorMatrix::operator*(const OperatorMatrix& rhs) const {
    require_same_layout(layout_, rhs.layout_, "operator product");
    return OperatorMatrix(layout_, entries_ * rhs.entries_, label_ + rhs.label_);
}

OperatorMatrix OperatorMatrix::operator+(const OperatorMatrix& rhs) const {
    require_same_layout(layout_, rhs.layout_, "operator sum");
    return OperatorMatrix(layout_, entries_ + rhs.entries_, label_ + "+" + rhs.label_);
}

OperatorMatrix OperatorMatrix::operator-(const OperatorMatrix& rhs) const {
    require_same_layout(layout_, rhs.layout_, "operator difference");
    return OperatorMatrix(layout_, entries_ - rhs.entries_, label_ + "-" + rhs.label_);
}

OperatorMatrix OperatorMatrix::operator*(cplx scale) const {
    return OperatorMatrix(layout_, entries_ * scale, label_);
}

StateVector OperatorMatrix::operator*(const StateVector& psi) const {
    require_same_layout(layout_, psi.layout(), "operator action");
    return StateVector(layout_, entries_ * psi.amplitudes(), false);
}

// -- Standard operators -------------------------------------------------------

OperatorMatrix annihilation_op(std::size_t n_trunc) {
    if (n_trunc < 2) {
        throw DimensionError("annihilation_op: truncation " + std::to_string(n_trunc) + " < 2");
    }
    const auto n = static_cast<Eigen::Index>(n_trunc);
    Matrix a = Matrix::Zero(n, n);
    for (Eigen::Index m = 1; m < n; ++m) {
        a(m - 1, m) = std::sqrt(static_cast<double>(m));
    }
    return OperatorMatrix(HilbertLayout::single(n_trunc), std::move(a), "a");
}

OperatorMatrix creation_op(std::size_t n_trunc) {
    auto a = annihilation_op(n_trunc);
    return OperatorMatrix(a.layout(), a.entries().adjoint(), "a^dag");
}

OperatorMatrix number_op(std::size_t n_trunc) {
    const auto d = annihilation_op(n_trunc).layout().total_dim();
    Matrix n = Matrix::Zero(static_cast<Eigen::Index>(d), static_cast<Eigen::Index>(d));
    for (std::size_t k = 0; k < d; ++k) n(static_cast<Eigen::Index>(k), static_cast<Eigen::Index>(k)) = static_cast<double>(k);
    return OperatorMatrix(HilbertLayout::single(d), n, "n");
}

OperatorMatrix identity_op(const HilbertLayout& layout) {
    const auto d = static_cast<Eigen::Index>(layout.total_dim());
    return OperatorMatrix(layout, Matrix::Identity(d, d), "I");
}

OperatorMatrix zero_op(const HilbertLayout& layout) {
    const auto d = static_cast<Eigen::Index>(layout.total_dim());
    return OperatorMatrix(layout, Matrix::Zero(d, d), "0");
}

OperatorMatrix transition_op(std::size_t dim, std::size_t to, std::size_t from) {
    if (to >= dim || from >= dim) {
        throw DimensionError("transition_op: level out of range");
    }
    const auto d = static_cast<Eigen::Index>(dim);
    Matrix m = Matrix::Zero(d, d);
    m(static_cast<Eigen::Index>(to), static_cast<Eigen::Index>(from)) = 1.0;
    return OperatorMatrix(HilbertLayout::single(dim), std::move(m),
                          "|" + std::to_string(to) + "><" + std::to_string(from) + "|");
}

OperatorMatrix sigma_minus() {
    auto s = transition_op(2, level::g, level::e);
    return OperatorMatrix(s.layout(), s.entries(), "sigma_minus");
}

OperatorMatrix sigma_plus() {
    auto s = transition_op(2, level::e, level::g);
    return OperatorMatrix(s.layout(), s.entries(), "sigma_plus");
}

OperatorMatrix sigma_x() {
    Matrix m(2, 2);
    m << 0.0, 1.0, 1.0, 0.0;
    return OperatorMatrix(HilbertLayout::single(2), m, "sigma_x");
}

OperatorMatrix sigma_y() {
    // sigma_y = i(sigma_minus - sigma_plus) in the (g, e) ordering, so that
    // [sigma_x, sigma_y] = 2i sigma_z with sigma_z = |e><e| - |g><g|.
    Matrix m(2, 2);
    m << 0.0, cplx(0.0, 1.0), cplx(0.0, -1.0), 0.0;
    return OperatorMatrix(HilbertLayout::single(2), m, "sigma_y");
}

OperatorMatrix sigma_z() {
    Matrix m(2, 2);
    m << -1.0, 0.0, 0.0, 1.0;
    return OperatorMatrix(HilbertLayout::single(2), m, "sigma_z");
}

OperatorMatrix embed(const OperatorMatrix& op, const HilbertLayout& layout, std::size_t position) {
    if (position >= layout.num_factors()) {
        throw DimensionError("embed: position " + std::to_string(position) +
                             " outside layout " + layout.to_string());
    }
    if (op.layout().total_dim() != layout.factor(position)) {
        throw DimensionError("embed: operator dimension does not match factor " +
                             std::to_string(position));
    }
    std::size_t before = 1;
    std::size_t after = 1;
    for (std::size_t k = 0; k < position; ++k) before *= layout.factor(k);
    for (std::size_t k = position + 1; k < layout.num_factors(); ++k) after *= layout.factor(k);
    Matrix m = kron(Matrix::Identity(static_cast<Eigen::Index>(before),
                                     static_cast<Eigen::Index>(before)),
                    kron(op.entries(), Matrix::Identity(static_cast<Eigen::Index>(after),
                                                        static_cast<Eigen::Index>(after))));
    return OperatorMatrix(layout, std::move(m), op.label() + "@" + std::to_string(position));
}

// -- Composition --------------------------------------------------------------

OperatorMatrix tensor_product(const OperatorMatrix& a, const OperatorMatrix& b) {
    return OperatorMatrix(a.layout().concat(b.layout()), kron(a.entries(), b.entries()),
                          a.label() + "(x)" + b.label());
}

StateVector tensor_product(const StateVector& a, const StateVector& b) {
    Matrix k = kron(a.amplitudes(), b.amplitudes());
    Vector v = k.col(0);
    const bool normalized = a.is_normalized() && b.is_normalized() &&
                            std::abs(v.squaredNorm() - 1.0) <= StateVector::kNormTol;
    return StateVector(a.layout().concat(b.layout()), std::move(v), normalized);
}

DensityMatrix tensor_product(const DensityMatrix& a, const DensityMatrix& b) {
    return DensityMatrix(a.layout().concat(b.layout()), kron(a.entries(), b.entries()));
}

DensityMatrix partial_trace(const DensityMatrix& rho, std::size_t keep) {
    const HilbertLayout& layout = rho.layout();
    if (keep >= layout.num_factors()) {
        throw DimensionError("partial_trace: no factor " + std::to_string(keep) + " in layout " +
                             layout.to_string());
    }
    std::size_t before = 1;
    std::size_t after = 1;
    for (std::size_t k = 0; k < keep; ++k) before *= layout.factor(k);
    for (std::size_t k = keep + 1; k < layout.num_factors(); ++k) after *= layout.factor(k);
    const std::size_t d = layout.factor(keep);

    const Matrix& m = rho.entries();
    Matrix out = Matrix::Zero(static_cast<Eigen::Index>(d), static_cast<Eigen::Index>(d));
    for (std::size_t k = 0; k < d; ++k) {
        for (std::size_t l = 0; l < d; ++l) {
            cplx acc = 0.0;
            for (std::size_t b = 0; b < before; ++b) {
                for (std::size_t a = 0; a < after; ++a) {
                    const auto row = static_cast<Eigen::Index>((b * d + k) * after + a);
                    const auto col = static_cast<Eigen::Index>((b * d + l) * after + a);
                    acc += m(row, col);
                }
            }
            out(static_cast<Eigen::Index>(k), static_cast<Eigen::Index>(l)) = acc;
        }
    }
    return DensityMatrix(HilbertLayout::single(d), std::move(out));
}

// -- Observables --------------------------------------------------------------

cplx expectation(const DensityMatrix& rho, const OperatorMatrix& op) {
    require_same_layout(rho.layout(), op.layout(), "expectation");
    // tr(rho O) without forming the product
    return (rho.entries().transpose().cwiseProduct(op.entries())).sum();
}

cplx expectation(const StateVector& psi, const OperatorMatrix& op) {
    require_same_layout(psi.layout(), op.layout(), "expectation");
    return psi.amplitudes().dot(op.entries() * psi.amplitudes());
}

double top_level_population(const DensityMatrix& rho, std::size_t position) {
    const HilbertLayout& layout = rho.layout();
    const std::size_t top = layout.factor(position) - 1;
    const auto proj = embed(transition_op(layout.factor(position), top, top), layout, position);
    return expectation(rho, proj).real();
}

double trace_distance(const Matrix& rho, const Matrix& sigma) {
    if (rho.rows() != sigma.rows() || rho.cols() != sigma.cols()) {
        throw DimensionError("trace_distance: shape mismatch");
    }
    const Matrix diff = rho - sigma;
    const Matrix herm = 0.5 * (diff + diff.adjoint());
    Eigen::SelfAdjointEigenSolver<Matrix> es(herm, Eigen::EigenvaluesOnly);
    return 0.5 * es.eigenvalues().cwiseAbs().sum();
}

double trace_distance(const DensityMatrix& rho, const DensityMatrix& sigma) {
    require_same_layout(rho.layout(), sigma.layout(), "trace_distance");
    return trace_distance(rho.entries(), sigma.entries());
}

double max_abs(const Matrix& m) {
    return m.size() == 0 ? 0.0 : m.cwiseAbs().maxCoeff();
}

bool is_unitary(const Matrix& u, double tol) {
    if (u.rows() != u.cols()) return false;
    return max_abs(u.adjoint() * u - Matrix::Identity(u.rows(), u.cols())) <= tol;
}

}  // namespace cqed
