#include "strobo/operators.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <numeric>
#include <stdexcept>

#include <Eigen/Eigenvalues>

namespace strobo {

namespace {

void require_compatible(const HilbertSpec& a, const HilbertSpec& b, const char* what) {
    if (!a.compatible(b)) {
        throw std::invalid_argument(std::string(what) + ": Hilbert space mismatch");
    }
}

void require_square(const Matrix& m, const HilbertSpec& spec, const char* what) {
    const auto n = static_cast<Eigen::Index>(spec.total_dim());
    if (m.rows() != n || m.cols() != n) {
        throw std::invalid_argument(std::string(what) + ": matrix size " +
                                    std::to_string(m.rows()) + "x" + std::to_string(m.cols()) +
                                    " does not match Hilbert dimension " + std::to_string(n));
    }
}

}  // namespace

HilbertSpec::HilbertSpec(std::vector<Subsystem> slots) : slots_(std::move(slots)) {
    if (slots_.empty()) {
        throw std::invalid_argument("HilbertSpec: no subsystems");
    }
    for (const auto& s : slots_) {
        if (s.dim < 2) {
            throw std::invalid_argument("HilbertSpec: slot '" + s.name + "' has dimension < 2");
        }
    }
}

HilbertSpec HilbertSpec::mode(std::size_t dim, std::string name) {
    return HilbertSpec({{std::move(name), dim, true}});
}

HilbertSpec HilbertSpec::qubit(std::string name) {
    return HilbertSpec({{std::move(name), 2, false}});
}

HilbertSpec HilbertSpec::qubit_cavity(std::size_t cavity_dim) {
    return HilbertSpec({{"qubit", 2, false}, {"cavity", cavity_dim, true}});
}

HilbertSpec HilbertSpec::qubit_cavity_dpa(std::size_t cavity_dim, std::size_t dpa_dim) {
    return HilbertSpec({{"qubit", 2, false}, {"cavity", cavity_dim, true}, {"dpa", dpa_dim, true}});
}

HilbertSpec HilbertSpec::cavity_dpa(std::size_t cavity_dim, std::size_t dpa_dim) {
    return HilbertSpec({{"cavity", cavity_dim, true}, {"dpa", dpa_dim, true}});
}

std::size_t HilbertSpec::total_dim() const {
    return std::accumulate(slots_.begin(), slots_.end(), std::size_t{1},
                           [](std::size_t acc, const Subsystem& s) { return acc * s.dim; });
}

std::vector<std::size_t> HilbertSpec::dims() const {
    std::vector<std::size_t> d;
    d.reserve(slots_.size());
    for (const auto& s : slots_) d.push_back(s.dim);
    return d;
}

bool HilbertSpec::has(std::string_view name) const {
    return std::any_of(slots_.begin(), slots_.end(), [&](const Subsystem& s) { return s.name == name; });
}

std::size_t HilbertSpec::slot(std::string_view name) const {
    for (std::size_t i = 0; i < slots_.size(); ++i) {
        if (slots_[i].name == name) return i;
    }
    throw std::invalid_argument("HilbertSpec: no slot named '" + std::string(name) + "'");
}

HilbertSpec HilbertSpec::with_dim(std::size_t slot, std::size_t dim) const {
    auto s = slots_;
    s.at(slot).dim = dim;
    return HilbertSpec(std::move(s));
}

Operator::Operator(Matrix m, HilbertSpec spec) : m_(std::move(m)), spec_(std::move(spec)) {
    require_square(m_, spec_, "Operator");
}

Operator Operator::identity(const HilbertSpec& spec) {
    const auto n = static_cast<Eigen::Index>(spec.total_dim());
    return {Matrix::Identity(n, n), spec};
}

Operator Operator::zero(const HilbertSpec& spec) {
    const auto n = static_cast<Eigen::Index>(spec.total_dim());
    return {Matrix::Zero(n, n), spec};
}

Operator Operator::adjoint() const { return {m_.adjoint(), spec_}; }

bool Operator::is_hermitian(double tol) const {
    return (m_ - m_.adjoint()).cwiseAbs().maxCoeff() <= tol;
}

Operator& Operator::operator+=(const Operator& o) {
    require_compatible(spec_, o.spec_, "Operator +");
    m_ += o.m_;
    return *this;
}

Operator& Operator::operator-=(const Operator& o) {
    require_compatible(spec_, o.spec_, "Operator -");
    m_ -= o.m_;
    return *this;
}

Operator& Operator::operator*=(Complex c) {
    m_ *= c;
    return *this;
}

Operator operator*(const Operator& a, const Operator& b) {
    require_compatible(a.spec_, b.spec_, "Operator *");
    return {a.m_ * b.m_, a.spec_};
}

Operator commutator(const Operator& a, const Operator& b) { return a * b - b * a; }

DensityMatrix::DensityMatrix(Matrix m, HilbertSpec spec, Unchecked)
    : m_(std::move(m)), spec_(std::move(spec)) {
    require_square(m_, spec_, "DensityMatrix");
}

DensityMatrix DensityMatrix::trusted(Matrix m, HilbertSpec spec) {
    DensityMatrix rho(std::move(m), std::move(spec), Unchecked{});
    const double herm = (rho.m_ - rho.m_.adjoint()).cwiseAbs().maxCoeff();
    if (herm > 1e-8) {
        throw std::invalid_argument("DensityMatrix: not Hermitian (deviation " +
                                    std::to_string(herm) + ")");
    }
    if (std::abs(rho.m_.trace() - 1.0) > 1e-6) {
        throw std::invalid_argument("DensityMatrix: trace deviates from 1");
    }
    return rho;
}

DensityMatrix::DensityMatrix(Matrix m, HilbertSpec spec)
    : DensityMatrix(std::move(m), std::move(spec), Unchecked{}) {
    if ((m_ - m_.adjoint()).cwiseAbs().maxCoeff() > 1e-10) {
        throw std::invalid_argument("DensityMatrix: not Hermitian");
    }
    if (std::abs(m_.trace() - 1.0) > 1e-8) {
        throw std::invalid_argument("DensityMatrix: trace != 1");
    }
    Eigen::SelfAdjointEigenSolver<Matrix> es(m_, Eigen::EigenvaluesOnly);
    if (es.eigenvalues().minCoeff() < -1e-8) {
        throw std::invalid_argument("DensityMatrix: negative eigenvalue");
    }
}

DensityMatrix DensityMatrix::pure(const Vector& psi, HilbertSpec spec) {
    const double norm = psi.norm();
    if (norm == 0.0) {
        throw std::invalid_argument("DensityMatrix::pure: zero vector");
    }
    const Vector v = psi / norm;
    return {v * v.adjoint(), std::move(spec)};
}

DensityMatrix DensityMatrix::basis(const std::vector<std::size_t>& levels, HilbertSpec spec) {
    if (levels.size() != spec.size()) {
        throw std::invalid_argument("DensityMatrix::basis: one level per slot required");
    }
    std::size_t index = 0;
    for (std::size_t i = 0; i < levels.size(); ++i) {
        if (levels[i] >= spec[i].dim) {
            throw std::invalid_argument("DensityMatrix::basis: level out of range");
        }
        index = index * spec[i].dim + levels[i];
    }
    const auto n = static_cast<Eigen::Index>(spec.total_dim());
    Matrix m = Matrix::Zero(n, n);
    m(static_cast<Eigen::Index>(index), static_cast<Eigen::Index>(index)) = 1.0;
    return {std::move(m), std::move(spec)};
}

DensityMatrix DensityMatrix::product(const std::vector<Matrix>& locals, HilbertSpec spec) {
    if (locals.size() != spec.size()) {
        throw std::invalid_argument("DensityMatrix::product: one factor per slot required");
    }
    Matrix m = Matrix::Ones(1, 1);
    for (const auto& l : locals) m = kron(m, l);
    return {std::move(m), std::move(spec)};
}

std::vector<double> DensityMatrix::populations(std::size_t slot) const {
    const auto dims = spec_.dims();
    const std::size_t d = dims.at(slot);
    std::size_t inner = 1;
    for (std::size_t i = slot + 1; i < dims.size(); ++i) inner *= dims[i];
    std::vector<double> pop(d, 0.0);
    const auto n = m_.rows();
    for (Eigen::Index k = 0; k < n; ++k) {
        pop[(static_cast<std::size_t>(k) / inner) % d] += m_(k, k).real();
    }
    return pop;
}

Matrix DensityMatrix::reduced(std::size_t slot) const {
    const auto dims = spec_.dims();
    const std::size_t d = dims.at(slot);
    std::size_t inner = 1;
    std::size_t outer = 1;
    for (std::size_t i = slot + 1; i < dims.size(); ++i) inner *= dims[i];
    for (std::size_t i = 0; i < slot; ++i) outer *= dims[i];
    Matrix r = Matrix::Zero(static_cast<Eigen::Index>(d), static_cast<Eigen::Index>(d));
    for (std::size_t o = 0; o < outer; ++o) {
        for (std::size_t in = 0; in < inner; ++in) {
            for (std::size_t a = 0; a < d; ++a) {
                for (std::size_t b = 0; b < d; ++b) {
                    const auto ia = static_cast<Eigen::Index>((o * d + a) * inner + in);
                    const auto ib = static_cast<Eigen::Index>((o * d + b) * inner + in);
                    r(static_cast<Eigen::Index>(a), static_cast<Eigen::Index>(b)) += m_(ia, ib);
                }
            }
        }
    }
    return r;
}

DensityMatrix DensityMatrix::padded(const HilbertSpec& larger) const {
    if (larger.size() != spec_.size()) {
        throw std::invalid_argument("DensityMatrix::padded: slot count differs");
    }
    const auto from = spec_.dims();
    const auto to = larger.dims();
    for (std::size_t i = 0; i < from.size(); ++i) {
        if (to[i] < from[i]) {
            throw std::invalid_argument("DensityMatrix::padded: target truncation is smaller");
        }
    }
    // map every old flat index to its new flat index
    const std::size_t n_old = spec_.total_dim();
    std::vector<Eigen::Index> map(n_old);
    for (std::size_t k = 0; k < n_old; ++k) {
        std::size_t rem = k;
        std::size_t idx = 0;
        std::size_t stride = 1;
        for (std::size_t i = from.size(); i-- > 0;) {
            const std::size_t level = rem % from[i];
            rem /= from[i];
            idx += level * stride;
            stride *= to[i];
        }
        map[k] = static_cast<Eigen::Index>(idx);
    }
    const auto n_new = static_cast<Eigen::Index>(larger.total_dim());
    Matrix m = Matrix::Zero(n_new, n_new);
    for (std::size_t a = 0; a < n_old; ++a) {
        for (std::size_t b = 0; b < n_old; ++b) {
            m(map[a], map[b]) = m_(static_cast<Eigen::Index>(a), static_cast<Eigen::Index>(b));
        }
    }
    return DensityMatrix(std::move(m), larger, Unchecked{});
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

Operator annihilation(std::size_t dim) {
    if (dim < 2) {
        throw std::invalid_argument("annihilation: dim must be >= 2");
    }
    const auto n = static_cast<Eigen::Index>(dim);
    Matrix m = Matrix::Zero(n, n);
    for (Eigen::Index k = 1; k < n; ++k) {
        m(k - 1, k) = std::sqrt(static_cast<double>(k));
    }
    return {std::move(m), HilbertSpec::mode(dim)};
}

Operator number_op(std::size_t dim) {
    if (dim < 2) {
        throw std::invalid_argument("number_op: dim must be >= 2");
    }
    // exact integers on the diagonal, unlike a^dag a built from square roots
    Matrix m = Matrix::Zero(static_cast<Eigen::Index>(dim), static_cast<Eigen::Index>(dim));
    for (Eigen::Index k = 0; k < m.rows(); ++k) m(k, k) = static_cast<double>(k);
    return {std::move(m), HilbertSpec::mode(dim)};
}

Operator pauli(Pauli which) {
    using namespace std::complex_literals;
    Matrix m(2, 2);
    switch (which) {
        case Pauli::X: m << 0.0, 1.0, 1.0, 0.0; break;
        case Pauli::Y: m << 0.0, -1i, 1i, 0.0; break;
        case Pauli::Z: m << 1.0, 0.0, 0.0, -1.0; break;
        case Pauli::Plus: m << 0.0, 1.0, 0.0, 0.0; break;
        case Pauli::Minus: m << 0.0, 0.0, 1.0, 0.0; break;
    }
    return {std::move(m), HilbertSpec::qubit()};
}

Operator embed(const Operator& op, std::size_t slot, const HilbertSpec& spec) {
    return embed_product({{slot, op}}, spec);
}

Operator embed(const Operator& op, std::string_view slot, const HilbertSpec& spec) {
    return embed(op, spec.slot(slot), spec);
}

Operator embed_product(const std::vector<std::pair<std::size_t, Operator>>& factors,
                       const HilbertSpec& spec) {
    std::vector<const Matrix*> local(spec.size(), nullptr);
    for (const auto& [slot, op] : factors) {
        if (slot >= spec.size()) {
            throw std::invalid_argument("embed: slot index out of range");
        }
        if (op.dim() != spec[slot].dim) {
            throw std::invalid_argument("embed: operator dimension " + std::to_string(op.dim()) +
                                        " does not match slot '" + spec[slot].name + "' (" +
                                        std::to_string(spec[slot].dim) + ")");
        }
        if (local[slot] != nullptr) {
            throw std::invalid_argument("embed: slot listed twice");
        }
        local[slot] = &op.matrix();
    }
    Matrix m = Matrix::Ones(1, 1);
    for (std::size_t i = 0; i < spec.size(); ++i) {
        const auto d = static_cast<Eigen::Index>(spec[i].dim);
        m = local[i] ? kron(m, *local[i]) : kron(m, Matrix::Identity(d, d));
    }
    return {std::move(m), spec};
}

Matrix dissipator(const Operator& L, const DensityMatrix& rho) {
    require_compatible(L.spec(), rho.spec(), "dissipator");
    const Matrix& l = L.matrix();
    const Matrix& r = rho.matrix();
    const Matrix ldl = l.adjoint() * l;
    return l * r * l.adjoint() - 0.5 * (ldl * r + r * ldl);
}

Complex expect(const Matrix& op, const Matrix& rho) {
    if (op.rows() != rho.rows() || op.cols() != rho.cols()) {
        throw std::invalid_argument("expect: dimension mismatch");
    }
    // Tr(op rho) without forming the product
    return op.transpose().cwiseProduct(rho).sum();
}

Complex expect(const Operator& op, const DensityMatrix& rho) {
    require_compatible(op.spec(), rho.spec(), "expect");
    return expect(op.matrix(), rho.matrix());
}

DensityMatrix thermal_state(std::size_t dim, double nbar) {
    if (nbar < 0.0) {
        throw std::invalid_argument("thermal_state: nbar must be >= 0");
    }
    const auto n = static_cast<Eigen::Index>(dim);
    Matrix m = Matrix::Zero(n, n);
    const double q = nbar / (1.0 + nbar);
    double total = 0.0;
    for (Eigen::Index k = 0; k < n; ++k) {
        const double p = std::pow(q, static_cast<double>(k)) / (1.0 + nbar);
        m(k, k) = p;
        total += p;
    }
    m /= total;
    return {std::move(m), HilbertSpec::mode(dim)};
}

Matrix lindblad_rhs(const Operator& h, const std::vector<Operator>& collapse, const Matrix& rho) {
    using namespace std::complex_literals;
    const Matrix& hm = h.matrix();
    Matrix out = -1i * (hm * rho - rho * hm);
    for (const auto& L : collapse) {
        require_compatible(h.spec(), L.spec(), "lindblad_rhs");
        const Matrix& l = L.matrix();
        const Matrix ldl = l.adjoint() * l;
        out += l * rho * l.adjoint() - 0.5 * (ldl * rho + rho * ldl);
    }
    return out;
}

Matrix liouvillian(const Operator& h, const std::vector<Operator>& collapse) {
    using namespace std::complex_literals;
    const auto n = static_cast<Eigen::Index>(h.dim());
    if (n > 64) {
        throw std::invalid_argument("liouvillian: dimension above 64, use the matrix-free RHS");
    }
    // row-major vec: vec(A X B) = (A kron B^T) vec(X)
    const Matrix id = Matrix::Identity(n, n);
    const Matrix& hm = h.matrix();
    Matrix sup = -1i * (kron(hm, id) - kron(id, hm.transpose()));
    for (const auto& L : collapse) {
        const Matrix& l = L.matrix();
        const Matrix ldl = l.adjoint() * l;
        sup += kron(l, l.conjugate()) - 0.5 * (kron(ldl, id) + kron(id, ldl.transpose()));
    }
    return sup;
}

}  // namespace strobo
