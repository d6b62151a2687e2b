#pragma once

// Dense operator algebra on truncated tensor-product spaces.
//
// Slot order is the tensor order: the first slot is the most significant
// index of the flattened basis. Qubit basis: index 0 is |e>, so sigma_z|e> = +|e>.

#include <complex>
#include <cstddef>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include <Eigen/Dense>

namespace strobo {

using Complex = std::complex<double>;
using Matrix = Eigen::MatrixXcd;
using Vector = Eigen::VectorXcd;

struct Subsystem {
    std::string name;
    std::size_t dim = 2;
    bool bosonic = true;

    bool operator==(const Subsystem&) const = default;
};

class HilbertSpec {
public:
    HilbertSpec() = default;
    explicit HilbertSpec(std::vector<Subsystem> slots);

    static HilbertSpec mode(std::size_t dim, std::string name = "mode");
    static HilbertSpec qubit(std::string name = "qubit");
    static HilbertSpec qubit_cavity(std::size_t cavity_dim);
    static HilbertSpec qubit_cavity_dpa(std::size_t cavity_dim, std::size_t dpa_dim);
    static HilbertSpec cavity_dpa(std::size_t cavity_dim, std::size_t dpa_dim);

    std::size_t size() const { return slots_.size(); }
    const Subsystem& operator[](std::size_t i) const { return slots_.at(i); }
    const std::vector<Subsystem>& slots() const { return slots_; }
    std::size_t total_dim() const;
    std::vector<std::size_t> dims() const;

    bool has(std::string_view name) const;
    /// Throws std::invalid_argument when absent.
    std::size_t slot(std::string_view name) const;

    HilbertSpec with_dim(std::size_t slot, std::size_t dim) const;

    /// Same dimensions slot by slot; names are not compared.
    bool compatible(const HilbertSpec& other) const { return dims() == other.dims(); }
    bool operator==(const HilbertSpec&) const = default;

private:
    std::vector<Subsystem> slots_;
};

class Operator {
public:
    Operator(Matrix m, HilbertSpec spec);

    static Operator identity(const HilbertSpec& spec);
    static Operator zero(const HilbertSpec& spec);

    const Matrix& matrix() const { return m_; }
    const HilbertSpec& spec() const { return spec_; }
    std::size_t dim() const { return static_cast<std::size_t>(m_.rows()); }

    Operator adjoint() const;
    bool is_hermitian(double tol = 1e-10) const;

    Operator& operator+=(const Operator& o);
    Operator& operator-=(const Operator& o);
    Operator& operator*=(Complex c);

    friend Operator operator+(Operator a, const Operator& b) { return a += b; }
    friend Operator operator-(Operator a, const Operator& b) { return a -= b; }
    friend Operator operator*(const Operator& a, const Operator& b);
    friend Operator operator*(Complex c, Operator a) { return a *= c; }
    friend Operator operator*(Operator a, Complex c) { return a *= c; }
    friend Operator operator*(double c, Operator a) { return a *= Complex(c, 0.0); }

private:
    Matrix m_;
    HilbertSpec spec_;
};

Operator commutator(const Operator& a, const Operator& b);

class DensityMatrix {
public:
    /// Validates Hermiticity (1e-10), unit trace (1e-8) and eigenvalues >= -1e-8.
    DensityMatrix(Matrix m, HilbertSpec spec);

    /// Skips the eigenvalue check; for states produced by a trace- and
    /// Hermiticity-preserving integrator.
    static DensityMatrix trusted(Matrix m, HilbertSpec spec);

    static DensityMatrix pure(const Vector& psi, HilbertSpec spec);
    /// Product of computational basis states, one level per slot.
    static DensityMatrix basis(const std::vector<std::size_t>& levels, HilbertSpec spec);
    /// Tensor product of local density matrices, in slot order.
    static DensityMatrix product(const std::vector<Matrix>& locals, HilbertSpec spec);

    const Matrix& matrix() const { return m_; }
    const HilbertSpec& spec() const { return spec_; }
    std::size_t dim() const { return static_cast<std::size_t>(m_.rows()); }
    Complex trace() const { return m_.trace(); }

    /// Level populations of one slot (diagonal of the reduced state).
    std::vector<double> populations(std::size_t slot) const;
    Matrix reduced(std::size_t slot) const;

    /// Embeds into a larger truncation by zero padding each slot.
    DensityMatrix padded(const HilbertSpec& larger) const;

private:
    struct Unchecked {};
    DensityMatrix(Matrix m, HilbertSpec spec, Unchecked);
    Matrix m_;
    HilbertSpec spec_;
};

Matrix kron(const Matrix& a, const Matrix& b);

/// Lowering operator with sqrt(n) on the superdiagonal.
Operator annihilation(std::size_t dim);
Operator number_op(std::size_t dim);

enum class Pauli { X, Y, Z, Plus, Minus };
Operator pauli(Pauli which);

/// Identity on every slot except `slot`.
Operator embed(const Operator& op, std::size_t slot, const HilbertSpec& spec);
Operator embed(const Operator& op, std::string_view slot, const HilbertSpec& spec);
/// Tensor product of local factors; slots not listed carry the identity.
Operator embed_product(const std::vector<std::pair<std::size_t, Operator>>& factors,
                       const HilbertSpec& spec);

/// D[L]rho = L rho L^dag - {L^dag L, rho}/2.
Matrix dissipator(const Operator& L, const DensityMatrix& rho);
Complex expect(const Operator& op, const DensityMatrix& rho);
Complex expect(const Matrix& op, const Matrix& rho);

/// Geometric thermal state of one mode, renormalized after truncation.
DensityMatrix thermal_state(std::size_t dim, double nbar);

/// Lindblad right-hand side -i[H, rho] + sum D[L]rho, evaluated directly.
Matrix lindblad_rhs(const Operator& h, const std::vector<Operator>& collapse, const Matrix& rho);

/// Row-major vectorized Liouvillian; refuses dimensions above 64.
Matrix liouvillian(const Operator& h, const std::vector<Operator>& collapse);

}  // namespace strobo
