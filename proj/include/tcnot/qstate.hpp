// qstate.hpp
// Dense state-vector and density-matrix engine for small registers of
// polarization qubits (H/V encoding).
//
// Conventions fixed here and relied on everywhere else:
//   - qubit 0 is the most significant bit of the amplitude index,
//     H maps to bit 0 and V to bit 1, so printed kets read left to right;
//   - Y = iXZ, i.e. Y|H> = i|V>;
//   - states are compared via |<a|b>|^2, never componentwise.

#pragma once

#include <Eigen/Dense>

#include <array>
#include <complex>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace tcnot {

using cx = std::complex<double>;

inline constexpr int kMaxQubits = 8;
inline constexpr double kTolExact = 1e-12;  // single algebraic steps
inline constexpr double kTolChain = 1e-10;  // accumulated chains

enum class Pauli : std::uint8_t { I, X, Y, Z };

// The four two-qubit Bell states:
// PhiPlus/PhiMinus = (HH +- VV)/sqrt2, PsiPlus/PsiMinus = (HV +- VH)/sqrt2.
enum class BellKind : std::uint8_t { PhiPlus, PhiMinus, PsiPlus, PsiMinus };

inline constexpr std::array<BellKind, 4> kAllBellKinds = {
    BellKind::PhiPlus, BellKind::PhiMinus, BellKind::PsiPlus,
    BellKind::PsiMinus};

const char* to_string(BellKind k);

// Pure state of n <= kMaxQubits polarization qubits as a dense unit-norm
// amplitude vector of length 2^n. Immutable after construction; all
// operations below are pure functions returning new values.
class QubitState {
 public:
  // Scalar (zero-qubit) state with amplitude 1; the remainder of a full
  // projection.
  QubitState();

  // |HH...H>
  static QubitState zero(int n);

  // Computational/analysis kets from labels in {H,V,+,-,L,R},
  // e.g. ket("HV") or ket("+L").
  static QubitState ket(std::string_view labels);

  // Takes ownership of an amplitude vector; throws if the size is not 2^n
  // or the norm is off by more than `norm_tol` (pass normalize=true to
  // rescale instead).
  static QubitState from_amplitudes(int n, std::vector<cx> amps,
                                    bool normalize = false,
                                    double norm_tol = 1e-9);

  int num_qubits() const { return n_; }
  std::size_t dim() const { return amps_.size(); }
  const std::vector<cx>& amps() const { return amps_; }
  cx amp(std::size_t index) const { return amps_.at(index); }
  double norm2() const;

  // Bit of `qubit` inside amplitude index `index` (0 = H, 1 = V).
  int bit(std::size_t index, int qubit) const;

  std::string to_ket_string(double cutoff = 1e-9) const;

 private:
  QubitState(int n, std::vector<cx> amps) : n_(n), amps_(std::move(amps)) {}

  int n_ = 0;
  std::vector<cx> amps_;
};

// <a|b>; sizes must match.
cx overlap(const QubitState& a, const QubitState& b);
// |<a|b>|^2
double overlap_sq(const QubitState& a, const QubitState& b);

// Kronecker product; a's qubits become the leading (most significant) ones.
QubitState tensor(const QubitState& a, const QubitState& b);

QubitState apply_x(const QubitState& s, int qubit);
QubitState apply_y(const QubitState& s, int qubit);
QubitState apply_z(const QubitState& s, int qubit);
QubitState apply_h(const QubitState& s, int qubit);

// Flips `target` iff `control` is V. Matches the polarization logic table
// HH->HH, HV->VV, VH->VH, VV->HV when target precedes control.
QubitState apply_cnot(const QubitState& s, int target, int control);

QubitState bell_state(BellKind kind);

struct BellProjection {
  double prob = 0.0;
  // Renormalized post-measurement state on the remaining qubits (original
  // order); empty when prob < 1e-14.
  std::optional<QubitState> remainder;
};

// Projects qubits (qa, qb) onto the given Bell state; qa is the first slot
// of the Bell ket. Probabilities over the four kinds sum to 1.
BellProjection project_bell(const QubitState& s, int qa, int qb,
                            BellKind kind);

// Per-qubit string of I/X/Y/Z observables.
class PauliString {
 public:
  explicit PauliString(std::vector<Pauli> ops) : ops_(std::move(ops)) {}
  static PauliString parse(std::string_view text);  // e.g. "XZ", "IYI"

  int size() const { return static_cast<int>(ops_.size()); }
  Pauli op(int i) const { return ops_.at(static_cast<std::size_t>(i)); }
  const std::vector<Pauli>& ops() const { return ops_; }

  Eigen::MatrixXcd matrix() const;
  std::string str() const;

 private:
  std::vector<Pauli> ops_;
};

QubitState apply_pauli(const QubitState& s, const PauliString& p);

// Density matrix of n qubits. Hermitian, unit trace, PSD up to numerical
// tolerance; see validity().
class DensityMatrix {
 public:
  DensityMatrix(int n, Eigen::MatrixXcd mat);
  static DensityMatrix from_pure(const QubitState& s);
  static DensityMatrix maximally_mixed(int n);

  int num_qubits() const { return n_; }
  const Eigen::MatrixXcd& mat() const { return m_; }

  struct Validity {
    double hermiticity_dev = 0.0;
    double trace_dev = 0.0;
    double min_eigenvalue = 0.0;
    bool ok(double herm_tol, double trace_tol, double eig_tol) const {
      return hermiticity_dev <= herm_tol && trace_dev <= trace_tol &&
             min_eigenvalue >= -eig_tol;
    }
  };
  Validity validity() const;

 private:
  int n_;
  Eigen::MatrixXcd m_;
};

// Tr(rho P), real within 1e-10; throws on size mismatch.
double expectation(const DensityMatrix& rho, const PauliString& p);

// Tr(rho |target><target|), clamped to [0, 1]; throws on size mismatch.
double fidelity_pure(const DensityMatrix& rho, const QubitState& target);

// Reduced state on the `keep` qubits (ascending order preserved).
DensityMatrix partial_trace_keep(const QubitState& s,
                                 const std::vector<int>& keep);

// Feed-forward corrections are per-qubit elements of {I, X, Z, XZ}; XZ is
// kept as a literal product (not folded into Y) so residual identities hold
// with exact phases.
enum class PauliFactor : std::uint8_t { I, X, Z, XZ };

const char* to_string(PauliFactor f);
Eigen::Matrix2cd factor_matrix(PauliFactor f);

struct Correction {
  PauliFactor target_op = PauliFactor::I;   // output target qubit
  PauliFactor control_op = PauliFactor::I;  // output control qubit
  bool operator==(const Correction&) const = default;
};

// Applies the literal operator (X after Z for the XZ factor).
QubitState apply_factor(const QubitState& s, PauliFactor f, int qubit);

// Applies the adjoint of (target_op x control_op), so that when the raw
// state equals (target_op x control_op)|psi> the result is exactly |psi>,
// phase included.
QubitState apply_correction(const QubitState& s, const Correction& c,
                            int target_qubit, int control_qubit);

// Conjugates rho by the same adjoint factors (for branch density matrices).
DensityMatrix apply_correction(const DensityMatrix& rho, const Correction& c,
                               int target_qubit, int control_qubit);

}  // namespace tcnot
