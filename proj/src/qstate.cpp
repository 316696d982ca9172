#include "tcnot/qstate.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>
#include <stdexcept>

namespace tcnot {

namespace {

constexpr cx kI{0.0, 1.0};

std::size_t checked_dim(int n) {
  if (n < 0 || n > kMaxQubits) {
    throw std::invalid_argument("qubit count " + std::to_string(n) +
                                " outside [0, " + std::to_string(kMaxQubits) +
                                "]");
  }
  return std::size_t{1} << n;
}

void check_qubit_index(int qubit, int n) {
  if (qubit < 0 || qubit >= n) {
    throw std::out_of_range("qubit index " + std::to_string(qubit) +
                            " out of range for " + std::to_string(n) +
                            " qubits");
  }
}

// Bit mask selecting `qubit` in an amplitude index (qubit 0 = MSB).
std::size_t qubit_mask(int qubit, int n) {
  return std::size_t{1} << (n - 1 - qubit);
}

std::array<cx, 2> single_qubit_amps(char label) {
  const double s = 1.0 / std::sqrt(2.0);
  switch (label) {
    case 'H':
      return {cx{1.0}, cx{0.0}};
    case 'V':
      return {cx{0.0}, cx{1.0}};
    case '+':
      return {cx{s}, cx{s}};
    case '-':
      return {cx{s}, cx{-s}};
    case 'L':
      return {cx{s}, cx{0.0, s}};
    case 'R':
      return {cx{s}, cx{0.0, -s}};
    default:
      throw std::invalid_argument(std::string("unknown ket label '") + label +
                                  "'");
  }
}

Eigen::Matrix2cd pauli_matrix(Pauli p) {
  Eigen::Matrix2cd m;
  switch (p) {
    case Pauli::I:
      m << 1, 0, 0, 1;
      break;
    case Pauli::X:
      m << 0, 1, 1, 0;
      break;
    case Pauli::Y:
      m << 0, cx{0, -1}, cx{0, 1}, 0;
      break;
    case Pauli::Z:
      m << 1, 0, 0, -1;
      break;
  }
  return m;
}

}  // namespace

const char* to_string(BellKind k) {
  switch (k) {
    case BellKind::PhiPlus:
      return "phi+";
    case BellKind::PhiMinus:
      return "phi-";
    case BellKind::PsiPlus:
      return "psi+";
    case BellKind::PsiMinus:
      return "psi-";
  }
  return "?";
}

QubitState::QubitState() : n_(0), amps_{cx{1.0}} {}

QubitState QubitState::zero(int n) {
  std::vector<cx> amps(checked_dim(n), cx{0.0});
  amps[0] = cx{1.0};
  return QubitState(n, std::move(amps));
}

QubitState QubitState::ket(std::string_view labels) {
  QubitState out;  // scalar seed
  for (char c : labels) {
    auto a = single_qubit_amps(c);
    out = tensor(out, QubitState::from_amplitudes(1, {a[0], a[1]}));
  }
  return out;
}

QubitState QubitState::from_amplitudes(int n, std::vector<cx> amps,
                                       bool normalize, double norm_tol) {
  if (amps.size() != checked_dim(n)) {
    throw std::invalid_argument("amplitude vector has size " +
                                std::to_string(amps.size()) + ", expected 2^" +
                                std::to_string(n));
  }
  double norm2 = 0.0;
  for (const cx& a : amps) norm2 += std::norm(a);
  if (normalize) {
    if (norm2 < 1e-28) {
      throw std::invalid_argument("cannot normalize a zero vector");
    }
    const double inv = 1.0 / std::sqrt(norm2);
    for (cx& a : amps) a *= inv;
  } else if (std::abs(norm2 - 1.0) > norm_tol) {
    throw std::invalid_argument("amplitudes are not normalized (|norm^2-1| = " +
                                std::to_string(std::abs(norm2 - 1.0)) + ")");
  }
  return QubitState(n, std::move(amps));
}

double QubitState::norm2() const {
  double s = 0.0;
  for (const cx& a : amps_) s += std::norm(a);
  return s;
}

int QubitState::bit(std::size_t index, int qubit) const {
  check_qubit_index(qubit, n_);
  return (index >> (n_ - 1 - qubit)) & 1u;
}

std::string QubitState::to_ket_string(double cutoff) const {
  std::ostringstream os;
  bool first = true;
  for (std::size_t i = 0; i < amps_.size(); ++i) {
    if (std::abs(amps_[i]) < cutoff) continue;
    if (!first) os << " + ";
    first = false;
    os << "(" << amps_[i].real() << (amps_[i].imag() < 0 ? "-" : "+")
       << std::abs(amps_[i].imag()) << "i)|";
    for (int q = 0; q < n_; ++q) os << ((i >> (n_ - 1 - q)) & 1u ? 'V' : 'H');
    os << ">";
  }
  if (first) os << "0";
  return os.str();
}

cx overlap(const QubitState& a, const QubitState& b) {
  if (a.num_qubits() != b.num_qubits()) {
    throw std::invalid_argument("overlap of states with different sizes");
  }
  cx s{0.0};
  for (std::size_t i = 0; i < a.dim(); ++i) {
    s += std::conj(a.amp(i)) * b.amp(i);
  }
  return s;
}

double overlap_sq(const QubitState& a, const QubitState& b) {
  return std::norm(overlap(a, b));
}

QubitState tensor(const QubitState& a, const QubitState& b) {
  const int n = a.num_qubits() + b.num_qubits();
  if (n > kMaxQubits) {
    throw std::invalid_argument("tensor product would need " +
                                std::to_string(n) + " qubits (cap " +
                                std::to_string(kMaxQubits) + ")");
  }
  std::vector<cx> amps(a.dim() * b.dim());
  for (std::size_t i = 0; i < a.dim(); ++i) {
    for (std::size_t j = 0; j < b.dim(); ++j) {
      amps[i * b.dim() + j] = a.amp(i) * b.amp(j);
    }
  }
  return QubitState::from_amplitudes(n, std::move(amps), false, 1e-9);
}

QubitState apply_x(const QubitState& s, int qubit) {
  check_qubit_index(qubit, s.num_qubits());
  const std::size_t mask = qubit_mask(qubit, s.num_qubits());
  std::vector<cx> amps(s.dim());
  for (std::size_t i = 0; i < s.dim(); ++i) amps[i ^ mask] = s.amp(i);
  return QubitState::from_amplitudes(s.num_qubits(), std::move(amps));
}

QubitState apply_y(const QubitState& s, int qubit) {
  check_qubit_index(qubit, s.num_qubits());
  const std::size_t mask = qubit_mask(qubit, s.num_qubits());
  std::vector<cx> amps(s.dim());
  for (std::size_t i = 0; i < s.dim(); ++i) {
    // Y|H> = i|V>, Y|V> = -i|H>
    amps[i ^ mask] = ((i & mask) ? -kI : kI) * s.amp(i);
  }
  return QubitState::from_amplitudes(s.num_qubits(), std::move(amps));
}

QubitState apply_z(const QubitState& s, int qubit) {
  check_qubit_index(qubit, s.num_qubits());
  const std::size_t mask = qubit_mask(qubit, s.num_qubits());
  std::vector<cx> amps(s.dim());
  for (std::size_t i = 0; i < s.dim(); ++i) {
    amps[i] = (i & mask) ? -s.amp(i) : s.amp(i);
  }
  return QubitState::from_amplitudes(s.num_qubits(), std::move(amps));
}

QubitState apply_h(const QubitState& s, int qubit) {
  check_qubit_index(qubit, s.num_qubits());
  const std::size_t mask = qubit_mask(qubit, s.num_qubits());
  const double r = 1.0 / std::sqrt(2.0);
  std::vector<cx> amps(s.dim(), cx{0.0});
  for (std::size_t i = 0; i < s.dim(); ++i) {
    if (i & mask) {
      amps[i ^ mask] += r * s.amp(i);
      amps[i] -= r * s.amp(i);
    } else {
      amps[i] += r * s.amp(i);
      amps[i ^ mask] += r * s.amp(i);
    }
  }
  return QubitState::from_amplitudes(s.num_qubits(), std::move(amps));
}

QubitState apply_cnot(const QubitState& s, int target, int control) {
  check_qubit_index(target, s.num_qubits());
  check_qubit_index(control, s.num_qubits());
  if (target == control) {
    throw std::invalid_argument("cnot target and control must differ");
  }
  const std::size_t tmask = qubit_mask(target, s.num_qubits());
  const std::size_t cmask = qubit_mask(control, s.num_qubits());
  std::vector<cx> amps(s.dim());
  for (std::size_t i = 0; i < s.dim(); ++i) {
    amps[(i & cmask) ? (i ^ tmask) : i] = s.amp(i);
  }
  return QubitState::from_amplitudes(s.num_qubits(), std::move(amps));
}

QubitState bell_state(BellKind kind) {
  const double r = 1.0 / std::sqrt(2.0);
  switch (kind) {
    case BellKind::PhiPlus:
      return QubitState::from_amplitudes(2, {r, 0, 0, r});
    case BellKind::PhiMinus:
      return QubitState::from_amplitudes(2, {r, 0, 0, -r});
    case BellKind::PsiPlus:
      return QubitState::from_amplitudes(2, {0, r, r, 0});
    case BellKind::PsiMinus:
      return QubitState::from_amplitudes(2, {0, r, -r, 0});
  }
  throw std::invalid_argument("bad BellKind");
}

BellProjection project_bell(const QubitState& s, int qa, int qb,
                            BellKind kind) {
  const int n = s.num_qubits();
  check_qubit_index(qa, n);
  check_qubit_index(qb, n);
  if (qa == qb) throw std::invalid_argument("bell pair qubits must differ");

  const QubitState bell = bell_state(kind);
  const std::size_t amask = qubit_mask(qa, n);
  const std::size_t bmask = qubit_mask(qb, n);

  // Map from remainder index to full index with pair bits zeroed.
  std::vector<int> rest;
  for (int q = 0; q < n; ++q) {
    if (q != qa && q != qb) rest.push_back(q);
  }
  const int nr = static_cast<int>(rest.size());
  std::vector<cx> rem(std::size_t{1} << nr, cx{0.0});

  for (std::size_t j = 0; j < rem.size(); ++j) {
    std::size_t base = 0;
    for (int k = 0; k < nr; ++k) {
      if ((j >> (nr - 1 - k)) & 1u) base |= qubit_mask(rest[k], n);
    }
    cx acc{0.0};
    for (int ba = 0; ba < 2; ++ba) {
      for (int bb = 0; bb < 2; ++bb) {
        std::size_t full = base | (ba ? amask : 0u) | (bb ? bmask : 0u);
        acc += std::conj(bell.amp((ba << 1) | bb)) * s.amp(full);
      }
    }
    rem[j] = acc;
  }

  double prob = 0.0;
  for (const cx& a : rem) prob += std::norm(a);

  BellProjection out;
  out.prob = prob;
  if (prob >= 1e-14) {
    const double inv = 1.0 / std::sqrt(prob);
    for (cx& a : rem) a *= inv;
    out.remainder = QubitState::from_amplitudes(nr, std::move(rem));
  }
  return out;
}

PauliString PauliString::parse(std::string_view text) {
  std::vector<Pauli> ops;
  ops.reserve(text.size());
  for (char c : text) {
    switch (c) {
      case 'I':
        ops.push_back(Pauli::I);
        break;
      case 'X':
        ops.push_back(Pauli::X);
        break;
      case 'Y':
        ops.push_back(Pauli::Y);
        break;
      case 'Z':
        ops.push_back(Pauli::Z);
        break;
      default:
        throw std::invalid_argument(std::string("bad Pauli label '") + c +
                                    "'");
    }
  }
  return PauliString(std::move(ops));
}

Eigen::MatrixXcd PauliString::matrix() const {
  // Qubit 0 is the most significant index bit, so it must be the outermost
  // Kronecker factor: build from the last operator inward.
  Eigen::MatrixXcd m = Eigen::MatrixXcd::Identity(1, 1);
  for (auto it = ops_.rbegin(); it != ops_.rend(); ++it) {
    const Eigen::Matrix2cd f = pauli_matrix(*it);
    Eigen::MatrixXcd next(m.rows() * 2, m.cols() * 2);
    next.topLeftCorner(m.rows(), m.cols()) = f(0, 0) * m;
    next.topRightCorner(m.rows(), m.cols()) = f(0, 1) * m;
    next.bottomLeftCorner(m.rows(), m.cols()) = f(1, 0) * m;
    next.bottomRightCorner(m.rows(), m.cols()) = f(1, 1) * m;
    m = std::move(next);
  }
  return m;
}

std::string PauliString::str() const {
  std::string s;
  for (Pauli p : ops_) {
    s += "IXYZ"[static_cast<int>(p)];
  }
  return s;
}

QubitState apply_pauli(const QubitState& s, const PauliString& p) {
  if (p.size() != s.num_qubits()) {
    throw std::invalid_argument("Pauli string length does not match state");
  }
  QubitState out = s;
  for (int q = 0; q < p.size(); ++q) {
    switch (p.op(q)) {
      case Pauli::I:
        break;
      case Pauli::X:
        out = apply_x(out, q);
        break;
      case Pauli::Y:
        out = apply_y(out, q);
        break;
      case Pauli::Z:
        out = apply_z(out, q);
        break;
    }
  }
  return out;
}

DensityMatrix::DensityMatrix(int n, Eigen::MatrixXcd mat) : n_(n), m_(std::move(mat)) {
  const auto dim = static_cast<Eigen::Index>(checked_dim(n));
  if (m_.rows() != dim || m_.cols() != dim) {
    throw std::invalid_argument("density matrix has wrong dimensions");
  }
}

DensityMatrix DensityMatrix::from_pure(const QubitState& s) {
  Eigen::VectorXcd v(static_cast<Eigen::Index>(s.dim()));
  for (std::size_t i = 0; i < s.dim(); ++i) {
    v(static_cast<Eigen::Index>(i)) = s.amp(i);
  }
  return DensityMatrix(s.num_qubits(), v * v.adjoint());
}

DensityMatrix DensityMatrix::maximally_mixed(int n) {
  const auto dim = static_cast<Eigen::Index>(checked_dim(n));
  return DensityMatrix(
      n, Eigen::MatrixXcd::Identity(dim, dim) / static_cast<double>(dim));
}

DensityMatrix::Validity DensityMatrix::validity() const {
  Validity v;
  v.hermiticity_dev = (m_ - m_.adjoint()).cwiseAbs().maxCoeff();
  v.trace_dev = std::abs(m_.trace() - cx{1.0});
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(
      0.5 * (m_ + m_.adjoint()), Eigen::EigenvaluesOnly);
  v.min_eigenvalue = es.eigenvalues().minCoeff();
  return v;
}

double expectation(const DensityMatrix& rho, const PauliString& p) {
  if (p.size() != rho.num_qubits()) {
    throw std::invalid_argument("Pauli string length does not match rho");
  }
  const cx tr = (rho.mat() * p.matrix()).trace();
  if (std::abs(tr.imag()) > 1e-10) {
    throw std::runtime_error("expectation has non-real trace: imag = " +
                             std::to_string(tr.imag()));
  }
  return tr.real();
}

double fidelity_pure(const DensityMatrix& rho, const QubitState& target) {
  if (rho.num_qubits() != target.num_qubits()) {
    throw std::invalid_argument("fidelity_pure size mismatch");
  }
  Eigen::VectorXcd v(static_cast<Eigen::Index>(target.dim()));
  for (std::size_t i = 0; i < target.dim(); ++i) {
    v(static_cast<Eigen::Index>(i)) = target.amp(i);
  }
  const cx val = v.dot(rho.mat() * v);
  return std::clamp(val.real(), 0.0, 1.0);
}

DensityMatrix partial_trace_keep(const QubitState& s,
                                 const std::vector<int>& keep) {
  const int n = s.num_qubits();
  for (int q : keep) check_qubit_index(q, n);
  std::vector<int> rest;
  for (int q = 0; q < n; ++q) {
    if (std::find(keep.begin(), keep.end(), q) == keep.end()) rest.push_back(q);
  }
  const int nk = static_cast<int>(keep.size());
  const int nr = static_cast<int>(rest.size());
  const auto dk = std::size_t{1} << nk;
  const auto dr = std::size_t{1} << nr;

  auto full_index = [&](std::size_t ik, std::size_t ir) {
    std::size_t idx = 0;
    for (int a = 0; a < nk; ++a) {
      if ((ik >> (nk - 1 - a)) & 1u) idx |= qubit_mask(keep[a], n);
    }
    for (int b = 0; b < nr; ++b) {
      if ((ir >> (nr - 1 - b)) & 1u) idx |= qubit_mask(rest[b], n);
    }
    return idx;
  };

  Eigen::MatrixXcd m = Eigen::MatrixXcd::Zero(static_cast<Eigen::Index>(dk),
                                              static_cast<Eigen::Index>(dk));
  for (std::size_t i = 0; i < dk; ++i) {
    for (std::size_t j = 0; j < dk; ++j) {
      cx acc{0.0};
      for (std::size_t r = 0; r < dr; ++r) {
        acc += s.amp(full_index(i, r)) * std::conj(s.amp(full_index(j, r)));
      }
      m(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = acc;
    }
  }
  return DensityMatrix(nk, std::move(m));
}

const char* to_string(PauliFactor f) {
  switch (f) {
    case PauliFactor::I:
      return "I";
    case PauliFactor::X:
      return "X";
    case PauliFactor::Z:
      return "Z";
    case PauliFactor::XZ:
      return "XZ";
  }
  return "?";
}

Eigen::Matrix2cd factor_matrix(PauliFactor f) {
  Eigen::Matrix2cd m;
  switch (f) {
    case PauliFactor::I:
      m << 1, 0, 0, 1;
      break;
    case PauliFactor::X:
      m << 0, 1, 1, 0;
      break;
    case PauliFactor::Z:
      m << 1, 0, 0, -1;
      break;
    case PauliFactor::XZ:
      // X * Z as an operator product (apply Z first, then X).
      m << 0, -1, 1, 0;
      break;
  }
  return m;
}

QubitState apply_factor(const QubitState& s, PauliFactor f, int qubit) {
  switch (f) {
    case PauliFactor::I:
      return s;
    case PauliFactor::X:
      return apply_x(s, qubit);
    case PauliFactor::Z:
      return apply_z(s, qubit);
    case PauliFactor::XZ:
      return apply_x(apply_z(s, qubit), qubit);
  }
  throw std::invalid_argument("bad PauliFactor");
}

namespace {

// Applies the adjoint of a single correction factor to one qubit.
QubitState apply_factor_adjoint(const QubitState& s, PauliFactor f,
                                int qubit) {
  switch (f) {
    case PauliFactor::I:
      return s;
    case PauliFactor::X:
      return apply_x(s, qubit);
    case PauliFactor::Z:
      return apply_z(s, qubit);
    case PauliFactor::XZ:
      // (XZ)^dagger = ZX: apply X, then Z.
      return apply_z(apply_x(s, qubit), qubit);
  }
  throw std::invalid_argument("bad PauliFactor");
}

}  // namespace

QubitState apply_correction(const QubitState& s, const Correction& c,
                            int target_qubit, int control_qubit) {
  QubitState out = apply_factor_adjoint(s, c.target_op, target_qubit);
  return apply_factor_adjoint(out, c.control_op, control_qubit);
}

DensityMatrix apply_correction(const DensityMatrix& rho, const Correction& c,
                               int target_qubit, int control_qubit) {
  if (rho.num_qubits() != 2 || target_qubit != 0 || control_qubit != 1) {
    throw std::invalid_argument(
        "density-matrix correction expects a 2-qubit register (target=0, "
        "control=1)");
  }
  Eigen::Matrix4cd u = Eigen::Matrix4cd::Zero();
  const Eigen::Matrix2cd a = factor_matrix(c.target_op).adjoint();
  const Eigen::Matrix2cd b = factor_matrix(c.control_op).adjoint();
  for (int i = 0; i < 2; ++i) {
    for (int j = 0; j < 2; ++j) {
      u.block<2, 2>(2 * i, 2 * j) = a(i, j) * b;
    }
  }
  return DensityMatrix(2, u * rho.mat() * u.adjoint());
}

}  // namespace tcnot
