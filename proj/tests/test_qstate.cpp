// Qubit-register engine: gates, Bell states, projections, expectations.
#include "tcnot/qstate.hpp"

#include "test_util.hpp"

#include <doctest.h>

#include <Eigen/Dense>
#include <unsupported/Eigen/KroneckerProduct>

#include <cmath>
#include <complex>
#include <random>

using namespace tcnot;
using testutil::random_density;
using testutil::random_state;

namespace {
const double kSqrt2 = std::sqrt(2.0);

Eigen::Matrix2cd pauli2(char c) {
  Eigen::Matrix2cd m = Eigen::Matrix2cd::Zero();
  const cx i{0.0, 1.0};
  switch (c) {
    case 'I': m << 1, 0, 0, 1; break;
    case 'X': m << 0, 1, 1, 0; break;
    case 'Y': m << 0, -i, i, 0; break;
    case 'Z': m << 1, 0, 0, -1; break;
  }
  return m;
}
}  // namespace

TEST_CASE("ket parsing and indexing conventions") {
  // Qubit 0 is the most significant bit; H -> 0, V -> 1.
  const QubitState s = QubitState::ket("HV");
  CHECK(s.num_qubits() == 2);
  CHECK(std::abs(s.amp(0b01) - 1.0) < 1e-15);
  CHECK(s.to_ket_string().find("|HV>") != std::string::npos);

  const QubitState plus = QubitState::ket("+");
  CHECK(std::abs(plus.amp(0) - 1.0 / kSqrt2) < 1e-15);
  CHECK(std::abs(plus.amp(1) - 1.0 / kSqrt2) < 1e-15);

  // L = (H + iV)/sqrt2: the +1 eigenvector of Y = iXZ.
  const QubitState left = QubitState::ket("L");
  CHECK(std::abs(left.amp(0) - 1.0 / kSqrt2) < 1e-15);
  CHECK(std::abs(left.amp(1) - cx(0, 1.0 / kSqrt2)) < 1e-15);

  CHECK_THROWS(QubitState::ket("Q"));
  CHECK_THROWS(QubitState::ket("HHHHHHHHH"));  // register cap is 8
}

TEST_CASE("from_amplitudes validates and normalizes") {
  CHECK_THROWS(QubitState::from_amplitudes(2, {1.0, 0.0, 0.0}));
  // Unnormalized input is rejected unless normalization is requested.
  CHECK_THROWS(QubitState::from_amplitudes(1, {2.0, 0.0}));
  const QubitState s = QubitState::from_amplitudes(1, {2.0, 0.0}, true);
  CHECK(std::abs(s.amp(0) - 1.0) < 1e-15);
}

TEST_CASE("tensor products") {
  // |H> x |H> -> |HH>.
  const QubitState hh = tensor(QubitState::ket("H"), QubitState::ket("H"));
  CHECK(std::abs(hh.amp(0) - 1.0) < 1e-15);

  // |phi+> x |phi+> -> (HHHH + HHVV + VVHH + VVVV)/2.
  const QubitState pp =
      tensor(bell_state(BellKind::PhiPlus), bell_state(BellKind::PhiPlus));
  CHECK(std::abs(pp.amp(0b0000) - 0.5) < 1e-14);
  CHECK(std::abs(pp.amp(0b0011) - 0.5) < 1e-14);
  CHECK(std::abs(pp.amp(0b1100) - 0.5) < 1e-14);
  CHECK(std::abs(pp.amp(0b1111) - 0.5) < 1e-14);
  CHECK(std::abs(pp.amp(0b0101)) < 1e-14);

  // Norm multiplicativity on random states.
  std::mt19937_64 rng(11);
  for (int k = 0; k < 20; ++k) {
    const QubitState a = random_state(2, rng), b = random_state(3, rng);
    CHECK(std::abs(tensor(a, b).norm2() - 1.0) < 1e-12);
  }

  CHECK_THROWS(tensor(random_state(5, rng), random_state(4, rng)));
}

TEST_CASE("controlled-NOT logic table (first qubit target)") {
  // |H>|H> -> |H>|H>, |V>|V> -> |H>|V>.
  CHECK(overlap_sq(apply_cnot(QubitState::ket("HH"), 0, 1),
                   QubitState::ket("HH")) == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(overlap_sq(apply_cnot(QubitState::ket("VV"), 0, 1),
                   QubitState::ket("HV")) == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(overlap_sq(apply_cnot(QubitState::ket("HV"), 0, 1),
                   QubitState::ket("VV")) == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(overlap_sq(apply_cnot(QubitState::ket("VH"), 0, 1),
                   QubitState::ket("VH")) == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("single-qubit gates: conventions and unitarity") {
  // Y|H> = i|V>, Y|V> = -i|H> (Y = iXZ).
  const QubitState yh = apply_y(QubitState::ket("H"), 0);
  CHECK(std::abs(yh.amp(1) - cx(0, 1)) < 1e-15);
  const QubitState yv = apply_y(QubitState::ket("V"), 0);
  CHECK(std::abs(yv.amp(0) - cx(0, -1)) < 1e-15);

  // H twice is the identity.
  std::mt19937_64 rng(12);
  const QubitState s = random_state(3, rng);
  const QubitState hh = apply_h(apply_h(s, 1), 1);
  CHECK(overlap_sq(hh, s) == doctest::Approx(1.0).epsilon(1e-12));

  // All gates preserve norm.
  QubitState t = random_state(4, rng);
  t = apply_x(t, 0);
  t = apply_y(t, 1);
  t = apply_z(t, 2);
  t = apply_h(t, 3);
  t = apply_cnot(t, 0, 2);
  CHECK(std::abs(t.norm2() - 1.0) < 1e-12);

  CHECK_THROWS(apply_x(s, 3));  // out of range for 3 qubits
}

TEST_CASE("Bell states and orthonormality") {
  const QubitState pp = bell_state(BellKind::PhiPlus);
  CHECK(std::abs(pp.amp(0) - 1.0 / kSqrt2) < 1e-15);
  CHECK(std::abs(pp.amp(3) - 1.0 / kSqrt2) < 1e-15);

  const QubitState pm = bell_state(BellKind::PsiMinus);
  CHECK(std::abs(pm.amp(1) - 1.0 / kSqrt2) < 1e-15);
  CHECK(std::abs(pm.amp(2) + 1.0 / kSqrt2) < 1e-15);

  // Gram matrix = identity.
  for (BellKind a : kAllBellKinds) {
    for (BellKind b : kAllBellKinds) {
      const cx g = overlap(bell_state(a), bell_state(b));
      CHECK(std::abs(g - (a == b ? 1.0 : 0.0)) < 1e-12);
    }
  }
}

TEST_CASE("project_bell against a dense projector oracle") {
  // phi+ on (0,1) of |phi+>|H| -> probability 1, remainder |H>.
  const QubitState s1 =
      tensor(bell_state(BellKind::PhiPlus), QubitState::ket("H"));
  const BellProjection p1 = project_bell(s1, 0, 1, BellKind::PhiPlus);
  CHECK(p1.prob == doctest::Approx(1.0).epsilon(1e-12));
  REQUIRE(p1.remainder.has_value());
  CHECK(overlap_sq(*p1.remainder, QubitState::ket("H")) ==
        doctest::Approx(1.0).epsilon(1e-12));

  // phi+ on (0,1) of |HHH>: brute-force oracle gives prob 1/2, remainder |H>.
  const QubitState s2 = QubitState::ket("HHH");
  const BellProjection p2 = project_bell(s2, 0, 1, BellKind::PhiPlus);
  CHECK(p2.prob == doctest::Approx(0.5).epsilon(1e-12));
  REQUIRE(p2.remainder.has_value());
  CHECK(overlap_sq(*p2.remainder, QubitState::ket("H")) ==
        doctest::Approx(1.0).epsilon(1e-12));

  // Independent oracle on a random state, pair (0,1): M = |B><B| (x) I.
  std::mt19937_64 rng(13);
  const QubitState s = random_state(3, rng);
  Eigen::VectorXcd v(8);
  for (int i = 0; i < 8; ++i) v(i) = s.amp(i);
  for (BellKind k : kAllBellKinds) {
    Eigen::Vector4cd b;
    for (int i = 0; i < 4; ++i) b(i) = bell_state(k).amp(i);
    const Eigen::Matrix4cd outer = b * b.adjoint();
    const Eigen::MatrixXcd proj =
        Eigen::kroneckerProduct(outer, Eigen::Matrix2cd::Identity());
    const double prob_oracle = (v.adjoint() * proj * v).real()(0, 0);
    const BellProjection p = project_bell(s, 0, 1, k);
    CHECK(p.prob == doctest::Approx(prob_oracle).epsilon(1e-10));
    if (p.remainder) {
      // Remainder oracle: (<B| (x) I) v, renormalized.
      Eigen::Vector2cd rem = Eigen::Vector2cd::Zero();
      for (int i = 0; i < 8; ++i) {
        rem(i & 1) += std::conj(b(i >> 1)) * v(i);
      }
      rem.normalize();
      const cx ov = std::conj(rem(0)) * p.remainder->amp(0) +
                    std::conj(rem(1)) * p.remainder->amp(1);
      CHECK(std::abs(ov) == doctest::Approx(1.0).epsilon(1e-10));
    }
  }
}

TEST_CASE("project_bell completeness and partial-trace reconstruction") {
  std::mt19937_64 rng(14);
  for (const auto& [qa, qb] :
       {std::pair{0, 2}, std::pair{1, 0}, std::pair{2, 1}}) {
    const QubitState s = random_state(3, rng);
    double total = 0.0;
    Eigen::MatrixXcd mix = Eigen::MatrixXcd::Zero(2, 2);
    for (BellKind k : kAllBellKinds) {
      const BellProjection p = project_bell(s, qa, qb, k);
      total += p.prob;
      if (p.remainder) {
        Eigen::Vector2cd r;
        r << p.remainder->amp(0), p.remainder->amp(1);
        mix += p.prob * (r * r.adjoint());
      }
    }
    CHECK(total == doctest::Approx(1.0).epsilon(1e-10));

    // Sum of prob-weighted remainders equals the partial trace over the pair.
    std::vector<int> keep;
    for (int q = 0; q < 3; ++q) {
      if (q != qa && q != qb) keep.push_back(q);
    }
    const DensityMatrix red = partial_trace_keep(s, keep);
    CHECK((mix - red.mat()).cwiseAbs().maxCoeff() < 1e-10);
  }
}

TEST_CASE("PauliString matrices match a literal Kronecker oracle") {
  const PauliString p = PauliString::parse("XYZI");
  Eigen::MatrixXcd oracle = pauli2('X');
  oracle = Eigen::kroneckerProduct(oracle, pauli2('Y')).eval();
  oracle = Eigen::kroneckerProduct(oracle, pauli2('Z')).eval();
  oracle = Eigen::kroneckerProduct(oracle, pauli2('I')).eval();
  CHECK((p.matrix() - oracle).cwiseAbs().maxCoeff() < 1e-15);
  CHECK(p.size() == 4);
  CHECK(p.str() == "XYZI");
  CHECK_THROWS(PauliString::parse("XQ"));

  // Asymmetric strings distinguish qubit order: on |HV>, Z acts as +1 on
  // qubit 0 (H) and -1 on qubit 1 (V).
  const DensityMatrix hv = DensityMatrix::from_pure(QubitState::ket("HV"));
  CHECK(expectation(hv, PauliString::parse("ZI")) ==
        doctest::Approx(1.0).epsilon(1e-12));
  CHECK(expectation(hv, PauliString::parse("IZ")) ==
        doctest::Approx(-1.0).epsilon(1e-12));
}

TEST_CASE("expectation values") {
  const DensityMatrix rho =
      DensityMatrix::from_pure(bell_state(BellKind::PhiPlus));
  CHECK(expectation(rho, PauliString::parse("ZZ")) ==
        doctest::Approx(1.0).epsilon(1e-12));
  CHECK(expectation(rho, PauliString::parse("XX")) ==
        doctest::Approx(1.0).epsilon(1e-12));

  // <YY> on phi+ is -1: verified against a direct 4x4 trace.
  const Eigen::MatrixXcd yy = Eigen::kroneckerProduct(pauli2('Y'), pauli2('Y'));
  const double oracle = (rho.mat() * yy).trace().real();
  CHECK(oracle == doctest::Approx(-1.0).epsilon(1e-12));
  CHECK(expectation(rho, PauliString::parse("YY")) ==
        doctest::Approx(oracle).epsilon(1e-12));

  CHECK(std::abs(expectation(DensityMatrix::maximally_mixed(2),
                             PauliString::parse("XX"))) < 1e-12);
  CHECK_THROWS(expectation(rho, PauliString::parse("X")));
}

TEST_CASE("fidelity_pure") {
  const DensityMatrix rho =
      DensityMatrix::from_pure(bell_state(BellKind::PhiPlus));
  CHECK(fidelity_pure(rho, bell_state(BellKind::PhiPlus)) ==
        doctest::Approx(1.0).epsilon(1e-12));
  CHECK(fidelity_pure(DensityMatrix::maximally_mixed(2),
                      bell_state(BellKind::PhiPlus)) ==
        doctest::Approx(0.25).epsilon(1e-12));

  // Random pure rho vs target equals |<t|psi>|^2.
  std::mt19937_64 rng(15);
  for (int k = 0; k < 25; ++k) {
    const QubitState psi = random_state(2, rng), t = random_state(2, rng);
    CHECK(fidelity_pure(DensityMatrix::from_pure(psi), t) ==
          doctest::Approx(overlap_sq(t, psi)).epsilon(1e-10));
  }
}

TEST_CASE("fidelity decomposes into the three-setting combination") {
  std::mt19937_64 rng(16);
  for (int k = 0; k < 50; ++k) {
    const DensityMatrix rho = random_density(2, rng);
    const double f = fidelity_pure(rho, bell_state(BellKind::PhiPlus));
    const double combo = 0.25 * (1.0 + expectation(rho, PauliString::parse("XX")) -
                                 expectation(rho, PauliString::parse("YY")) +
                                 expectation(rho, PauliString::parse("ZZ")));
    CHECK(f == doctest::Approx(combo).epsilon(1e-12));
  }
}

TEST_CASE("density-matrix validity") {
  std::mt19937_64 rng(17);
  const DensityMatrix rho = random_density(2, rng);
  const auto v = rho.validity();
  CHECK(v.hermiticity_dev < 1e-12);
  CHECK(v.trace_dev < 1e-12);
  CHECK(v.min_eigenvalue > -1e-12);
  CHECK(v.ok(1e-10, 1e-10, 1e-10));
}

TEST_CASE("correction factors: literal matrices and involution up to phase") {
  // factor_matrix(XZ) = [[0,-1],[1,0]] (X after Z).
  const Eigen::Matrix2cd xz = factor_matrix(PauliFactor::XZ);
  CHECK(std::abs(xz(0, 0)) < 1e-15);
  CHECK(std::abs(xz(0, 1) + 1.0) < 1e-15);
  CHECK(std::abs(xz(1, 0) - 1.0) < 1e-15);
  CHECK(std::abs(xz(1, 1)) < 1e-15);

  std::mt19937_64 rng(18);
  const QubitState s = random_state(2, rng);
  for (PauliFactor a : {PauliFactor::I, PauliFactor::X, PauliFactor::Z,
                        PauliFactor::XZ}) {
    for (PauliFactor b : {PauliFactor::I, PauliFactor::X, PauliFactor::Z,
                          PauliFactor::XZ}) {
      const Correction c{a, b};
      const QubitState twice =
          apply_correction(apply_correction(s, c, 0, 1), c, 0, 1);
      CHECK(overlap_sq(twice, s) == doctest::Approx(1.0).epsilon(1e-12));
    }
  }

  // Correction on a density matrix is conjugation by the same adjoint.
  const DensityMatrix rho = random_density(2, rng);
  const Correction cxz{PauliFactor::X, PauliFactor::Z};
  const DensityMatrix rc = apply_correction(rho, cxz, 0, 1);
  const Eigen::MatrixXcd u = Eigen::kroneckerProduct(
      factor_matrix(PauliFactor::X), factor_matrix(PauliFactor::Z));
  CHECK((rc.mat() - u.adjoint() * rho.mat() * u).cwiseAbs().maxCoeff() < 1e-12);
  CHECK_THROWS(apply_correction(DensityMatrix::maximally_mixed(1), cxz, 0, 1));
}
