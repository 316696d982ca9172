#include "tcnot/protocol.hpp"

#include <cmath>
#include <stdexcept>

namespace tcnot::protocol {

namespace {

using optics::PdbsSpec;
using optics::Pol;

// Loss ports of the two balancing splitters in the resource-state chain.
constexpr Mode kChiLoss4 = 104;
constexpr Mode kChiLoss6 = 106;

int kind_index(BellKind k) { return static_cast<int>(k); }

}  // namespace

QubitState build_chi_circuit() {
  // Qubits (3,4,5,6) live at indices (0,1,2,3). The entangling step is a
  // CNOT with target photon 4 and control photon 6.
  QubitState pairs = tensor(bell_state(BellKind::PhiPlus),
                            bell_state(BellKind::PhiPlus));
  return apply_cnot(pairs, 1, 3);
}

ChiOptical build_chi_optical(bool apply_hwps) {
  const std::vector<Mode> modes = {kMode3, kMode4, kMode5, kMode6};
  OpticalState s = optics::from_qubit_state(
      tensor(bell_state(BellKind::PhiPlus), bell_state(BellKind::PhiPlus)),
      modes, 4);

  // Interference across the output arms: H passes, V is 1/3-transmitted.
  s = optics::apply_beamsplitter(s, kMode4, kMode6,
                                 PdbsSpec::from_transmissions(1.0, 1.0 / 3.0));
  // One balancing splitter per arm (H 1/3-transmitted, V passes); their
  // second ports are undetected loss modes.
  s = optics::apply_beamsplitter(s, kMode4, kChiLoss4,
                                 PdbsSpec::from_transmissions(1.0 / 3.0, 1.0));
  s = optics::apply_beamsplitter(s, kMode6, kChiLoss6,
                                 PdbsSpec::from_transmissions(1.0 / 3.0, 1.0));
  if (apply_hwps) {
    s = optics::apply_hwp(s, kMode3, 22.5);
    s = optics::apply_hwp(s, kMode4, 22.5);
  }

  const optics::PostSelection sel = optics::postselect(s, modes);
  ChiOptical out;
  out.success_prob = sel.prob;
  out.state = optics::to_qubit_state(sel.state, modes);
  return out;
}

std::array<BsmBranch, 4> bsm_ideal(const QubitState& s, int qa, int qb) {
  std::array<BsmBranch, 4> out;
  for (std::size_t i = 0; i < 4; ++i) {
    const BellKind kind = kAllBellKinds[i];
    BellProjection p = project_bell(s, qa, qb, kind);
    out[i] = BsmBranch{kind, p.prob, std::move(p.remainder)};
  }
  return out;
}

const char* to_string(Coincidence c) {
  switch (c) {
    case Coincidence::PlusPlus:
      return "++";
    case Coincidence::MinusMinus:
      return "--";
    case Coincidence::PlusMinus:
      return "+-";
    case Coincidence::MinusPlus:
      return "-+";
  }
  return "?";
}

BellKind kind_for_pattern(Coincidence c) {
  switch (c) {
    case Coincidence::PlusPlus:
    case Coincidence::MinusMinus:
      return BellKind::PhiPlus;
    case Coincidence::PlusMinus:
    case Coincidence::MinusPlus:
      return BellKind::PhiMinus;
  }
  throw std::invalid_argument("bad Coincidence");
}

OpticalState apply_bsm_chain(const OpticalState& s, const BsmStation& st) {
  OpticalState out = optics::apply_pbs(s, st.in_a, st.in_b);
  // The splitter reflects V with phase i on both crossings, which flips
  // phi+ and phi- relative to the plain polarization picture; a zero-degree
  // plate (H -> H, V -> -V) on one arm undoes that.
  out = optics::apply_hwp(out, st.in_a, 0.0);
  // Rotate the +/- basis onto H/V so the final splitters separate it.
  out = optics::apply_hwp(out, st.in_a, 22.5);
  out = optics::apply_hwp(out, st.in_b, 22.5);
  out = optics::apply_pbs(out, st.in_a, st.minus_a);
  out = optics::apply_pbs(out, st.in_b, st.minus_b);
  return out;
}

OpticalBsmResult bsm_optical(const OpticalState& s, const BsmStation& st) {
  const double total = s.norm2();
  const OpticalState analyzed = apply_bsm_chain(s, st);

  const std::array<std::pair<Coincidence,
                             std::vector<std::pair<Mode, int>>>,
                   4>
      patterns = {{
          {Coincidence::PlusPlus,
           {{st.in_a, 1}, {st.minus_a, 0}, {st.in_b, 1}, {st.minus_b, 0}}},
          {Coincidence::MinusMinus,
           {{st.in_a, 0}, {st.minus_a, 1}, {st.in_b, 0}, {st.minus_b, 1}}},
          {Coincidence::PlusMinus,
           {{st.in_a, 1}, {st.minus_a, 0}, {st.in_b, 0}, {st.minus_b, 1}}},
          {Coincidence::MinusPlus,
           {{st.in_a, 0}, {st.minus_a, 1}, {st.in_b, 1}, {st.minus_b, 0}}},
      }};

  OpticalBsmResult out;
  double sum = 0.0;
  for (const auto& [pattern, counts] : patterns) {
    optics::PostSelection sel = optics::project_pattern(analyzed, counts);
    sum += sel.prob;
    out.branches.push_back(OpticalBsmBranch{
        BsmOutcome{kind_for_pattern(pattern), pattern}, sel.prob,
        std::move(sel.state)});
  }
  out.discard_prob = std::max(0.0, total - sum);
  return out;
}

const CorrectionTable& CorrectionTable::canonical() {
  static const CorrectionTable table = [] {
    using F = PauliFactor;
    CorrectionTable t;
    auto set = [&t](BellKind a, BellKind b, F target, F control) {
      t.entries_[static_cast<std::size_t>(kind_index(a) * 4 + kind_index(b))] =
          Correction{target, control};
    };
    using K = BellKind;
    set(K::PhiPlus, K::PhiPlus, F::I, F::I);
    set(K::PhiPlus, K::PhiMinus, F::I, F::Z);
    set(K::PhiPlus, K::PsiPlus, F::X, F::X);
    set(K::PhiPlus, K::PsiMinus, F::X, F::XZ);
    set(K::PhiMinus, K::PhiPlus, F::Z, F::Z);
    set(K::PhiMinus, K::PhiMinus, F::Z, F::I);
    set(K::PhiMinus, K::PsiPlus, F::XZ, F::XZ);
    set(K::PhiMinus, K::PsiMinus, F::XZ, F::X);
    set(K::PsiPlus, K::PhiPlus, F::X, F::I);
    set(K::PsiPlus, K::PhiMinus, F::X, F::Z);
    set(K::PsiPlus, K::PsiPlus, F::I, F::X);
    set(K::PsiPlus, K::PsiMinus, F::I, F::XZ);
    set(K::PsiMinus, K::PhiPlus, F::XZ, F::Z);
    set(K::PsiMinus, K::PhiMinus, F::XZ, F::I);
    set(K::PsiMinus, K::PsiPlus, F::Z, F::XZ);
    set(K::PsiMinus, K::PsiMinus, F::Z, F::X);
    return t;
  }();
  return table;
}

Correction CorrectionTable::at(BellKind k13, BellKind k25) const {
  return entries_[static_cast<std::size_t>(kind_index(k13) * 4 +
                                           kind_index(k25))];
}

CorrectionTable CorrectionTable::with_entry(BellKind k13, BellKind k25,
                                            Correction c) const {
  CorrectionTable t = *this;
  t.entries_[static_cast<std::size_t>(kind_index(k13) * 4 +
                                      kind_index(k25))] = c;
  return t;
}

Correction correction_for(BellKind k13, BellKind k25) {
  return CorrectionTable::canonical().at(k13, k25);
}

QubitState cnot_reference(const QubitState& input) {
  if (input.num_qubits() != 2) {
    throw std::invalid_argument("gate input must be a 2-qubit state");
  }
  return apply_cnot(input, 0, 1);
}

namespace {

struct RawBranch {
  double prob = 0.0;
  QubitState raw;  // normalized post-measurement state on photons (4,6)
};

RawBranch project_branch(const QubitState& input, BellKind k13,
                         BellKind k25) {
  if (input.num_qubits() != 2) {
    throw std::invalid_argument("gate input must be a 2-qubit state");
  }
  // Joint register (1,2,3,4,5,6) at indices 0..5.
  const QubitState joint = tensor(input, build_chi_circuit());
  const BellProjection p1 = project_bell(joint, 0, 2, k13);
  if (!p1.remainder) return RawBranch{0.0, QubitState()};
  // Remainder holds (2,4,5,6); photons 2 and 5 sit at indices 0 and 2.
  const BellProjection p2 = project_bell(*p1.remainder, 0, 2, k25);
  if (!p2.remainder) return RawBranch{0.0, QubitState()};
  return RawBranch{p1.prob * p2.prob, *p2.remainder};
}

}  // namespace

GateRun teleport_cnot(const QubitState& input, BellKind k13, BellKind k25) {
  RawBranch b = project_branch(input, k13, k25);
  GateRun run;
  run.outcome13 = k13;
  run.outcome25 = k25;
  run.branch_prob = b.prob;
  run.raw_output = b.raw;
  run.corrected_output =
      apply_correction(b.raw, correction_for(k13, k25), 0, 1);
  return run;
}

GateRun teleport_cnot_sampled(const QubitState& input, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> unif(0.0, 1.0);

  const QubitState joint = tensor(input, build_chi_circuit());
  std::array<BellProjection, 4> first;
  double u = unif(rng);
  BellKind k13 = BellKind::PsiMinus;
  for (std::size_t i = 0; i < 4; ++i) {
    first[i] = project_bell(joint, 0, 2, kAllBellKinds[i]);
    if (u < first[i].prob || i == 3) {
      k13 = kAllBellKinds[i];
      break;
    }
    u -= first[i].prob;
  }
  const QubitState& rem = *first[static_cast<std::size_t>(kind_index(k13))]
                               .remainder;

  u = unif(rng);
  BellKind k25 = BellKind::PsiMinus;
  for (std::size_t i = 0; i < 4; ++i) {
    const BellProjection p = project_bell(rem, 0, 2, kAllBellKinds[i]);
    if (u < p.prob || i == 3) {
      k25 = kAllBellKinds[i];
      break;
    }
    u -= p.prob;
  }
  return teleport_cnot(input, k13, k25);
}

DecompositionReport verify_decomposition(const QubitState& input,
                                         double tol) {
  return verify_decomposition(input, CorrectionTable::canonical(), tol);
}

DecompositionReport verify_decomposition(const QubitState& input,
                                         const CorrectionTable& table,
                                         double tol) {
  const QubitState expected_out = cnot_reference(input);
  DecompositionReport report;
  std::size_t idx = 0;
  double prob_sum = 0.0;
  bool all = true;

  for (BellKind k13 : kAllBellKinds) {
    for (BellKind k25 : kAllBellKinds) {
      const RawBranch b = project_branch(input, k13, k25);
      const Correction corr = table.at(k13, k25);

      // The raw state must equal the table's factors applied to the ideal
      // output with exact phases, not merely up to a global phase.
      QubitState residual = apply_factor(expected_out, corr.target_op, 0);
      residual = apply_factor(residual, corr.control_op, 1);
      double dev = 0.0;
      for (std::size_t i = 0; i < residual.dim(); ++i) {
        dev = std::max(dev, std::abs(b.raw.amp(i) - residual.amp(i)));
      }

      const QubitState corrected = apply_correction(b.raw, corr, 0, 1);
      const double osq = overlap_sq(corrected, expected_out);

      DecompositionBranch& entry = report.branches[idx++];
      entry.k13 = k13;
      entry.k25 = k25;
      entry.prob = b.prob;
      entry.overlap_sq = osq;
      entry.residual_dev = dev;
      entry.match = dev <= tol && std::abs(osq - 1.0) <= tol;
      all = all && entry.match;
      prob_sum += b.prob;
    }
  }
  report.prob_sum = prob_sum;
  report.all_match = all && std::abs(prob_sum - 1.0) <= tol;
  return report;
}

}  // namespace tcnot::protocol
