// protocol.hpp
// Teleportation-based controlled-NOT on polarization qubits.
//
// Photon roles: 1 = input target, 2 = input control, 3..6 = the four-photon
// resource state chi = 1/2 (|HH>+|VV>)_34 |HH>_56 + 1/2 (|HV>+|VH>)_34
// |VV>_56. Bell measurements on (1,3) and (2,5) teleport the gate onto
// photons 4 (target out) and 6 (control out), up to a per-branch Pauli
// correction that is a function of the two Bell outcomes alone.

#pragma once

#include "tcnot/optics.hpp"
#include "tcnot/qstate.hpp"

#include <array>
#include <random>
#include <vector>

namespace tcnot::protocol {

using optics::Mode;
using optics::OpticalState;

// Spatial mode ids used by the optical pipelines.
inline constexpr Mode kMode1 = 1, kMode2 = 2, kMode3 = 3, kMode4 = 4,
                      kMode5 = 5, kMode6 = 6;

// Resource state by circuit: two |phi+> pairs on (3,4) and (5,6), then a
// CNOT with target photon 4 and control photon 6.
QubitState build_chi_circuit();

struct ChiOptical {
  QubitState state;      // post-selected four-photon state on modes 3,4,5,6
  double success_prob = 0.0;
};

// Resource state by interference: |phi+>_34 x |phi+>_56, the partially
// polarizing splitter (T_H=1, T_V=1/3) across modes 4 and 6, one balancing
// splitter (T_H=1/3, T_V=1) in each output arm, half-wave plates at 22.5
// degrees on modes 3 and 4, then four-fold post-selection. Success
// probability is 1/9. Pass apply_hwps=false to stop before the wave plates.
ChiOptical build_chi_optical(bool apply_hwps = true);

struct BsmBranch {
  BellKind kind;
  double prob = 0.0;
  std::optional<QubitState> remainder;  // absent when prob ~ 0
};

// All four Bell projections of qubits (qa, qb); probabilities sum to 1.
std::array<BsmBranch, 4> bsm_ideal(const QubitState& s, int qa, int qb);

// Detector click pattern of one optical Bell-state measurement. Each of the
// two analysis arms ends in a +/- polarization split; phi+ lights equal
// signs, phi- opposite signs, and psi+/- never produce an arm coincidence.
enum class Coincidence : std::uint8_t {
  PlusPlus,
  MinusMinus,
  PlusMinus,
  MinusPlus
};

const char* to_string(Coincidence c);

struct BsmOutcome {
  BellKind kind;
  Coincidence pattern;
};

BellKind kind_for_pattern(Coincidence c);

// Mode plan of one optical Bell measurement: photons enter on in_a/in_b;
// after the analysis chain, in_a/in_b carry the "+" detectors and
// minus_a/minus_b the "-" detectors.
struct BsmStation {
  Mode in_a, in_b;
  Mode minus_a, minus_b;
};

// Analysis chain: polarizing splitter across the inputs, a zero-degree
// half-wave plate on the first output arm (compensates the splitter's
// reflection phases), 22.5-degree plates on both arms, then a +/- split in
// each arm.
OpticalState apply_bsm_chain(const OpticalState& s, const BsmStation& st);

struct OpticalBsmBranch {
  BsmOutcome outcome;
  double prob = 0.0;
  OpticalState remainder;
};

struct OpticalBsmResult {
  std::vector<OpticalBsmBranch> branches;  // the four click patterns
  double discard_prob = 0.0;               // no arm coincidence
};

// Runs the chain and projects each of the four two-fold click patterns,
// assuming exactly one photon reaches each analysis arm in accepted events.
OpticalBsmResult bsm_optical(const OpticalState& s, const BsmStation& st);

// Pauli feed-forward for a Bell-outcome pair; 16 entries, involutions up to
// phase, identity on (phi+, phi+).
class CorrectionTable {
 public:
  static const CorrectionTable& canonical();

  Correction at(BellKind k13, BellKind k25) const;
  // Test hook: deliberately corrupt one entry.
  CorrectionTable with_entry(BellKind k13, BellKind k25, Correction c) const;

 private:
  std::array<Correction, 16> entries_{};
};

Correction correction_for(BellKind k13, BellKind k25);

// Reference gate on a 2-qubit register (target = qubit 0, control = qubit
// 1): flips the target iff the control is V.
QubitState cnot_reference(const QubitState& input);

struct GateRun {
  BellKind outcome13, outcome25;
  double branch_prob = 0.0;
  QubitState raw_output;        // post-measurement state on photons (4,6)
  QubitState corrected_output;  // raw_output with the branch correction
};

// Teleports the gate through one chosen Bell-outcome branch.
GateRun teleport_cnot(const QubitState& input, BellKind k13, BellKind k25);

// Samples the branch from the joint outcome distribution.
GateRun teleport_cnot_sampled(const QubitState& input, std::mt19937_64& rng);

struct DecompositionBranch {
  BellKind k13, k25;
  double prob = 0.0;
  double overlap_sq = 0.0;   // |<corrected | cnot_reference(input)>|^2
  double residual_dev = 0.0; // max |raw - expected Pauli residual| per entry
  bool match = false;
};

struct DecompositionReport {
  std::array<DecompositionBranch, 16> branches{};
  double prob_sum = 0.0;
  bool all_match = false;
};

// Checks, for every Bell-outcome pair, that the raw post-measurement state
// equals the table's Pauli factors applied to the ideal gate output (exact
// phases), and that the corrected state matches the ideal output.
DecompositionReport verify_decomposition(const QubitState& input,
                                         double tol = kTolChain);
DecompositionReport verify_decomposition(const QubitState& input,
                                         const CorrectionTable& table,
                                         double tol = kTolChain);

}  // namespace tcnot::protocol
