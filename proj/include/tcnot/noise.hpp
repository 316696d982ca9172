// noise.hpp
// Full optical pipeline of the teleported gate with its dominant
// imperfections: multi-pair emission from the three down-conversion
// sources, partial distinguishability at each two-photon interference site,
// and classical input-preparation error.
//
// The pipeline is exact within its truncation: per emission sector
// (n1,n2,n3 pairs from the three sources) the six-or-more-photon state is
// propagated through preparation polarizers, the resource-state
// interferometer, and both Bell-measurement stations; detection is
// threshold-style (an analysis arm fires when at least one photon lands on
// exactly one of its two detectors), outputs are heralded on exactly one
// photon each, and everything not read out - loss ports, detector
// multiplicities, distinguishability tags - is traced over. That is
// precisely the mechanism by which a double pair can fake a valid six-fold
// coincidence and degrade the gate.
//
// Probabilities are reported relative to the >=3-pair emission manifold, so
// the noiseless single-pair corner reproduces the 1/72 six-fold bookkeeping
// exactly and conditional states have a clean g -> 0 limit.

#pragma once

#include "tcnot/protocol.hpp"
#include "tcnot/qstate.hpp"
#include "tcnot/tomography.hpp"

#include <array>
#include <cstdint>
#include <string>
#include <vector>

namespace tcnot::noise {

struct NoiseParams {
  // Squeezing weight per source: the n-pair amplitude scales as g^n. The
  // scale is abstract; only ratios of sector weights matter for conditional
  // states.
  double g1 = 0.1, g2 = 0.1, g3 = 0.1;
  // Interference visibility per two-photon site: 1 = perfectly
  // indistinguishable, 0 = fully distinguishable.
  double v_pdbs = 1.0, v_bsm13 = 1.0, v_bsm25 = 1.0;
  // Weight of a depolarized (white-noise) component in each prepared input.
  double input_error = 0.0;
  int n_pairs_max = 1;  // per-source pair-number truncation (1 or 2)
  int n_max = 8;        // total-photon truncation across all modes

  static NoiseParams ideal() { return NoiseParams{}; }
  NoiseParams& with_g(double g);
  NoiseParams& with_visibility(double v);
  void validate() const;
};

// One four-detector sign pattern (a two-fold click pattern per Bell
// station) together with its heralded output state.
struct PatternBranch {
  protocol::Coincidence c13, c25;
  BellKind k13, k25;
  double weight = 0.0;  // unnormalized accepted weight (relative units)
  double prob = 0.0;    // conditional on acceptance
  // Corrected output state on (target, control).
  DensityMatrix rho = DensityMatrix::maximally_mixed(2);
};

struct FullRunResult {
  std::vector<PatternBranch> branches;  // populated patterns only
  // Probability-weighted branch mix.
  DensityMatrix pooled = DensityMatrix::maximally_mixed(2);
  // Conditional probability of each detectable Bell-outcome pair given
  // acceptance, indexed (k13 == phi-)*2 + (k25 == phi-).
  std::array<double, 4> kind_pair_probs{};
  double accepted_weight = 0.0;  // sum of branch weights
  double manifold_weight = 0.0;  // weight of the >=3-pair emission manifold
  double sixfold_fraction = 0.0; // accepted_weight / manifold_weight
  // True when n_max cut emission sectors allowed by n_pairs_max.
  bool sectors_truncated = false;
};

// Conditional gate output for an exact product preparation a (target input)
// x b (control input); ignores input_error.
FullRunResult run_product_prep(const NoiseParams& params,
                               const Eigen::Vector2cd& a,
                               const Eigen::Vector2cd& b);

// Same, for a 2-qubit product input state (throws on entangled inputs: the
// hardware prepares inputs with polarizers). input_error mixes the
// preparation with the orthogonal product preparations.
FullRunResult full_experiment_rho(const NoiseParams& params,
                                  const QubitState& input);

// Gate backend view of the pipeline for truth_table and friends; branch
// probabilities are conditional on acceptance.
tomography::GateRunner noisy_runner(const NoiseParams& params);

// Index helpers for the 16 sign patterns (Coincidence enum order).
int pattern_index(protocol::Coincidence c13, protocol::Coincidence c25);
int kind_pair_index(BellKind k13, BellKind k25);

struct ExperimentResult {
  std::array<long long, 16> pattern_counts{};   // by pattern_index
  std::array<long long, 4> kind_pair_counts{};  // by kind_pair_index
  std::array<long long, 4> counts_zz{}, counts_xx{}, counts_yy{};
  tomography::FidelityReport fidelity_sampled;  // vs the entangled target
  double fidelity_analytic = 0.0;  // pooled state vs the ideal gate output
  // Diagonal-correlator reconstruction from the sampled settings.
  DensityMatrix rho_estimate = DensityMatrix::maximally_mixed(2);
  // Exact pooled conditional state.
  DensityMatrix rho_analytic = DensityMatrix::maximally_mixed(2);
  double sixfold_rate_factor = 0.0;
  long long shots = 0;
  std::uint64_t seed = 0;
};

// Samples `shots` accepted six-fold events: a click pattern each, plus a
// readout of the corrected output cycling through the ZZ/XX/YY settings.
// Deterministic for a fixed seed.
ExperimentResult monte_carlo(const NoiseParams& params,
                             const QubitState& input, long long shots,
                             std::uint64_t seed);

// Success-probability bookkeeping of the heralded gate, each factor derived
// from its own sub-pipeline: resource-state post-selection (1/9), joint
// detectable fraction of the two Bell measurements (1/4), input
// initialization through polarizers (1/2).
struct RateLedger {
  double chi = 0.0;
  double bsm = 0.0;
  double polarizer = 0.0;
  double total = 0.0;
};

RateLedger rate_ledger();

struct SweepGrid {
  std::vector<double> g_values{0.0};
  std::vector<double> v_values{1.0};
  std::vector<double> input_error_values{0.0};
  int n_pairs_max = 2;
  int n_max = 8;

  // Grid used by the bundled sweep command: spans clean operation down to
  // heavily multi-pair-degraded operation.
  static SweepGrid standard();
};

struct SweepPoint {
  double g = 0.0, visibility = 1.0, input_error = 0.0;
  std::array<double, 4> f_truth{};  // per computational input
  double f_truth_avg = 0.0;
  double f_entangle = 0.0;  // entangling-input output vs the Bell target
  double sixfold_rate = 0.0;
  bool failed = false;      // truncation error at this point
  std::string error;
};

struct SweepResult {
  std::vector<SweepPoint> points;  // g-major, then visibility, then error
  bool monotone_truth_in_g = true;
  bool monotone_entangle_in_g = true;
  bool monotone_truth_in_v = true;
  bool monotone_entangle_in_v = true;
  bool truth_ge_entangle = true;
  RateLedger ledger;
};

// Evaluates the analytic fidelities over the grid; grid points run in
// parallel (threads <= 0 picks the hardware count) and merge by index, so
// results are deterministic.
SweepResult fidelity_sweep(const SweepGrid& grid, int threads = 0);

}  // namespace tcnot::noise
