// tomography.hpp
// Truth-table estimation and the three-measurement-setting fidelity bound
// for the gate's entangling output.
//
// The target output (|HH>+|VV>)/sqrt2 is the +1 eigenstate of XX and ZZ and
// the -1 eigenstate of YY, so its fidelity needs only the three diagonal
// settings: F = (1 + <XX> - <YY> + <ZZ>)/4.

#pragma once

#include "tcnot/qstate.hpp"

#include <array>
#include <cstdint>
#include <functional>
#include <random>
#include <vector>

namespace tcnot::tomography {

// Fidelity above 1/2 witnesses entanglement; 2/5 is the best any
// state-estimation strategy on a single copy can reach.
inline constexpr double kEntanglementBound = 0.50;
inline constexpr double kEstimationBound = 0.40;

// One Bell-outcome branch of a gate execution: its probability and the
// corrected conditional output state.
struct GateBranch {
  double prob = 0.0;
  DensityMatrix rho;
};

// A gate backend maps a 2-qubit input to its outcome branches. Branch
// probabilities need not reach 1 (heralded gates discard events); sampling
// conditions on the listed branches.
using GateRunner = std::function<std::vector<GateBranch>(const QubitState&)>;

// Backend running the exact teleportation identity over all 16 Bell-outcome
// pairs.
GateRunner ideal_runner();

// Probability-weighted average of the branch states.
DensityMatrix pooled_rho(const std::vector<GateBranch>& branches);

struct TruthTableResult {
  // counts[i][j]: input i produced output j, both indexed HH,HV,VH,VV.
  std::array<std::array<long long, 4>, 4> counts{};
  std::array<double, 4> fidelities{};    // fraction in the expected cell
  std::array<double, 4> stderrs{};       // per-input binomial error
  double average = 0.0;
  double stderr_mean = 0.0;    // quadrature propagation of the four rows
  double stderr_pooled = 0.0;  // binomial error of the pooled hit fraction
  long long shots_per_input = 0;
};

// Runs the four polarization basis inputs through the gate, measuring both
// outputs in H/V; expected outputs follow the target-flips-iff-control-V
// logic.
TruthTableResult truth_table(const GateRunner& runner,
                             long long shots_per_input, std::uint64_t seed);

// Expected truth-table output index for input index i (HH,HV,VH,VV order).
int truth_table_expected(int input_index);

enum class MeasBasis { ZZ, XX, YY };  // H/V, +/-, L/R per qubit

// Samples `shots` two-qubit readouts of rho in the given product basis;
// outcome index is (first qubit)*2 + (second qubit) with 0 the +1-like
// eigenvector (H, +, L).
std::array<long long, 4> sample_basis_counts(const DensityMatrix& rho,
                                             MeasBasis basis, long long shots,
                                             std::mt19937_64& rng);

// Exact outcome distribution for the same measurement.
std::array<double, 4> basis_probabilities(const DensityMatrix& rho,
                                          MeasBasis basis);

struct SettingEstimate {
  double value = 0.0;
  double stderr_ = 0.0;
  long long shots = 0;
};

struct FidelityReport {
  SettingEstimate exx, eyy, ezz;
  double fidelity = 0.0;
  double stderr_ = 0.0;
  bool entangled = false;         // fidelity > 1/2
  bool beats_estimation = false;  // fidelity > 2/5
};

// F = (1 + exx - eyy + ezz)/4.
double fidelity_from_expectations(double exx, double eyy, double ezz);

struct FidelityClass {
  bool entangled = false;
  bool beats_estimation = false;
};

// Strict thresholds; throws for fidelity outside [0, 1].
FidelityClass classify_fidelity(double fidelity);

// Exact three-setting report from a density matrix (zero stderr).
FidelityReport three_setting_fidelity(const DensityMatrix& rho);

// The same report from measured coincidence counts, one 4-vector per
// setting (outcome order as in sample_basis_counts). Throws when a setting
// has no counts.
FidelityReport three_setting_fidelity_from_counts(
    const std::array<long long, 4>& zz, const std::array<long long, 4>& xx,
    const std::array<long long, 4>& yy);

// sqrt(p(1-p)/n) for p = k/n; throws when n <= 0 or k outside [0, n].
double stderr_binomial(long long k, long long n);

// Standard error of (n_agree - n_disagree)/n, i.e. twice the binomial error
// of the agree fraction.
double stderr_parity(long long n_agree, long long n_total);

}  // namespace tcnot::tomography
