#include "tcnot/tomography.hpp"

#include "tcnot/protocol.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace tcnot::tomography {

namespace {

const std::array<const char*, 4> kBasisInputs = {"HH", "HV", "VH", "VV"};

Eigen::Vector2cd basis_vector(MeasBasis basis, int outcome) {
  const double s = 1.0 / std::sqrt(2.0);
  Eigen::Vector2cd v;
  switch (basis) {
    case MeasBasis::ZZ:
      v << (outcome == 0 ? 1.0 : 0.0), (outcome == 0 ? 0.0 : 1.0);
      break;
    case MeasBasis::XX:
      v << s, (outcome == 0 ? s : -s);
      break;
    case MeasBasis::YY:
      // L = (H + iV)/sqrt2 is the +1 eigenvector of Y (Y = iXZ).
      v << s, (outcome == 0 ? cx{0, s} : cx{0, -s});
      break;
  }
  return v;
}

// Samples an index from a 4-entry distribution (renormalizing internally).
int sample_categorical(const std::array<double, 4>& p,
                       std::mt19937_64& rng) {
  double total = 0.0;
  for (double x : p) total += x;
  std::uniform_real_distribution<double> unif(0.0, total);
  double u = unif(rng);
  for (int i = 0; i < 3; ++i) {
    if (u < p[static_cast<std::size_t>(i)]) return i;
    u -= p[static_cast<std::size_t>(i)];
  }
  return 3;
}

}  // namespace

GateRunner ideal_runner() {
  return [](const QubitState& input) {
    std::vector<GateBranch> branches;
    branches.reserve(16);
    for (BellKind k13 : kAllBellKinds) {
      for (BellKind k25 : kAllBellKinds) {
        protocol::GateRun run = protocol::teleport_cnot(input, k13, k25);
        branches.push_back(GateBranch{
            run.branch_prob, DensityMatrix::from_pure(run.corrected_output)});
      }
    }
    return branches;
  };
}

DensityMatrix pooled_rho(const std::vector<GateBranch>& branches) {
  if (branches.empty()) throw std::invalid_argument("no branches to pool");
  const int n = branches.front().rho.num_qubits();
  Eigen::MatrixXcd acc = Eigen::MatrixXcd::Zero(branches.front().rho.mat().rows(),
                                                branches.front().rho.mat().cols());
  double total = 0.0;
  for (const GateBranch& b : branches) {
    if (b.rho.num_qubits() != n) {
      throw std::invalid_argument("branch density matrices differ in size");
    }
    acc += b.prob * b.rho.mat();
    total += b.prob;
  }
  if (total < 1e-14) throw std::invalid_argument("branches have zero weight");
  return DensityMatrix(n, acc / total);
}

int truth_table_expected(int input_index) {
  // Target flips iff control (second qubit) is V: HH->HH, HV->VV, VH->VH,
  // VV->HV.
  static constexpr std::array<int, 4> expected = {0, 3, 2, 1};
  return expected.at(static_cast<std::size_t>(input_index));
}

TruthTableResult truth_table(const GateRunner& runner,
                             long long shots_per_input, std::uint64_t seed) {
  if (shots_per_input <= 0) {
    throw std::invalid_argument("shots_per_input must be positive");
  }
  std::mt19937_64 rng(seed);
  TruthTableResult out;
  out.shots_per_input = shots_per_input;

  long long pooled_hits = 0;
  double var_sum = 0.0;
  for (int i = 0; i < 4; ++i) {
    const QubitState input = QubitState::ket(kBasisInputs[static_cast<std::size_t>(i)]);
    const std::vector<GateBranch> branches = runner(input);

    // Conditional outcome distribution, pooled over branches.
    const DensityMatrix rho = pooled_rho(branches);
    const std::array<double, 4> p = basis_probabilities(rho, MeasBasis::ZZ);

    for (long long s = 0; s < shots_per_input; ++s) {
      const int outcome = sample_categorical(p, rng);
      ++out.counts[static_cast<std::size_t>(i)][static_cast<std::size_t>(outcome)];
    }
    const long long hits =
        out.counts[static_cast<std::size_t>(i)]
                  [static_cast<std::size_t>(truth_table_expected(i))];
    pooled_hits += hits;
    out.fidelities[static_cast<std::size_t>(i)] =
        static_cast<double>(hits) / static_cast<double>(shots_per_input);
    out.stderrs[static_cast<std::size_t>(i)] =
        stderr_binomial(hits, shots_per_input);
    var_sum += out.stderrs[static_cast<std::size_t>(i)] *
               out.stderrs[static_cast<std::size_t>(i)];
  }

  out.average = (out.fidelities[0] + out.fidelities[1] + out.fidelities[2] +
                 out.fidelities[3]) /
                4.0;
  out.stderr_mean = std::sqrt(var_sum) / 4.0;
  out.stderr_pooled = stderr_binomial(pooled_hits, 4 * shots_per_input);
  return out;
}

std::array<double, 4> basis_probabilities(const DensityMatrix& rho,
                                          MeasBasis basis) {
  if (rho.num_qubits() != 2) {
    throw std::invalid_argument("basis readout expects a 2-qubit state");
  }
  std::array<double, 4> p{};
  for (int a = 0; a < 2; ++a) {
    for (int b = 0; b < 2; ++b) {
      const Eigen::Vector2cd va = basis_vector(basis, a);
      const Eigen::Vector2cd vb = basis_vector(basis, b);
      Eigen::Vector4cd v;
      for (int i = 0; i < 2; ++i) {
        for (int j = 0; j < 2; ++j) {
          v(2 * i + j) = va(i) * vb(j);
        }
      }
      const cx val = v.dot(rho.mat() * v);
      p[static_cast<std::size_t>(2 * a + b)] = std::max(0.0, val.real());
    }
  }
  return p;
}

std::array<long long, 4> sample_basis_counts(const DensityMatrix& rho,
                                             MeasBasis basis, long long shots,
                                             std::mt19937_64& rng) {
  const std::array<double, 4> p = basis_probabilities(rho, basis);
  std::array<long long, 4> counts{};
  for (long long s = 0; s < shots; ++s) {
    ++counts[static_cast<std::size_t>(sample_categorical(p, rng))];
  }
  return counts;
}

double fidelity_from_expectations(double exx, double eyy, double ezz) {
  return 0.25 * (1.0 + exx - eyy + ezz);
}

FidelityClass classify_fidelity(double fidelity) {
  if (!(fidelity >= 0.0 && fidelity <= 1.0)) {
    throw std::invalid_argument("fidelity " + std::to_string(fidelity) +
                                " outside [0, 1]");
  }
  return FidelityClass{fidelity > kEntanglementBound,
                       fidelity > kEstimationBound};
}

namespace {

SettingEstimate exact_setting(const DensityMatrix& rho,
                              const PauliString& p) {
  return SettingEstimate{expectation(rho, p), 0.0, 0};
}

SettingEstimate setting_from_counts(const std::array<long long, 4>& counts) {
  const long long n = counts[0] + counts[1] + counts[2] + counts[3];
  if (n <= 0) {
    throw std::invalid_argument("measurement setting has no counts");
  }
  // Outcomes 0 and 3 agree (eigenvalue +1), 1 and 2 disagree.
  const long long agree = counts[0] + counts[3];
  const double value =
      static_cast<double>(agree - (n - agree)) / static_cast<double>(n);
  return SettingEstimate{value, stderr_parity(agree, n), n};
}

FidelityReport assemble_report(SettingEstimate exx, SettingEstimate eyy,
                               SettingEstimate ezz) {
  FidelityReport rep;
  rep.exx = exx;
  rep.eyy = eyy;
  rep.ezz = ezz;
  rep.fidelity =
      fidelity_from_expectations(exx.value, eyy.value, ezz.value);
  rep.stderr_ = 0.25 * std::sqrt(exx.stderr_ * exx.stderr_ +
                                 eyy.stderr_ * eyy.stderr_ +
                                 ezz.stderr_ * ezz.stderr_);
  // Sampled estimates may poke past [0, 1]; classify the clamped value but
  // report the raw estimate.
  const FidelityClass c =
      classify_fidelity(std::clamp(rep.fidelity, 0.0, 1.0));
  rep.entangled = c.entangled;
  rep.beats_estimation = c.beats_estimation;
  return rep;
}

}  // namespace

FidelityReport three_setting_fidelity(const DensityMatrix& rho) {
  return assemble_report(exact_setting(rho, PauliString::parse("XX")),
                         exact_setting(rho, PauliString::parse("YY")),
                         exact_setting(rho, PauliString::parse("ZZ")));
}

FidelityReport three_setting_fidelity_from_counts(
    const std::array<long long, 4>& zz, const std::array<long long, 4>& xx,
    const std::array<long long, 4>& yy) {
  return assemble_report(setting_from_counts(xx), setting_from_counts(yy),
                         setting_from_counts(zz));
}

double stderr_binomial(long long k, long long n) {
  if (n <= 0) throw std::invalid_argument("sample size must be positive");
  if (k < 0 || k > n) throw std::invalid_argument("count outside [0, n]");
  const double p = static_cast<double>(k) / static_cast<double>(n);
  return std::sqrt(p * (1.0 - p) / static_cast<double>(n));
}

double stderr_parity(long long n_agree, long long n_total) {
  return 2.0 * stderr_binomial(n_agree, n_total);
}

}  // namespace tcnot::tomography
