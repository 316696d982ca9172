// noise.cpp

#include "tcnot/noise.hpp"

#include "tcnot/optics.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <future>
#include <random>
#include <stdexcept>
#include <thread>
#include <unordered_map>
#include <utility>

namespace tcnot::noise {

namespace {

using optics::FockConfig;
using optics::FockConfigHash;
using optics::Mode;
using optics::OpticalState;
using optics::PdbsSpec;
using optics::Pol;
using optics::SlotEntry;
using protocol::BsmStation;
using protocol::Coincidence;
using protocol::kMode1;
using protocol::kMode2;
using protocol::kMode3;
using protocol::kMode4;
using protocol::kMode5;
using protocol::kMode6;

constexpr Mode kLossPol1 = 101, kLossPol2 = 102;
constexpr Mode kLossBal4 = 104, kLossBal6 = 106;
constexpr BsmStation kStation13{kMode1, kMode3, 201, 203};
constexpr BsmStation kStation25{kMode2, kMode5, 202, 205};

const std::vector<Mode>& loss_modes() {
  static const std::vector<Mode> m = {kLossPol1, kLossPol2, kLossBal4,
                                      kLossBal6};
  return m;
}

// One joint emission pattern: n1/n2/n3 pairs from the sources feeding
// (1,2), (3,4), (5,6).
struct Sector {
  int n1 = 0, n2 = 0, n3 = 0;
  int total() const { return n1 + n2 + n3; }
  // Squared norm of the unnormalized emission term (each source's n-pair
  // term has norm^2 = n + 1).
  double norm2() const {
    return double(n1 + 1) * double(n2 + 1) * double(n3 + 1);
  }
};

// Emission sectors that can carry a six-fold event (>= 3 pairs) within the
// truncation; flags when n_max cut sectors that n_pairs_max allows.
std::vector<Sector> manifold_sectors(const NoiseParams& p, bool& truncated) {
  std::vector<Sector> out;
  truncated = false;
  for (int n1 = 0; n1 <= p.n_pairs_max; ++n1)
    for (int n2 = 0; n2 <= p.n_pairs_max; ++n2)
      for (int n3 = 0; n3 <= p.n_pairs_max; ++n3) {
        const int tot = n1 + n2 + n3;
        if (tot < 3) continue;
        if (2 * tot > p.n_max) {
          truncated = true;
          continue;
        }
        out.push_back({n1, n2, n3});
      }
  return out;
}

// Sector weight relative to the triple-single emission (1,1,1): the true
// weight prod_i g_i^(2 n_i) divided by max(g)^6, written so the g -> 0
// limit (every 3-pair sector equally likely) is exact instead of 0/0.
double sector_rel_weight(const Sector& s, const NoiseParams& p) {
  const double gref = std::max({p.g1, p.g2, p.g3});
  if (gref == 0.0) return s.total() == 3 ? 1.0 : 0.0;
  double w = std::pow(p.g1 / gref, s.n1) * std::pow(p.g2 / gref, s.n2) *
             std::pow(p.g3 / gref, s.n3);
  w *= std::pow(gref, s.total() - 3);
  return w * w;
}

// Modes partition into closed groups {1,3} -> station 13, {2,5} -> station
// 25, {4,6} -> outputs, so group photon budgets give exact feasibility.
bool sector_feasible(const Sector& s) {
  return s.n1 + s.n2 >= 2 && s.n1 + s.n3 >= 2 && s.n2 + s.n3 >= 2;
}

struct DistBranch {
  double weight = 1.0;
  bool tag_pdbs = false, tag_13 = false, tag_25 = false;
};

// Distinguishability as a convex mixture: at each interference site the
// incoming photon wave packets either overlap (weight v) or are perfectly
// distinguishable (weight 1-v, modeled by tagging one side).
std::vector<DistBranch> dist_branches(const NoiseParams& p) {
  const std::array<double, 3> v = {p.v_pdbs, p.v_bsm13, p.v_bsm25};
  std::vector<DistBranch> out;
  for (int mask = 0; mask < 8; ++mask) {
    double w = 1.0;
    for (int site = 0; site < 3; ++site)
      w *= ((mask >> site) & 1) ? 1.0 - v[site] : v[site];
    if (w == 0.0) continue;
    out.push_back(
        {w, bool(mask & 1), bool((mask >> 1) & 1), bool((mask >> 2) & 1)});
  }
  return out;
}

Eigen::Vector2cd perp_axis(const Eigen::Vector2cd& a) {
  return Eigen::Vector2cd(-std::conj(a(1)), std::conj(a(0)));
}

// Unitary with columns (axis, axis_perp): rotates the H/V pair emission
// into the (axis, axis_perp) pair emission.
Eigen::Matrix2cd basis_jones(const Eigen::Vector2cd& axis) {
  Eigen::Matrix2cd u;
  u.col(0) = axis;
  u.col(1) = perp_axis(axis);
  return u;
}

template <typename Pred>
OpticalState filter_terms(const OpticalState& s, Pred&& pred) {
  OpticalState out(s.n_max());
  for (const auto& [cfg, amp] : s.terms())
    if (pred(cfg)) out.add(cfg, amp);
  return out;
}

// Unnormalized emission term of one sector, rotated into the prepared input
// basis and sent through the initialization polarizers.
OpticalState prepped_state(const Sector& sec, const Eigen::Vector2cd& a,
                           const Eigen::Vector2cd& b, int n_max) {
  OpticalState s = optics::spdc_pairs_term(kMode1, kMode2, sec.n1, n_max);
  s = optics::product(s, optics::spdc_pairs_term(kMode3, kMode4, sec.n2,
                                                 n_max));
  s = optics::product(s, optics::spdc_pairs_term(kMode5, kMode6, sec.n3,
                                                 n_max));
  if (sec.n1 > 0) {
    s = optics::apply_jones(s, kMode1, basis_jones(a));
    s = optics::apply_jones(s, kMode2, basis_jones(b));
    s = optics::apply_polarizer(s, kMode1, a, kLossPol1);
    s = optics::apply_polarizer(s, kMode2, b, kLossPol2);
  }
  s = optics::prune_lost(s, loss_modes(), 6);
  s.prune_zeros();
  return s;
}

// Resource-state interferometer: the partially polarizing splitter across
// modes 4 and 6, its balancing splitters, and the 22.5-degree plates.
// Afterwards modes 4 and 6 are final, so condition on one photon in each
// and on enough photons remaining for both station coincidences.
OpticalState chi_stage(OpticalState s, bool tag_pdbs) {
  if (tag_pdbs) s = optics::tag_photons(s, kMode6, 1);
  s = optics::apply_beamsplitter(
      s, kMode4, kMode6, PdbsSpec::from_transmissions(1.0, 1.0 / 3.0));
  s = optics::apply_beamsplitter(
      s, kMode4, kLossBal4, PdbsSpec::from_transmissions(1.0 / 3.0, 1.0));
  s = optics::apply_beamsplitter(
      s, kMode6, kLossBal6, PdbsSpec::from_transmissions(1.0 / 3.0, 1.0));
  s = optics::apply_hwp(s, kMode3, 22.5);
  s = optics::apply_hwp(s, kMode4, 22.5);
  s = filter_terms(s, [](const FockConfig& c) {
    return c.photons_in_mode(kMode4) == 1 && c.photons_in_mode(kMode6) == 1 &&
           c.photons_in_mode(kMode1) + c.photons_in_mode(kMode3) >= 2 &&
           c.photons_in_mode(kMode2) + c.photons_in_mode(kMode5) >= 2;
  });
  s.prune_zeros();
  return s;
}

// Threshold detection at one station: each analysis arm must fire exactly
// one of its two detectors (any photon count behind it).
bool arm_fires_single(const FockConfig& c, Mode plus, Mode minus) {
  return (c.photons_in_mode(plus) >= 1) != (c.photons_in_mode(minus) >= 1);
}

OpticalState bsm_stage(OpticalState s, const BsmStation& st, bool tag_b) {
  if (tag_b) s = optics::tag_photons(s, st.in_b, 1);
  s = protocol::apply_bsm_chain(s, st);
  s = filter_terms(s, [&st](const FockConfig& c) {
    return arm_fires_single(c, st.in_a, st.minus_a) &&
           arm_fires_single(c, st.in_b, st.minus_b);
  });
  s.prune_zeros();
  return s;
}

Coincidence sign_pattern(const FockConfig& c, const BsmStation& st) {
  const bool a_plus = c.photons_in_mode(st.in_a) >= 1;
  const bool b_plus = c.photons_in_mode(st.in_b) >= 1;
  if (a_plus) return b_plus ? Coincidence::PlusPlus : Coincidence::PlusMinus;
  return b_plus ? Coincidence::MinusPlus : Coincidence::MinusMinus;
}

struct PatternAccum {
  Eigen::Matrix4cd rho = Eigen::Matrix4cd::Zero();
  double trace = 0.0;
};

using AccumArray = std::array<PatternAccum, 16>;

// Heralded-output extraction: group terms by everything except the output
// polarizations (detector multiplicities, loss photons, tags), read the
// coherent (pol4, pol6) 4-vector per group, and add its outer product. This
// is exactly the partial trace over the unread environment.
void accumulate_run(const OpticalState& s, double run_weight,
                    AccumArray& acc) {
  std::unordered_map<FockConfig, std::array<cx, 4>, FockConfigHash> groups;
  for (const auto& [cfg, amp] : s.terms()) {
    int pol4 = -1, pol6 = -1;
    std::uint8_t tag4 = 0, tag6 = 0;
    FockConfig env;
    for (std::size_t i = 0; i < cfg.num_slots(); ++i) {
      const SlotEntry e = cfg.slot(i);
      if (e.spatial == kMode4) {
        pol4 = int(e.pol);
        tag4 = e.tag;
      } else if (e.spatial == kMode6) {
        pol6 = int(e.pol);
        tag6 = e.tag;
      } else {
        env.add(e);
      }
    }
    if (pol4 < 0 || pol6 < 0) continue;  // filtered upstream
    env.add(kMode4, Pol::H, tag4, 1);
    env.add(kMode6, Pol::H, tag6, 1);
    groups[env][std::size_t(pol4 * 2 + pol6)] += amp;
  }
  for (const auto& [env, comps] : groups) {
    const int id = pattern_index(sign_pattern(env, kStation13),
                                 sign_pattern(env, kStation25));
    const Eigen::Vector4cd v(comps[0], comps[1], comps[2], comps[3]);
    acc[std::size_t(id)].rho += run_weight * (v * v.adjoint());
    acc[std::size_t(id)].trace += run_weight * v.squaredNorm();
  }
}

FullRunResult assemble(const AccumArray& acc, double manifold_weight,
                       bool truncated, bool already_corrected) {
  FullRunResult out;
  out.manifold_weight = manifold_weight;
  out.sectors_truncated = truncated;
  double tot = 0.0;
  for (const auto& a : acc) tot += a.trace;
  if (!(tot > 0.0) || !(manifold_weight > 0.0))
    throw std::runtime_error(
        "no accepted six-fold events at these parameters");
  out.accepted_weight = tot;
  out.sixfold_fraction = tot / manifold_weight;
  Eigen::Matrix4cd pooled = Eigen::Matrix4cd::Zero();
  double kept_prob = 0.0;
  for (int id = 0; id < 16; ++id) {
    const PatternAccum& a = acc[std::size_t(id)];
    if (a.trace <= tot * 1e-15) continue;
    const auto c13 = Coincidence(id / 4);
    const auto c25 = Coincidence(id % 4);
    const BellKind k13 = protocol::kind_for_pattern(c13);
    const BellKind k25 = protocol::kind_for_pattern(c25);
    Eigen::Matrix4cd m = a.rho / a.trace;
    m = (0.5 * (m + m.adjoint().eval())).eval();
    DensityMatrix rho(2, m);
    if (!already_corrected)
      rho = apply_correction(rho, protocol::correction_for(k13, k25), 0, 1);
    PatternBranch b{c13, c25, k13, k25, a.trace, a.trace / tot, rho};
    out.kind_pair_probs[std::size_t(kind_pair_index(k13, k25))] += b.prob;
    pooled += b.prob * rho.mat();
    kept_prob += b.prob;
    out.branches.push_back(std::move(b));
  }
  out.pooled = DensityMatrix(2, pooled / kept_prob);
  return out;
}

// Convex mixture of runs sharing the same emission manifold (the
// input-error mixture); branch states are already corrected.
FullRunResult mix_results(
    const std::vector<std::pair<double, const FullRunResult*>>& runs) {
  AccumArray acc{};
  double manifold = runs.front().second->manifold_weight;
  bool truncated = false;
  for (const auto& [w, r] : runs) {
    if (std::abs(r->manifold_weight - manifold) > 1e-12 * manifold)
      throw std::logic_error("mixed runs disagree on the emission manifold");
    truncated = truncated || r->sectors_truncated;
    for (const PatternBranch& b : r->branches) {
      const auto id = std::size_t(pattern_index(b.c13, b.c25));
      acc[id].rho += w * b.weight * b.rho.mat();
      acc[id].trace += w * b.weight;
    }
  }
  return assemble(acc, manifold, truncated, /*already_corrected=*/true);
}

}  // namespace

int pattern_index(Coincidence c13, Coincidence c25) {
  return int(c13) * 4 + int(c25);
}

int kind_pair_index(BellKind k13, BellKind k25) {
  if ((k13 != BellKind::PhiPlus && k13 != BellKind::PhiMinus) ||
      (k25 != BellKind::PhiPlus && k25 != BellKind::PhiMinus))
    throw std::invalid_argument(
        "only phi-type outcomes are detectable click patterns");
  return (k13 == BellKind::PhiMinus ? 2 : 0) +
         (k25 == BellKind::PhiMinus ? 1 : 0);
}

NoiseParams& NoiseParams::with_g(double g) {
  g1 = g2 = g3 = g;
  return *this;
}

NoiseParams& NoiseParams::with_visibility(double v) {
  v_pdbs = v_bsm13 = v_bsm25 = v;
  return *this;
}

void NoiseParams::validate() const {
  auto bad = [](const char* m) { throw std::invalid_argument(m); };
  if (!(g1 >= 0.0) || !(g2 >= 0.0) || !(g3 >= 0.0))
    bad("pair-emission weights must be >= 0");
  for (double v : {v_pdbs, v_bsm13, v_bsm25})
    if (!(v >= 0.0 && v <= 1.0)) bad("visibilities must lie in [0, 1]");
  if (!(input_error >= 0.0 && input_error <= 1.0))
    bad("input_error must lie in [0, 1]");
  if (n_pairs_max < 1 || n_pairs_max > 2) bad("n_pairs_max must be 1 or 2");
  if (n_max > optics::kPhotonCap) bad("n_max exceeds the photon cap");
  if (n_max < 6)
    throw std::length_error(
        "photon truncation below 6 cannot hold a six-fold event");
}

FullRunResult run_product_prep(const NoiseParams& params,
                               const Eigen::Vector2cd& a,
                               const Eigen::Vector2cd& b) {
  params.validate();
  if (a.norm() < 1e-12 || b.norm() < 1e-12)
    throw std::invalid_argument("preparation axes must be nonzero");
  const Eigen::Vector2cd an = a.normalized(), bn = b.normalized();

  bool truncated = false;
  const std::vector<Sector> sectors = manifold_sectors(params, truncated);
  const std::vector<DistBranch> branches = dist_branches(params);

  AccumArray acc{};
  double manifold_weight = 0.0;
  for (const Sector& sec : sectors) {
    const double sw = sector_rel_weight(sec, params);
    manifold_weight += sw * sec.norm2();
    if (sw == 0.0 || !sector_feasible(sec)) continue;
    const OpticalState prepped = prepped_state(sec, an, bn, params.n_max);
    if (prepped.term_count() == 0) continue;
    for (const DistBranch& db : branches) {
      OpticalState s = chi_stage(prepped, db.tag_pdbs);
      if (s.term_count() == 0) continue;
      s = bsm_stage(std::move(s), kStation13, db.tag_13);
      if (s.term_count() == 0) continue;
      s = bsm_stage(std::move(s), kStation25, db.tag_25);
      if (s.term_count() == 0) continue;
      accumulate_run(s, sw * db.weight, acc);
    }
  }
  return assemble(acc, manifold_weight, truncated,
                  /*already_corrected=*/false);
}

namespace {

// Product-state factorization |psi> = |a> x |b| via the singular value
// decomposition of the 2x2 amplitude matrix; throws when the input is
// entangled (the hardware prepares inputs with polarizers).
std::pair<Eigen::Vector2cd, Eigen::Vector2cd> factor_product(
    const QubitState& in) {
  if (in.num_qubits() != 2)
    throw std::invalid_argument("gate inputs are 2-qubit states");
  Eigen::Matrix2cd m;
  m << in.amp(0), in.amp(1), in.amp(2), in.amp(3);
  Eigen::JacobiSVD<Eigen::Matrix2cd> svd(
      m, Eigen::ComputeFullU | Eigen::ComputeFullV);
  if (svd.singularValues()(1) > 1e-9)
    throw std::invalid_argument(
        "pipeline inputs must be product states (polarizer preparation)");
  return {svd.matrixU().col(0), svd.matrixV().col(0).conjugate()};
}

}  // namespace

FullRunResult full_experiment_rho(const NoiseParams& params,
                                  const QubitState& input) {
  params.validate();
  const auto [a, b] = factor_product(input);
  FullRunResult main = run_product_prep(params, a, b);
  const double e = params.input_error;
  if (e == 0.0) return main;
  const Eigen::Vector2cd ap = perp_axis(a), bp = perp_axis(b);
  const FullRunResult r01 = run_product_prep(params, a, bp);
  const FullRunResult r10 = run_product_prep(params, ap, b);
  const FullRunResult r11 = run_product_prep(params, ap, bp);
  return mix_results({{1.0 - 0.75 * e, &main},
                      {0.25 * e, &r01},
                      {0.25 * e, &r10},
                      {0.25 * e, &r11}});
}

tomography::GateRunner noisy_runner(const NoiseParams& params) {
  params.validate();
  return [params](const QubitState& input) {
    const FullRunResult full = full_experiment_rho(params, input);
    std::vector<tomography::GateBranch> out;
    out.reserve(full.branches.size());
    for (const PatternBranch& b : full.branches)
      out.push_back({b.prob, b.rho});
    return out;
  };
}

ExperimentResult monte_carlo(const NoiseParams& params,
                             const QubitState& input, long long shots,
                             std::uint64_t seed) {
  if (shots < 3)
    throw std::invalid_argument("need at least one shot per setting");
  const FullRunResult full = full_experiment_rho(params, input);

  ExperimentResult res;
  res.shots = shots;
  res.seed = seed;
  res.rho_analytic = full.pooled;
  res.sixfold_rate_factor = full.sixfold_fraction;
  res.fidelity_analytic =
      fidelity_pure(full.pooled, protocol::cnot_reference(input));

  // Cumulative branch distribution and per-branch basis distributions.
  std::vector<double> cum;
  cum.reserve(full.branches.size());
  double total = 0.0;
  for (const PatternBranch& b : full.branches) {
    total += b.prob;
    cum.push_back(total);
  }
  std::vector<std::array<std::array<double, 4>, 3>> dists;
  dists.reserve(full.branches.size());
  for (const PatternBranch& b : full.branches)
    dists.push_back({
        tomography::basis_probabilities(b.rho, tomography::MeasBasis::ZZ),
        tomography::basis_probabilities(b.rho, tomography::MeasBasis::XX),
        tomography::basis_probabilities(b.rho, tomography::MeasBasis::YY),
    });

  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> uni(0.0, 1.0);
  for (long long s = 0; s < shots; ++s) {
    const double u = uni(rng) * total;
    const std::size_t bi = std::size_t(
        std::lower_bound(cum.begin(), cum.end(), u) - cum.begin());
    const std::size_t branch = std::min(bi, full.branches.size() - 1);
    const PatternBranch& b = full.branches[branch];
    res.pattern_counts[std::size_t(pattern_index(b.c13, b.c25))]++;
    res.kind_pair_counts[std::size_t(kind_pair_index(b.k13, b.k25))]++;

    const int setting = int(s % 3);  // ZZ, XX, YY
    const auto& dist = dists[branch][std::size_t(setting)];
    const double u2 = uni(rng);
    int out = 3;
    double red = 0.0;
    for (int k = 0; k < 4; ++k) {
      red += dist[std::size_t(k)];
      if (u2 < red) {
        out = k;
        break;
      }
    }
    auto& counts = setting == 0   ? res.counts_zz
                   : setting == 1 ? res.counts_xx
                                  : res.counts_yy;
    counts[std::size_t(out)]++;
  }

  res.fidelity_sampled = tomography::three_setting_fidelity_from_counts(
      res.counts_zz, res.counts_xx, res.counts_yy);
  const Eigen::Matrix4cd est =
      0.25 * (Eigen::Matrix4cd::Identity() +
              res.fidelity_sampled.exx.value * PauliString::parse("XX").matrix() +
              res.fidelity_sampled.eyy.value * PauliString::parse("YY").matrix() +
              res.fidelity_sampled.ezz.value * PauliString::parse("ZZ").matrix());
  res.rho_estimate = DensityMatrix(2, est);
  return res;
}

RateLedger rate_ledger() {
  RateLedger ledger;
  ledger.chi = protocol::build_chi_optical().success_prob;

  // Detectable fraction of one station on the uniform Bell mixture: the
  // teleportation branches are uniform over the four outcomes, of which the
  // two phi-type ones produce arm coincidences.
  const auto station_fraction = [](const BsmStation& st) {
    double f = 0.0;
    for (BellKind k : kAllBellKinds) {
      const OpticalState s =
          optics::from_qubit_state(bell_state(k), {st.in_a, st.in_b}, 2);
      const protocol::OpticalBsmResult r = protocol::bsm_optical(s, st);
      double p = 0.0;
      for (const auto& br : r.branches) p += br.prob;
      f += 0.25 * p;
    }
    return f;
  };
  ledger.bsm = station_fraction(kStation13) * station_fraction(kStation25);

  // Input initialization: one source pair through the two polarizers.
  const Eigen::Vector2cd h(1.0, 0.0);
  OpticalState s = optics::spdc_pairs_term(kMode1, kMode2, 1, 2)
                       .scaled(1.0 / std::sqrt(2.0));
  s = optics::apply_polarizer(s, kMode1, h, kLossPol1);
  s = optics::apply_polarizer(s, kMode2, h, kLossPol2);
  ledger.polarizer = optics::postselect(s, {kMode1, kMode2}).prob;

  ledger.total = ledger.chi * ledger.bsm * ledger.polarizer;
  return ledger;
}

SweepGrid SweepGrid::standard() {
  SweepGrid grid;
  grid.g_values = {0.0, 0.2, 0.4, 0.5, 0.8, 1.0};
  grid.v_values = {1.0, 0.9};
  grid.input_error_values = {0.0, 0.05};
  return grid;
}

SweepResult fidelity_sweep(const SweepGrid& grid, int threads) {
  if (grid.g_values.empty() || grid.v_values.empty() ||
      grid.input_error_values.empty())
    throw std::invalid_argument("sweep grid must not be empty");

  struct Task {
    double g, v, e;
  };
  std::vector<Task> tasks;
  for (double g : grid.g_values)
    for (double v : grid.v_values)
      for (double e : grid.input_error_values) tasks.push_back({g, v, e});

  const auto eval_point = [&grid](const Task& t) {
    SweepPoint pt;
    pt.g = t.g;
    pt.visibility = t.v;
    pt.input_error = t.e;
    try {
      NoiseParams p;
      p.with_g(t.g).with_visibility(t.v);
      p.input_error = t.e;
      p.n_pairs_max = grid.n_pairs_max;
      p.n_max = grid.n_max;
      p.validate();

      const Eigen::Vector2cd axes[2] = {Eigen::Vector2cd(1.0, 0.0),
                                        Eigen::Vector2cd(0.0, 1.0)};
      // The four computational preparations double as each other's
      // input-error mixture components.
      std::array<FullRunResult, 4> comp = {
          run_product_prep(p, axes[0], axes[0]),
          run_product_prep(p, axes[0], axes[1]),
          run_product_prep(p, axes[1], axes[0]),
          run_product_prep(p, axes[1], axes[1])};
      double truth_sum = 0.0;
      double sixfold_sum = 0.0;
      static const char* kLabels[4] = {"HH", "HV", "VH", "VV"};
      for (int i = 0; i < 4; ++i) {
        std::vector<std::pair<double, const FullRunResult*>> mix;
        for (int j = 0; j < 4; ++j)
          mix.push_back({i == j ? 1.0 - 0.75 * t.e : 0.25 * t.e,
                         &comp[std::size_t(j)]});
        const FullRunResult mixed = mix_results(mix);
        const QubitState target = protocol::cnot_reference(
            QubitState::ket(kLabels[i]));
        pt.f_truth[std::size_t(i)] = fidelity_pure(mixed.pooled, target);
        truth_sum += pt.f_truth[std::size_t(i)];
        sixfold_sum += 0.25 * mixed.sixfold_fraction;
      }
      pt.f_truth_avg = 0.25 * truth_sum;
      pt.sixfold_rate = sixfold_sum;

      const Eigen::Vector2cd plus(1.0 / std::sqrt(2.0), 1.0 / std::sqrt(2.0));
      const Eigen::Vector2cd minus(1.0 / std::sqrt(2.0),
                                   -1.0 / std::sqrt(2.0));
      const FullRunResult e00 = run_product_prep(p, axes[0], plus);
      const FullRunResult e01 = run_product_prep(p, axes[0], minus);
      const FullRunResult e10 = run_product_prep(p, axes[1], plus);
      const FullRunResult e11 = run_product_prep(p, axes[1], minus);
      const FullRunResult mixed = mix_results({{1.0 - 0.75 * t.e, &e00},
                                               {0.25 * t.e, &e01},
                                               {0.25 * t.e, &e10},
                                               {0.25 * t.e, &e11}});
      pt.f_entangle =
          fidelity_pure(mixed.pooled, bell_state(BellKind::PhiPlus));
    } catch (const std::length_error& ex) {
      pt.failed = true;
      pt.error = ex.what();
    } catch (const std::runtime_error& ex) {
      pt.failed = true;
      pt.error = ex.what();
    }
    return pt;
  };

  int nthreads = threads;
  if (nthreads <= 0) {
    const unsigned hw = std::thread::hardware_concurrency();
    nthreads = hw == 0 ? 1 : int(hw);
  }
  nthreads = std::min<int>(nthreads, int(tasks.size()));

  SweepResult result;
  result.points.resize(tasks.size());
  std::atomic<std::size_t> next{0};
  const auto worker = [&]() {
    for (std::size_t i; (i = next.fetch_add(1)) < tasks.size();)
      result.points[i] = eval_point(tasks[i]);
  };
  if (nthreads <= 1) {
    worker();
  } else {
    std::vector<std::future<void>> futs;
    futs.reserve(std::size_t(nthreads));
    for (int t = 0; t < nthreads; ++t)
      futs.push_back(std::async(std::launch::async, worker));
    for (auto& f : futs) f.get();
  }

  // Monotonicity flags along the grid axes.
  const std::size_t nv = grid.v_values.size();
  const std::size_t ne = grid.input_error_values.size();
  const auto at = [&](std::size_t ig, std::size_t iv,
                      std::size_t ie) -> const SweepPoint& {
    return result.points[ig * nv * ne + iv * ne + ie];
  };
  constexpr double kSlack = 1e-9;
  for (std::size_t iv = 0; iv < nv; ++iv)
    for (std::size_t ie = 0; ie < ne; ++ie)
      for (std::size_t ig = 1; ig < grid.g_values.size(); ++ig) {
        const SweepPoint& lo = at(ig - 1, iv, ie);
        const SweepPoint& hi = at(ig, iv, ie);
        if (lo.failed || hi.failed) continue;
        if (hi.f_truth_avg > lo.f_truth_avg + kSlack)
          result.monotone_truth_in_g = false;
        if (hi.f_entangle > lo.f_entangle + kSlack)
          result.monotone_entangle_in_g = false;
      }
  for (std::size_t ig = 0; ig < grid.g_values.size(); ++ig)
    for (std::size_t ie = 0; ie < ne; ++ie)
      for (std::size_t iv = 1; iv < nv; ++iv) {
        const SweepPoint& lo = at(ig, iv - 1, ie);
        const SweepPoint& hi = at(ig, iv, ie);
        if (lo.failed || hi.failed) continue;
        const bool ascending = grid.v_values[iv] >= grid.v_values[iv - 1];
        const SweepPoint& better = ascending ? hi : lo;
        const SweepPoint& worse = ascending ? lo : hi;
        if (better.f_truth_avg < worse.f_truth_avg - kSlack)
          result.monotone_truth_in_v = false;
        if (better.f_entangle < worse.f_entangle - kSlack)
          result.monotone_entangle_in_v = false;
      }
  for (const SweepPoint& pt : result.points) {
    if (pt.failed) continue;
    if (pt.f_truth_avg < pt.f_entangle - kSlack)
      result.truth_ge_entangle = false;
  }
  result.ledger = rate_ledger();
  return result;
}

}  // namespace tcnot::noise
