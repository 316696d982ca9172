// Full optical pipeline with multi-pair emission, distinguishability, and
// preparation error.
#include "tcnot/noise.hpp"

#include "test_util.hpp"

#include <doctest.h>

#include <Eigen/Dense>

#include <cmath>
#include <stdexcept>
#include <vector>

using namespace tcnot;
using namespace tcnot::noise;

namespace {

const Eigen::Vector2cd kAxisH(1.0, 0.0);
const Eigen::Vector2cd kAxisV(0.0, 1.0);

NoiseParams single_pair() {
  NoiseParams p;  // defaults: n_pairs_max = 1, all visibilities 1
  return p;
}

double truth_avg(const NoiseParams& p) {
  const char* inputs[4] = {"HH", "HV", "VH", "VV"};
  double sum = 0.0;
  for (const char* in : inputs) {
    const QubitState input = QubitState::ket(in);
    const FullRunResult r = full_experiment_rho(p, input);
    sum += fidelity_pure(r.pooled, protocol::cnot_reference(input));
  }
  return 0.25 * sum;
}

}  // namespace

TEST_CASE("parameter validation") {
  NoiseParams p;
  p.g1 = -0.1;
  CHECK_THROWS_AS(p.validate(), std::invalid_argument);
  p = NoiseParams{};
  p.v_bsm25 = 1.1;
  CHECK_THROWS_AS(p.validate(), std::invalid_argument);
  p = NoiseParams{};
  p.input_error = -0.01;
  CHECK_THROWS_AS(p.validate(), std::invalid_argument);
  p = NoiseParams{};
  p.n_pairs_max = 3;
  CHECK_THROWS_AS(p.validate(), std::invalid_argument);
  p = NoiseParams{};
  p.n_max = 5;
  CHECK_THROWS_AS(p.validate(), std::length_error);
  p = NoiseParams{};
  p.n_max = 13;
  CHECK_THROWS_AS(p.validate(), std::invalid_argument);
  CHECK_NOTHROW(NoiseParams::ideal().validate());

  CHECK_NOTHROW(NoiseParams{}.with_g(0.4).with_visibility(0.9).validate());
  NoiseParams shorthand = NoiseParams{}.with_g(0.4);
  CHECK(shorthand.g1 == 0.4);
  CHECK(shorthand.g2 == 0.4);
  CHECK(shorthand.g3 == 0.4);
}

TEST_CASE("index helpers") {
  using protocol::Coincidence;
  CHECK(pattern_index(Coincidence::PlusPlus, Coincidence::PlusPlus) == 0);
  CHECK(pattern_index(Coincidence::MinusPlus, Coincidence::PlusMinus) == 14);
  CHECK(kind_pair_index(BellKind::PhiPlus, BellKind::PhiPlus) == 0);
  CHECK(kind_pair_index(BellKind::PhiMinus, BellKind::PhiPlus) == 2);
  CHECK(kind_pair_index(BellKind::PhiMinus, BellKind::PhiMinus) == 3);
  CHECK_THROWS_AS(kind_pair_index(BellKind::PsiPlus, BellKind::PhiPlus),
                  std::invalid_argument);
}

TEST_CASE("single-pair corner reproduces the exact gate") {
  const NoiseParams p = single_pair();
  const char* inputs[4] = {"HH", "HV", "VH", "VV"};
  for (const char* in : inputs) {
    const QubitState input = QubitState::ket(in);
    const FullRunResult r = full_experiment_rho(p, input);

    // All 16 sign patterns fire with equal conditional probability.
    REQUIRE(r.branches.size() == 16);
    double total = 0.0;
    for (const PatternBranch& b : r.branches) {
      CHECK(std::abs(b.prob - 1.0 / 16.0) < 1e-12);
      CHECK(protocol::kind_for_pattern(b.c13) == b.k13);
      CHECK(protocol::kind_for_pattern(b.c25) == b.k25);
      total += b.prob;
      // Every branch, corrected, is the exact gate output.
      CHECK(fidelity_pure(b.rho, protocol::cnot_reference(input)) ==
            doctest::Approx(1.0).epsilon(1e-8));
    }
    CHECK(total == doctest::Approx(1.0).epsilon(1e-12));
    for (double kp : r.kind_pair_probs) {
      CHECK(std::abs(kp - 0.25) < 1e-12);
    }

    CHECK(fidelity_pure(r.pooled, protocol::cnot_reference(input)) ==
          doctest::Approx(1.0).epsilon(1e-8));

    // Six-fold bookkeeping: exactly 1/72 of the emission manifold.
    CHECK(std::abs(r.sixfold_fraction - 1.0 / 72.0) < 1e-12);
    CHECK_FALSE(r.sectors_truncated);
  }

  // Superposition inputs work through the same backend.
  const QubitState hplus = QubitState::ket("H+");
  const auto branches = noisy_runner(p)(hplus);
  CHECK(fidelity_pure(tomography::pooled_rho(branches),
                      bell_state(BellKind::PhiPlus)) ==
        doctest::Approx(1.0).epsilon(1e-8));
}

TEST_CASE("entangled inputs are rejected: the hardware prepares products") {
  CHECK_THROWS_AS(
      full_experiment_rho(single_pair(), bell_state(BellKind::PhiPlus)),
      std::invalid_argument);
  CHECK_THROWS_AS(run_product_prep(single_pair(), Eigen::Vector2cd(0.0, 0.0),
                                   kAxisH),
                  std::invalid_argument);
}

TEST_CASE("success-probability ledger: 1/9 x 1/4 x 1/2") {
  const RateLedger ledger = rate_ledger();
  CHECK(std::abs(ledger.chi - 1.0 / 9.0) < 1e-12);
  CHECK(std::abs(ledger.bsm - 1.0 / 4.0) < 1e-12);
  CHECK(std::abs(ledger.polarizer - 1.0 / 2.0) < 1e-12);
  CHECK(std::abs(ledger.total - 1.0 / 72.0) < 1e-12);
  CHECK(std::abs(ledger.chi * ledger.bsm * ledger.polarizer - ledger.total) <
        1e-15);
}

TEST_CASE("full preparation error depolarizes the conditional output") {
  NoiseParams p = single_pair();
  p.input_error = 1.0;
  const FullRunResult r = full_experiment_rho(p, QubitState::ket("HV"));
  CHECK((r.pooled.mat() - 0.25 * Eigen::Matrix4cd::Identity())
            .cwiseAbs()
            .maxCoeff() < 1e-9);
  CHECK(fidelity_pure(r.pooled, protocol::cnot_reference(QubitState::ket("HV"))) ==
        doctest::Approx(0.25).epsilon(1e-8));
}

TEST_CASE("preparation error equals the explicit four-preparation mixture") {
  NoiseParams p = NoiseParams{}.with_g(0.3);
  p.n_pairs_max = 2;
  const double e = 0.2;

  // Oracle: pool the four product preparations with white-noise weights,
  // each component weighted by its own accepted weight.
  const FullRunResult rHV = run_product_prep(p, kAxisH, kAxisV);
  const FullRunResult rHH = run_product_prep(p, kAxisH, kAxisH);
  const FullRunResult rVV = run_product_prep(p, kAxisV, kAxisV);
  const FullRunResult rVH = run_product_prep(p, kAxisV, kAxisH);
  const double w[4] = {1.0 - 0.75 * e, 0.25 * e, 0.25 * e, 0.25 * e};
  const FullRunResult* parts[4] = {&rHV, &rHH, &rVV, &rVH};
  Eigen::Matrix4cd acc = Eigen::Matrix4cd::Zero();
  double wsum = 0.0;
  for (int i = 0; i < 4; ++i) {
    acc += w[i] * parts[i]->accepted_weight * parts[i]->pooled.mat();
    wsum += w[i] * parts[i]->accepted_weight;
  }
  acc /= wsum;

  p.input_error = e;
  const FullRunResult mixed = full_experiment_rho(p, QubitState::ket("HV"));
  CHECK((mixed.pooled.mat() - acc).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("double-pair emission degrades the gate and stays physical") {
  NoiseParams p = NoiseParams{}.with_g(0.5);
  p.n_pairs_max = 2;
  const QubitState input = QubitState::ket("HV");
  const FullRunResult r = full_experiment_rho(p, input);
  const double f = fidelity_pure(r.pooled, protocol::cnot_reference(input));
  CHECK(f < 0.99);
  CHECK(f > 0.25);

  const auto v = r.pooled.validity();
  CHECK(v.ok(1e-9, 1e-9, 1e-9));
  for (const PatternBranch& b : r.branches) {
    CHECK(b.rho.validity().ok(1e-9, 1e-9, 1e-9));
    CHECK(b.weight >= 0.0);
  }
  CHECK(r.accepted_weight > 0.0);
  CHECK(r.manifold_weight > r.accepted_weight);
  CHECK(std::abs(r.sixfold_fraction -
                 r.accepted_weight / r.manifold_weight) < 1e-15);
  // Double pairs fake extra six-fold coincidences: the fraction rises above
  // the g -> 0 limit of the same double-pair manifold (1/396), even though
  // manifold dilution keeps it below the single-pair-only 1/72.
  CHECK(r.sixfold_fraction > 1.0 / 396.0);
  CHECK(r.sixfold_fraction < 1.0 / 72.0);
}

TEST_CASE("vanishing emission with double-pair headroom: limit bookkeeping") {
  // At g -> 0 only triple-emission sectors carry weight. Of those, only
  // one-pair-per-source events can be accepted, but the six unbalanced
  // sectors still dilute the manifold, so the six-fold fraction drops from
  // 1/72 to (8/44) * (1/9 * 1/4 * 1/2) = 1/396.
  NoiseParams p = NoiseParams{}.with_g(0.0);
  p.n_pairs_max = 2;
  const FullRunResult r = full_experiment_rho(p, QubitState::ket("HH"));
  CHECK(std::abs(r.sixfold_fraction - 1.0 / 396.0) < 1e-12);
  // The conditional output is still the exact gate output.
  CHECK(fidelity_pure(r.pooled, QubitState::ket("HH")) ==
        doctest::Approx(1.0).epsilon(1e-8));
}

TEST_CASE("partial distinguishability degrades even single-pair operation") {
  NoiseParams p = single_pair().with_visibility(0.9);
  const double f = truth_avg(p);
  CHECK(f < 1.0 - 1e-3);
  CHECK(f > 0.85);
  CHECK(f == doctest::Approx(11.0 / 12.0).epsilon(2e-3));

  // Worse visibility, worse gate.
  const double f_lower = truth_avg(single_pair().with_visibility(0.8));
  CHECK(f_lower < f);
}

TEST_CASE("sector truncation is tracked, not silent") {
  NoiseParams p = NoiseParams{}.with_g(0.4);
  p.n_pairs_max = 2;
  p.n_max = 8;  // cuts the 10- and 12-photon sectors
  const FullRunResult r8 = full_experiment_rho(p, QubitState::ket("HH"));
  CHECK(r8.sectors_truncated);

  p.n_max = 12;  // every sector allowed by n_pairs_max fits
  const FullRunResult r12 = full_experiment_rho(p, QubitState::ket("HH"));
  CHECK_FALSE(r12.sectors_truncated);
}

TEST_CASE("grid sweep: monotone degradation and ordering") {
  SweepGrid grid;
  grid.g_values = {0.0, 0.3, 0.6};
  grid.v_values = {1.0};
  grid.input_error_values = {0.0};
  grid.n_pairs_max = 2;
  grid.n_max = 8;
  const SweepResult res = fidelity_sweep(grid, 2);
  REQUIRE(res.points.size() == 3);
  CHECK(res.points[0].f_truth_avg == doctest::Approx(1.0).epsilon(1e-8));
  CHECK(res.points[0].f_entangle == doctest::Approx(1.0).epsilon(1e-8));
  CHECK(res.points[1].f_truth_avg < res.points[0].f_truth_avg);
  CHECK(res.points[2].f_truth_avg < res.points[1].f_truth_avg);
  CHECK(res.monotone_truth_in_g);
  CHECK(res.monotone_entangle_in_g);
  CHECK(res.monotone_truth_in_v);
  CHECK(res.monotone_entangle_in_v);
  CHECK(res.truth_ge_entangle);
  for (const SweepPoint& pt : res.points) {
    CHECK_FALSE(pt.failed);
    CHECK(pt.f_truth_avg >= pt.f_entangle - 1e-12);
  }
  // More emission, more fake coincidences.
  CHECK(res.points[2].sixfold_rate > res.points[0].sixfold_rate);
  CHECK(std::abs(res.points[0].sixfold_rate - 1.0 / 396.0) < 1e-12);
  CHECK(std::abs(res.ledger.total - 1.0 / 72.0) < 1e-12);

  // Thread count must not change results.
  const SweepResult serial = fidelity_sweep(grid, 1);
  for (std::size_t i = 0; i < res.points.size(); ++i) {
    CHECK(res.points[i].f_truth_avg == serial.points[i].f_truth_avg);
    CHECK(res.points[i].f_entangle == serial.points[i].f_entangle);
  }
}

TEST_CASE("frozen spot value on the degradation curve") {
  // Pinned output of the analytic pipeline at g = 0.4 (all sources), full
  // visibility, no preparation error, double-pair truncation. Guards the
  // whole chain against silent regressions.
  SweepGrid grid;
  grid.g_values = {0.4};
  grid.v_values = {1.0};
  grid.input_error_values = {0.0};
  grid.n_pairs_max = 2;
  grid.n_max = 8;
  const SweepResult res = fidelity_sweep(grid, 1);
  REQUIRE(res.points.size() == 1);
  CHECK(std::abs(res.points[0].f_truth_avg - 0.76281752859022345) < 1e-9);
}

TEST_CASE("standard sweep grid covers clean through degraded operation") {
  const SweepGrid grid = SweepGrid::standard();
  CHECK(grid.g_values.front() == 0.0);
  CHECK(grid.g_values.back() == 1.0);
  CHECK(grid.n_pairs_max == 2);
  CHECK(grid.v_values.size() >= 2);
  CHECK(grid.input_error_values.size() >= 2);
  CHECK(grid.g_values.size() * grid.v_values.size() *
            grid.input_error_values.size() <=
        27);
}

TEST_CASE("sampled experiment: determinism and statistics") {
  NoiseParams p = single_pair();
  const QubitState input = QubitState::ket("H+");
  const ExperimentResult a = monte_carlo(p, input, 999, 123);
  const ExperimentResult b = monte_carlo(p, input, 999, 123);
  CHECK(a.pattern_counts == b.pattern_counts);
  CHECK(a.counts_zz == b.counts_zz);
  CHECK(a.counts_xx == b.counts_xx);
  CHECK(a.counts_yy == b.counts_yy);
  CHECK(a.seed == 123);
  CHECK(a.shots == 999);

  long long pattern_total = 0, kind_total = 0;
  for (long long c : a.pattern_counts) pattern_total += c;
  for (long long c : a.kind_pair_counts) kind_total += c;
  CHECK(pattern_total == 999);
  CHECK(kind_total == 999);
  const long long zz_total =
      a.counts_zz[0] + a.counts_zz[1] + a.counts_zz[2] + a.counts_zz[3];
  CHECK(zz_total == 333);

  // Exact corner: every readout lands on the target parities.
  CHECK(a.fidelity_sampled.fidelity == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(a.fidelity_analytic == doctest::Approx(1.0).epsilon(1e-8));
  CHECK(std::abs(a.sixfold_rate_factor - 1.0 / 72.0) < 1e-12);
  CHECK(fidelity_pure(a.rho_estimate, bell_state(BellKind::PhiPlus)) ==
        doctest::Approx(1.0).epsilon(1e-10));
  CHECK(std::abs(a.rho_estimate.mat().trace().real() - 1.0) < 1e-12);

  // A different seed draws a different event sequence.
  const ExperimentResult c = monte_carlo(p, input, 999, 124);
  CHECK(a.pattern_counts != c.pattern_counts);

  CHECK_THROWS_AS(monte_carlo(p, input, 2, 1), std::invalid_argument);

  // Noisy operation: the sampled fidelity tracks the analytic value.
  NoiseParams noisy = NoiseParams{}.with_g(0.5);
  noisy.n_pairs_max = 2;
  const ExperimentResult n = monte_carlo(noisy, input, 3000, 7);
  CHECK(std::abs(n.fidelity_sampled.fidelity - n.fidelity_analytic) <
        5.0 * n.fidelity_sampled.stderr_);
  CHECK(n.fidelity_analytic < 0.95);
}
