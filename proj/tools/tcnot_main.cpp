// tcnot_main.cpp
// Command-line front end: structural verification, truth-table and
// entangling-input experiment emulation, noise sweeps, and the success-rate
// ledger. Exit codes: 0 success, 1 verification failure, 2 config error,
// 3 runtime/numeric error.

#include "tcnot/noise.hpp"
#include "tcnot/optics.hpp"
#include "tcnot/protocol.hpp"
#include "tcnot/qstate.hpp"
#include "tcnot/report.hpp"
#include "tcnot/tomography.hpp"

#include <CLI11.hpp>
#include <Eigen/Dense>

#include <array>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <iostream>
#include <random>
#include <string>
#include <utility>
#include <vector>

namespace {

using tcnot::BellKind;
using tcnot::DensityMatrix;
using tcnot::PauliString;
using tcnot::QubitState;
using tcnot::cx;
using tcnot::report::Csv;
using tcnot::report::Json;
using tcnot::report::RunConfig;
using tcnot::report::format_g17;
namespace optics = tcnot::optics;
namespace protocol = tcnot::protocol;
namespace tomography = tcnot::tomography;
namespace noise = tcnot::noise;
namespace report = tcnot::report;

constexpr std::array<const char*, 4> kBasisLabels{"HH", "HV", "VH", "VV"};
constexpr std::array<const char*, 4> kPlusLabels{"++", "+-", "-+", "--"};
constexpr std::array<const char*, 4> kCircLabels{"LL", "LR", "RL", "RR"};

// Reference values of the physical experiment's entangled-output run, for
// side-by-side comparison in the entangle outputs.
constexpr double kRefExx = 0.462, kRefEyy = -0.434, kRefEzz = 0.403;
constexpr double kRefFidelity = 0.575;

std::string out_path(const RunConfig& cfg, const char* name) {
  return (std::filesystem::path(cfg.out_dir) / name).string();
}

void emit(const RunConfig& cfg, Json payload, const char* json_name,
          const std::string& text) {
  const std::string doc = report::envelope(cfg, std::move(payload)).dump();
  if (json_name != nullptr) {
    report::write_text_file(out_path(cfg, json_name), doc);
  }
  if (cfg.json_stdout) {
    std::cout << doc;
  } else {
    std::cout << text;
  }
}

// ---------------------------------------------------------------------------
// verify

struct Check {
  std::string name;
  bool pass = true;
  std::string detail;  // one human-readable line
  Json data = Json::object();
};

Check check_decomposition(const RunConfig& cfg,
                          const protocol::CorrectionTable& table) {
  Check c;
  c.name = "correction-table";
  std::vector<std::pair<std::string, QubitState>> inputs;
  for (const char* l : {"HH", "HV", "VH", "VV", "H+", "+H", "++", "LR"}) {
    inputs.emplace_back(l, QubitState::ket(l));
  }
  std::mt19937_64 rng(cfg.seed);
  std::normal_distribution<double> gauss;
  for (int i = 0; i < 64; ++i) {
    std::vector<cx> amps(4);
    for (auto& a : amps) a = cx(gauss(rng), gauss(rng));
    inputs.emplace_back("random-" + std::to_string(i),
                        QubitState::from_amplitudes(2, amps, true));
  }

  double worst_overlap = 0.0, worst_residual = 0.0, worst_prob = 0.0;
  std::string first_fail;
  for (const auto& [label, state] : inputs) {
    const auto rep = protocol::verify_decomposition(state, table);
    for (const auto& br : rep.branches) {
      worst_overlap = std::max(worst_overlap, std::abs(br.overlap_sq - 1.0));
      worst_residual = std::max(worst_residual, br.residual_dev);
      worst_prob = std::max(worst_prob, std::abs(br.prob - 1.0 / 16.0));
      if (!br.match && first_fail.empty()) {
        first_fail = "input " + label + ", branch (" +
                     tcnot::to_string(br.k13) + ", " +
                     tcnot::to_string(br.k25) + ")";
      }
    }
    c.pass = c.pass && rep.all_match;
  }
  c.data.set("inputs", Json::integer(static_cast<long long>(inputs.size())));
  c.data.set("max_overlap_deviation", Json::number(worst_overlap));
  c.data.set("max_residual_deviation", Json::number(worst_residual));
  c.data.set("max_branch_prob_deviation", Json::number(worst_prob));
  if (!first_fail.empty()) c.data.set("first_failure", Json::string(first_fail));
  char buf[256];
  if (c.pass) {
    std::snprintf(buf, sizeof buf,
                  "%zu inputs x 16 branches; max overlap deviation %.2e",
                  inputs.size(), worst_overlap);
    c.detail = buf;
  } else {
    c.detail = "corrected output disagrees with the gate: " + first_fail;
  }
  return c;
}

Check check_resource_state() {
  Check c;
  c.name = "resource-state";
  const QubitState chi_c = protocol::build_chi_circuit();
  const protocol::ChiOptical chi_o = protocol::build_chi_optical();
  const double dev_overlap =
      std::abs(tcnot::overlap_sq(chi_c, chi_o.state) - 1.0);
  const double dev_prob = std::abs(chi_o.success_prob - 1.0 / 9.0);
  c.pass = dev_overlap <= 1e-10 && dev_prob <= 1e-12;
  c.data.set("overlap_sq_deviation", Json::number(dev_overlap));
  c.data.set("success_prob", Json::number(chi_o.success_prob));
  c.data.set("success_prob_deviation", Json::number(dev_prob));
  char buf[256];
  std::snprintf(buf, sizeof buf,
                "circuit/optics overlap deviation %.2e; post-selection "
                "probability %.12f (1/9 %.2e off)",
                dev_overlap, chi_o.success_prob, dev_prob);
  c.detail = buf;
  return c;
}

Check check_splitter_amplitudes() {
  Check c;
  c.name = "splitter-amplitudes";
  const auto spec = optics::PdbsSpec::from_transmissions(1.0, 1.0 / 3.0);
  const auto in = optics::from_qubit_state(QubitState::ket("++"), {4, 6}, 4);
  const auto out = optics::apply_beamsplitter(in, 4, 6, spec);
  const auto sel = optics::postselect(out, {4, 6});
  const QubitState q = optics::to_qubit_state(sel.state, {4, 6});

  const double s3 = 1.0 / std::sqrt(3.0);
  std::array<double, 4> ref{1.0, s3, s3, -1.0 / 3.0};
  const double norm = 4.0 / 3.0;
  for (double& r : ref) r /= norm;
  cx phase = q.amp(0) / ref[0];
  phase /= std::abs(phase);
  double dev = 0.0;
  for (int i = 0; i < 4; ++i) {
    dev = std::max(dev, std::abs(q.amp(i) - phase * ref[i]));
  }
  const double dev_prob = std::abs(sel.prob - 4.0 / 9.0);
  c.pass = dev <= 1e-12 && dev_prob <= 1e-12;
  c.data.set("amplitude_deviation", Json::number(dev));
  c.data.set("postselect_prob_deviation", Json::number(dev_prob));
  char buf[256];
  std::snprintf(buf, sizeof buf,
                "one-photon-per-port amplitudes (1, 1/sqrt3, 1/sqrt3, -1/3): "
                "max deviation %.2e",
                dev);
  c.detail = buf;
  return c;
}

Check check_bell_analyzer() {
  Check c;
  c.name = "bell-analyzer";
  const protocol::BsmStation st{1, 3, 11, 13};
  double worst = 0.0;
  bool kinds_ok = true;
  for (BellKind k : tcnot::kAllBellKinds) {
    const auto s = optics::from_qubit_state(tcnot::bell_state(k), {1, 3}, 4);
    const auto r = protocol::bsm_optical(s, st);
    for (const auto& br : r.branches) {
      double expect = 0.0;
      const bool equal_signs =
          br.outcome.pattern == protocol::Coincidence::PlusPlus ||
          br.outcome.pattern == protocol::Coincidence::MinusMinus;
      if (k == BellKind::PhiPlus && equal_signs) expect = 0.5;
      if (k == BellKind::PhiMinus && !equal_signs) expect = 0.5;
      worst = std::max(worst, std::abs(br.prob - expect));
      if (br.prob > 1e-10 && br.outcome.kind != k) kinds_ok = false;
    }
    const double expect_discard =
        (k == BellKind::PhiPlus || k == BellKind::PhiMinus) ? 0.0 : 1.0;
    worst = std::max(worst, std::abs(r.discard_prob - expect_discard));
  }
  c.pass = worst <= 1e-10 && kinds_ok;
  c.data.set("max_probability_deviation", Json::number(worst));
  c.data.set("kinds_consistent", Json::boolean(kinds_ok));
  char buf[256];
  std::snprintf(buf, sizeof buf,
                "phi branches fire at 1/2 per pattern, psi branches dark; "
                "max deviation %.2e",
                worst);
  c.detail = buf;
  return c;
}

Check check_phi_plus_witness() {
  Check c;
  c.name = "phi-plus-witness";
  const Eigen::MatrixXcd w =
      0.25 * (Eigen::MatrixXcd::Identity(4, 4) +
              PauliString::parse("XX").matrix() -
              PauliString::parse("YY").matrix() +
              PauliString::parse("ZZ").matrix());
  const DensityMatrix target =
      DensityMatrix::from_pure(tcnot::bell_state(BellKind::PhiPlus));
  const double dev = (w - target.mat()).cwiseAbs().maxCoeff();
  const double dev_f =
      std::abs(tomography::three_setting_fidelity(target).fidelity - 1.0);
  c.pass = dev <= 1e-14 && dev_f <= 1e-12;
  c.data.set("witness_entry_deviation", Json::number(dev));
  c.data.set("three_setting_self_fidelity_deviation", Json::number(dev_f));
  char buf[256];
  std::snprintf(buf, sizeof buf,
                "(1 + XX - YY + ZZ)/4 equals the Bell projector; max entry "
                "deviation %.2e",
                dev);
  c.detail = buf;
  return c;
}

Check check_rate_ledger() {
  Check c;
  c.name = "rate-ledger";
  const noise::RateLedger rl = noise::rate_ledger();
  const double dev = std::max(
      {std::abs(rl.chi - 1.0 / 9.0), std::abs(rl.bsm - 0.25),
       std::abs(rl.polarizer - 0.5), std::abs(rl.total - 1.0 / 72.0)});
  c.pass = dev <= 1e-12;
  c.data.set("chi", Json::number(rl.chi));
  c.data.set("bsm", Json::number(rl.bsm));
  c.data.set("polarizer", Json::number(rl.polarizer));
  c.data.set("total", Json::number(rl.total));
  c.data.set("max_deviation", Json::number(dev));
  char buf[256];
  std::snprintf(buf, sizeof buf,
                "derived factors {1/9, 1/4, 1/2}, product 1/72; max "
                "deviation %.2e",
                dev);
  c.detail = buf;
  return c;
}

int cmd_verify(const RunConfig& cfg, bool corrupt_table) {
  protocol::CorrectionTable table = protocol::CorrectionTable::canonical();
  if (corrupt_table) {
    table = table.with_entry(
        BellKind::PhiMinus, BellKind::PsiPlus,
        tcnot::Correction{tcnot::PauliFactor::I, tcnot::PauliFactor::I});
  }

  std::vector<Check> checks;
  checks.push_back(check_decomposition(cfg, table));
  checks.push_back(check_resource_state());
  checks.push_back(check_splitter_amplitudes());
  checks.push_back(check_bell_analyzer());
  checks.push_back(check_phi_plus_witness());
  checks.push_back(check_rate_ledger());

  int failed = 0;
  std::string text;
  Json arr = Json::array();
  for (auto& ck : checks) {
    if (!ck.pass) ++failed;
    text += std::string(ck.pass ? "[PASS] " : "[FAIL] ") + ck.name + ": " +
            ck.detail + "\n";
    Json j = Json::object();
    j.set("name", Json::string(ck.name));
    j.set("pass", Json::boolean(ck.pass));
    j.set("detail", Json::string(ck.detail));
    j.set("metrics", std::move(ck.data));
    arr.push(std::move(j));
  }
  char buf[128];
  std::snprintf(buf, sizeof buf, "verify: %zu/%zu checks passed\n",
                checks.size() - failed, checks.size());
  text += buf;

  Json payload = Json::object();
  payload.set("checks", std::move(arr));
  payload.set("all_pass", Json::boolean(failed == 0));

  emit(cfg, std::move(payload), nullptr, text);
  return failed == 0 ? 0 : 1;
}

// ---------------------------------------------------------------------------
// truth-table

int cmd_truth_table(const RunConfig& cfg) {
  const noise::NoiseParams params = cfg.noise.params(cfg.truncation);
  const tomography::GateRunner runner = noise::noisy_runner(params);
  const tomography::TruthTableResult res =
      tomography::truth_table(runner, cfg.shots, cfg.seed);

  Csv csv({"input", "HH", "HV", "VH", "VV", "fidelity", "stderr"});
  for (int i = 0; i < 4; ++i) {
    csv.row({kBasisLabels[i], std::to_string(res.counts[i][0]),
             std::to_string(res.counts[i][1]), std::to_string(res.counts[i][2]),
             std::to_string(res.counts[i][3]), format_g17(res.fidelities[i]),
             format_g17(res.stderrs[i])});
  }
  report::write_text_file(out_path(cfg, "truth_table.csv"), csv.str());

  Json payload = Json::object();
  payload.set("shots_per_input", Json::integer(res.shots_per_input));
  Json inputs = Json::array(), expected = Json::array();
  for (int i = 0; i < 4; ++i) {
    inputs.push(Json::string(kBasisLabels[i]));
    expected.push(Json::string(kBasisLabels[tomography::truth_table_expected(i)]));
  }
  payload.set("inputs", std::move(inputs));
  payload.set("expected_outputs", std::move(expected));
  Json counts = Json::array();
  Json fids = Json::array(), errs = Json::array();
  for (int i = 0; i < 4; ++i) {
    Json row = Json::array();
    for (int j = 0; j < 4; ++j) row.push(Json::integer(res.counts[i][j]));
    counts.push(std::move(row));
    fids.push(Json::number(res.fidelities[i]));
    errs.push(Json::number(res.stderrs[i]));
  }
  payload.set("counts", std::move(counts));
  payload.set("fidelities", std::move(fids));
  payload.set("stderrs", std::move(errs));
  payload.set("average_fidelity", Json::number(res.average));
  payload.set("stderr_mean", Json::number(res.stderr_mean));
  payload.set("stderr_pooled", Json::number(res.stderr_pooled));

  std::string text;
  char buf[256];
  std::snprintf(buf, sizeof buf, "truth table, %lld shots per input:\n",
                static_cast<long long>(res.shots_per_input));
  text += buf;
  text += "input      HH        HV        VH        VV   fidelity\n";
  for (int i = 0; i < 4; ++i) {
    std::snprintf(buf, sizeof buf, "%-5s %9lld %9lld %9lld %9lld   %.4f +- %.4f\n",
                  kBasisLabels[i], res.counts[i][0], res.counts[i][1],
                  res.counts[i][2], res.counts[i][3], res.fidelities[i],
                  res.stderrs[i]);
    text += buf;
  }
  std::snprintf(buf, sizeof buf,
                "average fidelity %.4f +- %.4f (pooled +- %.4f)\n", res.average,
                res.stderr_mean, res.stderr_pooled);
  text += buf;
  text += "files: " + out_path(cfg, "truth_table.csv") + ", " +
          out_path(cfg, "truth_table.json") + "\n";

  emit(cfg, std::move(payload), "truth_table.json", text);
  return 0;
}

// ---------------------------------------------------------------------------
// entangle

Json estimate_json(const tomography::SettingEstimate& e) {
  Json j = Json::object();
  j.set("value", Json::number(e.value));
  j.set("stderr", Json::number(e.stderr_));
  j.set("shots", Json::integer(e.shots));
  return j;
}

int cmd_entangle(const RunConfig& cfg) {
  if (cfg.shots < 3) {
    throw report::ConfigError(
        "entangle needs at least 3 shots (one per measurement setting)");
  }
  const noise::NoiseParams params = cfg.noise.params(cfg.truncation);
  // Target photon prepared |H>, control photon (|H>+|V>)/sqrt2: the gate
  // turns this product input into the maximally entangled |phi+> output.
  const QubitState input = QubitState::ket("H+");
  const noise::ExperimentResult res =
      noise::monte_carlo(params, input, cfg.shots, cfg.seed);
  const tomography::FidelityReport analytic =
      tomography::three_setting_fidelity(res.rho_analytic);

  const std::array<std::array<long long, 4>, 3> counts{res.counts_zz,
                                                       res.counts_xx,
                                                       res.counts_yy};
  const std::array<tomography::MeasBasis, 3> bases{tomography::MeasBasis::ZZ,
                                                   tomography::MeasBasis::XX,
                                                   tomography::MeasBasis::YY};
  const std::array<const char*, 3> basis_names{"ZZ", "XX", "YY"};
  const std::array<std::array<const char*, 4>, 3> labels{
      kBasisLabels, kPlusLabels, kCircLabels};

  Csv counts_csv(
      {"basis", "outcome", "count", "fraction", "probability_analytic"});
  Json counts_json = Json::array();
  for (int b = 0; b < 3; ++b) {
    long long setting_total = 0;
    for (long long k : counts[b]) setting_total += k;
    const auto probs = tomography::basis_probabilities(res.rho_analytic,
                                                       bases[b]);
    for (int o = 0; o < 4; ++o) {
      const double frac =
          setting_total > 0
              ? static_cast<double>(counts[b][o]) / static_cast<double>(setting_total)
              : 0.0;
      counts_csv.row({basis_names[b], labels[b][o],
                      std::to_string(counts[b][o]), format_g17(frac),
                      format_g17(probs[o])});
      Json row = Json::object();
      row.set("basis", Json::string(basis_names[b]));
      row.set("outcome", Json::string(labels[b][o]));
      row.set("count", Json::integer(counts[b][o]));
      row.set("fraction", Json::number(frac));
      row.set("probability_analytic", Json::number(probs[o]));
      counts_json.push(std::move(row));
    }
  }
  report::write_text_file(out_path(cfg, "entangle_counts.csv"),
                          counts_csv.str());

  const tomography::FidelityReport& m = res.fidelity_sampled;
  Csv summary_csv({"source", "exx", "eyy", "ezz", "fidelity"});
  summary_csv.row({"sampled", format_g17(m.exx.value), format_g17(m.eyy.value),
                   format_g17(m.ezz.value), format_g17(m.fidelity)});
  summary_csv.row({"analytic", format_g17(analytic.exx.value),
                   format_g17(analytic.eyy.value),
                   format_g17(analytic.ezz.value),
                   format_g17(analytic.fidelity)});
  summary_csv.row({"reference", format_g17(kRefExx), format_g17(kRefEyy),
                   format_g17(kRefEzz), format_g17(kRefFidelity)});
  report::write_text_file(out_path(cfg, "entangle_summary.csv"),
                          summary_csv.str());

  Json payload = Json::object();
  {
    Json in = Json::object();
    in.set("target", Json::string("H"));
    in.set("control", Json::string("+"));
    payload.set("input", std::move(in));
  }
  {
    Json s = Json::object();
    s.set("exx", estimate_json(m.exx));
    s.set("eyy", estimate_json(m.eyy));
    s.set("ezz", estimate_json(m.ezz));
    s.set("fidelity", Json::number(m.fidelity));
    s.set("stderr", Json::number(m.stderr_));
    s.set("entangled", Json::boolean(m.entangled));
    s.set("beats_estimation", Json::boolean(m.beats_estimation));
    payload.set("sampled", std::move(s));
  }
  {
    Json a = Json::object();
    a.set("exx", Json::number(analytic.exx.value));
    a.set("eyy", Json::number(analytic.eyy.value));
    a.set("ezz", Json::number(analytic.ezz.value));
    a.set("fidelity", Json::number(analytic.fidelity));
    a.set("entangled", Json::boolean(analytic.entangled));
    a.set("beats_estimation", Json::boolean(analytic.beats_estimation));
    a.set("fidelity_vs_ideal_output", Json::number(res.fidelity_analytic));
    payload.set("analytic", std::move(a));
  }
  {
    Json r = Json::object();
    r.set("exx", Json::number(kRefExx));
    r.set("eyy", Json::number(kRefEyy));
    r.set("ezz", Json::number(kRefEzz));
    r.set("fidelity", Json::number(kRefFidelity));
    r.set("fidelity_from_row",
          Json::number(tomography::fidelity_from_expectations(
              kRefExx, kRefEyy, kRefEzz)));
    payload.set("reference", std::move(r));
  }
  payload.set("counts", std::move(counts_json));
  {
    Json pc = Json::array();
    for (long long k : res.pattern_counts) pc.push(Json::integer(k));
    payload.set("pattern_counts", std::move(pc));
    Json kc = Json::array();
    for (long long k : res.kind_pair_counts) kc.push(Json::integer(k));
    payload.set("kind_pair_counts", std::move(kc));
  }
  payload.set("sixfold_rate_factor", Json::number(res.sixfold_rate_factor));
  payload.set("shots", Json::integer(res.shots));

  std::string text;
  char buf[256];
  text += "entangling input: target H, control (H+V)/sqrt2\n";
  std::snprintf(buf, sizeof buf,
                "sampled  <XX> %+.4f +- %.4f, <YY> %+.4f +- %.4f, <ZZ> %+.4f "
                "+- %.4f\n",
                m.exx.value, m.exx.stderr_, m.eyy.value, m.eyy.stderr_,
                m.ezz.value, m.ezz.stderr_);
  text += buf;
  std::snprintf(buf, sizeof buf,
                "fidelity %.4f +- %.4f (analytic %.6f)\n", m.fidelity,
                m.stderr_, analytic.fidelity);
  text += buf;
  std::snprintf(buf, sizeof buf,
                "entangled (F > 0.50): %s;  beats direct estimation (F > "
                "0.40): %s\n",
                m.entangled ? "yes" : "no", m.beats_estimation ? "yes" : "no");
  text += buf;
  std::snprintf(buf, sizeof buf,
                "reference row: <XX> %.3f, <YY> %.3f, <ZZ> %.3f, F %.3f\n",
                kRefExx, kRefEyy, kRefEzz, kRefFidelity);
  text += buf;
  std::snprintf(buf, sizeof buf, "six-fold acceptance fraction: %.6g\n",
                res.sixfold_rate_factor);
  text += buf;
  text += "files: " + out_path(cfg, "entangle_counts.csv") + ", " +
          out_path(cfg, "entangle_summary.csv") + ", " +
          out_path(cfg, "entangle.json") + "\n";

  emit(cfg, std::move(payload), "entangle.json", text);
  return 0;
}

// ---------------------------------------------------------------------------
// sweep

int cmd_sweep(const RunConfig& cfg) {
  const noise::SweepGrid grid = cfg.sweep.grid(cfg.truncation);
  // Validate every grid point before the (long) run so bad values are a
  // config error, not a mid-run surprise.
  for (double g : grid.g_values) {
    for (double v : grid.v_values) {
      for (double e : grid.input_error_values) {
        noise::NoiseParams p;
        p.with_g(g).with_visibility(v);
        p.input_error = e;
        p.n_pairs_max = grid.n_pairs_max;
        p.n_max = grid.n_max;
        try {
          p.validate();
        } catch (const std::exception& ex) {
          throw report::ConfigError(std::string("invalid sweep grid: ") +
                                    ex.what());
        }
      }
    }
  }

  const noise::SweepResult res = noise::fidelity_sweep(grid, cfg.sweep.threads);

  Csv csv({"g", "visibility", "input_error", "f_truth", "f_entangle",
           "sixfold_rate", "error"});
  Json points = Json::array();
  int failed = 0;
  std::string failures;
  for (const noise::SweepPoint& p : res.points) {
    if (p.failed) {
      ++failed;
      csv.row({format_g17(p.g), format_g17(p.visibility),
               format_g17(p.input_error), "", "", "", p.error});
      char buf[256];
      std::snprintf(buf, sizeof buf,
                    "point g=%.3g visibility=%.3g input_error=%.3g failed: ",
                    p.g, p.visibility, p.input_error);
      failures += buf + p.error + "\n";
    } else {
      csv.row({format_g17(p.g), format_g17(p.visibility),
               format_g17(p.input_error), format_g17(p.f_truth_avg),
               format_g17(p.f_entangle), format_g17(p.sixfold_rate), ""});
    }
    Json pt = Json::object();
    pt.set("g", Json::number(p.g));
    pt.set("visibility", Json::number(p.visibility));
    pt.set("input_error", Json::number(p.input_error));
    if (p.failed) {
      pt.set("f_truth", Json::null());
      pt.set("f_truth_avg", Json::null());
      pt.set("f_entangle", Json::null());
      pt.set("sixfold_rate", Json::null());
    } else {
      Json ft = Json::array();
      for (double f : p.f_truth) ft.push(Json::number(f));
      pt.set("f_truth", std::move(ft));
      pt.set("f_truth_avg", Json::number(p.f_truth_avg));
      pt.set("f_entangle", Json::number(p.f_entangle));
      pt.set("sixfold_rate", Json::number(p.sixfold_rate));
    }
    pt.set("failed", Json::boolean(p.failed));
    pt.set("error", p.failed ? Json::string(p.error) : Json::null());
    points.push(std::move(pt));
  }
  report::write_text_file(out_path(cfg, "sweep.csv"), csv.str());

  Json payload = Json::object();
  {
    Json gj = Json::object();
    Json gv = Json::array(), vv = Json::array(), ev = Json::array();
    for (double x : grid.g_values) gv.push(Json::number(x));
    for (double x : grid.v_values) vv.push(Json::number(x));
    for (double x : grid.input_error_values) ev.push(Json::number(x));
    gj.set("g_values", std::move(gv));
    gj.set("v_values", std::move(vv));
    gj.set("input_error_values", std::move(ev));
    gj.set("n_pairs_max", Json::integer(grid.n_pairs_max));
    gj.set("n_max", Json::integer(grid.n_max));
    payload.set("grid", std::move(gj));
  }
  {
    Json lj = Json::object();
    lj.set("chi", Json::number(res.ledger.chi));
    lj.set("bsm", Json::number(res.ledger.bsm));
    lj.set("polarizer", Json::number(res.ledger.polarizer));
    lj.set("total", Json::number(res.ledger.total));
    payload.set("ledger", std::move(lj));
  }
  {
    Json fj = Json::object();
    fj.set("monotone_truth_in_g", Json::boolean(res.monotone_truth_in_g));
    fj.set("monotone_entangle_in_g",
           Json::boolean(res.monotone_entangle_in_g));
    fj.set("monotone_truth_in_v", Json::boolean(res.monotone_truth_in_v));
    fj.set("monotone_entangle_in_v",
           Json::boolean(res.monotone_entangle_in_v));
    fj.set("truth_ge_entangle", Json::boolean(res.truth_ge_entangle));
    payload.set("properties", std::move(fj));
  }
  payload.set("points", std::move(points));

  std::string text;
  char buf[256];
  std::snprintf(buf, sizeof buf, "sweep: %zu points, %d failed\n",
                res.points.size(), failed);
  text += buf;
  text += failures;
  std::snprintf(buf, sizeof buf,
                "monotone non-increasing in pair strength: truth %s, "
                "entangle %s\n",
                res.monotone_truth_in_g ? "yes" : "no",
                res.monotone_entangle_in_g ? "yes" : "no");
  text += buf;
  std::snprintf(buf, sizeof buf,
                "monotone non-decreasing in visibility: truth %s, entangle "
                "%s\n",
                res.monotone_truth_in_v ? "yes" : "no",
                res.monotone_entangle_in_v ? "yes" : "no");
  text += buf;
  std::snprintf(buf, sizeof buf,
                "ledger: chi %.9f, bsm %.9f, polarizer %.9f, total %.9f\n",
                res.ledger.chi, res.ledger.bsm, res.ledger.polarizer,
                res.ledger.total);
  text += buf;
  text += "files: " + out_path(cfg, "sweep.csv") + ", " +
          out_path(cfg, "sweep.json") + "\n";

  emit(cfg, std::move(payload), "sweep.json", text);
  return 0;
}

// ---------------------------------------------------------------------------
// ledger

int cmd_ledger(const RunConfig& cfg) {
  const noise::RateLedger rl = noise::rate_ledger();

  Csv csv({"factor", "probability"});
  csv.row({"chi", format_g17(rl.chi)});
  csv.row({"bsm", format_g17(rl.bsm)});
  csv.row({"polarizer", format_g17(rl.polarizer)});
  csv.row({"total", format_g17(rl.total)});
  report::write_text_file(out_path(cfg, "ledger.csv"), csv.str());

  Json payload = Json::object();
  payload.set("chi", Json::number(rl.chi));
  payload.set("bsm", Json::number(rl.bsm));
  payload.set("polarizer", Json::number(rl.polarizer));
  payload.set("total", Json::number(rl.total));

  std::string text;
  char buf[256];
  std::snprintf(buf, sizeof buf,
                "resource-state post-selection: %.12f (1/9 = %.12f)\n", rl.chi,
                1.0 / 9.0);
  text += buf;
  std::snprintf(buf, sizeof buf,
                "joint Bell-measurement acceptance: %.12f\n", rl.bsm);
  text += buf;
  std::snprintf(buf, sizeof buf, "polarizer initialization: %.12f\n",
                rl.polarizer);
  text += buf;
  std::snprintf(buf, sizeof buf, "total six-fold fraction: %.12f (1/72 = %.12f)\n",
                rl.total, 1.0 / 72.0);
  text += buf;
  text += "files: " + out_path(cfg, "ledger.csv") + ", " +
          out_path(cfg, "ledger.json") + "\n";

  emit(cfg, std::move(payload), "ledger.json", text);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{
      "teleported controlled-NOT: structural verification and experiment "
      "emulation"};
  app.require_subcommand(1);

  std::string config_path, out_dir;
  long long shots = 0;
  std::uint64_t seed = 0;
  int truncation = 0;
  bool json_flag = false;
  bool corrupt_table = false;

  auto* o_config =
      app.add_option("--config", config_path, "JSON config file");
  auto* o_shots =
      app.add_option("--shots", shots, "samples per input / per setting");
  auto* o_seed = app.add_option("--seed", seed, "RNG seed");
  auto* o_out = app.add_option("--out", out_dir, "output directory");
  auto* o_trunc = app.add_option(
      "--truncation", truncation, "total-photon cap of the optical pipeline");
  app.add_flag("--json", json_flag, "print the JSON result envelope to stdout");

  CLI::App* c_verify = app.add_subcommand(
      "verify",
      "check the gate decomposition, resource state, Bell analyzers, the "
      "entanglement witness, and the rate bookkeeping");
  c_verify->add_flag("--corrupt-table", corrupt_table)->group("");
  CLI::App* c_truth = app.add_subcommand(
      "truth-table", "sample the computational-basis truth table");
  CLI::App* c_ent = app.add_subcommand(
      "entangle", "sample the entangling-input fidelity measurement");
  CLI::App* c_sweep = app.add_subcommand(
      "sweep", "analytic fidelity sweep over the noise grid");
  CLI::App* c_ledger =
      app.add_subcommand("ledger", "derived success-probability breakdown");
  for (CLI::App* sc : {c_verify, c_truth, c_ent, c_sweep, c_ledger}) {
    sc->fallthrough();
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : 2;
  }

  RunConfig cfg;
  try {
    if (o_config->count() > 0) cfg = RunConfig::from_file(config_path);
    if (o_shots->count() > 0) {
      if (shots < 1) throw report::ConfigError("shots must be >= 1");
      cfg.shots = shots;
    }
    if (o_seed->count() > 0) cfg.seed = seed;
    if (o_out->count() > 0) cfg.out_dir = out_dir;
    if (o_trunc->count() > 0) cfg.truncation = truncation;
    cfg.json_stdout = json_flag;
    if (app.got_subcommand(c_verify)) cfg.command = "verify";
    if (app.got_subcommand(c_truth)) cfg.command = "truth-table";
    if (app.got_subcommand(c_ent)) cfg.command = "entangle";
    if (app.got_subcommand(c_sweep)) cfg.command = "sweep";
    if (app.got_subcommand(c_ledger)) cfg.command = "ledger";
    // Resolve the effective parameters now so config problems surface as
    // config errors, before any computation starts.
    (void)cfg.noise.params(cfg.truncation);
  } catch (const report::ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  }

  try {
    if (cfg.command == "verify") return cmd_verify(cfg, corrupt_table);
    if (cfg.command == "truth-table") return cmd_truth_table(cfg);
    if (cfg.command == "entangle") return cmd_entangle(cfg);
    if (cfg.command == "sweep") return cmd_sweep(cfg);
    if (cfg.command == "ledger") return cmd_ledger(cfg);
    std::cerr << "config error: unknown command\n";
    return 2;
  } catch (const report::ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  }
}
