#include "tcnot/optics.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>
#include <stdexcept>

namespace tcnot::optics {

namespace {

constexpr cx kI{0.0, 1.0};

// Factorials and square roots thereof up to the photon cap.
double factorial(int n) {
  static const auto table = [] {
    std::array<double, kPhotonCap + 1> t{};
    t[0] = 1.0;
    for (int i = 1; i <= kPhotonCap; ++i) t[i] = t[i - 1] * i;
    return t;
  }();
  return table.at(static_cast<std::size_t>(n));
}

double binomial(int n, int k) {
  return factorial(n) / (factorial(k) * factorial(n - k));
}

}  // namespace

SlotEntry SlotEntry::unpack(std::uint32_t e) {
  SlotEntry s;
  s.spatial = static_cast<Mode>(e >> 6);
  s.pol = static_cast<Pol>((e >> 5) & 1u);
  s.tag = static_cast<std::uint8_t>((e >> 4) & 1u);
  s.count = static_cast<int>(e & 0xFu);
  return s;
}

std::uint32_t SlotEntry::pack() const {
  if (count < 0 || count > 15) {
    throw std::invalid_argument("slot photon count out of range");
  }
  return (static_cast<std::uint32_t>(spatial) << 6) |
         (static_cast<std::uint32_t>(pol) << 5) |
         (static_cast<std::uint32_t>(tag & 1u) << 4) |
         static_cast<std::uint32_t>(count);
}

void FockConfig::add(Mode spatial, Pol pol, std::uint8_t tag, int k) {
  if (k == 0) return;
  if (k < 0) throw std::invalid_argument("negative photon count");
  SlotEntry probe{spatial, pol, tag, 0};
  const std::uint32_t slot_bits = probe.pack() >> 4;
  std::size_t i = 0;
  while (i < len_ && (e_[i] >> 4) < slot_bits) ++i;
  if (i < len_ && (e_[i] >> 4) == slot_bits) {
    SlotEntry cur = SlotEntry::unpack(e_[i]);
    cur.count += k;
    e_[i] = cur.pack();
    return;
  }
  if (len_ >= e_.size()) {
    throw std::length_error("occupation config has too many slots");
  }
  for (std::size_t j = len_; j > i; --j) e_[j] = e_[j - 1];
  probe.count = k;
  e_[i] = probe.pack();
  ++len_;
}

int FockConfig::total_photons() const {
  int t = 0;
  for (std::size_t i = 0; i < len_; ++i) t += static_cast<int>(e_[i] & 0xFu);
  return t;
}

int FockConfig::photons_in_mode(Mode spatial) const {
  int t = 0;
  for (std::size_t i = 0; i < len_; ++i) {
    if (static_cast<Mode>(e_[i] >> 6) == spatial) {
      t += static_cast<int>(e_[i] & 0xFu);
    }
  }
  return t;
}

int FockConfig::count(Mode spatial, Pol pol, std::uint8_t tag) const {
  const std::uint32_t slot_bits = SlotEntry{spatial, pol, tag, 0}.pack() >> 4;
  for (std::size_t i = 0; i < len_; ++i) {
    if ((e_[i] >> 4) == slot_bits) return static_cast<int>(e_[i] & 0xFu);
  }
  return 0;
}

SlotEntry FockConfig::slot(std::size_t i) const {
  if (i >= len_) throw std::out_of_range("slot index out of range");
  return SlotEntry::unpack(e_[i]);
}

std::string FockConfig::str() const {
  std::ostringstream os;
  os << "{";
  for (std::size_t i = 0; i < len_; ++i) {
    const SlotEntry s = SlotEntry::unpack(e_[i]);
    if (i) os << ", ";
    os << s.count << "x(" << s.spatial << (s.pol == Pol::H ? "H" : "V");
    if (s.tag) os << "#" << static_cast<int>(s.tag);
    os << ")";
  }
  os << "}";
  return os.str();
}

bool FockConfig::operator==(const FockConfig& o) const {
  if (len_ != o.len_) return false;
  return std::equal(e_.begin(), e_.begin() + len_, o.e_.begin());
}

std::size_t FockConfigHash::operator()(const FockConfig& c) const {
  // FNV-1a over the packed entries.
  std::uint64_t h = 0xcbf29ce484222325ull;
  for (std::uint32_t e : c.raw()) {
    for (int b = 0; b < 4; ++b) {
      h ^= (e >> (8 * b)) & 0xFFu;
      h *= 0x100000001b3ull;
    }
  }
  return static_cast<std::size_t>(h);
}

FockConfig config_of(const std::vector<std::pair<Mode, Pol>>& photons) {
  FockConfig c;
  for (const auto& [m, p] : photons) c.add(m, p, 0, 1);
  return c;
}

OpticalState::OpticalState(int n_max) : n_max_(n_max) {
  if (n_max < 0 || n_max > kPhotonCap) {
    throw std::invalid_argument("photon truncation must be in [0, " +
                                std::to_string(kPhotonCap) + "]");
  }
}

OpticalState OpticalState::vacuum(int n_max) {
  OpticalState s(n_max);
  s.add(FockConfig{}, cx{1.0});
  return s;
}

OpticalState OpticalState::single_term(const FockConfig& c, cx amp,
                                       int n_max) {
  OpticalState s(n_max);
  s.add(c, amp);
  return s;
}

void OpticalState::add(const FockConfig& c, cx amp) {
  if (c.total_photons() > n_max_) {
    throw std::length_error("photon number " +
                            std::to_string(c.total_photons()) +
                            " exceeds truncation " + std::to_string(n_max_));
  }
  auto [it, inserted] = terms_.try_emplace(c, amp);
  if (!inserted) it->second += amp;
}

cx OpticalState::amplitude(const FockConfig& c) const {
  auto it = terms_.find(c);
  return it == terms_.end() ? cx{0.0} : it->second;
}

double OpticalState::norm2() const {
  double s = 0.0;
  for (const auto& [c, a] : terms_) s += std::norm(a);
  return s;
}

OpticalState OpticalState::scaled(cx factor) const {
  OpticalState out(n_max_);
  for (const auto& [c, a] : terms_) out.terms_.emplace(c, a * factor);
  return out;
}

OpticalState OpticalState::renormalized() const {
  const double n2 = norm2();
  if (n2 < 1e-28) {
    throw std::runtime_error("cannot renormalize a zero optical state");
  }
  return scaled(cx{1.0 / std::sqrt(n2)});
}

void OpticalState::prune_zeros(double floor) {
  for (auto it = terms_.begin(); it != terms_.end();) {
    if (std::norm(it->second) < floor) {
      it = terms_.erase(it);
    } else {
      ++it;
    }
  }
}

OpticalState product(const OpticalState& a, const OpticalState& b) {
  const int n_max = std::max(a.n_max(), b.n_max());
  OpticalState out(n_max);
  for (const auto& [ca, aa] : a.terms()) {
    for (const auto& [cb, ab] : b.terms()) {
      FockConfig c = ca;
      for (std::size_t i = 0; i < cb.num_slots(); ++i) {
        const SlotEntry e = cb.slot(i);
        if (c.count(e.spatial, e.pol, e.tag) != 0) {
          throw std::invalid_argument(
              "product factors share an occupied slot; combine them as one "
              "state instead");
        }
        c.add(e);
      }
      out.add(c, aa * ab);  // throws on truncation overflow
    }
  }
  return out;
}

namespace {

// Image of one (spatial, pol) slot under a linear element: a list of
// destination slots with complex coefficients. Unitarity of the whole map is
// the caller's business; every element below passes adjoint round-trip
// tests.
struct Dest {
  Mode spatial;
  Pol pol;
  cx coeff;
};

using SlotKey = std::uint32_t;  // (spatial << 1) | pol

SlotKey slot_key(Mode m, Pol p) {
  return (static_cast<SlotKey>(m) << 1) | static_cast<SlotKey>(p);
}

struct LinearMap {
  // Closed over its slot set: every destination below must itself appear as
  // a key (possibly with an identity image), so occupied destination slots
  // are never silently passed through.
  std::vector<std::pair<SlotKey, std::vector<Dest>>> images;

  const std::vector<Dest>* find(Mode m, Pol p) const {
    const SlotKey k = slot_key(m, p);
    for (const auto& [key, dests] : images) {
      if (key == k) return &dests;
    }
    return nullptr;
  }
};

struct DestAcc {
  SlotEntry entry;  // count accumulates across sources
};

// Expands one term of `in` through the map, merging results into `out`.
void expand_term(const FockConfig& config, cx amp, const LinearMap& lm,
                 OpticalState& out) {
  FockConfig base;
  std::vector<SlotEntry> affected;
  double inv_src = 1.0;
  for (std::size_t i = 0; i < config.num_slots(); ++i) {
    const SlotEntry e = config.slot(i);
    if (lm.find(e.spatial, e.pol) != nullptr) {
      affected.push_back(e);
      inv_src /= std::sqrt(factorial(e.count));
    } else {
      base.add(e);
    }
  }
  if (affected.empty()) {
    out.add(config, amp);
    return;
  }

  std::vector<SlotEntry> dests;  // accumulated destination occupations
  dests.reserve(8);

  auto bump = [&dests](Mode m, Pol p, std::uint8_t tag, int k) {
    if (k == 0) return;
    for (SlotEntry& d : dests) {
      if (d.spatial == m && d.pol == p && d.tag == tag) {
        d.count += k;
        return;
      }
    }
    dests.push_back(SlotEntry{m, p, tag, k});
  };

  // Depth-first over the multinomial distributions of each affected slot.
  auto rec = [&](auto&& self, std::size_t idx, cx acc) -> void {
    if (idx == affected.size()) {
      double fock = 1.0;
      FockConfig c = base;
      for (const SlotEntry& d : dests) {
        fock *= std::sqrt(factorial(d.count));
        c.add(d);
      }
      out.add(c, acc * fock);
      return;
    }
    const SlotEntry& src = affected[idx];
    const auto& image = *lm.find(src.spatial, src.pol);
    if (image.size() == 1) {
      const Dest& d = image[0];
      const cx f = std::pow(d.coeff, src.count);
      if (f != cx{0.0}) {
        bump(d.spatial, d.pol, src.tag, src.count);
        self(self, idx + 1, acc * f);
        bump(d.spatial, d.pol, src.tag, -src.count);
      }
      return;
    }
    if (image.size() != 2) {
      throw std::logic_error("linear elements here have 1 or 2 outputs");
    }
    const Dest& d1 = image[0];
    const Dest& d2 = image[1];
    for (int k = 0; k <= src.count; ++k) {
      // (c1 b1 + c2 b2)^n expanded: C(n,k) c1^k c2^(n-k).
      if (k > 0 && d1.coeff == cx{0.0}) continue;
      if (k < src.count && d2.coeff == cx{0.0}) continue;
      const cx f = binomial(src.count, k) * std::pow(d1.coeff, k) *
                   std::pow(d2.coeff, src.count - k);
      bump(d1.spatial, d1.pol, src.tag, k);
      bump(d2.spatial, d2.pol, src.tag, src.count - k);
      self(self, idx + 1, acc * f);
      bump(d1.spatial, d1.pol, src.tag, -k);
      bump(d2.spatial, d2.pol, src.tag, -(src.count - k));
    }
  };
  rec(rec, 0, amp * inv_src);
}

OpticalState apply_linear_map(const OpticalState& s, const LinearMap& lm) {
  OpticalState out(s.n_max());
  for (const auto& [config, amp] : s.terms()) {
    expand_term(config, amp, lm, out);
  }
  out.prune_zeros();
  return out;
}

LinearMap beamsplitter_map(Mode a, Mode b, const PdbsSpec& spec,
                           bool adjoint) {
  const cx rp = (adjoint ? -kI : kI);
  LinearMap lm;
  lm.images = {
      {slot_key(a, Pol::H), {{a, Pol::H, spec.t_h}, {b, Pol::H, rp * spec.r_h()}}},
      {slot_key(b, Pol::H), {{b, Pol::H, spec.t_h}, {a, Pol::H, rp * spec.r_h()}}},
      {slot_key(a, Pol::V), {{a, Pol::V, spec.t_v}, {b, Pol::V, rp * spec.r_v()}}},
      {slot_key(b, Pol::V), {{b, Pol::V, spec.t_v}, {a, Pol::V, rp * spec.r_v()}}},
  };
  return lm;
}

LinearMap jones_map(Mode m, const Eigen::Matrix2cd& u) {
  LinearMap lm;
  lm.images = {
      {slot_key(m, Pol::H),
       {{m, Pol::H, u(0, 0)}, {m, Pol::V, u(1, 0)}}},
      {slot_key(m, Pol::V),
       {{m, Pol::H, u(0, 1)}, {m, Pol::V, u(1, 1)}}},
  };
  return lm;
}

LinearMap pbs_map(Mode a, Mode b, bool adjoint) {
  const cx rp = (adjoint ? -kI : kI);
  LinearMap lm;
  lm.images = {
      {slot_key(a, Pol::H), {{a, Pol::H, cx{1.0}}}},
      {slot_key(b, Pol::H), {{b, Pol::H, cx{1.0}}}},
      {slot_key(a, Pol::V), {{b, Pol::V, rp}}},
      {slot_key(b, Pol::V), {{a, Pol::V, rp}}},
  };
  return lm;
}

}  // namespace

PdbsSpec PdbsSpec::from_transmissions(double big_t_h, double big_t_v) {
  if (big_t_h < 0.0 || big_t_h > 1.0 || big_t_v < 0.0 || big_t_v > 1.0) {
    throw std::invalid_argument("transmissions must lie in [0, 1]");
  }
  return PdbsSpec{std::sqrt(big_t_h), std::sqrt(big_t_v)};
}

double PdbsSpec::r_h() const { return std::sqrt(std::max(0.0, 1.0 - t_h * t_h)); }
double PdbsSpec::r_v() const { return std::sqrt(std::max(0.0, 1.0 - t_v * t_v)); }

OpticalState apply_beamsplitter(const OpticalState& s, Mode a, Mode b,
                                const PdbsSpec& spec) {
  if (a == b) throw std::invalid_argument("beamsplitter ports must differ");
  return apply_linear_map(s, beamsplitter_map(a, b, spec, false));
}

OpticalState apply_beamsplitter_adjoint(const OpticalState& s, Mode a, Mode b,
                                        const PdbsSpec& spec) {
  if (a == b) throw std::invalid_argument("beamsplitter ports must differ");
  return apply_linear_map(s, beamsplitter_map(a, b, spec, true));
}

OpticalState apply_hwp(const OpticalState& s, Mode m, double theta_deg) {
  const double th = theta_deg * std::numbers::pi / 180.0;
  Eigen::Matrix2cd u;
  u << std::cos(2 * th), std::sin(2 * th), std::sin(2 * th),
      -std::cos(2 * th);
  return apply_linear_map(s, jones_map(m, u));
}

OpticalState apply_jones(const OpticalState& s, Mode m,
                         const Eigen::Matrix2cd& u) {
  if ((u * u.adjoint() - Eigen::Matrix2cd::Identity()).cwiseAbs().maxCoeff() >
      1e-12) {
    throw std::invalid_argument("Jones matrix is not unitary");
  }
  return apply_linear_map(s, jones_map(m, u));
}

OpticalState apply_pbs(const OpticalState& s, Mode a, Mode b) {
  if (a == b) throw std::invalid_argument("pbs ports must differ");
  return apply_linear_map(s, pbs_map(a, b, false));
}

OpticalState apply_pbs_adjoint(const OpticalState& s, Mode a, Mode b) {
  if (a == b) throw std::invalid_argument("pbs ports must differ");
  return apply_linear_map(s, pbs_map(a, b, true));
}

OpticalState apply_polarizer(const OpticalState& s, Mode m,
                             const Eigen::Vector2cd& axis, Mode loss) {
  if (m == loss) throw std::invalid_argument("loss mode must be fresh");
  if (std::abs(axis.norm() - 1.0) > 1e-12) {
    throw std::invalid_argument("polarizer axis must be a unit vector");
  }
  Eigen::Matrix2cd u;
  u.col(0) = axis;
  u.col(1) << -std::conj(axis(1)), std::conj(axis(0));
  OpticalState out = apply_jones(s, m, u.adjoint());  // axis -> H
  out = apply_pbs(out, m, loss);                      // V component -> loss
  return apply_jones(out, m, u);                      // H -> axis
}

OpticalState apply_polarizer(const OpticalState& s, Mode m, double axis_deg,
                             Mode loss) {
  const double th = axis_deg * std::numbers::pi / 180.0;
  Eigen::Vector2cd axis;
  axis << std::cos(th), std::sin(th);
  return apply_polarizer(s, m, axis, loss);
}

OpticalState tag_photons(const OpticalState& s, Mode m, std::uint8_t tag) {
  OpticalState out(s.n_max());
  for (const auto& [config, amp] : s.terms()) {
    FockConfig c;
    for (std::size_t i = 0; i < config.num_slots(); ++i) {
      SlotEntry e = config.slot(i);
      if (e.spatial == m) {
        if (e.tag != 0 && e.tag != tag) {
          throw std::logic_error(
              "retagging a mode with mixed tags would merge distinct "
              "occupations");
        }
        e.tag = tag;
      }
      c.add(e);
    }
    if (c.num_slots() != config.num_slots()) {
      throw std::logic_error(
          "retagging merged occupations; tag before interference only");
    }
    out.add(c, amp);
  }
  return out;
}

PostSelection postselect(const OpticalState& s,
                         const std::vector<Mode>& modes) {
  const int want = static_cast<int>(modes.size());
  PostSelection out;
  out.state = OpticalState(s.n_max());
  double prob = 0.0;
  for (const auto& [config, amp] : s.terms()) {
    if (config.total_photons() != want) continue;
    bool ok = true;
    for (Mode m : modes) {
      if (config.photons_in_mode(m) != 1) {
        ok = false;
        break;
      }
    }
    if (!ok) continue;
    prob += std::norm(amp);
    out.state.add(config, amp);
  }
  out.prob = prob;
  if (prob >= 1e-28) out.state = out.state.renormalized();
  return out;
}

PostSelection project_pattern(
    const OpticalState& s, const std::vector<std::pair<Mode, int>>& counts) {
  PostSelection out;
  out.state = OpticalState(s.n_max());
  double prob = 0.0;
  bool have_outcome = false;
  FockConfig outcome;  // content of the projected modes; must be unique

  auto projected = [&counts](Mode m) {
    return std::any_of(counts.begin(), counts.end(),
                       [m](const auto& p) { return p.first == m; });
  };

  for (const auto& [config, amp] : s.terms()) {
    bool ok = true;
    for (const auto& [m, c] : counts) {
      if (config.photons_in_mode(m) != c) {
        ok = false;
        break;
      }
    }
    if (!ok) continue;
    FockConfig kept;
    FockConfig removed;
    for (std::size_t i = 0; i < config.num_slots(); ++i) {
      const SlotEntry e = config.slot(i);
      (projected(e.spatial) ? removed : kept).add(e);
    }
    if (!have_outcome) {
      outcome = removed;
      have_outcome = true;
    } else if (!(outcome == removed)) {
      throw std::runtime_error(
          "pattern projection is not a single measurement outcome: " +
          outcome.str() + " vs " + removed.str());
    }
    prob += std::norm(amp);
    out.state.add(kept, amp);
  }
  out.prob = prob;
  if (prob >= 1e-28) out.state = out.state.renormalized();
  return out;
}

OpticalState prune_lost(const OpticalState& s, const std::vector<Mode>& losses,
                        int needed) {
  OpticalState out(s.n_max());
  for (const auto& [config, amp] : s.terms()) {
    int lost = 0;
    for (Mode m : losses) lost += config.photons_in_mode(m);
    if (config.total_photons() - lost >= needed) out.add(config, amp);
  }
  return out;
}

QubitState to_qubit_state(const OpticalState& s,
                          const std::vector<Mode>& order) {
  const int n = static_cast<int>(order.size());
  std::vector<cx> amps(std::size_t{1} << n, cx{0.0});
  for (const auto& [config, amp] : s.terms()) {
    if (config.total_photons() != n) {
      throw std::runtime_error("term " + config.str() +
                               " is not a one-photon-per-mode pattern");
    }
    std::size_t index = 0;
    for (int q = 0; q < n; ++q) {
      const Mode m = order[static_cast<std::size_t>(q)];
      if (config.photons_in_mode(m) != 1) {
        throw std::runtime_error("term " + config.str() +
                                 " does not have one photon in mode " +
                                 std::to_string(m));
      }
      if (config.count(m, Pol::V, 0) == 1) {
        index |= std::size_t{1} << (n - 1 - q);
      } else if (config.count(m, Pol::H, 0) != 1) {
        throw std::runtime_error("term " + config.str() +
                                 " carries tagged photons; qubit readout "
                                 "needs indistinguishable photons");
      }
    }
    amps[index] += amp;
  }
  return QubitState::from_amplitudes(n, std::move(amps), false, 1e-9);
}

OpticalState from_qubit_state(const QubitState& q,
                              const std::vector<Mode>& order, int n_max) {
  const int n = q.num_qubits();
  if (static_cast<int>(order.size()) != n) {
    throw std::invalid_argument("mode list does not match qubit count");
  }
  OpticalState out(n_max);
  for (std::size_t i = 0; i < q.dim(); ++i) {
    if (q.amp(i) == cx{0.0}) continue;
    FockConfig c;
    for (int k = 0; k < n; ++k) {
      const bool v = (i >> (n - 1 - k)) & 1u;
      c.add(order[static_cast<std::size_t>(k)], v ? Pol::V : Pol::H, 0, 1);
    }
    out.add(c, q.amp(i));
  }
  return out;
}

OpticalState spdc_pairs_term(Mode a, Mode b, int n, int n_max) {
  if (n < 0) throw std::invalid_argument("pair count must be >= 0");
  if (a == b) throw std::invalid_argument("source modes must differ");
  OpticalState out(n_max);
  // K^n/n! |0> for K = aH bH + aV bV has unit amplitude on every split
  // k H-pairs / (n-k) V-pairs, hence squared norm n + 1.
  for (int k = 0; k <= n; ++k) {
    FockConfig c;
    c.add(a, Pol::H, 0, k);
    c.add(b, Pol::H, 0, k);
    c.add(a, Pol::V, 0, n - k);
    c.add(b, Pol::V, 0, n - k);
    out.add(c, cx{1.0});
  }
  return out;
}

OpticalState spdc_source(Mode a, Mode b, double g, int n_pairs_max,
                         int n_max) {
  if (n_pairs_max < 0) throw std::invalid_argument("n_pairs_max must be >= 0");
  OpticalState out(n_max);
  for (int n = 0; n <= n_pairs_max; ++n) {
    const OpticalState term = spdc_pairs_term(a, b, n, n_max);
    const double w = std::pow(g, n);
    for (const auto& [c, amp] : term.terms()) out.add(c, w * amp);
  }
  return out.renormalized();
}

}  // namespace tcnot::optics
