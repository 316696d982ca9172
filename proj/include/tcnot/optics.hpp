// optics.hpp
// Sparse Fock-space simulator for a handful of spatial modes carrying H/V
// polarized photons.
//
// A term is a map {(spatial mode, polarization, tag) -> photon count} with a
// complex amplitude; states are hash maps over such occupation configs. The
// optional per-photon tag marks photons made distinguishable at an
// interference site: elements act identically on every tag, but configs with
// different tags never merge, which kills interference exactly where wanted.
//
// Element conventions: transmission keeps the spatial mode with real
// amplitude t, reflection crosses with amplitude i*r (the i is load-bearing
// for the interferometer sign structure); polarizing splitters transmit H
// and cross V with the same i.

#pragma once

#include "tcnot/qstate.hpp"

#include <array>
#include <cstdint>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

namespace tcnot::optics {

using Mode = std::uint16_t;

enum class Pol : std::uint8_t { H = 0, V = 1 };

// Hard cap on total photons in any state; the configurable per-state cap
// n_max() must not exceed it.
inline constexpr int kPhotonCap = 12;

// One occupied slot, packed as (spatial << 6) | (pol << 5) | (tag << 4) |
// count. Sorting entries sorts by slot, since slots are unique per config.
struct SlotEntry {
  Mode spatial = 0;
  Pol pol = Pol::H;
  std::uint8_t tag = 0;  // 0 or 1
  int count = 0;

  static SlotEntry unpack(std::uint32_t e);
  std::uint32_t pack() const;
};

// Occupation-number config over at most kPhotonCap occupied slots.
class FockConfig {
 public:
  FockConfig() = default;

  // Adds k photons to a slot (merging with an existing entry).
  void add(Mode spatial, Pol pol, std::uint8_t tag, int k);
  void add(const SlotEntry& e) { add(e.spatial, e.pol, e.tag, e.count); }

  int total_photons() const;
  int photons_in_mode(Mode spatial) const;
  int count(Mode spatial, Pol pol, std::uint8_t tag = 0) const;
  std::size_t num_slots() const { return len_; }
  SlotEntry slot(std::size_t i) const;

  std::span<const std::uint32_t> raw() const { return {e_.data(), len_}; }

  std::string str() const;

  bool operator==(const FockConfig& o) const;

 private:
  std::array<std::uint32_t, kPhotonCap> e_{};  // sorted, packed entries
  std::size_t len_ = 0;
};

struct FockConfigHash {
  std::size_t operator()(const FockConfig& c) const;
};

// Builds a config from (mode, pol) photon lists, tag 0 everywhere.
FockConfig config_of(const std::vector<std::pair<Mode, Pol>>& photons);

// Superposition of occupation configs. Not necessarily normalized: element
// applications preserve norm, but lossy chains are often followed around by
// explicit projections whose probabilities are read off the norm.
class OpticalState {
 public:
  explicit OpticalState(int n_max = 6);

  static OpticalState vacuum(int n_max = 6);
  static OpticalState single_term(const FockConfig& c, cx amp, int n_max);

  int n_max() const { return n_max_; }
  std::size_t term_count() const { return terms_.size(); }
  const std::unordered_map<FockConfig, cx, FockConfigHash>& terms() const {
    return terms_;
  }

  // Merges amplitude into a config; throws if the config exceeds n_max.
  void add(const FockConfig& c, cx amp);

  cx amplitude(const FockConfig& c) const;
  double norm2() const;

  OpticalState scaled(cx factor) const;
  OpticalState renormalized() const;

  // Drops terms with |amp|^2 below `floor` (exact zeros from interference).
  void prune_zeros(double floor = 1e-30);

 private:
  int n_max_;
  std::unordered_map<FockConfig, cx, FockConfigHash> terms_;
};

// Tensor product; photon totals add and must fit within the larger n_max.
// Throws a truncation error when they do not (never silently clips).
OpticalState product(const OpticalState& a, const OpticalState& b);

// Partially polarizing beam splitter (two-port element on spatial modes a
// and b) with per-polarization transmissions. t/r are amplitude moduli;
// reflection carries phase i.
struct PdbsSpec {
  double t_h = 1.0;
  double t_v = 1.0;

  static PdbsSpec from_transmissions(double big_t_h, double big_t_v);
  static PdbsSpec balanced() { return from_transmissions(0.5, 0.5); }
  double r_h() const;
  double r_v() const;
};

OpticalState apply_beamsplitter(const OpticalState& s, Mode a, Mode b,
                                const PdbsSpec& spec);
// Inverse element (adjoint transfer matrix); for unitarity checks.
OpticalState apply_beamsplitter_adjoint(const OpticalState& s, Mode a, Mode b,
                                        const PdbsSpec& spec);

// Half-wave plate at angle theta (degrees) on one spatial mode:
// H -> cos2t H + sin2t V, V -> sin2t H - cos2t V. Self-inverse.
OpticalState apply_hwp(const OpticalState& s, Mode m, double theta_deg);

// General Jones (polarization) unitary on one spatial mode; columns are the
// images of H and V. Throws if u is not unitary within 1e-12.
OpticalState apply_jones(const OpticalState& s, Mode m,
                         const Eigen::Matrix2cd& u);

// Polarizing beam splitter: H stays, V crosses to the partner mode with
// phase i (both directions).
OpticalState apply_pbs(const OpticalState& s, Mode a, Mode b);
OpticalState apply_pbs_adjoint(const OpticalState& s, Mode a, Mode b);

// Linear polarizer along `axis` (unit Jones vector) on mode m: the
// orthogonal component is routed to the (fresh) loss mode instead of being
// clipped, so norm is conserved until the loss mode is traced or projected.
OpticalState apply_polarizer(const OpticalState& s, Mode m,
                             const Eigen::Vector2cd& axis, Mode loss);
// Convenience overload for a linear axis at angle theta (degrees from H).
OpticalState apply_polarizer(const OpticalState& s, Mode m, double axis_deg,
                             Mode loss);

// Marks every photon currently in mode m with `tag`.
OpticalState tag_photons(const OpticalState& s, Mode m, std::uint8_t tag);

struct PostSelection {
  double prob = 0.0;
  OpticalState state;  // renormalized; vacuum when prob ~ 0
};

// Keeps terms with exactly one photon in each listed mode and nothing
// anywhere else; prob is the squared norm of the kept component (the input
// is assumed normalized).
PostSelection postselect(const OpticalState& s,
                         const std::vector<Mode>& modes);

// Partial projection: keeps terms whose photon count in each listed mode
// matches exactly, then removes those modes from the configs. Requires the
// kept terms to agree on the full (pol, tag) content of the projected modes,
// i.e. the measurement outcome must be a single config; throws otherwise.
PostSelection project_pattern(
    const OpticalState& s, const std::vector<std::pair<Mode, int>>& counts);

// Drops terms that can never produce `needed` photons outside the listed
// loss modes (used to keep noisy pipelines small). Norm drops accordingly.
OpticalState prune_lost(const OpticalState& s, const std::vector<Mode>& losses,
                        int needed);

// One photon per mode in `order` -> qubit per mode (H=0, V=1). Throws when a
// term has any other occupancy, photons outside `order`, or nonzero tags.
QubitState to_qubit_state(const OpticalState& s,
                          const std::vector<Mode>& order);

// Inverse embedding of an n-qubit state on n listed modes.
OpticalState from_qubit_state(const QubitState& q,
                              const std::vector<Mode>& order, int n_max);

// Unnormalized n-pair emission term K^n/n! |0> of a two-mode-squeezing
// source K = aH bH + aV bV (photon pairs across spatial modes a and b).
// Its squared norm is n+1.
OpticalState spdc_pairs_term(Mode a, Mode b, int n, int n_max);

// Normalized truncated two-mode-squeezed state sum_n g^n K^n/n! |0>.
OpticalState spdc_source(Mode a, Mode b, double g, int n_pairs_max,
                         int n_max);

}  // namespace tcnot::optics
