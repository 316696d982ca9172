// report.hpp
// Run configuration and machine-readable output for the command-line front
// end.
//
// Outputs must be byte-identical across reruns with the same seed and
// config, so serialization is fully pinned down here: a small JSON document
// builder that preserves insertion order and prints every double with 17
// significant digits (enough to round-trip), and a CSV writer with the same
// number format. Config files are parsed leniently in structure but
// strictly in vocabulary: unknown keys are rejected at every level.

#pragma once

#include "tcnot/noise.hpp"

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace tcnot::report {

// Errors in the run configuration (file or flags); the CLI maps these to
// its config-error exit code.
struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// 17-significant-digit decimal form of a double (round-trip safe); throws
// on non-finite values, which must never reach a result file.
std::string format_g17(double x);

// Order-preserving JSON document: objects emit keys in insertion order,
// numbers via format_g17, so equal documents serialize to equal bytes.
class Json {
 public:
  static Json null();
  static Json boolean(bool b);
  static Json integer(long long v);
  static Json uinteger(unsigned long long v);
  static Json number(double v);
  static Json string(std::string s);
  static Json array();
  static Json object();

  // Array append / object insert (key must be new within the object).
  Json& push(Json v);
  Json& set(std::string key, Json v);

  std::string dump(int indent = 2) const;

 private:
  enum class Kind { Null, Bool, Int, UInt, Double, String, Array, Object };
  Kind kind_ = Kind::Null;
  bool b_ = false;
  long long i_ = 0;
  unsigned long long u_ = 0;
  double d_ = 0.0;
  std::string s_;
  std::vector<Json> items_;
  std::vector<std::pair<std::string, Json>> members_;

  void write(std::string& out, int indent, int depth) const;
};

// CSV with a fixed header; every row must match its width. UTF-8, '\n'
// line endings, minimal quoting.
class Csv {
 public:
  explicit Csv(std::vector<std::string> header);
  Csv& row(const std::vector<std::string>& cells);
  const std::string& str() const { return buf_; }

 private:
  std::string buf_;
  std::size_t cols_;
};

// Noise parameters as configured: `g` / `visibility` are shorthands for the
// per-site values, which can still be overridden individually.
struct NoiseConfig {
  double g = 0.0;
  std::optional<double> g1, g2, g3;
  double visibility = 1.0;
  std::optional<double> v_pdbs, v_bsm13, v_bsm25;
  double input_error = 0.0;
  int n_pairs_max = 1;

  noise::NoiseParams params(int n_max) const;
};

struct SweepConfig {
  std::vector<double> g_values;
  std::vector<double> v_values;
  std::vector<double> input_error_values;
  int n_pairs_max = 2;
  int threads = 0;  // 0 = hardware count

  noise::SweepGrid grid(int n_max) const;
};

struct RunConfig {
  std::string command;  // set by the front end
  long long shots = 10000;
  std::uint64_t seed = 12345;
  std::string out_dir = "out";
  int truncation = 8;
  bool json_stdout = false;  // flag-only; not a config-file key
  // Run metadata; stays null unless the config supplies it, so identical
  // configs give identical bytes.
  std::optional<std::string> timestamp;
  NoiseConfig noise;
  SweepConfig sweep;

  static RunConfig from_file(const std::string& path);
  static RunConfig from_json_text(const std::string& text);

  // Effective configuration echo (fully resolved values, fixed key order).
  Json echo() const;
};

// Standard wrapper of one command's result payload.
Json envelope(const RunConfig& cfg, Json payload);

// Writes content to path, creating parent directories; errors carry the
// path.
void write_text_file(const std::string& path, const std::string& content);

}  // namespace tcnot::report
