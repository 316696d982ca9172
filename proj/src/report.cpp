// report.cpp

#include "tcnot/report.hpp"

#include <json.hpp>

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

namespace tcnot::report {

namespace {

using njson = nlohmann::json;

void escape_into(std::string& out, const std::string& s) {
  out += '"';
  for (const char ch : s) {
    switch (ch) {
      case '"':
        out += "\\\"";
        break;
      case '\\':
        out += "\\\\";
        break;
      case '\n':
        out += "\\n";
        break;
      case '\t':
        out += "\\t";
        break;
      case '\r':
        out += "\\r";
        break;
      default:
        if (static_cast<unsigned char>(ch) < 0x20) {
          char buf[8];
          std::snprintf(buf, sizeof buf, "\\u%04x", ch);
          out += buf;
        } else {
          out += ch;
        }
    }
  }
  out += '"';
}

}  // namespace

std::string format_g17(double x) {
  if (!std::isfinite(x)) {
    throw std::logic_error("non-finite value has no place in a result file");
  }
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

Json Json::null() { return Json{}; }

Json Json::boolean(bool b) {
  Json j;
  j.kind_ = Kind::Bool;
  j.b_ = b;
  return j;
}

Json Json::integer(long long v) {
  Json j;
  j.kind_ = Kind::Int;
  j.i_ = v;
  return j;
}

Json Json::uinteger(unsigned long long v) {
  Json j;
  j.kind_ = Kind::UInt;
  j.u_ = v;
  return j;
}

Json Json::number(double v) {
  Json j;
  j.kind_ = Kind::Double;
  j.d_ = v;
  (void)format_g17(v);  // reject non-finite at insertion time
  return j;
}

Json Json::string(std::string s) {
  Json j;
  j.kind_ = Kind::String;
  j.s_ = std::move(s);
  return j;
}

Json Json::array() {
  Json j;
  j.kind_ = Kind::Array;
  return j;
}

Json Json::object() {
  Json j;
  j.kind_ = Kind::Object;
  return j;
}

Json& Json::push(Json v) {
  if (kind_ != Kind::Array) throw std::logic_error("push on a non-array");
  items_.push_back(std::move(v));
  return *this;
}

Json& Json::set(std::string key, Json v) {
  if (kind_ != Kind::Object) throw std::logic_error("set on a non-object");
  for (const auto& [k, _] : members_) {
    if (k == key) throw std::logic_error("duplicate JSON key: " + key);
  }
  members_.emplace_back(std::move(key), std::move(v));
  return *this;
}

void Json::write(std::string& out, int indent, int depth) const {
  const auto pad = [&](int d) {
    out.append(static_cast<std::size_t>(indent) * static_cast<std::size_t>(d),
               ' ');
  };
  switch (kind_) {
    case Kind::Null:
      out += "null";
      return;
    case Kind::Bool:
      out += b_ ? "true" : "false";
      return;
    case Kind::Int:
      out += std::to_string(i_);
      return;
    case Kind::UInt:
      out += std::to_string(u_);
      return;
    case Kind::Double:
      out += format_g17(d_);
      return;
    case Kind::String:
      escape_into(out, s_);
      return;
    case Kind::Array: {
      if (items_.empty()) {
        out += "[]";
        return;
      }
      bool scalars_only = true;
      for (const Json& it : items_) {
        if (it.kind_ == Kind::Array || it.kind_ == Kind::Object) {
          scalars_only = false;
          break;
        }
      }
      if (scalars_only) {
        out += '[';
        for (std::size_t i = 0; i < items_.size(); ++i) {
          if (i) out += ", ";
          items_[i].write(out, indent, depth);
        }
        out += ']';
        return;
      }
      out += "[\n";
      for (std::size_t i = 0; i < items_.size(); ++i) {
        pad(depth + 1);
        items_[i].write(out, indent, depth + 1);
        if (i + 1 < items_.size()) out += ',';
        out += '\n';
      }
      pad(depth);
      out += ']';
      return;
    }
    case Kind::Object: {
      if (members_.empty()) {
        out += "{}";
        return;
      }
      out += "{\n";
      for (std::size_t i = 0; i < members_.size(); ++i) {
        pad(depth + 1);
        escape_into(out, members_[i].first);
        out += ": ";
        members_[i].second.write(out, indent, depth + 1);
        if (i + 1 < members_.size()) out += ',';
        out += '\n';
      }
      pad(depth);
      out += '}';
      return;
    }
  }
}

std::string Json::dump(int indent) const {
  std::string out;
  write(out, indent, 0);
  out += '\n';
  return out;
}

namespace {

bool needs_quoting(const std::string& cell) {
  return cell.find_first_of(",\"\n\r") != std::string::npos;
}

void append_csv_row(std::string& buf, const std::vector<std::string>& cells) {
  for (std::size_t i = 0; i < cells.size(); ++i) {
    if (i) buf += ',';
    if (needs_quoting(cells[i])) {
      buf += '"';
      for (char ch : cells[i]) {
        if (ch == '"') buf += '"';
        buf += ch;
      }
      buf += '"';
    } else {
      buf += cells[i];
    }
  }
  buf += '\n';
}

}  // namespace

Csv::Csv(std::vector<std::string> header) : cols_(header.size()) {
  if (cols_ == 0) throw std::invalid_argument("csv needs at least one column");
  append_csv_row(buf_, header);
}

Csv& Csv::row(const std::vector<std::string>& cells) {
  if (cells.size() != cols_) {
    throw std::invalid_argument("csv row width " + std::to_string(cells.size()) +
                                " does not match header width " +
                                std::to_string(cols_));
  }
  append_csv_row(buf_, cells);
  return *this;
}

noise::NoiseParams NoiseConfig::params(int n_max) const {
  noise::NoiseParams p;
  p.with_g(g).with_visibility(visibility);
  if (g1) p.g1 = *g1;
  if (g2) p.g2 = *g2;
  if (g3) p.g3 = *g3;
  if (v_pdbs) p.v_pdbs = *v_pdbs;
  if (v_bsm13) p.v_bsm13 = *v_bsm13;
  if (v_bsm25) p.v_bsm25 = *v_bsm25;
  p.input_error = input_error;
  p.n_pairs_max = n_pairs_max;
  p.n_max = n_max;
  try {
    p.validate();
  } catch (const std::exception& e) {
    throw ConfigError(std::string("invalid noise parameters: ") + e.what());
  }
  return p;
}

noise::SweepGrid SweepConfig::grid(int n_max) const {
  noise::SweepGrid g = noise::SweepGrid::standard();
  if (!g_values.empty()) g.g_values = g_values;
  if (!v_values.empty()) g.v_values = v_values;
  if (!input_error_values.empty()) g.input_error_values = input_error_values;
  g.n_pairs_max = n_pairs_max;
  g.n_max = n_max;
  return g;
}

namespace {

void check_keys(const njson& obj,
                std::initializer_list<const char*> allowed,
                const std::string& where) {
  for (const auto& item : obj.items()) {
    bool ok = false;
    for (const char* key : allowed) {
      if (item.key() == key) {
        ok = true;
        break;
      }
    }
    if (!ok) {
      throw ConfigError("unknown config key \"" + item.key() + "\" in " +
                        where);
    }
  }
}

double as_number(const njson& v, const std::string& where) {
  if (!v.is_number()) throw ConfigError(where + " must be a number");
  return v.get<double>();
}

long long as_integer(const njson& v, const std::string& where) {
  if (!v.is_number_integer()) throw ConfigError(where + " must be an integer");
  return v.get<long long>();
}

int as_small_int(const njson& v, const std::string& where) {
  const long long x = as_integer(v, where);
  if (x < -1000000 || x > 1000000) throw ConfigError(where + " out of range");
  return static_cast<int>(x);
}

std::vector<double> as_number_list(const njson& v, const std::string& where) {
  if (!v.is_array()) throw ConfigError(where + " must be an array of numbers");
  std::vector<double> out;
  out.reserve(v.size());
  for (const auto& x : v) out.push_back(as_number(x, where + " entry"));
  return out;
}

void parse_noise(const njson& j, NoiseConfig& n) {
  check_keys(j,
             {"g", "g1", "g2", "g3", "visibility", "v_pdbs", "v_bsm13",
              "v_bsm25", "input_error", "n_pairs_max"},
             "noise");
  if (j.contains("g")) n.g = as_number(j["g"], "noise.g");
  if (j.contains("g1")) n.g1 = as_number(j["g1"], "noise.g1");
  if (j.contains("g2")) n.g2 = as_number(j["g2"], "noise.g2");
  if (j.contains("g3")) n.g3 = as_number(j["g3"], "noise.g3");
  if (j.contains("visibility"))
    n.visibility = as_number(j["visibility"], "noise.visibility");
  if (j.contains("v_pdbs")) n.v_pdbs = as_number(j["v_pdbs"], "noise.v_pdbs");
  if (j.contains("v_bsm13"))
    n.v_bsm13 = as_number(j["v_bsm13"], "noise.v_bsm13");
  if (j.contains("v_bsm25"))
    n.v_bsm25 = as_number(j["v_bsm25"], "noise.v_bsm25");
  if (j.contains("input_error"))
    n.input_error = as_number(j["input_error"], "noise.input_error");
  if (j.contains("n_pairs_max"))
    n.n_pairs_max = as_small_int(j["n_pairs_max"], "noise.n_pairs_max");
}

void parse_sweep(const njson& j, SweepConfig& s) {
  check_keys(j,
             {"g_values", "v_values", "input_error_values", "n_pairs_max",
              "threads"},
             "sweep");
  if (j.contains("g_values"))
    s.g_values = as_number_list(j["g_values"], "sweep.g_values");
  if (j.contains("v_values"))
    s.v_values = as_number_list(j["v_values"], "sweep.v_values");
  if (j.contains("input_error_values"))
    s.input_error_values =
        as_number_list(j["input_error_values"], "sweep.input_error_values");
  if (j.contains("n_pairs_max"))
    s.n_pairs_max = as_small_int(j["n_pairs_max"], "sweep.n_pairs_max");
  if (j.contains("threads"))
    s.threads = as_small_int(j["threads"], "sweep.threads");
}

}  // namespace

RunConfig RunConfig::from_json_text(const std::string& text) {
  njson j;
  try {
    j = njson::parse(text);
  } catch (const njson::parse_error& e) {
    throw ConfigError(std::string("config is not valid JSON: ") + e.what());
  }
  if (!j.is_object()) throw ConfigError("config root must be a JSON object");
  check_keys(
      j, {"shots", "seed", "out", "truncation", "timestamp", "noise", "sweep"},
      "config");

  RunConfig c;
  if (j.contains("shots")) {
    c.shots = as_integer(j["shots"], "shots");
    if (c.shots < 1) throw ConfigError("shots must be >= 1");
  }
  if (j.contains("seed")) {
    const njson& v = j["seed"];
    if (!v.is_number_integer())
      throw ConfigError("seed must be a non-negative integer");
    if (!v.is_number_unsigned() && v.get<long long>() < 0)
      throw ConfigError("seed must be a non-negative integer");
    c.seed = v.get<std::uint64_t>();
  }
  if (j.contains("out")) {
    if (!j["out"].is_string()) throw ConfigError("out must be a string");
    c.out_dir = j["out"].get<std::string>();
  }
  if (j.contains("truncation"))
    c.truncation = as_small_int(j["truncation"], "truncation");
  if (j.contains("timestamp")) {
    if (!j["timestamp"].is_string())
      throw ConfigError("timestamp must be a string");
    c.timestamp = j["timestamp"].get<std::string>();
  }
  if (j.contains("noise")) {
    if (!j["noise"].is_object()) throw ConfigError("noise must be an object");
    parse_noise(j["noise"], c.noise);
  }
  if (j.contains("sweep")) {
    if (!j["sweep"].is_object()) throw ConfigError("sweep must be an object");
    parse_sweep(j["sweep"], c.sweep);
  }
  return c;
}

RunConfig RunConfig::from_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot read config file: " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return from_json_text(buf.str());
}

Json RunConfig::echo() const {
  Json e = Json::object();
  e.set("shots", Json::integer(shots));
  e.set("seed", Json::uinteger(seed));
  e.set("out", Json::string(out_dir));
  e.set("truncation", Json::integer(truncation));
  e.set("timestamp",
        timestamp ? Json::string(*timestamp) : Json::null());

  const noise::NoiseParams p = noise.params(truncation);
  Json n = Json::object();
  n.set("g1", Json::number(p.g1));
  n.set("g2", Json::number(p.g2));
  n.set("g3", Json::number(p.g3));
  n.set("v_pdbs", Json::number(p.v_pdbs));
  n.set("v_bsm13", Json::number(p.v_bsm13));
  n.set("v_bsm25", Json::number(p.v_bsm25));
  n.set("input_error", Json::number(p.input_error));
  n.set("n_pairs_max", Json::integer(p.n_pairs_max));
  e.set("noise", std::move(n));

  const noise::SweepGrid g = sweep.grid(truncation);
  Json s = Json::object();
  Json gv = Json::array(), vv = Json::array(), ev = Json::array();
  for (double x : g.g_values) gv.push(Json::number(x));
  for (double x : g.v_values) vv.push(Json::number(x));
  for (double x : g.input_error_values) ev.push(Json::number(x));
  s.set("g_values", std::move(gv));
  s.set("v_values", std::move(vv));
  s.set("input_error_values", std::move(ev));
  s.set("n_pairs_max", Json::integer(g.n_pairs_max));
  s.set("threads", Json::integer(sweep.threads));
  e.set("sweep", std::move(s));
  return e;
}

Json envelope(const RunConfig& cfg, Json payload) {
  Json e = Json::object();
  e.set("schema_version", Json::integer(1));
  e.set("command", Json::string(cfg.command));
  e.set("config", cfg.echo());
  e.set("seed", Json::uinteger(cfg.seed));
  e.set("timestamp",
        cfg.timestamp ? Json::string(*cfg.timestamp) : Json::null());
  e.set("payload", std::move(payload));
  return e;
}

void write_text_file(const std::string& path, const std::string& content) {
  const std::filesystem::path p(path);
  if (p.has_parent_path()) {
    std::error_code ec;
    std::filesystem::create_directories(p.parent_path(), ec);
    if (ec) {
      throw std::runtime_error("cannot create directory " +
                               p.parent_path().string() + ": " + ec.message());
    }
  }
  std::ofstream out(p, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot open for writing: " + path);
  out << content;
  out.flush();
  if (!out) throw std::runtime_error("write failed: " + path);
}

}  // namespace tcnot::report
