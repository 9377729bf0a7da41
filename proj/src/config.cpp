#include "mixcal/config.hpp"

#include <openssl/sha.h>
#include <yaml-cpp/yaml.h>

#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <set>
#include <sstream>

#include "json.hpp"
#include "mixcal/errors.hpp"

namespace mixcal {
namespace {

using Json = nlohmann::ordered_json;

const char* weight_name(WeightMode m) { return m == WeightMode::raw ? "raw" : "background_subtracted"; }
const char* line_name(Line l) { return l == Line::drive ? "drive" : "measurement"; }

struct ComplexKeys {
  const char* re;
  const char* im;
};

// Reads one mapping node, remembering which keys were consumed so that
// leftovers can be reported as unknown.
class YamlReader {
 public:
  YamlReader(YAML::Node node, std::string path, int line) : node_(std::move(node)), path_(std::move(path)), line_(line) {
    if (node_ && !node_.IsNull() && !node_.IsMap()) throw ConfigError("section '" + path_ + "' must be a mapping", line_);
  }

  template <class F>
  void section(const char* key, F&& body) {
    YAML::Node sub = take(key);
    current_.clear();
    YamlReader reader(sub ? sub : YAML::Node(YAML::NodeType::Undefined), path_ + key + ".", sub ? line_of(sub) : line_);
    body(reader);
    reader.finish();
  }

  void field(const char* key, double& v) {
    YAML::Node n = take(key);
    if (!n) return;
    v = scalar<double>(n, "a number");
    if (!std::isfinite(v)) fail(n, "must be finite");
  }

  void field(const char* key, bool& v) {
    YAML::Node n = take(key);
    if (n) v = scalar<bool>(n, "true or false");
  }

  void field(const char* key, std::string& v) {
    YAML::Node n = take(key);
    if (n) v = scalar<std::string>(n, "a string");
  }

  void field(const char* key, std::size_t& v) {
    YAML::Node n = take(key);
    if (n) v = static_cast<std::size_t>(non_negative(n));
  }

  void field(const char* key, int& v) {
    YAML::Node n = take(key);
    if (!n) return;
    const long long raw = integer(n);
    if (raw > std::numeric_limits<int>::max() || raw < std::numeric_limits<int>::min()) fail(n, "out of range");
    v = static_cast<int>(raw);
  }

  void field(const char* key, std::optional<std::uint64_t>& v) {
    YAML::Node n = take(key);
    if (!n || n.IsNull()) return;
    const std::string text = scalar<std::string>(n, "an unsigned integer");
    if (text.empty() || text.find_first_not_of("0123456789") != std::string::npos) fail(n, "expected an unsigned integer");
    try {
      v = std::stoull(text);
    } catch (const std::out_of_range&) {
      fail(n, "does not fit in 64 bits");
    }
  }

  void field(const char* key, std::vector<double>& v) {
    YAML::Node n = take(key);
    if (!n) return;
    if (!n.IsSequence()) fail(n, "expected a list of numbers");
    v.clear();
    for (const auto& item : n) {
      const double x = scalar<double>(item, "a number");
      if (!std::isfinite(x)) fail(item, "must be finite");
      v.push_back(x);
    }
  }

  void field(const char* key, WeightMode& v) {
    YAML::Node n = take(key);
    if (!n) return;
    const std::string s = scalar<std::string>(n, "raw or background_subtracted");
    if (s == "raw") {
      v = WeightMode::raw;
    } else if (s == "background_subtracted") {
      v = WeightMode::background_subtracted;
    } else {
      fail(n, "expected raw or background_subtracted");
    }
  }

  void field(const char* key, Line& v) {
    YAML::Node n = take(key);
    if (!n) return;
    const std::string s = scalar<std::string>(n, "drive or measurement");
    if (s == "drive") {
      v = Line::drive;
    } else if (s == "measurement") {
      v = Line::measurement;
    } else {
      fail(n, "expected drive or measurement");
    }
  }

  void field(ComplexKeys keys, Complex& v) {
    double re = v.real(), im = v.imag();
    field(keys.re, re);
    field(keys.im, im);
    v = {re, im};
  }

  void finish() const {
    if (!node_ || !node_.IsMap()) return;
    for (const auto& kv : node_) {
      const std::string key = kv.first.as<std::string>();
      if (!seen_.count(key)) throw ConfigError("unknown key '" + path_ + key + "'", line_of(kv.first));
    }
  }

 private:
  static int line_of(const YAML::Node& n) { return n.Mark().line >= 0 ? n.Mark().line + 1 : 0; }

  [[noreturn]] void fail(const YAML::Node& n, const std::string& message) const {
    const int line = line_of(n) > 0 ? line_of(n) : line_;
    throw ConfigError(current_.empty() ? message : path_ + current_ + ": " + message, line);
  }

  YAML::Node take(const char* key) {
    seen_.insert(key);
    current_ = key;
    if (!node_ || !node_.IsMap()) return YAML::Node(YAML::NodeType::Undefined);
    const YAML::Node& map = node_;
    return map[key];
  }

  template <class T>
  T scalar(const YAML::Node& n, const char* expected) const {
    if (!n.IsScalar()) fail(n, std::string("expected ") + expected);
    try {
      return n.as<T>();
    } catch (const YAML::BadConversion&) {
      fail(n, std::string("expected ") + expected);
    }
  }

  long long integer(const YAML::Node& n) const {
    const std::string text = scalar<std::string>(n, "an integer");
    std::size_t used = 0;
    long long value = 0;
    try {
      value = std::stoll(text, &used);
    } catch (const std::exception&) {
      fail(n, "expected an integer");
    }
    if (used != text.size()) fail(n, "expected an integer");
    return value;
  }

  long long non_negative(const YAML::Node& n) const {
    const long long v = integer(n);
    if (v < 0) fail(n, "must be >= 0");
    return v;
  }

  YAML::Node node_;
  std::string path_;
  int line_;
  std::set<std::string> seen_;
  std::string current_;
};

class JsonWriter {
 public:
  explicit JsonWriter(Json& j) : j_(j) {}

  template <class F>
  void section(const char* key, F&& body) {
    Json sub = Json::object();
    JsonWriter w(sub);
    body(w);
    j_[key] = std::move(sub);
  }

  void field(const char* key, double v) { j_[key] = v; }
  void field(const char* key, bool v) { j_[key] = v; }
  void field(const char* key, const std::string& v) { j_[key] = v; }
  void field(const char* key, std::size_t v) { j_[key] = v; }
  void field(const char* key, int v) { j_[key] = v; }
  void field(const char* key, const std::optional<std::uint64_t>& v) {
    if (v) {
      j_[key] = *v;
    } else {
      j_[key] = nullptr;
    }
  }
  void field(const char* key, const std::vector<double>& v) { j_[key] = v; }
  void field(const char* key, WeightMode v) { j_[key] = weight_name(v); }
  void field(const char* key, Line v) { j_[key] = line_name(v); }
  void field(ComplexKeys keys, Complex v) {
    j_[keys.re] = v.real();
    j_[keys.im] = v.imag();
  }

 private:
  Json& j_;
};

template <class V>
void visit_grid(V& v, GridSpec& g, const char* cx, const char* cy, const char* hx, const char* hy) {
  v.field(cx, g.x_center);
  v.field(cy, g.y_center);
  v.field(hx, g.x_half_span);
  v.field(hy, g.y_half_span);
  v.field("nx", g.nx);
  v.field("ny", g.ny);
}

template <class V>
void visit_config(V& v, RunConfig& c) {
  VirtualSetup& s = c.setup;
  CalibrationPlan& p = c.plan;
  v.field("seed", c.seed);
  v.field("channel_id", c.channel_id);
  v.field("lo_frequency_hz", s.f_lo_hz);
  v.field("if_frequency_hz", s.f_if_hz);
  v.field("measurement_drive_scale_sqrt_rad_per_s_per_v", s.measurement_drive_scale);
  v.field("report_amplitude_v", s.report_amplitude_v);
  v.section("mixer", [&](auto& m) {
    m.field(ComplexKeys{"carrier_leakage_i_v", "carrier_leakage_q_v"}, s.mixer.carrier_leakage);
    m.field(ComplexKeys{"image_gain_re", "image_gain_im"}, s.mixer.image_gain);
    m.field("attenuation", s.mixer.attenuation);
  });
  v.section("qubit", [&](auto& q) {
    q.field("frequency_hz", s.qubit.qubit_frequency_hz);
    q.field("drive_coupling_rad_per_s_per_v", s.qubit.drive_coupling);
  });
  v.section("resonator", [&](auto& r) {
    r.field("frequency_hz", s.resonator.resonator_frequency_hz);
    r.field("linewidth_hz", s.resonator.linewidth_hz);
    r.field("input_coupling_hz", s.resonator.input_coupling_hz);
    r.field("qubit_coupling_hz", s.resonator.qubit_coupling_hz);
    r.field("dispersive_shift_hz", s.resonator.dispersive_shift_hz);
    r.field("fock_levels", s.resonator.fock_truncation);
  });
  v.section("noise", [&](auto& n) {
    n.field("shots", s.noise.shots);
    n.field("readout_error_01", s.noise.readout_error_01);
    n.field("readout_error_10", s.noise.readout_error_10);
  });
  v.section("drive_leakage_scan", [&](auto& d) {
    d.field("detuning_hz", p.drive_leakage.detuning_hz);
    d.field("pulse_duration_s", p.drive_leakage.pulse_duration_s);
    visit_grid(d, p.drive_leakage.grid, "center_i_v", "center_q_v", "half_span_i_v", "half_span_q_v");
  });
  v.section("drive_sideband_scan", [&](auto& d) {
    d.field("detuning_hz", p.drive_sideband.detuning_hz);
    d.field("pulse_duration_s", p.drive_sideband.pulse_duration_s);
    d.field("envelope_amplitude_v", p.drive_sideband.envelope_amplitude_v);
    d.field("target_excitation", p.drive_sideband.target_excitation);
    d.field("max_envelope_amplitude_v", p.drive_sideband.max_envelope_amplitude_v);
    visit_grid(d, p.drive_sideband.grid, "center_re", "center_im", "half_span_re", "half_span_im");
  });
  v.section("measurement_leakage_scan", [&](auto& m) {
    m.field("detuning_hz", p.measurement_leakage.detuning_hz);
    m.field("ramsey_delay_s", p.measurement_leakage.ramsey.delay_s);
    m.field("virtual_detuning_hz", p.measurement_leakage.ramsey.virtual_detuning_hz);
    m.field("auto_delay", p.measurement_leakage.auto_delay);
    m.field("target_fringes", p.measurement_leakage.target_fringes);
    m.field("max_delay_s", p.measurement_leakage.max_delay_s);
    visit_grid(m, p.measurement_leakage.grid, "center_i_v", "center_q_v", "half_span_i_v", "half_span_q_v");
  });
  v.section("search", [&](auto& q) {
    q.field("radius", p.search.radius);
    q.field("window_shrink", p.search.window_shrink);
    q.field("max_iterations", p.search.max_iterations);
    q.field("convergence_tol", p.search.convergence_tol);
    q.field("candidates_per_axis", p.search.candidates_per_axis);
    q.field("initial_window_fraction", p.search.initial_window_fraction);
  });
  v.section("calibration", [&](auto& k) {
    k.field("zoom_passes", p.zoom_passes);
    k.field("zoom_factor", p.zoom_factor);
    k.field("drive_weights", p.drive_weights);
    k.field("measurement_weights", p.measurement_weights);
  });
  v.section("sweep", [&](auto& w) {
    w.field("detunings_hz", c.sweep.detunings_hz);
    w.field("line", c.sweep.line);
    w.field("pulse_duration_s", c.sweep.pulse_duration_s);
    w.field("ramsey_delay_s", c.sweep.ramsey_delay_s);
  });
}

}  // namespace

void RunConfig::validate() const {
  if (channel_id.empty()) throw ConfigError("channel_id must not be empty");
  try {
    setup.validate();
    plan.validate();
    if (!(sweep.pulse_duration_s > 0.0)) throw DomainError("sweep pulse duration must be > 0");
    if (!(sweep.ramsey_delay_s > 0.0)) throw DomainError("sweep Ramsey delay must be > 0");
  } catch (const DomainError& e) {
    throw ConfigError(std::string("invalid value: ") + e.what());
  }
}

RunConfig parse_config(const std::string& text) {
  YAML::Node root;
  try {
    root = YAML::Load(text);
  } catch (const YAML::ParserException& e) {
    throw ConfigError(e.msg, e.mark.line + 1);
  }
  RunConfig config;
  YamlReader reader(root, "", 1);
  visit_config(reader, config);
  reader.finish();
  config.validate();
  return config;
}

RunConfig load_config(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot read config file " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_config(buf.str());
}

std::string canonical_config(const RunConfig& config) {
  Json j = Json::object();
  JsonWriter writer(j);
  RunConfig copy = config;
  visit_config(writer, copy);
  return j.dump();
}

std::string config_digest(const RunConfig& config) {
  const std::string text = canonical_config(config);
  unsigned char digest[SHA256_DIGEST_LENGTH];
  SHA256(reinterpret_cast<const unsigned char*>(text.data()), text.size(), digest);
  std::string hex;
  char byte[3];
  for (unsigned char b : digest) {
    std::snprintf(byte, sizeof byte, "%02x", b);
    hex += byte;
  }
  return hex;
}

}  // namespace mixcal
