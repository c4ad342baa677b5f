#pragma once

// JSON scene/experiment configuration: load, validate, save, and the builtin
// scene generator for the standard circular geometry.

#include <array>
#include <algorithm>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <numbers>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "polglrt/errors.hpp"
#include "polglrt/mc_harness.hpp"

namespace polglrt {

using json = nlohmann::ordered_json;
using Triple = std::array<double, 3>;
using Pair = std::array<double, 2>;

struct TransmitterConfig {
  Triple position_m{15000.0, 15000.0, 5000.0};
  Triple dipole{1.0, 0.0, 0.0};
  double gain = 1.0;
  bool operator==(const TransmitterConfig&) const = default;
};

struct ReceiverConfig {
  Triple position_m{0.0, 0.0, 0.0};
  Triple dipole_h{1.0, 0.0, 0.0};
  std::optional<Triple> dipole_v;  // absent: single H antenna
  double gain_h = 1.0;
  double gain_v = 1.0;
  double dp_gain_h = 1.0;
  double dp_gain_v = 1.0;
  bool operator==(const ReceiverConfig&) const = default;
};

struct TargetConfig {
  Pair x2_m{0.0, 0.0};
  Pair v2_mps{0.0, 0.0};
  double rho = 1.0;
  Triple dipole{0.0, 0.0, 1.0};
  bool operator==(const TargetConfig&) const = default;
};

struct WaveformConfig {
  double f0_hz = 2e9;
  double bandwidth_hz = 8e6;
  std::size_t n_samples = 256;
  std::string kind = "random_phase";
  std::uint64_t seed = 7;
  bool operator==(const WaveformConfig&) const = default;
};

struct TopographyConfig {
  double height_m = 0.0;
  Pair gradient{0.0, 0.0};
  bool operator==(const TopographyConfig&) const = default;
};

struct NoiseConfig {
  bool enabled = true;
  std::string snr_convention = "per_sample";
  std::optional<double> tp_snr_db;
  std::optional<double> dp_snr_db;
  std::optional<std::vector<double>> sigma2_tp;
  std::optional<std::vector<double>> sigma2_dp;
  bool operator==(const NoiseConfig&) const = default;
};

struct ImageGridConfig {
  std::size_t nx = 41;
  std::size_t ny = 41;
  Pair x_range_m{-200.0, 200.0};
  Pair y_range_m{-200.0, 200.0};
  bool operator==(const ImageGridConfig&) const = default;
};

struct HypothesisConfig {
  Pair x2_m{0.0, 0.0};
  Pair v2_mps{0.0, 0.0};
  bool operator==(const HypothesisConfig&) const = default;
};

struct ExperimentSection {
  double cfar = 0.001;
  std::size_t trials_h0 = 10000;
  std::size_t trials_h1 = 2000;
  std::size_t holdout_trials = 10000;
  std::size_t dipole_trials = 1000;
  std::vector<double> snr_grid_db;
  std::vector<std::string> modes{"DP-POL", "DP-NOPOL", "POL", "NOPOL"};
  std::string image_mode = "DP-POL";
  std::optional<HypothesisConfig> hypothesis;  // absent: first target's true state
  ImageGridConfig image_grid;
  std::uint64_t seed = 1;
  unsigned threads = 0;
  bool operator==(const ExperimentSection&) const = default;
};

struct SceneConfig {
  double c0 = kSpeedOfLight;
  TransmitterConfig transmitter;
  std::vector<ReceiverConfig> receivers;
  std::vector<TargetConfig> targets;
  WaveformConfig waveform;
  TopographyConfig topography;
  NoiseConfig noise;
  ExperimentSection experiment;
  bool operator==(const SceneConfig&) const = default;

  std::size_t channel_count() const {
    std::size_t n = 0;
    for (const auto& r : receivers) n += r.dipole_v ? 2 : 1;
    return n;
  }
};

namespace detail {

// Collects every problem found while reading a document instead of stopping at the first.
class Reader {
 public:
  std::vector<std::string> errors;
  std::vector<std::string> warnings;

  void fail(const std::string& path, const std::string& msg) { errors.push_back(path + ": " + msg); }

  void read(const json& j, const std::string& path, double& out) {
    if (j.is_number()) out = j.get<double>();
    else fail(path, "expected a number");
  }
  void read(const json& j, const std::string& path, std::uint64_t& out) {
    if (j.is_number_unsigned()) out = j.get<std::uint64_t>();
    else if (j.is_number_integer() && j.get<std::int64_t>() >= 0) out = static_cast<std::uint64_t>(j.get<std::int64_t>());
    else fail(path, "expected a non-negative integer");
  }
  void read(const json& j, const std::string& path, unsigned& out) {
    std::uint64_t v = out;
    read(j, path, v);
    out = static_cast<unsigned>(v);
  }
  void read(const json& j, const std::string& path, bool& out) {
    if (j.is_boolean()) out = j.get<bool>();
    else fail(path, "expected true or false");
  }
  void read(const json& j, const std::string& path, std::string& out) {
    if (j.is_string()) out = j.get<std::string>();
    else fail(path, "expected a string");
  }
  template <std::size_t N>
  void read(const json& j, const std::string& path, std::array<double, N>& out) {
    if (!j.is_array() || j.size() != N) {
      fail(path, "expected an array of " + std::to_string(N) + " numbers");
      return;
    }
    for (std::size_t i = 0; i < N; ++i) read(j[i], path + "[" + std::to_string(i) + "]", out[i]);
  }
  void read(const json& j, const std::string& path, std::vector<double>& out) {
    if (!j.is_array()) return fail(path, "expected an array of numbers");
    out.assign(j.size(), 0.0);
    for (std::size_t i = 0; i < j.size(); ++i) read(j[i], path + "[" + std::to_string(i) + "]", out[i]);
  }
  void read(const json& j, const std::string& path, std::vector<std::string>& out) {
    if (!j.is_array()) return fail(path, "expected an array of strings");
    out.assign(j.size(), "");
    for (std::size_t i = 0; i < j.size(); ++i) read(j[i], path + "[" + std::to_string(i) + "]", out[i]);
  }
  template <class T>
  void read(const json& j, const std::string& path, std::optional<T>& out) {
    if (j.is_null()) {
      out.reset();
      return;
    }
    T v{};
    read(j, path, v);
    out = v;
  }

  // Reads obj[key] if present; absent keys keep the default unless required.
  template <class T>
  void field(const json& obj, const char* key, const std::string& path, T& out, bool required = false) {
    const std::string p = path.empty() ? key : path + "." + key;
    if (!obj.contains(key)) {
      if (required) fail(p, "missing required field");
      return;
    }
    read(obj.at(key), p, out);
  }

  void known_keys(const json& obj, const std::string& path, std::initializer_list<const char*> keys) {
    for (auto it = obj.begin(); it != obj.end(); ++it) {
      bool ok = false;
      for (const char* k : keys) ok = ok || it.key() == k;
      if (!ok) warnings.push_back((path.empty() ? it.key() : path + "." + it.key()) + ": unknown field ignored");
    }
  }

  bool object(const json& j, const std::string& path) {
    if (j.is_object()) return true;
    fail(path, "expected an object");
    return false;
  }
};

inline void normalize_unit(Triple& v, const std::string& path, std::vector<std::string>& errors,
                           std::vector<std::string>& warnings) {
  const double n = std::sqrt(v[0] * v[0] + v[1] * v[1] + v[2] * v[2]);
  if (!(n > 0.0) || !std::isfinite(n)) {
    errors.push_back(path + ": dipole must be a nonzero finite vector");
    return;
  }
  if (std::abs(n - 1.0) > 1e-6) {
    std::ostringstream os;
    os << path << ": norm " << n << " renormalized to 1";
    warnings.push_back(os.str());
  }
  if (std::abs(n - 1.0) > 1e-14)
    for (auto& c : v) c /= n;
}

}  // namespace detail

/// Checks that do not depend on how the document was written; returns every violation.
inline std::vector<std::string> validation_errors(const SceneConfig& c) {
  std::vector<std::string> e;
  auto positive = [&](double v, const std::string& path) {
    if (!(v > 0.0) || !std::isfinite(v)) e.push_back(path + ": must be positive and finite");
  };
  positive(c.c0, "constants.c0");
  positive(c.transmitter.gain, "transmitter.gain");
  if (c.receivers.empty()) e.push_back("receivers: at least one receiver is required");
  for (std::size_t k = 0; k < c.receivers.size(); ++k) {
    const auto& r = c.receivers[k];
    const std::string p = "receivers[" + std::to_string(k) + "]";
    positive(r.gain_h, p + ".gain_h");
    positive(r.dp_gain_h, p + ".dp_gain_h");
    if (r.dipole_v) {
      positive(r.gain_v, p + ".gain_v");
      positive(r.dp_gain_v, p + ".dp_gain_v");
    }
    const double dx = r.position_m[0] - c.transmitter.position_m[0], dy = r.position_m[1] - c.transmitter.position_m[1],
                 dz = r.position_m[2] - c.transmitter.position_m[2];
    if (std::sqrt(dx * dx + dy * dy + dz * dz) < 1e-6) e.push_back(p + ".position_m: coincides with the transmitter");
  }
  for (std::size_t t = 0; t < c.targets.size(); ++t) {
    const auto& tg = c.targets[t];
    const std::string p = "targets[" + std::to_string(t) + "]";
    if (!std::isfinite(tg.rho)) e.push_back(p + ".rho: must be finite");
    if (std::hypot(tg.v2_mps[0], tg.v2_mps[1]) >= kMaxSpeedFraction * c.c0)
      e.push_back(p + ".v2_mps: speed must be below 1e-3 c0");
  }
  positive(c.waveform.f0_hz, "waveform.f0_hz");
  positive(c.waveform.bandwidth_hz, "waveform.bandwidth_hz");
  if (c.waveform.n_samples < 2) e.push_back("waveform.n_samples: must be at least 2");
  try {
    (void)waveform_kind_from_string(c.waveform.kind);
  } catch (const ConfigError& ex) {
    e.push_back(std::string("waveform.kind: ") + ex.what());
  }
  const auto& nz = c.noise;
  try {
    (void)snr_convention_from_string(nz.snr_convention);
  } catch (const ConfigError& ex) {
    e.push_back(std::string("noise.snr_convention: ") + ex.what());
  }
  const std::size_t m = c.channel_count();
  for (const auto* list : {&nz.sigma2_tp, &nz.sigma2_dp}) {
    if (!*list) continue;
    const std::string p = list == &nz.sigma2_tp ? "noise.sigma2_tp" : "noise.sigma2_dp";
    if ((*list)->size() != m) e.push_back(p + ": needs one variance per channel (" + std::to_string(m) + ")");
    for (double v : **list)
      if (!(v > 0.0) || !std::isfinite(v)) {
        e.push_back(p + ": variances must be positive and finite");
        break;
      }
  }
  const auto& x = c.experiment;
  if (!(x.cfar > 0.0 && x.cfar <= 1.0)) e.push_back("experiment.cfar: must lie in (0, 1]");
  else if (x.cfar * static_cast<double>(x.trials_h0) < 10.0 - 1e-9)
    e.push_back("experiment.trials_h0: cfar * trials_h0 must be at least 10");
  if (x.modes.empty()) e.push_back("experiment.modes: at least one mode is required");
  for (const auto& s : x.modes) {
    try {
      (void)detect_mode_from_string(s);
    } catch (const ConfigError& ex) {
      e.push_back(std::string("experiment.modes: ") + ex.what());
    }
  }
  try {
    (void)detect_mode_from_string(x.image_mode);
  } catch (const ConfigError& ex) {
    e.push_back(std::string("experiment.image_mode: ") + ex.what());
  }
  if (x.hypothesis && std::hypot(x.hypothesis->v2_mps[0], x.hypothesis->v2_mps[1]) >= kMaxSpeedFraction * c.c0)
    e.push_back("experiment.hypothesis.v2_mps: speed must be below 1e-3 c0");
  const auto& g = x.image_grid;
  if (g.nx == 0 || g.ny == 0) e.push_back("experiment.image_grid: nx and ny must be at least 1");
  if (!(g.x_range_m[0] < g.x_range_m[1]) && g.nx > 1) e.push_back("experiment.image_grid.x_range_m: min must be below max");
  if (!(g.y_range_m[0] < g.y_range_m[1]) && g.ny > 1) e.push_back("experiment.image_grid.y_range_m: min must be below max");
  return e;
}

inline json to_json(const SceneConfig& c) {
  json j;
  j["constants"] = {{"c0", c.c0}};
  j["transmitter"] = {{"position_m", c.transmitter.position_m}, {"dipole", c.transmitter.dipole}, {"gain", c.transmitter.gain}};
  j["receivers"] = json::array();
  for (const auto& r : c.receivers) {
    json jr = {{"position_m", r.position_m}, {"dipole_h", r.dipole_h}};
    jr["dipole_v"] = r.dipole_v ? json(*r.dipole_v) : json(nullptr);
    jr["gain_h"] = r.gain_h;
    jr["gain_v"] = r.gain_v;
    jr["dp_gain_h"] = r.dp_gain_h;
    jr["dp_gain_v"] = r.dp_gain_v;
    j["receivers"].push_back(jr);
  }
  j["targets"] = json::array();
  for (const auto& t : c.targets)
    j["targets"].push_back({{"x2_m", t.x2_m}, {"v2_mps", t.v2_mps}, {"rho", t.rho}, {"dipole", t.dipole}});
  j["waveform"] = {{"f0_hz", c.waveform.f0_hz},
                   {"bandwidth_hz", c.waveform.bandwidth_hz},
                   {"n_samples", c.waveform.n_samples},
                   {"kind", c.waveform.kind},
                   {"seed", c.waveform.seed}};
  j["topography"] = {{"height_m", c.topography.height_m}, {"gradient", c.topography.gradient}};
  auto opt = [](const auto& o) { return o ? json(*o) : json(nullptr); };
  j["noise"] = {{"enabled", c.noise.enabled},
                {"snr_convention", c.noise.snr_convention},
                {"tp_snr_db", opt(c.noise.tp_snr_db)},
                {"dp_snr_db", opt(c.noise.dp_snr_db)},
                {"sigma2_tp", opt(c.noise.sigma2_tp)},
                {"sigma2_dp", opt(c.noise.sigma2_dp)}};
  const auto& x = c.experiment;
  json jx;
  jx["cfar"] = x.cfar;
  jx["trials_h0"] = x.trials_h0;
  jx["trials_h1"] = x.trials_h1;
  jx["holdout_trials"] = x.holdout_trials;
  jx["dipole_trials"] = x.dipole_trials;
  jx["snr_grid_db"] = x.snr_grid_db;
  jx["modes"] = x.modes;
  jx["image_mode"] = x.image_mode;
  jx["hypothesis"] = x.hypothesis ? json{{"x2_m", x.hypothesis->x2_m}, {"v2_mps", x.hypothesis->v2_mps}} : json(nullptr);
  jx["image_grid"] = {{"nx", x.image_grid.nx},
                      {"ny", x.image_grid.ny},
                      {"x_range_m", x.image_grid.x_range_m},
                      {"y_range_m", x.image_grid.y_range_m}};
  jx["seed"] = x.seed;
  jx["threads"] = x.threads;
  j["experiment"] = jx;
  return j;
}

struct LoadedConfig {
  SceneConfig config;
  std::vector<std::string> warnings;
};

inline std::string join_lines(const std::vector<std::string>& v) {
  std::string s;
  for (const auto& l : v) s += "\n  " + l;
  return s;
}

/// Reads and validates a parsed document; throws ConfigError listing every violation.
inline LoadedConfig config_from_json(const json& j) {
  detail::Reader rd;
  SceneConfig c;
  if (!rd.object(j, "<root>")) throw ConfigError("invalid configuration:" + join_lines(rd.errors));
  rd.known_keys(j, "", {"constants", "transmitter", "receivers", "targets", "waveform", "topography", "noise", "experiment"});

  if (j.contains("constants") && rd.object(j["constants"], "constants")) rd.field(j["constants"], "c0", "constants", c.c0);

  if (j.contains("transmitter") && rd.object(j["transmitter"], "transmitter")) {
    const auto& t = j["transmitter"];
    rd.known_keys(t, "transmitter", {"position_m", "dipole", "gain"});
    rd.field(t, "position_m", "transmitter", c.transmitter.position_m, true);
    rd.field(t, "dipole", "transmitter", c.transmitter.dipole, true);
    rd.field(t, "gain", "transmitter", c.transmitter.gain);
  } else if (!j.contains("transmitter")) {
    rd.fail("transmitter", "missing required field");
  }

  if (!j.contains("receivers")) {
    rd.fail("receivers", "missing required field");
  } else if (!j["receivers"].is_array()) {
    rd.fail("receivers", "expected an array");
  } else {
    for (std::size_t k = 0; k < j["receivers"].size(); ++k) {
      const std::string p = "receivers[" + std::to_string(k) + "]";
      const auto& r = j["receivers"][k];
      if (!rd.object(r, p)) continue;
      rd.known_keys(r, p, {"position_m", "dipole_h", "dipole_v", "gain_h", "gain_v", "dp_gain_h", "dp_gain_v"});
      ReceiverConfig rc;
      rd.field(r, "position_m", p, rc.position_m, true);
      rd.field(r, "dipole_h", p, rc.dipole_h, true);
      rd.field(r, "dipole_v", p, rc.dipole_v);
      rd.field(r, "gain_h", p, rc.gain_h);
      rd.field(r, "gain_v", p, rc.gain_v);
      rd.field(r, "dp_gain_h", p, rc.dp_gain_h);
      rd.field(r, "dp_gain_v", p, rc.dp_gain_v);
      c.receivers.push_back(rc);
    }
  }

  if (j.contains("targets")) {
    if (!j["targets"].is_array()) {
      rd.fail("targets", "expected an array");
    } else {
      for (std::size_t t = 0; t < j["targets"].size(); ++t) {
        const std::string p = "targets[" + std::to_string(t) + "]";
        const auto& jt = j["targets"][t];
        if (!rd.object(jt, p)) continue;
        rd.known_keys(jt, p, {"x2_m", "v2_mps", "rho", "dipole"});
        TargetConfig tc;
        rd.field(jt, "x2_m", p, tc.x2_m, true);
        rd.field(jt, "v2_mps", p, tc.v2_mps);
        rd.field(jt, "rho", p, tc.rho);
        rd.field(jt, "dipole", p, tc.dipole, true);
        c.targets.push_back(tc);
      }
    }
  }

  if (j.contains("waveform") && rd.object(j["waveform"], "waveform")) {
    const auto& w = j["waveform"];
    rd.known_keys(w, "waveform", {"f0_hz", "bandwidth_hz", "n_samples", "kind", "seed"});
    rd.field(w, "f0_hz", "waveform", c.waveform.f0_hz);
    rd.field(w, "bandwidth_hz", "waveform", c.waveform.bandwidth_hz);
    std::uint64_t n = c.waveform.n_samples;
    rd.field(w, "n_samples", "waveform", n);
    c.waveform.n_samples = static_cast<std::size_t>(n);
    rd.field(w, "kind", "waveform", c.waveform.kind);
    rd.field(w, "seed", "waveform", c.waveform.seed);
  }

  if (j.contains("topography") && rd.object(j["topography"], "topography")) {
    const auto& t = j["topography"];
    rd.known_keys(t, "topography", {"height_m", "gradient"});
    rd.field(t, "height_m", "topography", c.topography.height_m);
    rd.field(t, "gradient", "topography", c.topography.gradient);
  }

  if (j.contains("noise") && rd.object(j["noise"], "noise")) {
    const auto& n = j["noise"];
    rd.known_keys(n, "noise", {"enabled", "snr_convention", "tp_snr_db", "dp_snr_db", "sigma2_tp", "sigma2_dp"});
    rd.field(n, "enabled", "noise", c.noise.enabled);
    rd.field(n, "snr_convention", "noise", c.noise.snr_convention);
    rd.field(n, "tp_snr_db", "noise", c.noise.tp_snr_db);
    rd.field(n, "dp_snr_db", "noise", c.noise.dp_snr_db);
    rd.field(n, "sigma2_tp", "noise", c.noise.sigma2_tp);
    rd.field(n, "sigma2_dp", "noise", c.noise.sigma2_dp);
  }

  if (j.contains("experiment") && rd.object(j["experiment"], "experiment")) {
    const auto& x = j["experiment"];
    auto& e = c.experiment;
    rd.known_keys(x, "experiment",
                  {"cfar", "trials_h0", "trials_h1", "holdout_trials", "dipole_trials", "snr_grid_db", "modes",
                   "image_mode", "hypothesis", "image_grid", "seed", "threads"});
    rd.field(x, "cfar", "experiment", e.cfar);
    for (auto [key, ref] : {std::pair<const char*, std::size_t*>{"trials_h0", &e.trials_h0},
                            {"trials_h1", &e.trials_h1},
                            {"holdout_trials", &e.holdout_trials},
                            {"dipole_trials", &e.dipole_trials}}) {
      std::uint64_t v = *ref;
      rd.field(x, key, "experiment", v);
      *ref = static_cast<std::size_t>(v);
    }
    rd.field(x, "snr_grid_db", "experiment", e.snr_grid_db);
    rd.field(x, "modes", "experiment", e.modes);
    rd.field(x, "image_mode", "experiment", e.image_mode);
    if (x.contains("hypothesis") && !x["hypothesis"].is_null() && rd.object(x["hypothesis"], "experiment.hypothesis")) {
      HypothesisConfig h;
      rd.known_keys(x["hypothesis"], "experiment.hypothesis", {"x2_m", "v2_mps"});
      rd.field(x["hypothesis"], "x2_m", "experiment.hypothesis", h.x2_m, true);
      rd.field(x["hypothesis"], "v2_mps", "experiment.hypothesis", h.v2_mps);
      e.hypothesis = h;
    }
    if (x.contains("image_grid") && rd.object(x["image_grid"], "experiment.image_grid")) {
      const auto& g = x["image_grid"];
      rd.known_keys(g, "experiment.image_grid", {"nx", "ny", "x_range_m", "y_range_m"});
      std::uint64_t nx = e.image_grid.nx, ny = e.image_grid.ny;
      rd.field(g, "nx", "experiment.image_grid", nx);
      rd.field(g, "ny", "experiment.image_grid", ny);
      e.image_grid.nx = static_cast<std::size_t>(nx);
      e.image_grid.ny = static_cast<std::size_t>(ny);
      rd.field(g, "x_range_m", "experiment.image_grid", e.image_grid.x_range_m);
      rd.field(g, "y_range_m", "experiment.image_grid", e.image_grid.y_range_m);
    }
    rd.field(x, "seed", "experiment", e.seed);
    rd.field(x, "threads", "experiment", e.threads);
  }

  detail::normalize_unit(c.transmitter.dipole, "transmitter.dipole", rd.errors, rd.warnings);
  for (std::size_t k = 0; k < c.receivers.size(); ++k) {
    const std::string p = "receivers[" + std::to_string(k) + "]";
    detail::normalize_unit(c.receivers[k].dipole_h, p + ".dipole_h", rd.errors, rd.warnings);
    if (c.receivers[k].dipole_v) detail::normalize_unit(*c.receivers[k].dipole_v, p + ".dipole_v", rd.errors, rd.warnings);
  }
  for (std::size_t t = 0; t < c.targets.size(); ++t)
    detail::normalize_unit(c.targets[t].dipole, "targets[" + std::to_string(t) + "].dipole", rd.errors, rd.warnings);

  for (auto& v : validation_errors(c))
    if (std::find(rd.errors.begin(), rd.errors.end(), v) == rd.errors.end()) rd.errors.push_back(v);
  if (!rd.errors.empty()) throw ConfigError("invalid configuration:" + join_lines(rd.errors));
  return {c, rd.warnings};
}

inline LoadedConfig parse_config(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& ex) {
    throw ConfigError(std::string("configuration parse error: ") + ex.what());
  }
  return config_from_json(j);
}

inline LoadedConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open configuration file '" + path + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str());
}

inline void save_config(const SceneConfig& c, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw ConfigError("cannot write configuration file '" + path + "'");
  out << to_json(c).dump(2) << "\n";
}

/// 64-bit FNV-1a over the canonical serialization.
inline std::uint64_t config_hash(const SceneConfig& c) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char ch : to_json(c).dump()) {
    h ^= ch;
    h *= 0x100000001b3ULL;
  }
  return h;
}

inline Vec3 to_vec(const Triple& t) { return Vec3(t[0], t[1], t[2]); }
inline Vec2 to_vec(const Pair& p) { return Vec2(p[0], p[1]); }

inline Scene build_scene(const SceneConfig& c) {
  Scene s;
  s.c0 = c.c0;
  s.tx = AntennaPose{to_vec(c.transmitter.position_m), to_vec(c.transmitter.dipole), c.transmitter.gain};
  for (const auto& r : c.receivers) {
    Receiver rx;
    rx.position = to_vec(r.position_m);
    rx.antennas.push_back({Polarization::H, to_vec(r.dipole_h), r.gain_h, r.dp_gain_h});
    if (r.dipole_v) rx.antennas.push_back({Polarization::V, to_vec(*r.dipole_v), r.gain_v, r.dp_gain_v});
    s.receivers.push_back(rx);
  }
  for (const auto& t : c.targets) s.targets.push_back({to_vec(t.x2_m), to_vec(t.v2_mps), t.rho, to_vec(t.dipole)});
  const Vec2 grad = to_vec(c.topography.gradient);
  s.topography = grad.isZero(0.0) ? Topography::flat(c.topography.height_m) : Topography::plane(c.topography.height_m, grad);
  s.waveform = Waveform::make(c.waveform.f0_hz, c.waveform.bandwidth_hz, c.waveform.n_samples,
                              waveform_kind_from_string(c.waveform.kind), c.waveform.seed);
  return s;
}

inline ExperimentConfig build_experiment(const SceneConfig& c) {
  ExperimentConfig e;
  e.scene = build_scene(c);
  const auto& n = c.noise;
  e.noise.enabled = n.enabled;
  e.noise.convention = snr_convention_from_string(n.snr_convention);
  e.noise.tp_snr_db = n.tp_snr_db;
  e.noise.dp_snr_db = n.dp_snr_db;
  auto vec = [](const std::vector<double>& v) { return Eigen::VectorXd(Eigen::Map<const Eigen::VectorXd>(v.data(), static_cast<Eigen::Index>(v.size()))); };
  if (n.sigma2_tp) e.noise.sigma2_tp = vec(*n.sigma2_tp);
  if (n.sigma2_dp) e.noise.sigma2_dp = vec(*n.sigma2_dp);
  const auto& x = c.experiment;
  if (x.hypothesis) {
    e.hypothesis = {to_vec(x.hypothesis->x2_m), to_vec(x.hypothesis->v2_mps)};
  } else if (!c.targets.empty()) {
    e.hypothesis = {to_vec(c.targets.front().x2_m), to_vec(c.targets.front().v2_mps)};
  }
  e.cfar = x.cfar;
  e.trials_h0 = x.trials_h0;
  e.trials_h1 = x.trials_h1;
  e.holdout_trials = x.holdout_trials;
  e.dipole_trials = x.dipole_trials;
  e.snr_grid_db = x.snr_grid_db;
  e.modes.clear();
  for (const auto& m : x.modes) e.modes.push_back(detect_mode_from_string(m));
  e.image_mode = detect_mode_from_string(x.image_mode);
  e.image = ImageGrid{x.image_grid.nx, x.image_grid.ny, x.image_grid.x_range_m[0], x.image_grid.x_range_m[1],
                      x.image_grid.y_range_m[0], x.image_grid.y_range_m[1]};
  e.seed = x.seed;
  e.threads = x.threads;
  return e;
}

struct StandardSceneOptions {
  std::size_t receivers = 6;
  std::vector<double> azimuths_deg;  // empty: k * 360 / receivers
  Triple target_dipole{0.0, 0.0, 1.0};
  Pair target_x2_m{0.0, 0.0};
  Pair target_v2_mps{10.0, 5.0};
  bool polarimetric = true;
};

/**
 * Circular geometry: transmitter at (15, 15, 5) km, receivers on the 10 km
 * circle around the origin at 5 km altitude with H = (sin t, -cos t, 0) and
 * V = (0, 0, 1), 2 GHz carrier, 8 MHz band, 256 samples, one target.
 */
inline SceneConfig standard_scene(const StandardSceneOptions& o = {}) {
  if (o.receivers == 0) throw ConfigError("paper-vi needs at least one receiver");
  if (!o.azimuths_deg.empty() && o.azimuths_deg.size() != o.receivers)
    throw ConfigError("paper-vi: azimuth list length must equal the receiver count");
  SceneConfig c;
  for (std::size_t k = 0; k < o.receivers; ++k) {
    const double deg = o.azimuths_deg.empty() ? 360.0 * static_cast<double>(k) / static_cast<double>(o.receivers)
                                              : o.azimuths_deg[k];
    const double t = deg * std::numbers::pi / 180.0;
    ReceiverConfig r;
    r.position_m = {10000.0 * std::cos(t), 10000.0 * std::sin(t), 5000.0};
    r.dipole_h = {std::sin(t), -std::cos(t), 0.0};
    if (o.polarimetric) r.dipole_v = Triple{0.0, 0.0, 1.0};
    c.receivers.push_back(r);
  }
  TargetConfig tg;
  tg.x2_m = o.target_x2_m;
  tg.v2_mps = o.target_v2_mps;
  tg.dipole = o.target_dipole;
  std::vector<std::string> errs, warns;
  detail::normalize_unit(tg.dipole, "target dipole", errs, warns);
  if (!errs.empty()) throw ConfigError(errs.front());
  c.targets.push_back(tg);
  c.noise.tp_snr_db = 0.0;
  c.noise.dp_snr_db = 10.0;
  c.experiment.snr_grid_db = {-20, -18, -16, -14, -12, -10, -8, -6, -4, -2, 0};
  return c;
}

}  // namespace polglrt
