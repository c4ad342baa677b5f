// Command-line front end: scene generation, single runs and Monte-Carlo experiments.

#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "polglrt/polglrt.hpp"

namespace fs = std::filesystem;
using namespace polglrt;

namespace {

struct Options {
  std::string config;
  std::string out = ".";
  std::optional<std::uint64_t> seed;
  std::optional<unsigned> threads;
  std::size_t receivers = 6;
  std::optional<std::string> mode;
  std::vector<double> azimuths;
  std::vector<double> target_dipole;
};

std::string hex64(std::uint64_t v) {
  char buf[19];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(v));
  return buf;
}

json vec_json(const Vec3& v) { return json::array({v.x(), v.y(), v.z()}); }

class Run {
 public:
  Run(std::string sub, const Options& o, std::vector<std::string> argv)
      : sub_(std::move(sub)), opt_(o), argv_(std::move(argv)), start_(std::chrono::steady_clock::now()) {}

  int execute() {
    if (sub_ == "paper-vi") return standard_scene_cmd();
    if (opt_.config.empty()) throw ConfigError("--config is required for '" + sub_ + "'");
    auto loaded = load_config(opt_.config);
    for (const auto& w : loaded.warnings) std::cerr << "warning: " << w << "\n";
    warnings_ = loaded.warnings;
    cfg_ = loaded.config;
    if (opt_.seed) cfg_.experiment.seed = *opt_.seed;
    if (opt_.threads) cfg_.experiment.threads = *opt_.threads;
    if (opt_.mode) {
      (void)detect_mode_from_string(*opt_.mode);
      cfg_.experiment.modes = {*opt_.mode};
      cfg_.experiment.image_mode = *opt_.mode;
    }
    for (const auto& e : validation_errors(cfg_)) throw ConfigError("invalid configuration after overrides: " + e);
    fs::create_directories(opt_.out);
    exp_ = build_experiment(cfg_);

    if (sub_ == "simulate") simulate();
    else if (sub_ == "detect") detect_cmd();
    else if (sub_ == "image") image();
    else if (sub_ == "mc-detect") mc_detect();
    else if (sub_ == "mc-dipole") mc_dipole_cmd();
    else if (sub_ == "threshold") threshold();
    write_manifest();
    return 0;
  }

 private:
  std::string path(const char* name) const { return (fs::path(opt_.out) / name).string(); }

  int standard_scene_cmd() {
    StandardSceneOptions o;
    o.receivers = opt_.receivers;
    o.azimuths_deg = opt_.azimuths;
    if (!opt_.target_dipole.empty()) {
      if (opt_.target_dipole.size() != 3) throw ConfigError("--target-dipole needs three components");
      o.target_dipole = {opt_.target_dipole[0], opt_.target_dipole[1], opt_.target_dipole[2]};
    }
    SceneConfig c = standard_scene(o);
    if (opt_.seed) c.experiment.seed = *opt_.seed;
    if (opt_.threads) c.experiment.threads = *opt_.threads;
    if (opt_.out == "-" || opt_.out == ".") {
      std::cout << to_json(c).dump(2) << "\n";
    } else {
      save_config(c, opt_.out);
    }
    return 0;
  }

  void simulate() {
    TrialEngine engine(exp_);
    csv::write_file(path("signals_clean.csv"), [&](std::ostream& os) { csv::write_signals(os, engine.clean()); });
    const bool dp_noise = cfg_.noise.dp_snr_db || cfg_.noise.sigma2_dp;
    if (cfg_.noise.enabled && (cfg_.noise.tp_snr_db || cfg_.noise.sigma2_tp)) {
      NoiseCov cov = engine.single_covariance();
      if (!dp_noise) cov.sigma2_dp.reset();
      const auto z = engine.standard_noise(NoiseKey{exp_.seed, stream::single, 0});
      const auto data = engine.realization(z, true, cov);
      csv::write_file(path("signals.csv"), [&](std::ostream& os) { csv::write_signals(os, data); });
      results_["sigma2_tp"] = cov.sigma2_tp(0);
      if (cov.sigma2_dp) results_["sigma2_dp"] = (*cov.sigma2_dp)(0);
    }
    results_["channels"] = engine.channels().size();
    results_["samples"] = engine.clean().grid.size();
  }

  void detect_cmd() {
    const DetectMode mode = opt_.mode ? detect_mode_from_string(*opt_.mode) : exp_.modes.front();
    const auto r = detect_once(exp_, mode);
    json j;
    j["mode"] = to_string(mode);
    j["lambda"] = r.output.lambda;
    j["lambda_full"] = r.output.lambda_full;
    j["lambda_dp"] = r.output.lambda_dp;
    j["degenerate"] = r.output.degenerate;
    if (r.output.e_est) j["e_est"] = vec_json(*r.output.e_est);
    if (r.dphi) j["dphi_rad"] = *r.dphi;
    std::cout << "lambda " << r.output.lambda << "\n";
    if (r.output.e_est) {
      const auto& e = *r.output.e_est;
      std::cout << "e_est " << e.x() << " " << e.y() << " " << e.z() << "\n";
    }
    if (r.dphi) std::cout << "dphi_rad " << *r.dphi << "\n";
    std::ofstream(path("detect.json")) << j.dump(2) << "\n";
    results_ = j;
  }

  void image() {
    const auto img = statistic_image(exp_);
    csv::write_file(path("stat_image.csv"), [&](std::ostream& os) { csv::write_image(os, img); });
    csv::write_file(path("targets.csv"), [&](std::ostream& os) { csv::write_annotations(os, img); });
    const auto [ix, iy] = img.argmax();
    results_["argmax"] = {{"ix", ix}, {"iy", iy}, {"x_m", img.grid.x(ix)}, {"y_m", img.grid.y(iy)}};
  }

  void mc_detect() {
    const auto res = sweep_snr(exp_);
    csv::write_file(path("pd_curve.csv"), [&](std::ostream& os) { csv::write_pd(os, res.pd); });
    csv::write_file(path("thresholds.csv"), [&](std::ostream& os) { csv::write_thresholds(os, res.thresholds); });
    if (!res.holdout.empty())
      csv::write_file(path("holdout.csv"), [&](std::ostream& os) { csv::write_holdout(os, res.holdout); });
    json snr90 = json::object();
    for (auto m : exp_.modes) {
      const auto x = snr_at_pd(res.curve(m), 0.9);
      snr90[to_string(m)] = x ? json(*x) : json(nullptr);
      std::cout << to_string(m) << " snr_at_pd0.9 " << (x ? std::to_string(*x) : "n/a") << "\n";
    }
    results_["snr_at_pd_0.9"] = snr90;
  }

  void mc_dipole_cmd() {
    const auto rows = mc_dipole(exp_);
    csv::write_file(path("dphi_curve.csv"), [&](std::ostream& os) { csv::write_dphi(os, rows); });
  }

  void threshold() {
    exp_.validate_cfar();
    if (exp_.snr_grid_db.empty()) throw ConfigError("snr_grid_db is empty");
    TrialEngine engine(exp_);
    const auto lam = engine.statistics(stream::h0, false, exp_.trials_h0, exp_.snr_grid_db, exp_.modes);
    const std::size_t ns = exp_.snr_grid_db.size(), nm = exp_.modes.size();
    std::vector<ThresholdRow> rows;
    for (std::size_t m = 0; m < nm; ++m)
      for (std::size_t s = 0; s < ns; ++s)
        rows.push_back({exp_.modes[m], exp_.snr_grid_db[s],
                        cfar_quantile(column(lam, exp_.trials_h0, ns, nm, s, m), exp_.cfar)});
    csv::write_file(path("thresholds.csv"), [&](std::ostream& os) { csv::write_thresholds(os, rows); });
  }

  void write_manifest() {
    const double wall =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
    json m;
    m["tool"] = "polglrt";
    m["version"] = POLGLRT_VERSION;
    m["subcommand"] = sub_;
    m["argv"] = argv_;
    m["config_hash_fnv1a64"] = hex64(config_hash(cfg_));
    m["seed"] = cfg_.experiment.seed;
    m["threads"] = resolve_threads(cfg_.experiment.threads);
    m["eigen_version"] = std::to_string(EIGEN_WORLD_VERSION) + "." + std::to_string(EIGEN_MAJOR_VERSION) + "." +
                         std::to_string(EIGEN_MINOR_VERSION);
    m["compiler"] = __VERSION__;
    m["wall_time_s"] = wall;
    m["warnings"] = warnings_;
    m["results"] = results_;
    m["config"] = to_json(cfg_);
    std::ofstream(path("manifest.json")) << m.dump(2) << "\n";
  }

  std::string sub_;
  Options opt_;
  std::vector<std::string> argv_;
  std::chrono::steady_clock::time_point start_;
  SceneConfig cfg_;
  ExperimentConfig exp_;
  std::vector<std::string> warnings_;
  json results_ = json::object();
};

void write_error(const std::string& out, const std::string& kind, const std::string& message) {
  json e = {{"error", kind}, {"message", message}};
  std::cerr << e.dump() << "\n";
  if (out.empty() || out == "-") return;
  std::error_code ec;
  fs::path dir(out);
  if (dir.has_extension()) dir = dir.parent_path();
  if (dir.empty()) dir = ".";
  fs::create_directories(dir, ec);
  std::ofstream(dir / "error.json") << e.dump(2) << "\n";
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Polarimetric passive multistatic radar simulator and GLRT detector"};
  app.require_subcommand(1, 1);
  Options opt;

  auto common = [&](CLI::App* s) {
    s->add_option("--config", opt.config, "scene/experiment JSON file");
    s->add_option("--out", opt.out, "output directory");
    s->add_option("--seed", opt.seed, "override experiment seed");
    s->add_option("--threads", opt.threads, "worker threads (default: POLGLRT_THREADS or all cores)");
    s->add_option("--mode", opt.mode, "DP-POL, DP-NOPOL, POL or NOPOL");
  };
  for (const char* name : {"simulate", "detect", "image", "mc-detect", "mc-dipole", "threshold"}) {
    common(app.add_subcommand(name));
  }
  auto* pv = app.add_subcommand("paper-vi", "write the standard circular scene as JSON");
  pv->add_option("--receivers", opt.receivers, "receiver count")->check(CLI::PositiveNumber);
  pv->add_option("--azimuths", opt.azimuths, "receiver azimuths in degrees");
  pv->add_option("--target-dipole", opt.target_dipole, "target dipole (3 components)");
  pv->add_option("--out", opt.out, "output JSON file (default: stdout)");
  pv->add_option("--seed", opt.seed, "experiment seed");
  pv->add_option("--threads", opt.threads, "worker threads");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    std::cerr << app.help();
    return 1;
  }

  const std::string sub = app.get_subcommands().front()->get_name();
  try {
    return Run(sub, opt, std::vector<std::string>(argv, argv + argc)).execute();
  } catch (const Error& e) {
    write_error(opt.out, e.kind(), e.what());
  } catch (const std::exception& e) {
    write_error(opt.out, "internal", e.what());
  }
  return 2;
}
