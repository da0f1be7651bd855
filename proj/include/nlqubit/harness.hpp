#pragma once

// Config-driven experiment runner behind the command-line tool. One JSON
// config describes one experiment; see docs/config.md for the schema.
//
// Exit codes: 0 success, 1 invalid config, 2 numerical failure in at least
// one cell, 3 more than half of the shots/cells inconclusive.

#include <chrono>
#include <cmath>
#include <cstdint>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <map>
#include <numbers>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "json.hpp"

#include "nlqubit/discrimination.hpp"
#include "nlqubit/errors.hpp"
#include "nlqubit/fock.hpp"
#include "nlqubit/io.hpp"
#include "nlqubit/meanfield.hpp"
#include "nlqubit/parallel.hpp"
#include "nlqubit/qubit.hpp"

namespace nlqubit::harness {

using json = nlohmann::ordered_json;

inline constexpr const char* kToolName = "nlqubit";
inline constexpr const char* kVersion = "0.1.0";

enum ExitCode : int {
  kExitOk = 0,
  kExitInvalidConfig = 1,
  kExitNumericalFailure = 2,
  kExitInconclusive = 3,
};

class ConfigError : public Error {
 public:
  using Error::Error;
};

inline const std::set<std::string>& experiment_kinds() {
  static const std::set<std::string> kinds{"flow", "discriminate", "meanfield-error", "correlators",
                                           "orth-scaling"};
  return kinds;
}

inline json load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file " + path.string());
  try {
    return json::parse(in);
  } catch (const json::exception& e) {
    throw ConfigError("config is not valid JSON: " + std::string(e.what()));
  }
}

namespace detail {

class Checker {
 public:
  std::vector<std::string> take() { return std::move(violations_); }
  void fail(const std::string& msg) { violations_.push_back(msg); }

  /// Optional finite number; `required` makes absence a violation.
  std::optional<double> number(const json& obj, const std::string& key, const std::string& path,
                               bool required = false) {
    if (!obj.contains(key)) {
      if (required) fail(path + key + ": missing");
      return std::nullopt;
    }
    const auto& v = obj.at(key);
    if (!v.is_number()) {
      fail(path + key + ": expected a number");
      return std::nullopt;
    }
    const double d = v.get<double>();
    if (!std::isfinite(d)) {
      fail(path + key + ": must be finite");
      return std::nullopt;
    }
    return d;
  }

  std::optional<long long> integer(const json& obj, const std::string& key, const std::string& path,
                                   long long min, bool required = false) {
    if (!obj.contains(key)) {
      if (required) fail(path + key + ": missing");
      return std::nullopt;
    }
    const auto& v = obj.at(key);
    if (!v.is_number_integer()) {
      fail(path + key + ": expected an integer");
      return std::nullopt;
    }
    const auto i = v.get<long long>();
    if (i < min) {
      fail(path + key + ": must be >= " + std::to_string(min));
      return std::nullopt;
    }
    return i;
  }

  void positive(const json& obj, const std::string& key, const std::string& path, bool required = false) {
    if (auto d = number(obj, key, path, required); d && !(*d > 0.0)) fail(path + key + ": must be > 0");
  }

  void probability(const json& obj, const std::string& key) {
    if (auto d = number(obj, key, ""); d && !(*d > 0.0 && *d < 1.0)) fail(key + ": must lie in (0, 1)");
  }

  void theta(double t, const std::string& where, bool allow_zero) {
    const bool ok = (allow_zero ? t >= 0.0 : t > 0.0) && t <= std::numbers::pi;
    if (!ok) fail(where + ": theta must lie in " + (allow_zero ? "[0, pi]" : "(0, pi]"));
  }

  void scheme(const json& obj) {
    if (!obj.contains("scheme")) {
      fail("scheme: missing");
      return;
    }
    if (!obj.at("scheme").is_string()) {
      fail("scheme: expected a string");
      return;
    }
    try {
      parse_scheme(obj.at("scheme").get<std::string>());
    } catch (const Error& e) {
      fail(std::string("scheme: ") + e.what());
    }
  }

  /// Non-empty array whose elements pass `each`.
  template <class Each>
  void list(const json& obj, const std::string& key, Each&& each) {
    if (!obj.contains(key)) {
      fail(key + ": missing");
      return;
    }
    const auto& v = obj.at(key);
    if (!v.is_array()) {
      fail(key + ": expected an array");
      return;
    }
    if (v.empty()) {
      fail(key + ": sweep list is empty");
      return;
    }
    for (std::size_t i = 0; i < v.size(); ++i) each(v[i], key + "[" + std::to_string(i) + "]");
  }

 private:
  std::vector<std::string> violations_;
};

}  // namespace detail

/// Lists every violation in the config without running it. Empty means valid.
inline std::vector<std::string> validate(const json& cfg) {
  detail::Checker c;
  if (!cfg.is_object()) {
    c.fail("config must be a JSON object");
    return c.take();
  }
  if (!cfg.contains("kind") || !cfg.at("kind").is_string()) {
    c.fail("kind: missing or not a string");
    return c.take();
  }
  const std::string kind = cfg.at("kind").get<std::string>();
  if (!experiment_kinds().contains(kind)) {
    c.fail("kind: unknown experiment '" + kind + "'");
    return c.take();
  }
  if (cfg.contains("output") && !cfg.at("output").is_string()) c.fail("output: expected a string");
  c.integer(cfg, "seed", "", 0);
  c.integer(cfg, "threads", "", 0);
  c.positive(cfg, "dt", "");

  auto number_elem = [&](const json& v, const std::string& where) -> std::optional<double> {
    if (!v.is_number() || !std::isfinite(v.get<double>())) {
      c.fail(where + ": expected a finite number");
      return std::nullopt;
    }
    return v.get<double>();
  };
  auto count_elem = [&](const json& v, const std::string& where) {
    if (!v.is_number_integer() || v.get<long long>() < 1) c.fail(where + ": expected an integer >= 1");
  };

  if (kind == "flow") {
    if (cfg.contains("grid")) {
      const auto& g = cfg.at("grid");
      if (!g.is_object()) {
        c.fail("grid: expected an object");
      } else {
        c.integer(g, "n_polar", "grid.", 1);
        c.integer(g, "n_azimuth", "grid.", 1);
      }
    }
    if (cfg.contains("params")) {
      const auto& p = cfg.at("params");
      if (!p.is_object()) {
        c.fail("params: expected an object");
      } else {
        for (const char* k : {"v01", "bz", "g"}) c.number(p, k, "params.");
      }
    }
    if (cfg.contains("nonlinear") && !cfg.at("nonlinear").is_boolean()) c.fail("nonlinear: expected a boolean");
  } else if (kind == "discriminate") {
    c.scheme(cfg);
    if (auto t = c.number(cfg, "theta_ab", "", true)) c.theta(*t, "theta_ab", true);
    c.number(cfg, "g", "", true);
    c.integer(cfg, "shots", "", 1, true);
    c.positive(cfg, "t_max", "");
    c.probability(cfg, "orth_eps");
    c.probability(cfg, "orth_tol");
  } else if (kind == "orth-scaling") {
    c.scheme(cfg);
    c.list(cfg, "theta_values", [&](const json& v, const std::string& w) {
      if (auto t = number_elem(v, w)) c.theta(*t, w, false);
    });
    if (auto g = c.number(cfg, "g", "", true); g && *g == 0.0) c.fail("g: must be non-zero");
    c.positive(cfg, "t_max", "");
    c.probability(cfg, "orth_eps");
  } else if (kind == "meanfield-error") {
    c.list(cfg, "n_values", count_elem);
    c.list(cfg, "t_values", [&](const json& v, const std::string& w) {
      if (auto t = number_elem(v, w); t && *t < 0.0) c.fail(w + ": time must be >= 0");
    });
    for (const char* k : {"K", "Kprime", "v01", "v00", "v11", "omega"}) c.number(cfg, k, "");
    c.positive(cfg, "omega0", "");
    if (cfg.contains("initial")) {
      const auto& init = cfg.at("initial");
      if (!init.is_object() || !init.contains("bloch") || !init.at("bloch").is_array() ||
          init.at("bloch").size() != 3) {
        c.fail("initial.bloch: expected [x, y, z]");
      } else {
        double r2 = 0.0;
        bool finite = true;
        for (const auto& v : init.at("bloch")) {
          if (!v.is_number()) {
            finite = false;
            break;
          }
          r2 += v.get<double>() * v.get<double>();
        }
        if (!finite || std::abs(std::sqrt(r2) - 1.0) > kSphereTol) {
          c.fail("initial.bloch: must be a unit vector");
        }
      }
    }
  } else if (kind == "correlators") {
    c.list(cfg, "n_values", count_elem);
    c.integer(cfg, "samples", "", 1);
    if (cfg.contains("encodings")) {
      c.list(cfg, "encodings", [&](const json& v, const std::string& w) {
        if (!v.is_string() || (v.get<std::string>() != "fn" && v.get<std::string>() != "cat")) {
          c.fail(w + ": expected \"fn\" or \"cat\"");
        }
      });
    }
  }
  return c.take();
}

struct RunOptions {
  std::filesystem::path out_dir = ".";
  std::optional<std::uint64_t> seed;
};

struct RunReport {
  int exit_code = kExitOk;
  std::vector<std::string> violations;
  std::vector<std::filesystem::path> outputs;
  std::vector<std::string> failed_cells;
  json summary = json::object();
};

namespace detail {

inline double get_or(const json& j, const char* key, double def) {
  return j.contains(key) ? j.at(key).get<double>() : def;
}

inline std::string output_name(const json& cfg, const char* def) {
  return cfg.contains("output") ? cfg.at("output").get<std::string>() : def;
}

inline std::ofstream open_output(const std::filesystem::path& path) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw ConfigError("cannot write " + path.string());
  return os;
}

inline DiscriminationOptions discrimination_options(const json& cfg) {
  DiscriminationOptions o;
  o.dt = get_or(cfg, "dt", 0.0);
  o.t_max = get_or(cfg, "t_max", 0.0);
  o.orth_eps = get_or(cfg, "orth_eps", kDefaultOrthEps);
  o.store_trajectories = false;
  return o;
}

/// Uniformly distributed pure state from two uniforms.
inline QubitAmplitudes random_state(ShotRng& rng) {
  const double z = 2.0 * rng.uniform() - 1.0;
  const double phi = 2.0 * std::numbers::pi * rng.uniform();
  const double s = std::sqrt(std::max(0.0, 1.0 - z * z));
  return from_bloch(BlochVector(s * std::cos(phi), s * std::sin(phi), z));
}

inline void run_flow(const json& cfg, const std::filesystem::path& dir, RunReport& rep) {
  const json grid = cfg.value("grid", json::object());
  const json params = cfg.value("params", json::object());
  const auto points = sphere_grid(grid.value("n_polar", 20), grid.value("n_azimuth", 20));
  const EffectiveParams p{get_or(params, "v01", 0.0), get_or(params, "bz", 0.0),
                          get_or(params, "g", 1.0)};
  const bool nonlinear = cfg.value("nonlinear", true);
  const auto samples = flow_field(points, p, nonlinear);
  const auto path = dir / output_name(cfg, "flow.csv");
  auto os = open_output(path);
  write_flow_csv(os, samples);
  rep.outputs.push_back(path);
  rep.summary["rows"] = samples.size();
}

inline void run_discriminate(const json& cfg, const std::filesystem::path& dir, int threads,
                             RunReport& rep) {
  const InputPair pair{cfg.at("theta_ab").get<double>(),
                       parse_scheme(cfg.at("scheme").get<std::string>())};
  TrialOptions opt;
  opt.discrimination = discrimination_options(cfg);
  opt.orth_tol = get_or(cfg, "orth_tol", kDefaultOrthTol);
  opt.threads = threads;
  const auto path = dir / output_name(cfg, "trials.json");
  json out;
  try {
    const auto stats = run_trials(pair, cfg.at("g").get<double>(), cfg.at("shots").get<int>(),
                                  cfg.value("seed", std::uint64_t{0}), opt);
    out = to_json(stats);
    if (stats.inconclusive_rate > 0.5) rep.exit_code = kExitInconclusive;
    rep.summary = out;
  } catch (const Error& e) {
    out["error"] = e.what();
    rep.failed_cells.push_back(std::string("trials: ") + e.what());
  }
  auto os = open_output(path);
  os << out.dump(2) << '\n';
  rep.outputs.push_back(path);
}

inline void run_orth_scaling(const json& cfg, const std::filesystem::path& dir, int threads,
                             RunReport& rep) {
  const Scheme scheme = parse_scheme(cfg.at("scheme").get<std::string>());
  const double g = cfg.at("g").get<double>();
  const auto thetas = cfg.at("theta_values").get<std::vector<double>>();
  const auto opt = discrimination_options(cfg);
  struct Cell {
    std::optional<DiscriminationRun> run;
    std::string error;
  };
  std::vector<Cell> cells(thetas.size());
  parallel_for(cells.size(), threads, [&](std::size_t i) {
    try {
      cells[i].run = run_discrimination({thetas[i], scheme}, g, opt);
    } catch (const Error& e) {
      cells[i].error = e.what();
    }
  });
  const auto path = dir / output_name(cfg, "orth_scaling.csv");
  auto os = open_output(path);
  os << "theta,t_orth,t_orth_times_theta,status,residual_overlap\n";
  int inconclusive = 0;
  for (std::size_t i = 0; i < cells.size(); ++i) {
    const double nan = std::numeric_limits<double>::quiet_NaN();
    const auto& c = cells[i];
    if (!c.run) {
      rep.failed_cells.push_back("theta=" + format_double(thetas[i]) + ": " + c.error);
      write_csv_row(os, thetas[i], nan, nan, std::string("error"), nan);
      continue;
    }
    const double t = c.run->t_orth.value_or(nan);
    if (!c.run->conclusive()) ++inconclusive;
    write_csv_row(os, thetas[i], t, t * thetas[i], std::string(to_string(c.run->status)),
                  c.run->residual_overlap);
  }
  rep.outputs.push_back(path);
  rep.summary["inconclusive_cells"] = inconclusive;
  if (2 * inconclusive > static_cast<int>(cells.size())) rep.exit_code = kExitInconclusive;
}

inline void run_meanfield_error(const json& cfg, const std::filesystem::path& dir, int threads,
                                RunReport& rep) {
  TwoModeParams base;
  base.omega0 = get_or(cfg, "omega0", 1.0);
  base.omega = get_or(cfg, "omega", 0.5 * base.omega0);
  base.bigK = get_or(cfg, "K", 1.0);
  base.bigKprime = get_or(cfg, "Kprime", 0.0);
  base.v00 = get_or(cfg, "v00", 0.0);
  base.v11 = get_or(cfg, "v11", 0.0);
  base.v01 = get_or(cfg, "v01", 0.5);
  std::vector<double> r0{1.0, 0.0, 0.0};
  if (cfg.contains("initial")) r0 = cfg.at("initial").at("bloch").get<std::vector<double>>();
  const QubitAmplitudes q0 = from_bloch(BlochVector(r0[0], r0[1], r0[2]));
  const auto ns = cfg.at("n_values").get<std::vector<int>>();
  const auto ts = cfg.at("t_values").get<std::vector<double>>();
  const double dt = get_or(cfg, "dt", 0.0);

  std::vector<std::vector<ModelErrorRow>> per_n(ns.size());
  parallel_for(ns.size(), threads, [&](std::size_t i) {
    per_n[i] = model_error_sweep(base, std::span(&ns[i], 1), ts, q0, dt);
  });
  std::vector<ModelErrorRow> rows;
  for (auto& block : per_n) rows.insert(rows.end(), block.begin(), block.end());

  const auto path = dir / output_name(cfg, "model_error.csv");
  {
    auto os = open_output(path);
    write_model_error_csv(os, rows);
  }
  rep.outputs.push_back(path);

  std::vector<double> fit_t, fit_y;
  for (const auto& r : rows) {
    if (!r.ok) {
      rep.failed_cells.push_back("n=" + std::to_string(r.n) + ",t=" + format_double(r.t) + ": " + r.error);
    } else if (r.t > 0.0) {
      fit_t.push_back(r.t);
      fit_y.push_back(r.n * r.epsilon);
    }
  }
  json fit_json;
  if (!fit_t.empty()) {
    const auto fit = fit_error_bound(fit_t, fit_y);
    fit_json = {{"c", fit.c}, {"t_ent", fit.t_ent}, {"rms_residual", fit.rms_residual},
                {"points", fit.points}};
  }
  // Per-t monotonicity of epsilon in n (rows are n-major in config order).
  json monotone = json::object();
  for (std::size_t j = 0; j < ts.size(); ++j) {
    bool dec = true;
    for (std::size_t i = 1; i < ns.size(); ++i) {
      const auto& prev = rows[(i - 1) * ts.size() + j];
      const auto& cur = rows[i * ts.size() + j];
      if (!(cur.epsilon < prev.epsilon)) dec = false;
    }
    monotone[format_double(ts[j])] = dec;
  }
  const auto fit_path = dir / "model_error_fit.json";
  {
    auto os = open_output(fit_path);
    os << json{{"fit", fit_json}, {"epsilon_decreasing_in_n", monotone}}.dump(2) << '\n';
  }
  rep.outputs.push_back(fit_path);
  rep.summary["fit"] = fit_json;
}

inline void run_correlators(const json& cfg, const std::filesystem::path& dir, RunReport& rep) {
  const auto ns = cfg.at("n_values").get<std::vector<int>>();
  const int samples = cfg.value("samples", 100);
  const auto encodings = cfg.value("encodings", std::vector<std::string>{"fn", "cat"});
  const std::uint64_t seed = cfg.value("seed", std::uint64_t{0});
  const auto path = dir / output_name(cfg, "correlators.csv");
  auto os = open_output(path);
  os << "encoding,n,sample,l,lp,one_re,one_im,two,two_normal_ordered,expected_one_re,"
        "expected_one_im,expected_two\n";
  double max_rel = 0.0;
  for (int n : ns) {
    for (int s = 0; s < samples; ++s) {
      ShotRng rng(seed, (static_cast<std::uint64_t>(n) << 32) | static_cast<std::uint32_t>(s));
      const QubitAmplitudes q = random_state(rng);
      for (const auto& enc : encodings) {
        // CAT_1 coincides with F_1 and follows the F_n row of the table.
        const bool fn = enc == "fn" || n < 2;
        const FockVector v = enc == "fn" ? encode_fn(n, q) : encode_cat(n, q);
        for (int l = 0; l < 2; ++l) {
          for (int lp = 0; lp < 2; ++lp) {
            const cplx one = correlator_one(v, l, lp);
            const double two = correlator_two(v, l, lp).real();
            const double two_no = correlator_two_normal_ordered(v, l, lp).real();
            const double nn = static_cast<double>(n) * (n - 1);
            cplx e1;
            double e2;
            if (fn) {
              e1 = static_cast<double>(n) * std::conj(q[l]) * q[lp];
              e2 = nn * std::norm(q[l]) * std::norm(q[lp]);
            } else {
              e1 = l == lp ? static_cast<double>(n) * std::norm(q[l]) : 0.0;
              e2 = l == lp ? nn * std::norm(q[l]) : 0.0;
            }
            max_rel = std::max({max_rel, std::abs(one - e1) / std::max(1.0, std::abs(e1)),
                                std::abs(two_no - e2) / std::max(1.0, std::abs(e2))});
            os << enc << ',';
            write_csv_row(os, n, s, l, lp, one.real(), one.imag(), two, two_no, e1.real(), e1.imag(), e2);
          }
        }
      }
    }
  }
  rep.outputs.push_back(path);
  rep.summary["max_relative_error"] = max_rel;
}

inline std::string utc_timestamp() {
  const std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

}  // namespace detail

/// Validates and runs one experiment, writing results and manifest.json into
/// options.out_dir. Invalid configs return kExitInvalidConfig without output.
inline RunReport run(json cfg, const RunOptions& options = {}) {
  RunReport rep;
  if (options.seed && cfg.is_object()) cfg["seed"] = *options.seed;
  rep.violations = validate(cfg);
  if (!rep.violations.empty()) {
    rep.exit_code = kExitInvalidConfig;
    return rep;
  }
  const auto start = std::chrono::steady_clock::now();
  std::filesystem::create_directories(options.out_dir);
  const int threads = resolve_threads(cfg.value("threads", 0));
  const std::string kind = cfg.at("kind").get<std::string>();

  if (kind == "flow") detail::run_flow(cfg, options.out_dir, rep);
  else if (kind == "discriminate") detail::run_discriminate(cfg, options.out_dir, threads, rep);
  else if (kind == "orth-scaling") detail::run_orth_scaling(cfg, options.out_dir, threads, rep);
  else if (kind == "meanfield-error") detail::run_meanfield_error(cfg, options.out_dir, threads, rep);
  else detail::run_correlators(cfg, options.out_dir, rep);

  if (!rep.failed_cells.empty()) rep.exit_code = kExitNumericalFailure;
  const double wall = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();

  json manifest;
  manifest["tool"] = kToolName;
  manifest["version"] = kVersion;
  manifest["kind"] = kind;
  manifest["config"] = cfg;
  json outs = json::array();
  for (const auto& p : rep.outputs) outs.push_back(p.filename().string());
  manifest["outputs"] = outs;
  manifest["failed_cells"] = rep.failed_cells;
  manifest["summary"] = rep.summary;
  manifest["exit_code"] = rep.exit_code;
  manifest["threads"] = threads;
  manifest["wall_time_s"] = wall;
  manifest["timestamp"] = detail::utc_timestamp();
  auto os = detail::open_output(options.out_dir / "manifest.json");
  os << manifest.dump(2) << '\n';
  return rep;
}

}  // namespace nlqubit::harness
