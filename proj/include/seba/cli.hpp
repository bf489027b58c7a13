// Command dispatch for the seba executable.
//
// Exit status: 0 success, 2 usage error (bad flags, unreadable or
// wrong-version inputs, out-of-domain parameters), 1 computation error.
// Diagnostics go to the error stream; data goes to files or the output stream.
#pragma once

#include <CLI11.hpp>

#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "seba/io.hpp"
#include "seba/lattice.hpp"
#include "seba/secular.hpp"
#include "seba/stats.hpp"
#include "seba/trace.hpp"

namespace seba::cli {

namespace fs = std::filesystem;

/// Parses key=value lines; '#' starts a comment.
inline std::map<std::string, std::string> read_config_file(const fs::path& path) {
  std::map<std::string, std::string> kv;
  std::istringstream in(read_file(path));
  auto trim = [](std::string s) {
    const auto b = s.find_first_not_of(" \t\r");
    const auto e = s.find_last_not_of(" \t\r");
    return b == std::string::npos ? std::string() : s.substr(b, e - b + 1);
  };
  std::string line;
  for (int no = 1; std::getline(in, line); ++no) {
    if (const auto h = line.find('#'); h != std::string::npos) line.erase(h);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw DomainError(path.string() + ":" + std::to_string(no) + ": expected key=value");
    kv[trim(line.substr(0, eq))] = trim(line.substr(eq + 1));
  }
  return kv;
}

/// Appends "--key value" for every config entry whose flag is absent from
/// argv, so explicit flags always win.
inline std::vector<std::string> merge_config(std::vector<std::string> args) {
  std::optional<std::string> path;
  for (std::size_t i = 0; i < args.size(); ++i) {
    if (args[i] == "--config" && i + 1 < args.size()) path = args[i + 1];
    else if (args[i].rfind("--config=", 0) == 0) path = args[i].substr(9);
  }
  if (!path) return args;
  auto present = [&](const std::string& key) {
    for (const auto& a : args)
      if (a == "--" + key || a.rfind("--" + key + "=", 0) == 0) return true;
    return false;
  };
  for (const auto& [k, v] : read_config_file(*path)) {
    if (k == "config" || present(k)) continue;
    args.push_back("--" + k);
    args.push_back(v);
  }
  return args;
}

/// Resolved option values of a subcommand, for embedding in reports.
inline json resolved_config(const CLI::App& sub) {
  json cfg = json::object();
  cfg["command"] = sub.get_name();
  for (const CLI::Option* o : sub.get_options()) {
    const std::string name = o->get_name(false, false);
    if (name.empty() || name == "--help" || name == "--config") continue;
    const std::string key = name.substr(name.find_first_not_of('-'));
    if (o->count() > 0) {
      std::string v;
      for (const auto& r : o->results()) v += (v.empty() ? "" : ",") + r;
      cfg[key] = v;
    } else {
      cfg[key] = o->get_default_str();
    }
  }
  return cfg;
}

inline json report_envelope(const CLI::App& sub, json body) {
  return json{{"schema", "seba-report v" + std::to_string(kReportSchema)},
              {"toolkit", kToolkitVersion},
              {"config", resolved_config(sub)},
              {"report", std::move(body)}};
}

inline std::vector<double> parse_real_list(const std::string& s, const std::string& what) {
  std::vector<double> out;
  for (auto part : detail::split_commas(s)) out.push_back(detail::parse_real(part, what));
  return out;
}

inline double parse_sigma(const std::string& s) {
  if (s == "auto") return 0.0;
  const double v = detail::parse_real(s, "--sigma");
  if (!(v > 0.0)) throw DomainError("--sigma must be positive or auto");
  return v;
}

inline void check_phase_matches(const PerturbedSpectrum& p, double phi) {
  if (p.phi != phi)
    throw ConsistencyError("--phi " + format_real(phi) + " differs from the perturbed file phi " + format_real(p.phi));
}

/// Gap statistics that need no minimum sample size.
inline json gap_summary(const NormSpectrum& spec, const PerturbedSpectrum& pert, double x) {
  const auto g = gap_sequence(spec, pert, x);
  const double total = spec.norm(g.size()) - spec.norm(0);
  return json{{"x", x},
              {"N", g.size()},
              {"mean_delta", total / static_cast<double>(g.size())},
              {"mean_delta_weyl", x / static_cast<double>(g.size())},
              {"mean_d", g.A.back() / static_cast<double>(g.size())},
              {"ratio", g.A.back() / total},
              {"A_of_x", {{"lambda", g.lambda}, {"A", g.A}}}};
}

struct Options {
  // norms
  int dim = 2;
  std::string coeffs;
  double cutoff = 0.0;
  double merge_tol = 1e-10;
  // solve
  std::string norms_path, perturbed_path, out;
  double phi = 0.0;
  double tol = 1e-12;
  std::string tail = "analytic";
  double xmax = 0.0;
  double eps_eval = 1e-10;
  unsigned workers = 1;
  // stats / heat / trace
  int bins = 50;
  std::string betas = "0.2,0.1,0.05";
  double beta = 0.1;
  std::string sigma = "auto";
  double quad_tol = 1e-9;
  // greedy3
  double target = 0.0;
  std::int64_t random = 0;
  std::uint64_t seed = 1;
  // pipeline
  std::string cache_dir = "seba-cache", out_dir = "seba-out";
};

class Runner {
 public:
  Runner(std::ostream& out, std::ostream& err) : out_(out), err_(err) {}

  int run(std::vector<std::string> args) {
    CLI::App app{"Point scatterer spectra and trace formulas on flat tori", "seba"};
    app.option_defaults()->always_capture_default();
    app.require_subcommand(0, 1);
    bool version = false;
    app.add_flag("--version", version, "Print toolkit and schema versions");
    add_commands(app);
    try {
      args = merge_config(std::move(args));
      std::vector<std::string> rev(args.rbegin(), args.rend());
      app.parse(rev);
    } catch (const CLI::ParseError& e) {
      const int code = app.exit(e, out_, err_);
      return code == 0 ? 0 : 2;
    } catch (const Error& e) {
      err_ << "seba: error: " << e.what() << "\n";
      return 2;
    }
    if (version) {
      out_ << "seba " << kToolkitVersion << " (norms schema v" << kNormsSchema << ", perturbed schema v"
           << kPerturbedSchema << ", report schema v" << kReportSchema << ")\n";
      return 0;
    }
    CLI::App* sub = nullptr;
    for (CLI::App* s : app.get_subcommands()) sub = s;
    if (!sub) {
      err_ << app.help();
      return 2;
    }
    try {
      return commands_.at(sub->get_name())(*sub);
    } catch (const IoError& e) {
      err_ << "seba: error: " << e.what() << "\n";
      return 2;
    } catch (const SchemaError& e) {
      err_ << "seba: error: " << e.what() << "\n";
      return 2;
    } catch (const DomainError& e) {
      err_ << "seba: error: " << e.what() << "\n";
      return 2;
    } catch (const std::exception& e) {
      err_ << "seba: error: " << e.what() << "\n";
      return 1;
    }
  }

 private:
  std::ostream& out_;
  std::ostream& err_;
  Options o_;
  std::map<std::string, std::function<int(const CLI::App&)>> commands_;

  static void config_option(CLI::App* s) {
    s->add_option("--config", "key=value file; explicit flags override it");
  }

  void add_commands(CLI::App& app) {
    auto* norms = app.add_subcommand("norms", "Enumerate distinct norms with multiplicities");
    config_option(norms);
    norms->add_option("--dim", o_.dim, "Dimension")->required()->check(CLI::IsMember({2, 3}));
    norms->add_option("--coeffs", o_.coeffs, "Diagonal coefficients c1,c2[,c3]")->required();
    norms->add_option("--cutoff", o_.cutoff, "Largest norm to enumerate")->required();
    norms->add_option("--merge-tol", o_.merge_tol, "Relative tolerance for merging equal norms");
    norms->add_option("--out", o_.out, "Output CSV")->required();
    commands_["norms"] = [this](const CLI::App&) { return cmd_norms(); };

    auto* solve = app.add_subcommand("solve", "Solve the secular equation in every gap");
    config_option(solve);
    solve->add_option("--norms", o_.norms_path, "Norms CSV")->required();
    solve->add_option("--phi", o_.phi, "Phase in radians, |phi| < pi")->required();
    solve->add_option("--tol", o_.tol, "Root residual tolerance");
    solve->add_option("--tail", o_.tail, "Tail model")->check(CLI::IsMember({"analytic", "none"}));
    solve->add_option("--xmax", o_.xmax, "Solve levels with n_j <= xmax (default: half the cutoff)");
    solve->add_option("--eps-eval", o_.eps_eval, "Fast evaluator validation tolerance");
    solve->add_option("--workers", o_.workers, "Worker threads (0: all cores)");
    solve->add_option("--out", o_.out, "Output CSV")->required();
    commands_["solve"] = [this](const CLI::App& s) { return cmd_solve(s); };

    auto* stats = app.add_subcommand("stats", "Spacing statistics report");
    config_option(stats);
    stats->add_option("--norms", o_.norms_path, "Norms CSV")->required();
    stats->add_option("--perturbed", o_.perturbed_path, "Perturbed CSV")->required();
    stats->add_option("--xmax", o_.xmax, "Analysis cutoff")->required();
    stats->add_option("--bins", o_.bins, "Histogram bins on [0, 5]")->check(CLI::PositiveNumber);
    stats->add_option("--out", o_.out, "Output JSON")->required();
    commands_["stats"] = [this](const CLI::App& s) { return cmd_stats(s); };

    auto* heat = app.add_subcommand("heat", "Heat-trace sums over a beta grid");
    config_option(heat);
    heat->add_option("--norms", o_.norms_path, "Norms CSV")->required();
    heat->add_option("--perturbed", o_.perturbed_path, "Perturbed CSV")->required();
    heat->add_option("--betas", o_.betas, "Comma-separated beta values");
    heat->add_option("--out", o_.out, "Output CSV")->required();
    commands_["heat"] = [this](const CLI::App&) { return cmd_heat(); };

    auto* trace = app.add_subcommand("trace-check", "Both sides of the trace identity for a Gaussian");
    config_option(trace);
    trace->add_option("--dim", o_.dim, "Dimension")->required()->check(CLI::IsMember({2, 3}));
    trace->add_option("--norms", o_.norms_path, "Norms CSV")->required();
    trace->add_option("--perturbed", o_.perturbed_path, "Perturbed CSV")->required();
    trace->add_option("--phi", o_.phi, "Phase used for the perturbed file")->required();
    trace->add_option("--beta", o_.beta, "Gaussian width parameter")->required();
    trace->add_option("--sigma", o_.sigma, "Contour depth or auto");
    trace->add_option("--quad-tol", o_.quad_tol, "Absolute quadrature tolerance");
    trace->add_option("--out", o_.out, "Output JSON")->required();
    commands_["trace-check"] = [this](const CLI::App& s) { return cmd_trace(s); };

    auto* greedy = app.add_subcommand("greedy3", "Three-step greedy approximation of a target by a 3D form");
    config_option(greedy);
    greedy->add_option("--coeffs", o_.coeffs, "Coefficients a,b,c (random in [0.5, 2] if omitted with --random)");
    auto* tgt = greedy->add_option("--target", o_.target, "Target value t >= 0");
    auto* rnd = greedy->add_option("--random", o_.random, "Number of random targets in [1, 1e8]")
                    ->check(CLI::PositiveNumber);
    tgt->excludes(rnd);
    greedy->add_option("--seed", o_.seed, "Seed for --random");
    greedy->add_option("--out", o_.out, "Output JSON (default: output stream)");
    commands_["greedy3"] = [this, tgt, rnd](const CLI::App& s) {
      if (tgt->count() == 0 && rnd->count() == 0) throw DomainError("greedy3 needs --target or --random");
      return cmd_greedy(s, tgt->count() > 0);
    };

    auto* pipe = app.add_subcommand("pipeline", "norms, solve, stats, heat and trace-check with caching");
    config_option(pipe);
    pipe->add_option("--dim", o_.dim, "Dimension")->required()->check(CLI::IsMember({2, 3}));
    pipe->add_option("--coeffs", o_.coeffs, "Diagonal coefficients")->required();
    pipe->add_option("--phi", o_.phi, "Phase in radians")->required();
    pipe->add_option("--xmax", o_.xmax, "Solve and analysis cutoff")->required();
    pipe->add_option("--cutoff", o_.cutoff, "Enumeration cutoff (default: 2 xmax)");
    pipe->add_option("--merge-tol", o_.merge_tol, "Relative norm merge tolerance");
    pipe->add_option("--tol", o_.tol, "Root residual tolerance");
    pipe->add_option("--tail", o_.tail, "Tail model")->check(CLI::IsMember({"analytic", "none"}));
    pipe->add_option("--eps-eval", o_.eps_eval, "Fast evaluator validation tolerance");
    pipe->add_option("--bins", o_.bins, "Histogram bins")->check(CLI::PositiveNumber);
    pipe->add_option("--betas", o_.betas, "Heat-trace beta grid");
    pipe->add_option("--beta", o_.beta, "Trace-check beta");
    pipe->add_option("--sigma", o_.sigma, "Trace-check contour depth or auto");
    pipe->add_option("--quad-tol", o_.quad_tol, "Absolute quadrature tolerance");
    pipe->add_option("--workers", o_.workers, "Worker threads (0: all cores)");
    pipe->add_option("--cache-dir", o_.cache_dir, "Directory for cached spectra");
    pipe->add_option("--out-dir", o_.out_dir, "Directory for reports");
    commands_["pipeline"] = [this](const CLI::App& s) { return cmd_pipeline(s); };
  }

  void note(const std::string& msg) { err_ << "seba: " << msg << "\n"; }

  int cmd_norms() {
    const auto form = DiagonalForm::parse(o_.coeffs);
    if (form.dim() != o_.dim) throw DomainError("--dim does not match the number of --coeffs");
    const auto spec = enumerate_norms(form, o_.cutoff, {.merge_tol = o_.merge_tol});
    atomic_write(o_.out, norms_csv(spec));
    note("wrote " + std::to_string(spec.size()) + " norms to " + o_.out);
    return 0;
  }

  PerturbedSpectrum solve_from(const NormSpectrum& spec, double xmax) const {
    SecularOptions sopt;
    sopt.tail = parse_tail_model(o_.tail);
    sopt.eps_eval = o_.eps_eval;
    const SecularEvaluator F(spec, sopt);
    return solve_spectrum(F, ScattererPhase(o_.phi), xmax, {.tol = o_.tol, .workers = o_.workers});
  }

  int cmd_solve(const CLI::App& s) {
    const auto spec = read_norms_csv(o_.norms_path);
    const double xmax = s.get_option("--xmax")->count() ? o_.xmax : 0.5 * spec.cutoff();
    const auto p = solve_from(spec, xmax);
    atomic_write(o_.out, perturbed_csv(p));
    note("wrote " + std::to_string(p.size()) + " levels to " + o_.out);
    return 0;
  }

  int cmd_stats(const CLI::App& s) {
    const auto spec = read_norms_csv(o_.norms_path);
    const auto pert = read_perturbed_csv(o_.perturbed_path);
    const auto r = spacing_report(spec, pert, o_.xmax, o_.bins);
    atomic_write(o_.out, dump_report(report_envelope(s, to_json(r))));
    return 0;
  }

  std::vector<HeatTracePoint> heat_points(const NormSpectrum& spec, const PerturbedSpectrum& pert) const {
    std::vector<HeatTracePoint> pts;
    for (double b : parse_real_list(o_.betas, "--betas")) pts.push_back(heat_sums(spec, pert, b));
    return pts;
  }

  int cmd_heat() {
    const auto spec = read_norms_csv(o_.norms_path);
    const auto pert = read_perturbed_csv(o_.perturbed_path);
    atomic_write(o_.out, heat_csv(heat_points(spec, pert)));
    return 0;
  }

  TraceCheckReport trace_report(const NormSpectrum& spec, const PerturbedSpectrum& pert) const {
    QuadratureSettings qs;
    qs.abs_tol = o_.quad_tol;
    return trace_check(spec, pert, ScattererPhase(o_.phi), GaussianTest(o_.beta), parse_sigma(o_.sigma), qs);
  }

  int cmd_trace(const CLI::App& s) {
    const auto spec = read_norms_csv(o_.norms_path);
    if (spec.form().dim() != o_.dim) throw DomainError("--dim does not match the norms file");
    const auto pert = read_perturbed_csv(o_.perturbed_path);
    check_phase_matches(pert, o_.phi);
    const auto r = trace_report(spec, pert);
    atomic_write(o_.out, dump_report(report_envelope(s, to_json(r))));
    return 0;
  }

  int cmd_greedy(const CLI::App& s, bool single) {
    std::optional<DiagonalForm> form;
    if (!o_.coeffs.empty()) {
      form = DiagonalForm::parse(o_.coeffs);
      if (form->dim() != 3) throw DomainError("greedy3 needs three coefficients");
    }
    json body;
    bool ok = true;
    if (single) {
      if (!form) throw DomainError("--target needs --coeffs");
      const auto g = greedy_approx_3d(*form, o_.target);
      ok = greedy_bounds_hold(*form, o_.target, g);
      body = to_json(g);
      body["t"] = o_.target;
      body["bounds_hold"] = ok;
    } else {
      std::mt19937_64 rng(o_.seed);
      std::uniform_real_distribution<double> ut(1.0, 1e8), uc(0.5, 2.0);
      std::int64_t violations = 0;
      for (std::int64_t i = 0; i < o_.random; ++i) {
        const DiagonalForm f = form ? *form : DiagonalForm(std::vector<double>{uc(rng), uc(rng), uc(rng)});
        const double t = ut(rng);
        if (!greedy_bounds_hold(f, t, greedy_approx_3d(f, t))) ++violations;
      }
      ok = violations == 0;
      body = json{{"samples", o_.random}, {"seed", o_.seed}, {"violations", violations}, {"bounds_hold", ok}};
    }
    const std::string text = dump_report(report_envelope(s, body));
    if (o_.out.empty() || o_.out == "-") out_ << text;
    else atomic_write(o_.out, text);
    return ok ? 0 : 1;
  }

  // A cached file is reused only when its manifest records the same
  // parameter key and the file content still hashes to the recorded value.
  bool cache_valid(const fs::path& file, const std::string& key) const {
    auto manifest = file;
    manifest += ".manifest.json";
    if (!fs::exists(file) || !fs::exists(manifest)) return false;
    try {
      const auto m = json::parse(read_file(manifest));
      return m.at("key").get<std::string>() == key &&
             m.at("content_hash").get<std::string>() == hex64(fnv1a64(read_file(file)));
    } catch (const std::exception&) {
      return false;
    }
  }

  static void cache_store(const fs::path& file, const std::string& key, const std::string& params,
                          const std::string& content) {
    atomic_write(file, content);
    auto manifest = file;
    manifest += ".manifest.json";
    atomic_write(manifest, dump_report(json{{"key", key}, {"params", params}, {"content_hash", hex64(fnv1a64(content))}}));
  }

  int cmd_pipeline(const CLI::App& s) {
    const auto form = DiagonalForm::parse(o_.coeffs);
    if (form.dim() != o_.dim) throw DomainError("--dim does not match the number of --coeffs");
    const double cutoff = s.get_option("--cutoff")->count() ? o_.cutoff : 2.0 * o_.xmax;
    fs::create_directories(o_.cache_dir);
    fs::create_directories(o_.out_dir);

    const std::string norms_params = "norms v" + std::to_string(kNormsSchema) + " coeffs=" + form.to_string() +
                                     " cutoff=" + format_real(cutoff) + " merge_tol=" + format_real(o_.merge_tol);
    const std::string norms_key = hex64(fnv1a64(norms_params));
    const fs::path norms_file = fs::path(o_.cache_dir) / ("norms-" + norms_key + ".csv");
    NormSpectrum spec;
    if (cache_valid(norms_file, norms_key)) {
      note("norms: cache hit " + norms_file.string());
      spec = read_norms_csv(norms_file);
    } else {
      note("norms: computing");
      spec = enumerate_norms(form, cutoff, {.merge_tol = o_.merge_tol});
      cache_store(norms_file, norms_key, norms_params, norms_csv(spec));
    }

    const std::string solve_params = "solve v" + std::to_string(kPerturbedSchema) + " norms=" + norms_key +
                                     " phi=" + format_real(o_.phi) + " tol=" + format_real(o_.tol) +
                                     " xmax=" + format_real(o_.xmax) + " tail=" + o_.tail +
                                     " eps_eval=" + format_real(o_.eps_eval);
    const std::string solve_key = hex64(fnv1a64(solve_params));
    const fs::path pert_file = fs::path(o_.cache_dir) / ("perturbed-" + solve_key + ".csv");
    PerturbedSpectrum pert;
    if (cache_valid(pert_file, solve_key)) {
      note("solve: cache hit " + pert_file.string());
      pert = read_perturbed_csv(pert_file);
    } else {
      note("solve: computing");
      pert = solve_from(spec, o_.xmax);
      cache_store(pert_file, solve_key, solve_params, perturbed_csv(pert));
    }

    json stats;
    try {
      stats = to_json(spacing_report(spec, pert, o_.xmax, o_.bins));
    } catch (const SampleSizeError& e) {
      note(std::string("stats: ") + e.what() + "; reporting gap summary only");
      stats = gap_summary(spec, pert, o_.xmax);
      stats["spacing_statistics"] = nullptr;
      stats["reason"] = e.what();
    }
    const fs::path out_dir(o_.out_dir);
    atomic_write(out_dir / "stats.json", dump_report(report_envelope(s, stats)));
    atomic_write(out_dir / "heat.csv", heat_csv(heat_points(spec, pert)));
    atomic_write(out_dir / "trace.json", dump_report(report_envelope(s, to_json(trace_report(spec, pert)))));
    note("reports written to " + out_dir.string());
    return 0;
  }
};

/// Runs one command line (without the program name).
inline int dispatch(const std::vector<std::string>& args, std::ostream& out = std::cout,
                    std::ostream& err = std::cerr) {
  return Runner(out, err).run(args);
}

inline int dispatch(int argc, const char* const* argv, std::ostream& out = std::cout,
                    std::ostream& err = std::cerr) {
  return dispatch(std::vector<std::string>(argv + 1, argv + argc), out, err);
}

}  // namespace seba::cli
