#pragma once

// Command-line driver. run_cli parses arguments (optionally merged from a
// JSON config), runs one experiment, writes its files and prints a JSON
// summary. Exit codes: 0 pass, 1 input or numerical error, 2 failed check.

#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"

#include "viterbo/cerf.hpp"
#include "viterbo/errors.hpp"
#include "viterbo/expr.hpp"
#include "viterbo/genfam.hpp"
#include "viterbo/hodograph.hpp"
#include "viterbo/io.hpp"
#include "viterbo/jet_space.hpp"
#include "viterbo/parallel.hpp"
#include "viterbo/scenarios.hpp"
#include "viterbo/spectra.hpp"

namespace viterbo {

inline constexpr int exit_pass = 0;
inline constexpr int exit_input_error = 1;
inline constexpr int exit_check_failed = 2;

namespace cli {

struct FamilyOptions {
  std::string g;
  int K = 0;
  std::vector<int> signs;
  std::optional<double> bound;
  std::string family_file;

  GeneratingFamily build(const char* what = "family") const {
    FamilySpec spec;
    if (!family_file.empty()) {
      std::ifstream in(family_file);
      if (!in) throw PreconditionError("cannot read family file " + family_file);
      nlohmann::json j;
      try {
        in >> j;
      } catch (const nlohmann::json::exception& e) {
        throw PreconditionError("malformed family file " + family_file + ": " + e.what());
      }
      spec = family_spec_from_json(j);
    } else {
      if (g.empty()) throw PreconditionError(std::string(what) + " needs --g or --family");
      spec.K = K;
      spec.g = g;
      spec.q_signs = signs.empty() ? std::vector<int>(K, -1) : signs;
    }
    if (static_cast<int>(spec.q_signs.size()) != spec.K)
      throw PreconditionError("--signs must have exactly K entries");
    return GeneratingFamily::from_text(spec.g, spec.q_signs, bound);
  }

  void add(CLI::App* app) {
    app->add_option("--g", g, "bounded part g(q, w1..wK[, t]) of F = Q + g");
    app->add_option("--K", K, "fiber dimension")->check(CLI::Range(0, 4));
    app->add_option("--signs", signs, "signs of Q, one per fiber axis (default all -1)")->delimiter(',');
    app->add_option("--bound", bound, "fiber box half-width R (default from sup |d_w g|)")
        ->check(CLI::PositiveNumber);
    app->add_option("--family", family_file, "family JSON {\"K\", \"Qsigns\", \"g\"}");
  }
};

struct Outputs {
  std::filesystem::path dir = "viterbo-out";
  std::set<std::string> formats{"csv", "svg", "json"};

  bool wants(const std::string& f) const { return formats.count(f) > 0; }
  void csv(const std::string& name, const CsvTable& t) const {
    if (wants("csv")) write_text(dir / name, t.str());
  }
  void svg(const std::string& name, const std::string& s) const {
    if (wants("svg")) write_text(dir / name, s);
  }
  void json(const std::string& name, const ojson& j) const {
    if (wants("json")) write_text(dir / name, j.dump(2) + "\n");
  }
};

inline Expr parse_base(const std::string& text, const char* what) {
  if (text.empty()) throw PreconditionError(std::string(what) + " is required");
  const Expr e = parse(text, 0);
  for (const Variable& v : free_variables(e))
    if (v.kind != VarKind::q) throw PreconditionError(std::string(what) + " may only depend on q");
  return e;
}

inline LegendrianLoop jet_of(const std::string& h, int n) {
  const Expr e = parse_base(h, "--fn");
  const Expr de = differentiate(e, Variable::base());
  return one_jet([&](double q) { return eval(e, Point{q, 0.0, 0.0, {}}); },
                 [&](double q) { return eval(de, Point{q, 0.0, 0.0, {}}); }, n);
}

inline ojson grid_json(const SpectrumGrid& g) {
  ojson j;
  j["n_q"] = g.n_q;
  j["n_w"] = g.n_w;
  return j;
}

/// Turns {"schema": 1, "command": ..., "options": {...}} into argument tokens.
inline std::vector<std::string> config_to_args(const nlohmann::json& cfg) {
  if (!cfg.is_object()) throw PreconditionError("config must be a JSON object");
  if (!cfg.contains("schema") || cfg.at("schema") != 1)
    throw PreconditionError("config needs \"schema\": 1");
  std::vector<std::string> out;
  if (cfg.contains("command")) out.push_back(cfg.at("command").get<std::string>());
  if (!cfg.contains("options")) return out;
  const auto& opts = cfg.at("options");
  if (!opts.is_object()) throw PreconditionError("config \"options\" must be an object");
  auto scalar = [](const nlohmann::json& v) -> std::string {
    if (v.is_string()) return v.get<std::string>();
    if (v.is_number_integer()) return std::to_string(v.get<long long>());
    if (v.is_number()) return format_double(v.get<double>());
    throw PreconditionError("unsupported config value " + v.dump());
  };
  for (const auto& [key, v] : opts.items()) {
    const std::string flag = "--" + key;
    if (v.is_boolean()) {
      if (v.get<bool>()) out.push_back(flag);
    } else if (v.is_array()) {
      std::string joined;
      for (std::size_t i = 0; i < v.size(); ++i) joined += (i ? "," : "") + scalar(v[i]);
      out.push_back(flag);
      out.push_back(joined);
    } else {
      out.push_back(flag);
      out.push_back(scalar(v));
    }
  }
  return out;
}

}  // namespace cli

inline int run_cli(std::vector<std::string> args, std::ostream& out = std::cout,
                   std::ostream& err = std::cerr) {
  using namespace cli;

  static const std::set<std::string> command_names{"spectrum", "cerf",      "positivity", "loop", "lambda-scan",
                                                   "lambda-k", "hodograph", "front",      "thm5"};
  // Merge a JSON config in front of the explicit arguments; explicit values win.
  for (std::size_t i = 0; i < args.size(); ++i) {
    std::string file;
    std::size_t width = 0;
    if (args[i] == "--config" && i + 1 < args.size()) {
      file = args[i + 1];
      width = 2;
    } else if (args[i].rfind("--config=", 0) == 0) {
      file = args[i].substr(9);
      width = 1;
    } else {
      continue;
    }
    std::ifstream in(file);
    if (!in) {
      err << "error: cannot read config " << file << "\n";
      return exit_input_error;
    }
    std::vector<std::string> merged;
    try {
      nlohmann::json cfg;
      in >> cfg;
      merged = config_to_args(cfg);
    } catch (const std::exception& e) {
      err << "error: " << e.what() << "\n";
      return exit_input_error;
    }
    std::vector<std::string> rest(args.begin(), args.begin() + static_cast<std::ptrdiff_t>(i));
    rest.insert(rest.end(), args.begin() + static_cast<std::ptrdiff_t>(i + width), args.end());
    // A command named on the command line must agree with the config's.
    if (!merged.empty() && merged.front().rfind("--", 0) != 0) {
      for (auto it = rest.begin(); it != rest.end(); ++it) {
        if (!command_names.count(*it)) continue;
        if (*it != merged.front()) {
          err << "error: command line names '" << *it << "' but config names '" << merged.front() << "'\n";
          return exit_input_error;
        }
        rest.erase(it);
        break;
      }
    }
    if (!merged.empty() && merged.front().rfind("--", 0) == 0) {
      // No command in the config: its options follow the command line's command.
      args = rest;
      args.insert(args.end(), merged.begin(), merged.end());
    } else {
      args = merged;
      args.insert(args.end(), rest.begin(), rest.end());
    }
    break;
  }

  CLI::App app{"Viterbo numbers, Cerf diagrams and positive Legendrian isotopies in J^1(S^1)"};
  app.option_defaults()->multi_option_policy(CLI::MultiOptionPolicy::TakeLast);
  app.require_subcommand(1);

  unsigned threads = 0;
  Outputs files;
  std::vector<std::string> formats{"csv", "svg", "json"};
  std::string config_unused;
  app.add_option("--threads", threads, "worker threads (0 = one per core)");
  app.add_option("--out", files.dir, "output directory");
  app.add_option("--format", formats, "output formats among csv, svg, json")
      ->delimiter(',')
      ->check(CLI::IsMember({"csv", "svg", "json"}))
      ->multi_option_policy(CLI::MultiOptionPolicy::TakeAll);
  app.add_option("--config", config_unused, "JSON run config with \"schema\": 1");

  // spectrum
  auto* spectrum = app.add_subcommand("spectrum", "Viterbo numbers of a generating family");
  FamilyOptions sp_fam;
  sp_fam.add(spectrum);
  std::string sp_region;
  SpectrumGrid sp_grid;
  spectrum->add_option("--region", sp_region, "f(q); restrict to {f >= 0} (boundary variant)");
  spectrum->add_option("--n-q", sp_grid.n_q, "base grid size")->check(CLI::Range(64, 1 << 16));
  spectrum->add_option("--n-w", sp_grid.n_w, "points per fiber axis (odd)")->check(CLI::Range(33, 1025));

  // cerf
  auto* cerf = app.add_subcommand("cerf", "Cerf diagram and Viterbo trajectory of a family in t");
  FamilyOptions cf_fam;
  cf_fam.add(cerf);
  double cf_a = 0.0, cf_b = 1.0;
  int cf_n_t = 64;
  std::string cf_region;
  CerfOptions cf_opt;
  SpectrumGrid cf_grid;
  std::optional<double> cf_frozen;
  cerf->add_option("--a", cf_a, "start time");
  cerf->add_option("--b", cf_b, "end time");
  cerf->add_option("--n-t", cf_n_t, "time samples")->check(CLI::Range(32, 100000));
  cerf->add_option("--n-q", cf_opt.n_q, "base samples for critical points")->check(CLI::Range(64, 1 << 16));
  cerf->add_option("--spectrum-n-q", cf_grid.n_q, "base grid for the Viterbo numbers")
      ->check(CLI::Range(64, 1 << 16));
  cerf->add_option("--n-w", cf_grid.n_w, "points per fiber axis (odd)")->check(CLI::Range(33, 1025));
  cerf->add_option("--region", cf_region, "f(q); restrict to {f >= 0}");
  cerf->add_option("--frozen-q", cf_frozen, "analyse only the fiber over this q");

  // positivity
  auto* positivity = app.add_subcommand("positivity", "positivity of a family in t or of the built loop");
  FamilyOptions po_fam;
  po_fam.add(positivity);
  double po_a = 0.0, po_b = 1.0;
  int po_n_t = 64, po_n_q = 256;
  std::optional<double> po_loop_eps;
  positivity->add_option("--a", po_a, "start time");
  positivity->add_option("--b", po_b, "end time");
  positivity->add_option("--n-t", po_n_t, "time samples")->check(CLI::Range(2, 100000));
  positivity->add_option("--n-q", po_n_q, "base samples")->check(CLI::Range(16, 1 << 16));
  positivity->add_option("--loop-eps", po_loop_eps, "check the positive loop built with this eps")
      ->check(CLI::PositiveNumber);

  // loop
  auto* loop = app.add_subcommand("loop", "build and verify the positive loop of embeddings");
  double lp_eps = 0.1;
  PositiveLoopOptions lp_opt;
  int lp_svg_frames = 8;
  loop->add_option("--eps", lp_eps, "flow speed eps")->check(CLI::PositiveNumber);
  loop->add_option("--samples", lp_opt.samples, "samples per loop")->check(CLI::Range(64, 1 << 14));
  loop->add_option("--flow-frames", lp_opt.flow_frames, "frames over the flow")->check(CLI::Range(2, 4096));
  loop->add_option("--raise-frames", lp_opt.raise_frames, "frames over the raise")->check(CLI::Range(1, 4096));
  loop->add_option("--svg-frames", lp_svg_frames, "front SVG frames to write")->check(CLI::Range(0, 4096));

  // lambda-scan
  auto* lscan = app.add_subcommand("lambda-scan", "zeros of c_k(F_1 - lambda f) on {f >= 0}");
  FamilyOptions ls_fam;
  ls_fam.add(lscan);
  std::string ls_f;
  double ls_max = 10.0;
  int ls_n = 2000;
  LambdaScanOptions ls_opt;
  lscan->add_option("--f", ls_f, "f(q)")->required();
  lscan->add_option("--lambda-max", ls_max, "upper end of the lambda grid")->check(CLI::PositiveNumber);
  lscan->add_option("--n-lambda", ls_n, "lambda samples")->check(CLI::Range(2, 1000000));
  lscan->add_option("--n-q", ls_opt.grid.n_q, "base grid")->check(CLI::Range(64, 1 << 16));
  lscan->add_option("--n-w", ls_opt.grid.n_w, "points per fiber axis (odd)")->check(CLI::Range(33, 1025));

  // lambda-k
  auto* lk = app.add_subcommand("lambda-k", "intersections of a 1-jet with Lambda_k");
  std::optional<double> lk_c;
  std::string lk_h;
  int lk_k = 1, lk_n = 512;
  lk->add_option("--c", lk_c, "constant function c");
  lk->add_option("--fn", lk_h, "function h(q)");
  lk->add_option("--k", lk_k, "frequency k")->check(CLI::Range(1, 1000));
  lk->add_option("--n", lk_n, "samples")->check(CLI::Range(16, 1 << 20));

  // hodograph
  auto* hodo = app.add_subcommand("hodograph", "hodograph transform J^1(S^1) -> ST*R^2");
  FamilyOptions hd_fam;
  hd_fam.add(hodo);
  std::vector<double> hd_fwd, hd_inv, hd_fiber;
  int hd_n = 512;
  hodo->add_option("--fwd", hd_fwd, "q,p,u")->delimiter(',')->expected(3);
  hodo->add_option("--inv", hd_inv, "x1,x2,theta")->delimiter(',')->expected(3);
  hodo->add_option("--fiber", hd_fiber, "x1,x2: image of the fiber over x")->delimiter(',')->expected(2);
  hodo->add_option("--n", hd_n, "samples")->check(CLI::Range(16, 1 << 20));

  // front
  auto* front = app.add_subcommand("front", "front projection of a Legendrian loop");
  FamilyOptions fr_fam;
  fr_fam.add(front);
  std::optional<double> fr_eps;
  std::string fr_h;
  int fr_n = 512;
  front->add_option("--eps", fr_eps, "high-p loop with this eps")->check(CLI::PositiveNumber);
  front->add_option("--fn", fr_h, "1-jet of h(q)");
  front->add_option("--n", fr_n, "samples")->check(CLI::Range(64, 1 << 20));

  // thm5
  auto* thm5 = app.add_subcommand("thm5", "two intersection points with Lambda_+(f) and Lambda_+(-f)");
  FamilyOptions t5_fam;
  t5_fam.add(thm5);
  std::vector<double> t5_x{0.0, 0.0}, t5_dir{1.0, 0.0};
  double t5_a = 0.0, t5_b = 1.0;
  int t5_n_t = 32;
  TwoPointOptions t5_opt;
  thm5->add_option("--x", t5_x, "x1,x2 of the starting fiber")->delimiter(',')->expected(2);
  thm5->add_option("--dir", t5_dir, "unit direction d1,d2")->delimiter(',')->expected(2);
  thm5->add_option("--a", t5_a, "start time");
  thm5->add_option("--b", t5_b, "end time");
  thm5->add_option("--n-t", t5_n_t, "time samples for positivity")->check(CLI::Range(2, 100000));
  thm5->add_option("--n-lambda", t5_opt.n_lambda, "lambda samples")->check(CLI::Range(2, 1000000));
  thm5->add_option("--n-q", t5_opt.scan.grid.n_q, "base grid")->check(CLI::Range(64, 1 << 16));

  for (CLI::App* sub : app.get_subcommands({})) sub->fallthrough();
  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return exit_pass;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return exit_pass;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n";
    return exit_input_error;
  }

  set_max_threads(threads);
  files.formats = std::set<std::string>(formats.begin(), formats.end());
  ojson summary;
  bool ok = true;

  try {
    if (spectrum->parsed()) {
      const GeneratingFamily F = sp_fam.build();
      ViterboSpectrum s;
      if (sp_region.empty()) {
        s = viterbo_numbers(F, sp_grid);
      } else {
        s = viterbo_numbers_with_boundary(F, parse_base(sp_region, "--region"), sp_grid);
      }
      summary["command"] = "spectrum";
      summary["g"] = to_string(F.bounded_part());
      summary["K"] = F.fiber_dim();
      summary["R"] = F.bound_radius();
      summary["grid"] = grid_json(sp_grid);
      if (!sp_region.empty()) summary["region"] = sp_region;
      summary["spectrum"] = to_json(s);
      files.csv("spectrum.csv", spectrum_csv(s));
    } else if (cerf->parsed()) {
      const GeneratingFamily F = cf_fam.build();
      if (!(cf_b > cf_a)) throw PreconditionError("need --b > --a");
      const FamilyPath path{F, cf_a, cf_b, cf_n_t};
      std::optional<Expr> region;
      if (!cf_region.empty()) region = parse_base(cf_region, "--region");
      cf_opt.frozen_q = cf_frozen;
      const PositiveFamilyReport pos = check_positive_family(path);
      const ViterboTrajectory tr = viterbo_trajectory(path, region, cf_grid);
      const CerfDiagram d = cerf_diagram(path, region, cf_opt);
      const SlopeReport slopes = slope_check(d, pos.pass);
      summary["command"] = "cerf";
      summary["g"] = to_string(F.bounded_part());
      summary["positivity"] = to_json(pos);
      summary["branches"] = d.branches.size();
      ojson counts;
      for (EventKind k : {EventKind::crossing, EventKind::cusp, EventKind::boundary_tangency})
        counts[to_string(k)] = std::count_if(d.events.begin(), d.events.end(),
                                             [&](const CerfEvent& e) { return e.kind == k; });
      summary["events"] = counts;
      summary["warnings"] = d.warnings;
      summary["strict_increase"] = tr.strict_increase;
      summary["strictly_increasing_every_step"] = tr.strictly_increasing_every_step;
      summary["slopes"] = to_json(slopes);
      // Only a certified positive path carries a monotonicity claim.
      if (pos.pass) ok = tr.strict_increase && tr.weakly_increasing_every_step && slopes.pass.value_or(true);
      files.csv("cerf_branches.csv", cerf_branches_csv(d));
      files.csv("cerf_events.csv", cerf_events_csv(d));
      files.csv("trajectory.csv", trajectory_csv(tr));
      files.svg("cerf.svg", cerf_svg(d, &tr));
    } else if (positivity->parsed()) {
      summary["command"] = "positivity";
      if (po_loop_eps) {
        const Isotopy iso = build_positive_loop(*po_loop_eps);
        const PositivityReport r = check_positive_isotopy(iso);
        summary["loop_eps"] = *po_loop_eps;
        summary["isotopy"] = to_json(r);
        ok = r.pass;
      } else {
        const GeneratingFamily F = po_fam.build();
        if (!(po_b > po_a)) throw PreconditionError("need --b > --a");
        const PositiveFamilyReport r = check_positive_family({F, po_a, po_b, po_n_t}, po_n_q);
        summary["g"] = to_string(F.bounded_part());
        summary["family"] = to_json(r);
        ok = r.pass;
      }
    } else if (loop->parsed()) {
      const Isotopy iso = build_positive_loop(lp_eps, lp_opt);
      const PositivityReport pos = check_positive_isotopy(iso);
      double worst_defect = 0.0, min_gap = 1e300;
      bool all_legendrian = true, all_embedded = true;
      for (const LegendrianLoop& fr : iso.frames()) {
        const LegendrianReport r = check_legendrian(fr);
        worst_defect = std::max(worst_defect, r.max_defect);
        all_legendrian &= r.pass && r.max_defect < 1e-6;
        const double gap = min_nonadjacent_distance(fr);
        min_gap = std::min(min_gap, gap);
        all_embedded &= gap >= 1e-6;
      }
      const double closure = frame_distance(iso.frame(0), iso.frame(iso.size() - 1));
      const double alpha_floor = std::min(lp_eps, two_pi * lp_eps / lp_opt.raise_duration);
      const Front f0 = front_projection(iso.frame(0));
      summary["command"] = "loop";
      summary["eps"] = lp_eps;
      summary["frames"] = iso.size();
      summary["samples"] = iso.frame(0).size();
      summary["cusps"] = f0.cusps.size();
      summary["positivity"] = to_json(pos);
      summary["alpha_floor"] = alpha_floor;
      summary["max_legendrian_defect"] = worst_defect;
      summary["min_self_distance"] = min_gap;
      summary["closure_error"] = closure;
      ok = pos.pass && pos.min_alpha >= alpha_floor - 1e-12 && all_legendrian && all_embedded &&
           closure <= 1e-12;
      summary["pass"] = ok;
      files.csv("loop.csv", loop_csv(iso.frame(0)));
      files.csv("front.csv", front_csv(f0));
      if (lp_svg_frames > 0) {
        const std::size_t stride = std::max<std::size_t>(1, iso.size() / lp_svg_frames);
        int written = 0;
        for (std::size_t m = 0; m < iso.size() && written < lp_svg_frames; m += stride, ++written) {
          char name[32];
          std::snprintf(name, sizeof name, "front_%03d.svg", written);
          files.svg(name, front_svg({front_projection(iso.frame(m))}));
        }
      }
    } else if (lscan->parsed()) {
      const GeneratingFamily F1 = ls_fam.build("F_1");
      const Expr f = parse_base(ls_f, "--f");
      const LambdaScan s = lambda_scan(F1, f, ls_max, ls_n, ls_opt);
      summary["command"] = "lambda-scan";
      summary["F1"] = to_string(F1.bounded_part());
      summary["f"] = to_string(f);
      summary["grid"] = grid_json(ls_opt.grid);
      summary["scan"] = to_json(s);
      ok = s.pass;
      files.csv("lambda_scan.csv", lambda_scan_csv(s));
      files.csv("crossings.csv", crossings_csv(s.crossings));
      files.svg("lambda_scan.svg", curves_svg(s.lambdas, s.curves, s.distinct_lambdas));
    } else if (lk->parsed()) {
      if (lk_c.has_value() == !lk_h.empty()) throw PreconditionError("give exactly one of --c and --fn");
      const LegendrianLoop L = lk_c ? jet_of(format_double(*lk_c), lk_n) : jet_of(lk_h, lk_n);
      const LambdaKReport r = lambda_k_intersections(L, lk_k);
      summary["command"] = "lambda-k";
      summary["result"] = to_json(r);
      ok = !r.degenerate && !r.has_tangential && r.count >= static_cast<std::size_t>(2 * lk_k);
      files.csv("lambda_k.csv", lambda_k_csv(r));
    } else if (hodo->parsed()) {
      summary["command"] = "hodograph";
      if (!hd_fwd.empty()) {
        const ContactElement e = hodograph_fwd(JetPoint(hd_fwd[0], hd_fwd[1], hd_fwd[2]));
        summary["x"] = {e.x[0], e.x[1]};
        summary["theta"] = e.theta;
      } else if (!hd_inv.empty()) {
        const JetPoint j = hodograph_inv(ContactElement({hd_inv[0], hd_inv[1]}, hd_inv[2]));
        summary["q"] = j.q();
        summary["p"] = j.p();
        summary["u"] = j.u();
      } else {
        std::vector<LegendrianLoop> loops;
        if (!hd_fiber.empty()) {
          loops.push_back(fiber_as_jet({hd_fiber[0], hd_fiber[1]}, hd_n));
        } else {
          loops = legendrian_from_family(hd_fam.build(), hd_n);
        }
        ojson checks = ojson::array();
        for (std::size_t c = 0; c < loops.size(); ++c) {
          const auto curve = hodograph_fwd(loops[c]);
          const LegendrianReport r = check_legendrian_st(curve);
          checks.push_back(to_json(r));
          ok &= r.pass;
          files.csv("hodograph_" + std::to_string(c) + ".csv", hodograph_csv(curve));
          files.svg("hodograph_" + std::to_string(c) + ".svg", hodograph_svg(curve));
        }
        summary["components"] = loops.size();
        summary["legendrian_st"] = checks;
      }
    } else if (front->parsed()) {
      std::vector<LegendrianLoop> loops;
      if (fr_eps) {
        loops.push_back(build_high_p_loop(*fr_eps, *fr_eps, static_cast<std::size_t>(fr_n)));
      } else if (!fr_h.empty()) {
        loops.push_back(jet_of(fr_h, fr_n));
      } else {
        loops = legendrian_from_family(fr_fam.build(), fr_n);
      }
      std::vector<Front> fronts;
      ojson comps = ojson::array();
      for (std::size_t c = 0; c < loops.size(); ++c) {
        fronts.push_back(front_projection(loops[c]));
        ojson j;
        j["samples"] = loops[c].size();
        j["winding"] = loops[c].winding();
        j["cusps"] = fronts.back().cusps.size();
        j["legendrian"] = check_legendrian(loops[c]).pass;
        comps.push_back(j);
        files.csv("front_" + std::to_string(c) + ".csv", front_csv(fronts.back()));
      }
      summary["command"] = "front";
      summary["components"] = comps;
      files.svg("front.svg", front_svg(fronts));
    } else if (thm5->parsed()) {
      if (t5_fam.g.empty() && t5_fam.family_file.empty()) {
        // Default deformation: the fiber over x raised to u + 1.
        t5_fam.g = format_double(t5_x[0]) + "*cos(q) + " + format_double(t5_x[1]) + "*sin(q) + t";
        t5_fam.K = 0;
      }
      const GeneratingFamily F = t5_fam.build("deformation");
      if (!(t5_b > t5_a)) throw PreconditionError("need --b > --a");
      const TwoPointReport r =
          theorem5_experiment({t5_x[0], t5_x[1]}, {t5_dir[0], t5_dir[1]}, {F, t5_a, t5_b, t5_n_t}, t5_opt);
      summary["command"] = "thm5";
      summary["deformation"] = to_string(F.bounded_part());
      summary["positivity"] = to_json(r.positivity);
      summary["count"] = r.count;
      ojson pts = ojson::array();
      CsvTable t({"side", "lambda", "q", "p", "u", "residual"});
      for (const auto& p : r.points) {
        ojson j;
        j["side"] = p.side;
        j["lambda"] = p.lambda;
        j["q"] = p.jet.q();
        j["p"] = p.jet.p();
        j["u"] = p.jet.u();
        j["residual"] = p.residual;
        pts.push_back(j);
        t.row({cell(p.side), cell(p.lambda), cell(p.jet.q()), cell(p.jet.p()), cell(p.jet.u()),
               cell(p.residual)});
      }
      summary["points"] = pts;
      summary["pass"] = r.pass;
      ok = r.pass;
      files.csv("thm5_points.csv", t);
    }
  } catch (const Error& e) {
    err << "error: " << e.what() << "\n";
    return exit_input_error;
  } catch (const std::filesystem::filesystem_error& e) {
    err << "error: " << e.what() << "\n";
    return exit_input_error;
  }

  summary["status"] = ok ? "pass" : "fail";
  files.json("summary.json", summary);
  out << summary.dump(2) << "\n";
  return ok ? exit_pass : exit_check_failed;
}

}  // namespace viterbo
