#include "mdim/experiment.hpp"

#include "mdim/covers.hpp"
#include "mdim/fiber_lab.hpp"
#include "mdim/interval_systems.hpp"
#include "mdim/kolmogorov.hpp"
#include "mdim/level_functions.hpp"
#include "mdim/nerves.hpp"
#include "mdim/reports.hpp"
#include "mdim/systems.hpp"
#include "mdim/torus.hpp"

#include "json.hpp"

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <stdexcept>

namespace mdim {

namespace {

using json = nlohmann::ordered_json;

json load_config(const std::string& path) {
  if (path.empty()) return json::object();
  std::ifstream in(path);
  if (!in) throw std::invalid_argument("config: cannot open " + path);
  json cfg = json::parse(in);  // throws json::parse_error on bad input
  if (!cfg.is_object()) throw std::invalid_argument("config: top level must be an object");
  return cfg;
}

double num(const json& cfg, const std::string& key, double def) {
  if (!cfg.contains(key)) return def;
  if (!cfg[key].is_number()) throw std::invalid_argument("config: " + key + " must be a number");
  return cfg[key].get<double>();
}

long long inum(const json& cfg, const std::string& key, long long def) {
  if (!cfg.contains(key)) return def;
  if (!cfg[key].is_number_integer())
    throw std::invalid_argument("config: " + key + " must be an integer");
  return cfg[key].get<long long>();
}

// flattened key,value rows; doubles pinned to one formatter so the csv and
// json views of a run agree
void flatten(const json& j, const std::string& prefix, std::string& out) {
  if (j.is_object()) {
    for (const auto& [k, v] : j.items())
      flatten(v, prefix.empty() ? k : prefix + "." + k, out);
  } else if (j.is_array()) {
    int i = 0;
    for (const auto& v : j) flatten(v, prefix + "." + std::to_string(i++), out);
  } else {
    out += prefix;
    out += ",";
    if (j.is_number_float())
      out += fmt_double(j.get<double>());
    else
      out += j.dump();
    out += "\n";
  }
}

struct Sink {
  const RunOptions& opt;
  std::string command;
  std::vector<std::pair<std::string, std::string>> tables;

  void table(const std::string& name, const std::string& csv) {
    tables.emplace_back(name, csv);
  }

  void finish(const json& report) const {
    std::error_code ec;
    std::filesystem::create_directories(opt.out_dir, ec);
    std::string base = opt.out_dir + "/" + command;
    if (opt.format == "csv") {
      std::string flat = "key,value\n";
      flatten(report, "", flat);
      write_file_atomic(base + "_report.csv", flat);
    } else {
      write_file_atomic(base + "_report.json", report.dump(2) + "\n");
    }
    for (const auto& [name, csv] : tables)
      write_file_atomic(opt.out_dir + "/" + name + ".csv", csv);
  }
};

QuadExt default_alpha() {
  // sqrt(2) - 1
  return QuadExt(mpq_class(-1), mpq_class(1), 2);
}

unsigned effective_seed(const json& cfg, const RunOptions& opt) {
  unsigned seed = (unsigned)inum(cfg, "seed", 1);
  if (opt.seed_overridden) seed = opt.seed;
  if (const char* env = std::getenv("MDIMLAB_SEED")) {
    char* end = nullptr;
    long v = std::strtol(env, &end, 10);
    if (end && *end == '\0' && v >= 0) seed = (unsigned)v;
  }
  return seed;
}

int run_kolmogorov(const json& cfg, const RunOptions& opt) {
  int n = (int)inum(cfg, "n", 2);
  int m = (int)inum(cfg, "m", 3);
  double eps = num(cfg, "eps", 1.0);
  int probes = (int)inum(cfg, "probes", 2000);
  unsigned seed = effective_seed(cfg, opt);
  if (n < 1 || m < n) throw std::invalid_argument("kolmogorov: need 1 <= n <= m");
  if (eps <= 0) throw std::invalid_argument("kolmogorov: eps must be positive");

  CubeFamilySpec spec{m, n, mpq_class(eps)};
  auto grid = cube_probe_grid(spec, probes, seed);
  CubeAuditReport audit = audit_cube_families(spec, grid);
  auto cubes = materialize_cubes(spec, grid);

  Sink sink{opt, "kolmogorov", {}};
  sink.table("kolmogorov_cubes", cube_family_csv(spec, cubes));
  std::string mult = "probe,families\n";
  for (int i = 0; i < (int)grid.size(); ++i)
    mult += std::to_string(i) + "," +
            std::to_string((int)spec.families_containing(grid[i]).size()) + "\n";
  sink.table("kolmogorov_multiplicity", mult);

  json rep;
  rep["command"] = "kolmogorov";
  rep["params"] = {{"n", n}, {"m", m}, {"eps", eps}, {"probes", probes}, {"seed", seed}};
  rep["required_multiplicity"] = m - n + 1;
  rep["min_multiplicity"] = audit.min_mult;
  rep["mesh_ok"] = audit.mesh_ok;
  rep["disjoint_ok"] = audit.disjoint_ok;
  rep["multiplicity_ok"] = audit.multiplicity_ok;
  rep["cube_diam"] = audit.cube_diam.get_d();
  rep["cubes_seen"] = (int)cubes.size();
  rep["ok"] = audit.ok;
  sink.finish(rep);
  return audit.ok ? 0 : 2;
}

int run_intervals(const json& cfg, const RunOptions& opt) {
  IntervalSystemParams p;
  p.q = (int)inum(cfg, "q", 5);
  p.mesh_bound = num(cfg, "mesh_bound", 0.05);
  p.max_doublings = (int)inum(cfg, "max_doublings", p.max_doublings);
  int grid = (int)inum(cfg, "grid", 10000);
  unsigned seed = effective_seed(cfg, opt);
  if (p.q < 3) throw std::invalid_argument("intervals: q must be >= 3");
  if (p.mesh_bound <= 0) throw std::invalid_argument("intervals: mesh_bound must be positive");

  Sink sink{opt, "intervals", {}};
  json rep;
  rep["command"] = "intervals";
  rep["params"] = {{"q", p.q}, {"mesh_bound", p.mesh_bound}, {"grid", grid}, {"seed", seed}};
  IntervalSystem sys;
  try {
    sys = build_interval_system(p);
  } catch (const std::runtime_error& e) {
    rep["error"] = e.what();
    rep["sigma_lower"] = 0.0;
    rep["ok"] = false;
    sink.finish(rep);
    return 2;
  }
  int min_met = p.q;
  for (int i = 0; i < grid; ++i) {
    double t = (i + 0.5) / grid;
    min_met = std::min(min_met, count_met(sys, t));
  }
  bool ok = sys.sigma_lower > 0 && min_met >= p.q - 2;
  sink.table("intervals_pieces", interval_system_csv(sys));
  rep["sigma_lower"] = sys.sigma_lower;
  rep["margin"] = sys.margin;
  rep["mesh"] = sys.mesh;
  rep["anchors"] = sys.anchor_count;
  rep["min_met"] = min_met;
  rep["required_met"] = p.q - 2;
  rep["ok"] = ok;
  sink.finish(rep);
  return ok ? 0 : 2;
}

int run_levelfn(const json& cfg, const RunOptions& opt) {
  double width = num(cfg, "u_width", 0.1);
  int nsamples = (int)inum(cfg, "samples", 500);
  int zmax = (int)inum(cfg, "zmax", 10);
  double tol = num(cfg, "tol", 1e-6);
  unsigned seed = effective_seed(cfg, opt);
  if (width <= 0 || width >= 1) throw std::invalid_argument("levelfn: u_width in (0,1)");
  if (nsamples < 1 || zmax < 1) throw std::invalid_argument("levelfn: samples and zmax positive");

  DynSystem sys = make_rotation(default_alpha());
  SampleSet samples = make_samples(sys, nsamples, seed);
  SystemPoint center = SystemPoint::circle(QuadExt(mpq_class(0)));
  LevelFunction xi(sys, make_ball_cutoff(sys, {center}, width / 2));
  LevelReport lr = level_report(xi, samples, zmax);

  Sink sink{opt, "levelfn", {}};
  std::string tab = "sample,value,steps,survival\n";
  for (int i = 0; i < (int)samples.size(); ++i) {
    LevelValue v = xi.eval(samples[i]);
    tab += std::to_string(i) + "," + fmt_double(v.value) + "," +
           std::to_string(v.steps) + "," + fmt_double(v.survival) + "\n";
  }
  sink.table("levelfn_values", tab);

  bool ok = lr.max_recursion_residual <= tol && lr.max_translation_residual <= tol;
  json rep;
  rep["command"] = "levelfn";
  rep["params"] = {{"u_width", width}, {"samples", nsamples}, {"zmax", zmax},
                   {"tol", tol},       {"seed", seed}};
  rep["max_recursion_residual"] = lr.max_recursion_residual;
  rep["max_translation_residual"] = lr.max_translation_residual;
  rep["translation_checked"] = lr.translation_checked;
  rep["max_truncation_bound"] = lr.max_truncation_bound;
  rep["evaluated"] = lr.evaluated;
  rep["ok"] = ok;
  sink.finish(rep);
  return ok ? 0 : 2;
}

int run_torus_chain(const json& cfg, const RunOptions& opt) {
  int nsamples = (int)inum(cfg, "samples", 5000);
  int layers = (int)inum(cfg, "layers", 3);
  int arcs = (int)inum(cfg, "arcs", 4);
  int n = (int)inum(cfg, "n", 4);
  double d = num(cfg, "d", 0.5);
  double eps = num(cfg, "eps", 0.2);
  unsigned seed = effective_seed(cfg, opt);
  if (layers < 2 || arcs < 3) throw std::invalid_argument("torus-chain: layers >= 2, arcs >= 3");
  if (n < 1 || d <= 0 || eps <= 0) throw std::invalid_argument("torus-chain: n, d, eps positive");

  TorusSystem ts(make_rotation(default_alpha()));
  SampleSet samples = make_samples(ts.sys(), nsamples, seed);

  FiniteCover band = lift_cover(ts, slab_band_cover(ts, layers), samples);
  OrderProfile band_prof = order_profile(band, samples);
  int band_off = max_order_off_base(band, ts, samples);

  FiniteCover grid = lift_cover(ts, slab_grid_cover(ts, arcs, layers), samples);
  OrderProfile grid_prof = order_profile(grid, samples);
  int grid_off = max_order_off_base(grid, ts, samples);

  // a cover fine enough for the chain mesh target
  int carcs = std::max(arcs, (int)std::ceil(3.0 / eps));
  int clayers = std::max(layers, (int)std::ceil(3.0 / eps));
  FiniteCover fine = lift_cover(ts, slab_grid_cover(ts, carcs, clayers), samples);
  ShiftChainResult chain = build_shift_chain(ts, fine, n, d, eps, samples);

  Sink sink{opt, "torus-chain", {}};
  sink.table("torus_chain_covers", cover_csv(band, ts.sys(), samples, 1));
  {
    std::string csv = "z,mesh\n";
    for (std::size_t z = 0; z < chain.mesh.size(); ++z)
      csv += std::to_string(z) + "," + fmt_double(chain.mesh[z]) + "\n";
    sink.table("torus_chain_mesh", csv);
  }

  bool orders_ok = band_prof.ord <= 2 * 2 && band_off <= 2 && grid_prof.ord <= 2 * 4 &&
                   grid_off <= 4;
  bool ok = orders_ok && chain.premesh.ok && chain.mesh_ok;
  json rep;
  rep["command"] = "torus-chain";
  rep["params"] = {{"samples", nsamples}, {"layers", layers}, {"arcs", arcs},
                   {"n", n},              {"d", d},           {"eps", eps},
                   {"seed", seed}};
  rep["band"] = {{"ord", band_prof.ord}, {"ord_bound", 4}, {"off_base_ord", band_off},
                 {"off_base_bound", 2}};
  rep["grid"] = {{"ord", grid_prof.ord}, {"ord_bound", 8}, {"off_base_ord", grid_off},
                 {"off_base_bound", 4}};
  rep["chain"] = {{"step", chain.step},
                  {"window", chain.window},
                  {"premesh_ok", chain.premesh.ok},
                  {"premesh_max", chain.premesh.max_mesh},
                  {"ord", chain.ord},
                  {"ord_refinement_target", n * n + n + 2},
                  {"ratio", chain.ratio},
                  {"worst_mesh", chain.worst_mesh},
                  {"mesh_ok", chain.mesh_ok}};
  rep["ok"] = ok;
  sink.finish(rep);
  return ok ? 0 : 2;
}

Observable make_torus_observable(int k) {
  return [k](const SystemPoint& y) {
    const TorusPoint& tp = y.as_torus();
    double x = tp.base->as_circle().val + 0.37 * tp.t;
    std::vector<double> out;
    for (int j = 1; j <= k; ++j)
      out.push_back(0.5 * (1.0 + std::cos(2.0 * M_PI * j * x + j)));
    return out;
  };
}

int run_fiber_check(const json& cfg, const RunOptions& opt) {
  MarkedParams mp;
  mp.fiber.k = (int)inum(cfg, "k", 2);
  mp.fiber.q = (int)inum(cfg, "q", 5);
  mp.fiber.l = (int)inum(cfg, "l", 40);
  mp.fiber.n = (int)inum(cfg, "n", 4);
  mp.fiber.d = num(cfg, "d", 1.0);
  mp.eps = num(cfg, "eps", 0.05);
  mp.brick_a = num(cfg, "brick_a", 0.03);
  mp.mesh_e = num(cfg, "mesh_e", 0.0025);
  mp.cube_eps = num(cfg, "cube_eps", 0.5);
  mp.seed = effective_seed(cfg, opt);
  int nsamples = (int)inum(cfg, "samples", 40000);
  int max_audit = (int)inum(cfg, "max_audit", 120);
  double delta = num(cfg, "delta", 0.5);
  long long window = inum(cfg, "window", mp.fiber.l);
  double tol = num(cfg, "tol", 1e-9);
  double sep = num(cfg, "sep", 3 * mp.eps);
  int mult_samples = (int)inum(cfg, "mult_samples", 800);
  mp.fiber.validate();  // invalid_argument on bad (k, q, l, n, d)

  TorusSystem ts(make_rotation(default_alpha()));
  SampleSet samples = make_samples(ts.sys(), nsamples, mp.seed);
  // marked angle on the rotation's own field so the orbit stays exact
  SystemPoint w_base = SystemPoint::circle(QuadExt(mpq_class(3, 10)));

  MarkedCollections mc = build_marked_collections(ts, w_base, mp, samples);
  MarkScan scan = scan_marks(mc, max_audit);
  MarkingReport marking = marking_report(mc, scan);

  Observable f = make_torus_observable(mp.fiber.k);
  PsiParams pp;
  pp.delta = delta;
  pp.max_audit = max_audit;
  PsiReport psi_rep;
  PsiMap psi = build_psi(mc, scan, f, pp, &psi_rep);

  SampleSet mult_set = make_samples(ts.sys(), mult_samples, mp.seed + 1);
  FiberMultReport mult = fiber_multiplicity(ts.sys(), f, mult_set, window, tol, sep);

  double gamma = gamma_bound(mp.fiber.k, mp.fiber.d);
  long long floor_gamma = (long long)std::floor(gamma);
  bool ok = marking.ok && psi_rep.ok && mult.max_mult <= floor_gamma;

  Sink sink{opt, "fiber-check", {}};
  std::string tab = "sample,xi0,marks,min_window,windows\n";
  for (const auto& row : marking.rows)
    tab += std::to_string(row.sample) + "," + fmt_double(row.xi0) + "," +
           std::to_string(row.marks) + "," + std::to_string(row.min_window) + "," +
           std::to_string(row.windows) + "\n";
  sink.table("fiber_marks", tab);

  json rep;
  rep["command"] = "fiber-check";
  rep["params"] = {{"k", mp.fiber.k}, {"q", mp.fiber.q},       {"l", mp.fiber.l},
                   {"n", mp.fiber.n}, {"d", mp.fiber.d},       {"eps", mp.eps},
                   {"brick_a", mp.brick_a}, {"mesh_e", mp.mesh_e},
                   {"cube_eps", mp.cube_eps}, {"samples", nsamples},
                   {"max_audit", max_audit}, {"delta", delta},
                   {"window", window}, {"tol", tol}, {"sep", sep},
                   {"seed", mp.seed}};
  rep["gamma"] = gamma;
  rep["floor_gamma"] = floor_gamma;
  rep["max_mult"] = mult.max_mult;
  rep["mult_classes"] = mult.classes;
  json class_sizes = json::array();
  for (int j = 1; j <= mp.fiber.k; ++j) class_sizes.push_back(psi.class_count(j));
  rep["class_sizes"] = class_sizes;
  rep["delta"] = marking.delta;
  rep["delta_star"] = marking.delta_star;
  rep["pair_count"] = marking.pair_count;
  rep["star_pairs"] = marking.star_pairs;
  rep["window_bound"] = marking.window_bound;
  rep["bound_windows"] = marking.bound_windows;
  rep["bound_density"] = marking.bound_density;
  rep["marking_min"] = marking.min_marks;
  rep["marking_max"] = marking.max_marks;
  rep["marking_audited"] = marking.audited;
  rep["marking_ok"] = marking.ok;
  rep["families_coverage_ok"] = mc.families.coverage_ok;
  rep["families_refine_ok"] = mc.families.refine_ok;
  rep["families_disjoint_ok"] = mc.families.disjoint_ok;
  rep["psi"] = {{"constancy_ok", psi_rep.constancy_ok},
                {"approx_ok", psi_rep.approx_ok},
                {"separation_ok", psi_rep.separation_ok},
                {"link_unique_ok", psi_rep.link_unique_ok},
                {"window_sep_ok", psi_rep.window_sep_ok},
                {"max_dev", psi_rep.max_dev},
                {"eta", psi_rep.eta},
                {"classes_total", psi_rep.classes_total},
                {"audited", psi_rep.audited}};
  rep["ok"] = ok;
  sink.finish(rep);
  return ok ? 0 : 2;
}

int run_full(const json& cfg, const RunOptions& opt) {
  json stages = json::object();
  int worst = 0;
  auto stage = [&](const std::string& name, int (*fn)(const json&, const RunOptions&)) {
    json sub = cfg.contains(name) ? cfg[name] : json::object();
    if (cfg.contains("seed") && !sub.contains("seed")) sub["seed"] = cfg["seed"];
    int code = fn(sub, opt);
    stages[name] = code;
    worst = std::max(worst, code);
  };
  stage("kolmogorov", run_kolmogorov);
  stage("intervals", run_intervals);
  stage("levelfn", run_levelfn);
  stage("torus-chain", run_torus_chain);
  // lighter defaults keep the combined run quick unless overridden
  json fib = cfg.contains("fiber-check") ? cfg["fiber-check"] : json::object();
  if (!fib.contains("samples")) fib["samples"] = 20000;
  if (!fib.contains("max_audit")) fib["max_audit"] = 40;
  if (cfg.contains("seed") && !fib.contains("seed")) fib["seed"] = cfg["seed"];
  int code = run_fiber_check(fib, opt);
  stages["fiber-check"] = code;
  worst = std::max(worst, code);

  json rep;
  rep["command"] = "full-pipeline";
  rep["stages"] = stages;
  rep["ok"] = worst == 0;
  Sink sink{opt, "full-pipeline", {}};
  sink.finish(rep);
  return worst;
}

}  // namespace

const std::vector<std::string> kExperimentNames = {
    "kolmogorov", "intervals", "levelfn", "torus-chain", "fiber-check", "full-pipeline"};

int run_experiment(const std::string& command, const RunOptions& options) {
  json cfg;
  try {
    cfg = load_config(options.config_path);
  } catch (const std::exception& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 1;
  }
  try {
    if (command == "kolmogorov") return run_kolmogorov(cfg, options);
    if (command == "intervals") return run_intervals(cfg, options);
    if (command == "levelfn") return run_levelfn(cfg, options);
    if (command == "torus-chain") return run_torus_chain(cfg, options);
    if (command == "fiber-check") return run_fiber_check(cfg, options);
    if (command == "full-pipeline") return run_full(cfg, options);
    std::cerr << "unknown command: " << command << "\n";
    return 1;
  } catch (const std::invalid_argument& e) {
    std::cerr << "validation error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    // construction or audit machinery failed; record what we know
    std::cerr << "run failed: " << e.what() << "\n";
    json rep;
    rep["command"] = command;
    rep["error"] = e.what();
    rep["ok"] = false;
    try {
      Sink sink{options, command, {}};
      sink.finish(rep);
    } catch (...) {
    }
    return 2;
  }
}

}  // namespace mdim
