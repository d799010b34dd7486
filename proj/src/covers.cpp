#include "mdim/covers.hpp"

#include "mdim/torus.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <map>
#include <memory>
#include <sstream>
#include <stdexcept>

namespace mdim {

namespace {

std::string fmt9(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.9g", v);
  return buf;
}

// grid points for a span, endpoints included; 8 per unit keeps audits over
// long translate windows affordable
int default_grid(double span) {
  int n = static_cast<int>(std::lround(span * 8)) + 1;
  return std::max(n, 5);
}

std::vector<double> grid_values(double lo, double hi, int points) {
  if (points <= 1) points = default_grid(hi - lo);
  std::vector<double> vals(points);
  double step = (hi - lo) / (points - 1);
  for (int i = 0; i < points; ++i) vals[i] = lo + i * step;
  vals.back() = hi;
  return vals;
}

// exact max circle distance within a finite set, via the antipode sweep
double circle_set_diam(std::vector<double> vals) {
  if (vals.size() < 2) return 0;
  std::sort(vals.begin(), vals.end());
  double best = 0;
  const std::size_t n = vals.size();
  for (std::size_t i = 0; i < n; ++i) {
    double target = vals[i] + 0.5;
    auto it = std::lower_bound(vals.begin(), vals.end(), target);
    for (int off = -1; off <= 0; ++off) {
      std::size_t j = (it - vals.begin() + off + n) % n;
      best = std::max(best, circle_dist(vals[i], vals[j]));
    }
  }
  return best;
}

double point_set_diam(const DynSystem& sys, const std::vector<SystemPoint>& pts) {
  if (pts.size() < 2) return 0;
  bool all_circle = true;
  for (const auto& p : pts)
    if (!p.is_circle()) {
      all_circle = false;
      break;
    }
  if (all_circle) {
    std::vector<double> vals;
    vals.reserve(pts.size());
    for (const auto& p : pts) vals.push_back(p.as_circle().val);
    return circle_set_diam(std::move(vals));
  }
  double best = 0;
  for (std::size_t i = 0; i < pts.size(); ++i)
    for (std::size_t j = i + 1; j < pts.size(); ++j)
      best = std::max(best, sys.dist(pts[i], pts[j]));
  return best;
}

std::vector<SystemPoint> translated_hits(const Region& r, const DynSystem& sys,
                                         const SampleSet& samples, long long z) {
  std::vector<SystemPoint> pts;
  pts.reserve(r.hits.size());
  for (int h : r.hits) pts.push_back(z == 0 ? samples[h] : sys.act(samples[h], z));
  return pts;
}

std::vector<SystemPoint> real_translated_hits(const Region& r, const TorusSystem& ts,
                                              const SampleSet& samples, double rr) {
  std::vector<SystemPoint> pts;
  pts.reserve(r.hits.size());
  for (int h : r.hits) pts.push_back(ts.act_real(samples[h], rr));
  return pts;
}

}  // namespace

std::vector<int> FiniteCover::regions_at(const SystemPoint& p) const {
  if (locate) return locate(p);
  std::vector<int> out;
  for (std::size_t i = 0; i < regions.size(); ++i)
    if (regions[i].member(p)) out.push_back(static_cast<int>(i));
  return out;
}

Region make_circle_arc(int id, int family, double center, double width) {
  Region r;
  r.id = id;
  r.family = family;
  r.label = "arc(" + fmt9(center) + "," + fmt9(width) + ")";
  double half = width / 2;
  r.member = [center, half](const SystemPoint& p) {
    return circle_dist(p.as_circle().val, center) <= half;
  };
  return r;
}

void compute_hits(FiniteCover& c, const SampleSet& samples) {
  for (auto& r : c.regions) r.hits.clear();
  if (c.locate) {
    for (std::size_t j = 0; j < samples.size(); ++j)
      for (int id : c.locate(samples[j])) c.regions[id].hits.push_back(static_cast<int>(j));
  } else {
    for (std::size_t j = 0; j < samples.size(); ++j)
      for (auto& r : c.regions)
        if (r.member(samples[j])) r.hits.push_back(static_cast<int>(j));
  }
  c.sample_ref = samples.ref;
}

OrderProfile order_profile(const FiniteCover& c, const SampleSet& samples) {
  OrderProfile prof;
  prof.counts.assign(samples.size(), 0);
  bool any_hits = false;
  for (const auto& r : c.regions)
    if (!r.hits.empty()) {
      any_hits = true;
      break;
    }
  if (any_hits) {
    for (const auto& r : c.regions)
      for (int h : r.hits) ++prof.counts[h];
  } else {
    for (std::size_t j = 0; j < samples.size(); ++j)
      for (const auto& r : c.regions)
        if (r.member(samples[j])) ++prof.counts[j];
  }
  if (prof.counts.empty()) throw std::runtime_error("order_profile: empty sample set");
  prof.ord = 0;
  prof.min_count = prof.counts[0];
  for (std::size_t j = 0; j < prof.counts.size(); ++j) {
    prof.ord = std::max(prof.ord, prof.counts[j]);
    prof.min_count = std::min(prof.min_count, prof.counts[j]);
    if (prof.counts[j] == 0)
      throw std::runtime_error("order_profile: sample " + std::to_string(j) +
                               " uncovered (ref " + c.sample_ref + ")");
  }
  return prof;
}

double hit_diameter(const Region& r, const DynSystem& sys, const SampleSet& samples,
                    long long z) {
  return point_set_diam(sys, translated_hits(r, sys, samples, z));
}

std::vector<double> mesh_under_translates(const FiniteCover& c, const DynSystem& sys,
                                          long long zmax, const SampleSet& samples) {
  std::vector<double> mesh;
  if (zmax <= 0) return mesh;
  mesh.reserve(static_cast<std::size_t>(zmax));
  // each sample is acted on once per z and shared across regions; a sample
  // hitting many regions would otherwise be re-translated per region
  std::vector<SystemPoint> moved(samples.points->begin(), samples.points->end());
  std::vector<SystemPoint> pts;
  for (long long z = 0; z < zmax; ++z) {
    if (z > 0)
      for (auto& p : moved) p = sys.act(p, 1);
    double m = 0;
    for (const auto& r : c.regions) {
      if (r.hits.size() < 2) continue;
      pts.clear();
      pts.reserve(r.hits.size());
      for (int h : r.hits) pts.push_back(moved[static_cast<std::size_t>(h)]);
      m = std::max(m, point_set_diam(sys, pts));
    }
    mesh.push_back(m);
  }
  return mesh;
}

FiniteCover join_with_shifts(const std::vector<FiniteCover>& covers,
                             const DynSystem& sys, long long m,
                             const SampleSet& samples) {
  if (covers.empty()) throw std::invalid_argument("join_with_shifts: no covers");
  auto covs = std::make_shared<std::vector<FiniteCover>>(covers);
  FiniteCover join;
  join.kind = covers[0].kind;
  join.sample_ref = samples.ref;
  std::map<std::vector<int>, int> seen;
  const std::size_t ncov = covs->size();
  for (std::size_t j = 0; j < samples.size(); ++j) {
    std::vector<std::vector<int>> parts(ncov);
    std::size_t total = 1;
    for (std::size_t i = 0; i < ncov; ++i) {
      SystemPoint q = sys.act(samples[j], static_cast<long long>(i) * m);
      parts[i] = (*covs)[i].regions_at(q);
      if (parts[i].empty())
        throw std::runtime_error("join_with_shifts: sample " + std::to_string(j) +
                                 " uncovered by cover " + std::to_string(i) +
                                 " after shift");
      total *= parts[i].size();
      if (total > 4096)
        throw std::runtime_error("join_with_shifts: tuple blowup at sample " +
                                 std::to_string(j));
    }
    std::vector<std::size_t> idx(ncov, 0);
    while (true) {
      std::vector<int> tup(ncov);
      for (std::size_t i = 0; i < ncov; ++i) tup[i] = parts[i][idx[i]];
      auto it = seen.find(tup);
      if (it == seen.end()) {
        int rid = static_cast<int>(join.regions.size());
        seen.emplace(tup, rid);
        Region reg;
        reg.id = rid;
        reg.family = rid;
        std::ostringstream lab;
        for (std::size_t i = 0; i < ncov; ++i) {
          if (i) lab << "|";
          lab << "c" << i << ":" << tup[i];
        }
        reg.label = lab.str();
        reg.member = [covs, sys, m, tup](const SystemPoint& p) {
          for (std::size_t i = 0; i < tup.size(); ++i) {
            SystemPoint q = sys.act(p, static_cast<long long>(i) * m);
            if (!(*covs)[i].regions[tup[i]].member(q)) return false;
          }
          return true;
        };
        join.regions.push_back(std::move(reg));
        it = seen.find(tup);
      }
      auto& hits = join.regions[it->second].hits;
      if (hits.empty() || hits.back() != static_cast<int>(j))
        hits.push_back(static_cast<int>(j));
      std::size_t k = 0;
      while (k < ncov) {
        if (++idx[k] < parts[k].size()) break;
        idx[k] = 0;
        ++k;
      }
      if (k == ncov) break;
    }
  }
  return join;
}

MdimWitnessReport check_mdim_witness(const FiniteCover& c, const DynSystem& sys,
                                     double d, double eps, const SampleSet& samples) {
  if (d <= 0) throw std::invalid_argument("check_mdim_witness: d must be positive");
  MdimWitnessReport rep;
  rep.ord = order_profile(c, samples).ord;
  long long zmax = 0;
  while (static_cast<double>(zmax) * d < rep.ord) ++zmax;
  rep.mesh = mesh_under_translates(c, sys, zmax, samples);
  rep.ok = true;
  for (double m : rep.mesh) {
    rep.worst = std::max(rep.worst, m);
    if (m >= eps) rep.ok = false;
  }
  rep.window = static_cast<long long>(rep.mesh.size());
  return rep;
}

SmallReport check_small(const Region& region, const TorusSystem& torus, double alpha,
                        double beta, const SampleSet& samples, int rgrid) {
  SmallReport rep;
  rep.ok = true;
  for (double r : grid_values(-beta, beta, rgrid)) {
    double d = point_set_diam(torus.sys(), real_translated_hits(region, torus, samples, r));
    if (d > rep.max_diam) {
      rep.max_diam = d;
      rep.worst_r = r;
    }
    if (d >= alpha) rep.ok = false;
  }
  return rep;
}

FineReport check_fine(const FiniteCover& c, const TorusSystem& torus, double alpha,
                      double beta, const SampleSet& samples, int rgrid) {
  FineReport rep;
  rep.ok = true;
  for (double r : grid_values(0, beta, rgrid)) {
    double mesh = 0;
    for (const auto& reg : c.regions)
      mesh = std::max(mesh,
                      point_set_diam(torus.sys(), real_translated_hits(reg, torus, samples, r)));
    if (mesh > rep.max_mesh) {
      rep.max_mesh = mesh;
      rep.worst_r = r;
    }
    if (mesh >= alpha) rep.ok = false;
  }
  return rep;
}

RefinedReport check_refined_at(const FiniteCover& c, const Region& w,
                               const TorusSystem& torus, double alpha, double beta,
                               const SampleSet& samples, int rgrid, double clos_tol) {
  RefinedReport rep;
  auto rvals = grid_values(-beta, beta, rgrid);

  // closure of W at sample resolution: W hits plus points within clos_tol
  std::vector<SystemPoint> w_pts;
  for (int h : w.hits) w_pts.push_back(samples[h]);
  auto in_w_closure = [&](const SystemPoint& p) {
    if (w.member(p)) return true;
    if (clos_tol <= 0) return false;
    for (const auto& q : w_pts)
      if (torus.dist(p, q) <= clos_tol) return true;
    return false;
  };

  // per sample: the r1 values whose W translate closure contains it
  std::vector<int> sweep_samples;
  std::vector<double> wlo, whi;
  for (std::size_t j = 0; j < samples.size(); ++j) {
    double lo = 0, hi = 0;
    bool any = false;
    for (double r1 : rvals) {
      if (in_w_closure(torus.act_real(samples[j], -r1))) {
        if (!any) {
          lo = hi = r1;
          any = true;
        } else {
          lo = std::min(lo, r1);
          hi = std::max(hi, r1);
        }
      }
    }
    if (any) {
      sweep_samples.push_back(static_cast<int>(j));
      wlo.push_back(lo);
      whi.push_back(hi);
    }
  }

  // spread of W-translate contacts per (region, r); regions seen at all are
  // flagged for the smallness condition
  rep.translate_separation_ok = true;
  std::vector<char> flagged(c.regions.size(), 0);
  std::vector<int> stamp(c.regions.size(), -1);
  std::vector<double> acc_lo(c.regions.size()), acc_hi(c.regions.size());
  for (std::size_t ri = 0; ri < rvals.size(); ++ri) {
    double r = rvals[ri];
    std::vector<int> touched;
    for (std::size_t s = 0; s < sweep_samples.size(); ++s) {
      SystemPoint q = torus.act_real(samples[sweep_samples[s]], -r);
      for (int id : c.regions_at(q)) {
        flagged[id] = 1;
        if (stamp[id] != static_cast<int>(ri)) {
          stamp[id] = static_cast<int>(ri);
          touched.push_back(id);
          acc_lo[id] = wlo[s];
          acc_hi[id] = whi[s];
        } else {
          acc_lo[id] = std::min(acc_lo[id], wlo[s]);
          acc_hi[id] = std::max(acc_hi[id], whi[s]);
        }
      }
    }
    for (int id : touched) {
      double spread = acc_hi[id] - acc_lo[id];
      rep.max_window_spread = std::max(rep.max_window_spread, spread);
      if (spread >= 1) rep.translate_separation_ok = false;
    }
  }

  rep.near_sweep_small_ok = true;
  for (std::size_t i = 0; i < c.regions.size(); ++i) {
    if (!flagged[i]) continue;
    ++rep.flagged_regions;
    for (double r : rvals) {
      double d =
          point_set_diam(torus.sys(), real_translated_hits(c.regions[i], torus, samples, r));
      rep.max_near_diam = std::max(rep.max_near_diam, d);
      if (d >= alpha) rep.near_sweep_small_ok = false;
    }
  }
  rep.ok = rep.translate_separation_ok && rep.near_sweep_small_ok;
  return rep;
}

std::string cover_csv(const FiniteCover& c, const DynSystem& sys,
                      const SampleSet& samples, long long zmax) {
  std::ostringstream out;
  out << "region_id,family,label,hits";
  for (long long z = 0; z < zmax; ++z) out << ",diam_z" << z;
  out << "\n";
  for (const auto& r : c.regions) {
    out << r.id << "," << r.family << "," << r.label << "," << r.hits.size();
    for (long long z = 0; z < zmax; ++z) out << "," << fmt9(hit_diameter(r, sys, samples, z));
    out << "\n";
  }
  return out.str();
}

}  // namespace mdim
