#include "mdim/fiber_lab.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <numeric>
#include <set>
#include <stdexcept>

namespace mdim {

double gamma_bound(int k, double t) {
  if (t >= k) throw std::invalid_argument("gamma_bound: t must be below k");
  double r = (double)k / ((double)k - t);
  return std::floor(r) * r;
}

void FiberParams::validate() const {
  if (k < 2) throw std::invalid_argument("fiber params: k must be >= 2");
  if (q < 3) throw std::invalid_argument("fiber params: q must be >= 3");
  if (n < 1) throw std::invalid_argument("fiber params: n must be >= 1");
  if (d <= 0 || d >= k) throw std::invalid_argument("fiber params: need 0 < d < k");
  if (l % q != 0) throw std::invalid_argument("fiber params: q must divide l");
  if (l <= 3 * q) throw std::invalid_argument("fiber params: l must exceed 3q");
  if (m() - n - 2 * k < 1)
    throw std::invalid_argument("fiber params: qk - n - 2k must be positive");
  if (2 * k >= ((double)k - d) * q)
    throw std::invalid_argument("fiber params: density factor not positive");
}

MarkedCollections build_marked_collections(const TorusSystem& ts,
                                           const SystemPoint& w_base,
                                           const MarkedParams& params,
                                           const SampleSet& torus_samples) {
  params.fiber.validate();
  MarkedCollections mc{params.fiber, params, ts,           {}, {}, {},
                       nullptr,       {},     {},           0,  9};
  mc.samples = torus_samples;

  BrickCoverParams bp;
  bp.eps = params.eps;
  bp.beta = 2.0 * params.fiber.l;
  bp.a = params.brick_a;
  mc.bricks = build_brick_cover(ts, w_base, bp, torus_samples);
  // translates of the marked ball over the audit window must stay disjoint
  if (mc.bricks.strand_gap <= 2 * mc.bricks.rho)
    throw std::runtime_error("build_marked_collections: ball translates collide");

  KoParams kp;
  kp.families = params.fiber.m();
  kp.cube_eps = params.cube_eps;
  kp.seed = params.seed;
  mc.families = kolmogorov_ostrand_cover(ts.sys(), mc.bricks.cover, kp, torus_samples);

  IntervalSystemParams ip;
  ip.q = params.fiber.q;
  ip.mesh_bound = params.mesh_e;
  mc.intervals = build_interval_system(ip);
  mc.mesh_e = mc.intervals.mesh;

  mc.xi = std::make_shared<const LevelFunction>(
      ts.sys(), make_ball_cutoff(ts.sys(), {mc.bricks.w_center}, mc.bricks.rho),
      1e-10, 200000);

  for (std::size_t j = 0; j < torus_samples.size(); ++j)
    if (torus_samples[j].as_torus().t == 0.0) mc.base_samples.push_back((int)j);
  return mc;
}

std::vector<MarkedCollections::DElement> MarkedCollections::d_elements_at(
    const SystemPoint& y, double xi_value) const {
  std::vector<DElement> out;
  // all interval pieces are disjoint within [0, q), so xi mod q picks at
  // most one piece across every subcollection
  const IntervalPiece* piece = nullptr;
  long long z = 0;
  int q = params.q;
  for (const auto& sub : intervals.subcollections) {
    for (const auto& p : sub) {
      long long zz = (long long)std::floor((xi_value - p.lo) / q);
      double rem = xi_value - (double)zz * q;
      if (rem >= p.lo && rem <= p.hi) {
        piece = &p;
        z = zz;
        break;
      }
    }
    if (piece) break;
  }
  if (!piece) return out;

  int p_index = piece->sub + 1;  // 1-based subcollection
  // locate each pad point once and split the result by family, instead of
  // re-flowing y for every candidate region
  int steps = std::max(pad_steps, 2);
  std::map<int, int> family_region;
  for (int i = 0; i < steps; ++i) {
    double b = piece->lo + (piece->hi - piece->lo) * i / (steps - 1);
    for (int r : families.pieces.regions_at(torus.act_real(y, -b)))
      family_region.emplace(families.pieces.regions[r].family, r);
  }
  for (int j = 1; j <= params.k; ++j) {
    int family = j + (p_index - 1) * params.k;
    auto it = family_region.find(family);
    if (it != family_region.end())
      out.push_back({j, family, piece->sub, piece->index, z, it->second});
  }
  return out;
}

bool MarkedCollections::flow_pad_member(int region, const SystemPoint& y, double lo,
                                        double hi) const {
  const Region& reg = families.pieces.regions[region];
  int steps = std::max(pad_steps, 2);
  for (int i = 0; i < steps; ++i) {
    double b = lo + (hi - lo) * i / (steps - 1);
    if (reg.member(torus.act_real(y, -b))) return true;
  }
  return false;
}

namespace {

// x qualifies when its orbit stays clear of the marked ball over |z| <= l,
// so the level function translates exactly along the forward path
bool clear_orbit(const MarkedCollections& mc, const SystemPoint& x) {
  const DynSystem& sys = mc.torus.sys();
  double rho = mc.bricks.rho;
  for (long long z = -mc.params.l; z <= mc.params.l; ++z)
    if (sys.dist(sys.act(x, z), mc.bricks.w_center) <= rho * 1.01) return false;
  return true;
}

}  // namespace

MarkScan scan_marks(const MarkedCollections& mc, int max_audit) {
  MarkScan scan;
  const DynSystem& sys = mc.torus.sys();
  for (int idx : mc.base_samples) {
    if ((int)scan.rows.size() >= max_audit) break;
    const SystemPoint& x = mc.samples[idx];
    if (!clear_orbit(mc, x)) continue;
    MarkScanRow row;
    row.sample = idx;
    LevelValue lv = mc.xi->eval(x);
    if (lv.value <= 0) continue;  // no recorded exit from the marked ball
    row.xi0 = lv.value;
    row.elems.resize(mc.params.l);
    SystemPoint cur = x;
    for (int i = 0; i < mc.params.l; ++i) {
      if (i > 0) cur = sys.act(cur, 1);
      row.elems[i] = mc.d_elements_at(cur, row.xi0 + i);
    }
    scan.rows.push_back(std::move(row));
  }
  return scan;
}

int window_pair_count(int k, int q, const std::vector<bool>& family_covered,
                      const std::vector<std::vector<bool>>& sub_met,
                      const std::vector<int>& offsets) {
  if (k < 1 || q < 1) throw std::invalid_argument("window_pair_count: k, q >= 1");
  if (family_covered.size() != static_cast<std::size_t>(k) * q ||
      sub_met.size() != static_cast<std::size_t>(k) ||
      offsets.size() != static_cast<std::size_t>(k))
    throw std::invalid_argument("window_pair_count: shape mismatch");
  int count = 0;
  for (int j = 1; j <= k; ++j) {
    if (sub_met[j - 1].size() != static_cast<std::size_t>(q))
      throw std::invalid_argument("window_pair_count: shape mismatch");
    for (int p = 1; p <= q; ++p) {
      int f = j + (p - 1) * k;
      int s = ((p - 1 + offsets[j - 1]) % q + q) % q;
      if (family_covered[static_cast<std::size_t>(f - 1)] && sub_met[j - 1][s]) ++count;
    }
  }
  return count;
}

MarkingReport marking_report(const MarkedCollections& mc, const MarkScan& scan) {
  const FiberParams& fp = mc.params;
  MarkingReport rep;
  rep.pair_count = (long long)fp.l * fp.k;
  rep.star_pairs = (long long)fp.k * (fp.q - 2);
  rep.window_bound = fp.m() - fp.n - 2 * fp.k;
  double lq = (double)fp.l / fp.q;
  rep.delta = (1.0 - 3.0 * fp.q / fp.l) * (1.0 - 2.0 * fp.k / (((double)fp.k - fp.d) * fp.q));
  rep.delta_star = 1.0 - 6.0 * fp.k / (fp.q * ((double)fp.k - fp.d));
  rep.bound_windows = (lq - 3.0) * (double)rep.window_bound;
  rep.bound_density = fp.l * ((double)fp.k - fp.d) * rep.delta;

  rep.min_marks = std::numeric_limits<long long>::max();
  rep.min_window_count = std::numeric_limits<long long>::max();
  int windows_needed = fp.l / fp.q - 3;
  bool all_ok = true;
  for (const auto& row : scan.rows) {
    MarkingSampleRow r;
    r.sample = row.sample;
    r.xi0 = row.xi0;
    // only windows [qz, q(z+1)) fully inside the swept range [xi0, xi0+l)
    // count; the sweep clips the first and last window, and the l/q - 3
    // factor in the bound is exactly the allowance for those
    long long z_lo = (long long)std::ceil(row.xi0 / fp.q - 1e-12);
    long long z_hi = (long long)std::floor((row.xi0 + fp.l) / fp.q + 1e-12) - 1;
    std::map<long long, long long> per_window;
    for (int i = 0; i < fp.l; ++i) {
      if (row.elems[i].empty()) continue;
      long long z = row.elems[i][0].z;
      if (z < z_lo || z > z_hi) continue;
      std::set<int> js;
      for (const auto& e : row.elems[i]) js.insert(e.j);
      r.marks += (long long)js.size();
      per_window[z] += (long long)js.size();
    }
    r.min_window = std::numeric_limits<long long>::max();
    for (const auto& [z, cnt] : per_window) {
      r.min_window = std::min(r.min_window, cnt);
      if (cnt >= rep.window_bound) ++r.windows;
    }
    if (per_window.empty()) r.min_window = 0;
    rep.min_marks = std::min(rep.min_marks, r.marks);
    rep.max_marks = std::max(rep.max_marks, r.marks);
    rep.min_window_count = std::min(rep.min_window_count, (long long)r.windows);
    if (r.windows < windows_needed || (double)r.marks < rep.bound_windows ||
        (double)r.marks < rep.bound_density)
      all_ok = false;
    rep.rows.push_back(r);
    ++rep.audited;
  }
  if (rep.audited == 0) {
    rep.min_marks = 0;
    rep.min_window_count = 0;
    all_ok = false;
  }
  rep.ok = all_ok;
  return rep;
}

// ---- the collapsing map ----

namespace {

struct ElemKey {
  int j, region, sub, index;
  long long z;
  bool operator<(const ElemKey& o) const {
    return std::tie(j, region, sub, index, z) < std::tie(o.j, o.region, o.sub, o.index, o.z);
  }
};

struct PsiClass {
  std::vector<SystemPoint> supports;
  double value = 0;
  int rep_support = 0;
};

struct UF {
  std::vector<int> p;
  explicit UF(int n) : p(n) { std::iota(p.begin(), p.end(), 0); }
  int find(int x) {
    while (p[x] != x) x = p[x] = p[p[x]];
    return x;
  }
  void unite(int a, int b) { p[find(a)] = find(b); }
};

}  // namespace

struct PsiMap::State {
  explicit State(MarkedCollections m) : mc(std::move(m)) {}

  MarkedCollections mc;
  Observable f;
  int k = 0;
  double blend = 0, eta = 0, delta = 0, rho = 0;
  std::vector<SystemPoint> arc_centers;              // W orbit arcs on the base copy
  std::vector<std::vector<PsiClass>> classes;        // per coordinate j-1
  std::vector<std::map<ElemKey, int>> elem_class;    // element -> class, per j-1
  std::vector<std::vector<int>> arc_class;           // arc -> class, per j-1

  // psi with the element memberships of x already known
  std::vector<double> eval_known(const SystemPoint& x,
                                 const std::vector<MarkedCollections::DElement>& elems,
                                 int arc_hit) const {
    std::vector<double> fx = f(x);
    std::vector<double> out(k, 0.0);
    for (int j = 1; j <= k; ++j) {
      const auto& cls = classes[j - 1];
      int exact = -1;
      if (arc_hit >= 0) exact = arc_class[j - 1][arc_hit];
      if (exact < 0)
        for (const auto& e : elems)
          if (e.j == j) {
            auto it = elem_class[j - 1].find(
                ElemKey{e.j, e.region, e.sub, e.index, e.z});
            if (it != elem_class[j - 1].end()) exact = it->second;
            break;
          }
      if (exact >= 0) {
        out[j - 1] = cls[exact].value;
        continue;
      }
      double s = 0, acc = 0;
      const DynSystem& sys = mc.torus.sys();
      for (const auto& c : cls) {
        double dmin = blend;
        for (const auto& sp : c.supports) dmin = std::min(dmin, sys.dist(x, sp));
        double g = std::max(0.0, 1.0 - dmin / blend);
        s += g;
        acc += g * c.value;
      }
      out[j - 1] = s >= 1 ? acc / s : acc + (1 - s) * fx[j - 1];
    }
    return out;
  }

  int arc_at(const SystemPoint& x) const {
    const DynSystem& sys = mc.torus.sys();
    for (std::size_t a = 0; a < arc_centers.size(); ++a)
      if (sys.dist(x, arc_centers[a]) <= rho) return (int)a;
    return -1;
  }
};

std::vector<double> PsiMap::eval(const SystemPoint& x) const {
  const State& st = *state_;
  int arc = st.arc_at(x);
  std::vector<MarkedCollections::DElement> elems;
  if (arc < 0) elems = st.mc.d_elements_at(x, st.mc.xi->eval(x).value);
  return st.eval_known(x, elems, arc);
}

double PsiMap::eta() const { return state_->eta; }

int PsiMap::class_count(int j) const { return (int)state_->classes[j - 1].size(); }

PsiMap build_psi(const MarkedCollections& mc, const MarkScan& scan,
                 const Observable& f, const PsiParams& params, PsiReport* report) {
  auto st = std::make_shared<PsiMap::State>(mc);
  st->f = f;
  st->k = mc.params.k;
  st->rho = mc.bricks.rho;
  st->blend = params.blend_eps > 0 ? params.blend_eps : mc.mesh_e / 2;
  st->delta = params.delta;

  const DynSystem& sys = mc.torus.sys();
  {
    std::vector<double> probe = f(mc.samples[0]);
    if ((int)probe.size() < st->k)
      throw std::invalid_argument("build_psi: observable narrower than k");
  }

  // W orbit arcs on the base copy, with any base samples they capture
  std::vector<std::vector<SystemPoint>> arc_supports;
  for (long long z = -2 * mc.params.l; z <= 2 * mc.params.l; ++z) {
    SystemPoint c = sys.act(mc.bricks.w_center, z);
    std::vector<SystemPoint> sup = {c};
    for (int idx : mc.base_samples)
      if (sys.dist(mc.samples[idx], c) <= st->rho) sup.push_back(mc.samples[idx]);
    st->arc_centers.push_back(c);
    arc_supports.push_back(std::move(sup));
  }
  int arcs = (int)st->arc_centers.size();

  // discover elements along the audited clear orbits
  std::map<ElemKey, std::vector<SystemPoint>> elem_supports;
  struct AuditPoint {
    SystemPoint pt;
    std::vector<MarkedCollections::DElement> elems;
    int arc_hit;
  };
  std::vector<AuditPoint> audit_pts;
  for (const auto& row : scan.rows) {
    SystemPoint cur = mc.samples[row.sample];
    for (int i = 0; i < mc.params.l; ++i) {
      if (i > 0) cur = sys.act(cur, 1);
      for (const auto& e : row.elems[i])
        elem_supports[ElemKey{e.j, e.region, e.sub, e.index, e.z}].push_back(cur);
      audit_pts.push_back({cur, row.elems[i], -1});
    }
  }

  PsiReport rep;
  rep.link_unique_ok = true;

  st->classes.assign(st->k, {});
  st->elem_class.assign(st->k, {});
  st->arc_class.assign(st->k, std::vector<int>(arcs, -1));
  for (int j = 1; j <= st->k; ++j) {
    // nodes: arcs first, then this coordinate's elements
    std::vector<ElemKey> keys;
    for (const auto& [key, sup] : elem_supports)
      if (key.j == j) keys.push_back(key);
    UF uf(arcs + (int)keys.size());
    for (std::size_t e = 0; e < keys.size(); ++e) {
      int links = 0;
      for (int a = 0; a < arcs; ++a) {
        bool touch = false;
        for (const auto& sp : elem_supports[keys[e]])
          if (sys.dist(sp, st->arc_centers[a]) <= st->rho) {
            touch = true;
            break;
          }
        if (touch) {
          uf.unite(arcs + (int)e, a);
          ++links;
        }
      }
      if (links > 1) rep.link_unique_ok = false;
    }
    std::map<int, int> root_class;
    auto class_of = [&](int node) {
      int r = uf.find(node);
      auto [it, fresh] = root_class.emplace(r, (int)st->classes[j - 1].size());
      if (fresh) st->classes[j - 1].push_back({});
      return it->second;
    };
    for (int a = 0; a < arcs; ++a) {
      int c = class_of(a);
      st->arc_class[j - 1][a] = c;
      auto& cls = st->classes[j - 1][c];
      cls.supports.insert(cls.supports.end(), arc_supports[a].begin(),
                          arc_supports[a].end());
    }
    for (std::size_t e = 0; e < keys.size(); ++e) {
      int c = class_of(arcs + (int)e);
      st->elem_class[j - 1][keys[e]] = c;
      auto& cls = st->classes[j - 1][c];
      const auto& sup = elem_supports[keys[e]];
      cls.supports.insert(cls.supports.end(), sup.begin(), sup.end());
    }
  }

  rep.classes_total = 0;
  for (const auto& cl : st->classes) rep.classes_total += (int)cl.size();
  st->eta = params.delta / (4.0 * std::max(rep.classes_total, 1));
  rep.eta = st->eta;

  // class values: the observable at a representative, snapped to the eta
  // grid and bumped to distinctness within each coordinate
  for (int j = 1; j <= st->k; ++j) {
    std::set<long long> used;
    for (auto& c : st->classes[j - 1]) {
      if (c.supports.empty()) c.supports.push_back(mc.bricks.w_center);
      double raw = f(c.supports[0])[j - 1];
      long long cell = std::llround(raw / st->eta);
      while (used.count(cell)) ++cell;
      used.insert(cell);
      c.value = (double)cell * st->eta;
    }
  }

  // audits
  rep.separation_ok = true;
  for (int j = 1; j <= st->k; ++j) {
    std::vector<double> vals;
    for (const auto& c : st->classes[j - 1]) vals.push_back(c.value);
    std::sort(vals.begin(), vals.end());
    for (std::size_t i = 1; i < vals.size(); ++i)
      if (vals[i] - vals[i - 1] < st->eta - 1e-12) rep.separation_ok = false;
  }

  PsiMap psi(st);
  rep.constancy_ok = true;
  for (int j = 1; j <= st->k; ++j)
    for (const auto& [key, c] : st->elem_class[j - 1]) {
      const auto& cls = st->classes[j - 1][c];
      for (const auto& sp : elem_supports[key]) {
        // membership is known; psi must return the class value exactly
        std::vector<MarkedCollections::DElement> e = {
            {key.j, 0, key.sub, key.index, key.z, key.region}};
        double v = st->eval_known(sp, e, -1)[j - 1];
        if (std::fabs(v - cls.value) > 1e-9) rep.constancy_ok = false;
      }
    }

  rep.approx_ok = true;
  int audited = 0;
  for (const auto& ap : audit_pts) {
    if (audited >= params.max_audit) break;
    std::vector<double> v = st->eval_known(ap.pt, ap.elems, ap.arc_hit);
    std::vector<double> fv = f(ap.pt);
    for (int j = 0; j < st->k; ++j)
      rep.max_dev = std::max(rep.max_dev, std::fabs(v[j] - fv[j]));
    ++audited;
  }
  rep.audited = audited;
  if (rep.max_dev > params.delta) rep.approx_ok = false;

  // far pairs in one coordinate land in distinct classes with separated
  // values; adjacent windows may legitimately share a class through a link
  rep.window_sep_ok = true;
  for (int j = 1; j <= st->k; ++j) {
    for (auto it1 = st->elem_class[j - 1].begin(); it1 != st->elem_class[j - 1].end();
         ++it1)
      for (auto it2 = std::next(it1); it2 != st->elem_class[j - 1].end(); ++it2) {
        if (std::llabs(it1->first.z - it2->first.z) < 2) continue;
        if (it1->second == it2->second) {
          rep.window_sep_ok = false;
          continue;
        }
        double dv = std::fabs(st->classes[j - 1][it1->second].value -
                              st->classes[j - 1][it2->second].value);
        if (dv < st->eta - 1e-12) rep.window_sep_ok = false;
      }
  }

  rep.ok = rep.constancy_ok && rep.approx_ok && rep.separation_ok &&
           rep.link_unique_ok && rep.window_sep_ok;
  if (report) *report = rep;
  return psi;
}

FiberMultReport fiber_multiplicity(const DynSystem& sys, const Observable& f,
                                   const SampleSet& samples, long long window,
                                   double tol, double sep) {
  FiberMultReport rep;
  rep.tol = tol;
  rep.sep = sep;
  rep.window = window;
  int n = (int)samples.size();
  rep.points = n;
  if (n == 0) return rep;
  if (n > 20000) throw std::invalid_argument("fiber_multiplicity: too many samples");

  // window signatures once, pairwise compare with early exit
  std::vector<std::vector<double>> sig(n);
  for (int i = 0; i < n; ++i) {
    SystemPoint p = sys.act(samples[i], -window);
    for (long long z = -window; z <= window; ++z) {
      if (z > -window) p = sys.act(p, 1);
      std::vector<double> v = f(p);
      sig[i].insert(sig[i].end(), v.begin(), v.end());
    }
  }
  UF uf(n);
  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j) {
      bool same = true;
      for (std::size_t c = 0; c < sig[i].size(); ++c)
        if (std::fabs(sig[i][c] - sig[j][c]) > tol) {
          same = false;
          break;
        }
      if (same) uf.unite(i, j);
    }
  std::map<int, std::vector<int>> classes;
  for (int i = 0; i < n; ++i) classes[uf.find(i)].push_back(i);
  rep.classes = (int)classes.size();
  for (const auto& [root, members] : classes) {
    std::vector<int> net;
    for (int i : members) {
      bool far = true;
      for (int j : net)
        if (sys.dist(samples[i], samples[j]) < sep) {
          far = false;
          break;
        }
      if (far) net.push_back(i);
    }
    rep.max_mult = std::max(rep.max_mult, (int)net.size());
  }
  return rep;
}

}  // namespace mdim
