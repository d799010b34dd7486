#include "mdim/torus.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
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

mpq_class stream_offset(unsigned seed, unsigned stream) {
  unsigned long v = (static_cast<unsigned long>(seed) * 2654435761UL +
                     stream * 40503UL + 1UL) %
                    8191UL;
  mpq_class q(static_cast<long>(v), 8191L);
  q.canonicalize();
  return q;
}

double sample_coord(unsigned long long i, unsigned seed, unsigned stream) {
  mpq_class v = radical_inverse(i, nth_prime(stream)) + stream_offset(seed, stream);
  v -= v.get_num() / v.get_den();  // integer part; value stays in [0, 1)+
  double d = v.get_d();
  return frac_unit(d);
}

// does z -> x + z*alpha hold for the base action (angle values cached on points)
bool rotation_like(const DynSystem& base, double* alpha_out) {
  SystemPoint probe = SystemPoint::circle(QuadExt(mpq_class(1, 7)));
  if (!probe.is_circle()) return false;
  double alpha;
  try {
    alpha = frac_unit(base.act(probe, 1).as_circle().val - probe.as_circle().val);
  } catch (const std::exception&) {
    return false;
  }
  for (long long z : {-3, 2, 5}) {
    SystemPoint q = base.act(probe, z);
    double expect = frac_unit(probe.as_circle().val + static_cast<double>(z) * alpha);
    if (circle_dist(q.as_circle().val, expect) > 1e-9) return false;
  }
  *alpha_out = alpha;
  return true;
}

class TorusModel : public SystemModel {
 public:
  explicit TorusModel(DynSystem base) : base_(std::move(base)) {
    fast_ = rotation_like(base_, &alpha_);
  }

  SystemPoint normalize(const SystemPoint& base_pt, double t) const {
    double fl = std::floor(t);
    double tr = t - fl;
    if (tr >= 1.0) {
      tr = 0.0;
      fl += 1.0;
    }
    return SystemPoint::torus(base_.act(base_pt, static_cast<long long>(fl)), tr);
  }

  SystemPoint act(const SystemPoint& p, long long z) const override {
    const TorusPoint& tp = p.as_torus();
    return SystemPoint::torus(base_.act(*tp.base, z), tp.t);
  }

  double dist(const SystemPoint& p, const SystemPoint& q) const override {
    const TorusPoint& a = p.as_torus();
    const TorusPoint& b = q.as_torus();
    double best = 2.0;
    if (fast_) {
      double av = a.base->as_circle().val;
      double bv = b.base->as_circle().val;
      for (int k = -2; k <= 2; ++k) {
        double d = std::fabs(a.t - b.t - k);
        if (d >= best) continue;
        d = std::max(d, circle_dist(av, bv - k * alpha_));
        best = std::min(best, d);
      }
      return best;
    }
    for (int k = -2; k <= 2; ++k) {
      double dt = std::fabs(a.t - b.t - k);
      if (dt >= best) continue;
      double d = std::max(dt, base_.dist(*a.base, base_.act(*b.base, -k)));
      best = std::min(best, d);
    }
    return best;
  }

  std::vector<SystemPoint> sample(std::size_t n, unsigned seed,
                                  unsigned stream) const override {
    std::vector<SystemPoint> base_pts = base_.sample(n, seed, 2 * stream + 1);
    std::vector<SystemPoint> out;
    out.reserve(n);
    for (std::size_t i = 0; i < n; ++i) {
      double t = (i % 8 == 0) ? 0.0 : sample_coord(i + 1, seed, 2 * stream + 2);
      out.push_back(SystemPoint::torus(base_pts[i], t));
    }
    return out;
  }

  std::string descriptor() const override {
    return "{\"kind\":\"torus\",\"base\":" + base_.descriptor() + "}";
  }

  long long horizon() const override { return base_.horizon(); }

 private:
  DynSystem base_;
  bool fast_ = false;
  double alpha_ = 0;
};

class SlabModel : public SystemModel {
 public:
  explicit SlabModel(DynSystem base) : base_(std::move(base)) {}

  SystemPoint act(const SystemPoint& p, long long z) const override {
    const TorusPoint& tp = p.as_torus();
    return SystemPoint::torus(base_.act(*tp.base, z), tp.t);
  }

  double dist(const SystemPoint& p, const SystemPoint& q) const override {
    const TorusPoint& a = p.as_torus();
    const TorusPoint& b = q.as_torus();
    return std::max(std::fabs(a.t - b.t), base_.dist(*a.base, *b.base));
  }

  std::vector<SystemPoint> sample(std::size_t n, unsigned seed,
                                  unsigned stream) const override {
    std::vector<SystemPoint> base_pts = base_.sample(n, seed, 2 * stream + 1);
    std::vector<SystemPoint> out;
    out.reserve(n);
    for (std::size_t i = 0; i < n; ++i) {
      double t;
      if (i % 8 == 0)
        t = 0.0;
      else if (i % 8 == 4)
        t = 1.0;
      else
        t = sample_coord(i + 1, seed, 2 * stream + 2);
      out.push_back(SystemPoint::torus(base_pts[i], t));
    }
    return out;
  }

  std::string descriptor() const override {
    return "{\"kind\":\"slab\",\"base\":" + base_.descriptor() + "}";
  }

  long long horizon() const override { return base_.horizon(); }

 private:
  DynSystem base_;
};

}  // namespace

TorusSystem::TorusSystem(DynSystem base)
    : base_(base),
      torus_(DynSystem(std::make_shared<TorusModel>(base))),
      slab_(DynSystem(std::make_shared<SlabModel>(base))) {}

SystemPoint TorusSystem::point(const SystemPoint& base_pt, double t) const {
  double fl = std::floor(t);
  double tr = t - fl;
  if (tr >= 1.0) {
    tr = 0.0;
    fl += 1.0;
  }
  return SystemPoint::torus(base_.act(base_pt, static_cast<long long>(fl)), tr);
}

SystemPoint TorusSystem::act_real(const SystemPoint& y, double r) const {
  const TorusPoint& tp = y.as_torus();
  return point(*tp.base, tp.t + r);
}

double TorusSystem::fiber_coord(const SystemPoint& y) const { return y.as_torus().t; }

SystemPoint TorusSystem::slab_point(const SystemPoint& base_pt, double t) const {
  if (t < 0 || t > 1) throw std::invalid_argument("slab_point: t outside [0, 1]");
  return SystemPoint::torus(base_pt, t);
}

FiniteCover slab_band_cover(const TorusSystem& ts, int layers) {
  (void)ts;
  if (layers < 2) throw std::invalid_argument("slab_band_cover: need >= 2 layers");
  FiniteCover c;
  c.kind = CoverKind::Closed;
  for (int k = 0; k < layers; ++k) {
    double lo = static_cast<double>(k) / (layers + 1);
    double hi = static_cast<double>(k + 2) / (layers + 1);
    Region r;
    r.id = k;
    r.family = k;
    r.label = "band:" + std::to_string(k);
    r.member = [lo, hi](const SystemPoint& p) {
      double t = p.as_torus().t;
      return t >= lo && t <= hi;
    };
    c.regions.push_back(std::move(r));
  }
  c.locate = [layers](const SystemPoint& p) {
    double t = p.as_torus().t;
    int top = std::min(layers - 1, static_cast<int>(std::floor(t * (layers + 1))));
    std::vector<int> out;
    for (int k = std::max(0, top - 2); k <= top; ++k)
      if (t >= static_cast<double>(k) / (layers + 1) &&
          t <= static_cast<double>(k + 2) / (layers + 1))
        out.push_back(k);
    return out;
  };
  return c;
}

FiniteCover slab_grid_cover(const TorusSystem& ts, int arcs, int layers) {
  (void)ts;
  if (arcs < 3) throw std::invalid_argument("slab_grid_cover: need >= 3 arcs");
  if (layers < 2) throw std::invalid_argument("slab_grid_cover: need >= 2 layers");
  FiniteCover c;
  c.kind = CoverKind::Closed;
  double ov = 1.0 / (4 * arcs);
  int id = 0;
  for (int i = 0; i < arcs; ++i) {
    double center = (i + 0.5) / arcs;
    double half = 0.5 / arcs + ov;
    for (int k = 0; k < layers; ++k) {
      double lo = static_cast<double>(k) / (layers + 1);
      double hi = static_cast<double>(k + 2) / (layers + 1);
      Region r;
      r.id = id++;
      r.family = i;
      r.label = "arc" + std::to_string(i) + ":band" + std::to_string(k);
      r.member = [center, half, lo, hi](const SystemPoint& p) {
        const TorusPoint& tp = p.as_torus();
        if (tp.t < lo || tp.t > hi) return false;
        return circle_dist(tp.base->as_circle().val, center) <= half;
      };
      c.regions.push_back(std::move(r));
    }
  }
  c.locate = [arcs, layers, ov](const SystemPoint& p) {
    const TorusPoint& tp = p.as_torus();
    double v = tp.base->as_circle().val;
    int i0 = static_cast<int>(std::floor(v * arcs));
    int top = std::min(layers - 1, static_cast<int>(std::floor(tp.t * (layers + 1))));
    std::vector<int> out;
    for (int di = -1; di <= 1; ++di) {
      int i = ((i0 + di) % arcs + arcs) % arcs;
      if (circle_dist(v, (i + 0.5) / arcs) > 0.5 / arcs + ov) continue;
      for (int k = std::max(0, top - 2); k <= top; ++k)
        if (tp.t >= static_cast<double>(k) / (layers + 1) &&
            tp.t <= static_cast<double>(k + 2) / (layers + 1))
          out.push_back(i * layers + k);
    }
    std::sort(out.begin(), out.end());
    return out;
  };
  return c;
}

FiniteCover lift_cover(const TorusSystem& ts, const FiniteCover& slab_cover,
                       const SampleSet& torus_samples) {
  auto slab = std::make_shared<const FiniteCover>(slab_cover);
  const DynSystem base = ts.base();
  FiniteCover out;
  out.kind = slab_cover.kind;
  for (std::size_t i = 0; i < slab->regions.size(); ++i) {
    const Region& src = slab->regions[i];
    Region r;
    r.id = src.id;
    r.family = src.family;
    r.label = "pi(" + src.label + ")";
    r.member = [slab, base, i](const SystemPoint& p) {
      const TorusPoint& tp = p.as_torus();
      if (slab->regions[i].member(p)) return true;
      if (tp.t != 0.0) return false;
      SystemPoint glued = SystemPoint::torus(base.act(*tp.base, -1), 1.0);
      return slab->regions[i].member(glued);
    };
    out.regions.push_back(std::move(r));
  }
  if (slab->locate) {
    auto loc = slab->locate;
    out.locate = [loc, base](const SystemPoint& p) {
      std::vector<int> ids = loc(p);
      const TorusPoint& tp = p.as_torus();
      if (tp.t == 0.0) {
        SystemPoint glued = SystemPoint::torus(base.act(*tp.base, -1), 1.0);
        std::vector<int> extra = loc(glued);
        ids.insert(ids.end(), extra.begin(), extra.end());
        std::sort(ids.begin(), ids.end());
        ids.erase(std::unique(ids.begin(), ids.end()), ids.end());
      }
      return ids;
    };
  }
  compute_hits(out, torus_samples);
  return out;
}

int max_order_off_base(const FiniteCover& c, const TorusSystem& ts,
                       const SampleSet& samples) {
  (void)ts;
  std::vector<int> counts(samples.size(), 0);
  for (const auto& r : c.regions)
    for (int h : r.hits) ++counts[h];
  int best = 0;
  for (std::size_t j = 0; j < samples.size(); ++j)
    if (samples[j].as_torus().t != 0.0) best = std::max(best, counts[j]);
  return best;
}

FiniteCover translate_cover(const TorusSystem& ts, const FiniteCover& c, double r,
                            const SampleSet& samples) {
  auto src = std::make_shared<const FiniteCover>(c);
  FiniteCover out;
  out.kind = c.kind;
  for (std::size_t i = 0; i < src->regions.size(); ++i) {
    const Region& reg = src->regions[i];
    Region nr;
    nr.id = reg.id;
    nr.family = reg.family;
    nr.label = reg.label + "+" + fmt9(r);
    nr.member = [src, i, ts, r](const SystemPoint& p) {
      return src->regions[i].member(ts.act_real(p, -r));
    };
    out.regions.push_back(std::move(nr));
  }
  if (src->locate) {
    auto loc = src->locate;
    out.locate = [loc, ts, r](const SystemPoint& p) { return loc(ts.act_real(p, -r)); };
  }
  compute_hits(out, samples);
  return out;
}

ShiftChainResult build_shift_chain(const TorusSystem& ts, const FiniteCover& c, int n,
                                   double d, double eps, const SampleSet& samples) {
  if (n < 1) throw std::invalid_argument("build_shift_chain: n must be >= 1");
  if (d <= 0) throw std::invalid_argument("build_shift_chain: d must be positive");
  long long m = static_cast<long long>(std::floor(static_cast<double>(n) / d));
  if (m < 1) throw std::invalid_argument("build_shift_chain: floor(n/d) must be >= 1");
  ShiftChainResult res;
  res.step = m;
  res.window = m * n;
  res.premesh = check_fine(c, ts, eps, static_cast<double>(m) + 1.0, samples);
  std::vector<FiniteCover> translates;
  translates.reserve(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i)
    translates.push_back(translate_cover(ts, c, static_cast<double>(i) / n, samples));
  res.join = join_with_shifts(translates, ts.sys(), m, samples);
  // the guarantee is mesh(join + z) < eps across the fixed window step*n;
  // the raw join order only enters the report as the witnessed density
  res.ord = order_profile(res.join, samples).ord;
  res.ratio = static_cast<double>(res.ord) / static_cast<double>(res.window);
  res.mesh = mesh_under_translates(res.join, ts.sys(), res.window, samples);
  res.mesh_ok = true;
  for (double v : res.mesh) {
    res.worst_mesh = std::max(res.worst_mesh, v);
    if (v >= eps) res.mesh_ok = false;
  }
  return res;
}

// ---- brick cover around a flow tube ----

namespace {

struct BrickState {
  double alpha = 0;
  double xw = 0;  // marked base angle
  long long span = 0;
  double tube_halfwidth = 0;
  double a = 0;
  double ustep = 0;
  double u0 = 0;  // irrational offset against grid/sample coincidences
  long long s_lo = 0, s_hi = 0;
  double r_tube = 0, v_near = 0, v_away = 0;
  int rows = 0, cols = 0;
  double tau0 = 0, theta0 = 0;
  std::vector<std::pair<double, long long>> strands;  // (angle, index) sorted

  int near_count() const { return static_cast<int>(s_hi - s_lo + 1); }

  // nearest tube strand by angle
  void nearest(double angle, long long* z, double* v) const {
    double x = frac_unit(angle);
    auto it = std::lower_bound(strands.begin(), strands.end(),
                               std::make_pair(x, std::numeric_limits<long long>::min()));
    double best = 2;
    long long bz = 0;
    for (int off = -1; off <= 0; ++off) {
      std::size_t idx = (it - strands.begin() + off + strands.size()) % strands.size();
      double d = circle_dist(x, strands[idx].first);
      if (d < best) {
        best = d;
        bz = strands[idx].second;
      }
    }
    *z = bz;
    *v = best;
  }

  bool tube_coords(const SystemPoint& p, double* u, double* v) const {
    const TorusPoint& tp = p.as_torus();
    long long z;
    nearest(tp.base->as_circle().val, &z, v);
    *u = static_cast<double>(z) + tp.t;
    return true;
  }

  bool near_member(long long s, const SystemPoint& p) const {
    double u, v;
    tube_coords(p, &u, &v);
    if (v > v_near) return false;
    double lo = u0 + static_cast<double>(s) * ustep;
    return u >= lo && u <= lo + a;
  }

  int row_of(double t) const {
    int j = static_cast<int>(frac_unit(t - tau0) * rows);
    return std::min(j, rows - 1);
  }

  int col_of(int row, double angle) const {
    double off = (row % 2) ? 0.5 / cols : 0.0;
    int i = static_cast<int>(frac_unit(angle - theta0 - off) * cols);
    return std::min(i, cols - 1);
  }

  // the tube exclusion applies only where tube bricks exist; past the tube
  // ends the cell keeps the strand neighborhood, closing the seam there
  bool tube_zone(long long z) const {
    return std::fabs(static_cast<double>(z)) <= tube_halfwidth;
  }

  bool away_member(int j, int i, const SystemPoint& p) const {
    const TorusPoint& tp = p.as_torus();
    if (row_of(tp.t) != j) return false;
    double angle = tp.base->as_circle().val;
    if (col_of(j, angle) != i) return false;
    long long z;
    double v;
    nearest(angle, &z, &v);
    return v >= v_away || !tube_zone(z);
  }

  std::vector<int> locate(const SystemPoint& p) const {
    std::vector<int> out;
    const TorusPoint& tp = p.as_torus();
    double angle = tp.base->as_circle().val;
    long long z;
    double v;
    nearest(angle, &z, &v);
    double u = static_cast<double>(z) + tp.t;
    if (v <= v_near) {
      long long first = static_cast<long long>(std::ceil((u - a - u0) / ustep - 1e-12));
      long long last = static_cast<long long>(std::floor((u - u0) / ustep + 1e-12));
      for (long long s = std::max(first, s_lo); s <= std::min(last, s_hi); ++s) {
        double lo = u0 + static_cast<double>(s) * ustep;
        if (u >= lo && u <= lo + a) out.push_back(static_cast<int>(s - s_lo));
      }
    }
    if (v >= v_away || !tube_zone(z)) {
      int j = row_of(tp.t);
      int i = col_of(j, angle);
      out.push_back(near_count() + j * cols + i);
    }
    return out;
  }
};

}  // namespace

std::vector<std::pair<double, double>> ball_crossings(const TorusSystem& ts,
                                                      const SystemPoint& x,
                                                      const SystemPoint& center,
                                                      double radius, double beta) {
  const TorusPoint& xp = x.as_torus();
  const TorusPoint& cp = center.as_torus();
  double alpha;
  if (!rotation_like(ts.base(), &alpha))
    throw std::runtime_error("ball_crossings: rotation base required");
  double xa = xp.base->as_circle().val;
  double ca = cp.base->as_circle().val;
  // the flow passes the center's fiber level at r = t - ct - k
  std::vector<std::pair<double, double>> out;
  long long kmin = static_cast<long long>(std::floor(xp.t - cp.t - beta - radius)) - 1;
  long long kmax = static_cast<long long>(std::ceil(xp.t - cp.t + beta + radius)) + 1;
  for (long long k = kmin; k <= kmax; ++k) {
    double rstar = xp.t - cp.t - static_cast<double>(k);
    double g = circle_dist(xa + static_cast<double>(k) * alpha, ca);
    if (g > radius) continue;
    double lo = std::max(rstar - radius, -beta);
    double hi = std::min(rstar + radius, beta);
    if (lo <= hi) out.emplace_back(lo, hi);
  }
  std::sort(out.begin(), out.end());
  return out;
}

BrickCover build_brick_cover(const TorusSystem& ts, const SystemPoint& w_base,
                             const BrickCoverParams& params, const SampleSet& samples) {
  double alpha;
  if (!rotation_like(ts.base(), &alpha))
    throw std::runtime_error("build_brick_cover: rotation base required");
  if (params.a <= 0 || params.a >= 0.5)
    throw std::invalid_argument("build_brick_cover: tube brick extent out of range");
  auto st = std::make_shared<BrickState>();
  st->alpha = alpha;
  st->xw = w_base.as_circle().val;
  st->a = params.a;
  st->ustep = params.a / 2;
  st->tube_halfwidth =
      params.tube_halfwidth > 0 ? params.tube_halfwidth : 3.0 * params.beta;
  st->span = static_cast<long long>(std::ceil(st->tube_halfwidth)) + 1;

  double gap = 1;
  for (long long dz = 1; dz <= 2 * st->span; ++dz)
    gap = std::min(gap, circle_dist(static_cast<double>(dz) * alpha, 0.0));
  st->r_tube = params.r_tube > 0 ? params.r_tube : gap / 4;
  if (st->r_tube > gap / 4 + 1e-15)
    throw std::invalid_argument("build_brick_cover: r_tube too large for strand gap");
  st->v_near = 1.2 * st->r_tube;
  st->v_away = 0.8 * st->r_tube;

  for (long long z = -st->span; z <= st->span; ++z)
    st->strands.emplace_back(frac_unit(st->xw + static_cast<double>(z) * alpha), z);
  std::sort(st->strands.begin(), st->strands.end());

  st->u0 = frac_unit(0.3 * std::sqrt(5.0)) * st->ustep;
  st->s_lo = static_cast<long long>(std::floor((-st->tube_halfwidth - 1 - st->u0) / st->ustep));
  st->s_hi = static_cast<long long>(std::ceil((st->tube_halfwidth + 1 - st->u0) / st->ustep));
  st->rows = static_cast<int>(std::ceil(2.0 / params.eps));
  st->cols = static_cast<int>(std::ceil(2.0 / params.eps));
  st->tau0 = frac_unit(0.25 * std::sqrt(3.0));
  st->theta0 = frac_unit(0.2 * std::sqrt(7.0));

  BrickCover bc;
  bc.w_center = ts.point(w_base, 0);
  bc.rho = st->r_tube / 2;
  bc.r_tube = st->r_tube;
  bc.strand_gap = gap;
  bc.strand_span = st->span;

  FiniteCover cover;
  cover.kind = CoverKind::Closed;
  int id = 0;
  for (long long s = st->s_lo; s <= st->s_hi; ++s) {
    Region r;
    r.id = id++;
    r.family = r.id;
    r.label = "tube:" + std::to_string(s);
    r.member = [st, s](const SystemPoint& p) { return st->near_member(s, p); };
    cover.regions.push_back(std::move(r));
  }
  bc.tube_bricks = id;
  for (int j = 0; j < st->rows; ++j)
    for (int i = 0; i < st->cols; ++i) {
      Region r;
      r.id = id++;
      r.family = r.id;
      r.label = "cell:" + std::to_string(j) + ":" + std::to_string(i);
      r.member = [st, j, i](const SystemPoint& p) { return st->away_member(j, i, p); };
      cover.regions.push_back(std::move(r));
    }
  bc.grid_bricks = st->rows * st->cols;
  cover.locate = [st](const SystemPoint& p) { return st->locate(p); };
  compute_hits(cover, samples);
  bc.cover = std::move(cover);

  Region w;
  w.id = 0;
  w.family = 0;
  w.label = "W";
  SystemPoint center = bc.w_center;
  const DynSystem& tsys = ts.sys();
  double rho = bc.rho;
  w.member = [tsys, center, rho](const SystemPoint& p) {
    return tsys.dist(p, center) <= rho;
  };
  for (std::size_t jj = 0; jj < samples.size(); ++jj)
    if (w.member(samples[jj])) w.hits.push_back(static_cast<int>(jj));
  bc.w = std::move(w);
  return bc;
}

RefinedReport check_refined_brick(const BrickCover& bc, const TorusSystem& ts,
                                  double alpha, double beta,
                                  const SampleSet& samples) {
  RefinedReport rep;
  const FiniteCover& cover = bc.cover;

  // Samples whose backward flow passes W within [-beta-rho, beta+rho].
  // The strand gap exceeds 4*rho, so each such sample crosses from exactly
  // one strand: its crossing set is a single interval centered at its tube
  // flow coordinate u (W sits at u = 0).
  struct Contact {
    int sample;
    double u;
    double r_lo, r_hi;
  };
  std::vector<Contact> contacts;
  for (std::size_t j = 0; j < samples.size(); ++j) {
    auto cr = ball_crossings(ts, samples[j], bc.w_center, bc.rho, beta + bc.rho);
    if (cr.empty()) continue;
    if (cr.size() > 1 && cr.back().first - cr.front().second > 2 * bc.rho)
      throw std::runtime_error("check_refined_brick: sample crosses W twice");
    Contact c;
    c.sample = static_cast<int>(j);
    c.r_lo = cr.front().first;
    c.r_hi = cr.back().second;
    c.u = (c.r_lo + c.r_hi) / 2;
    contacts.push_back(c);
  }

  // Condition 1: no brick translate may meet W copies a unit of flow apart.
  // A contact x lies in tube brick A_s + r exactly when u(x) - r is in the
  // brick's u-interval, so two contacts share a brick translate only when
  // their u values differ by at most the brick extent; the r1 values they
  // witness for W then differ by at most that extent plus the crossing
  // width.  Away bricks never hold a contact's backward orbit: v stays
  // under rho along the audited window, below the away threshold.
  rep.translate_separation_ok = true;
  rep.max_window_spread = 0;
  for (std::size_t i = 0; i < contacts.size(); ++i)
    for (std::size_t j = i; j < contacts.size(); ++j) {
      const Contact& x1 = contacts[i];
      const Contact& x2 = contacts[j];
      if (std::fabs(x1.u - x2.u) > 1.0) continue;  // no shared tube brick
      double spread = std::max(x1.r_hi, x2.r_hi) - std::min(x1.r_lo, x2.r_lo);
      rep.max_window_spread = std::max(rep.max_window_spread, spread);
      if (spread >= 1) rep.translate_separation_ok = false;
    }

  // Condition 2: bricks whose translate sweep meets the W sweep must stay
  // small under every translate.  Translates are isometries over a rotation
  // base (probed below), so one diameter per flagged brick suffices.
  std::vector<char> flagged(cover.regions.size(), 0);
  for (const auto& c : contacts) {
    const SystemPoint& x = samples[c.sample];
    std::vector<int> ids = cover.regions_at(x);
    for (int id : ids) flagged[id] = 1;
    // sweep the backward orbit through its brick windows at the brick step
    for (double r = -beta; r <= beta; r += 0.01) {
      for (int id : cover.regions_at(ts.act_real(x, -r))) flagged[id] = 1;
    }
  }
  rep.near_sweep_small_ok = true;
  for (std::size_t id = 0; id < cover.regions.size(); ++id) {
    if (!flagged[id]) continue;
    ++rep.flagged_regions;
    double d = hit_diameter(cover.regions[id], ts.sys(), samples, 0);
    rep.max_near_diam = std::max(rep.max_near_diam, d);
    if (d >= alpha) rep.near_sweep_small_ok = false;
  }
  // isometry probe: flow translates preserve the quotient metric
  if (samples.size() >= 2) {
    for (double r : {-beta, -0.37 * beta, 0.5, beta}) {
      const SystemPoint& p = samples[0];
      const SystemPoint& q = samples[samples.size() / 2];
      double d0 = ts.dist(p, q);
      double d1 = ts.dist(ts.act_real(p, r), ts.act_real(q, r));
      if (std::fabs(d0 - d1) > 1e-9)
        throw std::runtime_error("check_refined_brick: translate not isometric");
    }
  }
  rep.ok = rep.translate_separation_ok && rep.near_sweep_small_ok;
  return rep;
}

}  // namespace mdim
