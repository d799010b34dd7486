#include "mdim/systems.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace mdim {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

mpq_class seed_frac(unsigned seed, unsigned stream) {
  unsigned long v = (static_cast<unsigned long>(seed) * 2654435761UL +
                     stream * 40503UL + 1UL) %
                    8191UL;
  mpq_class q(static_cast<long>(v), 8191L);
  q.canonicalize();
  return q;
}

mpq_class frac_mpq(const mpq_class& q) {
  mpz_class fl;
  mpz_fdiv_q(fl.get_mpz_t(), q.get_num_mpz_t(), q.get_den_mpz_t());
  return q - mpq_class(fl);
}

}  // namespace

unsigned nth_prime(unsigned k) {
  static std::vector<unsigned> primes = {2, 3};
  while (primes.size() <= k) {
    unsigned c = primes.back() + 2;
    while (true) {
      bool is_prime = true;
      for (unsigned p : primes) {
        if (p * p > c) break;
        if (c % p == 0) {
          is_prime = false;
          break;
        }
      }
      if (is_prime) break;
      c += 2;
    }
    primes.push_back(c);
  }
  return primes[k];
}

double frac_unit(double x) {
  double f = x - std::floor(x);
  if (f >= 1.0) f = 0.0;
  return f;
}

double circle_dist(double x, double y) {
  double d = std::fabs(frac_unit(x) - frac_unit(y));
  return std::min(d, 1.0 - d);
}

mpq_class radical_inverse(unsigned long long i, unsigned base) {
  mpz_class num = 0, den = 1;
  while (i > 0) {
    num = num * base + static_cast<long>(i % base);
    den *= base;
    i /= base;
  }
  mpq_class q(num, den);
  q.canonicalize();
  return q;
}

SystemPoint SystemPoint::circle(QuadExt angle) {
  CirclePoint c;
  c.angle = angle.reduced_mod_1();
  c.val = c.angle.value();
  return SystemPoint(Payload(std::move(c)));
}

SystemPoint SystemPoint::sturm(QuadExt base, long long offset) {
  SturmPoint s;
  s.base = base.reduced_mod_1();
  s.base_val = s.base.value();
  s.offset = offset;
  return SystemPoint(Payload(std::move(s)));
}

SystemPoint SystemPoint::product(SystemPoint a, SystemPoint b) {
  ProductPoint p;
  p.first = std::make_shared<const SystemPoint>(std::move(a));
  p.second = std::make_shared<const SystemPoint>(std::move(b));
  return SystemPoint(Payload(std::move(p)));
}

SystemPoint SystemPoint::torus(SystemPoint base, double t) {
  TorusPoint tp;
  tp.base = std::make_shared<const SystemPoint>(std::move(base));
  tp.t = t;
  return SystemPoint(Payload(std::move(tp)));
}

const CirclePoint& SystemPoint::as_circle() const {
  if (!is_circle()) throw std::domain_error("SystemPoint: not a circle point");
  return std::get<CirclePoint>(payload_);
}
const SturmPoint& SystemPoint::as_sturm() const {
  if (!is_sturm()) throw std::domain_error("SystemPoint: not a sturmian point");
  return std::get<SturmPoint>(payload_);
}
const ProductPoint& SystemPoint::as_product() const {
  if (!is_product()) throw std::domain_error("SystemPoint: not a product point");
  return std::get<ProductPoint>(payload_);
}
const TorusPoint& SystemPoint::as_torus() const {
  if (!is_torus()) throw std::domain_error("SystemPoint: not a torus point");
  return std::get<TorusPoint>(payload_);
}

namespace {

class RotationModel : public SystemModel {
 public:
  RotationModel(QuadExt alpha, long long horizon)
      : alpha_(alpha.reduced_mod_1()), horizon_(horizon) {
    if (alpha_.is_rational())
      throw std::invalid_argument("make_rotation: alpha must be irrational");
    if (horizon_ < 1) throw std::invalid_argument("make_rotation: horizon must be >= 1");
  }

  SystemPoint act(const SystemPoint& p, long long z) const override {
    const CirclePoint& c = p.as_circle();
    return SystemPoint::circle(c.angle.plus_integer_multiple(alpha_, z));
  }

  double dist(const SystemPoint& p, const SystemPoint& q) const override {
    return circle_dist(p.as_circle().val, q.as_circle().val);
  }

  std::vector<SystemPoint> sample(std::size_t n, unsigned seed,
                                  unsigned stream) const override {
    std::vector<SystemPoint> out;
    out.reserve(n);
    unsigned base = nth_prime(stream);
    mpq_class off = seed_frac(seed, stream);
    for (std::size_t i = 0; i < n; ++i) {
      mpq_class a = frac_mpq(radical_inverse(i + 1, base) + off);
      out.push_back(SystemPoint::circle(QuadExt(a)));
    }
    return out;
  }

  std::string descriptor() const override {
    return "{\"kind\":\"rotation\",\"alpha\":\"" + alpha_.str() +
           "\",\"horizon\":" + std::to_string(horizon_) + "}";
  }

  long long horizon() const override { return horizon_; }

  const QuadExt& alpha() const { return alpha_; }

 private:
  QuadExt alpha_;
  long long horizon_;
};

class SturmianModel : public SystemModel {
 public:
  SturmianModel(QuadExt alpha, int precision, long long horizon)
      : alpha_(alpha.reduced_mod_1()),
        alpha_ld_(alpha_.value_ld()),
        precision_(precision),
        horizon_(horizon) {
    if (alpha_.is_rational())
      throw std::invalid_argument("make_sturmian: alpha must be irrational");
    if (precision_ < 1)
      throw std::invalid_argument("make_sturmian: precision must be >= 1");
  }

  SystemPoint act(const SystemPoint& p, long long z) const override {
    const SturmPoint& s = p.as_sturm();
    SturmPoint out = s;
    out.offset += z;
    return SystemPoint(SystemPoint::Payload(out));
  }

  int symbol(const SturmPoint& s, long long z) const {
    long double lo = static_cast<long double>(s.base_val) +
                     static_cast<long double>(s.offset + z) * alpha_ld_;
    return static_cast<int>(floorl(lo + alpha_ld_) - floorl(lo));
  }

  double dist(const SystemPoint& p, const SystemPoint& q) const override {
    const SturmPoint& a = p.as_sturm();
    const SturmPoint& b = q.as_sturm();
    for (int r = 0; r <= precision_; ++r) {
      if (symbol(a, r) != symbol(b, r) || (r > 0 && symbol(a, -r) != symbol(b, -r)))
        return std::pow(2.0, -r);
    }
    return 0.0;  // indistinguishable at this precision
  }

  std::vector<SystemPoint> sample(std::size_t n, unsigned seed,
                                  unsigned stream) const override {
    std::vector<SystemPoint> out;
    out.reserve(n);
    unsigned base = nth_prime(stream);
    mpq_class off = seed_frac(seed, stream);
    for (std::size_t i = 0; i < n; ++i) {
      mpq_class a = frac_mpq(radical_inverse(i + 1, base) + off);
      out.push_back(SystemPoint::sturm(QuadExt(a), 0));
    }
    return out;
  }

  std::string descriptor() const override {
    return "{\"kind\":\"sturmian\",\"alpha\":\"" + alpha_.str() +
           "\",\"precision\":" + std::to_string(precision_) +
           ",\"horizon\":" + std::to_string(horizon_) + "}";
  }

  long long horizon() const override { return horizon_; }

  const QuadExt& alpha() const { return alpha_; }

 private:
  QuadExt alpha_;
  long double alpha_ld_;
  int precision_;
  long long horizon_;
};

class ProductModel : public SystemModel {
 public:
  ProductModel(DynSystem a, DynSystem b) : a_(std::move(a)), b_(std::move(b)) {}

  SystemPoint act(const SystemPoint& p, long long z) const override {
    const ProductPoint& pp = p.as_product();
    return SystemPoint::product(a_.act(*pp.first, z), b_.act(*pp.second, z));
  }

  double dist(const SystemPoint& p, const SystemPoint& q) const override {
    const ProductPoint& pp = p.as_product();
    const ProductPoint& qq = q.as_product();
    return std::max(a_.dist(*pp.first, *qq.first), b_.dist(*pp.second, *qq.second));
  }

  std::vector<SystemPoint> sample(std::size_t n, unsigned seed,
                                  unsigned stream) const override {
    std::vector<SystemPoint> sa = a_.sample(n, seed, 2 * stream + 1);
    std::vector<SystemPoint> sb = b_.sample(n, seed, 2 * stream + 2);
    std::vector<SystemPoint> out;
    out.reserve(n);
    for (std::size_t i = 0; i < n; ++i)
      out.push_back(SystemPoint::product(sa[i], sb[i]));
    return out;
  }

  std::string descriptor() const override {
    return "{\"kind\":\"product\",\"first\":" + a_.descriptor() +
           ",\"second\":" + b_.descriptor() + "}";
  }

  long long horizon() const override {
    return std::min(a_.horizon(), b_.horizon());
  }

 private:
  DynSystem a_, b_;
};

}  // namespace

DynSystem make_rotation(const QuadExt& alpha, long long horizon) {
  return DynSystem(std::make_shared<RotationModel>(alpha, horizon));
}

DynSystem make_sturmian(const QuadExt& alpha, int precision, long long horizon) {
  return DynSystem(std::make_shared<SturmianModel>(alpha, precision, horizon));
}

DynSystem make_product(const DynSystem& a, const DynSystem& b) {
  return DynSystem(std::make_shared<ProductModel>(a, b));
}

int sturm_symbol(const SturmPoint& p, const QuadExt& alpha, long long z) {
  long double al = alpha.value_ld();
  long double lo = static_cast<long double>(p.base_val) +
                   static_cast<long double>(p.offset + z) * al;
  return static_cast<int>(floorl(lo + al) - floorl(lo));
}

SampleSet make_samples(const DynSystem& sys, std::size_t n, unsigned seed) {
  SampleSet s;
  s.points = std::make_shared<const std::vector<SystemPoint>>(sys.sample(n, seed, 0));
  s.ref = "n=" + std::to_string(n) + ";seed=" + std::to_string(seed) +
          ";sys=" + sys.descriptor();
  return s;
}

// ---- SampleIndex ----

bool SampleIndex::coords(const SystemPoint& p, double& x, double& y, bool& has_y) {
  if (p.is_circle()) {
    x = p.as_circle().val;
    y = 0;
    has_y = false;
    return true;
  }
  if (p.is_torus() && p.as_torus().base->is_circle()) {
    x = p.as_torus().base->as_circle().val;
    y = p.as_torus().t;
    has_y = true;
    return true;
  }
  return false;
}

void SampleIndex::insert(double x, double y, int id) {
  int ix = static_cast<int>(frac_unit(x) * nx_) % nx_;
  int iy = 0;
  if (wrap_y_) {
    iy = static_cast<int>((y + 1.0) / 3.0 * ny_);
    if (iy < 0 || iy >= ny_) return;  // copy outside the tracked band
  }
  buckets_[static_cast<std::size_t>(iy) * nx_ + ix].push_back(
      Entry{static_cast<float>(x), static_cast<float>(y), id});
}

SampleIndex::SampleIndex(const DynSystem& sys, const SampleSet& samples)
    : sys_(sys), samples_(samples) {
  if (samples.size() == 0) return;
  double x, y;
  bool has_y;
  if (!coords(samples[0], x, y, has_y)) return;  // generic fallback, brute scans
  planar_ = true;
  wrap_y_ = has_y;
  nx_ = 64;
  ny_ = wrap_y_ ? 192 : 1;  // y band [-1,2) at the same 1/64 cell size
  buckets_.assign(static_cast<std::size_t>(nx_) * ny_, {});
  for (std::size_t i = 0; i < samples.size(); ++i) {
    const SystemPoint& p = samples[i];
    coords(p, x, y, has_y);
    if (!wrap_y_) {
      insert(x, 0, static_cast<int>(i));
      continue;
    }
    // torus representatives (x - z, t + z); only |z| <= 1 matters below dist 1
    for (long long z = -1; z <= 1; ++z) {
      SystemPoint rep = sys_.act(p, -z);
      double rx, ry;
      bool hy;
      coords(rep, rx, ry, hy);
      insert(rx, y + static_cast<double>(z), static_cast<int>(i));
    }
  }
}

std::pair<int, double> SampleIndex::nearest_excluding(
    const SystemPoint& p, const std::vector<int>& exclude) const {
  int best_id = -1;
  double best = kInf;
  auto excluded = [&](int id) {
    return std::binary_search(exclude.begin(), exclude.end(), id);
  };
  if (!planar_) {
    for (std::size_t i = 0; i < samples_.size(); ++i) {
      if (excluded(static_cast<int>(i))) continue;
      double d = sys_.dist(p, samples_[i]);
      if (d < best) {
        best = d;
        best_id = static_cast<int>(i);
      }
    }
    return {best_id, best};
  }
  double qx, qy;
  bool has_y;
  coords(p, qx, qy, has_y);
  int ix = static_cast<int>(frac_unit(qx) * nx_) % nx_;
  int iy = wrap_y_ ? std::clamp(static_cast<int>((qy + 1.0) / 3.0 * ny_), 0, ny_ - 1) : 0;
  const double cell = 1.0 / nx_;
  int max_r = std::max(nx_, ny_);
  auto scan_cell = [&](int cx, int cy) {
    cx = ((cx % nx_) + nx_) % nx_;
    if (cy < 0 || cy >= ny_) return;
    for (const Entry& e : buckets_[static_cast<std::size_t>(cy) * nx_ + cx]) {
      if (excluded(e.id)) continue;
      double d = sys_.dist(p, samples_[e.id]);
      if (d < best) {
        best = d;
        best_id = e.id;
      }
    }
  };
  for (int r = 0; r <= max_r; ++r) {
    if (r >= 2 && (r - 1) * cell > best) break;
    if (r == 0) {
      scan_cell(ix, iy);
      continue;
    }
    for (int dx = -r; dx <= r; ++dx) {
      scan_cell(ix + dx, iy - r);
      if (ny_ > 1) scan_cell(ix + dx, iy + r);
    }
    if (ny_ > 1) {
      for (int dy = -r + 1; dy <= r - 1; ++dy) {
        scan_cell(ix - r, iy + dy);
        scan_cell(ix + r, iy + dy);
      }
    } else if (ny_ == 1) {
      scan_cell(ix - r, 0);
      scan_cell(ix + r, 0);
    }
  }
  return {best_id, best};
}

}  // namespace mdim
