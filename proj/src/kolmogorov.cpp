#include "mdim/kolmogorov.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>
#include <sstream>
#include <stdexcept>

namespace mdim {

namespace {

// floor(q / k) for exact rationals
long long mpq_floor_div(const mpq_class& q, long k) {
  mpz_class num = q.get_num();
  mpz_class den = q.get_den() * k;
  mpz_class fl;
  mpz_fdiv_q(fl.get_mpz_t(), num.get_mpz_t(), den.get_mpz_t());
  if (!fl.fits_slong_p()) throw std::runtime_error("cube index overflow");
  return fl.get_si();
}

}  // namespace

std::vector<int> CubeFamilySpec::families_containing(
    const std::vector<mpq_class>& x) const {
  std::vector<int> out;
  mpq_class u = unit();
  int period = m + 1;
  for (int i = 1; i <= period; ++i) {
    bool in = true;
    for (const mpq_class& xj : x) {
      mpq_class r = xj / u - i;
      long long z = mpq_floor_div(r, period);
      mpq_class rem = r - mpq_class((long)z) * period;
      if (rem > m) {  // point in the per-axis gap of this family
        in = false;
        break;
      }
    }
    if (in) out.push_back(i);
  }
  return out;
}

std::vector<int> CubeFamilySpec::families_containing(
    const std::vector<double>& x) const {
  std::vector<int> out;
  double u = unit().get_d();
  int period = m + 1;
  for (int i = 1; i <= period; ++i) {
    bool in = true;
    for (double xj : x) {
      double r = xj / u - i;
      double rem = r - period * std::floor(r / period);
      if (rem > m) {
        in = false;
        break;
      }
    }
    if (in) out.push_back(i);
  }
  return out;
}

std::optional<std::vector<long long>> CubeFamilySpec::cube_of(
    int family, const std::vector<mpq_class>& x) const {
  std::vector<long long> zs;
  mpq_class u = unit();
  int period = m + 1;
  for (const mpq_class& xj : x) {
    mpq_class r = xj / u - family;
    long long z = mpq_floor_div(r, period);
    mpq_class rem = r - mpq_class((long)z) * period;
    if (rem > m) return std::nullopt;
    zs.push_back(z);
  }
  return zs;
}

std::optional<std::vector<long long>> CubeFamilySpec::cube_of(
    int family, const std::vector<double>& x) const {
  std::vector<long long> zs;
  double u = unit().get_d();
  int period = m + 1;
  for (double xj : x) {
    double r = xj / u - family;
    double fl = std::floor(r / period);
    double rem = r - period * fl;
    if (rem > m) return std::nullopt;
    zs.push_back((long long)fl);
  }
  return zs;
}

CubeAuditReport audit_cube_families(const CubeFamilySpec& spec,
                                    const std::vector<std::vector<mpq_class>>& probes) {
  CubeAuditReport rep;
  rep.cube_diam = spec.cube_diam();
  rep.gap = spec.unit();
  rep.mesh_ok = rep.cube_diam < spec.eps;
  rep.disjoint_ok = spec.m >= 1 && rep.gap > 0;
  rep.min_mult = spec.family_count();
  int period = spec.m + 1;
  mpq_class u = spec.unit();
  for (const auto& x : probes) {
    if ((int)x.size() != spec.n) throw std::invalid_argument("probe dimension");
    int mult = 0;
    for (int i = 1; i <= period; ++i) {
      auto z = spec.cube_of(i, x);
      if (!z) continue;
      ++mult;
      // the neighbor cube on each axis must not also contain the probe
      for (int ax = 0; ax < spec.n; ++ax) {
        for (long long dz : {-1LL, 1LL}) {
          long zz = (long)((*z)[ax] + dz);
          mpq_class lo = u * mpq_class(zz * period + i);
          mpq_class hi = lo + u * spec.m;
          if (x[ax] >= lo && x[ax] <= hi) rep.disjoint_ok = false;
        }
      }
    }
    rep.min_mult = std::min(rep.min_mult, mult);
    ++rep.probes_checked;
  }
  rep.multiplicity_ok = rep.min_mult >= spec.family_count() - spec.n;
  rep.ok = rep.disjoint_ok && rep.mesh_ok && rep.multiplicity_ok;
  return rep;
}

std::vector<std::vector<mpq_class>> cube_probe_grid(const CubeFamilySpec& spec,
                                                    int count, unsigned seed) {
  std::vector<std::vector<mpq_class>> out;
  out.reserve(count);
  mpq_class span = spec.eps * 3;  // several pitch periods
  mpq_class u = spec.unit();
  for (int i = 0; i < count; ++i) {
    std::vector<mpq_class> x;
    x.reserve(spec.n);
    for (int ax = 0; ax < spec.n; ++ax) {
      if (i % 4 == 3) {
        // endpoint-aligned probe: lands exactly on interval boundaries
        long k = (i / 4 + ax * 7 + (long)(seed % 97)) % (3 * (spec.m + 1));
        x.push_back(u * mpq_class(k));
      } else {
        mpq_class r = radical_inverse(i + 1, nth_prime(ax + (seed % 8)));
        x.push_back(r * span);
      }
    }
    out.push_back(std::move(x));
  }
  return out;
}

std::vector<RnCube> materialize_cubes(const CubeFamilySpec& spec,
                                      const std::vector<std::vector<mpq_class>>& probes) {
  std::set<std::pair<int, std::vector<long long>>> seen;
  for (const auto& x : probes) {
    for (int i = 1; i <= spec.m + 1; ++i) {
      auto z = spec.cube_of(i, x);
      if (z) seen.insert({i, *z});
    }
  }
  std::vector<RnCube> out;
  for (const auto& [f, z] : seen) out.push_back({f, z});
  return out;
}

std::string cube_family_csv(const CubeFamilySpec& spec, const std::vector<RnCube>& cubes) {
  std::ostringstream os;
  os << "family";
  for (int ax = 0; ax < spec.n; ++ax) os << ",z" << ax;
  for (int ax = 0; ax < spec.n; ++ax) os << ",lo" << ax << ",hi" << ax;
  os << "\n";
  mpq_class u = spec.unit();
  int period = spec.m + 1;
  for (const auto& c : cubes) {
    os << c.family;
    for (long long z : c.z) os << "," << z;
    for (long long z : c.z) {
      mpq_class lo = u * mpq_class((long)(z * period + c.family));
      mpq_class hi = lo + u * spec.m;
      os << "," << lo.get_d() << "," << hi.get_d();
    }
    os << "\n";
  }
  return os.str();
}

namespace {

struct ClusterKey {
  int family;
  std::vector<long long> z;
  bool operator<(const ClusterKey& o) const {
    if (family != o.family) return family < o.family;
    return z < o.z;
  }
};

struct UnionFind {
  std::vector<int> parent;
  explicit UnionFind(int n) : parent(n) { std::iota(parent.begin(), parent.end(), 0); }
  int find(int x) {
    while (parent[x] != x) x = parent[x] = parent[parent[x]];
    return x;
  }
  void unite(int a, int b) { parent[find(a)] = find(b); }
};

// single-linkage clusters of the bucket's samples at the given radius
std::vector<std::vector<int>> link_clusters(const DynSystem& sys,
                                            const SampleSet& samples,
                                            const std::vector<int>& bucket,
                                            double radius) {
  int n = (int)bucket.size();
  UnionFind uf(n);
  bool planar = true;
  std::vector<std::pair<double, double>> xy(n);
  for (int i = 0; i < n; ++i) {
    const SystemPoint& p = samples[bucket[i]];
    if (p.is_torus() && p.as_torus().base->is_circle()) {
      xy[i] = {p.as_torus().base->as_circle().val, p.as_torus().t};
    } else if (p.is_circle()) {
      xy[i] = {p.as_circle().val, 0};
    } else {
      planar = false;
      break;
    }
  }
  if (planar && n > 64) {
    // hash into cells of the linkage radius, test neighbor cells only
    int cells = std::max(1, (int)std::floor(1.0 / radius));
    std::map<std::pair<int, int>, std::vector<int>> grid;
    auto cell = [&](double x, double y) {
      int cx = (int)std::floor(frac_unit(x) * cells);
      int cy = (int)std::floor(frac_unit(y) * cells);
      return std::make_pair(std::min(cx, cells - 1), std::min(cy, cells - 1));
    };
    for (int i = 0; i < n; ++i) grid[cell(xy[i].first, xy[i].second)].push_back(i);
    for (int i = 0; i < n; ++i) {
      auto [cx, cy] = cell(xy[i].first, xy[i].second);
      for (int dx = -1; dx <= 1; ++dx)
        for (int dy = -1; dy <= 1; ++dy) {
          auto it = grid.find({((cx + dx) % cells + cells) % cells,
                               ((cy + dy) % cells + cells) % cells});
          if (it == grid.end()) continue;
          for (int j : it->second) {
            if (j <= i) continue;
            if (sys.dist(samples[bucket[i]], samples[bucket[j]]) <= radius)
              uf.unite(i, j);
          }
        }
    }
  } else {
    for (int i = 0; i < n; ++i)
      for (int j = i + 1; j < n; ++j)
        if (sys.dist(samples[bucket[i]], samples[bucket[j]]) <= radius) uf.unite(i, j);
  }
  std::map<int, std::vector<int>> comps;
  for (int i = 0; i < n; ++i) comps[uf.find(i)].push_back(bucket[i]);
  std::vector<std::vector<int>> out;
  for (auto& [root, members] : comps) {
    std::sort(members.begin(), members.end());
    out.push_back(std::move(members));
  }
  std::sort(out.begin(), out.end());
  return out;
}

double derive_link_radius(const DynSystem& sys, const SampleSet& samples) {
  SampleIndex index(sys, samples);
  std::size_t n = samples.size();
  std::size_t probes = std::min<std::size_t>(n, 2000);
  std::size_t step = std::max<std::size_t>(1, n / probes);
  std::vector<double> nn;
  for (std::size_t j = 0; j < n; j += step) {
    std::vector<int> self = {(int)j};
    double d = index.nearest_excluding(samples[j], self).second;
    if (std::isfinite(d)) nn.push_back(d);
  }
  if (nn.empty()) throw std::runtime_error("derive_link_radius: no samples");
  std::sort(nn.begin(), nn.end());
  return 4 * nn[nn.size() / 2];
}

}  // namespace

KoResult kolmogorov_ostrand_cover(const DynSystem& sys, const FiniteCover& u0,
                                  const KoParams& params, const SampleSet& samples) {
  if (params.families < 2)
    throw std::invalid_argument("kolmogorov_ostrand_cover: need >= 2 families");
  KoResult res;
  res.nerve = build_nerve(u0, samples);
  int n_dim = std::max(res.nerve.dim, 1);
  auto cover_copy = std::make_shared<const FiniteCover>(u0);
  res.canon = std::make_shared<const CanonicalMap>(cover_copy, sys, samples);
  res.g = make_pl_map(res.nerve.vertices, n_dim, params.seed);

  std::vector<std::vector<double>> images(samples.size());
  for (std::size_t j = 0; j < samples.size(); ++j)
    images[j] = res.g.eval(res.canon->weights(samples[j]));

  double radius = params.link_radius > 0 ? params.link_radius
                                         : derive_link_radius(sys, samples);
  radius = std::max(radius, params.min_piece_gap);
  res.link_radius = radius;

  // per-sample hit lists of the input cover, for the refinement audit
  std::vector<std::vector<int>> sample_regions(samples.size());
  for (std::size_t i = 0; i < u0.regions.size(); ++i)
    for (int h : u0.regions[i].hits) sample_regions[h].push_back((int)i);

  double cube_eps = params.cube_eps;
  for (int att = 0; att <= params.max_halvings; ++att) {
    res.halvings = att;
    res.cube_eps_final = cube_eps;
    res.spec = CubeFamilySpec{params.families - 1, n_dim, mpq_class(cube_eps)};

    std::map<ClusterKey, std::vector<int>> buckets;
    int min_cov = params.families;
    for (std::size_t j = 0; j < samples.size(); ++j) {
      int cov = 0;
      for (int i = 1; i <= params.families; ++i) {
        auto z = res.spec.cube_of(i, images[j]);
        if (!z) continue;
        ++cov;
        buckets[ClusterKey{i, *z}].push_back((int)j);
      }
      min_cov = std::min(min_cov, cov);
    }
    res.min_coverage = min_cov;
    res.coverage_ok = min_cov >= params.families - n_dim;

    FiniteCover pieces;
    pieces.kind = u0.kind;
    res.refine_ok = true;
    res.disjoint_ok = true;
    auto canon = res.canon;
    auto gmap = std::make_shared<const PLMap>(res.g);
    auto spec = res.spec;
    const DynSystem psys = sys;
    auto sam = samples;
    auto by_cube = std::make_shared<std::map<ClusterKey, std::vector<int>>>();
    auto hitlists = std::make_shared<std::vector<std::shared_ptr<const std::vector<int>>>>();
    for (auto& [key, bucket] : buckets) {
      auto clusters = link_clusters(sys, samples, bucket, radius);
      for (auto& members : clusters) {
        Region r;
        r.id = (int)pieces.regions.size();
        r.family = key.family;
        std::ostringstream lab;
        lab << "F" << key.family << ":z";
        for (long long z : key.z) lab << "_" << z;
        lab << ":c" << r.id;
        r.label = lab.str();
        r.hits = members;
        int fam = key.family;
        auto zkey = key.z;
        auto hits = std::make_shared<const std::vector<int>>(members);
        double rad = radius / 2;
        // membership: image lands in this family cube and the point sits
        // within half the linkage radius of this component's samples
        r.member = [canon, gmap, spec, fam, zkey, psys, sam, hits,
                    rad](const SystemPoint& p) {
          auto w = canon->try_weights(p);
          if (!w) return false;
          auto z = spec.cube_of(fam, gmap->eval(*w));
          if (!z || *z != zkey) return false;
          for (int h : *hits)
            if (psys.dist(p, sam[h]) <= rad) return true;
          return false;
        };
        (*by_cube)[key].push_back(r.id);
        hitlists->push_back(hits);
        pieces.regions.push_back(std::move(r));
      }
    }
    // one weights evaluation locates every piece containing p; scanning the
    // piece lambdas instead would redo that evaluation per region
    {
      int nfam = params.families;
      double rad = radius / 2;
      pieces.locate = [canon, gmap, spec, psys, sam, by_cube, hitlists, rad,
                       nfam](const SystemPoint& p) {
        std::vector<int> out;
        auto w = canon->try_weights(p);
        if (!w) return out;
        std::vector<double> img = gmap->eval(*w);
        for (int fam = 1; fam <= nfam; ++fam) {
          auto z = spec.cube_of(fam, img);
          if (!z) continue;
          auto it = by_cube->find(ClusterKey{fam, *z});
          if (it == by_cube->end()) continue;
          for (int idx : it->second)
            for (int h : *(*hitlists)[static_cast<std::size_t>(idx)])
              if (psys.dist(p, sam[h]) <= rad) {
                out.push_back(idx);
                break;
              }
        }
        std::sort(out.begin(), out.end());
        return out;
      };
    }

    // refinement audit: each piece's hits inside some input region's hits
    for (const auto& r : pieces.regions) {
      if (r.hits.empty()) continue;
      bool inside = false;
      for (int cand : sample_regions[r.hits[0]]) {
        const auto& big = u0.regions[cand].hits;
        if (std::includes(big.begin(), big.end(), r.hits.begin(), r.hits.end())) {
          inside = true;
          break;
        }
      }
      if (!inside) {
        res.refine_ok = false;
        break;
      }
    }

    // family disjointness at sample resolution
    {
      std::map<std::pair<int, int>, int> seen;  // (family, sample) -> piece
      for (std::size_t i = 0; i < pieces.regions.size() && res.disjoint_ok; ++i)
        for (int h : pieces.regions[i].hits) {
          auto key = std::make_pair(pieces.regions[i].family, h);
          auto [it, fresh] = seen.emplace(key, (int)i);
          if (!fresh) {
            res.disjoint_ok = false;
            break;
          }
        }
    }

    if (res.refine_ok && res.disjoint_ok) {
      res.pieces = std::move(pieces);
      res.profile = order_profile(res.pieces, samples);
      return res;
    }
    if (att == params.max_halvings) {
      res.pieces = std::move(pieces);
      res.profile = order_profile(res.pieces, samples);
      return res;
    }
    cube_eps /= 2;
  }
  throw std::logic_error("kolmogorov_ostrand_cover: unreachable");
}

}  // namespace mdim
