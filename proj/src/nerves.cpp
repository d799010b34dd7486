#include "mdim/nerves.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <set>
#include <stdexcept>

namespace mdim {

bool Nerve::has_face(const std::vector<int>& f) const {
  return std::binary_search(faces.begin(), faces.end(), f);
}

Nerve build_nerve(const FiniteCover& c, const SampleSet& samples) {
  Nerve n;
  n.vertices = (int)c.regions.size();

  bool have_hits = false;
  for (const auto& r : c.regions)
    if (!r.hits.empty()) {
      have_hits = true;
      break;
    }

  std::vector<std::vector<int>> patterns(samples.size());
  if (have_hits) {
    for (std::size_t i = 0; i < c.regions.size(); ++i)
      for (int h : c.regions[i].hits) patterns[h].push_back((int)i);
  } else {
    for (std::size_t j = 0; j < samples.size(); ++j)
      patterns[j] = c.regions_at(samples[j]);
  }

  std::set<std::vector<int>> faces;
  std::vector<int> sub;
  for (auto& pat : patterns) {
    if (pat.empty()) continue;
    std::sort(pat.begin(), pat.end());
    if (faces.count(pat)) continue;
    // downward closure over the pattern's nonempty subsets
    int k = (int)pat.size();
    if (k > 20) throw std::runtime_error("build_nerve: pattern too large");
    for (unsigned mask = 1; mask < (1u << k); ++mask) {
      sub.clear();
      for (int b = 0; b < k; ++b)
        if (mask & (1u << b)) sub.push_back(pat[b]);
      faces.insert(sub);
    }
  }
  n.faces.assign(faces.begin(), faces.end());
  for (const auto& f : n.faces) n.dim = std::max(n.dim, (int)f.size() - 1);
  return n;
}

CanonicalMap::CanonicalMap(const FiniteCover& c, const DynSystem& sys,
                           const SampleSet& samples)
    : cover_(&c), sys_(sys), samples_(samples), index_(sys, samples) {}

CanonicalMap::CanonicalMap(std::shared_ptr<const FiniteCover> c, const DynSystem& sys,
                           const SampleSet& samples)
    : holder_(std::move(c)),
      cover_(holder_.get()),
      sys_(sys),
      samples_(samples),
      index_(sys, samples) {}

std::optional<std::vector<std::pair<int, double>>> CanonicalMap::try_weights(
    const SystemPoint& p) const {
  std::vector<int> ids = cover_->regions_at(p);
  if (ids.empty()) return std::nullopt;
  std::vector<std::pair<int, double>> out;
  double total = 0;
  for (int id : ids) {
    double w = index_.nearest_excluding(p, cover_->regions[id].hits).second;
    if (std::isinf(w)) w = 1.0;  // region swallows every sample
    if (w > 0) {
      out.emplace_back(id, w);
      total += w;
    }
  }
  if (out.empty() || total <= 0) return std::nullopt;
  for (auto& e : out) e.second /= total;
  return out;
}

std::vector<std::pair<int, double>> CanonicalMap::weights(const SystemPoint& p) const {
  auto w = try_weights(p);
  if (!w) throw std::runtime_error("CanonicalMap: point has no positive weights");
  return *w;
}

std::vector<double> PLMap::eval(
    const std::vector<std::pair<int, double>>& weights) const {
  std::vector<double> out(dim, 0.0);
  for (const auto& [v, w] : weights) {
    const std::vector<double>& img = vertex_images.at(v);
    for (int d = 0; d < dim; ++d) out[d] += w * img[d];
  }
  return out;
}

PLMap make_pl_map(int vertices, int target_dim, unsigned seed) {
  if (vertices < 0 || target_dim < 1)
    throw std::invalid_argument("make_pl_map: bad shape");
  PLMap g;
  g.dim = target_dim;
  g.vertex_images.resize(vertices);
  // quadratic Weyl lattice: frac(v*s_d + v^2*t_d) with s, t square roots of
  // distinct primes picked by the seed; general position is audited, never
  // assumed
  unsigned off = 2u * (unsigned)target_dim * (seed % 16u);
  std::vector<double> s(target_dim), t(target_dim);
  for (int d = 0; d < target_dim; ++d) {
    s[d] = std::sqrt((double)nth_prime(off + 2 * d));
    t[d] = std::sqrt((double)nth_prime(off + 2 * d + 1));
  }
  for (int v = 0; v < vertices; ++v) {
    std::vector<double> img(target_dim);
    double vv = v + 1;
    for (int d = 0; d < target_dim; ++d) img[d] = frac_unit(vv * s[d] + vv * vv * t[d]);
    g.vertex_images[v] = std::move(img);
  }
  return g;
}

namespace {

// rank by Gaussian elimination; smallest accepted pivot recorded
int matrix_rank(std::vector<std::vector<double>> m, double tol, double* min_pivot) {
  int rows = (int)m.size();
  if (rows == 0) return 0;
  int cols = (int)m[0].size();
  int rank = 0;
  for (int c = 0; c < cols && rank < rows; ++c) {
    int piv = -1;
    double best = tol;
    for (int r = rank; r < rows; ++r)
      if (std::fabs(m[r][c]) > best) {
        best = std::fabs(m[r][c]);
        piv = r;
      }
    if (piv < 0) continue;
    std::swap(m[piv], m[rank]);
    if (min_pivot) *min_pivot = std::min(*min_pivot, best);
    for (int r = 0; r < rows; ++r) {
      if (r == rank) continue;
      double f = m[r][c] / m[rank][c];
      for (int cc = c; cc < cols; ++cc) m[r][cc] -= f * m[rank][cc];
    }
    ++rank;
  }
  return rank;
}

}  // namespace

bool faces_affinely_independent(const Nerve& nerve, const PLMap& g, double tol,
                                double* min_gap) {
  double local_gap = std::numeric_limits<double>::infinity();
  bool ok = true;
  for (const auto& f : nerve.faces) {
    int k = (int)f.size();
    if (k < 2) continue;
    if (k - 1 > g.dim) {
      ok = false;
      break;
    }
    std::vector<std::vector<double>> m;
    const auto& base = g.vertex_images[f[0]];
    for (int i = 1; i < k; ++i) {
      std::vector<double> row(g.dim);
      const auto& img = g.vertex_images[f[i]];
      for (int d = 0; d < g.dim; ++d) row[d] = img[d] - base[d];
      m.push_back(std::move(row));
    }
    if (matrix_rank(std::move(m), tol, &local_gap) < k - 1) {
      ok = false;
      break;
    }
  }
  if (min_gap) *min_gap = local_gap;
  return ok;
}

namespace {

// barycentric containment of y in the image of face f, by least squares
bool simplex_contains(const PLMap& g, const std::vector<int>& f,
                      const std::vector<double>& y, double tol) {
  int k = (int)f.size();
  int d = g.dim;
  int rows = d + 1;  // coordinates plus the sum-to-one constraint
  std::vector<std::vector<double>> a(rows, std::vector<double>(k));
  std::vector<double> b(rows);
  for (int r = 0; r < d; ++r) {
    for (int c = 0; c < k; ++c) a[r][c] = g.vertex_images[f[c]][r];
    b[r] = y[r];
  }
  for (int c = 0; c < k; ++c) a[d][c] = 1;
  b[d] = 1;
  // normal equations; sizes here are tiny
  std::vector<std::vector<double>> m(k, std::vector<double>(k + 1));
  for (int i = 0; i < k; ++i) {
    for (int j = 0; j < k; ++j) {
      double s = 0;
      for (int r = 0; r < rows; ++r) s += a[r][i] * a[r][j];
      m[i][j] = s;
    }
    double s = 0;
    for (int r = 0; r < rows; ++r) s += a[r][i] * b[r];
    m[i][k] = s;
  }
  for (int c = 0; c < k; ++c) {
    int piv = c;
    for (int r = c + 1; r < k; ++r)
      if (std::fabs(m[r][c]) > std::fabs(m[piv][c])) piv = r;
    if (std::fabs(m[piv][c]) < 1e-14) return false;  // degenerate face
    std::swap(m[piv], m[c]);
    for (int r = 0; r < k; ++r) {
      if (r == c) continue;
      double fac = m[r][c] / m[c][c];
      for (int cc = c; cc <= k; ++cc) m[r][cc] -= fac * m[c][cc];
    }
  }
  std::vector<double> l(k);
  for (int i = 0; i < k; ++i) l[i] = m[i][k] / m[i][i];
  for (double x : l)
    if (x < -tol) return false;
  // the least-squares solution must actually reproduce y and sum to one
  for (int r = 0; r < rows; ++r) {
    double s = 0;
    for (int c = 0; c < k; ++c) s += a[r][c] * l[c];
    if (std::fabs(s - b[r]) > tol) return false;
  }
  return true;
}

}  // namespace

int max_simplices_containing(const Nerve& nerve, const PLMap& g,
                             const std::vector<std::vector<double>>& probes,
                             double tol) {
  int best = 0;
  for (const auto& y : probes) {
    int count = 0;
    for (const auto& f : nerve.faces)
      if (simplex_contains(g, f, y, tol)) ++count;
    best = std::max(best, count);
  }
  return best;
}

}  // namespace mdim
