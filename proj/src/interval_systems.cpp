#include "mdim/interval_systems.hpp"

#include "mdim/systems.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>
#include <sstream>
#include <stdexcept>

namespace mdim {

IndependenceCertificate certify_rational_independence(const std::vector<QuadExt>& vals) {
  IndependenceCertificate cert;
  // columns: 0 for the rational direction, then one per distinct root
  std::map<long, int> root_col;
  for (const auto& v : vals)
    if (v.radical_part() != 0 && !root_col.count(v.root()))
      root_col[v.root()] = (int)root_col.size() + 1;

  cert.basis.push_back("1");
  for (const auto& [root, col] : root_col) {
    (void)col;
    cert.basis.push_back("sqrt(" + std::to_string(root) + ")");
  }

  int cols = 1 + (int)root_col.size();
  // sparse exact elimination; pivots[c] holds a normalized row with leading
  // column c
  std::vector<std::vector<std::pair<int, mpq_class>>> pivots(cols);
  std::vector<char> has_pivot(cols, 0);
  auto reduce_insert = [&](std::vector<std::pair<int, mpq_class>> row) {
    while (!row.empty()) {
      int lead = row[0].first;
      if (!has_pivot[lead]) {
        mpq_class inv = row[0].second;
        for (auto& [c, v] : row) v /= inv;
        pivots[lead] = std::move(row);
        has_pivot[lead] = 1;
        return true;
      }
      mpq_class factor = row[0].second;
      std::vector<std::pair<int, mpq_class>> next;
      std::size_t i = 0, j = 0;
      const auto& piv = pivots[lead];
      while (i < row.size() || j < piv.size()) {
        if (j == piv.size() || (i < row.size() && row[i].first < piv[j].first)) {
          next.push_back(row[i++]);
        } else if (i == row.size() || piv[j].first < row[i].first) {
          next.emplace_back(piv[j].first, -factor * piv[j].second);
          ++j;
        } else {
          mpq_class v = row[i].second - factor * piv[j].second;
          if (v != 0) next.emplace_back(row[i].first, v);
          ++i;
          ++j;
        }
      }
      row = std::move(next);
    }
    return false;
  };

  int rank = 0;
  // the constant 1 comes first
  if (reduce_insert({{0, mpq_class(1)}})) ++rank;
  bool all_new = true;
  for (const auto& v : vals) {
    std::vector<std::pair<int, mpq_class>> row;
    if (v.rational_part() != 0) row.emplace_back(0, v.rational_part());
    if (v.radical_part() != 0) row.emplace_back(root_col[v.root()], v.radical_part());
    if (row.empty() || !reduce_insert(std::move(row)))
      all_new = false;
    else
      ++rank;
  }
  cert.rank = rank;
  cert.independent = all_new && rank == (int)vals.size() + 1;
  return cert;
}

double anchor_gap(const IntervalSystem& sys, double t) {
  const std::vector<double>& fr = sys.anchor_fracs;
  if (fr.size() < 2) throw std::runtime_error("anchor_gap: too few anchors");
  double x = frac_unit(t);
  auto it = std::lower_bound(fr.begin(), fr.end(), x);
  // two smallest circle distances over distinct anchors
  double d1 = 2, d2 = 2;
  for (int off = -2; off <= 1; ++off) {
    long idx = (long)(it - fr.begin()) + off;
    long n = (long)fr.size();
    long w = ((idx % n) + n) % n;
    double d = circle_dist(x, fr[w]);
    if (d < d1) {
      d2 = d1;
      d1 = d;
    } else if (d < d2) {
      d2 = d;
    }
  }
  // the same anchor reached through the next integer costs 1 - d1
  return d1 + std::min(d2, 1 - d1);
}

IntervalSystem build_interval_system(const IntervalSystemParams& params) {
  if (params.q < 3) throw std::invalid_argument("build_interval_system: q must be > 2");
  if (params.mesh_bound <= 0)
    throw std::invalid_argument("build_interval_system: mesh bound must be positive");
  int q = params.q;

  long count = (long)std::ceil(3.0 * q / params.mesh_bound);
  for (int att = 0; att <= params.max_doublings; ++att, count *= 2) {
    long c = count;
    while (std::gcd(c, (long)q) != 1) ++c;
    if (c > 2000000)
      throw std::runtime_error("build_interval_system: anchor count too large");

    IntervalSystem sys;
    sys.q = q;
    sys.anchor_count = (int)c;
    std::vector<double> avals;
    for (long j = 0; j < c; ++j) {
      double target = (j + 0.5) * q / c;
      long p = nth_prime((unsigned)j);
      double rt = std::sqrt((double)p);
      // rounding jitter must stay far below the 1/c spacing of the anchor
      // fractional parts or the layout collapses into near collisions
      long scale = params.denom_scale;
      while ((double)scale < 32.0 * (double)c * rt) scale *= 2;
      long num = std::lround(target / rt * (double)scale);
      mpq_class s(num, scale);
      s.canonicalize();
      QuadExt a = QuadExt::sqrt_of(p, s);
      avals.push_back(a.value());
      sys.anchors.push_back(std::move(a));
    }
    sys.certificate = certify_rational_independence(sys.anchors);
    if (!sys.certificate.independent) continue;

    sys.anchor_fracs.reserve(avals.size() + 1);
    for (double a : avals) sys.anchor_fracs.push_back(frac_unit(a));
    sys.anchor_fracs.push_back(0.0);  // the unit anchor, 1 in A
    std::sort(sys.anchor_fracs.begin(), sys.anchor_fracs.end());

    // certified sigma: grid minimum minus the Lipschitz slack
    long grid = (long)params.grid_per_anchor * c;
    double step = 1.0 / (double)grid;
    double gmin = 2;
    for (long i = 0; i < grid; ++i)
      gmin = std::min(gmin, anchor_gap(sys, (i + 0.5) * step));
    sys.sigma_lower = gmin - step;
    if (sys.sigma_lower <= 0) continue;
    double sigma = sys.sigma_lower;

    // slots between consecutive multiples of q/(q-1), pulled in by margin,
    // stay longer than 1 so every integer orbit visits each of them
    double pitch = (double)q / (q - 1);
    sys.margin = (pitch - 1) / 4;

    // interval pieces: slot minus the open sigma/3 halos, one per anchor at
    // the anchor's own position; any integer orbit enters at most one halo,
    // so it loses at most one slot
    std::vector<double> centers = avals;
    centers.push_back(1.0);
    std::sort(centers.begin(), centers.end());

    sys.subcollections.assign(q, {});
    sys.mesh = 0;
    for (int i = 1; i <= q - 1; ++i) {
      double lo = (i - 1) * pitch + sys.margin;
      double hi = i * pitch - sys.margin;
      std::vector<IntervalPiece>& sub = sys.subcollections[i - 1];
      double cursor = lo;
      for (double ctr : centers) {
        double blo = ctr - sigma / 3, bhi = ctr + sigma / 3;
        if (bhi <= cursor) continue;
        if (blo >= hi) break;
        if (blo > cursor) {
          IntervalPiece piece{cursor, std::min(blo, hi), i - 1, (int)sub.size()};
          sub.push_back(piece);
          sys.mesh = std::max(sys.mesh, piece.hi - piece.lo);
        }
        cursor = std::max(cursor, bhi);
        if (cursor >= hi) break;
      }
      if (cursor < hi) {
        IntervalPiece piece{cursor, hi, i - 1, (int)sub.size()};
        sub.push_back(piece);
        sys.mesh = std::max(sys.mesh, piece.hi - piece.lo);
      }
    }
    if (sys.mesh > params.mesh_bound || sys.mesh <= 0) continue;
    return sys;
  }
  throw std::runtime_error("build_interval_system: no admissible anchor count");
}

std::vector<MetPiece> met_pieces(const IntervalSystem& sys, double t) {
  std::vector<MetPiece> out;
  for (const auto& sub : sys.subcollections)
    for (const auto& piece : sub) {
      long long z = (long long)std::ceil(piece.lo - t);
      if (t + (double)z <= piece.hi) out.push_back({piece.sub, piece.index, z});
    }
  return out;
}

int count_met(const IntervalSystem& sys, double t) {
  std::vector<char> seen(sys.q, 0);
  for (const auto& m : met_pieces(sys, t)) seen[m.sub] = 1;
  int n = 0;
  for (char s : seen) n += s;
  return n;
}

std::string interval_system_csv(const IntervalSystem& sys) {
  std::ostringstream os;
  os << "sub,index,lo,hi\n";
  char buf[96];
  for (const auto& sub : sys.subcollections)
    for (const auto& p : sub) {
      std::snprintf(buf, sizeof(buf), "%d,%d,%.12g,%.12g\n", p.sub, p.index, p.lo, p.hi);
      os << buf;
    }
  return os.str();
}

}  // namespace mdim
