#include "mdim/interval_systems.hpp"
#include "mdim/quadratic.hpp"

#include "doctest.h"

#include <algorithm>
#include <cmath>
#include <vector>

using namespace mdim;

namespace {

// two smallest |t + z - a| over distinct (z, anchor) pairs, brute force over
// the anchor fractional parts with a generous z range
double anchor_gap_oracle(const IntervalSystem& sys, double t) {
  std::vector<double> ds;
  for (double a : sys.anchor_fracs)
    for (long z = -2; z <= 2; ++z)
      ds.push_back(std::fabs(t + static_cast<double>(z) - a));
  std::sort(ds.begin(), ds.end());
  return ds[0] + ds[1];
}

}  // namespace

TEST_CASE("independence certificate accepts and rejects correctly") {
  QuadExt r2 = QuadExt::sqrt_of(2);
  QuadExt r3 = QuadExt::sqrt_of(3);
  QuadExt r5 = QuadExt::sqrt_of(5);

  CHECK(certify_rational_independence({r2}).independent);
  CHECK(certify_rational_independence({r2, r3}).independent);
  CHECK(certify_rational_independence({r2, r3, r5}).independent);
  CHECK(certify_rational_independence({r2.scaled(mpq_class(1, 3)), r3}).independent);

  // 1, sqrt2, 1+sqrt2 are dependent
  CHECK_FALSE(certify_rational_independence({r2, r2.plus_rational(1)}).independent);
  // sqrt8 = 2 sqrt2
  CHECK_FALSE(certify_rational_independence({r2, QuadExt::sqrt_of(2, 2)}).independent);
  // any rational is dependent with 1
  CHECK_FALSE(certify_rational_independence({QuadExt(mpq_class(3, 7))}).independent);

  IndependenceCertificate cert = certify_rational_independence({r2, r3});
  CHECK(cert.rank == 3);  // together with 1
  CHECK(!cert.basis.empty());
}

TEST_CASE("interval system geometry invariants") {
  IntervalSystemParams params;
  params.q = 3;
  params.mesh_bound = 0.2;
  IntervalSystem sys = build_interval_system(params);

  CHECK(sys.q == 3);
  CHECK(sys.certificate.independent);
  CHECK(sys.sigma_lower > 0);
  CHECK(sys.mesh <= params.mesh_bound + 1e-12);
  REQUIRE(sys.subcollections.size() == 3);
  CHECK(sys.subcollections.back().empty());

  // pieces stay in [0, q), respect the mesh, and are pairwise disjoint
  std::vector<std::pair<double, double>> all;
  for (const auto& sub : sys.subcollections)
    for (const auto& piece : sub) {
      CHECK(piece.lo >= 0.0);
      CHECK(piece.hi < static_cast<double>(sys.q));
      CHECK(piece.hi > piece.lo);
      CHECK(piece.hi - piece.lo <= params.mesh_bound + 1e-12);
      all.emplace_back(piece.lo, piece.hi);
    }
  REQUIRE(!all.empty());
  std::sort(all.begin(), all.end());
  for (std::size_t i = 1; i < all.size(); ++i) CHECK(all[i - 1].second < all[i].first);

  // anchor fracs sorted in [0, 1)
  CHECK(std::is_sorted(sys.anchor_fracs.begin(), sys.anchor_fracs.end()));
  for (double a : sys.anchor_fracs) {
    CHECK(a >= 0.0);
    CHECK(a < 1.0);
  }
}

TEST_CASE("anchor gap matches brute force and certifies sigma") {
  IntervalSystemParams params;
  params.q = 3;
  params.mesh_bound = 0.2;
  IntervalSystem sys = build_interval_system(params);

  for (int i = 0; i < 60; ++i) {
    double t = (i + 0.31) / 60.0;
    CHECK(anchor_gap(sys, t) == doctest::Approx(anchor_gap_oracle(sys, t)).epsilon(1e-11));
  }
  // the certified lower bound holds on a finer grid than certification used
  double lo = 1e18;
  for (int i = 0; i < 5000; ++i) lo = std::min(lo, anchor_gap(sys, i / 5000.0));
  CHECK(lo >= sys.sigma_lower - 1e-12);
}

TEST_CASE("every orbit meets all but at most two subcollections") {
  for (int q : {3, 5}) {
    IntervalSystemParams params;
    params.q = q;
    params.mesh_bound = 0.2;
    IntervalSystem sys = build_interval_system(params);
    for (int i = 0; i < 400; ++i) {
      double t = (i + 0.5) / 400.0;
      CHECK(count_met(sys, t) >= q - 2);
    }
  }
}

TEST_CASE("met pieces report consistent membership") {
  IntervalSystemParams params;
  params.q = 5;
  params.mesh_bound = 0.1;
  IntervalSystem sys = build_interval_system(params);

  for (int i = 0; i < 100; ++i) {
    double t = (i + 0.77) / 100.0;
    std::vector<MetPiece> met = met_pieces(sys, t);
    std::vector<int> subs;
    for (const auto& mp : met) {
      REQUIRE(mp.sub >= 0);
      REQUIRE(mp.sub < sys.q);
      const IntervalPiece& piece = sys.subcollections[mp.sub][mp.index];
      double pos = t + static_cast<double>(mp.z);
      CHECK(pos >= piece.lo - 1e-12);
      CHECK(pos <= piece.hi + 1e-12);
      subs.push_back(mp.sub);
    }
    std::sort(subs.begin(), subs.end());
    subs.erase(std::unique(subs.begin(), subs.end()), subs.end());
    CHECK(static_cast<int>(subs.size()) == count_met(sys, t));
  }
}

TEST_CASE("unreachable mesh bound fails loudly") {
  IntervalSystemParams params;
  params.q = 3;
  params.mesh_bound = 1e-5;
  params.max_doublings = 2;
  CHECK_THROWS_AS(build_interval_system(params), std::runtime_error);
}

TEST_CASE("interval csv shape") {
  IntervalSystemParams params;
  params.q = 3;
  params.mesh_bound = 0.2;
  IntervalSystem sys = build_interval_system(params);
  std::string csv = interval_system_csv(sys);
  std::size_t pieces = 0;
  for (const auto& sub : sys.subcollections) pieces += sub.size();
  CHECK(std::count(csv.begin(), csv.end(), '\n') == static_cast<long>(pieces) + 1);
}
