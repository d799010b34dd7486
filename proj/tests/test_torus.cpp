#include "mdim/covers.hpp"
#include "mdim/systems.hpp"
#include "mdim/torus.hpp"

#include "doctest.h"

#include <algorithm>
#include <cmath>
#include <vector>

using namespace mdim;

namespace {

QuadExt root2_minus_1() { return QuadExt(mpq_class(-1), mpq_class(1), 2); }

TorusSystem make_torus() { return TorusSystem(make_rotation(root2_minus_1())); }

}  // namespace

TEST_CASE("gluing identifies (x,1) with (x+1,0)") {
  TorusSystem ts = make_torus();
  SystemPoint x = SystemPoint::circle(QuadExt(mpq_class(1, 5)));
  SystemPoint a = ts.point(x, 1.0);
  SystemPoint b = ts.point(ts.base().act(x, 1), 0.0);
  CHECK(ts.dist(a, b) == 0.0);
  // and t normalizes into [0,1)
  CHECK(ts.fiber_coord(a) == 0.0);
  CHECK(ts.fiber_coord(ts.point(x, 2.75)) == doctest::Approx(0.75).epsilon(1e-12));
}

TEST_CASE("integer flow equals the base action") {
  TorusSystem ts = make_torus();
  SystemPoint y = ts.point(SystemPoint::circle(QuadExt(mpq_class(2, 7))), 0.4);
  for (long long z : {-3LL, 1LL, 5LL})
    CHECK(ts.dist(ts.act_real(y, static_cast<double>(z)), ts.sys().act(y, z)) <= 1e-12);
}

TEST_CASE("real flow is additive and isometric") {
  TorusSystem ts = make_torus();
  SystemPoint y = ts.point(SystemPoint::circle(QuadExt(mpq_class(3, 11))), 0.2);
  SystemPoint w = ts.point(SystemPoint::circle(QuadExt(mpq_class(1, 2))), 0.8);

  SystemPoint two_step = ts.act_real(ts.act_real(y, 0.7), 1.9);
  SystemPoint direct = ts.act_real(y, 2.6);
  CHECK(ts.dist(two_step, direct) <= 1e-9);

  double d0 = ts.dist(y, w);
  for (double r : {0.3, 1.7, -2.2})
    CHECK(ts.dist(ts.act_real(y, r), ts.act_real(w, r)) ==
          doctest::Approx(d0).epsilon(1e-9));
}

TEST_CASE("band and grid covers meet their order bounds") {
  TorusSystem ts = make_torus();
  SampleSet samples = make_samples(ts.sys(), 1500, 3);

  FiniteCover band = lift_cover(ts, slab_band_cover(ts, 3), samples);
  OrderProfile bp = order_profile(band, samples);
  CHECK(bp.ord <= 2 * 2);
  CHECK(bp.min_count >= 1);
  CHECK(max_order_off_base(band, ts, samples) <= 2);

  FiniteCover grid = lift_cover(ts, slab_grid_cover(ts, 5, 3), samples);
  OrderProfile gp = order_profile(grid, samples);
  CHECK(gp.ord <= 2 * 4);
  CHECK(gp.min_count >= 1);
  CHECK(max_order_off_base(grid, ts, samples) <= 4);
}

TEST_CASE("locate shortcut agrees with membership scans") {
  TorusSystem ts = make_torus();
  SampleSet samples = make_samples(ts.sys(), 600, 5);
  FiniteCover grid = lift_cover(ts, slab_grid_cover(ts, 4, 3), samples);
  REQUIRE(grid.locate);

  for (std::size_t i = 0; i < samples.size(); i += 5) {
    std::vector<int> fast = grid.locate(samples[i]);
    std::vector<int> slow;
    for (std::size_t j = 0; j < grid.regions.size(); ++j)
      if (grid.regions[j].member(samples[i])) slow.push_back(static_cast<int>(j));
    std::sort(fast.begin(), fast.end());
    CHECK(fast == slow);
  }

  // and on a translated cover
  FiniteCover moved = translate_cover(ts, grid, 0.37, samples);
  REQUIRE(moved.locate);
  for (std::size_t i = 0; i < samples.size(); i += 11) {
    std::vector<int> fast = moved.locate(samples[i]);
    std::vector<int> slow;
    for (std::size_t j = 0; j < moved.regions.size(); ++j)
      if (moved.regions[j].member(samples[i])) slow.push_back(static_cast<int>(j));
    std::sort(fast.begin(), fast.end());
    CHECK(fast == slow);
  }
}

TEST_CASE("translated cover membership is the pulled-back membership") {
  TorusSystem ts = make_torus();
  SampleSet samples = make_samples(ts.sys(), 400, 5);
  FiniteCover band = lift_cover(ts, slab_band_cover(ts, 3), samples);
  double r = 0.41;
  FiniteCover moved = translate_cover(ts, band, r, samples);
  REQUIRE(moved.regions.size() == band.regions.size());

  for (std::size_t i = 0; i < samples.size(); i += 13) {
    SystemPoint back = ts.act_real(samples[i], -r);
    for (std::size_t j = 0; j < moved.regions.size(); ++j)
      CHECK(moved.regions[j].member(samples[i]) == band.regions[j].member(back));
  }
  // hits were recomputed against the translated membership
  for (const auto& reg : moved.regions)
    for (int h : reg.hits) CHECK(reg.member(samples[h]));
}

TEST_CASE("shift chain meets its mesh window") {
  TorusSystem ts = make_torus();
  SampleSet samples = make_samples(ts.sys(), 1200, 9);
  FiniteCover fine = lift_cover(ts, slab_grid_cover(ts, 8, 6), samples);

  int n = 2;
  double d = 0.5;
  double eps = 0.55;
  ShiftChainResult chain = build_shift_chain(ts, fine, n, d, eps, samples);
  CHECK(chain.step == 4);
  CHECK(chain.window == 8);
  CHECK(chain.premesh.ok);
  CHECK(chain.mesh_ok);
  REQUIRE(chain.mesh.size() == 8);
  CHECK(chain.worst_mesh < eps);
  CHECK(chain.ord >= 1);
  CHECK(chain.ratio == doctest::Approx(chain.ord / 8.0).epsilon(1e-12));

  // joining can only refine: mesh at z=0 no larger than the input cover's
  std::vector<double> base_mesh = mesh_under_translates(fine, ts.sys(), 1, samples);
  CHECK(chain.mesh[0] <= base_mesh[0] + 1e-12);
}

TEST_CASE("chain of one cover is the cover") {
  TorusSystem ts = make_torus();
  SampleSet samples = make_samples(ts.sys(), 800, 2);
  FiniteCover fine = lift_cover(ts, slab_grid_cover(ts, 8, 6), samples);
  ShiftChainResult chain = build_shift_chain(ts, fine, 1, 0.5, 0.6, samples);
  CHECK(chain.window == 2);
  CHECK(chain.join.regions.size() == fine.regions.size());
  OrderProfile pj = order_profile(chain.join, samples);
  OrderProfile pf = order_profile(fine, samples);
  CHECK(pj.ord == pf.ord);
}

TEST_CASE("brick cover covers and stays within order five") {
  TorusSystem ts = make_torus();
  SampleSet samples = make_samples(ts.sys(), 2500, 11);
  SystemPoint w_base = SystemPoint::circle(QuadExt(mpq_class(3, 10)));
  BrickCoverParams params;
  params.eps = 0.2;
  params.beta = 4;
  params.a = 0.05;
  BrickCover bc = build_brick_cover(ts, w_base, params, samples);

  CHECK(bc.rho > 0);
  CHECK(bc.strand_gap > 4 * bc.rho - 1e-15);
  CHECK(bc.tube_bricks > 0);
  CHECK(bc.grid_bricks > 0);

  OrderProfile prof = order_profile(bc.cover, samples);  // throws if uncovered
  CHECK(prof.ord <= 5);
  CHECK(prof.min_count >= 1);

  // locate agrees with membership on a sample slice
  REQUIRE(bc.cover.locate);
  for (std::size_t i = 0; i < samples.size(); i += 37) {
    std::vector<int> fast = bc.cover.locate(samples[i]);
    std::vector<int> slow;
    for (std::size_t j = 0; j < bc.cover.regions.size(); ++j)
      if (bc.cover.regions[j].member(samples[i])) slow.push_back(static_cast<int>(j));
    std::sort(fast.begin(), fast.end());
    CHECK(fast == slow);
  }

  // W is a genuine metric ball around its center
  for (int h : bc.w.hits) CHECK(ts.dist(samples[h], bc.w_center) <= bc.rho + 1e-15);
}

TEST_CASE("ball crossings match a dense grid scan") {
  TorusSystem ts = make_torus();
  SampleSet samples = make_samples(ts.sys(), 50, 4);
  SystemPoint center = ts.point(SystemPoint::circle(QuadExt(mpq_class(3, 10))), 0.0);
  double radius = 0.02;
  double beta = 3.0;

  for (std::size_t i = 0; i < 8; ++i) {
    const SystemPoint& x = samples[i];
    auto intervals = ball_crossings(ts, x, center, radius, beta);
    for (const auto& [lo, hi] : intervals) {
      CHECK(lo <= hi);
      CHECK(hi >= -beta - 1e-9);
      CHECK(lo <= beta + 1e-9);
      double mid = (lo + hi) / 2;
      CHECK(ts.dist(ts.act_real(x, -mid), center) <= radius + 1e-9);
    }
    // grid scan: every crossing the grid sees lies inside a reported interval
    for (int g = 0; g <= 1200; ++g) {
      double r = -beta + 2 * beta * g / 1200.0;
      if (ts.dist(ts.act_real(x, -r), center) <= radius - 1e-9) {
        bool inside = false;
        for (const auto& [lo, hi] : intervals)
          if (r >= lo - 1e-9 && r <= hi + 1e-9) inside = true;
        CHECK(inside);
      }
    }
  }
}

TEST_CASE("brick refinement audit separates the marked ball") {
  TorusSystem ts = make_torus();
  SampleSet samples = make_samples(ts.sys(), 2500, 11);
  SystemPoint w_base = SystemPoint::circle(QuadExt(mpq_class(3, 10)));
  BrickCoverParams params;
  params.eps = 0.2;
  params.beta = 4;
  params.a = 0.05;
  BrickCover bc = build_brick_cover(ts, w_base, params, samples);
  RefinedReport rep = check_refined_brick(bc, ts, 0.25, 4, samples);
  CHECK(rep.translate_separation_ok);
  CHECK(rep.near_sweep_small_ok);
  CHECK(rep.ok);
}
