#include "mdim/level_functions.hpp"
#include "mdim/systems.hpp"

#include "doctest.h"

#include <cmath>
#include <vector>

using namespace mdim;

namespace {

QuadExt root2_minus_1() { return QuadExt(mpq_class(-1), mpq_class(1), 2); }

// independent series evaluation: xi(x) = sum_s s * phi(x)...phi(x-s+1) * (1-phi(x-s)),
// accumulated forward until the surviving product mass is negligible
double xi_oracle(const DynSystem& sys, const std::function<double(const SystemPoint&)>& phi,
                 const SystemPoint& x, double tol = 1e-14, long long cap = 500000) {
  double survive = 1.0;
  double total = 0;
  SystemPoint cur = x;
  for (long long s = 1; s <= cap && survive > tol; ++s) {
    double phi_here = phi(cur);           // phi(x - (s-1))
    SystemPoint prev = sys.act(cur, -1);  // x - s
    double phi_prev = phi(prev);
    survive *= phi_here;
    total += static_cast<double>(s) * survive * (1.0 - phi_prev);
    cur = prev;
  }
  return total;
}

}  // namespace

TEST_CASE("ball cutoff profile") {
  DynSystem sys = make_rotation(root2_minus_1());
  SystemPoint center = SystemPoint::circle(QuadExt(mpq_class(0)));
  double rho = 0.09;
  auto phi = make_ball_cutoff(sys, {center}, rho);

  CHECK(phi(center) == 0.0);
  CHECK(phi(SystemPoint::circle(QuadExt(mpq_class(1, 2)))) == 1.0);
  // inside the inner third: zero
  CHECK(phi(SystemPoint::circle(QuadExt(mpq_class(2, 100)))) == 0.0);
  // at distance 2rho/3: halfway up the ramp
  SystemPoint mid = SystemPoint::circle(QuadExt(mpq_class(6, 100)));
  CHECK(phi(mid) == doctest::Approx(0.5).epsilon(1e-9));
  // monotone along the ramp
  CHECK(phi(SystemPoint::circle(QuadExt(mpq_class(5, 100)))) <
        phi(SystemPoint::circle(QuadExt(mpq_class(8, 100)))));
}

TEST_CASE("series evaluator matches the independent oracle") {
  DynSystem sys = make_rotation(root2_minus_1());
  SystemPoint center = SystemPoint::circle(QuadExt(mpq_class(0)));
  auto phi = make_ball_cutoff(sys, {center}, 0.05);
  LevelFunction xi(sys, phi, 1e-12, 200000);

  SampleSet samples = make_samples(sys, 20, 21);
  for (std::size_t i = 0; i < samples.size(); ++i) {
    LevelValue v = xi.eval(samples[i]);
    double want = xi_oracle(sys, phi, samples[i]);
    CHECK(v.value == doctest::Approx(want).epsilon(1e-8));
    CHECK(v.value >= 0.0);
    CHECK(v.truncation_bound <= 1e-6);
  }
}

TEST_CASE("recursion identity xi(x+1) = phi(x+1)(xi(x)+1)") {
  DynSystem sys = make_rotation(root2_minus_1());
  SystemPoint center = SystemPoint::circle(QuadExt(mpq_class(0)));
  auto phi = make_ball_cutoff(sys, {center}, 0.05);
  LevelFunction xi(sys, phi, 1e-12, 200000);

  SampleSet samples = make_samples(sys, 30, 22);
  for (std::size_t i = 0; i < samples.size(); ++i) {
    SystemPoint next = sys.act(samples[i], 1);
    double lhs = xi(next);
    double rhs = xi.phi(next) * (xi(samples[i]) + 1.0);
    CHECK(lhs == doctest::Approx(rhs).epsilon(1e-7));
  }
}

TEST_CASE("translation identity off the marked orbit") {
  DynSystem sys = make_rotation(root2_minus_1());
  SystemPoint center = SystemPoint::circle(QuadExt(mpq_class(0)));
  double rho = 0.05;
  auto phi = make_ball_cutoff(sys, {center}, rho);
  LevelFunction xi(sys, phi, 1e-12, 200000);

  int zmax = 10;
  SampleSet samples = make_samples(sys, 120, 23);
  int checked = 0;
  for (std::size_t i = 0; i < samples.size() && checked < 25; ++i) {
    // the whole forward segment must stay clear of the cutoff support
    bool clear = true;
    for (int z = 0; z <= zmax; ++z)
      if (phi(sys.act(samples[i], z)) < 1.0) clear = false;
    if (!clear) continue;
    double base = xi(samples[i]);
    for (int z = 1; z <= zmax; ++z) {
      double shifted = xi(sys.act(samples[i], z));
      CHECK(shifted == doctest::Approx(base + z).epsilon(1e-7));
    }
    ++checked;
  }
  CHECK(checked > 0);
}

TEST_CASE("level report aggregates the residuals") {
  DynSystem sys = make_rotation(root2_minus_1());
  SystemPoint center = SystemPoint::circle(QuadExt(mpq_class(0)));
  auto phi = make_ball_cutoff(sys, {center}, 0.05);
  LevelFunction xi(sys, phi, 1e-12, 200000);

  SampleSet samples = make_samples(sys, 60, 24);
  LevelReport rep = level_report(xi, samples, 6);
  CHECK(rep.evaluated == 60);
  CHECK(rep.max_recursion_residual <= 1e-6);
  CHECK(rep.max_translation_residual <= 1e-6);
  CHECK(rep.translation_checked > 0);
  CHECK(rep.max_truncation_bound <= 1e-6);
}

TEST_CASE("multiple centers extend the vanishing set") {
  DynSystem sys = make_rotation(root2_minus_1());
  SystemPoint c1 = SystemPoint::circle(QuadExt(mpq_class(0)));
  SystemPoint c2 = SystemPoint::circle(QuadExt(mpq_class(1, 2)));
  auto phi = make_ball_cutoff(sys, {c1, c2}, 0.06);
  CHECK(phi(c1) == 0.0);
  CHECK(phi(c2) == 0.0);
  CHECK(phi(SystemPoint::circle(QuadExt(mpq_class(1, 4)))) == 1.0);
}
