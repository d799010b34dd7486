#include "mdim/quadratic.hpp"
#include "mdim/systems.hpp"

#include "doctest.h"

#include <cmath>
#include <set>
#include <vector>

using namespace mdim;

namespace {

QuadExt root2_minus_1() { return QuadExt(mpq_class(-1), mpq_class(1), 2); }

bool exactly_equal(const QuadExt& a, const QuadExt& b) {
  QuadExt d = a.minus(b);
  return d.rational_part() == 0 && d.radical_part() == 0;
}

// digit-reversal oracle for the radical inverse
mpq_class radical_inverse_oracle(unsigned long long i, unsigned base) {
  mpq_class acc = 0;
  mpq_class scale(1, base);
  while (i > 0) {
    acc += mpq_class(static_cast<unsigned long>(i % base)) * scale;
    scale /= base;
    i /= base;
  }
  return acc;
}

bool is_prime_oracle(unsigned n) {
  if (n < 2) return false;
  for (unsigned d = 2; d * d <= n; ++d)
    if (n % d == 0) return false;
  return true;
}

}  // namespace

TEST_CASE("quadratic exact arithmetic") {
  QuadExt a = root2_minus_1();
  CHECK(a.value() == doctest::Approx(std::sqrt(2.0) - 1.0).epsilon(1e-15));
  CHECK_FALSE(a.is_rational());

  QuadExt sum = a.plus_rational(mpq_class(3, 2));
  CHECK(sum.value() == doctest::Approx(std::sqrt(2.0) + 0.5).epsilon(1e-15));

  // integer multiples compose additively
  QuadExt x(mpq_class(1, 3));
  QuadExt step1 = x.plus_integer_multiple(a, 5);
  QuadExt step2 = step1.plus_integer_multiple(a, 7);
  QuadExt direct = x.plus_integer_multiple(a, 12);
  CHECK(exactly_equal(step2, direct));

  CHECK(QuadExt::sqrt_of(2).floor_int() == 1);
  CHECK(QuadExt::sqrt_of(2, mpq_class(-1)).floor_int() == -2);
  CHECK(QuadExt(mpq_class(7, 2)).floor_int() == 3);
  CHECK(QuadExt(mpq_class(-7, 2)).floor_int() == -4);
  CHECK(QuadExt(mpq_class(4)).floor_int() == 4);

  QuadExt r = QuadExt::sqrt_of(2, mpq_class(3)).reduced_mod_1();
  CHECK(r.value() >= 0.0);
  CHECK(r.value() < 1.0);
  CHECK(r.value() == doctest::Approx(3 * std::sqrt(2.0) - 4.0).epsilon(1e-14));
}

TEST_CASE("square-free classification") {
  CHECK(is_square_free(2));
  CHECK(is_square_free(3));
  CHECK(is_square_free(10));
  CHECK(is_square_free(30));
  CHECK_FALSE(is_square_free(4));
  CHECK_FALSE(is_square_free(12));
  CHECK_FALSE(is_square_free(18));
  CHECK_FALSE(is_square_free(50));
}

TEST_CASE("mixed radicals are rejected") {
  QuadExt a = QuadExt::sqrt_of(2);
  QuadExt b = QuadExt::sqrt_of(3);
  CHECK_THROWS(a.plus_integer_multiple(b, 1));
}

TEST_CASE("radical inverse matches digit reversal") {
  for (unsigned base : {2u, 3u, 5u})
    for (unsigned long long i = 1; i <= 50; ++i)
      CHECK(radical_inverse(i, base) == radical_inverse_oracle(i, base));
  CHECK(radical_inverse(1, 2) == mpq_class(1, 2));
  CHECK(radical_inverse(3, 2) == mpq_class(3, 4));
  CHECK(radical_inverse(5, 3) == mpq_class(7, 9));
}

TEST_CASE("prime table") {
  unsigned prev = 0;
  for (unsigned k = 0; k < 20; ++k) {
    unsigned p = nth_prime(k);
    CHECK(is_prime_oracle(p));
    CHECK(p > prev);
    // no prime skipped
    for (unsigned c = prev + 1; c < p; ++c) CHECK_FALSE(is_prime_oracle(c));
    prev = p;
  }
  CHECK(nth_prime(0) == 2);
  CHECK(nth_prime(4) == 11);
}

TEST_CASE("circle metric") {
  CHECK(circle_dist(0.1, 0.9) == doctest::Approx(0.2).epsilon(1e-15));
  CHECK(circle_dist(0.0, 0.5) == doctest::Approx(0.5).epsilon(1e-15));
  CHECK(circle_dist(0.25, 0.25) == 0.0);
  CHECK(frac_unit(-0.25) == doctest::Approx(0.75).epsilon(1e-15));
  CHECK(frac_unit(3.5) == doctest::Approx(0.5).epsilon(1e-15));
  CHECK(frac_unit(2.0) == 0.0);
  // triangle inequality on a few triples
  double xs[] = {0.05, 0.3, 0.62, 0.99};
  for (double x : xs)
    for (double y : xs)
      for (double z : xs)
        CHECK(circle_dist(x, z) <= circle_dist(x, y) + circle_dist(y, z) + 1e-15);
}

TEST_CASE("rotation acts exactly and isometrically") {
  DynSystem sys = make_rotation(root2_minus_1());
  SystemPoint x = SystemPoint::circle(QuadExt(mpq_class(1, 7)));
  SystemPoint y = SystemPoint::circle(QuadExt(mpq_class(2, 5)));

  // group law, exact
  SystemPoint a = sys.act(sys.act(x, 3), 4);
  SystemPoint b = sys.act(x, 7);
  CHECK(exactly_equal(a.as_circle().angle, b.as_circle().angle));
  CHECK(sys.dist(a, b) == 0.0);

  // isometry
  for (long long z : {-5LL, 1LL, 9LL})
    CHECK(sys.dist(sys.act(x, z), sys.act(y, z)) ==
          doctest::Approx(sys.dist(x, y)).epsilon(1e-14));

  // orbit matches the real line picture
  double alpha = std::sqrt(2.0) - 1.0;
  SystemPoint moved = sys.act(x, 10);
  CHECK(moved.as_circle().val ==
        doctest::Approx(frac_unit(1.0 / 7.0 + 10 * alpha)).epsilon(1e-12));
}

TEST_CASE("sturmian coding matches the floor oracle") {
  QuadExt alpha = root2_minus_1();
  DynSystem sys = make_sturmian(alpha);
  double a = alpha.value();
  SystemPoint x0 = SystemPoint::sturm(QuadExt(mpq_class(0)), 0);

  int expected[] = {0, 0, 1, 0, 1};
  for (int z = 0; z < 5; ++z)
    CHECK(sturm_symbol(x0.as_sturm(), alpha, z) == expected[z]);

  // oracle on shifted points: s_z(x) = floor(x+(z+1)a) - floor(x+za)
  long double al = static_cast<long double>(a);
  for (int start : {3, 11, 25}) {
    SystemPoint p = sys.act(x0, start);
    const SturmPoint& sp = p.as_sturm();
    long double xv = static_cast<long double>(sp.base_val) +
                     static_cast<long double>(sp.offset) * al;
    for (int z = -3; z <= 8; ++z) {
      int oracle = static_cast<int>(std::floor(xv + (z + 1) * al) -
                                    std::floor(xv + z * al));
      CHECK(sturm_symbol(sp, alpha, z) == oracle);
    }
  }
}

TEST_CASE("product system acts componentwise") {
  DynSystem rot = make_rotation(root2_minus_1());
  DynSystem stu = make_sturmian(root2_minus_1());
  DynSystem prod = make_product(rot, stu);
  SystemPoint p = SystemPoint::product(SystemPoint::circle(QuadExt(mpq_class(1, 3))),
                                       SystemPoint::sturm(QuadExt(mpq_class(0)), 0));
  SystemPoint q = prod.act(p, 6);
  CHECK(rot.dist(*q.as_product().first, rot.act(*p.as_product().first, 6)) == 0.0);
  CHECK(q.as_product().second->as_sturm().offset == 6);
  // max metric
  double d = prod.dist(p, q);
  double d1 = rot.dist(*p.as_product().first, *q.as_product().first);
  double d2 = stu.dist(*p.as_product().second, *q.as_product().second);
  CHECK(d == doctest::Approx(std::max(d1, d2)).epsilon(1e-14));
}

TEST_CASE("samples are deterministic and distinct") {
  DynSystem sys = make_rotation(root2_minus_1());
  SampleSet s1 = make_samples(sys, 200, 11);
  SampleSet s2 = make_samples(sys, 200, 11);
  SampleSet s3 = make_samples(sys, 200, 12);
  REQUIRE(s1.size() == 200);
  REQUIRE(s2.size() == 200);
  for (std::size_t i = 0; i < s1.size(); ++i) CHECK(sys.dist(s1[i], s2[i]) == 0.0);
  bool any_moved = false;
  for (std::size_t i = 0; i < s1.size(); ++i)
    if (sys.dist(s1[i], s3[i]) > 0) any_moved = true;
  CHECK(any_moved);
  // distinctness within one set
  std::set<double> vals;
  for (std::size_t i = 0; i < s1.size(); ++i) vals.insert(s1[i].as_circle().val);
  CHECK(vals.size() == s1.size());
}

TEST_CASE("sample index agrees with linear scan") {
  DynSystem sys = make_rotation(root2_minus_1());
  SampleSet samples = make_samples(sys, 300, 5);
  SampleIndex index(sys, samples);
  SampleSet probes = make_samples(sys, 25, 77);
  std::vector<int> exclude = {3, 17, 120, 121, 299};
  for (std::size_t i = 0; i < probes.size(); ++i) {
    auto [idx, dist] = index.nearest_excluding(probes[i], exclude);
    int best = -1;
    double bd = 1e18;
    for (std::size_t j = 0; j < samples.size(); ++j) {
      bool skip = false;
      for (int e : exclude)
        if (e == static_cast<int>(j)) skip = true;
      if (skip) continue;
      double d = sys.dist(probes[i], samples[j]);
      if (d < bd) {
        bd = d;
        best = static_cast<int>(j);
      }
    }
    REQUIRE(idx >= 0);
    CHECK(dist == doctest::Approx(bd).epsilon(1e-12));
    CHECK(sys.dist(samples[idx], samples[best]) <= 1e-12);
  }
}
