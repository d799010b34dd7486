#pragma once

// Exact numbers of the form a + b*sqrt(root) with rational a, b and a
// square-free integer root.  Closed under addition of rationals and of
// integer multiples of another value over the same root, which is all the
// circle actions need.

#include <gmpxx.h>

#include <cstdint>
#include <string>

namespace mdim {

bool is_square_free(long n);

class QuadExt {
 public:
  QuadExt() : a_(0), b_(0), root_(0) {}
  explicit QuadExt(const mpq_class& a) : a_(a), b_(0), root_(0) {}
  QuadExt(const mpq_class& a, const mpq_class& b, long root);

  static QuadExt sqrt_of(long root, const mpq_class& scale = 1);

  const mpq_class& rational_part() const { return a_; }
  const mpq_class& radical_part() const { return b_; }
  long root() const { return root_; }
  bool is_rational() const { return b_ == 0; }

  // Exact field-free ops, enough for orbit arithmetic.
  QuadExt plus_rational(const mpq_class& r) const;
  QuadExt plus_integer_multiple(const QuadExt& other, long long z) const;
  QuadExt minus(const QuadExt& other) const;
  QuadExt scaled(const mpq_class& r) const;

  double value() const;
  long double value_ld() const;

  // Exact floor; the value must not sit within ~1e-15 of an integer unless
  // it is exactly rational with integral value.
  long long floor_int() const;
  // Representative in [0,1) of the same value mod 1.
  QuadExt reduced_mod_1() const;

  std::string str() const;

 private:
  mpq_class a_, b_;
  long root_;  // 0 when b_ == 0
};

}  // namespace mdim
