#include "mdim/quadratic.hpp"

#include <cmath>
#include <stdexcept>

namespace mdim {

bool is_square_free(long n) {
  if (n < 1) return false;
  for (long p = 2; p * p <= n; ++p) {
    if (n % (p * p) == 0) return false;
  }
  return true;
}

QuadExt::QuadExt(const mpq_class& a, const mpq_class& b, long root)
    : a_(a), b_(b), root_(root) {
  if (b_ == 0) {
    root_ = 0;
    return;
  }
  if (root_ < 2 || !is_square_free(root_))
    throw std::invalid_argument("QuadExt: root must be square-free and >= 2, got " +
                                std::to_string(root));
}

QuadExt QuadExt::sqrt_of(long root, const mpq_class& scale) {
  return QuadExt(0, scale, root);
}

QuadExt QuadExt::plus_rational(const mpq_class& r) const {
  QuadExt out = *this;
  out.a_ += r;
  return out;
}

QuadExt QuadExt::plus_integer_multiple(const QuadExt& other, long long z) const {
  if (b_ != 0 && other.b_ != 0 && root_ != other.root_)
    throw std::invalid_argument("QuadExt: mixed radicals " + std::to_string(root_) +
                                " and " + std::to_string(other.root_));
  QuadExt out = *this;
  mpq_class zq(static_cast<long>(z));
  out.a_ += zq * other.a_;
  out.b_ += zq * other.b_;
  out.root_ = (out.b_ == 0) ? 0 : (b_ != 0 ? root_ : other.root_);
  if (out.b_ == 0) out.root_ = 0;
  return out;
}

QuadExt QuadExt::minus(const QuadExt& other) const {
  return plus_integer_multiple(other, -1);
}

QuadExt QuadExt::scaled(const mpq_class& r) const {
  QuadExt out = *this;
  out.a_ *= r;
  out.b_ *= r;
  if (out.b_ == 0) out.root_ = 0;
  return out;
}

double QuadExt::value() const { return static_cast<double>(value_ld()); }

long double QuadExt::value_ld() const {
  long double v = mpq_get_d(a_.get_mpq_t());
  // refine the rational conversion: mpq_get_d rounds once, good to 1 ulp
  if (b_ != 0)
    v += static_cast<long double>(mpq_get_d(b_.get_mpq_t())) *
         sqrtl(static_cast<long double>(root_));
  return v;
}

long long QuadExt::floor_int() const {
  if (b_ == 0) {
    mpz_class fl;
    mpz_fdiv_q(fl.get_mpz_t(), a_.get_num_mpz_t(), a_.get_den_mpz_t());
    if (!fl.fits_slong_p()) throw std::overflow_error("QuadExt::floor_int: out of range");
    return fl.get_si();
  }
  long double v = value_ld();
  long double fl = floorl(v);
  if (v - fl < 1e-13L || (fl + 1.0L) - v < 1e-13L) {
    // too close to an integer for the numeric floor to be trusted
    throw std::domain_error("QuadExt::floor_int: value within 1e-13 of an integer");
  }
  return static_cast<long long>(fl);
}

QuadExt QuadExt::reduced_mod_1() const {
  long long fl = floor_int();
  return plus_rational(mpq_class(static_cast<long>(-fl)));
}

std::string QuadExt::str() const {
  std::string s = a_.get_str();
  if (b_ != 0) s += " + (" + b_.get_str() + ")*sqrt(" + std::to_string(root_) + ")";
  return s;
}

}  // namespace mdim
