#pragma once

// Level functions of an orbit: given a cutoff phi vanishing on a small set
// U and equal to 1 away from it, xi(x) = sum over s >= 1 of
// s * phi(x) * phi(x-1) * ... * phi(x-s+1) * (1 - phi(x-s)).
// Satisfies xi(x+1) = phi(x+1)(xi(x)+1) wherever the tail vanishes, hence
// xi(x+z) = xi(x)+z off the U orbit.

#include "mdim/systems.hpp"

#include <functional>
#include <memory>

namespace mdim {

struct LevelValue {
  double value = 0;
  long long steps = 0;
  double survival = 0;          // product mass left when the sum stopped
  double truncation_bound = 0;  // bound on the discarded tail
};

class LevelFunction {
 public:
  LevelFunction(DynSystem sys, std::function<double(const SystemPoint&)> phi,
                double tail_tol = 1e-10, long long max_steps = 100000);

  LevelValue eval(const SystemPoint& x) const;
  double operator()(const SystemPoint& x) const { return eval(x).value; }
  double phi(const SystemPoint& x) const { return phi_(x); }
  const DynSystem& system() const { return sys_; }
  long long max_steps() const { return max_steps_; }

 private:
  DynSystem sys_;
  std::function<double(const SystemPoint&)> phi_;
  double tail_tol_;
  long long max_steps_;
};

// Cutoff tied to metric balls: 0 within rho/3 of a center, 1 beyond rho,
// linear in the distance between.
std::function<double(const SystemPoint&)> make_ball_cutoff(
    const DynSystem& sys, std::vector<SystemPoint> centers, double rho);

struct LevelReport {
  double max_recursion_residual = 0;    // |xi(x+1) - phi(x+1)(xi(x)+1)|
  double max_translation_residual = 0;  // |xi(x+z) - xi(x) - z| off the U orbit
  int translation_checked = 0;
  double max_truncation_bound = 0;
  int evaluated = 0;
};

LevelReport level_report(const LevelFunction& xi, const SampleSet& samples, int zmax);

}  // namespace mdim
