#include "mdim/level_functions.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace mdim {

LevelFunction::LevelFunction(DynSystem sys,
                             std::function<double(const SystemPoint&)> phi,
                             double tail_tol, long long max_steps)
    : sys_(std::move(sys)), phi_(std::move(phi)), tail_tol_(tail_tol),
      max_steps_(max_steps) {
  if (!phi_) throw std::invalid_argument("LevelFunction: cutoff required");
  if (max_steps_ < 1) throw std::invalid_argument("LevelFunction: max_steps < 1");
}

LevelValue LevelFunction::eval(const SystemPoint& x) const {
  LevelValue out;
  double prod = std::clamp(phi_(x), 0.0, 1.0);
  if (prod <= 0) {
    out.survival = 0;
    return out;
  }
  SystemPoint cur = x;
  double value = 0;
  long long s = 1;
  for (; s <= max_steps_; ++s) {
    cur = sys_.act(cur, -1);
    double ph = std::clamp(phi_(cur), 0.0, 1.0);
    value += (double)s * prod * (1 - ph);
    prod *= ph;
    if (prod < tail_tol_) break;
  }
  out.value = value;
  out.steps = std::min(s, max_steps_);
  out.survival = prod;
  out.truncation_bound = prod * (double)(out.steps + max_steps_);
  return out;
}

std::function<double(const SystemPoint&)> make_ball_cutoff(
    const DynSystem& sys, std::vector<SystemPoint> centers, double rho) {
  if (rho <= 0) throw std::invalid_argument("make_ball_cutoff: rho must be positive");
  auto ctr = std::make_shared<const std::vector<SystemPoint>>(std::move(centers));
  return [sys, ctr, rho](const SystemPoint& p) {
    double d = rho;
    for (const auto& c : *ctr) {
      d = std::min(d, sys.dist(p, c));
      if (d <= rho / 3) return 0.0;
    }
    if (d >= rho) return 1.0;
    return (d - rho / 3) / (rho - rho / 3);
  };
}

LevelReport level_report(const LevelFunction& xi, const SampleSet& samples, int zmax) {
  if (zmax < 1) throw std::invalid_argument("level_report: zmax must be >= 1");
  LevelReport rep;
  const DynSystem& sys = xi.system();
  for (std::size_t j = 0; j < samples.size(); ++j) {
    SystemPoint cur = samples[j];
    LevelValue prev = xi.eval(cur);
    ++rep.evaluated;
    rep.max_truncation_bound = std::max(rep.max_truncation_bound, prev.truncation_bound);
    double base = prev.value;
    bool clear = true;  // whole forward path stayed off the cutoff support
    for (int z = 1; z <= zmax; ++z) {
      cur = sys.act(cur, 1);
      double ph = xi.phi(cur);
      LevelValue next = xi.eval(cur);
      ++rep.evaluated;
      rep.max_truncation_bound =
          std::max(rep.max_truncation_bound, next.truncation_bound);
      double rec = std::fabs(next.value - ph * (prev.value + 1));
      rep.max_recursion_residual = std::max(rep.max_recursion_residual, rec);
      if (ph < 1) clear = false;
      if (clear) {
        double tr = std::fabs(next.value - base - (double)z);
        rep.max_translation_residual = std::max(rep.max_translation_residual, tr);
        ++rep.translation_checked;
      }
      prev = next;
    }
  }
  return rep;
}

}  // namespace mdim
