#pragma once

// Fiber multiplicity machinery over the mapping torus of a circle rotation:
// brick cover refined at a marked ball, its family refinement, interval
// systems threaded through a level function, marked pairs, the collapsing
// map psi, and window-multiplicity measurement of observables.

#include "mdim/covers.hpp"
#include "mdim/interval_systems.hpp"
#include "mdim/kolmogorov.hpp"
#include "mdim/level_functions.hpp"
#include "mdim/systems.hpp"
#include "mdim/torus.hpp"

#include <functional>
#include <memory>
#include <vector>

namespace mdim {

// floor(k/(k-t)) * k/(k-t) for t < k
double gamma_bound(int k, double t);

struct FiberParams {
  int k = 2;
  int q = 5;
  int l = 40;
  int n = 4;
  double d = 1.0;

  int m() const { return q * k; }
  void validate() const;
};

using Observable = std::function<std::vector<double>(const SystemPoint&)>;

struct MarkedParams {
  FiberParams fiber;
  double eps = 0.05;
  double brick_a = 0.03;
  double mesh_e = 0.0025;  // interval piece mesh bound
  double cube_eps = 0.5;   // family refinement pitch start
  unsigned seed = 1;
};

struct MarkedCollections {
  FiberParams params;
  MarkedParams build;
  TorusSystem torus;
  BrickCover bricks;
  KoResult families;
  IntervalSystem intervals;
  std::shared_ptr<const LevelFunction> xi;
  SampleSet samples;                // torus samples everything was built on
  std::vector<int> base_samples;    // indices with t = 0
  double mesh_e = 0;                // realized interval mesh
  int pad_steps = 9;                // flow-pad membership grid points

  // memberships of a base point in the collections D_1..D_k, given xi(y)
  struct DElement {
    int j = 0;        // 1..k
    int family = 0;   // 1..m
    int sub = 0;      // interval subcollection, 0-based
    int index = 0;    // piece within the subcollection
    long long z = 0;  // xi(y) in piece + q*z
    int region = -1;  // family piece region index
  };
  std::vector<DElement> d_elements_at(const SystemPoint& y, double xi_value) const;
  // does act_real(y, -b) hit the piece region for some b in [lo, hi]
  bool flow_pad_member(int region, const SystemPoint& y, double lo, double hi) const;
};

MarkedCollections build_marked_collections(const TorusSystem& ts,
                                           const SystemPoint& w_base,
                                           const MarkedParams& params,
                                           const SampleSet& torus_samples);

struct MarkingSampleRow {
  int sample = -1;  // torus sample index
  double xi0 = 0;
  long long marks = 0;
  long long min_window = 0;
  int windows = 0;
};

struct MarkingReport {
  long long pair_count = 0;   // l*k
  long long star_pairs = 0;   // k*(q-2)
  long long window_bound = 0; // m - n - 2k
  double bound_windows = 0;   // (l/q - 3) * (m - n - 2k)
  double bound_density = 0;   // l*(k-d)*delta
  double delta = 0;           // (1 - 3q/l)(1 - 2k/((k-d)q))
  double delta_star = 0;      // 1 - 6k/(q(k-d))
  int audited = 0;
  long long min_marks = 0;
  long long max_marks = 0;
  long long min_window_count = 0;
  bool ok = false;
  std::vector<MarkingSampleRow> rows;
};

// Audit scan shared by the marking report and the collapsing map: base
// samples whose orbits stay clear of the marked ball, with the collection
// elements met at each window offset.
struct MarkScanRow {
  int sample = -1;
  double xi0 = 0;
  std::vector<std::vector<MarkedCollections::DElement>> elems;  // per offset
};

struct MarkScan {
  std::vector<MarkScanRow> rows;
};

MarkScan scan_marks(const MarkedCollections& mc, int max_audit);

MarkingReport marking_report(const MarkedCollections& mc, const MarkScan& scan);

// Marked pairs in one window, the counting core behind the per-window
// bound.  Thread j owns families j, j+k, ..., j+(q-1)k; position p of
// thread j lands in subcollection (p-1+offset_j) mod q, and the pair
// counts when its family is covered and that subcollection is met.  With
// at most n families uncovered and at most 2 subcollections unmet per
// thread, at least kq - n - 2k pairs always remain.
int window_pair_count(int k, int q, const std::vector<bool>& family_covered,
                      const std::vector<std::vector<bool>>& sub_met,
                      const std::vector<int>& offsets);

struct PsiParams {
  double delta = 0.5;
  double blend_eps = 0;  // 0: mesh_e / 2
  int max_audit = 400;
};

class PsiMap {
 public:
  std::vector<double> eval(const SystemPoint& x) const;
  double eta() const;
  int class_count(int j) const;  // j = 1..k

  struct State;
  explicit PsiMap(std::shared_ptr<const State> s) : state_(std::move(s)) {}

 private:
  std::shared_ptr<const State> state_;
};

struct PsiReport {
  bool constancy_ok = false;   // constant on every collapsed element
  bool approx_ok = false;      // |psi - f| <= delta at audited points
  bool separation_ok = false;  // distinct classes differ by >= eta
  bool link_unique_ok = false; // each element meets <= 1 marked-orbit arc
  bool window_sep_ok = false;  // far same-coordinate pairs get separated windows
  double max_dev = 0;
  double eta = 0;
  int classes_total = 0;
  int audited = 0;
  bool ok = false;
};

PsiMap build_psi(const MarkedCollections& mc, const MarkScan& scan,
                 const Observable& f, const PsiParams& params, PsiReport* report);

struct FiberMultReport {
  int max_mult = 0;
  int classes = 0;
  double tol = 0;
  double sep = 0;
  long long window = 0;
  int points = 0;
};

// Groups sample points whose observable windows agree within tol for
// |z| <= window, then measures the largest sep-separated subset found in
// one group.
FiberMultReport fiber_multiplicity(const DynSystem& sys, const Observable& f,
                                   const SampleSet& samples, long long window,
                                   double tol, double sep);

}  // namespace mdim
