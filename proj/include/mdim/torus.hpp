#pragma once

// Mapping torus of a Z-system: points (x, t) with t in [0, 1) and
// (x, 1) glued to (x + 1, 0).  The unit-speed flow acts by real time r;
// integer times restrict to the base action keeping t fixed.  The slab
// variant keeps t in [0, 1] unglued with the max metric, used to build
// covers upstairs before pushing them to the torus.

#include "mdim/covers.hpp"
#include "mdim/systems.hpp"

#include <utility>
#include <vector>

namespace mdim {

class TorusSystem {
 public:
  explicit TorusSystem(DynSystem base);

  const DynSystem& base() const { return base_; }
  const DynSystem& sys() const { return torus_; }
  const DynSystem& slab() const { return slab_; }

  // (x, t) with any real t, normalized so that t lands in [0, 1)
  SystemPoint point(const SystemPoint& base_pt, double t) const;
  SystemPoint act_real(const SystemPoint& y, double r) const;
  double dist(const SystemPoint& a, const SystemPoint& b) const {
    return torus_.dist(a, b);
  }
  double fiber_coord(const SystemPoint& y) const;
  SystemPoint embed_base(const SystemPoint& x) const { return point(x, 0); }
  SystemPoint slab_point(const SystemPoint& base_pt, double t) const;

 private:
  DynSystem base_;
  DynSystem torus_;
  DynSystem slab_;
};

// bands 0..layers-1 over the full base, u-overlap 1/(layers+1); ord 2
FiniteCover slab_band_cover(const TorusSystem& ts, int layers);
// arcs x bands; ord <= 4
FiniteCover slab_grid_cover(const TorusSystem& ts, int arcs, int layers);

// Pushes a slab cover to the torus.  Membership doubles only on the glued
// fiber t = 0, where a point also represents (x - 1, 1).
FiniteCover lift_cover(const TorusSystem& ts, const FiniteCover& slab_cover,
                       const SampleSet& torus_samples);

int max_order_off_base(const FiniteCover& c, const TorusSystem& ts,
                       const SampleSet& samples);

FiniteCover translate_cover(const TorusSystem& ts, const FiniteCover& c, double r,
                            const SampleSet& samples);

struct ShiftChainResult {
  FiniteCover join;
  long long step = 0;    // per-cover shift
  long long window = 0;  // n * step, the audited integer window
  FineReport premesh;
  int ord = 0;               // measured order of the join
  double ratio = 0;          // ord / window, the density the chain witnesses
  std::vector<double> mesh;  // mesh(join + z) for z = 0 .. window-1
  double worst_mesh = 0;
  bool mesh_ok = false;  // every window mesh below eps
};

// D_i = c + i/n for i = 0..n-1, joined with shifts i*floor(n/d).
ShiftChainResult build_shift_chain(const TorusSystem& ts, const FiniteCover& c, int n,
                                   double d, double eps, const SampleSet& samples);

// Cover adapted to the flow tube around a marked point: small bricks along
// the tube (ord 2 in the flow direction), a staggered grid away from it
// (ord 3), total ord <= 5.  Ships the marked ball W sized so that no brick
// translate can meet two W copies a unit of flow time apart.
struct BrickCoverParams {
  double eps = 0.05;          // mesh target
  double beta = 10;           // refinement audit window
  double tube_halfwidth = 0;  // 0: use 3*beta
  double a = 0.03;            // u-extent of tube bricks
  double r_tube = 0;          // 0: derive from the strand gap
};

struct BrickCover {
  FiniteCover cover;
  Region w;
  SystemPoint w_center;
  double rho = 0;  // W radius
  double r_tube = 0;
  double strand_gap = 0;
  long long strand_span = 0;
  int tube_bricks = 0;
  int grid_bricks = 0;
};

BrickCover build_brick_cover(const TorusSystem& ts, const SystemPoint& w_base,
                             const BrickCoverParams& params, const SampleSet& samples);

// r-intervals in [-beta, beta] where act_real(x, -r) lies in the closed
// ball of the given radius around center; exact strand-by-strand analysis,
// valid over a rotation base.
std::vector<std::pair<double, double>> ball_crossings(const TorusSystem& ts,
                                                      const SystemPoint& x,
                                                      const SystemPoint& center,
                                                      double radius, double beta);

// Refinement audit at W specialized to brick covers: crossing intervals are
// computed analytically instead of on an r-grid, so arbitrarily thin W
// balls are still seen.
RefinedReport check_refined_brick(const BrickCover& bc, const TorusSystem& ts,
                                  double alpha, double beta,
                                  const SampleSet& samples);

}  // namespace mdim
