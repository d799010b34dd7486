#pragma once

// Finite covers at sample resolution: regions are pure membership
// predicates plus cached hit lists against a fixed sample set.  All cover
// audits (order, mesh under translates, join windows, smallness and
// refinement at a marked region) live here.

#include "mdim/systems.hpp"

#include <functional>
#include <optional>
#include <string>
#include <vector>

namespace mdim {

class TorusSystem;

enum class CoverKind { Open, Closed };

struct Region {
  int id = 0;
  int family = 0;
  std::string label;
  std::function<bool(const SystemPoint&)> member;
  std::vector<int> hits;  // sorted sample indices, filled by compute_hits
};

struct FiniteCover {
  std::vector<Region> regions;
  std::string sample_ref;
  CoverKind kind = CoverKind::Closed;
  double enlargement = 0;
  // optional fast path returning indices of all regions containing p
  std::function<std::vector<int>(const SystemPoint&)> locate;

  std::vector<int> regions_at(const SystemPoint& p) const;
};

Region make_circle_arc(int id, int family, double center, double width);

// Fills hit lists; does not require the cover to actually cover the samples.
void compute_hits(FiniteCover& c, const SampleSet& samples);

struct OrderProfile {
  std::vector<int> counts;
  int ord = 0;
  int min_count = 0;
};

// Throws if some sample is uncovered (identifies the sample).
OrderProfile order_profile(const FiniteCover& c, const SampleSet& samples);

double hit_diameter(const Region& r, const DynSystem& sys, const SampleSet& samples,
                    long long z);

// mesh(c + z) for z = 0 .. zmax-1
std::vector<double> mesh_under_translates(const FiniteCover& c, const DynSystem& sys,
                                          long long zmax, const SampleSet& samples);

// B = c0 v (c1 - m) v (c2 - 2m) v ...; empty intersections dropped.
FiniteCover join_with_shifts(const std::vector<FiniteCover>& covers,
                             const DynSystem& sys, long long m,
                             const SampleSet& samples);

struct MdimWitnessReport {
  bool ok = false;
  int ord = 0;
  long long window = 0;  // number of translates checked
  std::vector<double> mesh;
  double worst = 0;
};

// Verifies mesh(c + z) < eps for all integers z with 0 <= z*d < ord(c).
MdimWitnessReport check_mdim_witness(const FiniteCover& c, const DynSystem& sys,
                                     double d, double eps, const SampleSet& samples);

struct SmallReport {
  bool ok = false;
  double max_diam = 0;
  double worst_r = 0;
};

// diam(region + r) < alpha for all r in [-beta, beta]
SmallReport check_small(const Region& region, const TorusSystem& torus, double alpha,
                        double beta, const SampleSet& samples, int rgrid = 0);

struct FineReport {
  bool ok = false;
  double max_mesh = 0;
  double worst_r = 0;
};

// mesh(c + r) < alpha for all r in [0, beta]
FineReport check_fine(const FiniteCover& c, const TorusSystem& torus, double alpha,
                      double beta, const SampleSet& samples, int rgrid = 0);

struct RefinedReport {
  bool ok = false;
  bool translate_separation_ok = false;  // no translate meets two far W copies
  bool near_sweep_small_ok = false;      // regions sweeping past W stay < alpha
  double max_window_spread = 0;
  double max_near_diam = 0;
  int flagged_regions = 0;
};

RefinedReport check_refined_at(const FiniteCover& c, const Region& w,
                               const TorusSystem& torus, double alpha, double beta,
                               const SampleSet& samples, int rgrid = 0,
                               double clos_tol = 1e-9);

// CSV rows: region id, family, hit count, diameters under z = 0..zmax-1
std::string cover_csv(const FiniteCover& c, const DynSystem& sys,
                      const SampleSet& samples, long long zmax);

}  // namespace mdim
