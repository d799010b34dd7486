#pragma once

// Staggered cube families on R^n: m+1 families of disjoint closed cubes,
// exact rational interval arithmetic, every point covered by at least
// m+1-n of them.  On top of that, the pullback pipeline: canonical map to
// the nerve of a cover, a PL map to R^n, cube preimages split into
// components, giving a refinement that splits into disjoint families.

#include "mdim/covers.hpp"
#include "mdim/nerves.hpp"
#include "mdim/systems.hpp"

#include <gmpxx.h>

#include <memory>
#include <optional>
#include <string>
#include <vector>

namespace mdim {

// Family i (1-based, i = 1..m+1) on each axis uses the closed intervals
// (eps/(m+1)) * [z(m+1)+i, z(m+1)+i+m] over integer z; a cube of family i
// is a product of family-i intervals.  Neighboring intervals of one family
// are exactly one pitch eps/(m+1) apart, so the families are disjoint, and
// on each axis a point can be off at most one family.
struct CubeFamilySpec {
  int m = 0;
  int n = 0;
  mpq_class eps;

  int family_count() const { return m + 1; }
  mpq_class unit() const { return eps / (m + 1); }
  mpq_class cube_diam() const { return eps * m / (m + 1); }

  std::vector<int> families_containing(const std::vector<mpq_class>& x) const;
  std::vector<int> families_containing(const std::vector<double>& x) const;
  std::optional<std::vector<long long>> cube_of(int family,
                                                const std::vector<mpq_class>& x) const;
  std::optional<std::vector<long long>> cube_of(int family,
                                                const std::vector<double>& x) const;
};

struct CubeAuditReport {
  bool ok = false;
  bool disjoint_ok = false;
  bool mesh_ok = false;
  bool multiplicity_ok = false;
  int min_mult = 0;
  int probes_checked = 0;
  mpq_class cube_diam;
  mpq_class gap;
};

// Exact audit over rational probes: interval endpoints compared as
// rationals, no floating point anywhere.
CubeAuditReport audit_cube_families(const CubeFamilySpec& spec,
                                    const std::vector<std::vector<mpq_class>>& probes);

// Low-discrepancy rational probe grid spanning several pitch periods.
std::vector<std::vector<mpq_class>> cube_probe_grid(const CubeFamilySpec& spec,
                                                    int count, unsigned seed);

struct RnCube {
  int family = 0;
  std::vector<long long> z;
};

std::vector<RnCube> materialize_cubes(const CubeFamilySpec& spec,
                                      const std::vector<std::vector<mpq_class>>& probes);

std::string cube_family_csv(const CubeFamilySpec& spec, const std::vector<RnCube>& cubes);

struct KoParams {
  int families = 0;        // disjoint families wanted; cube spec gets m = families-1
  double cube_eps = 0.25;  // initial pitch scale in image space
  unsigned seed = 1;
  int max_halvings = 20;
  double link_radius = 0;    // 0: derived from sample spacing
  double min_piece_gap = 0;  // raises the linkage radius floor
};

struct KoResult {
  FiniteCover pieces;  // region.family in 1..families
  Nerve nerve;
  PLMap g;
  std::shared_ptr<const CanonicalMap> canon;
  CubeFamilySpec spec;
  double cube_eps_final = 0;
  int halvings = 0;
  double link_radius = 0;
  int min_coverage = 0;   // families containing a sample, min over samples
  bool coverage_ok = false;
  bool refine_ok = false;    // every piece's hits inside some input region's hits
  bool disjoint_ok = false;  // no sample in two pieces of one family
  OrderProfile profile;
};

// Builds the family refinement of u0.  Coverage target is families minus
// the ambient image dimension; failures of refinement or disjointness at
// the current pitch halve cube_eps and retry.
KoResult kolmogorov_ostrand_cover(const DynSystem& sys, const FiniteCover& u0,
                                  const KoParams& params, const SampleSet& samples);

}  // namespace mdim
