#pragma once

// Nerve of a finite cover at sample resolution, barycentric coordinates of
// the canonical map into it, and piecewise linear maps out of it with
// pseudo-random vertex images in general position.

#include "mdim/covers.hpp"
#include "mdim/systems.hpp"

#include <memory>
#include <optional>
#include <set>
#include <utility>
#include <vector>

namespace mdim {

struct Nerve {
  int vertices = 0;
  // all faces observed among sample membership patterns, downward closed,
  // each sorted, the whole list sorted
  std::vector<std::vector<int>> faces;
  int dim = -1;

  bool has_face(const std::vector<int>& f) const;
};

Nerve build_nerve(const FiniteCover& c, const SampleSet& samples);

// Barycentric weights: for each region containing p, the distance from p to
// the nearest sample outside that region, normalized to sum 1.
class CanonicalMap {
 public:
  // caller keeps c alive; the shared overload owns its cover
  CanonicalMap(const FiniteCover& c, const DynSystem& sys, const SampleSet& samples);
  CanonicalMap(std::shared_ptr<const FiniteCover> c, const DynSystem& sys,
               const SampleSet& samples);

  // empty when p is uncovered or all candidate weights vanish
  std::optional<std::vector<std::pair<int, double>>> try_weights(
      const SystemPoint& p) const;
  // same but throws instead of returning empty
  std::vector<std::pair<int, double>> weights(const SystemPoint& p) const;

  const FiniteCover& cover() const { return *cover_; }

 private:
  std::shared_ptr<const FiniteCover> holder_;
  const FiniteCover* cover_;
  DynSystem sys_;
  SampleSet samples_;
  SampleIndex index_;
};

struct PLMap {
  int dim = 0;
  std::vector<std::vector<double>> vertex_images;

  std::vector<double> eval(const std::vector<std::pair<int, double>>& weights) const;
};

// Vertex images on the sqrt-of-primes lattice mod 1, keyed by seed.
PLMap make_pl_map(int vertices, int target_dim, unsigned seed);

// Affine independence of every face's vertex images; min_gap reports the
// smallest pivot seen during elimination.
bool faces_affinely_independent(const Nerve& nerve, const PLMap& g, double tol,
                                double* min_gap = nullptr);

// Fiber size audit of the PL map: for each probe value, counts the faces
// whose image simplex contains it (within tol); the max is a certified
// bound on point preimages at probe resolution.
int max_simplices_containing(const Nerve& nerve, const PLMap& g,
                             const std::vector<std::vector<double>>& probes,
                             double tol);

}  // namespace mdim
