#pragma once

// Families of disjoint closed intervals in [0, q) built around a rationally
// independent anchor set, such that every integer orbit t + Z meets all but
// at most two of the q subcollections.  Independence is certified exactly;
// the separation margin sigma is certified by a Lipschitz grid bound.

#include "mdim/quadratic.hpp"

#include <string>
#include <vector>

namespace mdim {

struct IndependenceCertificate {
  bool independent = false;
  int rank = 0;
  std::vector<std::string> basis;  // "1", "sqrt(p)" labels used by elimination
};

// Exact rank computation over the rationals in the basis {1, sqrt(p1), ...}.
IndependenceCertificate certify_rational_independence(const std::vector<QuadExt>& vals);

struct IntervalPiece {
  double lo = 0;
  double hi = 0;
  int sub = 0;    // subcollection index, 0-based
  int index = 0;  // position within the subcollection
};

struct IntervalSystemParams {
  int q = 5;                 // q > 2
  double mesh_bound = 0.05;  // max piece length
  int max_doublings = 12;
  int grid_per_anchor = 64;  // sigma certification grid density
  long denom_scale = 1 << 20;
};

struct IntervalSystem {
  int q = 0;
  std::vector<QuadExt> anchors;  // independent together with 1
  IndependenceCertificate certificate;
  double sigma_lower = 0;  // certified min over t of anchor_gap
  double margin = 0;       // slot end clearance
  double mesh = 0;         // max piece length
  int anchor_count = 0;
  std::vector<double> anchor_fracs;  // sorted fractional parts, for gap queries
  // pieces grouped by subcollection, 0..q-1; the last one stays empty
  std::vector<std::vector<IntervalPiece>> subcollections;
};

IntervalSystem build_interval_system(const IntervalSystemParams& params);

// Sum of the two smallest |t + z - a| over distinct (z, anchor) pairs;
// 2-Lipschitz and 1-periodic in t.
double anchor_gap(const IntervalSystem& sys, double t);

struct MetPiece {
  int sub = 0;
  int index = 0;
  long long z = 0;  // t + z lies in the piece
};

std::vector<MetPiece> met_pieces(const IntervalSystem& sys, double t);
int count_met(const IntervalSystem& sys, double t);  // distinct subcollections met

std::string interval_system_csv(const IntervalSystem& sys);

}  // namespace mdim
