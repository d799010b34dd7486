#pragma once

// Dynamical substrates: points, integer actions, metrics, deterministic
// low-discrepancy sampling.  Angles are exact QuadExt values so the group
// law of the action holds exactly; metrics are evaluated in doubles.

#include "mdim/quadratic.hpp"

#include <cstdint>
#include <memory>
#include <string>
#include <variant>
#include <vector>

namespace mdim {

double circle_dist(double x, double y);
double frac_unit(double x);  // representative in [0,1)

// van der Corput radical inverse, exact rational for circle coordinates
mpq_class radical_inverse(unsigned long long i, unsigned base);
unsigned nth_prime(unsigned k);

class SystemPoint;

struct CirclePoint {
  QuadExt angle;  // reduced to [0,1)
  double val = 0;
};

struct SturmPoint {
  QuadExt base;  // in [0,1)
  double base_val = 0;
  long long offset = 0;
};

struct ProductPoint {
  std::shared_ptr<const SystemPoint> first, second;
};

// Mapping-torus point: base point plus fiber coordinate t.  t lives in
// [0,1) for torus points and in [0,1] for slab points.
struct TorusPoint {
  std::shared_ptr<const SystemPoint> base;
  double t = 0;
};

class SystemPoint {
 public:
  using Payload = std::variant<CirclePoint, SturmPoint, ProductPoint, TorusPoint>;

  SystemPoint() : payload_(CirclePoint{}) {}
  explicit SystemPoint(Payload p) : payload_(std::move(p)) {}

  static SystemPoint circle(QuadExt angle);
  static SystemPoint sturm(QuadExt base, long long offset);
  static SystemPoint product(SystemPoint a, SystemPoint b);
  static SystemPoint torus(SystemPoint base, double t);

  const Payload& payload() const { return payload_; }
  bool is_circle() const { return std::holds_alternative<CirclePoint>(payload_); }
  bool is_sturm() const { return std::holds_alternative<SturmPoint>(payload_); }
  bool is_product() const { return std::holds_alternative<ProductPoint>(payload_); }
  bool is_torus() const { return std::holds_alternative<TorusPoint>(payload_); }

  const CirclePoint& as_circle() const;
  const SturmPoint& as_sturm() const;
  const ProductPoint& as_product() const;
  const TorusPoint& as_torus() const;

 private:
  Payload payload_;
};

class SystemModel {
 public:
  virtual ~SystemModel() = default;
  virtual SystemPoint act(const SystemPoint& p, long long z) const = 0;
  virtual double dist(const SystemPoint& p, const SystemPoint& q) const = 0;
  virtual std::vector<SystemPoint> sample(std::size_t n, unsigned seed,
                                          unsigned stream) const = 0;
  virtual std::string descriptor() const = 0;
  virtual long long horizon() const = 0;
};

// Immutable value handle on a system.
class DynSystem {
 public:
  DynSystem() = default;
  explicit DynSystem(std::shared_ptr<const SystemModel> m) : model_(std::move(m)) {}

  bool valid() const { return model_ != nullptr; }
  SystemPoint act(const SystemPoint& p, long long z) const { return model_->act(p, z); }
  double dist(const SystemPoint& p, const SystemPoint& q) const {
    return model_->dist(p, q);
  }
  std::vector<SystemPoint> sample(std::size_t n, unsigned seed,
                                  unsigned stream = 0) const {
    return model_->sample(n, seed, stream);
  }
  std::string descriptor() const { return model_->descriptor(); }
  long long horizon() const { return model_->horizon(); }
  const SystemModel* model() const { return model_.get(); }

 private:
  std::shared_ptr<const SystemModel> model_;
};

DynSystem make_rotation(const QuadExt& alpha, long long horizon = 1024);
DynSystem make_sturmian(const QuadExt& alpha, int precision = 64,
                        long long horizon = 1024);
DynSystem make_product(const DynSystem& a, const DynSystem& b);

// Sturmian coding symbol at position z (0 or 1).
int sturm_symbol(const SturmPoint& p, const QuadExt& alpha, long long z);

struct SampleSet {
  std::shared_ptr<const std::vector<SystemPoint>> points;
  std::string ref;

  std::size_t size() const { return points ? points->size() : 0; }
  const SystemPoint& operator[](std::size_t i) const { return (*points)[i]; }
};

SampleSet make_samples(const DynSystem& sys, std::size_t n, unsigned seed);

// Bucketed nearest-neighbor lookup over a sample set.  Exact for circle
// points and for torus points over a circle base (plane copies realize the
// quotient metric); falls back to a linear scan otherwise.
class SampleIndex {
 public:
  SampleIndex(const DynSystem& sys, const SampleSet& samples);

  // Nearest sample to p whose index is not in `exclude` (sorted).
  // Returns {-1, inf} if everything is excluded.
  std::pair<int, double> nearest_excluding(const SystemPoint& p,
                                           const std::vector<int>& exclude) const;
  double min_dist(const SystemPoint& p) const {
    return nearest_excluding(p, {}).second;
  }

 private:
  struct Entry {
    float x, y;
    int id;
  };
  bool planar_ = false;
  bool wrap_y_ = false;
  int nx_ = 1, ny_ = 1;
  std::vector<std::vector<Entry>> buckets_;
  const DynSystem sys_;
  SampleSet samples_;

  void insert(double x, double y, int id);
  static bool coords(const SystemPoint& p, double& x, double& y, bool& has_y);
};

}  // namespace mdim
