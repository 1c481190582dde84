#pragma once

#include <Eigen/Dense>
#include <atomic>
#include <cstdint>
#include <memory>
#include <string>
#include <vector>

namespace qvol::geometry {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

// Membership-oracle view of a convex body K with B2(0,r) <= K <= B2(0,R).
// Bodies are immutable after construction; the query counter is atomic so
// parallel samplers can share one body.
class ConvexBody {
 public:
  virtual ~ConvexBody() = default;

  int dim() const { return dim_; }
  double inner_radius() const { return r_; }
  double outer_radius() const { return R_; }

  /// Membership test. Counts exactly one query against this body.
  bool contains(const Vector& x) const;

  std::uint64_t query_count() const {
    return queries_.load(std::memory_order_relaxed);
  }
  void reset_query_count() const {
    queries_.store(0, std::memory_order_relaxed);
  }

  virtual std::string kind() const = 0;

 protected:
  ConvexBody(int dim, double r, double R) : dim_(dim), r_(r), R_(R) {}

 private:
  virtual bool contains_impl(const Vector& x) const = 0;

  int dim_;
  double r_;
  double R_;
  mutable std::atomic<std::uint64_t> queries_{0};
};

using BodyPtr = std::shared_ptr<const ConvexBody>;

/// Ball of the given radius centered at the origin.
BodyPtr make_ball(int n, double radius);

/// Axis-aligned box [low, high]; the origin must lie in the box. The inner
/// radius is the distance from the origin to the boundary (0 when the origin
/// sits on a face).
BodyPtr make_axis_box(const Vector& low, const Vector& high);

/// Intersection of halfspaces A x <= b. r and R are trusted bounds supplied
/// by the caller; b >= 0 is required so the origin is inside.
BodyPtr make_halfspaces(const Matrix& A, const Vector& b, double r, double R);

// Pencil over a base body normalized to r = 1: the (n+1)-dimensional body
// ([0, 2D] x K) intersected with the cone ||(x_1..x_n)|| <= x_0, where
// two_d = 2D. One membership query costs one query to the base body.
class PencilBody;
BodyPtr make_pencil(BodyPtr base, double two_d);

/// Image body {S x + shift : x in base}; membership at y tests the base at
/// S^-1 (y - shift). S must be invertible with condition number <= 1e8.
BodyPtr apply_affine(BodyPtr base, const Matrix& S, const Vector& shift);

class PencilBody : public ConvexBody {
 public:
  PencilBody(BodyPtr base, double two_d);
  std::string kind() const override { return "pencil"; }
  const BodyPtr& base() const { return base_; }
  double two_d() const { return two_d_; }

 private:
  bool contains_impl(const Vector& x) const override;
  BodyPtr base_;
  double two_d_;
};

inline const PencilBody* as_pencil(const ConvexBody& b) {
  return dynamic_cast<const PencilBody*>(&b);
}

// Body-spec JSON (schema 1):
//   {"schema":1, "type":"ball",       "n":3, "r":1.0, "R":1.0}
//   {"schema":1, "type":"box",        "n":2, "low":[...], "high":[...]}
//   {"schema":1, "type":"halfspaces", "n":2, "A":[row-major], "b":[...],
//                                     "r":0.5, "R":2.0}
//   {"schema":1, "type":"pencil",     "base":{...}}   (base must have r = 1)
// Boxes are recentred at their midpoint on load (volume is translation
// invariant and the pipeline needs the origin strictly inside).
BodyPtr load_body_json(const std::string& json_text);
std::string body_to_json(const ConvexBody& body);

}  // namespace qvol::geometry
