#include "qvol/geometry.hpp"

#include <json.hpp>
#include <cmath>
#include <sstream>
#include <stdexcept>

namespace qvol::geometry {

using nlohmann::json;

bool ConvexBody::contains(const Vector& x) const {
  if (x.size() != dim_)
    throw std::invalid_argument("contains: point dimension " +
                                std::to_string(x.size()) + " != body dimension " +
                                std::to_string(dim_));
  queries_.fetch_add(1, std::memory_order_relaxed);
  return contains_impl(x);
}

namespace {

class BallBody final : public ConvexBody {
 public:
  BallBody(int n, double radius)
      : ConvexBody(n, radius, radius), radius_(radius) {}
  std::string kind() const override { return "ball"; }
  double radius() const { return radius_; }

 private:
  bool contains_impl(const Vector& x) const override {
    return x.squaredNorm() <= radius_ * radius_;
  }
  double radius_;
};

class AxisBoxBody final : public ConvexBody {
 public:
  AxisBoxBody(Vector low, Vector high, double r, double R)
      : ConvexBody(static_cast<int>(low.size()), r, R),
        low_(std::move(low)),
        high_(std::move(high)) {}
  std::string kind() const override { return "box"; }
  const Vector& low() const { return low_; }
  const Vector& high() const { return high_; }

 private:
  bool contains_impl(const Vector& x) const override {
    for (int i = 0; i < x.size(); ++i)
      if (x[i] < low_[i] || x[i] > high_[i]) return false;
    return true;
  }
  Vector low_, high_;
};

class HalfspaceBody final : public ConvexBody {
 public:
  HalfspaceBody(Matrix A, Vector b, double r, double R)
      : ConvexBody(static_cast<int>(A.cols()), r, R),
        A_(std::move(A)),
        b_(std::move(b)) {}
  std::string kind() const override { return "halfspaces"; }
  const Matrix& A() const { return A_; }
  const Vector& b() const { return b_; }

 private:
  bool contains_impl(const Vector& x) const override {
    Vector y = A_ * x;
    for (int i = 0; i < y.size(); ++i)
      if (y[i] > b_[i]) return false;
    return true;
  }
  Matrix A_;
  Vector b_;
};

// Lazy affine image: stores S^-1 and the shift so a query costs one base
// query plus one matrix-vector product.
class AffineBody final : public ConvexBody {
 public:
  AffineBody(BodyPtr base, Matrix s_inv, Vector shift, double r, double R)
      : ConvexBody(base->dim(), r, R),
        base_(std::move(base)),
        s_inv_(std::move(s_inv)),
        shift_(std::move(shift)) {}
  std::string kind() const override { return "affine(" + base_->kind() + ")"; }

 private:
  bool contains_impl(const Vector& x) const override {
    return base_->contains(s_inv_ * (x - shift_));
  }
  BodyPtr base_;
  Matrix s_inv_;
  Vector shift_;
};

}  // namespace

BodyPtr make_ball(int n, double radius) {
  if (n < 1) throw std::invalid_argument("make_ball: n must be >= 1");
  if (!(radius > 0)) throw std::invalid_argument("make_ball: radius must be > 0");
  return std::make_shared<BallBody>(n, radius);
}

BodyPtr make_axis_box(const Vector& low, const Vector& high) {
  if (low.size() != high.size() || low.size() == 0)
    throw std::invalid_argument("make_axis_box: bad bounds");
  double r = std::numeric_limits<double>::infinity();
  double R2 = 0.0;
  for (int i = 0; i < low.size(); ++i) {
    if (!(low[i] < high[i]))
      throw std::invalid_argument("make_axis_box: low must be < high");
    if (low[i] > 0 || high[i] < 0)
      throw std::invalid_argument("make_axis_box: box must contain the origin");
    r = std::min(r, std::min(-low[i], high[i]));
    double m = std::max(-low[i], high[i]);
    R2 += m * m;
  }
  return std::make_shared<AxisBoxBody>(low, high, r, std::sqrt(R2));
}

BodyPtr make_halfspaces(const Matrix& A, const Vector& b, double r, double R) {
  if (A.rows() != b.size() || A.cols() < 1)
    throw std::invalid_argument("make_halfspaces: A/b shape mismatch");
  if (b.minCoeff() < 0)
    throw std::invalid_argument("make_halfspaces: origin outside (b must be >= 0)");
  if (!(r > 0) || !(R >= r))
    throw std::invalid_argument("make_halfspaces: need 0 < r <= R");
  return std::make_shared<HalfspaceBody>(A, b, r, R);
}

PencilBody::PencilBody(BodyPtr base, double two_d)
    // The pencil touches the origin at the cone apex, so it holds no ball
    // around the origin; r here is a chord-march step hint (it contains a
    // ball of radius 1/2 around (1, 0, ..., 0) when the base has r = 1).
    : ConvexBody(base->dim() + 1, 0.5,
                 std::sqrt(two_d * two_d +
                           base->outer_radius() * base->outer_radius())),
      base_(std::move(base)),
      two_d_(two_d) {}

bool PencilBody::contains_impl(const Vector& x) const {
  double x0 = x[0];
  if (x0 < 0.0 || x0 > two_d_) return false;
  Vector y = x.tail(x.size() - 1);
  if (y.squaredNorm() > x0 * x0) return false;
  return base_->contains(y);
}

BodyPtr make_pencil(BodyPtr base, double two_d) {
  if (!base) throw std::invalid_argument("make_pencil: null base");
  if (std::abs(base->inner_radius() - 1.0) > 1e-12)
    throw std::invalid_argument(
        "make_pencil: base must be normalized to inner radius 1");
  if (!(two_d >= 2.0 * base->outer_radius() - 1e-9))
    throw std::invalid_argument("make_pencil: need two_d = 2 R/r");
  return std::make_shared<PencilBody>(std::move(base), two_d);
}

BodyPtr apply_affine(BodyPtr base, const Matrix& S, const Vector& shift) {
  if (!base) throw std::invalid_argument("apply_affine: null base");
  int n = base->dim();
  if (S.rows() != n || S.cols() != n || shift.size() != n)
    throw std::invalid_argument("apply_affine: shape mismatch");
  Eigen::JacobiSVD<Matrix> svd(S, Eigen::ComputeThinU | Eigen::ComputeThinV);
  double smax = svd.singularValues()(0);
  double smin = svd.singularValues()(n - 1);
  // Past cond ~1e8 the chord searches downstream lose all 64-bit precision.
  if (!(smin > 0) || smax / smin > 1e8)
    throw std::invalid_argument("apply_affine: S singular or condition number > 1e8");
  Matrix s_inv = svd.solve(Matrix::Identity(n, n));
  double shift_norm = shift.norm();
  double r = std::max(0.0, base->inner_radius() * smin - shift_norm);
  double R = base->outer_radius() * smax + shift_norm;
  return std::make_shared<AffineBody>(std::move(base), std::move(s_inv), shift,
                                      r, R);
}

// ---------------------------------------------------------------------------
// JSON body specs

namespace {

json body_json(const ConvexBody& body);

BodyPtr body_from_json(const json& j) {
  if (!j.is_object()) throw std::invalid_argument("body spec: not an object");
  int schema = j.value("schema", 1);
  if (schema != 1)
    throw std::invalid_argument("body spec: unsupported schema version");
  std::string type = j.at("type").get<std::string>();
  if (type == "ball") {
    int n = j.at("n").get<int>();
    double r = j.at("r").get<double>();
    double R = j.value("R", r);
    if (std::abs(r - R) > 1e-12)
      throw std::invalid_argument("body spec: ball needs r == R");
    return make_ball(n, r);
  }
  if (type == "box") {
    auto lo = j.at("low").get<std::vector<double>>();
    auto hi = j.at("high").get<std::vector<double>>();
    if (lo.size() != hi.size() || lo.empty())
      throw std::invalid_argument("body spec: box bounds mismatch");
    int n = static_cast<int>(lo.size());
    Vector low(n), high(n);
    // Recentre at the midpoint; see header.
    for (int i = 0; i < n; ++i) {
      double c = 0.5 * (lo[i] + hi[i]);
      low[i] = lo[i] - c;
      high[i] = hi[i] - c;
    }
    return make_axis_box(low, high);
  }
  if (type == "halfspaces") {
    int n = j.at("n").get<int>();
    auto a = j.at("A").get<std::vector<double>>();
    auto bv = j.at("b").get<std::vector<double>>();
    if (a.size() != bv.size() * static_cast<std::size_t>(n))
      throw std::invalid_argument("body spec: A is m*n row-major");
    int m = static_cast<int>(bv.size());
    Matrix A(m, n);
    Vector b(m);
    for (int i = 0; i < m; ++i) {
      b[i] = bv[i];
      for (int k = 0; k < n; ++k) A(i, k) = a[i * n + k];
    }
    return make_halfspaces(A, b, j.at("r").get<double>(), j.at("R").get<double>());
  }
  if (type == "pencil") {
    BodyPtr base = body_from_json(j.at("base"));
    double two_d = j.value("two_d", 2.0 * base->outer_radius());
    return make_pencil(std::move(base), two_d);
  }
  throw std::invalid_argument("body spec: unknown type '" + type + "'");
}

json body_json(const ConvexBody& body) {
  json j;
  j["schema"] = 1;
  j["n"] = body.dim();
  j["r"] = body.inner_radius();
  j["R"] = body.outer_radius();
  j["type"] = body.kind();
  return j;
}

}  // namespace

BodyPtr load_body_json(const std::string& json_text) {
  json j = json::parse(json_text);
  return body_from_json(j);
}

std::string body_to_json(const ConvexBody& body) {
  return body_json(body).dump(2);
}

}  // namespace qvol::geometry
