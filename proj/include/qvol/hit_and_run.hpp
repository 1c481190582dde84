#pragma once

#include "qvol/geometry.hpp"
#include "qvol/rng.hpp"

namespace qvol::hitrun {

using geometry::ConvexBody;
using geometry::Matrix;
using geometry::Vector;

struct WalkConfig {
  double a = 0.0;      ///< target density exp(-a * x_0)
  double tol = 0.0;    ///< chord endpoint tolerance; 0 means 1e-9 * R
  int max_bisect = 128;
  // Optional direction shaping: directions are drawn as L g / ||L g|| with g
  // standard normal. Walking with L = T^{1/2} (T a sample covariance) is the
  // rounded walk mapped back to original coordinates; the target density and
  // the stationary law are unchanged for any symmetric direction law.
  Matrix dir_transform;  ///< empty = isotropic
};

/// Uniform direction on the unit sphere (normalized i.i.d. normals;
/// degenerate draws with ||g|| < 1e-12 are resampled).
Vector sample_direction(int n, Rng& rng);

struct Chord {
  double t_minus;
  double t_plus;
};

/// Endpoints of {t : p + t u in K}, located by doubling march plus bisection
/// to width <= tol/2. Requires p in K (checked; throws otherwise).
Chord chord(const ConvexBody& body, const Vector& p, const Vector& u,
            const WalkConfig& cfg);

/// Sample t on [t_minus, t_plus] with density proportional to exp(-a u0 t),
/// by inverse CDF in log1p/expm1 form (exact uniform limit as a u0 -> 0).
double sample_exponential_on_chord(double a, double u0, double t_minus,
                                   double t_plus, Rng& rng);

/// One hit-and-run step at density exp(-a x_0). The result is in K.
Vector step(const ConvexBody& body, const Vector& p, const WalkConfig& cfg,
            Rng& rng);

}  // namespace qvol::hitrun
