#include "qvol/hit_and_run.hpp"

#include <cmath>
#include <stdexcept>

namespace qvol::hitrun {

Vector sample_direction(int n, Rng& rng) {
  if (n < 1) throw std::invalid_argument("sample_direction: n must be >= 1");
  Vector g(n);
  for (;;) {
    for (int i = 0; i < n; ++i) g[i] = rng.normal();
    double norm = g.norm();
    if (norm >= 1e-12) return g / norm;
  }
}

namespace {

// One-sided chord endpoint in direction sign*u. Marches outward doubling
// from step0 until the first outside point, then bisects.
double endpoint(const ConvexBody& body, const Vector& p, const Vector& u,
                double sign, double step0, double tol, int max_bisect) {
  double t_in = 0.0;
  double t_out = step0;
  double cap = 4.0 * body.outer_radius() + 1.0;
  while (body.contains(p + (sign * t_out) * u)) {
    t_in = t_out;
    t_out *= 2.0;
    if (t_out > cap)
      throw std::runtime_error("chord: no exit found inside 4R; body violates its outer radius");
  }
  for (int it = 0; it < max_bisect && (t_out - t_in) > 0.5 * tol; ++it) {
    double mid = 0.5 * (t_in + t_out);
    if (body.contains(p + (sign * mid) * u))
      t_in = mid;
    else
      t_out = mid;
  }
  return sign * t_in;
}

}  // namespace

Chord chord(const ConvexBody& body, const Vector& p, const Vector& u,
            const WalkConfig& cfg) {
  if (!body.contains(p))
    throw std::invalid_argument("chord: start point is not in the body");
  double tol = cfg.tol > 0 ? cfg.tol : 1e-9 * body.outer_radius();
  double step0 = body.inner_radius() > 0 ? 0.5 * body.inner_radius()
                                         : 0.03125 * body.outer_radius();
  Chord c;
  c.t_plus = endpoint(body, p, u, +1.0, step0, tol, cfg.max_bisect);
  c.t_minus = endpoint(body, p, u, -1.0, step0, tol, cfg.max_bisect);
  return c;
}

double sample_exponential_on_chord(double a, double u0, double t_minus,
                                   double t_plus, Rng& rng) {
  if (!(t_minus < t_plus))
    throw std::invalid_argument("sample_exponential_on_chord: empty range");
  double len = t_plus - t_minus;
  double c = a * u0;  // density on the chord is proportional to exp(-c t)
  if (!std::isfinite(c * len))
    throw std::invalid_argument("sample_exponential_on_chord: non-finite rate");
  double xi = rng.uniform();
  if (std::abs(c) * len < 1e-12) return t_minus + xi * len;
  if (c > 0) {
    // CDF(t) = (1 - e^{-c (t - t_minus)}) / (1 - e^{-c len})
    return t_minus - std::log1p(xi * std::expm1(-c * len)) / c;
  }
  // Mirror for growing densities: sample from the t_plus end.
  return t_plus - std::log1p(xi * std::expm1(c * len)) / c;
}

Vector step(const ConvexBody& body, const Vector& p, const WalkConfig& cfg,
            Rng& rng) {
  Vector u;
  if (cfg.dir_transform.size() > 0) {
    Vector g(p.size());
    for (;;) {
      for (int i = 0; i < g.size(); ++i) g[i] = rng.normal();
      u = cfg.dir_transform * g;
      double norm = u.norm();
      if (norm >= 1e-12) {
        u /= norm;
        break;
      }
    }
  } else {
    u = sample_direction(static_cast<int>(p.size()), rng);
  }
  Chord c = chord(body, p, u, cfg);
  double t = sample_exponential_on_chord(cfg.a, u[0], c.t_minus, c.t_plus, rng);
  return p + t * u;
}

}  // namespace qvol::hitrun
