#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <string>
#include <vector>

#include "qvol/geometry.hpp"

namespace qvol::chain {

using geometry::Matrix;
using geometry::Vector;

// Explicit finite Markov chain of a discretized hit-and-run walk: states are
// the fine-grid points, P is row-stochastic, pi its stationary density.
struct FiniteChain {
  std::vector<Vector> states;
  Matrix P;
  Eigen::VectorXd pi;
  double eps = 0.0;        ///< fine grid spacing
  double eps_prime = 0.0;  ///< line discretization spacing
  double coarse = 0.0;     ///< coarse grid spacing sqrt(eps) n^{1/4}
  double a = 0.0;          ///< density coefficient on coordinate 0
};

/// Stationary density of a row-stochastic P: power iteration to residual
/// 1e-12, dense eigensolver fallback.
Eigen::VectorXd stationary(const Matrix& P);

// 1D two-level discretized walk on the interval [lo, hi] with target density
// exp(-a x). Transitions follow the two-level discretization exactly and are
// summed in closed form: line set {u + k eps'} inside the half-box extension
// of the grid, weights exp(-a v'), snap to the coarse grid (ties toward the
// smaller grid value), uniform choice among fine states in the coarse box.
// State count is capped at 4096.
FiniteChain discretize_1d(double lo, double hi, double eps, double eps_prime,
                          double a);

/// 1D overload taking an interval body (dim must be 1).
FiniteChain discretize_1d(const geometry::ConvexBody& interval, double eps,
                          double eps_prime, double a);

// 2D instance with Monte Carlo transition estimation (samples_per_state
// kernel draws per state over a fixed stratified direction set), followed by
// flow symmetrization against the grid-restricted target density and row
// renormalization, which restores exact reversibility. Cap: 1024 states.
FiniteChain discretize_2d_mc(const geometry::ConvexBody& body, double eps,
                             double eps_prime, double a, int samples_per_state,
                             std::uint64_t seed);

/// Conductance of a nonempty proper subset S (indices into states).
double conductance(const FiniteChain& chain, const std::vector<int>& S);

struct MinConductance {
  double phi = 0.0;
  std::vector<int> witness;
  bool exact = false;  ///< false: spectral lower bound delta/2 (Cheeger)
};

/// Exact minimum over all proper subsets for d <= 20 (Gray-code sweep);
/// otherwise the Cheeger lower bound delta/2 with exact = false.
MinConductance min_conductance(const FiniteChain& chain);

/// Total-variation distance between sigma0 P^k and pi.
double mixing_tv(const FiniteChain& chain, const Eigen::VectorXd& sigma0, int k);

/// Discriminant D_xy = sqrt(P_xy P_yx); requires a reversible chain.
Matrix discriminant(const FiniteChain& chain);

/// Max detailed-balance residual |pi_x P_xy - pi_y P_yx|.
double reversibility_residual(const FiniteChain& chain);

// Chain file format: {"schema":1, "states":[[..]..], "P":[row-major],
//                     "pi":[..], "meta":{eps, eps_prime, coarse, a}}
std::string chain_to_json(const FiniteChain& chain);
FiniteChain chain_from_json(const std::string& text);

}  // namespace qvol::chain
