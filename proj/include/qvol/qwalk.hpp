#pragma once

#include <Eigen/Dense>
#include <complex>
#include <vector>

#include "qvol/chain.hpp"

namespace qvol::qwalk {

using CMat = Eigen::MatrixXcd;
using CVec = Eigen::VectorXcd;
using chain::FiniteChain;
using chain::Matrix;

// Dense operators live on C^{d^2} with basis |x>|y> at index x*d + y.
// Builders enforce d^2 <= 16384 (d <= 128).

/// Register swap S |x>|y> = |y>|x>.
CMat swap_operator(int d);

/// U with U|x>|0> = |x> sum_y sqrt(P_xy) |y>, completed to a full unitary by
/// block Gram-Schmidt (with a re-orthogonalization pass) per x block.
CMat build_U(const FiniteChain& chain);

/// Isometry T: d^2 x d with columns |phi_x> = |x>|p_x^{1/2}>.
CMat isometry_T(const FiniteChain& chain);

/// Projector Pi = T T^dagger onto span{|phi_x>}.
CMat projector(const FiniteChain& chain);

/// Walk operator W = S (2 Pi - I).
CMat build_walk(const FiniteChain& chain);

/// |pi_W> = sum_x sqrt(pi_x) |phi_x>.
CVec stationary_walk_state(const FiniteChain& chain);

struct SpectrumReport {
  std::vector<std::complex<double>> eigs_W;
  std::vector<double> eigs_D;
  double max_mismatch = 0.0;
  double phase_gap = 0.0;
  bool pass = false;
};

// Checks that spec(W) equals {lambda +- i sqrt(1 - lambda^2)} over spec(D)
// on the walk subspace plus +-1 on its complement, as multisets, within tol.
// A mismatch above tol yields pass = false rather than an exception.
SpectrumReport verify_spectrum(const CMat& W, const Matrix& D, double tol = 1e-8);
SpectrumReport verify_spectrum(const FiniteChain& chain, double tol = 1e-8);

/// arccos(lambda_2) for the second-largest discriminant eigenvalue; always
/// >= sqrt(2 delta) with delta = 1 - lambda_2.
double phase_gap(const Matrix& D);

/// Grover-Rudolph state preparation: amplitudes sqrt(p_i) built by the
/// recursive conditional-split construction. probs must be a nonnegative
/// 2^q vector summing to 1.
CVec grover_rudolph_prepare(const std::vector<double>& probs);

/// (phi1, phi2) = sqrt(-2 delta^2 ln xi1) (cos 2 pi xi2, sin 2 pi xi2).
std::pair<double, double> box_muller(double xi1, double xi2, double delta);

}  // namespace qvol::qwalk
