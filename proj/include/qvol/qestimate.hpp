#pragma once

#include <Eigen/Dense>
#include <complex>
#include <cstdint>
#include <vector>

#include "qvol/rng.hpp"

namespace qvol::qestimate {

using CMat = Eigen::MatrixXcd;
using CVec = Eigen::VectorXcd;

// Amplitude-estimation task: preparation unitary U on dimension d_s, target
// projector P1, the true amplitude p = ||P1 U |0>||^2, and the phase register
// size M (a power of two).
struct AmplitudeTask {
  CMat U;
  CMat P1;
  double p = 0.0;
  int M = 0;
};

/// Two-dimensional rotation task with ||P1 U|0>||^2 = p.
AmplitudeTask make_bernoulli_task(double p, int M);

/// Q = -U (2|0><0| - I) U^dagger (2 P1 - I).
CMat grover_iterate(const CMat& U, const CMat& P1);

/// Theoretical estimation-error bound 2 pi sqrt(p(1-p))/M + pi^2/M^2.
double ae_error_bound(double p, int M);

/// Exact Born distribution of the phase-register outcome y in {0..M-1}.
std::vector<double> ae_distribution(const AmplitudeTask& task);

/// Statevector of the estimation circuit before measurement, on C^M x C^ds
/// with index y*ds + system.
CVec ae_pre_measurement_state(const AmplitudeTask& task);

struct AeResult {
  int outcome = 0;
  double theta_tilde = 0.0;  ///< in [-pi/2, pi/2), sign from the branch
  double p_tilde = 0.0;      ///< sin^2(pi y / M)
};

/// Simulates the estimation circuit and samples the phase register from its
/// exact Born distribution with the seeded generator.
AeResult amplitude_estimate(const AmplitudeTask& task, Rng& rng);
AeResult amplitude_estimate(const AmplitudeTask& task, std::uint64_t seed);

/// Exact reflection omega |v><v| + (I - |v><v|) with omega = e^{i pi/3}.
CMat exact_reflection(const CVec& v);

/// Applies the recursion U_0 = I, U_{m+1} = U_m R_psi U_m^dagger R_phi U_m
/// to psi. reflection_uses, when given, receives the exact count of
/// reflection applications (3^m - 1 <= 3^m).
CVec pi3_amplify(const CVec& psi, const CMat& R_psi, const CMat& R_phi, int m,
                 long long* reflection_uses = nullptr);

// Reflection about the leading eigenvector of W through c-fold repeated
// phase estimation with a ancilla qubits per repetition:
// R~ = V^dagger (I x Q_omega) V, a = ceil(log2(1/Delta)),
// c = ceil(log2(1/sqrt(eps2))); Delta is the phase-gap lower bound in turns
// (radians / 2 pi). Registers are ordered [anc_1 .. anc_c, system], so
// |psi>|0...0> embeds as the first d_W entries.
struct PhaseReflection {
  CMat op;      ///< dense on 2^{ac} * d_W
  int a = 0;
  int c = 0;
  int dim = 0;  ///< total dimension
};

PhaseReflection reflection_via_phase_estimation(const CMat& W, double delta_turns,
                                                double eps2);

/// |psi> tensor |0>^{ac} under the [ancillas..., system] ordering.
CVec embed_system(const CVec& psi, int total_dim);

// Discrete random variable for the mean-estimation payloads.
struct DiscreteRV {
  std::vector<double> values;
  std::vector<double> probs;
};

/// Unitary with first column sqrt(p_i) (Gram-Schmidt completed).
CMat sampler_unitary(const DiscreteRV& rv);

/// Controlled-rotation payload R_{L,H}|x>|0> = |x>(sqrt(1-x/H)|0> +
/// sqrt(x/H)|1>) for L <= x < H, identity otherwise.
CMat payload_rotation(const DiscreteRV& rv, double L, double H);

// Median of `repetitions` (odd) amplitude estimates of the payload circuit;
// the estimated amplitude is H^{-1} times the [L,H)-truncated mean.
double basic_est(const DiscreteRV& rv, double L, double H, int M,
                 int repetitions, Rng& rng);

struct ChebyshevTrace {
  std::vector<double> levels;     ///< truncation levels visited
  std::vector<double> estimates;  ///< BasicEst output per level
  int repetitions = 0;
  int M_search = 0;
  int M_refine = 0;
};

/// Mean estimate via truncation search: factor-2 levels from H downward,
/// BasicEst per level, refinement at the first resolvable level. Throws when
/// the search exhausts all levels (Delta_U violated).
double quantum_chebyshev_mean(const DiscreteRV& rv, double delta_u, double H,
                              double eps, double delta, Rng& rng,
                              ChebyshevTrace* trace = nullptr);

// Nondestructive BasicEst circuit: s parallel estimation blocks over copies
// of U|0>, a sin^2 payload folded into a median register (width M), measure
// the median, uncompute. Returns the measured estimate sin^2(pi k*/M), the
// post-measurement state and its fidelity with the input copies.
struct NondesResult {
  double estimate = 0.0;
  int outcome = 0;
  double outcome_prob = 0.0;
  double fidelity = 0.0;
  CVec state;  ///< restored joint state (blocks x median register)
};

NondesResult nondestructive_estimate(const AmplitudeTask& task, int s, Rng& rng);
NondesResult nondestructive_estimate(const AmplitudeTask& task, int s,
                                     std::uint64_t seed);

/// Per-outcome table (probability, estimate, fidelity); the seeded runs just
/// sample rows of this table.
struct NondesOutcome {
  int outcome;
  double prob;
  double estimate;
  double fidelity;
};
std::vector<NondesOutcome> nondes_outcome_table(const AmplitudeTask& task, int s);

/// Forward circuit then its inverse with the measurement skipped; returns
/// max |state - input| (identity check).
double nondes_uncompute_identity_error(const AmplitudeTask& task, int s);

/// U_sin2 on (phase, value) registers: |y>|0> -> |y>|min(y, M-y)>; applied to
/// a phase-register state, returns the joint state on C^M x C^M.
CVec attach_sin2_payload(const CVec& phase_state);

}  // namespace qvol::qestimate
