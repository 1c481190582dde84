#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "qvol/geometry.hpp"
#include "qvol/hit_and_run.hpp"
#include "qvol/rng.hpp"

namespace qvol::annealing {

using geometry::BodyPtr;
using geometry::ConvexBody;
using geometry::Matrix;
using geometry::Vector;

// Cooling schedule a_0 > a_1 > ... > a_m with a_0 = 2n and geometric decay
// ratio (1 - 1/sqrt(n)); m = 2 ceil(sqrt(n) ln(n/eps)).
struct CoolingSchedule {
  int n = 0;           ///< dimension of the original body (pencil minus 1)
  int m = 0;           ///< stage count
  std::vector<double> a;  ///< m+1 coefficients
  double epsilon = 0.0;
};

CoolingSchedule build_schedule(int n, double epsilon);

struct StageStats {
  int stage = 0;
  double a = 0.0;             ///< coefficient a_i walked at this stage
  long long samples = 0;
  double ratio = 0.0;         ///< mean of exp((a_i - a_{i+1}) x_0)
  double moment_ratio = 0.0;  ///< empirical E[V^2] / E[V]^2
  std::uint64_t queries = 0;
};

struct EstimateReport {
  double volume = 0.0;
  double pencil_volume = 0.0;
  double xi_hat = 0.0;
  double epsilon = 0.0;
  std::vector<StageStats> stages;
  std::uint64_t total_queries = 0;
  std::uint64_t seed = 0;
  double wall_time_s = 0.0;
  std::vector<std::string> warnings;
  // resolved configuration echo
  long long samples_per_stage = 0;
  long long walk_steps = 0;
  bool rounding = false;
  int threads = 1;
  double scale_factor = 1.0;  ///< det bookkeeping for the r-normalization
};

struct EstimateConfig {
  double epsilon = 0.15;
  std::uint64_t seed = 0;
  long long samples_per_stage = 0;  ///< 0: (512/eps^2) sqrt(n) ln(n/eps) * k_scale
  double k_scale = 1.0;
  long long walk_steps = 0;         ///< 0: 200 n^2
  bool rounding = false;
  int threads = 1;
};

/// log of integral_cone exp(-a0 x_0) dx = log(v_n n! / a0^{n+1}),
/// v_n = pi^{n/2} / Gamma(1 + n/2).
double log_initial_mass(int n, double a0);
double initial_mass(int n, double a0);

/// Exact sample from the density ~ exp(-a0 x_0) on the pencil: gamma radial
/// law on the cone plus rejection on membership (cap 1e4 tries).
Vector sample_pi0(const ConvexBody& pencil, double a0, Rng& rng);

/// Advances every chain `walk_steps` hit-and-run steps at density
/// exp(-a_i x_0) and accumulates the stage ratio V_i and its second moment.
/// Deterministic for a given (seed, stage) in any thread count.
StageStats run_stage(const ConvexBody& pencil, double a_i, double a_next,
                     std::vector<Vector>& points, long long walk_steps,
                     const hitrun::WalkConfig& cfg, std::uint64_t seed,
                     int stage, int threads = 1);

/// Telescoping product over the schedule; k chains warm-started from pi_0.
EstimateReport estimate_pencil_volume(const BodyPtr& pencil,
                                      const CoolingSchedule& schedule,
                                      long long k, long long walk_steps,
                                      std::uint64_t seed, int threads = 1,
                                      bool rounding = false);

/// Monte Carlo ratio xi = vol(K') / (2D vol(K)) from uniform samples of
/// [0,2D] x K (uniform K-samples via hit-and-run at a = 0); returns
/// vol_pencil / (2D xi_hat). xi_hat outside [0.4, 1.1] raises a warning.
double pencil_to_original(const BodyPtr& pencil, double vol_pencil_estimate,
                          double epsilon, std::uint64_t seed,
                          double* xi_hat_out = nullptr,
                          std::vector<std::string>* warnings = nullptr,
                          int threads = 1);

/// Empirical mean and covariance T = (1/k) sum (X - Xbar)(X - Xbar)^T.
/// Throws if fewer than n+1 points or T has an eigenvalue below 1e-10.
std::pair<Vector, Matrix> isotropic_transform(const std::vector<Vector>& pts);

/// Symmetric square root (and inverse root) via eigendecomposition.
Matrix sym_sqrt(const Matrix& T);
Matrix sym_inv_sqrt(const Matrix& T);

/// Full pipeline: normalize to r = 1, build the pencil, run the schedule
/// (optionally with per-stage covariance rounding), convert back through
/// the pencil ratio and the normalization determinant.
EstimateReport estimate_volume(const BodyPtr& body, const EstimateConfig& cfg);

std::string report_to_json(const EstimateReport& rep, bool with_timing = false);
std::string report_stage_csv(const EstimateReport& rep);

}  // namespace qvol::annealing
