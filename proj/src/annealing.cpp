#include "qvol/annealing.hpp"

#include <json.hpp>
#include <algorithm>
#include <chrono>
#include <cmath>
#include <sstream>
#include <stdexcept>

#include "qvol/parallel.hpp"

namespace qvol::annealing {

using nlohmann::json;

CoolingSchedule build_schedule(int n, double epsilon) {
  if (n < 2)
    throw std::invalid_argument("build_schedule: n must be >= 2 (the decay ratio degenerates at n = 1)");
  if (!(epsilon > 0.0) || !(epsilon < 0.5))
    throw std::invalid_argument("build_schedule: epsilon must be in (0, 1/2)");
  CoolingSchedule s;
  s.n = n;
  s.epsilon = epsilon;
  double sqn = std::sqrt(static_cast<double>(n));
  s.m = 2 * static_cast<int>(std::ceil(sqn * std::log(n / epsilon)));
  double ratio = 1.0 - 1.0 / sqn;
  s.a.resize(s.m + 1);
  s.a[0] = 2.0 * n;
  for (int i = 1; i <= s.m; ++i) s.a[i] = s.a[i - 1] * ratio;
  return s;
}

double log_initial_mass(int n, double a0) {
  if (n < 1 || !(a0 > 0))
    throw std::invalid_argument("log_initial_mass: need n >= 1, a0 > 0");
  double log_vn = 0.5 * n * std::log(M_PI) - std::lgamma(1.0 + 0.5 * n);
  return log_vn + std::lgamma(n + 1.0) - (n + 1.0) * std::log(a0);
}

double initial_mass(int n, double a0) { return std::exp(log_initial_mass(n, a0)); }

Vector sample_pi0(const ConvexBody& pencil, double a0, Rng& rng) {
  int n = pencil.dim() - 1;
  if (n < 1) throw std::invalid_argument("sample_pi0: pencil dimension must be >= 2");
  for (int attempt = 0; attempt < 10000; ++attempt) {
    // Radial law on the cone: the slice at x_0 has volume v_n x_0^n, so the
    // x_0 marginal of exp(-a0 x_0) restricted to the cone is Gamma(n+1, a0).
    double x0 = 0.0;
    for (int i = 0; i <= n; ++i) x0 += -std::log(rng.uniform_pos()) / a0;
    Vector v = hitrun::sample_direction(n, rng);
    double radius = std::pow(rng.uniform(), 1.0 / n);
    Vector x(n + 1);
    x[0] = x0;
    x.tail(n) = (x0 * radius) * v;
    if (pencil.contains(x)) return x;
  }
  throw std::runtime_error("sample_pi0: rejection cap exceeded; body looks malformed");
}

namespace {

double mean_of(const std::vector<double>& v) {
  return pairwise_sum(v) / static_cast<double>(v.size());
}

}  // namespace

StageStats run_stage(const ConvexBody& pencil, double a_i, double a_next,
                     std::vector<Vector>& points, long long walk_steps,
                     const hitrun::WalkConfig& cfg, std::uint64_t seed,
                     int stage, int threads) {
  if (walk_steps < 1) throw std::invalid_argument("run_stage: walk_steps must be >= 1");
  std::size_t k = points.size();
  std::vector<double> v1(k), v2(k);
  hitrun::WalkConfig wc = cfg;
  wc.a = a_i;
  std::uint64_t q0 = pencil.query_count();
  parallel_for(k, threads, [&](std::size_t c) {
    Rng rng(seed, (static_cast<std::uint64_t>(stage + 1) << 32) + c);
    Vector p = points[c];
    for (long long t = 0; t < walk_steps; ++t) p = hitrun::step(pencil, p, wc, rng);
    points[c] = p;
    double v = std::exp((a_i - a_next) * p[0]);
    v1[c] = v;
    v2[c] = v * v;
  });
  StageStats st;
  st.stage = stage;
  st.a = a_i;
  st.samples = static_cast<long long>(k);
  st.ratio = mean_of(v1);
  double m2 = mean_of(v2);
  st.moment_ratio = m2 / (st.ratio * st.ratio);
  st.queries = pencil.query_count() - q0;
  return st;
}

namespace {

// Covariance-shaped directions stand in for the per-stage affine rounding:
// walking K with directions L g / ||L g||, L = T^{1/2}, is the rounded-body
// walk mapped back through the transform, with the target density and the
// telescoping product untouched.
Matrix rounding_transform(const std::vector<Vector>& points, int want,
                          std::vector<std::string>* warnings) {
  std::size_t l = std::min<std::size_t>(points.size(), static_cast<std::size_t>(want));
  std::vector<Vector> sub(points.begin(), points.begin() + l);
  try {
    auto [mean, T] = isotropic_transform(sub);
    (void)mean;
    return sym_sqrt(T);
  } catch (const std::exception& e) {
    if (warnings) warnings->push_back(std::string("rounding skipped: ") + e.what());
    return Matrix();
  }
}

}  // namespace

EstimateReport estimate_pencil_volume(const BodyPtr& pencil,
                                      const CoolingSchedule& schedule,
                                      long long k, long long walk_steps,
                                      std::uint64_t seed, int threads,
                                      bool rounding) {
  if (k < 2) throw std::invalid_argument("estimate_pencil_volume: need k >= 2");
  const ConvexBody& body = *pencil;
  int n = body.dim() - 1;
  auto t0 = std::chrono::steady_clock::now();
  EstimateReport rep;
  rep.seed = seed;
  rep.epsilon = schedule.epsilon;
  rep.samples_per_stage = k;
  rep.walk_steps = walk_steps;
  rep.rounding = rounding;
  rep.threads = threads;
  body.reset_query_count();

  std::vector<Vector> points(k);
  parallel_for(k, threads, [&](std::size_t c) {
    Rng rng(seed, c);
    points[c] = sample_pi0(body, schedule.a[0], rng);
  });

  // Covariance sample count per stage: resolved form of Theta(n ln^5 n).
  int l_round = static_cast<int>(
      std::min(4096.0, std::max(2.0 * (n + 3),
                                4.0 * (n + 1) * std::pow(std::log(n + 1.0), 5))));

  double log_product = log_initial_mass(n, schedule.a[0]);
  hitrun::WalkConfig cfg;
  for (int i = 0; i < schedule.m; ++i) {
    if (rounding && i > 0)
      cfg.dir_transform = rounding_transform(points, l_round, &rep.warnings);
    StageStats st = run_stage(body, schedule.a[i], schedule.a[i + 1], points,
                              walk_steps, cfg, seed, i, threads);
    if (!(st.ratio > 0.0) || !std::isfinite(st.ratio))
      throw std::runtime_error("estimate_pencil_volume: non-finite stage ratio");
    if (st.moment_ratio > 8.0)
      rep.warnings.push_back("stage " + std::to_string(i) +
                             ": second-moment ratio " + std::to_string(st.moment_ratio) + " > 8");
    log_product += std::log(st.ratio);
    rep.stages.push_back(st);
  }
  rep.pencil_volume = std::exp(log_product);
  rep.volume = rep.pencil_volume;
  rep.total_queries = body.query_count();
  rep.wall_time_s = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return rep;
}

double pencil_to_original(const BodyPtr& pencil, double vol_pencil_estimate,
                          double epsilon, std::uint64_t seed,
                          double* xi_hat_out, std::vector<std::string>* warnings,
                          int threads) {
  const auto* pb = geometry::as_pencil(*pencil);
  if (!pb) throw std::invalid_argument("pencil_to_original: not a pencil body");
  if (!(vol_pencil_estimate > 0))
    throw std::invalid_argument("pencil_to_original: invalid pencil volume");
  const ConvexBody& base = *pb->base();
  double two_d = pb->two_d();
  int n = base.dim();

  long long k = static_cast<long long>(std::ceil(32.0 / (epsilon * epsilon)));
  int chains = static_cast<int>(std::min<long long>(64, k));
  long long per_chain = (k + chains - 1) / chains;
  long long burn = 64 + 16LL * n;
  long long thin = 4;

  hitrun::WalkConfig cfg;  // a = 0: uniform target on the base body
  std::vector<double> hits(static_cast<std::size_t>(chains) * per_chain, 0.0);
  parallel_for(chains, threads, [&](std::size_t c) {
    Rng rng(seed, (0xABCDULL << 32) + c);
    Vector p = Vector::Zero(n);
    for (long long t = 0; t < burn; ++t) p = hitrun::step(base, p, cfg, rng);
    for (long long j = 0; j < per_chain; ++j) {
      for (long long t = 0; t < thin; ++t) p = hitrun::step(base, p, cfg, rng);
      double x0 = two_d * rng.uniform();
      hits[c * per_chain + j] = (p.norm() <= x0) ? 1.0 : 0.0;
    }
  });
  double xi = pairwise_sum(hits) / static_cast<double>(hits.size());
  if (xi_hat_out) *xi_hat_out = xi;
  if (xi < 0.4 || xi > 1.1) {
    if (warnings)
      warnings->push_back("xi_hat = " + std::to_string(xi) +
                          " outside [0.4, 1.1]; walk mixing looks suspect");
  }
  if (!(xi > 0)) throw std::runtime_error("pencil_to_original: xi_hat = 0");
  return vol_pencil_estimate / (two_d * xi);
}

std::pair<Vector, Matrix> isotropic_transform(const std::vector<Vector>& pts) {
  if (pts.empty()) throw std::invalid_argument("isotropic_transform: no points");
  int n = static_cast<int>(pts[0].size());
  if (static_cast<int>(pts.size()) < n + 1)
    throw std::invalid_argument("isotropic_transform: need at least n+1 points");
  Vector mean = Vector::Zero(n);
  for (const auto& p : pts) mean += p;
  mean /= static_cast<double>(pts.size());
  Matrix T = Matrix::Zero(n, n);
  for (const auto& p : pts) {
    Vector d = p - mean;
    T += d * d.transpose();
  }
  T /= static_cast<double>(pts.size());
  Eigen::SelfAdjointEigenSolver<Matrix> es(T);
  if (es.eigenvalues().minCoeff() < 1e-10)
    throw std::invalid_argument("isotropic_transform: covariance is rank-deficient (points on a subspace)");
  return {mean, T};
}

Matrix sym_sqrt(const Matrix& T) {
  Eigen::SelfAdjointEigenSolver<Matrix> es(T);
  if (es.eigenvalues().minCoeff() < 1e-10)
    throw std::invalid_argument("sym_sqrt: eigenvalue below 1e-10 floor");
  return es.operatorSqrt();
}

Matrix sym_inv_sqrt(const Matrix& T) {
  Eigen::SelfAdjointEigenSolver<Matrix> es(T);
  if (es.eigenvalues().minCoeff() < 1e-10)
    throw std::invalid_argument("sym_inv_sqrt: eigenvalue below 1e-10 floor");
  return es.operatorInverseSqrt();
}

EstimateReport estimate_volume(const BodyPtr& body, const EstimateConfig& cfg) {
  if (!body) throw std::invalid_argument("estimate_volume: null body");
  auto t0 = std::chrono::steady_clock::now();
  int n = body->dim();
  double r = body->inner_radius();
  double R = body->outer_radius();
  if (!(r > 0))
    throw std::invalid_argument("estimate_volume: body needs inner radius > 0 (recentre it first)");

  CoolingSchedule schedule = build_schedule(n, cfg.epsilon);

  geometry::BodyPtr normalized =
      geometry::apply_affine(body, Matrix::Identity(n, n) / r, Vector::Zero(n));
  double D = R / r;
  geometry::BodyPtr pencil = geometry::make_pencil(normalized, 2.0 * D);

  long long k = cfg.samples_per_stage;
  if (k <= 0) {
    double paper = (512.0 / (cfg.epsilon * cfg.epsilon)) * std::sqrt(double(n)) *
                   std::log(n / cfg.epsilon);
    k = std::max<long long>(64, static_cast<long long>(std::llround(paper * cfg.k_scale)));
  }
  long long walk_steps = cfg.walk_steps > 0 ? cfg.walk_steps : 200LL * n * n;

  EstimateReport rep = estimate_pencil_volume(pencil, schedule, k, walk_steps,
                                              cfg.seed, cfg.threads, cfg.rounding);
  double xi = 0.0;
  double vol_norm = pencil_to_original(pencil, rep.pencil_volume, cfg.epsilon,
                                       cfg.seed, &xi, &rep.warnings, cfg.threads);
  rep.xi_hat = xi;
  // Undo the r-normalization: vol(body) = |det(r I)| vol(body / r) = r^n ...
  rep.scale_factor = std::pow(r, n);
  rep.volume = vol_norm * rep.scale_factor;
  rep.total_queries = pencil->query_count() + body->query_count();
  rep.wall_time_s = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return rep;
}

std::string report_to_json(const EstimateReport& rep, bool with_timing) {
  json j;
  j["schema"] = 1;
  j["volume"] = rep.volume;
  j["pencil_volume"] = rep.pencil_volume;
  j["xi_hat"] = rep.xi_hat;
  j["epsilon"] = rep.epsilon;
  j["seed"] = rep.seed;
  j["total_queries"] = rep.total_queries;
  j["samples_per_stage"] = rep.samples_per_stage;
  j["walk_steps"] = rep.walk_steps;
  j["rounding"] = rep.rounding;
  j["threads"] = rep.threads;
  j["scale_factor"] = rep.scale_factor;
  j["warnings"] = rep.warnings;
  if (with_timing) j["wall_time_s"] = rep.wall_time_s;
  json stages = json::array();
  for (const auto& st : rep.stages) {
    stages.push_back({{"stage", st.stage},
                      {"a", st.a},
                      {"samples", st.samples},
                      {"ratio", st.ratio},
                      {"moment_ratio", st.moment_ratio},
                      {"queries", st.queries}});
  }
  j["stages"] = stages;
  return j.dump(2);
}

std::string report_stage_csv(const EstimateReport& rep) {
  std::ostringstream os;
  os.precision(17);
  os << "stage,a,ratio,moment_ratio,queries\n";
  for (const auto& st : rep.stages)
    os << st.stage << "," << st.a << "," << st.ratio << ","
       << st.moment_ratio << "," << st.queries << "\n";
  return os.str();
}

}  // namespace qvol::annealing
