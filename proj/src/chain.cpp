#include "qvol/chain.hpp"

#include <json.hpp>
#include <algorithm>
#include <cmath>
#include <map>
#include <stdexcept>

#include "qvol/hit_and_run.hpp"
#include "qvol/rng.hpp"

namespace qvol::chain {

using nlohmann::json;

Eigen::VectorXd stationary(const Matrix& P) {
  int d = static_cast<int>(P.rows());
  Eigen::VectorXd pi = Eigen::VectorXd::Constant(d, 1.0 / d);
  for (int it = 0; it < 200000; ++it) {
    Eigen::VectorXd next = P.transpose() * pi;
    next /= next.sum();
    double res = (next - pi).cwiseAbs().maxCoeff();
    pi = next;
    if (res < 1e-12) return pi;
  }
  // Fallback: left eigenvector for eigenvalue 1 from the dense solver.
  Eigen::EigenSolver<Matrix> es(P.transpose());
  int best = 0;
  double bestdist = 1e300;
  for (int i = 0; i < d; ++i) {
    double dist = std::abs(es.eigenvalues()(i) - std::complex<double>(1.0, 0.0));
    if (dist < bestdist) {
      bestdist = dist;
      best = i;
    }
  }
  Eigen::VectorXd v = es.eigenvectors().col(best).real();
  if (v.sum() < 0) v = -v;
  v = v.cwiseMax(0.0);
  return v / v.sum();
}

namespace {

struct Grid1D {
  double lo;
  double eps;
  int count;
  double x(int j) const { return lo + j * eps; }
};

}  // namespace

FiniteChain discretize_1d(double lo, double hi, double eps, double eps_prime,
                          double a) {
  if (!(hi > lo) || !(eps > 0) || !(eps_prime > 0))
    throw std::invalid_argument("discretize_1d: bad interval or spacings");
  if (eps_prime > std::sqrt(eps) + 1e-15)
    throw std::invalid_argument("discretize_1d: need eps_prime <= sqrt(eps) n^{-3/4} (n = 1)");
  int d = static_cast<int>(std::floor((hi - lo) / eps + 1e-9)) + 1;
  if (d > 4096) throw std::invalid_argument("discretize_1d: state count above 4096 cap");
  if (d < 2) throw std::invalid_argument("discretize_1d: fewer than 2 states");

  Grid1D fine{lo, eps, d};
  double coarse = std::sqrt(eps);  // sqrt(eps) n^{1/4} with n = 1
  int dc = static_cast<int>(std::floor((hi - lo) / coarse + 1e-9)) + 1;
  Grid1D cg{lo, coarse, dc};

  double lo_bar = lo - 0.5 * eps;  // half-box extension of the grid
  double hi_bar = fine.x(d - 1) + 0.5 * eps;

  auto snap = [&](double v) -> int {
    // Nearest coarse point in [lo, hi]; ties toward the smaller value.
    int c = static_cast<int>(std::floor((v - lo) / coarse + 0.5));
    if (c > 0 && std::abs((v - lo) - (c - 1) * coarse) <= std::abs((v - lo) - c * coarse) + 1e-15)
      c = c - 1;
    return std::clamp(c, 0, dc - 1);
  };

  // Partition the fine states by their snap target so box edges are not
  // double-assigned (ties go to the smaller coarse index).
  std::vector<std::vector<int>> box(dc);
  for (int j = 0; j < d; ++j) box[snap(fine.x(j))].push_back(j);

  Matrix P = Matrix::Zero(d, d);
  for (int u = 0; u < d; ++u) {
    double xu = fine.x(u);
    // Line set: xu + k eps' within the extended interval, both directions.
    std::vector<double> pts;
    std::vector<double> w;
    double W = 0.0;
    int kmax_pos = static_cast<int>(std::floor((hi_bar - xu) / eps_prime + 1e-12));
    int kmax_neg = static_cast<int>(std::floor((xu - lo_bar) / eps_prime + 1e-12));
    for (int kk = -kmax_neg; kk <= kmax_pos; ++kk) {
      double v = xu + kk * eps_prime;
      double f = std::exp(-a * v);
      pts.push_back(v);
      w.push_back(f);
      W += f;
    }
    for (std::size_t idx = 0; idx < pts.size(); ++idx) {
      int c = snap(pts[idx]);
      const auto& members = box[c];
      if (members.empty()) continue;
      double share = (w[idx] / W) / static_cast<double>(members.size());
      for (int v : members) P(u, v) += share;
    }
    double rs = P.row(u).sum();
    if (!(rs > 0)) throw std::runtime_error("discretize_1d: empty row");
    P.row(u) /= rs;
  }

  FiniteChain ch;
  ch.states.reserve(d);
  for (int j = 0; j < d; ++j) {
    Vector s(1);
    s[0] = fine.x(j);
    ch.states.push_back(s);
  }
  ch.P = std::move(P);
  ch.pi = stationary(ch.P);
  ch.eps = eps;
  ch.eps_prime = eps_prime;
  ch.coarse = coarse;
  ch.a = a;
  return ch;
}

FiniteChain discretize_1d(const geometry::ConvexBody& interval, double eps,
                          double eps_prime, double a) {
  if (interval.dim() != 1)
    throw std::invalid_argument("discretize_1d: body must be one-dimensional");
  hitrun::WalkConfig cfg;
  Vector origin = Vector::Zero(1);
  Vector e1 = Vector::Ones(1);
  auto c = hitrun::chord(interval, origin, e1, cfg);
  return discretize_1d(c.t_minus, c.t_plus, eps, eps_prime, a);
}

FiniteChain discretize_2d_mc(const geometry::ConvexBody& body, double eps,
                             double eps_prime, double a, int samples_per_state,
                             std::uint64_t seed) {
  if (body.dim() != 2) throw std::invalid_argument("discretize_2d_mc: body must be 2D");
  if (samples_per_state < 1)
    throw std::invalid_argument("discretize_2d_mc: samples_per_state must be >= 1");
  const double n14 = std::pow(2.0, 0.25);
  double coarse = std::sqrt(eps) * n14;

  // Fine grid: integer multiples of eps inside the body.
  double R = body.outer_radius();
  int span = static_cast<int>(std::floor(R / eps)) + 1;
  std::vector<Vector> states;
  std::map<std::pair<int, int>, int> index;
  for (int i = -span; i <= span; ++i) {
    for (int j = -span; j <= span; ++j) {
      Vector x(2);
      x << i * eps, j * eps;
      if (body.contains(x)) {
        index[{i, j}] = static_cast<int>(states.size());
        states.push_back(x);
      }
    }
  }
  int d = static_cast<int>(states.size());
  if (d > 1024) throw std::invalid_argument("discretize_2d_mc: state count above 1024 cap");
  if (d < 2) throw std::invalid_argument("discretize_2d_mc: fewer than 2 states");

  auto in_extended = [&](const Vector& x) {
    // x lies in some eps-box of a grid state iff its rounded grid point is one.
    int i = static_cast<int>(std::llround(x[0] / eps));
    int j = static_cast<int>(std::llround(x[1] / eps));
    return index.count({i, j}) > 0;
  };

  // Coarse lattice points inside the body.
  int cspan = static_cast<int>(std::floor(R / coarse)) + 1;
  std::vector<Vector> coarse_pts;
  for (int i = -cspan; i <= cspan; ++i)
    for (int j = -cspan; j <= cspan; ++j) {
      Vector x(2);
      x << i * coarse, j * coarse;
      if (body.contains(x)) coarse_pts.push_back(x);
    }
  if (coarse_pts.empty()) throw std::runtime_error("discretize_2d_mc: empty coarse grid");

  // Fine states inside each coarse box.
  std::vector<std::vector<int>> box(coarse_pts.size());
  for (std::size_t c = 0; c < coarse_pts.size(); ++c)
    for (int v = 0; v < d; ++v)
      if ((states[v] - coarse_pts[c]).cwiseAbs().maxCoeff() <= 0.5 * coarse + 1e-12)
        box[c].push_back(v);

  auto snap_coarse = [&](const Vector& v) -> int {
    int best = -1;
    double bestd = 1e300;
    for (std::size_t c = 0; c < coarse_pts.size(); ++c) {
      double dist = (v - coarse_pts[c]).norm();
      if (dist < bestd - 1e-15 ||
          (dist < bestd + 1e-15 && best >= 0 &&
           std::lexicographical_compare(coarse_pts[c].data(), coarse_pts[c].data() + 2,
                                        coarse_pts[best].data(), coarse_pts[best].data() + 2))) {
        bestd = dist;
        best = static_cast<int>(c);
      }
    }
    return best;
  };

  const int n_dir = 32;  // fixed stratified direction count
  Matrix counts = Matrix::Zero(d, d);
  for (int u = 0; u < d; ++u) {
    Rng rng(seed, static_cast<std::uint64_t>(u));
    const Vector& xu = states[u];
    for (int smp = 0; smp < samples_per_state; ++smp) {
      double theta = 2.0 * M_PI * ((smp % n_dir) + rng.uniform()) / n_dir;
      Vector dir(2);
      dir << std::cos(theta), std::sin(theta);
      // Discretized chord through xu: contiguous eps'-lattice points inside
      // the extended body, both directions.
      std::vector<Vector> line;
      line.push_back(xu);
      for (int sgn : {+1, -1}) {
        for (int kk = 1;; ++kk) {
          Vector v = xu + (sgn * kk * eps_prime) * dir;
          if (!in_extended(v)) break;
          line.push_back(v);
        }
      }
      double W = 0.0;
      std::vector<double> w(line.size());
      for (std::size_t idx = 0; idx < line.size(); ++idx) {
        w[idx] = std::exp(-a * line[idx][0]);
        W += w[idx];
      }
      double target = rng.uniform() * W;
      std::size_t pick = 0;
      double acc = 0.0;
      for (std::size_t idx = 0; idx < line.size(); ++idx) {
        acc += w[idx];
        if (target <= acc) {
          pick = idx;
          break;
        }
      }
      int c = snap_coarse(line[pick]);
      const auto& members = box[c];
      if (members.empty()) {
        counts(u, u) += 1.0;  // nowhere to land; stay put
        continue;
      }
      int v = members[rng.below(static_cast<std::uint32_t>(members.size()))];
      counts(u, v) += 1.0;
    }
    if (counts.row(u).sum() <= counts(u, u) && d > 1 && counts(u, u) == samples_per_state)
      throw std::runtime_error("discretize_2d_mc: state " + std::to_string(u) +
                               " has zero estimated outflow; increase samples_per_state");
  }

  Matrix Phat = counts / static_cast<double>(samples_per_state);

  // Target density on the grid, then detailed-balance symmetrization.
  Eigen::VectorXd target(d);
  for (int v = 0; v < d; ++v) target[v] = std::exp(-a * states[v][0]);
  target /= target.sum();

  Matrix P = Matrix::Zero(d, d);
  for (int x = 0; x < d; ++x)
    for (int y = 0; y < d; ++y)
      P(x, y) = 0.5 * (target[x] * Phat(x, y) + target[y] * Phat(y, x)) / target[x];
  for (int x = 0; x < d; ++x) {
    double rs = P.row(x).sum();
    if (!(rs > 0))
      throw std::runtime_error("discretize_2d_mc: zero outflow after symmetrization");
    P.row(x) /= rs;
  }

  FiniteChain ch;
  ch.states = std::move(states);
  ch.P = std::move(P);
  ch.pi = stationary(ch.P);
  ch.eps = eps;
  ch.eps_prime = eps_prime;
  ch.coarse = coarse;
  ch.a = a;
  return ch;
}

double conductance(const FiniteChain& chain, const std::vector<int>& S) {
  int d = static_cast<int>(chain.P.rows());
  std::vector<char> in(d, 0);
  int count = 0;
  for (int idx : S) {
    if (idx < 0 || idx >= d) throw std::invalid_argument("conductance: index out of range");
    if (!in[idx]) count++;
    in[idx] = 1;
  }
  if (count == 0 || count == d)
    throw std::invalid_argument("conductance: S must be a nonempty proper subset");
  double flow = 0.0, mass = 0.0;
  for (int x = 0; x < d; ++x) {
    if (!in[x]) continue;
    mass += chain.pi[x];
    for (int y = 0; y < d; ++y)
      if (!in[y]) flow += chain.pi[x] * chain.P(x, y);
  }
  return flow / std::min(mass, 1.0 - mass);
}

MinConductance min_conductance(const FiniteChain& chain) {
  int d = static_cast<int>(chain.P.rows());
  MinConductance out;
  if (d <= 20) {
    // Gray-code sweep over all proper subsets containing state 0
    // (conductance is complement-symmetric), incremental cut updates.
    Matrix F = chain.pi.asDiagonal() * chain.P;  // flow matrix
    std::vector<char> in(d, 0);
    in[0] = 1;
    double cut_dir = 0.0;
    for (int y = 1; y < d; ++y) cut_dir += F(0, y);
    double mass = chain.pi[0];
    double best = cut_dir / std::min(mass, 1.0 - mass);
    std::uint32_t best_mask = 0;
    std::uint64_t total = 1ULL << (d - 1);
    std::uint32_t gray_prev = 0;
    for (std::uint64_t g = 1; g < total; ++g) {
      std::uint32_t gray = static_cast<std::uint32_t>(g ^ (g >> 1));
      std::uint32_t diff = gray ^ gray_prev;
      int bit = __builtin_ctz(diff);  // toggled state index bit+1
      int s = bit + 1;
      gray_prev = gray;
      if (!in[s]) {
        in[s] = 1;
        mass += chain.pi[s];
        for (int y = 0; y < d; ++y) {
          if (y == s) continue;
          if (in[y])
            cut_dir -= F(y, s);
          else
            cut_dir += F(s, y);
        }
      } else {
        in[s] = 0;
        mass -= chain.pi[s];
        for (int y = 0; y < d; ++y) {
          if (y == s) continue;
          if (in[y])
            cut_dir += F(y, s);
          else
            cut_dir -= F(s, y);
        }
      }
      double phi = cut_dir / std::min(mass, 1.0 - mass);
      if (phi < best) {
        best = phi;
        best_mask = gray;  // bits 0..d-2 flag states 1..d-1; state 0 always in
      }
    }
    out.phi = best;
    out.exact = true;
    // Decode witness from the mask (bit k corresponds to state k+1).
    out.witness.push_back(0);
    for (int s = 1; s < d; ++s)
      if ((best_mask >> (s - 1)) & 1u) out.witness.push_back(s);
    return out;
  }
  // Spectral lower bound via Cheeger: Phi >= delta / 2.
  Matrix D = discriminant(chain);
  Eigen::SelfAdjointEigenSolver<Matrix> es(D);
  double lambda2 = es.eigenvalues()(static_cast<int>(D.rows()) - 2);
  out.phi = 0.5 * (1.0 - lambda2);
  out.exact = false;
  return out;
}

double mixing_tv(const FiniteChain& chain, const Eigen::VectorXd& sigma0, int k) {
  if (sigma0.size() != chain.P.rows())
    throw std::invalid_argument("mixing_tv: sigma0 dimension mismatch");
  Eigen::VectorXd sigma = sigma0;
  for (int t = 0; t < k; ++t) sigma = chain.P.transpose() * sigma;
  return 0.5 * (sigma - chain.pi).cwiseAbs().sum();
}

double reversibility_residual(const FiniteChain& chain) {
  int d = static_cast<int>(chain.P.rows());
  double worst = 0.0;
  for (int x = 0; x < d; ++x)
    for (int y = 0; y < d; ++y)
      worst = std::max(worst,
                       std::abs(chain.pi[x] * chain.P(x, y) - chain.pi[y] * chain.P(y, x)));
  return worst;
}

Matrix discriminant(const FiniteChain& chain) {
  if (reversibility_residual(chain) > 1e-6)
    throw std::invalid_argument("discriminant: chain is not reversible");
  int d = static_cast<int>(chain.P.rows());
  Matrix D(d, d);
  for (int x = 0; x < d; ++x)
    for (int y = 0; y < d; ++y) D(x, y) = std::sqrt(chain.P(x, y) * chain.P(y, x));
  return D;
}

std::string chain_to_json(const FiniteChain& chain) {
  json j;
  j["schema"] = 1;
  json states = json::array();
  for (const auto& s : chain.states) {
    json pt = json::array();
    for (int i = 0; i < s.size(); ++i) pt.push_back(s[i]);
    states.push_back(pt);
  }
  j["states"] = states;
  int d = static_cast<int>(chain.P.rows());
  std::vector<double> p(static_cast<std::size_t>(d) * d);
  for (int x = 0; x < d; ++x)
    for (int y = 0; y < d; ++y) p[x * d + y] = chain.P(x, y);
  j["P"] = p;
  j["pi"] = std::vector<double>(chain.pi.data(), chain.pi.data() + d);
  j["meta"] = {{"eps", chain.eps},
               {"eps_prime", chain.eps_prime},
               {"coarse", chain.coarse},
               {"a", chain.a}};
  return j.dump(2);
}

FiniteChain chain_from_json(const std::string& text) {
  json j = json::parse(text);
  if (j.value("schema", 1) != 1)
    throw std::invalid_argument("chain file: unsupported schema version");
  FiniteChain ch;
  for (const auto& pt : j.at("states")) {
    Vector v(pt.size());
    for (std::size_t i = 0; i < pt.size(); ++i) v[static_cast<int>(i)] = pt[i].get<double>();
    ch.states.push_back(v);
  }
  int d = static_cast<int>(ch.states.size());
  auto p = j.at("P").get<std::vector<double>>();
  if (p.size() != static_cast<std::size_t>(d) * d)
    throw std::invalid_argument("chain file: P size mismatch");
  ch.P.resize(d, d);
  for (int x = 0; x < d; ++x)
    for (int y = 0; y < d; ++y) ch.P(x, y) = p[x * d + y];
  if (j.contains("pi")) {
    auto pv = j.at("pi").get<std::vector<double>>();
    if (static_cast<int>(pv.size()) != d)
      throw std::invalid_argument("chain file: pi size mismatch");
    ch.pi = Eigen::Map<Eigen::VectorXd>(pv.data(), d);
  } else {
    ch.pi = stationary(ch.P);
  }
  if (j.contains("meta")) {
    const auto& m = j.at("meta");
    ch.eps = m.value("eps", 0.0);
    ch.eps_prime = m.value("eps_prime", 0.0);
    ch.coarse = m.value("coarse", 0.0);
    ch.a = m.value("a", 0.0);
  }
  return ch;
}

}  // namespace qvol::chain
