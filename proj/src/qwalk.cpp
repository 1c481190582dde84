#include "qvol/qwalk.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace qvol::qwalk {

namespace {

void check_cap(int d) {
  if (static_cast<long long>(d) * d > 16384)
    throw std::invalid_argument("qwalk: dimension cap d^2 <= 16384 exceeded");
}

}  // namespace

CMat swap_operator(int d) {
  check_cap(d);
  CMat S = CMat::Zero(d * d, d * d);
  for (int x = 0; x < d; ++x)
    for (int y = 0; y < d; ++y) S(y * d + x, x * d + y) = 1.0;
  return S;
}

CMat build_U(const FiniteChain& chain) {
  int d = static_cast<int>(chain.P.rows());
  check_cap(d);
  CMat U = CMat::Zero(d * d, d * d);
  for (int x = 0; x < d; ++x) {
    // Block B_x: column 0 is sqrt(p_x.), the rest completed by Gram-Schmidt
    // over the standard basis with one re-orthogonalization pass.
    CMat B = CMat::Zero(d, d);
    for (int y = 0; y < d; ++y) B(y, 0) = std::sqrt(chain.P(x, y));
    int col = 1;
    for (int cand = 0; cand < d && col < d; ++cand) {
      CVec v = CVec::Zero(d);
      v(cand) = 1.0;
      for (int pass = 0; pass < 2; ++pass)
        for (int c = 0; c < col; ++c) v -= B.col(c).dot(v) * B.col(c);
      double norm = v.norm();
      if (norm < 1e-8) continue;
      B.col(col) = v / norm;
      ++col;
    }
    if (col != d) throw std::runtime_error("build_U: block completion failed");
    for (int j = 0; j < d; ++j)
      for (int y = 0; y < d; ++y) U(x * d + y, x * d + j) = B(y, j);
  }
  return U;
}

CMat isometry_T(const FiniteChain& chain) {
  int d = static_cast<int>(chain.P.rows());
  check_cap(d);
  CMat T = CMat::Zero(d * d, d);
  for (int x = 0; x < d; ++x)
    for (int y = 0; y < d; ++y) T(x * d + y, x) = std::sqrt(chain.P(x, y));
  return T;
}

CMat projector(const FiniteChain& chain) {
  CMat T = isometry_T(chain);
  return T * T.adjoint();
}

CMat build_walk(const FiniteChain& chain) {
  int d = static_cast<int>(chain.P.rows());
  CMat Pi = projector(chain);
  CMat refl = 2.0 * Pi - CMat::Identity(d * d, d * d);
  return swap_operator(d) * refl;
}

CVec stationary_walk_state(const FiniteChain& chain) {
  int d = static_cast<int>(chain.P.rows());
  check_cap(d);
  CVec v = CVec::Zero(d * d);
  for (int x = 0; x < d; ++x)
    for (int y = 0; y < d; ++y)
      v(x * d + y) = std::sqrt(chain.pi[x] * chain.P(x, y));
  double norm = v.norm();
  if (!(norm > 0)) throw std::runtime_error("stationary_walk_state: zero vector");
  return v / norm;
}

double phase_gap(const Matrix& D) {
  Eigen::SelfAdjointEigenSolver<Matrix> es(D);
  int d = static_cast<int>(D.rows());
  if (d < 2) throw std::invalid_argument("phase_gap: need at least 2 states");
  double l2 = std::clamp(es.eigenvalues()(d - 2), -1.0, 1.0);
  return std::acos(l2);
}

SpectrumReport verify_spectrum(const CMat& W, const Matrix& D, double tol) {
  int d = static_cast<int>(D.rows());
  SpectrumReport rep;
  Eigen::SelfAdjointEigenSolver<Matrix> esD(D);
  for (int i = 0; i < d; ++i) rep.eigs_D.push_back(esD.eigenvalues()(i));
  rep.phase_gap = phase_gap(D);

  Eigen::ComplexEigenSolver<CMat> esW(W, /*computeEigenvectors=*/false);
  std::vector<std::complex<double>> ws(esW.eigenvalues().data(),
                                       esW.eigenvalues().data() + esW.eigenvalues().size());
  rep.eigs_W = ws;

  // Predicted walk-subspace multiset: lambda +- i sqrt(1 - lambda^2) per
  // discriminant eigenvalue, collapsing to a single +-1 when |lambda| = 1
  // (the pair {T v, S T v} is then one-dimensional).
  std::vector<std::complex<double>> predicted;
  for (double l : rep.eigs_D) {
    double lc = std::clamp(l, -1.0, 1.0);
    double s = std::sqrt(std::max(0.0, 1.0 - lc * lc));
    predicted.emplace_back(lc, s);
    if (1.0 - std::abs(lc) > 1e-12) predicted.emplace_back(lc, -s);
  }

  // Greedy nearest-pairing: each predicted value consumes its closest
  // remaining W eigenvalue; leftovers must sit at +-1.
  std::vector<char> used(ws.size(), 0);
  double worst = 0.0;
  std::sort(predicted.begin(), predicted.end(),
            [](const std::complex<double>& a, const std::complex<double>& b) {
              return std::arg(a) < std::arg(b);
            });
  for (const auto& pv : predicted) {
    int best = -1;
    double bestd = 1e300;
    for (std::size_t i = 0; i < ws.size(); ++i) {
      if (used[i]) continue;
      double dist = std::abs(ws[i] - pv);
      if (dist < bestd) {
        bestd = dist;
        best = static_cast<int>(i);
      }
    }
    if (best < 0) throw std::runtime_error("verify_spectrum: ran out of eigenvalues");
    used[best] = 1;
    worst = std::max(worst, bestd);
  }
  for (std::size_t i = 0; i < ws.size(); ++i) {
    if (used[i]) continue;
    double dist = std::min(std::abs(ws[i] - 1.0), std::abs(ws[i] + 1.0));
    worst = std::max(worst, dist);
  }
  rep.max_mismatch = worst;
  rep.pass = worst < tol;
  return rep;
}

SpectrumReport verify_spectrum(const FiniteChain& chain, double tol) {
  return verify_spectrum(build_walk(chain), chain::discriminant(chain), tol);
}

CVec grover_rudolph_prepare(const std::vector<double>& probs) {
  std::size_t n = probs.size();
  if (n == 0 || (n & (n - 1)) != 0)
    throw std::invalid_argument("grover_rudolph_prepare: size must be a power of two");
  double sum = 0.0;
  for (double p : probs) {
    if (p < 0) throw std::invalid_argument("grover_rudolph_prepare: negative probability");
    sum += p;
  }
  if (std::abs(sum - 1.0) > 1e-9)
    throw std::invalid_argument("grover_rudolph_prepare: probabilities must sum to 1");

  // Prefix masses per level; level t splits each of 2^t cells in half and
  // rotates the amplitude by the conditional left/right weight.
  std::vector<double> mass(probs.begin(), probs.end());
  std::vector<std::vector<double>> levels;  // levels[t][cell], coarse to fine
  while (mass.size() > 1) {
    levels.push_back(mass);
    std::vector<double> up(mass.size() / 2);
    for (std::size_t i = 0; i < up.size(); ++i) up[i] = mass[2 * i] + mass[2 * i + 1];
    mass = std::move(up);
  }
  std::reverse(levels.begin(), levels.end());

  CVec state = CVec::Ones(1);
  for (const auto& level : levels) {
    CVec next = CVec::Zero(static_cast<int>(level.size()));
    for (int cell = 0; cell < static_cast<int>(level.size() / 2); ++cell) {
      double total = level[2 * cell] + level[2 * cell + 1];
      double left = total > 0 ? level[2 * cell] / total : 1.0;
      next(2 * cell) = state(cell) * std::sqrt(left);
      next(2 * cell + 1) = state(cell) * std::sqrt(1.0 - left);
    }
    state = std::move(next);
  }
  return state;
}

std::pair<double, double> box_muller(double xi1, double xi2, double delta) {
  if (!(xi1 > 0.0) || xi1 > 1.0)
    throw std::invalid_argument("box_muller: xi1 must be in (0, 1]");
  double rad = std::sqrt(-2.0 * delta * delta * std::log(xi1));
  return {rad * std::cos(2.0 * M_PI * xi2), rad * std::sin(2.0 * M_PI * xi2)};
}

}  // namespace qvol::qwalk
