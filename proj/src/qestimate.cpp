#include "qvol/qestimate.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

namespace qvol::qestimate {

namespace {

constexpr std::complex<double> kI{0.0, 1.0};
const std::complex<double> kOmega = std::exp(kI * (M_PI / 3.0));

bool is_pow2(int m) { return m > 0 && (m & (m - 1)) == 0; }

void check_projector(const CMat& P) {
  if (P.rows() != P.cols()) throw std::invalid_argument("projector must be square");
  double res = (P * P - P).cwiseAbs().maxCoeff();
  double herm = (P - P.adjoint()).cwiseAbs().maxCoeff();
  if (res > 1e-10 || herm > 1e-10)
    throw std::invalid_argument("P1 is not a projector");
}

// --- multi-register statevector helpers --------------------------------

std::vector<long long> strides_of(const std::vector<int>& dims) {
  std::vector<long long> st(dims.size());
  long long acc = 1;
  for (int r = static_cast<int>(dims.size()) - 1; r >= 0; --r) {
    st[r] = acc;
    acc *= dims[r];
  }
  return st;
}

long long total_of(const std::vector<int>& dims) {
  long long t = 1;
  for (int d : dims) t *= d;
  return t;
}

void apply_matrix(CVec& state, const std::vector<int>& dims, int reg,
                  const CMat& op) {
  auto st = strides_of(dims);
  long long total = state.size();
  int D = dims[reg];
  long long S = st[reg];
  long long blocks = total / (D * S);
  CVec buf(D);
  for (long long b = 0; b < blocks; ++b) {
    long long base = b * D * S;
    for (long long s = 0; s < S; ++s) {
      for (int k = 0; k < D; ++k) buf(k) = state(base + k * S + s);
      CVec out = op * buf;
      for (int k = 0; k < D; ++k) state(base + k * S + s) = out(k);
    }
  }
}

// Applies powers[j] to `target` on the subspace where register `ctrl`
// reads j.
void apply_ctrl_power(CVec& state, const std::vector<int>& dims, int ctrl,
                      int target, const std::vector<CMat>& powers) {
  auto st = strides_of(dims);
  long long total = state.size();
  int D = dims[target];
  long long S = st[target];
  long long blocks = total / (D * S);
  CVec buf(D);
  for (long long b = 0; b < blocks; ++b) {
    long long base = b * D * S;
    for (long long s = 0; s < S; ++s) {
      long long idx0 = base + s;
      int j = static_cast<int>((idx0 / st[ctrl]) % dims[ctrl]);
      const CMat& op = powers[j];
      for (int k = 0; k < D; ++k) buf(k) = state(base + k * S + s);
      CVec out = op * buf;
      for (int k = 0; k < D; ++k) state(base + k * S + s) = out(k);
    }
  }
}

std::vector<double> born_probs(const CVec& state, const std::vector<int>& dims,
                               int reg) {
  auto st = strides_of(dims);
  std::vector<double> probs(dims[reg], 0.0);
  for (long long i = 0; i < state.size(); ++i) {
    int v = static_cast<int>((i / st[reg]) % dims[reg]);
    probs[v] += std::norm(state(i));
  }
  return probs;
}

double project_outcome(CVec& state, const std::vector<int>& dims, int reg,
                       int outcome) {
  auto st = strides_of(dims);
  double mass = 0.0;
  for (long long i = 0; i < state.size(); ++i) {
    int v = static_cast<int>((i / st[reg]) % dims[reg]);
    if (v != outcome)
      state(i) = 0.0;
    else
      mass += std::norm(state(i));
  }
  if (mass > 0) state /= std::sqrt(mass);
  return mass;
}

CMat dft_matrix(int M) {
  CMat F(M, M);
  for (int j = 0; j < M; ++j)
    for (int k = 0; k < M; ++k)
      F(j, k) = std::exp(kI * (2.0 * M_PI * j * k / M)) / std::sqrt(double(M));
  return F;
}

int canonical_index(int y, int M) { return std::min(y, M - y); }

int sample_from(const std::vector<double>& probs, Rng& rng) {
  double u = rng.uniform();
  double acc = 0.0;
  for (std::size_t i = 0; i < probs.size(); ++i) {
    acc += probs[i];
    if (u <= acc) return static_cast<int>(i);
  }
  return static_cast<int>(probs.size()) - 1;
}

}  // namespace

AmplitudeTask make_bernoulli_task(double p, int M) {
  if (p < 0.0 || p > 1.0) throw std::invalid_argument("make_bernoulli_task: p in [0,1]");
  if (!is_pow2(M)) throw std::invalid_argument("make_bernoulli_task: M must be a power of two");
  double c = std::sqrt(1.0 - p), s = std::sqrt(p);
  AmplitudeTask t;
  t.U = CMat::Zero(2, 2);
  t.U << c, -s, s, c;
  t.P1 = CMat::Zero(2, 2);
  t.P1(1, 1) = 1.0;
  t.p = p;
  t.M = M;
  return t;
}

CMat grover_iterate(const CMat& U, const CMat& P1) {
  if (U.rows() != U.cols() || U.rows() != P1.rows())
    throw std::invalid_argument("grover_iterate: dimension mismatch");
  check_projector(P1);
  int d = static_cast<int>(U.rows());
  CMat I = CMat::Identity(d, d);
  CMat S0 = -I;
  S0(0, 0) = 1.0;  // 2|0><0| - I
  CMat S1 = 2.0 * P1 - I;
  return -U * S0 * U.adjoint() * S1;
}

double ae_error_bound(double p, int M) {
  return 2.0 * M_PI * std::sqrt(p * (1.0 - p)) / M + M_PI * M_PI / (double(M) * M);
}

CVec ae_pre_measurement_state(const AmplitudeTask& task) {
  if (!is_pow2(task.M)) throw std::invalid_argument("amplitude estimation: M must be a power of two");
  int ds = static_cast<int>(task.U.rows());
  int M = task.M;
  CMat Q = grover_iterate(task.U, task.P1);
  CVec psi = task.U.col(0);
  // state after controlled powers: sum_j |j> Q^j psi / sqrt(M)
  std::vector<CVec> phi(M);
  phi[0] = psi;
  for (int j = 1; j < M; ++j) phi[j] = Q * phi[j - 1];
  CVec out = CVec::Zero(static_cast<long long>(M) * ds);
  // inverse QFT on the phase register
  for (int y = 0; y < M; ++y) {
    CVec acc = CVec::Zero(ds);
    for (int j = 0; j < M; ++j)
      acc += std::exp(-kI * (2.0 * M_PI * j * y / M)) * phi[j];
    acc /= double(M);
    for (int t = 0; t < ds; ++t) out(static_cast<long long>(y) * ds + t) = acc(t);
  }
  return out;
}

std::vector<double> ae_distribution(const AmplitudeTask& task) {
  CVec st = ae_pre_measurement_state(task);
  int ds = static_cast<int>(task.U.rows());
  std::vector<double> probs(task.M, 0.0);
  for (int y = 0; y < task.M; ++y)
    for (int t = 0; t < ds; ++t)
      probs[y] += std::norm(st(static_cast<long long>(y) * ds + t));
  return probs;
}

AeResult amplitude_estimate(const AmplitudeTask& task, Rng& rng) {
  std::vector<double> probs = ae_distribution(task);
  int y = sample_from(probs, rng);
  AeResult r;
  r.outcome = y;
  r.theta_tilde = (y <= task.M / 2) ? M_PI * y / task.M : M_PI * (y - task.M) / task.M;
  double s = std::sin(M_PI * y / task.M);
  r.p_tilde = s * s;
  return r;
}

AeResult amplitude_estimate(const AmplitudeTask& task, std::uint64_t seed) {
  Rng rng(seed);
  return amplitude_estimate(task, rng);
}

CMat exact_reflection(const CVec& v) {
  double n = v.norm();
  if (!(n > 0)) throw std::invalid_argument("exact_reflection: zero vector");
  CVec u = v / n;
  int d = static_cast<int>(v.size());
  return CMat::Identity(d, d) + (kOmega - 1.0) * (u * u.adjoint());
}

namespace {

// U_m recursion applied to a vector: U_{m+1} = U_m R_psi U_m^dag R_phi U_m.
CVec apply_um(int m, bool dagger, const CVec& v, const CMat& R_psi,
              const CMat& R_phi, const CMat& R_psi_dag, const CMat& R_phi_dag,
              long long& uses) {
  if (m == 0) return v;
  if (!dagger) {
    CVec x = apply_um(m - 1, false, v, R_psi, R_phi, R_psi_dag, R_phi_dag, uses);
    ++uses;
    x = R_phi * x;
    x = apply_um(m - 1, true, x, R_psi, R_phi, R_psi_dag, R_phi_dag, uses);
    ++uses;
    x = R_psi * x;
    return apply_um(m - 1, false, x, R_psi, R_phi, R_psi_dag, R_phi_dag, uses);
  }
  // (U_m R_psi U_m^dag R_phi U_m)^dag = U_m^dag R_phi^dag U_m R_psi^dag U_m^dag
  CVec x = apply_um(m - 1, true, v, R_psi, R_phi, R_psi_dag, R_phi_dag, uses);
  ++uses;
  x = R_psi_dag * x;
  x = apply_um(m - 1, false, x, R_psi, R_phi, R_psi_dag, R_phi_dag, uses);
  ++uses;
  x = R_phi_dag * x;
  return apply_um(m - 1, true, x, R_psi, R_phi, R_psi_dag, R_phi_dag, uses);
}

}  // namespace

CVec pi3_amplify(const CVec& psi, const CMat& R_psi, const CMat& R_phi, int m,
                 long long* reflection_uses) {
  if (m < 0) throw std::invalid_argument("pi3_amplify: depth must be >= 0");
  CMat rpd = R_psi.adjoint();
  CMat rfd = R_phi.adjoint();
  long long uses = 0;
  CVec out = apply_um(m, false, psi, R_psi, R_phi, rpd, rfd, uses);
  if (reflection_uses) *reflection_uses = uses;
  return out;
}

CVec embed_system(const CVec& psi, int total_dim) {
  CVec out = CVec::Zero(total_dim);
  out.head(psi.size()) = psi;
  return out;
}

PhaseReflection reflection_via_phase_estimation(const CMat& W, double delta_turns,
                                                double eps2) {
  if (W.rows() != W.cols()) throw std::invalid_argument("reflection: W must be square");
  if (!(delta_turns > 0) || delta_turns > 1.0)
    throw std::invalid_argument("reflection: Delta must be in (0, 1] turns");
  if (!(eps2 > 0) || eps2 >= 0.5)
    throw std::invalid_argument("reflection: eps2 must be in (0, 1/2)");
  int dW = static_cast<int>(W.rows());
  int a = std::max(1, static_cast<int>(std::ceil(std::log2(1.0 / delta_turns))));
  int c = std::max(1, static_cast<int>(std::ceil(std::log2(1.0 / std::sqrt(eps2)))));
  long long anc = 1LL << a;
  long long total = dW;
  for (int i = 0; i < c; ++i) {
    total *= anc;
    if (total > 4096)
      throw std::invalid_argument("reflection: ancilla dimension overflow (total > 4096)");
  }

  std::vector<int> dims(c + 1, static_cast<int>(anc));
  dims[c] = dW;

  // Hadamard transform on a qubits == real DFT over Z_2^a.
  CMat had1(2, 2);
  had1 << 1, 1, 1, -1;
  had1 /= std::sqrt(2.0);
  CMat had = CMat::Ones(1, 1);
  for (int i = 0; i < a; ++i) {
    CMat next(had.rows() * 2, had.cols() * 2);
    next.topLeftCorner(had.rows(), had.cols()) = had1(0, 0) * had;
    next.topRightCorner(had.rows(), had.cols()) = had1(0, 1) * had;
    next.bottomLeftCorner(had.rows(), had.cols()) = had1(1, 0) * had;
    next.bottomRightCorner(had.rows(), had.cols()) = had1(1, 1) * had;
    had = next;
  }
  CMat qft_inv = dft_matrix(static_cast<int>(anc)).adjoint();

  std::vector<CMat> wpow(anc);
  wpow[0] = CMat::Identity(dW, dW);
  for (long long m = 1; m < anc; ++m) wpow[m] = wpow[m - 1] * W;
  std::vector<CMat> wpow_dag(anc);
  for (long long m = 0; m < anc; ++m) wpow_dag[m] = wpow[m].adjoint();

  auto apply_V = [&](CVec& st, bool dagger) {
    if (!dagger) {
      for (int i = 0; i < c; ++i) {
        apply_matrix(st, dims, i, had);
        apply_ctrl_power(st, dims, i, c, wpow);
        apply_matrix(st, dims, i, qft_inv);
      }
    } else {
      for (int i = c - 1; i >= 0; --i) {
        apply_matrix(st, dims, i, qft_inv.adjoint());
        apply_ctrl_power(st, dims, i, c, wpow_dag);
        apply_matrix(st, dims, i, had.adjoint());
      }
    }
  };

  auto strides = strides_of(dims);
  PhaseReflection out;
  out.a = a;
  out.c = c;
  out.dim = static_cast<int>(total);
  out.op = CMat::Zero(total, total);
  for (long long col = 0; col < total; ++col) {
    CVec st = CVec::Zero(total);
    st(col) = 1.0;
    apply_V(st, false);
    // Q_omega: phase omega on the all-ancillas-zero slice.
    for (long long i = 0; i < total; ++i) {
      bool zero = true;
      for (int r = 0; r < c; ++r)
        if ((i / strides[r]) % dims[r] != 0) {
          zero = false;
          break;
        }
      if (zero) st(i) *= kOmega;
    }
    apply_V(st, true);
    out.op.col(col) = st;
  }
  return out;
}

CMat sampler_unitary(const DiscreteRV& rv) {
  int d = static_cast<int>(rv.probs.size());
  if (d == 0 || rv.values.size() != rv.probs.size())
    throw std::invalid_argument("sampler_unitary: values/probs mismatch");
  double sum = 0.0;
  for (double p : rv.probs) {
    if (p < 0) throw std::invalid_argument("sampler_unitary: negative probability");
    sum += p;
  }
  if (std::abs(sum - 1.0) > 1e-9)
    throw std::invalid_argument("sampler_unitary: probabilities must sum to 1");
  CMat U = CMat::Zero(d, d);
  for (int i = 0; i < d; ++i) U(i, 0) = std::sqrt(rv.probs[i]);
  int col = 1;
  for (int cand = 0; cand < d && col < d; ++cand) {
    CVec v = CVec::Zero(d);
    v(cand) = 1.0;
    for (int pass = 0; pass < 2; ++pass)
      for (int cc = 0; cc < col; ++cc) v -= U.col(cc).dot(v) * U.col(cc);
    double nn = v.norm();
    if (nn < 1e-8) continue;
    U.col(col) = v / nn;
    ++col;
  }
  if (col != d) throw std::runtime_error("sampler_unitary: completion failed");
  return U;
}

CMat payload_rotation(const DiscreteRV& rv, double L, double H) {
  if (!(H > 0)) throw std::invalid_argument("payload_rotation: H must be > 0");
  int d = static_cast<int>(rv.values.size());
  CMat R = CMat::Identity(2 * d, 2 * d);
  for (int i = 0; i < d; ++i) {
    double x = rv.values[i];
    if (x < L || x >= H) continue;
    double s = std::sqrt(std::clamp(x / H, 0.0, 1.0));
    double cda = std::sqrt(1.0 - s * s);
    R(2 * i, 2 * i) = cda;
    R(2 * i, 2 * i + 1) = -s;
    R(2 * i + 1, 2 * i) = s;
    R(2 * i + 1, 2 * i + 1) = cda;
  }
  return R;
}

double basic_est(const DiscreteRV& rv, double L, double H, int M,
                 int repetitions, Rng& rng) {
  if (repetitions < 1 || repetitions % 2 == 0)
    throw std::invalid_argument("basic_est: repetitions must be odd");
  int d = static_cast<int>(rv.values.size());
  CMat U = sampler_unitary(rv);
  CMat Ufull = CMat::Zero(2 * d, 2 * d);
  for (int i = 0; i < d; ++i)
    for (int j = 0; j < d; ++j) {
      Ufull(2 * i, 2 * j) = U(i, j);
      Ufull(2 * i + 1, 2 * j + 1) = U(i, j);
    }
  CMat V = payload_rotation(rv, L, H) * Ufull;
  CMat P1 = CMat::Zero(2 * d, 2 * d);
  for (int i = 0; i < d; ++i) P1(2 * i + 1, 2 * i + 1) = 1.0;

  AmplitudeTask task;
  task.U = V;
  task.P1 = P1;
  task.M = M;
  task.p = (P1 * V.col(0)).squaredNorm();

  std::vector<double> est(repetitions);
  for (int r = 0; r < repetitions; ++r) est[r] = amplitude_estimate(task, rng).p_tilde;
  std::nth_element(est.begin(), est.begin() + repetitions / 2, est.end());
  return est[repetitions / 2];
}

namespace {

int pow2_at_least(double x) {
  int m = 8;
  while (m < x && m < (1 << 24)) m <<= 1;
  return m;
}

}  // namespace

double quantum_chebyshev_mean(const DiscreteRV& rv, double delta_u, double H,
                              double eps, double delta, Rng& rng,
                              ChebyshevTrace* trace) {
  if (!(delta_u >= 1.0)) throw std::invalid_argument("chebyshev_mean: Delta_U must be >= 1");
  if (!(eps > 0) || !(eps < 1) || !(delta > 0) || !(delta < 1))
    throw std::invalid_argument("chebyshev_mean: eps, delta must be in (0,1)");
  if (!(H > 0)) throw std::invalid_argument("chebyshev_mean: H must be > 0");

  // Hoeffding with gap 8/pi^2 - 1/2 per estimate.
  int reps = 2 * static_cast<int>(std::ceil(9.0 * std::log(1.0 / delta))) + 1;
  int M_search = pow2_at_least(8.0 * M_PI * delta_u);
  if (trace) {
    trace->repetitions = reps;
    trace->M_search = M_search;
  }

  double b = H;
  double p_b = 0.0;
  bool found = false;
  for (int level = 0; level < 64; ++level) {
    DiscreteRV truncated = rv;  // payload weight x/b for x <= b, else 0
    for (std::size_t i = 0; i < truncated.values.size(); ++i)
      if (truncated.values[i] > b) truncated.values[i] = 0.0;
    double est = basic_est(truncated, 0.0, b, M_search, reps, rng);
    if (trace) {
      trace->levels.push_back(b);
      trace->estimates.push_back(est);
    }
    if (est > 0.0) {
      p_b = est;
      found = true;
      break;
    }
    b *= 0.5;
  }
  if (!found)
    throw std::runtime_error(
        "chebyshev_mean: truncation search exhausted without a nonzero estimate "
        "(Delta_U bound looks violated)");

  // Refine at the located level with M sized for relative error eps.
  double eps_abs = eps * p_b;
  int M_refine = pow2_at_least(
      2.0 * M_PI * (2.0 * std::sqrt(p_b) / eps_abs + 1.0 / std::sqrt(eps_abs)));
  if (trace) trace->M_refine = M_refine;
  DiscreteRV truncated = rv;
  for (std::size_t i = 0; i < truncated.values.size(); ++i)
    if (truncated.values[i] > b) truncated.values[i] = 0.0;
  double p_final = basic_est(truncated, 0.0, b, M_refine, reps, rng);
  return b * p_final;
}

// --- nondestructive BasicEst --------------------------------------------

namespace {

struct NondesCircuit {
  std::vector<int> dims;  // [phase, sys] x s, then median
  int M;
  int ds;
  int s;
  std::vector<CMat> qpow, qpow_dag;
  CMat qft, qft_inv;
  CVec initial;

  explicit NondesCircuit(const AmplitudeTask& task, int s_) {
    if (s_ < 1 || s_ % 2 == 0)
      throw std::invalid_argument("nondestructive_estimate: s must be odd");
    if (!is_pow2(task.M)) throw std::invalid_argument("nondestructive_estimate: M must be a power of two");
    M = task.M;
    ds = static_cast<int>(task.U.rows());
    s = s_;
    double logdim = s * (std::log2(double(M)) + std::log2(double(ds))) + std::log2(double(M));
    if (logdim > 21.5)
      throw std::invalid_argument("nondestructive_estimate: (M ds)^s M exceeds the dimension cap");
    for (int b = 0; b < s; ++b) {
      dims.push_back(M);
      dims.push_back(ds);
    }
    dims.push_back(M);

    CMat Q = grover_iterate(task.U, task.P1);
    qpow.resize(M);
    qpow[0] = CMat::Identity(ds, ds);
    for (int j = 1; j < M; ++j) qpow[j] = qpow[j - 1] * Q;
    qpow_dag.resize(M);
    for (int j = 0; j < M; ++j) qpow_dag[j] = qpow[j].adjoint();
    qft = dft_matrix(M);
    qft_inv = qft.adjoint();

    long long total = total_of(dims);
    initial = CVec::Zero(total);
    CVec psi = task.U.col(0);
    // blocks start as |0>_phase (x) psi, median register |0>
    std::vector<int> sys(s, 0);
    auto strides = strides_of(dims);
    for (;;) {
      long long idx = 0;
      std::complex<double> amp = 1.0;
      for (int b = 0; b < s; ++b) {
        idx += static_cast<long long>(sys[b]) * strides[2 * b + 1];
        amp *= psi(sys[b]);
      }
      initial(idx) = amp;
      int carry = s - 1;
      while (carry >= 0 && ++sys[carry] == ds) sys[carry--] = 0;
      if (carry < 0) break;
    }
  }

  void median_shift(CVec& st, int sign) const {
    auto strides = strides_of(dims);
    long long total = st.size();
    CVec out = CVec::Zero(total);
    int med_reg = 2 * s;
    for (long long i = 0; i < total; ++i) {
      if (st(i) == std::complex<double>(0.0, 0.0)) continue;
      std::vector<int> canon(s);
      for (int b = 0; b < s; ++b) {
        int y = static_cast<int>((i / strides[2 * b]) % M);
        canon[b] = canonical_index(y, M);
      }
      std::nth_element(canon.begin(), canon.begin() + s / 2, canon.end());
      int med = canon[s / 2];
      int m = static_cast<int>((i / strides[med_reg]) % M);
      int m2 = ((m + sign * med) % M + M) % M;
      long long j = i + static_cast<long long>(m2 - m) * strides[med_reg];
      out(j) = st(i);
    }
    st = std::move(out);
  }

  void forward(CVec& st) const {
    for (int b = 0; b < s; ++b) {
      apply_matrix(st, dims, 2 * b, qft);
      apply_ctrl_power(st, dims, 2 * b, 2 * b + 1, qpow);
      apply_matrix(st, dims, 2 * b, qft_inv);
    }
    median_shift(st, +1);
  }

  void inverse(CVec& st) const {
    median_shift(st, -1);
    for (int b = s - 1; b >= 0; --b) {
      apply_matrix(st, dims, 2 * b, qft);
      apply_ctrl_power(st, dims, 2 * b, 2 * b + 1, qpow_dag);
      apply_matrix(st, dims, 2 * b, qft_inv);
    }
  }
};

}  // namespace

std::vector<NondesOutcome> nondes_outcome_table(const AmplitudeTask& task, int s) {
  NondesCircuit circ(task, s);
  CVec st = circ.initial;
  circ.forward(st);
  int med_reg = 2 * s;
  std::vector<double> probs = born_probs(st, circ.dims, med_reg);
  std::vector<NondesOutcome> table;
  for (int k = 0; k < circ.M; ++k) {
    if (probs[k] < 1e-300) continue;
    CVec post = st;
    project_outcome(post, circ.dims, med_reg, k);
    circ.inverse(post);
    NondesOutcome row;
    row.outcome = k;
    row.prob = probs[k];
    double sn = std::sin(M_PI * k / circ.M);
    row.estimate = sn * sn;
    row.fidelity = std::norm(circ.initial.dot(post));
    table.push_back(row);
  }
  return table;
}

NondesResult nondestructive_estimate(const AmplitudeTask& task, int s, Rng& rng) {
  NondesCircuit circ(task, s);
  CVec st = circ.initial;
  circ.forward(st);
  int med_reg = 2 * s;
  std::vector<double> probs = born_probs(st, circ.dims, med_reg);
  int k = sample_from(probs, rng);
  double prob = project_outcome(st, circ.dims, med_reg, k);
  circ.inverse(st);
  NondesResult res;
  res.outcome = k;
  res.outcome_prob = prob;
  double sn = std::sin(M_PI * k / circ.M);
  res.estimate = sn * sn;
  res.fidelity = std::norm(circ.initial.dot(st));
  res.state = std::move(st);
  return res;
}

NondesResult nondestructive_estimate(const AmplitudeTask& task, int s,
                                     std::uint64_t seed) {
  Rng rng(seed);
  return nondestructive_estimate(task, s, rng);
}

double nondes_uncompute_identity_error(const AmplitudeTask& task, int s) {
  NondesCircuit circ(task, s);
  CVec st = circ.initial;
  circ.forward(st);
  circ.inverse(st);
  return (st - circ.initial).cwiseAbs().maxCoeff();
}

CVec attach_sin2_payload(const CVec& phase_state) {
  int M = static_cast<int>(phase_state.size());
  CVec joint = CVec::Zero(static_cast<long long>(M) * M);
  for (int y = 0; y < M; ++y)
    joint(static_cast<long long>(y) * M + canonical_index(y, M)) = phase_state(y);
  return joint;
}

}  // namespace qvol::qestimate
