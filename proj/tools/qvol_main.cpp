// qvol command-line surface. Subcommands: volume, mix, spectrum,
// qsim {amp-est|pi3|nondes|chebyshev}, reduction-test.
// Exit codes: 0 success, 1 input/config error, 2 success with warnings.

#include <CLI11.hpp>
#include <json.hpp>
#include <fstream>
#include <iostream>
#include <sstream>

#include "qvol/annealing.hpp"
#include "qvol/chain.hpp"
#include "qvol/geometry.hpp"
#include "qvol/parallel.hpp"
#include "qvol/qestimate.hpp"
#include "qvol/qwalk.hpp"
#include "qvol/reduction.hpp"
#include "qvol/version.hpp"

using nlohmann::json;

namespace {

std::string read_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::invalid_argument("cannot open " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_output(const std::string& out_path, const std::string& text) {
  if (out_path.empty() || out_path == "-") {
    std::cout << text << "\n";
    return;
  }
  std::ofstream out(out_path, std::ios::binary);
  if (!out) throw std::invalid_argument("cannot write " + out_path);
  out << text << "\n";
}

json base_record(const std::string& command, std::uint64_t seed) {
  json j;
  j["schema"] = 1;
  j["version"] = qvol::kVersion;
  j["command"] = command;
  j["seed"] = seed;
  return j;
}

qvol::chain::FiniteChain chain_from_cli(const std::string& chain_path,
                                        const std::string& gen, double lo,
                                        double hi, double eps, double eps_prime,
                                        double a, int d_random,
                                        std::uint64_t seed) {
  if (!chain_path.empty())
    return qvol::chain::chain_from_json(read_file(chain_path));
  if (gen == "1d") return qvol::chain::discretize_1d(lo, hi, eps, eps_prime, a);
  if (gen == "random") {
    // Random reversible chain from symmetric positive weights.
    qvol::Rng rng(seed, 0x5eedULL);
    qvol::chain::Matrix A(d_random, d_random);
    for (int i = 0; i < d_random; ++i)
      for (int j = i; j < d_random; ++j) {
        double w = 0.1 + rng.uniform();
        A(i, j) = w;
        A(j, i) = w;
      }
    qvol::chain::FiniteChain ch;
    ch.P = A.array().colwise() / A.rowwise().sum().array();
    ch.pi = qvol::chain::stationary(ch.P);
    for (int i = 0; i < d_random; ++i) {
      qvol::chain::Vector s(1);
      s[0] = i;
      ch.states.push_back(s);
    }
    return ch;
  }
  throw std::invalid_argument("need --chain FILE or --gen 1d|random");
}

int cmd_volume(const std::string& body_path, const std::string& body_inline,
               double eps, std::uint64_t seed, long long samples,
               double k_scale, long long walk_steps, bool rounding,
               int threads, const std::string& out, const std::string& format,
               bool timing) {
  std::string spec = !body_inline.empty() ? body_inline : read_file(body_path);
  qvol::geometry::BodyPtr body = qvol::geometry::load_body_json(spec);
  qvol::annealing::EstimateConfig cfg;
  cfg.epsilon = eps;
  cfg.seed = seed;
  cfg.samples_per_stage = samples;
  cfg.k_scale = k_scale;
  cfg.walk_steps = walk_steps;
  cfg.rounding = rounding;
  cfg.threads = threads;
  qvol::annealing::EstimateReport rep = qvol::annealing::estimate_volume(body, cfg);
  if (format == "csv")
    write_output(out, qvol::annealing::report_stage_csv(rep));
  else
    write_output(out, qvol::annealing::report_to_json(rep, timing));
  std::cerr << "volume: " << rep.volume << "  (queries " << rep.total_queries
            << ", " << rep.wall_time_s << " s)\n";
  return rep.warnings.empty() ? 0 : 2;
}

int cmd_mix(const qvol::chain::FiniteChain& ch, int steps,
            const std::string& sigma0_kind, std::uint64_t seed,
            const std::string& out, const std::string& format) {
  int d = static_cast<int>(ch.P.rows());
  Eigen::VectorXd sigma0;
  if (sigma0_kind == "uniform") {
    sigma0 = Eigen::VectorXd::Constant(d, 1.0 / d);
  } else if (sigma0_kind.rfind("point:", 0) == 0) {
    int idx = std::stoi(sigma0_kind.substr(6));
    if (idx < 0 || idx >= d) throw std::invalid_argument("mix: point index out of range");
    sigma0 = Eigen::VectorXd::Zero(d);
    sigma0[idx] = 1.0;
  } else {
    throw std::invalid_argument("mix: --sigma0 must be uniform or point:<i>");
  }
  double M = 0.0;
  for (int i = 0; i < d; ++i)
    if (sigma0[i] > 0) M = std::max(M, sigma0[i] / ch.pi[i]);
  auto mc = qvol::chain::min_conductance(ch);
  if (format == "csv") {
    std::ostringstream os;
    os.precision(17);
    os << "k,tv,bound\n";
    Eigen::VectorXd sigma = sigma0;
    for (int k = 0; k <= steps; ++k) {
      double tv = 0.5 * (sigma - ch.pi).cwiseAbs().sum();
      double bound = std::sqrt(M) * std::pow(1.0 - 0.5 * mc.phi * mc.phi, k);
      os << k << "," << tv << "," << bound << "\n";
      sigma = ch.P.transpose() * sigma;
    }
    write_output(out, os.str());
    return 0;
  }
  json j = base_record("mix", seed);
  j["states"] = d;
  j["phi"] = mc.phi;
  j["phi_exact"] = mc.exact;
  j["warmness_M"] = M;
  json rows = json::array();
  Eigen::VectorXd sigma = sigma0;
  bool bound_ok = true;
  for (int k = 0; k <= steps; ++k) {
    double tv = 0.5 * (sigma - ch.pi).cwiseAbs().sum();
    double bound = std::sqrt(M) * std::pow(1.0 - 0.5 * mc.phi * mc.phi, k);
    if (tv > bound + 1e-12) bound_ok = false;
    rows.push_back({{"k", k}, {"tv", tv}, {"bound", bound}});
    sigma = ch.P.transpose() * sigma;
  }
  j["rows"] = rows;
  j["bound_holds"] = bound_ok;
  write_output(out, j.dump(2));
  return bound_ok ? 0 : 2;
}

int cmd_spectrum(const qvol::chain::FiniteChain& ch, bool exhaustive,
                 const std::string& save_chain, std::uint64_t seed,
                 const std::string& out) {
  int d = static_cast<int>(ch.P.rows());
  if (exhaustive && d > 20)
    throw std::invalid_argument("spectrum: exhaustive conductance needs d <= 20 (got " +
                                std::to_string(d) + ")");
  if (!save_chain.empty()) write_output(save_chain, qvol::chain::chain_to_json(ch));
  auto D = qvol::chain::discriminant(ch);
  auto rep = qvol::qwalk::verify_spectrum(ch);
  auto mc = qvol::chain::min_conductance(ch);
  json j = base_record("spectrum", seed);
  j["states"] = d;
  json ew = json::array();
  for (const auto& w : rep.eigs_W) ew.push_back({{"re", w.real()}, {"im", w.imag()}});
  j["eigs_W"] = ew;
  j["eigs_D"] = rep.eigs_D;
  j["max_mismatch"] = rep.max_mismatch;
  j["spectrum_ok"] = rep.pass;
  j["phase_gap"] = rep.phase_gap;
  j["phase_gap_lower"] = std::sqrt(2.0 * (1.0 - rep.eigs_D[d - 2]));
  j["conductance"] = mc.phi;
  j["conductance_exact"] = mc.exact;
  (void)D;
  write_output(out, j.dump(2));
  return rep.pass ? 0 : 2;
}

int cmd_qsim_ampest(double p, int M, int trials, std::uint64_t seed,
                    const std::string& out) {
  auto task = qvol::qestimate::make_bernoulli_task(p, M);
  double bound = qvol::qestimate::ae_error_bound(p, M);
  qvol::Rng rng(seed);
  int success = 0;
  double last = 0.0;
  for (int t = 0; t < trials; ++t) {
    auto r = qvol::qestimate::amplitude_estimate(task, rng);
    last = r.p_tilde;
    if (std::abs(r.p_tilde - p) <= bound + 1e-15) ++success;
  }
  json j = base_record("qsim amp-est", seed);
  j["p_true"] = p;
  j["M"] = M;
  j["trials"] = trials;
  j["bound"] = bound;
  j["p_tilde_last"] = last;
  j["success_rate"] = trials > 0 ? double(success) / trials : 0.0;
  j["success"] = trials > 0 && double(success) / trials >= 8.0 / (M_PI * M_PI) - 3.0 * std::sqrt(0.25 / trials);
  write_output(out, j.dump(2));
  return j["success"].get<bool>() ? 0 : 2;
}

int cmd_qsim_pi3(double p, int m, std::uint64_t seed, const std::string& out) {
  using namespace qvol::qestimate;
  // Two real states on a 2D subspace with overlap |<psi|phi>|^2 = p.
  CVec psi(2), phi(2);
  psi << 1.0, 0.0;
  phi << std::sqrt(p), std::sqrt(1.0 - p);
  CMat R_psi = exact_reflection(psi);
  CMat R_phi = exact_reflection(phi);
  long long uses = 0;
  CVec amplified = pi3_amplify(psi, R_psi, R_phi, m, &uses);
  double overlap = std::norm(phi.dot(amplified));
  double bound = 1.0 - std::pow(1.0 - p, std::pow(3.0, m));
  json j = base_record("qsim pi3", seed);
  j["p"] = p;
  j["m"] = m;
  j["overlap"] = overlap;
  j["bound"] = bound;
  j["reflection_uses"] = uses;
  j["reflection_cap"] = static_cast<long long>(std::pow(3.0, m));
  j["success"] = overlap >= bound - 1e-12 && uses <= j["reflection_cap"].get<long long>();
  write_output(out, j.dump(2));
  return j["success"].get<bool>() ? 0 : 2;
}

int cmd_qsim_nondes(double p, int M, int s, int trials, std::uint64_t seed,
                    const std::string& out) {
  auto task = qvol::qestimate::make_bernoulli_task(p, M);
  auto table = qvol::qestimate::nondes_outcome_table(task, s);
  double bound = qvol::qestimate::ae_error_bound(p, M);
  qvol::Rng rng(seed);
  std::vector<double> cdf;
  double acc = 0;
  for (const auto& row : table) {
    acc += row.prob;
    cdf.push_back(acc);
  }
  int in_bound = 0;
  double min_fid = 1.0;
  for (int t = 0; t < trials; ++t) {
    double u = rng.uniform();
    std::size_t k = 0;
    while (k + 1 < cdf.size() && u > cdf[k]) ++k;
    const auto& row = table[k];
    if (std::abs(row.estimate - p) <= bound + 1e-15) ++in_bound;
    min_fid = std::min(min_fid, row.fidelity);
  }
  json j = base_record("qsim nondes", seed);
  j["p_true"] = p;
  j["M"] = M;
  j["s"] = s;
  j["trials"] = trials;
  j["bound"] = bound;
  j["bound_rate"] = trials > 0 ? double(in_bound) / trials : 0.0;
  j["min_fidelity"] = min_fid;
  j["success"] = min_fid >= 0.99 && (trials == 0 || double(in_bound) / trials >= 0.9);
  write_output(out, j.dump(2));
  return j["success"].get<bool>() ? 0 : 2;
}

int cmd_qsim_chebyshev(const std::vector<double>& values,
                       const std::vector<double>& probs, double delta_u,
                       double H, double eps, double delta, int trials,
                       std::uint64_t seed, const std::string& out) {
  qvol::qestimate::DiscreteRV rv{values, probs};
  double mu = 0.0;
  for (std::size_t i = 0; i < values.size(); ++i) mu += values[i] * probs[i];
  qvol::Rng rng(seed);
  int ok = 0;
  double last = 0.0;
  for (int t = 0; t < trials; ++t) {
    last = qvol::qestimate::quantum_chebyshev_mean(rv, delta_u, H, eps, delta, rng);
    if (std::abs(last - mu) <= eps * mu + 1e-15) ++ok;
  }
  json j = base_record("qsim chebyshev", seed);
  j["mu_true"] = mu;
  j["delta_u"] = delta_u;
  j["H"] = H;
  j["eps"] = eps;
  j["delta"] = delta;
  j["trials"] = trials;
  j["mu_tilde_last"] = last;
  j["success_rate"] = trials > 0 ? double(ok) / trials : 0.0;
  j["success"] = trials == 0 || double(ok) / trials >= 1.0 - delta - 3.0 * std::sqrt(0.25 / trials);
  write_output(out, j.dump(2));
  return j["success"].get<bool>() ? 0 : 2;
}

int cmd_reduction_test(int n_max, int points, std::uint64_t seed,
                       const std::string& out) {
  qvol::Rng rng(seed);
  long long checked = 0, mismatches = 0;
  bool query_ok = true;
  for (int n = 1; n <= n_max; ++n) {
    for (int one = -1; one < n; ++one) {
      qvol::reduction::SearchOracle oracle(n, one);
      for (int t = 0; t < points; ++t) {
        qvol::geometry::Vector x(n);
        for (int i = 0; i < n; ++i) x[i] = rng.uniform_in(-0.5, 2.5);
        std::uint64_t before = oracle.query_count();
        int got = qvol::reduction::mem_s(x, oracle);
        if (oracle.query_count() - before > 1) query_ok = false;
        int expect = 1;
        for (int i = 0; i < n; ++i) {
          double hi = (i == one) ? 2.0 : 1.0;
          if (x[i] < 0.0 || x[i] > hi) {
            expect = 0;
            break;
          }
        }
        ++checked;
        if (got != expect) ++mismatches;
      }
    }
  }
  json j = base_record("reduction-test", seed);
  j["n_max"] = n_max;
  j["points_per_case"] = points;
  j["checked"] = checked;
  j["mismatches"] = mismatches;
  j["one_query_bound"] = query_ok;
  j["pass"] = (mismatches == 0) && query_ok;
  write_output(out, j.dump(2));
  return j["pass"].get<bool>() ? 0 : 2;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Convex-volume annealing estimator and quantum-walk statevector toolkit"};
  app.set_version_flag("--version", qvol::kVersion);
  app.require_subcommand(1);

  std::string out = "-";
  std::uint64_t seed = 0;
  int threads = qvol::default_threads();
  app.add_option("--out", out, "output path (default stdout)")->capture_default_str();
  app.add_option("--seed", seed, "RNG seed; fixes all randomness")->capture_default_str();
  app.add_option("--threads", threads, "worker thread count")->capture_default_str();

  // volume
  auto* vol = app.add_subcommand("volume", "estimate the volume of a body spec");
  std::string body_path, body_inline, format = "json";
  double eps = 0.15;
  long long samples = 0, walk_steps = 0;
  double k_scale = 1.0;
  bool rounding = false, timing = false;
  vol->add_option("--body", body_path, "body-spec JSON file");
  vol->add_option("--body-json", body_inline, "inline body-spec JSON");
  vol->add_option("--eps", eps, "target relative error, in (0, 1/2)")->capture_default_str();
  vol->add_option("--samples", samples, "chains per stage (0: paper formula)");
  vol->add_option("--k-scale", k_scale, "scale factor on the paper sample count");
  vol->add_option("--walk-steps", walk_steps, "walk steps per stage (0: 200 n^2)");
  vol->add_flag("--rounding", rounding, "per-stage covariance rounding");
  vol->add_flag("--timing", timing, "include wall time in the report (breaks byte determinism)");
  vol->add_option("--format", format, "json|csv")->check(CLI::IsMember({"json", "csv"}));

  // chain sources shared by mix/spectrum
  std::string chain_path, gen;
  double lo = 0.0, hi = 1.0, c_eps = 1.0 / 64, c_epsp = 1.0 / 64, c_a = 1.0;
  int d_random = 6;

  auto add_chain_opts = [&](CLI::App* sub) {
    sub->add_option("--chain", chain_path, "chain JSON file");
    sub->add_option("--gen", gen, "generate: 1d|random");
    sub->add_option("--lo", lo, "1d interval lower end")->capture_default_str();
    sub->add_option("--hi", hi, "1d interval upper end")->capture_default_str();
    sub->add_option("--eps", c_eps, "1d fine spacing")->capture_default_str();
    sub->add_option("--eps-prime", c_epsp, "1d line spacing")->capture_default_str();
    sub->add_option("--a", c_a, "density coefficient")->capture_default_str();
    sub->add_option("--d", d_random, "random chain size")->capture_default_str();
  };

  auto* mix = app.add_subcommand("mix", "total-variation mixing curve with the conductance bound");
  int mix_steps = 100;
  std::string sigma0 = "point:0", mix_format = "json";
  add_chain_opts(mix);
  mix->add_option("--steps", mix_steps, "number of steps")->capture_default_str();
  mix->add_option("--sigma0", sigma0, "start distribution: uniform|point:<i>")->capture_default_str();
  mix->add_option("--format", mix_format, "json|csv")->check(CLI::IsMember({"json", "csv"}));

  auto* spec = app.add_subcommand("spectrum", "discriminant/walk spectra, phase gap, conductance");
  bool exhaustive = false;
  std::string save_chain;
  add_chain_opts(spec);
  spec->add_flag("--exhaustive", exhaustive, "require exhaustive conductance (d <= 20)");
  spec->add_option("--save-chain", save_chain, "also write the chain JSON here");

  // qsim
  auto* qsim = app.add_subcommand("qsim", "statevector simulations");
  qsim->require_subcommand(1);
  auto* ampest = qsim->add_subcommand("amp-est", "amplitude estimation");
  double q_p = 0.3;
  int q_M = 64, q_trials = 100;
  ampest->add_option("--p", q_p, "true amplitude")->capture_default_str();
  ampest->add_option("--M", q_M, "phase register size (power of two)")->capture_default_str();
  ampest->add_option("--trials", q_trials, "seeded trials")->capture_default_str();

  auto* pi3 = qsim->add_subcommand("pi3", "pi/3-amplitude amplification");
  double p3_p = 1.0 / 3.0;
  int p3_m = 2;
  pi3->add_option("--p", p3_p, "initial overlap")->capture_default_str();
  pi3->add_option("--m", p3_m, "recursion depth")->capture_default_str();

  auto* nondes = qsim->add_subcommand("nondes", "nondestructive median estimation");
  double nd_p = 0.3;
  int nd_M = 16, nd_s = 3, nd_trials = 100;
  nondes->add_option("--p", nd_p, "true amplitude")->capture_default_str();
  nondes->add_option("--M", nd_M, "phase register size")->capture_default_str();
  nondes->add_option("--s", nd_s, "parallel copies (odd)")->capture_default_str();
  nondes->add_option("--trials", nd_trials, "seeded trials")->capture_default_str();

  auto* cheb = qsim->add_subcommand("chebyshev", "truncation-search mean estimation");
  std::vector<double> cv_values{1.0, 3.0}, cv_probs{0.5, 0.5};
  double cv_delta_u = 2.0, cv_H = 8.0, cv_eps = 0.1, cv_delta = 0.05;
  int cv_trials = 20;
  cheb->add_option("--values", cv_values, "support values")->capture_default_str();
  cheb->add_option("--probs", cv_probs, "probabilities")->capture_default_str();
  cheb->add_option("--delta-u", cv_delta_u, "moment bound sqrt(E[X^2])/mu")->capture_default_str();
  cheb->add_option("--H", cv_H, "upper bound")->capture_default_str();
  cheb->add_option("--eps", cv_eps, "relative error")->capture_default_str();
  cheb->add_option("--delta", cv_delta, "failure probability")->capture_default_str();
  cheb->add_option("--trials", cv_trials, "seeded trials")->capture_default_str();

  auto* red = app.add_subcommand("reduction-test", "search-to-volume membership equivalence");
  int red_n = 6, red_points = 1000;
  red->add_option("--n", red_n, "max dimension")->capture_default_str();
  red->add_option("--points", red_points, "random points per case")->capture_default_str();

  CLI11_PARSE(app, argc, argv);

  try {
    if (*vol) {
      if (body_path.empty() && body_inline.empty())
        throw std::invalid_argument("volume: need --body or --body-json");
      return cmd_volume(body_path, body_inline, eps, seed, samples, k_scale,
                        walk_steps, rounding, threads, out, format, timing);
    }
    if (*mix) {
      auto ch = chain_from_cli(chain_path, gen, lo, hi, c_eps, c_epsp, c_a, d_random, seed);
      return cmd_mix(ch, mix_steps, sigma0, seed, out, mix_format);
    }
    if (*spec) {
      auto ch = chain_from_cli(chain_path, gen, lo, hi, c_eps, c_epsp, c_a, d_random, seed);
      return cmd_spectrum(ch, exhaustive, save_chain, seed, out);
    }
    if (*ampest) return cmd_qsim_ampest(q_p, q_M, q_trials, seed, out);
    if (*pi3) return cmd_qsim_pi3(p3_p, p3_m, seed, out);
    if (*nondes) return cmd_qsim_nondes(nd_p, nd_M, nd_s, nd_trials, seed, out);
    if (*cheb)
      return cmd_qsim_chebyshev(cv_values, cv_probs, cv_delta_u, cv_H, cv_eps,
                                cv_delta, cv_trials, seed, out);
    if (*red) return cmd_reduction_test(red_n, red_points, seed, out);
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "runtime error: " << e.what() << "\n";
    return 1;
  }
  return 1;
}
