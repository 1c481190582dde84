// pybind11 surface over the core operations.

#include <pybind11/complex.h>
#include <pybind11/eigen.h>
#include <pybind11/functional.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "qvol/annealing.hpp"
#include "qvol/chain.hpp"
#include "qvol/geometry.hpp"
#include "qvol/hit_and_run.hpp"
#include "qvol/qestimate.hpp"
#include "qvol/qwalk.hpp"
#include "qvol/reduction.hpp"
#include "qvol/version.hpp"

namespace py = pybind11;
using namespace qvol;

namespace {

// Bodies are shared_ptr<const ConvexBody> on the C++ side; a small value
// wrapper keeps the const pointer out of pybind's holder machinery.
struct PyBody {
  geometry::BodyPtr ptr;
};

py::dict report_dict(const annealing::EstimateReport& rep) {
  py::dict d;
  d["volume"] = rep.volume;
  d["pencil_volume"] = rep.pencil_volume;
  d["xi_hat"] = rep.xi_hat;
  d["epsilon"] = rep.epsilon;
  d["seed"] = rep.seed;
  d["total_queries"] = rep.total_queries;
  d["wall_time_s"] = rep.wall_time_s;
  d["warnings"] = rep.warnings;
  d["samples_per_stage"] = rep.samples_per_stage;
  d["walk_steps"] = rep.walk_steps;
  py::list stages;
  for (const auto& st : rep.stages) {
    py::dict s;
    s["stage"] = st.stage;
    s["a"] = st.a;
    s["samples"] = st.samples;
    s["ratio"] = st.ratio;
    s["moment_ratio"] = st.moment_ratio;
    s["queries"] = st.queries;
    stages.append(s);
  }
  d["stages"] = stages;
  return d;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Convex-volume annealing estimator and quantum-walk statevector toolkit";
  m.attr("__version__") = kVersion;

  // geometry -------------------------------------------------------------
  py::class_<PyBody>(m, "Body")
      .def_property_readonly("dim", [](const PyBody& b) { return b.ptr->dim(); })
      .def_property_readonly("inner_radius",
                             [](const PyBody& b) { return b.ptr->inner_radius(); })
      .def_property_readonly("outer_radius",
                             [](const PyBody& b) { return b.ptr->outer_radius(); })
      .def_property_readonly("kind", [](const PyBody& b) { return b.ptr->kind(); })
      .def("contains",
           [](const PyBody& b, const geometry::Vector& x) { return b.ptr->contains(x); },
           py::arg("x"))
      .def("query_count", [](const PyBody& b) { return b.ptr->query_count(); })
      .def("reset_query_count", [](const PyBody& b) { b.ptr->reset_query_count(); });

  m.def("make_ball",
        [](int n, double radius) { return PyBody{geometry::make_ball(n, radius)}; },
        py::arg("n"), py::arg("radius"));
  m.def("make_axis_box",
        [](const geometry::Vector& lo, const geometry::Vector& hi) {
          return PyBody{geometry::make_axis_box(lo, hi)};
        },
        py::arg("low"), py::arg("high"));
  m.def("make_halfspaces",
        [](const geometry::Matrix& A, const geometry::Vector& b, double r, double R) {
          return PyBody{geometry::make_halfspaces(A, b, r, R)};
        },
        py::arg("A"), py::arg("b"), py::arg("r"), py::arg("R"));
  m.def("make_pencil",
        [](const PyBody& base, double two_d) {
          return PyBody{geometry::make_pencil(base.ptr, two_d)};
        },
        py::arg("base"), py::arg("two_d"));
  m.def("apply_affine",
        [](const PyBody& base, const geometry::Matrix& S, const geometry::Vector& t) {
          return PyBody{geometry::apply_affine(base.ptr, S, t)};
        },
        py::arg("base"), py::arg("S"), py::arg("shift"));
  m.def("load_body_json",
        [](const std::string& text) { return PyBody{geometry::load_body_json(text)}; },
        py::arg("text"));
  m.def("body_to_json", [](const PyBody& b) { return geometry::body_to_json(*b.ptr); },
        py::arg("body"));

  // hit-and-run ----------------------------------------------------------
  m.def(
      "sample_direction",
      [](int n, std::uint64_t seed) {
        Rng rng(seed);
        return hitrun::sample_direction(n, rng);
      },
      py::arg("n"), py::arg("seed") = 0);
  m.def(
      "chord",
      [](const PyBody& body, const geometry::Vector& p, const geometry::Vector& u) {
        hitrun::WalkConfig cfg;
        auto c = hitrun::chord(*body.ptr, p, u, cfg);
        return std::make_pair(c.t_minus, c.t_plus);
      },
      py::arg("body"), py::arg("p"), py::arg("u"));
  m.def(
      "walk",
      [](const PyBody& body, geometry::Vector p, double a, int steps,
         std::uint64_t seed) {
        hitrun::WalkConfig cfg;
        cfg.a = a;
        Rng rng(seed);
        for (int i = 0; i < steps; ++i) p = hitrun::step(*body.ptr, p, cfg, rng);
        return p;
      },
      py::arg("body"), py::arg("start"), py::arg("a"), py::arg("steps"),
      py::arg("seed") = 0, "Run hit-and-run steps at density exp(-a x0)");

  // annealing ------------------------------------------------------------
  py::class_<annealing::CoolingSchedule>(m, "CoolingSchedule")
      .def_readonly("n", &annealing::CoolingSchedule::n)
      .def_readonly("m", &annealing::CoolingSchedule::m)
      .def_readonly("a", &annealing::CoolingSchedule::a)
      .def_readonly("epsilon", &annealing::CoolingSchedule::epsilon);
  m.def("build_schedule", &annealing::build_schedule, py::arg("n"), py::arg("epsilon"));
  m.def("initial_mass", &annealing::initial_mass, py::arg("n"), py::arg("a0"));
  m.def("log_initial_mass", &annealing::log_initial_mass, py::arg("n"), py::arg("a0"));
  m.def(
      "isotropic_transform",
      [](const std::vector<geometry::Vector>& pts) {
        return annealing::isotropic_transform(pts);
      },
      py::arg("points"));
  m.def(
      "estimate_volume",
      [](const PyBody& body, double epsilon, std::uint64_t seed, long long samples,
         long long walk_steps, bool rounding, int threads) {
        annealing::EstimateConfig cfg;
        cfg.epsilon = epsilon;
        cfg.seed = seed;
        cfg.samples_per_stage = samples;
        cfg.walk_steps = walk_steps;
        cfg.rounding = rounding;
        cfg.threads = threads;
        return report_dict(annealing::estimate_volume(body.ptr, cfg));
      },
      py::arg("body"), py::arg("epsilon") = 0.15, py::arg("seed") = 0,
      py::arg("samples") = 0, py::arg("walk_steps") = 0,
      py::arg("rounding") = false, py::arg("threads") = 1);

  // chains ---------------------------------------------------------------
  py::class_<chain::FiniteChain>(m, "FiniteChain")
      .def_property_readonly("states",
                             [](const chain::FiniteChain& c) { return c.states; })
      .def_readonly("P", &chain::FiniteChain::P)
      .def_readonly("pi", &chain::FiniteChain::pi)
      .def_readonly("eps", &chain::FiniteChain::eps)
      .def_readonly("eps_prime", &chain::FiniteChain::eps_prime)
      .def_readonly("coarse", &chain::FiniteChain::coarse)
      .def_readonly("a", &chain::FiniteChain::a);
  m.def("discretize_1d",
        py::overload_cast<double, double, double, double, double>(&chain::discretize_1d),
        py::arg("lo"), py::arg("hi"), py::arg("eps"), py::arg("eps_prime"), py::arg("a"));
  m.def("discretize_2d_mc",
        [](const PyBody& body, double eps, double eps_prime, double a,
           int samples_per_state, std::uint64_t seed) {
          return chain::discretize_2d_mc(*body.ptr, eps, eps_prime, a,
                                         samples_per_state, seed);
        },
        py::arg("body"), py::arg("eps"), py::arg("eps_prime"), py::arg("a"),
        py::arg("samples_per_state"), py::arg("seed") = 0);
  m.def("conductance", &chain::conductance, py::arg("chain"), py::arg("S"));
  m.def(
      "min_conductance",
      [](const chain::FiniteChain& ch) {
        auto mc = chain::min_conductance(ch);
        py::dict d;
        d["phi"] = mc.phi;
        d["witness"] = mc.witness;
        d["exact"] = mc.exact;
        return d;
      },
      py::arg("chain"));
  m.def("mixing_tv", &chain::mixing_tv, py::arg("chain"), py::arg("sigma0"), py::arg("k"));
  m.def("discriminant", &chain::discriminant, py::arg("chain"));
  m.def("chain_to_json", &chain::chain_to_json, py::arg("chain"));
  m.def("chain_from_json", &chain::chain_from_json, py::arg("text"));

  // quantum walk ---------------------------------------------------------
  m.def("build_U", &qwalk::build_U, py::arg("chain"));
  m.def("build_walk", &qwalk::build_walk, py::arg("chain"));
  m.def("isometry_T", &qwalk::isometry_T, py::arg("chain"));
  m.def("stationary_walk_state", &qwalk::stationary_walk_state, py::arg("chain"));
  m.def("phase_gap", &qwalk::phase_gap, py::arg("D"));
  m.def(
      "verify_spectrum",
      [](const chain::FiniteChain& ch, double tol) {
        auto rep = qwalk::verify_spectrum(ch, tol);
        py::dict d;
        d["eigs_W"] = rep.eigs_W;
        d["eigs_D"] = rep.eigs_D;
        d["max_mismatch"] = rep.max_mismatch;
        d["phase_gap"] = rep.phase_gap;
        d["pass"] = rep.pass;
        return d;
      },
      py::arg("chain"), py::arg("tol") = 1e-8);
  m.def("grover_rudolph_prepare", &qwalk::grover_rudolph_prepare, py::arg("probs"));
  m.def("box_muller", &qwalk::box_muller, py::arg("xi1"), py::arg("xi2"),
        py::arg("delta") = 1.0);

  // estimation circuits ----------------------------------------------------
  py::class_<qestimate::AmplitudeTask>(m, "AmplitudeTask")
      .def_readonly("U", &qestimate::AmplitudeTask::U)
      .def_readonly("P1", &qestimate::AmplitudeTask::P1)
      .def_readonly("p", &qestimate::AmplitudeTask::p)
      .def_readonly("M", &qestimate::AmplitudeTask::M);
  m.def("make_bernoulli_task", &qestimate::make_bernoulli_task, py::arg("p"), py::arg("M"));
  m.def("grover_iterate", &qestimate::grover_iterate, py::arg("U"), py::arg("P1"));
  m.def("ae_error_bound", &qestimate::ae_error_bound, py::arg("p"), py::arg("M"));
  m.def("ae_distribution", &qestimate::ae_distribution, py::arg("task"));
  m.def(
      "amplitude_estimate",
      [](const qestimate::AmplitudeTask& task, std::uint64_t seed) {
        auto r = qestimate::amplitude_estimate(task, seed);
        py::dict d;
        d["outcome"] = r.outcome;
        d["theta_tilde"] = r.theta_tilde;
        d["p_tilde"] = r.p_tilde;
        return d;
      },
      py::arg("task"), py::arg("seed") = 0);
  m.def("exact_reflection", &qestimate::exact_reflection, py::arg("state"));
  m.def(
      "pi3_amplify",
      [](const qestimate::CVec& psi, const qestimate::CMat& R_psi,
         const qestimate::CMat& R_phi, int m) {
        long long uses = 0;
        auto out = qestimate::pi3_amplify(psi, R_psi, R_phi, m, &uses);
        return std::make_pair(out, uses);
      },
      py::arg("psi"), py::arg("R_psi"), py::arg("R_phi"), py::arg("m"));
  m.def(
      "reflection_via_phase_estimation",
      [](const qestimate::CMat& W, double delta_turns, double eps2) {
        auto r = qestimate::reflection_via_phase_estimation(W, delta_turns, eps2);
        py::dict d;
        d["op"] = r.op;
        d["a"] = r.a;
        d["c"] = r.c;
        d["dim"] = r.dim;
        return d;
      },
      py::arg("W"), py::arg("delta_turns"), py::arg("eps2"));
  m.def(
      "basic_est",
      [](const std::vector<double>& values, const std::vector<double>& probs,
         double L, double H, int M, int reps, std::uint64_t seed) {
        qestimate::DiscreteRV rv{values, probs};
        Rng rng(seed);
        return qestimate::basic_est(rv, L, H, M, reps, rng);
      },
      py::arg("values"), py::arg("probs"), py::arg("L"), py::arg("H"),
      py::arg("M"), py::arg("repetitions"), py::arg("seed") = 0);
  m.def(
      "quantum_chebyshev_mean",
      [](const std::vector<double>& values, const std::vector<double>& probs,
         double delta_u, double H, double eps, double delta, std::uint64_t seed) {
        qestimate::DiscreteRV rv{values, probs};
        Rng rng(seed);
        return qestimate::quantum_chebyshev_mean(rv, delta_u, H, eps, delta, rng);
      },
      py::arg("values"), py::arg("probs"), py::arg("delta_u"), py::arg("H"),
      py::arg("eps"), py::arg("delta"), py::arg("seed") = 0);
  m.def(
      "nondestructive_estimate",
      [](double p, int M, int s, std::uint64_t seed) {
        auto task = qestimate::make_bernoulli_task(p, M);
        auto r = qestimate::nondestructive_estimate(task, s, seed);
        py::dict d;
        d["estimate"] = r.estimate;
        d["outcome"] = r.outcome;
        d["outcome_prob"] = r.outcome_prob;
        d["fidelity"] = r.fidelity;
        return d;
      },
      py::arg("p"), py::arg("M") = 16, py::arg("s") = 3, py::arg("seed") = 0);

  // reduction --------------------------------------------------------------
  py::class_<reduction::SearchOracle>(m, "SearchOracle")
      .def(py::init<int, int>(), py::arg("n"), py::arg("one_index"))
      .def_property_readonly("n", &reduction::SearchOracle::n)
      .def("query", &reduction::SearchOracle::query, py::arg("i"))
      .def("query_count", &reduction::SearchOracle::query_count);
  m.def("mem_s", &reduction::mem_s, py::arg("x"), py::arg("oracle"));
  m.def("volume_to_search", &reduction::volume_to_search, py::arg("oracle"),
        py::arg("volume_estimator"));
}
