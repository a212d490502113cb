#include <pybind11/pybind11.h>
#include <pybind11/functional.h>
#include <pybind11/numpy.h>
#include <pybind11/stl.h>

#include <string>
#include <vector>

#include "ergocert/chain_cert.hpp"
#include "ergocert/diffusion.hpp"
#include "ergocert/error.hpp"
#include "ergocert/io.hpp"
#include "ergocert/markov_sim.hpp"
#include "ergocert/renewal.hpp"

namespace py = pybind11;
using namespace ergocert;
using io::json;

namespace {

py::object to_py(const json& j) {
  switch (j.type()) {
    case json::value_t::null: return py::none();
    case json::value_t::boolean: return py::bool_(j.get<bool>());
    case json::value_t::number_integer: return py::int_(j.get<long long>());
    case json::value_t::number_unsigned: return py::int_(j.get<unsigned long long>());
    case json::value_t::number_float: return py::float_(j.get<double>());
    case json::value_t::string: return py::str(j.get<std::string>());
    case json::value_t::array: {
      py::list out;
      for (const auto& e : j) out.append(to_py(e));
      return out;
    }
    case json::value_t::object: {
      py::dict out;
      for (auto it = j.begin(); it != j.end(); ++it) out[py::str(it.key())] = to_py(it.value());
      return out;
    }
    default: return py::none();
  }
}

json from_py(const py::handle& obj) {
  return json::parse(py::module_::import("json").attr("dumps")(obj).cast<std::string>());
}

Pmf pmf_arg(const py::handle& obj) {
  if (py::isinstance<py::dict>(obj)) return io::pmf_from_json(from_py(obj));
  return Pmf::from_weights(1, obj.cast<std::vector<double>>());
}

py::array_t<double> to_array(const std::vector<double>& v) {
  return py::array_t<double>(static_cast<py::ssize_t>(v.size()), v.data());
}

}  // namespace

PYBIND11_MODULE(_ergocert, m) {
  m.doc() = "Explicit geometric-ergodicity certificates";

  py::register_exception<InvalidInput>(m, "InvalidInput", PyExc_ValueError);
  py::register_exception<ConditionFailure>(m, "ConditionFailure", PyExc_RuntimeError);
  py::register_exception<NumericOverflow>(m, "NumericOverflow", PyExc_OverflowError);
  py::register_exception<TruncationError>(m, "TruncationError", PyExc_RuntimeError);

  m.def(
      "renewal_sequence",
      [](const py::object& pmf, std::size_t n_max) { return to_array(renewal_sequence(pmf_arg(pmf), n_max)); },
      py::arg("pmf"), py::arg("n_max"),
      "u(0..n_max) for an increment law given as masses on 1, 2, ... or a pmf spec dict.");

  m.def(
      "renewal_bound",
      [](const py::object& pmf, std::vector<double> rates) {
        const Pmf p = pmf_arg(pmf);
        if (rates.empty()) rates = log_grid(0.01, 2.0, 9);
        const RateChoice c = best_rate(p, rates);
        json out = {{"r", c.r},
                    {"kappa", io::to_json(c.bound.kappa)},
                    {"M_star", io::to_json(c.bound.m_star)},
                    {"log_M_star", c.bound.m_star.log_double()},
                    {"constants", io::to_json(c.bound.constants)}};
        return to_py(out);
      },
      py::arg("pmf"), py::arg("rates") = std::vector<double>{},
      "Best rate on the grid with kappa, M* and the constants ledger.");

  m.def(
      "certify_chain",
      [](const py::object& spec) {
        const io::FamilySpec fam = io::family_from_json(from_py(spec));
        const H1H2 h = verify_h1_h2(fam.chains, fam.v, fam.c_set);
        const Certificate cert = certificate_assemble(h.drift, h.minor);
        json out = {{"drift", {{"rho", h.drift.rho}, {"D", h.drift.d_const}, {"V_star", h.drift.v_star}}},
                    {"delta", io::to_json(h.minor.delta)},
                    {"certificate", io::to_json(cert)}};
        return to_py(out);
      },
      py::arg("spec"), "Certificate for a family {'chains': [...], 'v': [...], 'c_set': [...]}.");

  m.def(
      "certify_drift_minorization",
      [](double rho, double d, double v_star, double delta) {
        return to_py(io::to_json(certificate_assemble({rho, d, v_star}, MinorizationParams(delta))));
      },
      py::arg("rho"), py::arg("D"), py::arg("v_star"), py::arg("delta"),
      "Certificate from drift (rho, D, V*) and minorization delta.");

  m.def(
      "deviation_curve",
      [](const std::vector<std::vector<double>>& rows, const std::vector<double>& v, int x, long n_max) {
        const FiniteChain ch = FiniteChain::from_rows(rows);
        const Eigen::Map<const Eigen::VectorXd> vv(v.data(), static_cast<Eigen::Index>(v.size()));
        return to_array(deviation_curve(ch, vv, x, n_max));
      },
      py::arg("transition"), py::arg("v"), py::arg("x"), py::arg("n_max"),
      "Exact V-norm deviation for n = 0..n_max.");

  m.def(
      "simulate_chain",
      [](const std::vector<std::vector<double>>& rows, int x0, long n, std::uint64_t seed) {
        return simulate_chain(FiniteChain::from_rows(rows), x0, n, seed);
      },
      py::arg("transition"), py::arg("x0"), py::arg("n"), py::arg("seed") = 0);

  m.def(
      "simulate_coupling",
      [](const py::object& pmf, double r, double gamma1, std::size_t n_paths, std::uint64_t seed) {
        const Pmf p = pmf_arg(pmf);
        CouplingOptions o;
        o.r = r;
        o.gamma1 = gamma1;
        o.n_paths = n_paths;
        o.seed = seed;
        return to_py(io::to_json(simulate_coupling(Pmf::delta(0), stationary_delay(p), p, o)));
      },
      py::arg("pmf"), py::arg("r") = 0.1, py::arg("gamma1") = 0.01, py::arg("n_paths") = 10000,
      py::arg("seed") = 0, "Monte Carlo moments of the coupling construction.");

  m.def(
      "certify_diffusion",
      [](const py::object& spec) {
        const io::DiffusionSpec s = io::diffusion_from_json(from_py(spec));
        return to_py(io::to_json(certify_diffusion(s.cls, s.model)));
      },
      py::arg("spec"), "Drift report, minorization and certificate for a diffusion spec dict.");

  m.def(
      "euler_ensemble",
      [](const py::object& spec, double x0, double t_end, double dt, std::size_t n_paths, std::uint64_t seed) {
        const io::DiffusionSpec s = io::diffusion_from_json(from_py(spec));
        Ensemble e;
        {
          py::gil_scoped_release release;
          e = euler_ensemble(s.model, x0, t_end, dt, n_paths, seed);
        }
        py::array_t<double> out({static_cast<py::ssize_t>(e.n_paths), static_cast<py::ssize_t>(e.n_times)});
        std::copy(e.values.begin(), e.values.end(), out.mutable_data());
        return out;
      },
      py::arg("spec"), py::arg("x0"), py::arg("t_end"), py::arg("dt") = 1e-2, py::arg("n_paths") = 1000,
      py::arg("seed") = 0, "Skeleton values, shape (n_paths, floor(t_end) + 1).");

  m.def(
      "invariant_density",
      [](const py::object& spec, const std::vector<double>& xs) {
        const io::DiffusionSpec s = io::diffusion_from_json(from_py(spec));
        const InvariantDensity inv(s.model, s.cls);
        std::vector<double> out;
        out.reserve(xs.size());
        for (double x : xs) out.push_back(inv.density(x));
        return to_array(out);
      },
      py::arg("spec"), py::arg("x"), "Normalized invariant density at the given points.");
}
