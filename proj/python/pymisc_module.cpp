#include <pybind11/functional.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <map>

#include "misc/adaptation.hpp"
#include "misc/driver.hpp"
#include "misc/errors.hpp"
#include "misc/quadrature.hpp"
#include "misc/random_field.hpp"
#include "misc/theory.hpp"

namespace py = pybind11;

namespace {

misc::SparsePoint to_point(const std::map<int, double>& y) {
  misc::SparsePoint p;
  for (const auto& [j, v] : y) {
    if (v != 0.0) p.emplace_back(j, v);
  }
  return p;
}

misc::MixedIndex to_index(const std::vector<int>& alpha, const std::map<int, int>& beta) {
  misc::MixedIndex idx{alpha, {}};
  for (const auto& [j, level] : beta) idx.beta.set(j, level);
  return idx;
}

misc::IndexSet to_set(int D, const std::vector<std::pair<std::vector<int>, std::map<int, int>>>& members) {
  misc::IndexSet set(D);
  for (const auto& [alpha, beta] : members) set.insert(to_index(alpha, beta));
  return set;
}

py::dict summary_dict(const misc::RunSummary& s) {
  py::list rows;
  for (const auto& r : s.records) {
    py::dict row;
    row["budget"] = r.budget;
    row["work"] = r.work;
    row["estimate"] = r.estimate;
    row["abs_error"] = r.abs_error;
    row["max_alpha"] = r.max_alpha;
    row["max_beta"] = r.max_beta;
    row["last_var"] = r.last_var;
    row["joint_vars"] = r.joint_vars;
    rows.append(row);
  }
  py::dict out;
  out["records"] = rows;
  out["reference"] = s.reference;
  out["slope"] = s.slope;
  out["g_tilde"] = s.model.g_tilde;
  return out;
}

}  // namespace

PYBIND11_MODULE(pymisc, m) {
  m.doc() = "Multi-index stochastic collocation: quadrature, solver, estimator and rate tools";

  py::register_exception<misc::ConfigError>(m, "ConfigError", PyExc_ValueError);
  py::register_exception<misc::NumericalError>(m, "NumericalError", PyExc_RuntimeError);

  m.def("level_to_nodes", &misc::level_to_nodes, py::arg("beta"));
  m.def("cc_points", &misc::cc_points, py::arg("beta"));
  m.def("cc_weights", &misc::cc_weights, py::arg("beta"));
  m.def("leb_delta", &misc::leb_delta, py::arg("beta"));

  m.def("coefficient_A", &misc::coefficient_A, py::arg("k"), py::arg("nu"));
  m.def(
      "mode_amplitudes",
      [](int d, double nu, int count) {
        std::vector<double> a;
        for (const auto& mode : misc::mode_ordering({d, nu, count})) a.push_back(mode.amplitude);
        return a;
      },
      py::arg("d"), py::arg("nu"), py::arg("count"));

  m.def(
      "solve_qoi",
      [](int d, double nu, const std::vector<int>& alpha, const std::map<int, double>& y, int modes) {
        misc::RandomField field({d, nu, modes});
        return misc::solve_qoi(alpha, to_point(y), field, misc::QoISpec::defaults(d));
      },
      py::arg("d"), py::arg("nu"), py::arg("alpha"), py::arg("y") = std::map<int, double>{},
      py::arg("modes") = 128, py::call_guard<py::gil_scoped_release>());

  m.def(
      "combination_coefficients",
      [](int D, const std::vector<std::pair<std::vector<int>, std::map<int, int>>>& members) {
        const auto coeff = misc::combination_coefficients(to_set(D, members));
        std::vector<int> out;
        for (const auto& [alpha, beta] : members) out.push_back(coeff.at(to_index(alpha, beta)));
        return out;
      },
      py::arg("spatial_dims"), py::arg("members"));

  m.def(
      "evaluate",
      [](int d, double nu, const std::vector<std::pair<std::vector<int>, std::map<int, int>>>& members,
         const std::string& mode) {
        misc::RunConfig rc;
        rc.d = d;
        rc.nu = nu;
        rc.modes = d == 1 ? 128 : 64;
        rc.x0 = misc::QoISpec::defaults(d).x0;
        auto ctx = misc::make_context(rc);
        misc::Estimator est(ctx.problem);
        const auto rep = est.evaluate(to_set(d, members), mode == "surplus" ? misc::EvalMode::surplus
                                                                           : misc::EvalMode::combination);
        py::dict out;
        out["value"] = rep.value;
        out["work"] = rep.work;
        out["solves"] = rep.solves;
        return out;
      },
      py::arg("d"), py::arg("nu"), py::arg("members"), py::arg("mode") = "combination");

  m.def(
      "fit_rates",
      [](const std::vector<std::tuple<std::vector<int>, std::map<int, int>, double>>& samples,
         double r_fem) {
        std::vector<misc::RateSample> s;
        for (const auto& [alpha, beta, v] : samples) s.push_back({to_index(alpha, beta), v});
        const auto model = misc::fit_rates(s, r_fem);
        py::dict out;
        out["r_fem"] = model.r_fem;
        out["C_E"] = model.C_E;
        out["g_tilde"] = model.g_tilde;
        out["residual"] = model.residual;
        return out;
      },
      py::arg("samples"), py::arg("r_fem"));

  m.def("solve_E_delta", &misc::solve_E_delta, py::arg("b0_l1_norm"), py::arg("delta"));
  m.def(
      "r_misc_example",
      [](double nu, int d, double gamma, const std::string& variant) {
        return misc::r_misc_example(nu, d, gamma, misc::parse_variant(variant));
      },
      py::arg("nu"), py::arg("d"), py::arg("gamma") = 1.0, py::arg("variant") = "theory");

  m.def(
      "run",
      [](const std::string& config_path, bool write) {
        const auto rc = misc::RunConfig::from(misc::Config::load(config_path));
        misc::RunSummary s;
        {
          py::gil_scoped_release release;
          s = misc::run_study(rc, write);
        }
        return summary_dict(s);
      },
      py::arg("config"), py::arg("write") = false);
}
