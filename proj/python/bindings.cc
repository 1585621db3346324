#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <sstream>

#include "coopgrid/dispatch/characteristic.h"
#include "coopgrid/error.h"
#include "coopgrid/imputation/allocation.h"
#include "coopgrid/imputation/benders.h"
#include "coopgrid/imputation/oracle.h"
#include "coopgrid/report/report.h"
#include "coopgrid/report/scenario_io.h"
#include "coopgrid/uncertainty/sets.h"

namespace py = pybind11;
using namespace coopgrid;

namespace {

dispatch::DispatchMode mode_arg(const std::string& m) { return dispatch::parse_mode(m); }

template <class F>
std::string to_csv(F&& write) {
  std::ostringstream out;
  write(out);
  return out.str();
}

imputation::TableGame table(const std::vector<double>& values) {
  int n = 0;
  while ((std::size_t{1} << n) < values.size()) ++n;
  return imputation::TableGame(n, values);
}

py::dict least_core_dict(const imputation::LeastCore& lc) {
  py::dict d;
  d["x"] = lc.imputation.x;
  d["mu"] = lc.mu;
  return d;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Robust cooperative dispatch with shared forecast data";

  static py::exception<Error> error(m, "CoopgridError");
  py::register_exception_translator([](std::exception_ptr p) {
    try {
      if (p) std::rethrow_exception(p);
    } catch (const Error& e) {
      py::object exc = error;
      exc.attr("code") = std::string(error_code_name(e.code()));
      PyErr_SetString(error.ptr(), e.what());
    }
  });

  py::class_<Scenario>(m, "Scenario")
      .def_property_readonly("num_players", &Scenario::num_players)
      .def_property_readonly("periods", &Scenario::periods)
      .def_property_readonly("name", [](const Scenario& s) { return s.config.name; })
      .def_property_readonly("ids", [](const Scenario& s) {
        std::vector<std::string> ids;
        for (const auto& p : s.prosumers) ids.push_back(p.id);
        return ids;
      })
      .def("to_json", [](const Scenario& s) { return report::write_scenario(s); });

  m.def(
      "load_scenario", [](const std::string& path) { return report::load_scenario(path); },
      py::arg("path"));
  m.def("parse_scenario", &report::parse_scenario, py::arg("text"),
        py::arg("source") = "<string>");

  m.def(
      "coalition_value",
      [](const Scenario& s, std::uint64_t mask, const std::string& mode) {
        auto v = dispatch::coalition_value(s, Coalition(mask), mode_arg(mode));
        py::dict d;
        d["value"] = v->value;
        d["status"] = std::string(conic::status_name(v->status));
        d["iterations"] = v->iterations;
        d["budget"] = v->budget;
        d["set"] = v->set_label;
        d["schedule_csv"] = to_csv([&](std::ostream& o) {
          report::write_schedule_csv(o, s, v->schedule);
        });
        return d;
      },
      py::arg("scenario"), py::arg("coalition"), py::arg("mode") = "joint");

  m.def(
      "run_cases",
      [](const Scenario& s, int workers) {
        const report::CaseReport r = report::run_cases(s, workers);
        py::dict totals;
        for (const auto& c : r.cases) {
          totals[py::str(c.name)] = c.ok ? py::object(py::float_(c.total_payoff))
                                         : py::object(py::none());
        }
        return totals;
      },
      py::arg("scenario"), py::arg("workers") = 1);

  m.def(
      "impute",
      [](const Scenario& s, const std::string& method, const std::string& mode,
         const std::string& search, bool eo_attribution, int workers) {
        report::ImputationOptions opt;
        opt.mode = mode_arg(mode);
        opt.search = search;
        opt.electricity_only_attribution = eo_attribution;
        opt.workers = workers;
        const auto r = report::run_imputation(s, report::parse_method(method), opt);
        py::dict d;
        d["x"] = r.x;
        d["standalone"] = r.standalone;
        d["grand_value"] = r.grand_value;
        d["mu"] = r.mu ? py::object(py::float_(*r.mu)) : py::object(py::none());
        d["iterations"] = r.log ? static_cast<int>(r.log->iterations.size()) : 0;
        d["in_core"] = r.core_checked ? py::object(py::bool_(r.violations.empty()))
                                      : py::object(py::none());
        d["csv"] = to_csv([&](std::ostream& o) { r.write_csv(o); });
        return d;
      },
      py::arg("scenario"), py::arg("method") = "leastcore", py::arg("mode") = "joint",
      py::arg("search") = "membership", py::arg("electricity_only_attribution") = false,
      py::arg("workers") = 1);

  m.def(
      "sweep",
      [](const Scenario& s, const std::vector<double>& multipliers) {
        std::vector<std::tuple<double, double, double, double>> rows;
        for (const auto& r : report::run_sweep(s, multipliers)) {
          rows.emplace_back(r.multiplier, r.electricity_only, r.joint, r.data_value());
        }
        return rows;
      },
      py::arg("scenario"), py::arg("multipliers"));

  // Games given as a value table indexed by coalition bitmask.
  m.def("shapley", [](const std::vector<double>& v) {
    return imputation::shapley(table(v)).x;
  });
  m.def("nucleolus", [](const std::vector<double>& v) {
    return imputation::nucleolus(table(v)).x;
  });
  m.def("leastcore", [](const std::vector<double>& v) {
    const imputation::TableGame g = table(v);
    const imputation::EnumerationSearch search(g);
    return least_core_dict(imputation::leastcore_benders(g, search).least_core);
  });
  m.def("check_core", [](const std::vector<double>& v, const std::vector<double>& x,
                         double tol) {
    std::vector<std::pair<std::uint64_t, double>> out;
    for (const auto& c : imputation::check_core(table(v), x, tol)) {
      out.emplace_back(c.coalition.mask(), c.excess);
    }
    return out;
  }, py::arg("values"), py::arg("x"), py::arg("tol") = 1e-6);

  m.def(
      "support_ellipsoid",
      [](const Eigen::VectorXd& a, const Eigen::VectorXd& c, const Eigen::MatrixXd& q,
         double r) { return uncertainty::support_ellipsoid(a, uncertainty::EllipsoidSet(c, q, r)); },
      py::arg("a"), py::arg("center"), py::arg("shape"), py::arg("budget"));
}
