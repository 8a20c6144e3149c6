#include <pybind11/functional.h>
#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include "wparab/error.hpp"
#include "wparab/experiment.hpp"
#include "wparab/flattening.hpp"
#include "wparab/geometry.hpp"
#include "wparab/io.hpp"
#include "wparab/maximal.hpp"
#include "wparab/oscillation.hpp"
#include "wparab/solver.hpp"
#include "wparab/weights.hpp"

namespace py = pybind11;
using namespace wparab;

namespace {

// Reports cross the boundary as their canonical JSON text.
std::string as_json(const AuditReport& r) { return report_to_json(r); }

CoefficientField scalar_coefficients(double a, double b, double value, double nu, double T, int cells) {
  return CoefficientField::constant(interval(a, b), {cells}, T, 1, value * Matrix::Identity(1, 1), nu);
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Weighted parabolic equations: weights, solver and audits";

  static py::exception<Error> error(m, "Error");
  py::register_exception_translator([](std::exception_ptr p) {
    try {
      if (p) std::rethrow_exception(p);
    } catch (const Error& e) {
      error(e.what());
    }
  });

  py::class_<Weight>(m, "Weight")
      .def_static("power", [](double a, double b, double center, double alpha, double scale) {
            return Weight::power(interval(a, b), {center}, alpha, scale);
          }, py::arg("a"), py::arg("b"), py::arg("center"), py::arg("alpha"), py::arg("scale") = 1.0)
      .def_static("constant", [](double a, double b, double value) { return Weight::constant(interval(a, b), value); },
                  py::arg("a"), py::arg("b"), py::arg("value") = 1.0)
      .def("value", [](const Weight& w, double x) { return w.value({x}); })
      .def("pow", &Weight::pow)
      .def("scaled", &Weight::scaled)
      .def("ball_average", [](const Weight& w, double x0, double r, double p) { return ball_average(w, {x0}, r, p); },
           py::arg("x0"), py::arg("r"), py::arg("p") = 1.0)
      .def("aq_ball_quantity", [](const Weight& w, double q, double x0, double r) {
        return aq_ball_quantity(w, q, {x0}, r);
      });

  m.def("aq_characteristic", [](const Weight& w, double q, int nodes, int radii) {
    return aq_characteristic(w, q, BallFamily::default_for(w, nodes, radii));
  }, py::arg("w"), py::arg("q"), py::arg("nodes") = 33, py::arg("radii") = 32);
  m.def("check_beta_condition", [](const Weight& w, double M0) {
    return as_json(check_beta_condition(w, WeightContext{1, M0}, BallFamily::default_for(w)));
  });

  m.def("height", [](const Weight& w, double x0, double r) { return height(w, {x0}, r); });
  m.def("height_inverse", [](const Weight& w, double x0, double s) { return height_inverse(w, {x0}, s); });
  m.def("quasi_distance", [](const Weight& w, double x, double t, double x0, double t0) {
    return quasi_distance(w, {{x}, t}, {{x0}, t0});
  });
  m.def("quasi_triangle_audit", [](const Weight& w, double M0, std::int64_t samples, std::uint64_t seed) {
    return as_json(quasi_triangle_audit(w, QuasiMetricParams::estimate(w, WeightContext{1, M0}), samples, seed));
  });

  py::class_<Grid1D>(m, "Grid1D")
      .def(py::init([](double a, double b, int nx, double T, int nt) {
             Grid1D g;
             g.a = a;
             g.b = b;
             g.nx = nx;
             g.t1 = T;
             g.nt = nt;
             g.validate();
             return g;
           }), py::arg("a"), py::arg("b"), py::arg("nx"), py::arg("T"), py::arg("nt"))
      .def_readonly("nx", &Grid1D::nx)
      .def_readonly("nt", &Grid1D::nt)
      .def("x", &Grid1D::x)
      .def("t", &Grid1D::t);

  py::class_<SpaceTimeField>(m, "SpaceTimeField")
      .def(py::init<const Grid1D&, double>(), py::arg("grid"), py::arg("value") = 0.0)
      .def_static("sample", &SpaceTimeField::sample)
      .def("values", [](const SpaceTimeField& f) {
        const Grid1D& g = f.grid();
        py::array_t<double> a({g.nt, g.nx});
        std::copy(f.values().begin(), f.values().end(), a.mutable_data());
        return a;
      });

  py::class_<CoefficientField>(m, "CoefficientField")
      .def_static("constant", &scalar_coefficients, py::arg("a"), py::arg("b"), py::arg("value"),
                  py::arg("nu"), py::arg("T"), py::arg("cells") = 1);

  py::class_<SolutionField>(m, "SolutionField")
      .def("values", [](const SolutionField& u) {
        const Grid1D& g = u.grid();
        py::array_t<double> a({g.nt + 1, g.nx + 1});
        std::copy(u.values().begin(), u.values().end(), a.mutable_data());
        return a;
      })
      .def("write_csv", &SolutionField::write_csv)
      .def("write_binary", &SolutionField::write_binary);

  m.def("solve_ivbp", py::overload_cast<const Weight&, const CoefficientField&, const SpaceTimeField&,
                                        const Grid1D&, const std::function<double(double)>&>(&solve_ivbp),
        py::arg("beta"), py::arg("A"), py::arg("F"), py::arg("grid"), py::arg("initial"));
  m.def("manufactured_forcing", &manufactured_forcing);
  m.def("manufactured_error", [](const SolutionField& u) {
    const Grid1D& g = u.grid();
    return l2_error(u, [&](double x, double t) { return manufactured_exact(g, x, t); });
  });

  m.def("oscillation_audit", [](const CoefficientField& A, const Weight& beta, double delta, double R0) {
    OscillationConfig c;
    c.delta = delta;
    c.R0 = R0;
    return as_json(oscillation_supremum(A, beta, c));
  });
  m.def("energy_audit", [](const SolutionField& u, const SpaceTimeField& F, const Weight& beta, double x0,
                           double t0, double r, double budget) {
    return as_json(energy_audit(u, F, beta, {{x0}, t0}, r, budget, budget));
  });
  m.def("apriori_ratio", [](const SolutionField& u, const CoefficientField& A, const SpaceTimeField& F,
                            double p, double budget) { return as_json(apriori_ratio(u, A, F, p, budget)); });
  m.def("levelset_decay_audit", [](const SolutionField& u, const SpaceTimeField& F, const Weight& beta) {
    return as_json(levelset_decay_audit(u, F, beta, LevelsetOptions{}));
  });

  m.def("phi_map", [](double delta, double x1, double x2) {
    const Point y = phi_map(BoundaryChart::bump(delta), {x1, x2});
    return std::make_pair(y[0], y[1]);
  });
  m.def("phi_inverse", [](double delta, double y1, double y2) {
    const Point x = phi_inverse(BoundaryChart::bump(delta), {y1, y2});
    return std::make_pair(x[0], x[1]);
  });

  m.def("run_experiment", [](const std::string& stage, const std::filesystem::path& config,
                             const std::filesystem::path& out, std::optional<std::uint64_t> seed) {
    const auto s = parse_stage(stage);
    if (!s) fail(ErrorKind::ConfigError, "unknown stage " + stage);
    const RunResult r = run_experiment(*s, config, out, seed);
    py::dict d;
    d["exit_code"] = r.exit_code;
    d["message"] = r.message;
    d["reports"] = r.reports;
    d["files"] = r.files;
    return d;
  }, py::arg("stage"), py::arg("config"), py::arg("out"), py::arg("seed") = py::none());
}
