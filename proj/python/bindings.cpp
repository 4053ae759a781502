#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <sstream>

#include "qhlab/dimension.hpp"
#include "qhlab/poincare.hpp"
#include "qhlab/qhchains.hpp"
#include "qhlab/report.hpp"

namespace py = pybind11;
using namespace qhlab;

namespace {

Point to_point(std::pair<double, double> p) { return {p.first, p.second}; }

RunConfig config_from(const py::dict& d) {
  RunConfig c;
  for (const auto& [k, v] : d) set_config_value(c, py::str(k), py::str(v));
  validate_config(c);
  return c;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Whitney, quasihyperbolic and Poincare analyses of planar domains";
  m.attr("__version__") = version();

  py::register_exception<PreconditionError>(m, "PreconditionError", PyExc_ValueError);
  py::register_exception<InvariantError>(m, "InvariantError", PyExc_RuntimeError);

  py::class_<Domain>(m, "Domain")
      .def("contains", [](const Domain& d, std::pair<double, double> p) { return d.contains(to_point(p)); })
      .def("boundary_distance",
           [](const Domain& d, std::pair<double, double> p) { return d.boundary_distance(to_point(p)); })
      .def_property_readonly("bounds",
                             [](const Domain& d) {
                               const Box b = d.bounds();
                               return py::make_tuple(b.lo.x, b.lo.y, b.hi.x, b.hi.y);
                             })
      .def_property_readonly("distinguished_point",
                             [](const Domain& d) {
                               const Point p = d.distinguished_point();
                               return py::make_tuple(p.x, p.y);
                             })
      .def_property_readonly("builder", [](const Domain& d) { return d.provenance().builder; })
      .def("to_text", [](const Domain& d) {
        std::ostringstream out;
        write_domain(out, d);
        return out.str();
      });

  m.def("unit_square", &unit_square);
  m.def("l_shape", &l_shape);
  m.def("disk_minus_fractal", &build_disk_minus_fractal, py::arg("lambda_"), py::arg("depth"));
  m.def(
      "beta_version",
      [](const Domain& base, int base_jmax, double beta) {
        return build_beta_version(base, whitney_decompose(base, base_jmax), beta).domain;
      },
      py::arg("base"), py::arg("base_jmax"), py::arg("beta"));
  m.def("read_domain", [](const std::string& text) {
    std::istringstream in(text);
    return read_domain(in);
  });

  py::class_<WhitneyDecomposition>(m, "WhitneyDecomposition")
      .def("__len__", &WhitneyDecomposition::size)
      .def("census", [](const WhitneyDecomposition& w) { return level_counts(w); })
      .def("cube", [](const WhitneyDecomposition& w, std::size_t i) {
        if (i >= w.size()) throw py::index_error("cube id out of range");
        const Box b = w.box(i);
        return py::make_tuple(w.scale_level(i), b.lo.x, b.lo.y, b.hi.x, b.hi.y, w.cubes[i].dist);
      });
  m.def(
      "whitney_decompose", [](const Domain& d, int j_max) { return whitney_decompose(d, j_max); }, py::arg("domain"),
      py::arg("j_max"));

  m.def(
      "qhbc_fit",
      [](const Domain& d, int j_max) {
        const WhitneyDecomposition w = whitney_decompose(d, j_max);
        CubeGraph g = build_cube_graph(w);
        qh_edge_weights(g, w, d);
        const ChainTree t = chain_tree(g, w, base_cube(w, d.distinguished_point()));
        const QhbcFit f = qhbc_fit(t, g);
        py::dict r;
        r["beta"] = f.beta;
        r["c"] = f.c;
        r["slope"] = f.slope;
        r["used"] = f.used;
        return r;
      },
      py::arg("domain"), py::arg("j_max"));

  m.def(
      "box_count_dimension",
      [](const Domain& d, int levels) {
        return minkowski_fit(box_count_series(boundary_primitives(d), dyadic_radii(levels), 1.0)).slope;
      },
      py::arg("domain"), py::arg("levels") = 10);
  m.def(
      "fractal_box_count",
      [](double lambda, int depth, double r) { return box_count(ifs_primitives(make_four_corner_ifs(lambda), depth), r); },
      py::arg("lambda_"), py::arg("depth"), py::arg("r"));

  m.def("threshold_p0", &threshold_p0, py::arg("q"), py::arg("lambda_"), py::arg("beta"), py::arg("n") = 2);
  m.def(
      "poincare_predicate",
      [](double q, double p, double lambda, double beta, int n, std::optional<double> c2bar) {
        const PredicateResult r = supports_poincare_predicate({n, q, p, lambda, beta}, c2bar);
        py::dict d;
        d["verdict"] = verdict_name(r.verdict);
        d["p0"] = r.p0;
        d["rule"] = r.rule;
        d["conditional"] = r.conditional;
        return d;
      },
      py::arg("q"), py::arg("p"), py::arg("lambda_"), py::arg("beta"), py::arg("n") = 2,
      py::arg("c2bar") = py::none());
  m.def(
      "neumann_q_solvable",
      [](int n, double beta, double q) { return neumann_q_solvable(n, beta, q) == Solvable::True; }, py::arg("n"),
      py::arg("beta"), py::arg("q"));

  m.def(
      "run_pipeline",
      [](const py::dict& config, const std::string& out) {
        const RunConfig c = config_from(config);
        py::gil_scoped_release release;
        return run_pipeline(c, out);
      },
      py::arg("config"), py::arg("out"));
}
