#include <pybind11/eigen.h>
#include <pybind11/functional.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "tunnelsplit/errors.hpp"
#include "tunnelsplit/formulas.hpp"
#include "tunnelsplit/modeltori.hpp"
#include "tunnelsplit/spectral.hpp"
#include "tunnelsplit/wkb.hpp"

namespace py = pybind11;
using namespace tunnel;

namespace {

PotentialSpec make_potential(const std::string& family, double alpha, double a, double omega, double c, double d,
                             double box_factor) {
  return PotentialSpec(family_from_string(family), Coefficients{alpha, a, omega, c, d}, box_factor);
}

py::dict estimate_dict(const SplittingEstimate& s) {
  py::dict d;
  d["method"] = std::string(to_string(s.method));
  d["m"] = s.m;
  d["hbar"] = s.hbar;
  d["energy"] = s.energy;
  d["exponent"] = s.exponent;
  d["prefactor"] = s.prefactor;
  d["value"] = s.value;
  d["inputs_digest"] = s.inputs_digest;
  return d;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Tunnelling splittings in symmetric double wells";

  // messages start with the error class, e.g. "NoLibration: ..."
  py::register_exception<Error>(m, "TunnelError", PyExc_RuntimeError);

  py::class_<PotentialSpec>(m, "Potential")
      .def(py::init(&make_potential), py::arg("family") = "curved-quartic", py::arg("alpha") = 0.25,
           py::arg("a") = 1.0, py::arg("omega") = 2.5, py::arg("c") = 0.0, py::arg("d") = 0.3,
           py::arg("box_factor") = 2.5)
      .def_property_readonly("family", [](const PotentialSpec& p) { return std::string(to_string(p.family())); })
      .def("value", [](const PotentialSpec& p, double x1, double x2) { return p.value(Vec2(x1, x2)); })
      .def("gradient", [](const PotentialSpec& p, double x1, double x2) { return Vec2(p.eval(Vec2(x1, x2)).gradient); })
      .def("hessian", [](const PotentialSpec& p, double x1, double x2) { return Mat2(p.eval(Vec2(x1, x2)).hessian); })
      .def("barrier", &PotentialSpec::barrier)
      .def("saddle", [](const PotentialSpec& p) { return Vec2(p.saddle()); })
      .def("assumptions",
           [](const PotentialSpec& p) {
             const AssumptionReport r = check_quasi1d_assumptions(p);
             py::dict d;
             d["gap_ok"] = r.gap_ok;
             d["lambda1"] = r.lambda1;
             d["lambda2"] = r.lambda2;
             d["ratio"] = r.ratio;
             d["barrier"] = r.barrier;
             return d;
           })
      .def("canonical", &PotentialSpec::canonical);

  py::class_<Instanton>(m, "Instanton")
      .def_readonly("S0", &Instanton::S0)
      .def_readonly("P0", &Instanton::P0)
      .def_readonly("sigma", &Instanton::sigma)
      .def_property_readonly("x0", [](const Instanton& i) { return Vec2(i.x0); })
      .def_readonly("arrival_direction_ok", &Instanton::arrival_direction_ok)
      .def("position", [](const Instanton& i, double t) { return Vec2(i.at(t).x); });
  m.def("compute_instanton", &compute_instanton, py::arg("potential"), py::arg("tol") = 1e-10,
        py::arg("eps_trunc_factor") = 1e-6);

  py::class_<Libration>(m, "Libration")
      .def_readonly("E", &Libration::E)
      .def_readonly("T", &Libration::T)
      .def_readonly("S_E", &Libration::S_E)
      .def_readonly("beta", &Libration::beta)
      .def_property_readonly("yL", [](const Libration& l) { return Vec2(l.yL); })
      .def_property_readonly("yR", [](const Libration& l) { return Vec2(l.yR); })
      .def_property_readonly("monodromy", [](const Libration& l) { return Mat4(l.monodromy); });
  m.def(
      "compute_libration",
      [](const PotentialSpec& p, const Instanton& in, double E, double tol) {
        LibrationOptions o;
        o.tol = tol;
        return compute_libration(p, in, E, o);
      },
      py::arg("potential"), py::arg("instanton"), py::arg("E"), py::arg("tol") = 1e-10);
  m.def("truncation_time", &truncation_time);

  py::class_<WkbConstants>(m, "WkbConstants")
      .def_readonly("lambda1", &WkbConstants::lambda1)
      .def_readonly("lambda2", &WkbConstants::lambda2)
      .def_readonly("S0", &WkbConstants::S0)
      .def_readonly("J", &WkbConstants::J)
      .def_readonly("sigma", &WkbConstants::sigma)
      .def_readonly("P0", &WkbConstants::P0)
      .def_readonly("D", &WkbConstants::D)
      .def_readonly("T", &WkbConstants::T_const);
  m.def("compute_wkb", &compute_wkb, py::arg("potential"), py::arg("instanton"), py::arg("tol") = 1e-10);

  m.def("b_coeff", &b_coeff);
  m.def("log_b_coeff", &log_b_coeff);

  py::class_<Potential1D>(m, "Potential1D")
      .def("v", [](const Potential1D& p, double x) { return p.v(x); })
      .def_readonly("a", &Potential1D::a)
      .def_readonly("barrier", &Potential1D::barrier)
      .def_readonly("lambda_", &Potential1D::lambda);
  m.def("quartic_1d", &quartic_1d, py::arg("alpha") = 1.0, py::arg("a") = 1.0);
  m.def("slice_x1", &slice_x1);
  m.def("barrier_action_1d", &barrier_action_1d);
  m.def("well_period_1d", &well_period_1d);
  m.def("ll_splitting_1d",
        [](const Potential1D& p, double E, double h) { return estimate_dict(ll_splitting_1d(p, E, h)); });
  m.def(
      "excited_splitting_1d",
      [](const Potential1D& p, int mm, double h, bool enforce) {
        return estimate_dict(excited_splitting_1d(p, mm, h, enforce));
      },
      py::arg("potential"), py::arg("m"), py::arg("hbar"), py::arg("enforce_regime") = true);
  m.def("ground_splitting_1d", [](const Potential1D& p, double h) { return estimate_dict(ground_splitting_1d(p, h)); });
  m.def(
      "solve_1d",
      [](const Potential1D& p, double h, double L, int N, int count, bool richardson) {
        const Solve1DResult r = solve_1d(p.v, h, Grid1D{L, N}, count, richardson);
        py::dict d;
        d["even"] = r.even;
        d["odd"] = r.odd;
        d["splittings"] = r.splittings;
        d["splittings_extrapolated"] = r.splittings_extrapolated;
        return d;
      },
      py::arg("potential"), py::arg("hbar"), py::arg("L") = 2.5, py::arg("N") = 2000, py::arg("count") = 4,
      py::arg("richardson") = false);

  py::class_<ActionTable>(m, "ActionTable")
      .def("S", &ActionTable::S_at)
      .def("beta", &ActionTable::beta_at)
      .def("T", &ActionTable::T_at)
      .def_property_readonly("E_min", &ActionTable::E_min)
      .def_property_readonly("E_max", &ActionTable::E_max)
      .def("digest", &ActionTable::digest);
  m.def(
      "build_action_table",
      [](const PotentialSpec& p, const Instanton& in, int n, double lo, double hi) {
        return build_action_table(p, in, default_energy_grid(p, n, lo, hi));
      },
      py::arg("potential"), py::arg("instanton"), py::arg("n") = 36, py::arg("lo_frac") = 2e-3,
      py::arg("hi_frac") = 0.9);
  m.def("theorem1_splitting",
        [](const ActionTable& t, int mm, double h) { return estimate_dict(theorem1_splitting(t, mm, h)); });
  m.def("formula9_splitting", [](const PotentialSpec& p, int mm, double h, const WkbConstants& w) {
    return estimate_dict(formula9_splitting(p, mm, h, w));
  });
  m.def(
      "formula11_splitting",
      [](const ActionTable& t, int mm, double h, const WkbConstants& w, int factor) {
        return estimate_dict(formula11_splitting(t, mm, h, w, factor));
      },
      py::arg("table"), py::arg("m"), py::arg("hbar"), py::arg("wkb"), py::arg("factor") = 2);
  m.def("ground_splitting",
        [](const ActionTable& t, double h) { return estimate_dict(ground_splitting(t, h)); });
  m.def("solve_energy_eq7", [](const ActionTable& t, int mm, double h) { return solve_energy_eq7(t, mm, h).E_tilde; });
  m.def("prop2_check", [](const PotentialSpec& p, const Instanton& in, double E, const WkbConstants& w) {
    const Prop2Result r = prop2_check(p, in, E, w);
    py::dict d;
    d["E"] = r.E;
    d["T"] = r.T;
    d["beta_direct"] = r.beta_direct;
    d["beta_formula"] = r.beta_formula;
    d["gap"] = r.gap;
    return d;
  });
  m.def("action_expansion_check", [](const PotentialSpec& p, const Instanton& in, double E) {
    const ActionRemainder r = action_expansion_check(p, in, E);
    py::dict d;
    d["E"] = r.E;
    d["S_E"] = r.S_E;
    d["T_E"] = r.T_E;
    d["r"] = r.r;
    d["r_over_E"] = r.r_over_E;
    return d;
  });

  py::class_<GridSpec>(m, "Grid")
      .def(py::init([](double L1, double L2, int n1, int n2) { return GridSpec{L1, L2, n1, n2}; }), py::arg("L1") = 2.2,
           py::arg("L2") = 1.2, py::arg("n1") = 385, py::arg("n2") = 257)
      .def_readwrite("L1", &GridSpec::L1)
      .def_readwrite("L2", &GridSpec::L2)
      .def_readwrite("n1", &GridSpec::n1)
      .def_readwrite("n2", &GridSpec::n2);
  m.def(
      "splittings",
      [](const PotentialSpec& p, double h, const GridSpec& g, int mmax) {
        const SpectralResult r = splittings(p, h, g, mmax);
        py::dict d;
        d["eigenvalues"] = r.eigenvalues;
        d["parities"] = r.parities;
        std::vector<double> s;
        for (int mm = 0; mm <= mmax; ++mm) s.push_back(r.splitting(mm));
        d["splittings"] = s;
        return d;
      },
      py::arg("potential"), py::arg("hbar"), py::arg("grid"), py::arg("mmax") = 0);
  m.def(
      "herring_splitting",
      [](const PotentialSpec& p, double h, const GridSpec& g, int mm) { return herring_splitting(p, h, g, mm).delta; },
      py::arg("potential"), py::arg("hbar"), py::arg("grid"), py::arg("m") = 0);
}
