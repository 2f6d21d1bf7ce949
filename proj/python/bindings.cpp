// Python module over the core: meshes, the tensor interpolation operator and
// its chain-rule residual, configuration presets, full runs, VTK export, and
// the randomized property sweeps.

#include <pybind11/eigen.h>
#include <pybind11/functional.h>
#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <optional>

#include "vpf/config.hpp"
#include "vpf/diagnostics.hpp"
#include "vpf/fespace.hpp"
#include "vpf/lambda_op.hpp"
#include "vpf/mesh.hpp"
#include "vpf/model.hpp"
#include "vpf/propcheck.hpp"
#include "vpf/solver.hpp"
#include "vpf/vtkio.hpp"

namespace py = pybind11;
using namespace vpf;

namespace {

SymMat2 sym_from(const Eigen::Matrix2d& M) { return SymMat2::from_full(0.5 * (M + M.transpose())); }

std::array<SymMat2, 3> sym_triple(const Eigen::Matrix2d& B0, const Eigen::Matrix2d& B1,
                                  const Eigen::Matrix2d& B2) {
    return {sym_from(B0), sym_from(B1), sym_from(B2)};
}

py::dict diag_dict(const StepDiagnostics& d) {
    py::dict o;
    o["time"] = d.time;
    o["energy"] = d.energy;
    o["tumour_volume"] = d.tumour_volume;
    o["spd_margin"] = d.spd_margin;
    o["phi_overshoot"] = d.phi_overshoot;
    o["iters"] = d.iters;
    o["res_cons"] = d.res_cons;
    o["res_div"] = d.res_div;
    o["res_mu"] = d.res_mu;
    o["sigma_h1"] = d.sigma_h1;
    return o;
}

py::dict state_dict(const FieldState& s) {
    py::dict o;
    o["n"] = s.n;
    o["time"] = s.time;
    o["phi"] = s.phi.c;
    o["mu"] = s.mu.c;
    o["sigma"] = s.sigma.c;
    o["p"] = s.p.c;
    o["v"] = s.v.c;
    o["Bxx"] = s.B.xx;
    o["Byy"] = s.B.yy;
    o["Bxy"] = s.B.xy;
    return o;
}

}  // namespace

PYBIND11_MODULE(_vpf, m) {
    m.doc() = "viscoelastic phase-field tumour growth core";

    py::register_exception<MeshError>(m, "MeshError");
    py::register_exception<SolverError>(m, "SolverError");
    py::register_exception<ConfigError>(m, "ConfigError");
    py::register_exception<SpdError>(m, "SpdError");

    py::class_<Box>(m, "Box")
        .def(py::init([](double x0, double y0, double x1, double y1) {
                 return Box{x0, y0, x1, y1};
             }),
             py::arg("x0"), py::arg("y0"), py::arg("x1"), py::arg("y1"))
        .def_readwrite("x0", &Box::x0)
        .def_readwrite("y0", &Box::y0)
        .def_readwrite("x1", &Box::x1)
        .def_readwrite("y1", &Box::y1);

    py::class_<Segment>(m, "Segment")
        .def(py::init([](double ax, double ay, double bx, double by) {
                 return Segment{ax, ay, bx, by};
             }),
             py::arg("ax"), py::arg("ay"), py::arg("bx"), py::arg("by"))
        .def_readwrite("ax", &Segment::ax)
        .def_readwrite("ay", &Segment::ay)
        .def_readwrite("bx", &Segment::bx)
        .def_readwrite("by", &Segment::by);

    py::class_<TriMesh>(m, "TriMesh")
        .def_property_readonly("vertices",
                               [](const TriMesh& t) {
                                   py::array_t<double> a({t.vertex.size(), std::size_t(2)});
                                   auto r = a.mutable_unchecked<2>();
                                   for (std::size_t i = 0; i < t.vertex.size(); ++i) {
                                       r(i, 0) = t.vertex[i].x;
                                       r(i, 1) = t.vertex[i].y;
                                   }
                                   return a;
                               })
        .def_property_readonly("triangles",
                               [](const TriMesh& t) {
                                   py::array_t<int> a({t.tri.size(), std::size_t(3)});
                                   auto r = a.mutable_unchecked<2>();
                                   for (std::size_t i = 0; i < t.tri.size(); ++i)
                                       for (int k = 0; k < 3; ++k) r(i, k) = t.tri[i][k];
                                   return a;
                               })
        .def("area", &TriMesh::area)
        .def("h_min", &TriMesh::h_min)
        .def("h_max", &TriMesh::h_max)
        .def("locate", [](const TriMesh& t, double x, double y) { return t.locate({x, y}); });

    m.def(
        "build_structured",
        [](const Box& b, int n, const std::vector<Segment>& d) { return build_structured(b, n, d); },
        py::arg("domain"), py::arg("n"), py::arg("dirichlet") = std::vector<Segment>{});
    m.def(
        "refine_near_interface",
        [](const TriMesh& t, const Eigen::VectorXd& phi, double target_h, double threshold) {
            std::vector<double> p(phi.data(), phi.data() + phi.size());
            return refine_near_interface(t, p, target_h, threshold);
        },
        py::arg("mesh"), py::arg("phi"), py::arg("target_h"), py::arg("indicator_threshold"));

    // --------------------------------------------------------- tensor calculus
    py::class_<LambdaElement<2>>(m, "LambdaElement")
        .def_property_readonly("coef",
                               [](const LambdaElement<2>& e) {
                                   return py::make_tuple(e.coef[0], e.coef[1]);
                               })
        .def_property_readonly("degenerate",
                               [](const LambdaElement<2>& e) {
                                   return py::make_tuple(e.degenerate[0], e.degenerate[1]);
                               })
        .def("lam", [](const LambdaElement<2>& e, int i, int j) { return e.lam(i, j).full(); },
             py::arg("i"), py::arg("j"));

    m.def(
        "build_lambda",
        [](const Eigen::Matrix2d& B0, const Eigen::Matrix2d& B1, const Eigen::Matrix2d& B2,
           const Eigen::Matrix2d& A, std::optional<double> delta) {
            return build_lambda<2>(sym_triple(B0, B1, B2), A, delta);
        },
        py::arg("B0"), py::arg("B1"), py::arg("B2"), py::arg("A"),
        py::arg("delta") = std::nullopt);
    m.def(
        "chain_rule_residual",
        [](const Eigen::Matrix2d& B0, const Eigen::Matrix2d& B1, const Eigen::Matrix2d& B2,
           const Eigen::Matrix2d& A, std::optional<double> delta) {
            const auto Bv = sym_triple(B0, B1, B2);
            return chain_rule_residual<2>(build_lambda<2>(Bv, A, delta), Bv, delta);
        },
        py::arg("B0"), py::arg("B1"), py::arg("B2"), py::arg("A"),
        py::arg("delta") = std::nullopt);

    // ---------------------------------------------------------- configuration
    py::class_<ModelParams>(m, "ModelParams")
        .def(py::init<>())
        .def_readwrite("dt", &ModelParams::dt)
        .def_readwrite("P", &ModelParams::P)
        .def_readwrite("eps", &ModelParams::eps)
        .def_readwrite("beta", &ModelParams::beta)
        .def_readwrite("chi_phi", &ModelParams::chi_phi)
        .def_readwrite("kappa_t", &ModelParams::kappa_t)
        .def_readwrite("C_consumption", &ModelParams::C_consumption)
        .def_readwrite("K_boundary", &ModelParams::K_boundary)
        .def_readwrite("eta_bar", &ModelParams::eta_bar)
        .def_readwrite("G_stress", &ModelParams::G_stress)
        .def_readwrite("tau_bar", &ModelParams::tau_bar)
        .def_readwrite("alpha", &ModelParams::alpha)
        .def_readwrite("T_end", &ModelParams::T_end)
        .def_readwrite("tol_nonlinear", &ModelParams::tol_nonlinear)
        .def_readwrite("max_nonlinear_iters", &ModelParams::max_nonlinear_iters)
        .def_readwrite("tol_cg", &ModelParams::tol_cg)
        .def_readwrite("tol_saddle", &ModelParams::tol_saddle)
        .def("validate", &ModelParams::validate);

    py::class_<RunControl>(m, "RunControl")
        .def(py::init<>())
        .def_readwrite("domain", &RunControl::domain)
        .def_readwrite("n_coarse", &RunControl::n_coarse)
        .def_readwrite("dirichlet", &RunControl::dirichlet)
        .def_readwrite("adapt", &RunControl::adapt)
        .def_readwrite("target_h", &RunControl::target_h)
        .def_readwrite("indicator_threshold", &RunControl::indicator_threshold)
        .def_readwrite("remesh_every", &RunControl::remesh_every)
        .def_readwrite("naive_lambda", &RunControl::naive_lambda)
        .def_readwrite("project_B0", &RunControl::project_B0);

    py::class_<RunConfig>(m, "RunConfig")
        .def(py::init<>())
        .def_readwrite("model", &RunConfig::model)
        .def_readwrite("control", &RunConfig::control)
        .def_readwrite("preset", &RunConfig::preset)
        .def_readwrite("out_dir", &RunConfig::out_dir)
        .def_readwrite("output_stride", &RunConfig::output_stride)
        .def_readwrite("seed", &RunConfig::seed)
        .def_readwrite("threads", &RunConfig::threads);

    m.def("preset_names", &preset_names);
    m.def("preset_config", &preset_config, py::arg("name"));
    m.def("apply_config_text", &apply_config_text, py::arg("config"), py::arg("text"));

    // ------------------------------------------------------------------- runs
    m.def(
        "run",
        [](const RunConfig& cfg, const py::object& callback) {
            const InitialData data = default_initial_data(cfg.model.eps);
            StepCallback cb;
            if (!callback.is_none())
                cb = [&callback](int n, const TriMesh&, const FieldState&,
                                 const StepDiagnostics& d) { callback(n, diag_dict(d)); };
            const RunResult res = run(cfg.model, data, cfg.control, cb);
            py::dict o;
            o["ok"] = res.ok;
            o["message"] = res.message;
            o["state"] = state_dict(res.state);
            o["mesh"] = *res.mesh;
            py::list series;
            for (const auto& d : res.series) series.append(diag_dict(d));
            o["series"] = series;
            return o;
        },
        py::arg("config"), py::arg("callback") = py::none());

    m.def(
        "write_vtk",
        [](const std::string& path, const TriMesh& t, const py::dict& state) {
            FieldState s;
            s.n = state["n"].cast<int>();
            s.time = state["time"].cast<double>();
            s.phi.c = state["phi"].cast<Vec>();
            s.mu.c = state["mu"].cast<Vec>();
            s.sigma.c = state["sigma"].cast<Vec>();
            s.p.c = state["p"].cast<Vec>();
            s.v.c = state["v"].cast<Vec>();
            s.B.xx = state["Bxx"].cast<Vec>();
            s.B.yy = state["Byy"].cast<Vec>();
            s.B.xy = state["Bxy"].cast<Vec>();
            write_vtk(path, t, s);
        },
        py::arg("path"), py::arg("mesh"), py::arg("state"));

    // --------------------------------------------------------- property sweeps
    m.def(
        "chain_rule_sweep",
        [](std::uint64_t seed, int n) {
            const ChainRuleSweep s = chain_rule_sweep(seed, n);
            py::dict o;
            o["configs"] = s.configs;
            o["max_residual"] = s.max_residual;
            o["lambda_min"] = s.lambda_min;
            o["lambda_max"] = s.lambda_max;
            return o;
        },
        py::arg("seed") = 9231, py::arg("n_configs") = 500);
    m.def("gradient_log_sweep", &gradient_log_sweep, py::arg("seed") = 9232,
          py::arg("n_fields") = 200);
    m.def(
        "norm_equiv_sweep",
        [](std::uint64_t seed, int n) {
            const NormEquivSweep s = norm_equiv_sweep(seed, n);
            return py::make_tuple(s.ratio_min, s.ratio_max);
        },
        py::arg("seed") = 9233, py::arg("n_fields") = 1000);
    m.def("lambda_consistency_order", []() {
        const ConsistencyOrder c = lambda_consistency_order();
        py::dict o;
        o["errors"] = py::make_tuple(c.errors[0], c.errors[1], c.errors[2]);
        o["order"] = c.order;
        return o;
    });
}
