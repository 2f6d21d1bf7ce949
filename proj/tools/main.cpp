// Command line front end: `run` time-steps an experiment and streams
// diagnostics/VTK output, `check` exercises the randomized structure
// properties of the tensor calculus, `meshinfo` reports the adapted mesh.

#include <CLI11.hpp>
#include <Eigen/Core>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <string>

#include "vpf/config.hpp"
#include "vpf/diagnostics.hpp"
#include "vpf/mesh.hpp"
#include "vpf/model.hpp"
#include "vpf/propcheck.hpp"
#include "vpf/solver.hpp"
#include "vpf/vtkio.hpp"

namespace {

std::string preset_list() {
    std::string s;
    for (const auto& n : vpf::preset_names()) {
        if (!s.empty()) s += ", ";
        s += n;
    }
    return s;
}

vpf::RunConfig resolve_config(const std::string& preset, const std::string& config_path,
                              const std::string& out_override, int threads_override) {
    vpf::RunConfig cfg = vpf::preset_config(preset);
    if (const char* env = std::getenv("VPF_OUT_DIR")) cfg.out_dir = env;
    if (!config_path.empty()) vpf::apply_config_file(cfg, config_path);
    if (!out_override.empty()) cfg.out_dir = out_override;
    if (threads_override > 0) cfg.threads = threads_override;
    return cfg;
}

std::string vtk_path(const std::string& dir, int n) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "/state_%06d.vtk", n);
    return dir + buf;
}

// mirrors the adaptation fixed point used at the start of a run
vpf::TriMesh adapted_mesh(const vpf::RunConfig& cfg, const vpf::InitialData& data) {
    vpf::TriMesh mesh =
        vpf::build_structured(cfg.control.domain, cfg.control.n_coarse, cfg.control.dirichlet);
    if (!cfg.control.adapt) return mesh;
    for (int round = 0; round < 40; ++round) {
        std::vector<double> phi(mesh.vertex.size());
        for (std::size_t i = 0; i < phi.size(); ++i) phi[i] = data.phi0(mesh.vertex[i]);
        vpf::TriMesh next = vpf::refine_near_interface(mesh, phi, cfg.control.target_h,
                                                       cfg.control.indicator_threshold);
        const bool fixed = next.vertex.size() == mesh.vertex.size() &&
                           next.tri.size() == mesh.tri.size();
        mesh = std::move(next);
        if (fixed) break;
    }
    return mesh;
}

int cmd_run(const vpf::RunConfig& cfg) {
    std::filesystem::create_directories(cfg.out_dir);
    Eigen::setNbThreads(cfg.threads);

    const vpf::InitialData data = vpf::default_initial_data(cfg.model.eps);
    vpf::CsvWriter csv(cfg.out_dir + "/diagnostics.csv");
    const int n_total = static_cast<int>(std::llround(cfg.model.T_end / cfg.model.dt));
    const int stride = cfg.output_stride;

    const vpf::StepCallback cb = [&](int n, const vpf::TriMesh& mesh,
                                     const vpf::FieldState& state,
                                     const vpf::StepDiagnostics& d) {
        csv.row(d);
        if (n == 0 || n == n_total || (stride > 0 && n % stride == 0)) {
            vpf::write_vtk(vtk_path(cfg.out_dir, n), mesh, state);
            std::printf("step %6d  t=%8.4f  E=%.8e  vol=%.6f  margin=%.3e  iters=%d\n", n,
                        d.time, d.energy, d.tumour_volume, d.spd_margin, d.iters);
            std::fflush(stdout);
        }
    };

    const vpf::RunResult res = vpf::run(cfg.model, data, cfg.control, cb);
    csv.flush();
    if (!res.ok) {
        std::fprintf(stderr, "run failed at %s\n", res.message.c_str());
        return 1;
    }
    std::printf("done: %d steps, outputs in %s\n", res.state.n, cfg.out_dir.c_str());
    return 0;
}

int cmd_check(std::uint64_t seed, int n_configs, int n_fields) {
    int failures = 0;
    const auto verdict = [&](bool ok) {
        failures += ok ? 0 : 1;
        return ok ? "ok" : "VIOLATED";
    };

    const vpf::ChainRuleSweep cr = vpf::chain_rule_sweep(seed, n_configs);
    std::printf("chain rule      : %d configs, max residual %.3e  [%s]\n", cr.configs,
                cr.max_residual, verdict(cr.max_residual <= 1e-10));
    std::printf("coefficients    : range [%.6f, %.6f]  [%s]\n", cr.lambda_min, cr.lambda_max,
                verdict(cr.lambda_min >= 0.0 && cr.lambda_max <= 1.0));

    const double slack = vpf::gradient_log_sweep(seed + 1, n_fields);
    std::printf("gradient-log    : %d fields, min slack %.3e  [%s]\n", n_fields, slack,
                verdict(slack >= -1e-11));

    const vpf::NormEquivSweep ne = vpf::norm_equiv_sweep(seed + 2, 1000);
    std::printf("norm equivalence: ratios in [%.6f, %.6f]  [%s]\n", ne.ratio_min, ne.ratio_max,
                verdict(ne.ratio_min >= 1.0 - 1e-12 && ne.ratio_max <= 2.0 + 1e-12));

    const vpf::ConsistencyOrder co = vpf::lambda_consistency_order();
    std::printf("consistency     : errors %.3e %.3e %.3e, order %.3f  [%s]\n", co.errors[0],
                co.errors[1], co.errors[2], co.order, verdict(co.order >= 0.9));

    return failures == 0 ? 0 : 1;
}

int cmd_meshinfo(const vpf::RunConfig& cfg) {
    const vpf::InitialData data = vpf::default_initial_data(cfg.model.eps);
    const vpf::TriMesh mesh = adapted_mesh(cfg, data);
    int n_dirichlet = 0;
    for (const auto& f : mesh.bfacet)
        if (f.tag == vpf::BTag::dirichlet) ++n_dirichlet;
    std::printf("vertices        : %zu\n", mesh.vertex.size());
    std::printf("triangles       : %zu\n", mesh.tri.size());
    std::printf("h range         : [%.6f, %.6f]\n", mesh.h_min(), mesh.h_max());
    std::printf("area            : %.12f\n", mesh.area());
    std::printf("boundary facets : %zu (%d velocity-pinned)\n", mesh.bfacet.size(), n_dirichlet);
    std::printf("quadtree levels : %d\n", mesh.max_level);
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"viscoelastic phase-field tumour growth simulator"};
    app.require_subcommand(1);

    std::string preset = "example1_k0", config_path, out_override;
    int threads = 0;

    CLI::App* run_cmd = app.add_subcommand("run", "time-step an experiment");
    run_cmd->add_option("--preset", preset, "parameter set: " + preset_list());
    run_cmd->add_option("--config", config_path, "configuration file overlaying the preset")
        ->check(CLI::ExistingFile);
    run_cmd->add_option("--out", out_override, "output directory (also VPF_OUT_DIR)");
    run_cmd->add_option("--threads", threads, "Eigen thread count");

    std::uint64_t seed = 9231;
    int n_configs = 500, n_fields = 200;
    CLI::App* check_cmd = app.add_subcommand("check", "randomized structure property sweeps");
    check_cmd->add_option("--seed", seed, "base RNG seed");
    check_cmd->add_option("--configs", n_configs, "chain-rule sample count");
    check_cmd->add_option("--fields", n_fields, "gradient-log field count");

    CLI::App* mesh_cmd = app.add_subcommand("meshinfo", "report the initially adapted mesh");
    mesh_cmd->add_option("--preset", preset, "parameter set: " + preset_list());
    mesh_cmd->add_option("--config", config_path, "configuration file overlaying the preset")
        ->check(CLI::ExistingFile);

    CLI11_PARSE(app, argc, argv);

    try {
        if (run_cmd->parsed())
            return cmd_run(resolve_config(preset, config_path, out_override, threads));
        if (check_cmd->parsed()) return cmd_check(seed, n_configs, n_fields);
        if (mesh_cmd->parsed())
            return cmd_meshinfo(resolve_config(preset, config_path, out_override, threads));
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 2;
    }
    return 0;
}
