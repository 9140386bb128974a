/*
   Copyright 2026 The spdekit Authors

   Licensed under the Apache License, Version 2.0 (the "License");
   you may not use this file except in compliance with the License.
   You may obtain a copy of the License at

       http://www.apache.org/licenses/LICENSE-2.0

   Unless required by applicable law or agreed to in writing, software
   distributed under the License is distributed on an "AS IS" BASIS,
   WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
   See the License for the specific language governing permissions and
   limitations under the License.
*/
#include <algorithm>
#include <cmath>
#include <cstdint>
#include <iostream>
#include <map>
#include <sstream>
#include <string>

#include "CLI11.hpp"
#include "spdekit/config.hpp"
#include "spdekit/darcy.hpp"
#include "spdekit/fem.hpp"
#include "spdekit/harness.hpp"
#include "spdekit/io.hpp"
#include "spdekit/mesh.hpp"
#include "spdekit/noise.hpp"
#include "spdekit/schemes.hpp"

namespace {

using namespace spdekit;

struct CommonOpts {
    std::string config_path;
    std::string seed_text;
    int threads = 0;  // 0 = keep configured value
    std::string out_dir;
    bool print_config = false;
};

void add_common(CLI::App* cmd, CommonOpts& o) {
    cmd->add_option("--config", o.config_path, "Configuration file (sectioned key = value)");
    cmd->add_option("--seed", o.seed_text, "Override monte_carlo.seed");
    cmd->add_option("--threads", o.threads, "Override monte_carlo.threads");
    cmd->add_option("--out", o.out_dir, "Override output.dir");
    cmd->add_flag("--print-config", o.print_config,
                  "Echo the fully resolved configuration and exit");
}

RunConfig load(const CommonOpts& o) {
    RunConfig cfg = o.config_path.empty() ? parse_config("", spdekit_env_overrides())
                                          : parse_config_file(o.config_path);
    if (!o.seed_text.empty()) {
        char* end = nullptr;
        const unsigned long long v = std::strtoull(o.seed_text.c_str(), &end, 10);
        if (o.seed_text[0] == '-' || end != o.seed_text.c_str() + o.seed_text.size())
            throw ConfigError("--seed expects an unsigned integer, got '" + o.seed_text + "'");
        override_seed(cfg, static_cast<std::uint64_t>(v));
    }
    if (o.threads != 0) override_threads(cfg, o.threads);
    if (!o.out_dir.empty()) override_out_dir(cfg, o.out_dir);
    return cfg;
}

std::string out_base(const RunConfig& cfg) { return cfg.out_dir + "/" + report_basename(cfg); }

void dump_mesh_files(const RunConfig& cfg, const std::string& base) {
    const Mesh mesh = cfg.plan.space == SpaceMethod::fem
                          ? build_uniform_triangulation(cfg.plan.L1, cfg.plan.L2, cfg.plan.nx,
                                                        cfg.plan.ny)
                          : build_fv_grid(cfg.plan.L1, cfg.plan.L2, cfg.plan.nx, cfg.plan.ny);
    std::ostringstream vs;
    dump_vertices_csv(mesh, vs);
    write_text_file(base + "_vertices.csv", vs.str());
    if (cfg.plan.space == SpaceMethod::fem) {
        std::ostringstream ts;
        dump_triangles_csv(mesh, ts);
        write_text_file(base + "_triangles.csv", ts.str());
    }
}

void dump_velocity_file(const ProblemSetup& setup, const std::string& base) {
    write_text_file(base + "_velocity.csv", faces_csv(setup.mesh, setup.darcy.face_velocity));
}

// Low-mode noise trajectories along realization 0's exact path.
void dump_noise_files(const RunConfig& cfg, const ProblemSetup& setup, const std::string& base,
                      int mode_cap) {
    const ExperimentPlan& plan = cfg.plan;
    const double dt = resolve_reference_dt(plan);
    const int n_steps = static_cast<int>(std::llround(plan.T / dt));
    PathGenerator gen(setup.basis, plan.noise, plan.diffusion, setup.scheme_shift,
                      setup.oracle_shift, dt, setup.streams, plan.seed, 0, 0);
    const int cap = std::min(mode_cap, setup.basis.N);

    std::ostringstream os;
    os << "step,t,i,j,o_scheme,o_oracle,dbeta\n";
    NoiseState state = gen.initial();
    for (int k = 0;; ++k) {
        for (int i = 0; i < cap; ++i)
            for (int j = 0; j < cap; ++j) {
                const int m = setup.basis.mode_index(i, j);
                os << k << "," << format_double(state.t) << "," << i << "," << j << ","
                   << format_double(state.o_scheme[m]) << ","
                   << format_double(state.o_oracle.empty() ? 0.0 : state.o_oracle[m]) << ","
                   << format_double(k == 0 ? 0.0 : state.dbeta_last[m]) << "\n";
            }
        if (k == n_steps) break;
        gen.advance(state);
    }
    write_text_file(base + "_noise.csv", os.str());

    std::ostringstream js;
    js << "{\n  \"modes\": [\n";
    bool first = true;
    for (int i = 0; i < cap; ++i)
        for (int j = 0; j < cap; ++j) {
            const int m = setup.basis.mode_index(i, j);
            if (!first) js << ",\n";
            first = false;
            js << "    {\"i\": " << i << ", \"j\": " << j
               << ", \"q\": " << format_double(gen.q()[m])
               << ", \"rate_scheme\": " << format_double(gen.scheme_rates()[m])
               << ", \"rate_oracle\": " << format_double(gen.oracle_rates()[m]) << "}";
        }
    js << "\n  ]\n}\n";
    write_text_file(base + "_noise.json", js.str());
}

int cmd_convergence(const CommonOpts& o) {
    const RunConfig cfg = load(o);
    if (o.print_config) {
        std::cout << print_config(cfg);
        return 0;
    }
    std::ostream* progress = cfg.verbosity >= 2 ? &std::cerr : nullptr;
    const ConvergenceReport rep = run_convergence(cfg.plan, {}, progress);
    const std::string base = out_base(cfg);
    if (cfg.write_csv) write_text_file(base + ".csv", csv_report(rep));
    if (cfg.write_json) write_text_file(base + ".json", json_report(rep, cfg));
    write_text_file(base + ".log", log_report(rep, cfg));
    if (cfg.dump_mesh) dump_mesh_files(cfg, base);
    if (cfg.dump_velocity && cfg.plan.problem == ProblemKind::adr_darcy)
        dump_velocity_file(*build_problem(cfg.plan), base);
    if (cfg.verbosity >= 1) {
        for (const SchemeResult& s : rep.schemes)
            std::cout << scheme_name(s.kind) << ": rate " << format_double(s.fit.rate) << " +/- "
                      << format_double(s.fit.half_width) << "\n";
        std::cout << "report: " << base << ".{csv,json,log}\n";
    }
    for (const std::string& w : rep.warnings) std::cerr << "warning: " << w << "\n";
    if (rep.aborted) {
        std::cerr << "aborted: " << rep.abort_reason << "\n";
        return 1;
    }
    return 0;
}

int cmd_compare(const CommonOpts& o) {
    const RunConfig cfg = load(o);
    if (o.print_config) {
        std::cout << print_config(cfg);
        return 0;
    }
    std::ostream* progress = cfg.verbosity >= 2 ? &std::cerr : nullptr;
    const ComparisonReport rep = compare_fem_fvm(cfg.plan, progress);
    const std::string base = out_base(cfg);
    if (cfg.write_json) write_text_file(base + "_compare.json", json_comparison(rep, cfg));
    if (cfg.write_csv) {
        write_text_file(base + "_fem.csv", csv_report(rep.fem));
        write_text_file(base + "_fvm.csv", csv_report(rep.fvm));
    }
    write_text_file(base + "_compare.log",
                    log_report(rep.fem, cfg) + "\n" + log_report(rep.fvm, cfg));
    if (cfg.verbosity >= 1) {
        std::cout << "max relative rms discrepancy (fem vs fvm): "
                  << format_double(rep.max_rel_discrepancy) << "\n";
        std::cout << "report: " << base << "_compare.json\n";
    }
    if (rep.fem.aborted || rep.fvm.aborted) {
        std::cerr << "aborted: "
                  << (rep.fem.aborted ? rep.fem.abort_reason : rep.fvm.abort_reason) << "\n";
        return 1;
    }
    return 0;
}

int cmd_run(const CommonOpts& o) {
    const RunConfig cfg = load(o);
    if (o.print_config) {
        std::cout << print_config(cfg);
        return 0;
    }
    const ExperimentPlan& plan = cfg.plan;
    const auto setup = build_problem(plan);
    const double dt = resolve_reference_dt(plan);
    const int n_steps = static_cast<int>(std::llround(plan.T / dt));
    const SchemeKind kind = plan.run_modified ? SchemeKind::modified : SchemeKind::standard;

    CgOptions cg;
    const ImplicitStep S = implicit_step_matrix(setup->op, dt, cg);
    PathGenerator gen(setup->basis, plan.noise, plan.diffusion, setup->scheme_shift,
                      setup->oracle_shift, dt, setup->streams, plan.seed, 0, 0);
    SpectralNoiseSource noise(gen, setup->evaluator);

    const std::string base = out_base(cfg);
    std::map<int, double> snaps;
    for (double t : cfg.snapshot_times) snaps[static_cast<int>(std::llround(t / dt))] = t;

    std::vector<int> written;
    const auto on_step = [&](const SchemeState& st) {
        if (snaps.count(st.step) == 0) return;
        write_text_file(base + "_run_step" + std::to_string(st.step) + ".csv",
                        field_csv(setup->mesh, plan.space, st.x));
        written.push_back(st.step);
    };
    const RunResult res = run_realization(kind, S, setup->problem, noise, n_steps,
                                          snaps.empty() ? std::function<void(const SchemeState&)>{}
                                                        : on_step);

    write_text_file(base + "_run_final.csv", field_csv(setup->mesh, plan.space, res.state.x));

    std::ostringstream js;
    js << "{\n";
    js << "  \"scheme\": \"" << scheme_name(kind) << "\",\n";
    js << "  \"dt\": " << format_double(dt) << ",\n";
    js << "  \"steps\": " << n_steps << ",\n";
    js << "  \"seed\": " << plan.seed << ",\n";
    js << "  \"final_l2\": " << format_double(discrete_l2_norm(setup->op, res.state.x)) << ",\n";
    js << "  \"cg_iterations\": " << res.total_cg_iterations << ",\n";
    js << "  \"aborted_at\": " << res.aborted_at << ",\n";
    js << "  \"snapshots\": [";
    for (std::size_t i = 0; i < written.size(); ++i) js << (i ? ", " : "") << written[i];
    js << "]\n}\n";
    write_text_file(base + "_run.json", js.str());

    if (cfg.dump_mesh) dump_mesh_files(cfg, base);
    if (cfg.dump_velocity && plan.problem == ProblemKind::adr_darcy)
        dump_velocity_file(*setup, base);
    if (cfg.dump_noise) dump_noise_files(cfg, *setup, base, 4);

    if (cfg.verbosity >= 1)
        std::cout << "final field: " << base << "_run_final.csv (" << n_steps << " steps of "
                  << scheme_name(kind) << ")\n";
    for (const std::string& w : setup->warnings) std::cerr << "warning: " << w << "\n";
    if (res.aborted_at >= 0) {
        std::cerr << "aborted: implicit solve failed at step " << res.aborted_at << "\n";
        return 1;
    }
    return 0;
}

int cmd_darcy(const CommonOpts& o) {
    const RunConfig cfg = load(o);
    if (o.print_config) {
        std::cout << print_config(cfg);
        return 0;
    }
    const ExperimentPlan& plan = cfg.plan;
    const Mesh mesh = build_fv_grid(plan.L1, plan.L2, plan.nx, plan.ny);
    const DarcyField field = solve_darcy(mesh, plan.darcy.k_base, plan.darcy.streaks,
                                         plan.darcy.viscosity, plan.darcy.p_in, plan.darcy.p_out);

    double max_div = 0.0;
    for (int c = 0; c < static_cast<int>(mesh.cells.size()); ++c)
        max_div = std::max(max_div, std::abs(cell_divergence(mesh, field.face_velocity, c)));
    const BoundaryFlow flow = boundary_flow(mesh, field.face_velocity);

    const std::string base = out_base(cfg) + "_darcy";
    write_text_file(base + "_pressure.csv", field_csv(mesh, SpaceMethod::fvm, field.p));
    write_text_file(base + "_permeability.csv", field_csv(mesh, SpaceMethod::fvm, field.k));
    write_text_file(base + "_velocity.csv", faces_csv(mesh, field.face_velocity));

    std::ostringstream js;
    js << "{\n";
    js << "  \"converged\": " << (field.pressure_report.converged ? "true" : "false") << ",\n";
    js << "  \"iterations\": " << field.pressure_report.iterations << ",\n";
    js << "  \"residual\": " << format_double(field.pressure_report.residual) << ",\n";
    js << "  \"max_cell_divergence\": " << format_double(max_div) << ",\n";
    js << "  \"inflow\": " << format_double(flow.inflow) << ",\n";
    js << "  \"outflow\": " << format_double(flow.outflow) << ",\n";
    js << "  \"max_face_speed\": " << format_double(max_face_speed(mesh, field.face_velocity))
       << ",\n";
    js << "  \"mean_abs_flux\": " << format_double(mean_abs_flux(mesh, field.face_velocity))
       << "\n}\n";
    write_text_file(base + ".json", js.str());

    if (cfg.verbosity >= 1)
        std::cout << "darcy field: " << base << "_{pressure,permeability,velocity}.csv, max |div| = "
                  << format_double(max_div) << "\n";
    return field.pressure_report.converged ? 0 : 1;
}

int cmd_dump_noise(const CommonOpts& o, int mode_cap) {
    const RunConfig cfg = load(o);
    if (o.print_config) {
        std::cout << print_config(cfg);
        return 0;
    }
    const auto setup = build_problem(cfg.plan);
    dump_noise_files(cfg, *setup, out_base(cfg), mode_cap);
    if (cfg.verbosity >= 1)
        std::cout << "noise tables: " << out_base(cfg) << "_noise.{csv,json}\n";
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"spdekit: convergence experiments for semilinear stochastic heat-type equations"};
    app.require_subcommand(1);

    CommonOpts opts;
    int noise_mode_cap = 4;

    CLI::App* c_run = app.add_subcommand(
        "run", "Integrate one noise realization at the reference dt and write field CSVs");
    CLI::App* c_conv = app.add_subcommand(
        "convergence", "Monte-Carlo strong-convergence study over the configured dt ladder");
    CLI::App* c_comp = app.add_subcommand(
        "compare", "Run the same linear plan under FEM and FVM and report the discrepancy");
    CLI::App* c_darcy = app.add_subcommand(
        "darcy-precompute", "Solve the Darcy pressure system and write pressure/velocity tables");
    CLI::App* c_noise = app.add_subcommand(
        "dump-noise", "Write exact noise-mode trajectories along realization 0's path");
    c_noise->add_option("--modes", noise_mode_cap, "Modes per axis to dump (default 4)")
        ->check(CLI::PositiveNumber);

    for (CLI::App* c : {c_run, c_conv, c_comp, c_darcy, c_noise}) add_common(c, opts);

    int rc = 0;
    c_run->callback([&] { rc = cmd_run(opts); });
    c_conv->callback([&] { rc = cmd_convergence(opts); });
    c_comp->callback([&] { rc = cmd_compare(opts); });
    c_darcy->callback([&] { rc = cmd_darcy(opts); });
    c_noise->callback([&] { rc = cmd_dump_noise(opts, noise_mode_cap); });

    try {
        app.parse(argc, argv);
        return rc;
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        std::cerr << app.help();
        return 2;
    } catch (const spdekit::ConfigError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const std::invalid_argument& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
}
