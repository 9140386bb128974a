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
#include "spdekit/harness.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <limits>
#include <mutex>
#include <optional>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <thread>

#include "spdekit/fvm.hpp"
#include "spdekit/sparse.hpp"

namespace spdekit {

const char* scheme_name(SchemeKind kind) {
    return kind == SchemeKind::modified ? "modified" : "standard";
}
const char* problem_name(ProblemKind kind) {
    return kind == ProblemKind::linear_rd ? "linear_rd" : "adr_darcy";
}
const char* space_name(SpaceMethod method) { return method == SpaceMethod::fem ? "fem" : "fvm"; }
const char* coupling_name(CouplingMode mode) {
    return mode == CouplingMode::coupled ? "coupled" : "independent";
}

double resolve_reference_dt(const ExperimentPlan& plan) {
    if (plan.dt_reference > 0.0) return plan.dt_reference;
    const double finest = plan.dt_ladder.back();
    return plan.problem == ProblemKind::adr_darcy ? finest / 8.0 : finest;
}

namespace {

// Compensated (Kahan) accumulator so aggregate statistics do not depend on
// how the per-realization slots were produced.
struct Kahan {
    double sum = 0.0, c = 0.0;
    void add(double v) {
        const double y = v - c;
        const double t = sum + y;
        c = (t - sum) - y;
        sum = t;
    }
};

bool integer_multiple(double a, double b, long long& k) {
    if (!(a > 0.0) || !(b > 0.0)) return false;
    const double r = a / b;
    k = std::llround(r);
    return k >= 1 && std::abs(r - static_cast<double>(k)) <= 1e-9 * std::max(1.0, r);
}

[[noreturn]] void plan_error(const std::string& what) {
    throw std::invalid_argument("experiment plan: " + what);
}

}  // namespace

void validate_plan(const ExperimentPlan& plan) {
    if (plan.nx < 2 || plan.ny < 2) plan_error("grid must be at least 2x2");
    if (!(plan.L1 > 0.0) || !(plan.L2 > 0.0)) plan_error("domain extents must be positive");
    if (plan.modes < 1) plan_error("modes must be >= 1");
    if (plan.noise.r != 1 && plan.noise.r != 2) plan_error("noise r must be 1 or 2 (got " +
                                                           std::to_string(plan.noise.r) + ")");
    if (!(plan.noise.delta > 0.0)) plan_error("noise delta must be > 0");
    if (plan.noise.amplitude < 0.0) plan_error("noise amplitude must be >= 0");
    if (!(plan.T > 0.0)) plan_error("T must be positive");
    if (plan.dt_ladder.size() < 3) plan_error("dt ladder needs at least 3 points for a rate fit");
    for (double dt : plan.dt_ladder)
        if (!(dt > 0.0)) plan_error("ladder dt values must be positive");
    for (std::size_t i = 1; i < plan.dt_ladder.size(); ++i)
        if (!(plan.dt_ladder[i] < plan.dt_ladder[i - 1]))
            plan_error("dt ladder must be strictly descending");
    long long k = 0;
    for (std::size_t i = 1; i < plan.dt_ladder.size(); ++i)
        if (!integer_multiple(plan.dt_ladder[i - 1], plan.dt_ladder[i], k))
            plan_error("dt ladder must refine by integer factors: each dt must be an integer multiple of the next finer one");
    for (double dt : plan.dt_ladder) {
        if (dt > plan.T) plan_error("ladder dt exceeds T");
        if (!integer_multiple(plan.T, dt, k)) plan_error("T must be an integer multiple of every ladder dt");
    }
    const double dt_ref = resolve_reference_dt(plan);
    if (!(dt_ref > 0.0)) plan_error("reference dt must be positive");
    if (!integer_multiple(plan.T, dt_ref, k)) plan_error("T must be an integer multiple of the reference dt");
    const long long K = k;
    for (double dt : plan.dt_ladder) {
        if (!integer_multiple(dt, dt_ref, k))
            plan_error("every ladder dt must be an integer multiple of the reference dt");
        if (K % k != 0) plan_error("ladder stride does not divide the fine step count");
    }
    if (plan.realizations < 2) plan_error("need at least 2 realizations");
    if (plan.threads < 1) plan_error("threads must be >= 1");
    if (!plan.run_modified && !plan.run_standard) plan_error("no scheme selected");
    if (!(plan.diffusion > 0.0)) plan_error("diffusion must be positive");
    if (plan.reaction_c < 0.0) plan_error("reaction coefficient must be >= 0");
    if (plan.problem == ProblemKind::adr_darcy) {
        if (plan.space != SpaceMethod::fvm) plan_error("adr_darcy supports the fvm space method only");
        if (plan.fold_reaction) plan_error("fold_reaction applies to linear_rd only");
        if (!(plan.darcy.k_base > 0.0)) plan_error("darcy k_base must be positive");
        if (!(plan.darcy.contrast > 0.0)) plan_error("darcy contrast must be positive");
        if (!(plan.darcy.viscosity > 0.0)) plan_error("darcy viscosity must be positive");
        if (!(plan.darcy.streaks.height_frac > 0.0) || plan.darcy.streaks.height_frac > 1.0)
            plan_error("darcy streak height fraction must lie in (0, 1]");
        for (double c : plan.darcy.streaks.centers)
            if (c < 0.0 || c > 1.0) plan_error("darcy streak centers must lie in [0, 1]");
    }
}

std::unique_ptr<ProblemSetup> build_problem(const ExperimentPlan& plan) {
    validate_plan(plan);
    auto setup = std::make_unique<ProblemSetup>();
    setup->mesh = plan.space == SpaceMethod::fem
                      ? build_uniform_triangulation(plan.L1, plan.L2, plan.nx, plan.ny)
                      : build_fv_grid(plan.L1, plan.L2, plan.nx, plan.ny);
    const Mesh& mesh = setup->mesh;
    setup->basis = SpectralBasis{plan.modes, plan.L1, plan.L2};

    // Tensor-product dof coordinates: vertices for FEM, cell centers for FVM.
    std::vector<double> xs, ys;
    if (plan.space == SpaceMethod::fem) {
        xs.resize(static_cast<std::size_t>(plan.nx) + 1);
        ys.resize(static_cast<std::size_t>(plan.ny) + 1);
        for (int i = 0; i <= plan.nx; ++i) xs[static_cast<std::size_t>(i)] = i * mesh.dx;
        for (int j = 0; j <= plan.ny; ++j) ys[static_cast<std::size_t>(j)] = j * mesh.dy;
    } else {
        xs.resize(static_cast<std::size_t>(plan.nx));
        ys.resize(static_cast<std::size_t>(plan.ny));
        for (int i = 0; i < plan.nx; ++i) xs[static_cast<std::size_t>(i)] = (i + 0.5) * mesh.dx;
        for (int j = 0; j < plan.ny; ++j) ys[static_cast<std::size_t>(j)] = (j + 0.5) * mesh.dy;
    }
    setup->evaluator = FieldEvaluator(setup->basis, xs, ys);

    const bool coupled_brownian =
        plan.run_standard && plan.coupling == CouplingMode::coupled;

    if (plan.problem == ProblemKind::linear_rd) {
        const double c = plan.reaction_c;
        if (plan.space == SpaceMethod::fem) {
            OperatorSpec spec;
            spec.D = DiffusionTensor::isotropic(plan.diffusion);
            spec.d00 = plan.fold_reaction ? -c : 0.0;
            setup->op = assemble(mesh, spec);
        } else {
            TpfaOperator tpfa = assemble_tpfa(mesh, plan.diffusion, {});
            setup->op = std::move(tpfa.op);
            if (plan.fold_reaction) setup->op.d00 = -c;
        }
        if (!plan.fold_reaction && c != 0.0) {
            setup->problem.f = [c](double, std::span<const double> x, std::span<double> out) {
                for (std::size_t i = 0; i < x.size(); ++i) out[i] = -c * x[i];
            };
        }
        setup->scheme_shift = plan.fold_reaction ? c : 0.0;
        setup->oracle_shift = c;  // the exact solution folds the reaction in
        setup->streams = StreamConfig{plan.run_modified, true, coupled_brownian};
    } else {
        std::array<BoundaryCondition, 4> bc{};
        bc[static_cast<int>(Side::left)] = {BcKind::dirichlet, plan.inflow_value, 0.0};
        TpfaOperator tpfa = assemble_tpfa(mesh, plan.diffusion, bc);
        setup->op = std::move(tpfa.op);

        setup->darcy = solve_darcy(mesh, plan.darcy.k_base, plan.darcy.streaks,
                                   plan.darcy.viscosity, plan.darcy.p_in, plan.darcy.p_out);
        if (!setup->darcy.pressure_report.converged)
            throw std::runtime_error("build_problem: Darcy pressure solve did not converge");
        UpwindAdvection adv = upwind_advection(mesh, setup->darcy.face_velocity, bc);

        struct AdrTerms {
            SparseMatrix U;
            std::vector<double> inflow_rhs, dir_diag, dir_rhs, inv_area;
        };
        auto terms = std::make_shared<AdrTerms>();
        terms->U = std::move(adv.U);
        terms->inflow_rhs = std::move(adv.inflow_rhs);
        terms->dir_diag = std::move(tpfa.dirichlet_diag);
        terms->dir_rhs = std::move(tpfa.dirichlet_rhs);
        terms->inv_area.resize(static_cast<std::size_t>(mesh.n_cells()));
        for (int i = 0; i < mesh.n_cells(); ++i)
            terms->inv_area[static_cast<std::size_t>(i)] = 1.0 / mesh.cells[static_cast<std::size_t>(i)].area;

        setup->problem.f = [terms = std::shared_ptr<const AdrTerms>(terms)](
                               double, std::span<const double> x, std::span<double> out) {
            spmv(terms->U, x, out);  // out = advective outflux per cell
            for (std::size_t i = 0; i < x.size(); ++i) {
                const double flux =
                    terms->dir_rhs[i] + terms->inflow_rhs[i] - out[i] - terms->dir_diag[i] * x[i];
                out[i] = flux * terms->inv_area[i] + nonlinear_reaction(x[i]);
            }
        };
        setup->scheme_shift = 0.0;
        setup->oracle_shift = 0.0;
        setup->streams = StreamConfig{true, false, coupled_brownian};

        // Explicit-term step-size sanity: advection (donor cell) and the
        // explicit Dirichlet diffusive flux both impose forward-Euler limits.
        const double dt_max = plan.dt_ladder.front();
        const double dx_min = std::min(mesh.dx, mesh.dy);
        const double v_max = max_face_speed(mesh, setup->darcy.face_velocity);
        if (dt_max * v_max / dx_min > 1.0) {
            std::ostringstream os;
            os << "CFL: dt*max|v|/dx = " << dt_max * v_max / dx_min << " > 1 at dt = " << dt_max;
            setup->warnings.push_back(os.str());
        }
        const double bc_rate = 2.0 * plan.diffusion / (mesh.dx * mesh.dx);
        if (dt_max * bc_rate > 2.0) {
            std::ostringstream os;
            os << "explicit boundary flux: dt*2D/dx^2 = " << dt_max * bc_rate
               << " > 2 at dt = " << dt_max;
            setup->warnings.push_back(os.str());
        }
    }

    const int n = setup->op.n;
    const std::size_t expected = plan.space == SpaceMethod::fem
                                     ? static_cast<std::size_t>(mesh.n_vertices())
                                     : static_cast<std::size_t>(mesh.n_cells());
    if (static_cast<std::size_t>(n) != expected || setup->evaluator.size() != n)
        throw std::logic_error("build_problem: dof count mismatch between operator and evaluator");

    setup->problem.op = &setup->op;
    setup->problem.x0.assign(static_cast<std::size_t>(n), plan.x0_value);
    return setup;
}

RmsEstimate estimate_rms_error(std::span<const double> errors) {
    if (errors.size() < 2) throw std::invalid_argument("estimate_rms_error: need at least 2 samples");
    const double n = static_cast<double>(errors.size());
    Kahan sq;
    for (double e : errors) sq.add(e * e);
    const double mean_sq = sq.sum / n;

    Kahan dev;
    for (double e : errors) {
        const double d = e * e - mean_sq;
        dev.add(d * d);
    }
    const double var_sq = dev.sum / (n - 1.0);
    const double se_mean_sq = std::sqrt(var_sq / n);

    RmsEstimate est;
    est.rms = std::sqrt(mean_sq);
    est.std_error = est.rms > 0.0 ? se_mean_sq / (2.0 * est.rms) : 0.0;
    return est;
}

RateFit fit_rate(std::span<const LadderPoint> points) {
    RateFit fit;
    std::vector<double> x, y, se;
    for (const LadderPoint& p : points) {
        if (!(p.dt > 0.0) || !(p.rms_error > 0.0) || !std::isfinite(p.rms_error)) continue;
        x.push_back(std::log(p.dt));
        y.push_back(std::log(p.rms_error));
        se.push_back(p.std_error > 0.0 ? p.std_error / p.rms_error : 0.0);
    }
    fit.points = static_cast<int>(x.size());
    if (fit.points < 2) {
        fit.rate = std::numeric_limits<double>::quiet_NaN();
        fit.half_width = std::numeric_limits<double>::quiet_NaN();
        return fit;
    }
    fit.weighted = std::all_of(se.begin(), se.end(), [](double s) { return s > 0.0; });

    double W = 0.0, mx = 0.0, my = 0.0;
    std::vector<double> w(x.size(), 1.0);
    for (std::size_t i = 0; i < x.size(); ++i) {
        if (fit.weighted) w[i] = 1.0 / (se[i] * se[i]);
        W += w[i];
        mx += w[i] * x[i];
        my += w[i] * y[i];
    }
    mx /= W;
    my /= W;
    double sxx = 0.0, sxy = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        sxx += w[i] * (x[i] - mx) * (x[i] - mx);
        sxy += w[i] * (x[i] - mx) * (y[i] - my);
    }
    fit.rate = sxy / sxx;

    double var_slope;
    if (fit.weighted) {
        // Known per-point variances: classical weighted LS slope variance.
        var_slope = 1.0 / sxx;
    } else {
        double rss = 0.0;
        const double intercept = my - fit.rate * mx;
        for (std::size_t i = 0; i < x.size(); ++i) {
            const double r = y[i] - intercept - fit.rate * x[i];
            rss += r * r;
        }
        var_slope = fit.points > 2 ? rss / (fit.points - 2) / sxx : 0.0;
    }
    fit.half_width = 1.96 * std::sqrt(std::max(var_slope, 0.0));
    return fit;
}

SpectralNoiseSource::SpectralNoiseSource(const PathGenerator& gen, const FieldEvaluator& eval)
    : gen_(&gen), eval_(&eval), state_(gen.initial()) {
    coeff_.resize(static_cast<std::size_t>(gen.modes()));
}

void SpectralNoiseSource::advance_to(std::int64_t step) {
    if (state_.step > step)
        throw std::logic_error("SpectralNoiseSource: steps must be requested in order");
    while (state_.step < step) gen_->advance(state_);
}

void SpectralNoiseSource::convolution(int step, std::span<double> out) {
    advance_to(step);
    eval_->evaluate(state_.o_scheme, out, scratch_);
}

void SpectralNoiseSource::increment(int step, std::span<double> out) {
    advance_to(static_cast<std::int64_t>(step) + 1);
    if (state_.dbeta_last.empty())
        throw std::logic_error("SpectralNoiseSource: Brownian stream not active");
    const std::span<const double> sq = gen_->sqrt_q();
    for (std::size_t m = 0; m < coeff_.size(); ++m) coeff_[m] = sq[m] * state_.dbeta_last[m];
    eval_->evaluate(coeff_, out, scratch_);
}

namespace {

struct RealizationSlot {
    std::vector<double> errors;  // scheme-major, ladder-minor
    long iterations = 0;
    bool failed = false;
    std::string failure;
};

struct RunContext {
    const ExperimentPlan* plan;
    const ProblemSetup* setup;
    double dt_ref;
    long long fine_steps;
    std::vector<long long> stride;          // per ladder point
    std::vector<SchemeKind> kinds;          // schemes to run
    std::vector<const ImplicitStep*> steps; // per ladder point
    const ImplicitStep* ref_step;           // adr reference (stride 1), else null
    const RealizationObserver* observer;
    std::mutex* callback_mutex;
    std::ostream* progress;
    std::atomic<int>* done;
};

void run_one_realization(const RunContext& ctx, int realization, RealizationSlot& slot) {
    const ExperimentPlan& plan = *ctx.plan;
    const ProblemSetup& setup = *ctx.setup;
    const ProblemDef& pb = setup.problem;
    const int n = setup.op.n;
    const std::size_t L = ctx.stride.size();
    const std::size_t S = ctx.kinds.size();
    const bool adr = plan.problem == ProblemKind::adr_darcy;

    PathGenerator gen(setup.basis, plan.noise, plan.diffusion, setup.scheme_shift,
                      setup.oracle_shift, ctx.dt_ref, setup.streams, plan.seed,
                      static_cast<std::uint32_t>(realization), 0);
    std::optional<PathGenerator> indep;
    if (plan.run_standard && plan.coupling == CouplingMode::independent)
        indep.emplace(setup.basis, plan.noise, plan.diffusion, 0.0, 0.0, ctx.dt_ref,
                      StreamConfig{false, false, true}, plan.seed,
                      static_cast<std::uint32_t>(realization), 1);

    NoiseState st = gen.initial();
    NoiseState ist;
    if (indep) ist = indep->initial();

    const int modes = gen.modes();
    const bool need_modified = plan.run_modified;
    const bool need_standard = plan.run_standard;

    std::vector<SchemeState> states(S * L);
    for (auto& s : states) s.x = pb.x0;
    std::vector<std::vector<double>> o_now(L, std::vector<double>(static_cast<std::size_t>(n), 0.0));
    std::vector<std::vector<double>> bucket;
    if (need_standard)
        bucket.assign(L, std::vector<double>(static_cast<std::size_t>(modes), 0.0));

    SchemeState ref_state;
    std::vector<double> o_ref_now;
    if (adr) {
        ref_state.x = pb.x0;
        o_ref_now.assign(static_cast<std::size_t>(n), 0.0);
    }

    StepWorkspace ws;
    std::vector<double> buf_next(static_cast<std::size_t>(n));
    std::vector<double> dw_field(static_cast<std::size_t>(n));
    std::vector<double> coeff(static_cast<std::size_t>(modes));
    std::vector<double> scratch;
    const std::span<const double> sq = gen.sqrt_q();

    slot.errors.assign(S * L, std::numeric_limits<double>::quiet_NaN());

    auto scheme_index = [&](SchemeKind k) {
        for (std::size_t s = 0; s < S; ++s)
            if (ctx.kinds[s] == k) return s;
        return S;
    };
    const std::size_t si_mod = scheme_index(SchemeKind::modified);
    const std::size_t si_std = scheme_index(SchemeKind::standard);

    auto record_failure = [&](const char* what, double dt, long long fine_k, const SolveReport& rep) {
        std::ostringstream os;
        os << "realization " << realization << ": " << what << " solve failed at dt=" << dt
           << ", fine step " << fine_k << " (iterations " << rep.iterations << ", residual "
           << rep.residual << ")";
        slot.failed = true;
        slot.failure = os.str();
    };

    for (long long k = 0; k < ctx.fine_steps && !slot.failed; ++k) {
        gen.advance(st);
        if (indep) indep->advance(ist);

        if (need_standard) {
            const std::vector<double>& db = indep ? ist.dbeta_last : st.dbeta_last;
            for (std::size_t l = 0; l < L; ++l) {
                double* b = bucket[l].data();
                for (int m = 0; m < modes; ++m) b[m] += db[static_cast<std::size_t>(m)];
            }
        }

        const long long kp = k + 1;
        bool field_ready = false;
        if (adr) {
            setup.evaluator.evaluate(st.o_scheme, buf_next, scratch);
            field_ready = true;
            SolveReport rep = modified_step(*ctx.ref_step, pb, ref_state, o_ref_now, buf_next, ws);
            slot.iterations += rep.iterations;
            if (!rep.converged) {
                record_failure("reference", ctx.dt_ref, kp, rep);
                break;
            }
            o_ref_now = buf_next;
        }

        for (std::size_t l = 0; l < L && !slot.failed; ++l) {
            if (kp % ctx.stride[l] != 0) continue;
            const double dt_l = plan.dt_ladder[l];
            if (need_modified) {
                if (!field_ready) {
                    setup.evaluator.evaluate(st.o_scheme, buf_next, scratch);
                    field_ready = true;
                }
                SchemeState& sst = states[si_mod * L + l];
                SolveReport rep = modified_step(*ctx.steps[l], pb, sst, o_now[l], buf_next, ws);
                slot.iterations += rep.iterations;
                if (!rep.converged) {
                    record_failure("modified", dt_l, kp, rep);
                    break;
                }
                o_now[l] = buf_next;
            }
            if (need_standard) {
                for (int m = 0; m < modes; ++m)
                    coeff[static_cast<std::size_t>(m)] = sq[m] * bucket[l][static_cast<std::size_t>(m)];
                setup.evaluator.evaluate(coeff, dw_field, scratch);
                SchemeState& sst = states[si_std * L + l];
                SolveReport rep = standard_step(*ctx.steps[l], pb, sst, dw_field, ws);
                slot.iterations += rep.iterations;
                if (!rep.converged) {
                    record_failure("standard", dt_l, kp, rep);
                    break;
                }
                std::fill(bucket[l].begin(), bucket[l].end(), 0.0);
            }
        }
    }

    if (!slot.failed) {
        // Reference at T: exact mode-wise oracle (linear) or the finest-dt
        // modified scheme advanced above (adr).
        const std::vector<double>* ref = nullptr;
        if (adr) {
            ref = &ref_state.x;
        } else {
            setup.evaluator.evaluate(st.o_oracle, buf_next, scratch);
            ref = &buf_next;
        }
        std::vector<double> diff(static_cast<std::size_t>(n));
        for (std::size_t s = 0; s < S; ++s) {
            for (std::size_t l = 0; l < L; ++l) {
                const std::vector<double>& x = states[s * L + l].x;
                for (std::size_t i = 0; i < diff.size(); ++i) diff[i] = x[i] - (*ref)[i];
                const double err = discrete_l2_norm(setup.op, diff);
                slot.errors[s * L + l] = err;
                if (ctx.observer && *ctx.observer) {
                    RealizationRecord rec;
                    rec.realization = realization;
                    rec.scheme = ctx.kinds[s];
                    rec.dt = plan.dt_ladder[l];
                    rec.final_x = &states[s * L + l].x;
                    rec.error = err;
                    std::lock_guard<std::mutex> lock(*ctx.callback_mutex);
                    (*ctx.observer)(rec);
                }
            }
        }
    }

    const int finished = 1 + ctx.done->fetch_add(1);
    if (ctx.progress) {
        std::lock_guard<std::mutex> lock(*ctx.callback_mutex);
        (*ctx.progress) << "realization " << finished << "/" << plan.realizations << "\n";
        ctx.progress->flush();
    }
}

}  // namespace

ConvergenceReport run_convergence(const ExperimentPlan& plan, const RealizationObserver& observer,
                                  std::ostream* progress) {
    validate_plan(plan);
    const auto t0 = std::chrono::steady_clock::now();

    ConvergenceReport report;
    report.plan = plan;
    report.reference_dt = resolve_reference_dt(plan);
    report.coupling_used = coupling_name(plan.coupling);

    auto setup = build_problem(plan);
    report.warnings = setup->warnings;

    RunContext ctx;
    ctx.plan = &plan;
    ctx.setup = setup.get();
    ctx.dt_ref = report.reference_dt;
    long long K = 0;
    integer_multiple(plan.T, ctx.dt_ref, K);
    ctx.fine_steps = K;
    ctx.stride.resize(plan.dt_ladder.size());
    for (std::size_t l = 0; l < plan.dt_ladder.size(); ++l) {
        long long s = 0;
        integer_multiple(plan.dt_ladder[l], ctx.dt_ref, s);
        ctx.stride[l] = s;
    }
    if (plan.run_modified) ctx.kinds.push_back(SchemeKind::modified);
    if (plan.run_standard) ctx.kinds.push_back(SchemeKind::standard);

    CgOptions cg;  // relative 1e-10, Jacobi preconditioned
    std::vector<ImplicitStep> steps;
    steps.reserve(plan.dt_ladder.size() + 1);
    for (double dt : plan.dt_ladder) steps.push_back(implicit_step_matrix(setup->op, dt, cg));
    std::optional<ImplicitStep> ref_step;
    if (plan.problem == ProblemKind::adr_darcy)
        ref_step.emplace(implicit_step_matrix(setup->op, ctx.dt_ref, cg));
    ctx.steps.clear();
    for (const ImplicitStep& s : steps) ctx.steps.push_back(&s);
    ctx.ref_step = ref_step ? &*ref_step : nullptr;

    std::mutex callback_mutex;
    std::atomic<int> done{0};
    ctx.observer = &observer;
    ctx.callback_mutex = &callback_mutex;
    ctx.progress = progress;
    ctx.done = &done;

    const int R = plan.realizations;
    std::vector<RealizationSlot> slots(static_cast<std::size_t>(R));

    const int workers = std::max(1, std::min(plan.threads, R));
    if (workers == 1) {
        for (int r = 0; r < R; ++r) run_one_realization(ctx, r, slots[static_cast<std::size_t>(r)]);
    } else {
        std::atomic<int> next{0};
        std::vector<std::thread> pool;
        pool.reserve(static_cast<std::size_t>(workers));
        for (int w = 0; w < workers; ++w) {
            pool.emplace_back([&]() {
                for (;;) {
                    const int r = next.fetch_add(1);
                    if (r >= R) return;
                    run_one_realization(ctx, r, slots[static_cast<std::size_t>(r)]);
                }
            });
        }
        for (std::thread& t : pool) t.join();
    }

    // Deterministic aggregation: fixed realization order, compensated sums.
    const std::size_t L = plan.dt_ladder.size();
    for (std::size_t s = 0; s < ctx.kinds.size(); ++s) {
        SchemeResult res;
        res.kind = ctx.kinds[s];
        for (std::size_t l = 0; l < L; ++l) {
            std::vector<double> errs;
            errs.reserve(static_cast<std::size_t>(R));
            for (int r = 0; r < R; ++r) {
                const RealizationSlot& slot = slots[static_cast<std::size_t>(r)];
                if (!slot.failed) errs.push_back(slot.errors[s * L + l]);
            }
            LadderPoint point;
            point.dt = plan.dt_ladder[l];
            point.realizations = static_cast<int>(errs.size());
            if (errs.size() >= 2) {
                const RmsEstimate est = estimate_rms_error(errs);
                point.rms_error = est.rms;
                point.std_error = est.std_error;
            } else {
                point.rms_error = std::numeric_limits<double>::quiet_NaN();
                point.std_error = std::numeric_limits<double>::quiet_NaN();
            }
            res.points.push_back(point);
        }
        res.fit = fit_rate(res.points);
        report.schemes.push_back(std::move(res));
    }

    for (int r = 0; r < R; ++r) {
        const RealizationSlot& slot = slots[static_cast<std::size_t>(r)];
        report.total_solver_iterations += slot.iterations;
        if (slot.failed && !report.aborted) {
            report.aborted = true;
            report.abort_reason = slot.failure;
        }
    }

    report.wall_seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    return report;
}

ComparisonReport compare_fem_fvm(const ExperimentPlan& plan, std::ostream* progress) {
    if (plan.problem != ProblemKind::linear_rd)
        throw std::invalid_argument("compare_fem_fvm: only the linear problem runs on both spaces");
    ExperimentPlan fem_plan = plan;
    fem_plan.space = SpaceMethod::fem;
    ExperimentPlan fvm_plan = plan;
    fvm_plan.space = SpaceMethod::fvm;

    ComparisonReport cmp;
    if (progress) (*progress) << "space: fem\n";
    cmp.fem = run_convergence(fem_plan, {}, progress);
    if (progress) (*progress) << "space: fvm\n";
    cmp.fvm = run_convergence(fvm_plan, {}, progress);

    for (std::size_t s = 0; s < cmp.fem.schemes.size() && s < cmp.fvm.schemes.size(); ++s) {
        const SchemeResult& a = cmp.fem.schemes[s];
        const SchemeResult& b = cmp.fvm.schemes[s];
        for (std::size_t l = 0; l < a.points.size() && l < b.points.size(); ++l) {
            ComparisonPair pair;
            pair.scheme = a.kind;
            pair.dt = a.points[l].dt;
            pair.fem_rms = a.points[l].rms_error;
            pair.fvm_rms = b.points[l].rms_error;
            const double mid = 0.5 * (pair.fem_rms + pair.fvm_rms);
            pair.rel_discrepancy = mid > 0.0 ? std::abs(pair.fem_rms - pair.fvm_rms) / mid : 0.0;
            cmp.max_rel_discrepancy = std::max(cmp.max_rel_discrepancy, pair.rel_discrepancy);
            cmp.pairs.push_back(pair);
        }
    }
    return cmp;
}

}  // namespace spdekit
