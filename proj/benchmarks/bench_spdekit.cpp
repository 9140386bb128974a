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

// Microbenchmarks for the hot paths of a convergence run: sparse matvec,
// the preconditioned implicit solve, one exact noise step, spectral field
// evaluation, and a full scheme step. Grid sizes mirror the experiment scale.

#include <benchmark/benchmark.h>

#include <cmath>
#include <vector>

#include "spdekit/darcy.hpp"
#include "spdekit/fem.hpp"
#include "spdekit/harness.hpp"
#include "spdekit/mesh.hpp"
#include "spdekit/noise.hpp"
#include "spdekit/schemes.hpp"
#include "spdekit/sparse.hpp"

namespace {

using namespace spdekit;

struct FemFixture {
    Mesh mesh = build_uniform_triangulation(1.0, 1.0, 50, 50);
    DiscreteOperator op;
    ImplicitStep step;
    std::vector<double> x, y, scratch;

    FemFixture() {
        OperatorSpec spec;
        spec.D = DiffusionTensor::isotropic(1.0);
        op = assemble(mesh, spec);
        step = implicit_step_matrix(op, 1.0 / 128);
        x.assign(op.n, 0.0);
        y.assign(op.n, 0.0);
        for (int i = 0; i < op.n; ++i) x[i] = std::sin(0.01 * i);
    }
};

FemFixture& fem() {
    static FemFixture f;
    return f;
}

void bm_spmv_stiffness(benchmark::State& state) {
    FemFixture& f = fem();
    for (auto _ : state) {
        spmv(f.op.K, f.x, f.y);
        benchmark::DoNotOptimize(f.y.data());
    }
    state.SetItemsProcessed(state.iterations() * static_cast<long>(f.op.K.nnz()));
}
BENCHMARK(bm_spmv_stiffness);

void bm_implicit_solve(benchmark::State& state) {
    FemFixture& f = fem();
    std::vector<double> sol(f.op.n, 0.0);
    for (auto _ : state) {
        std::fill(sol.begin(), sol.end(), 0.0);  // cold start each iteration
        const SolveReport rep = f.step.apply(f.x, sol, f.scratch);
        benchmark::DoNotOptimize(rep.iterations);
    }
}
BENCHMARK(bm_implicit_solve);

void bm_noise_step(benchmark::State& state) {
    const int N = static_cast<int>(state.range(0));
    const SpectralBasis basis{N, 1.0, 1.0};
    NoiseSpec spec;
    const StreamConfig streams{true, true, true};
    const PathGenerator gen(basis, spec, 1.0, 0.0, 0.5, 1.0 / 512, streams, 7, 0, 0);
    NoiseState st = gen.initial();
    for (auto _ : state) {
        gen.advance(st);
        benchmark::DoNotOptimize(st.o_scheme.data());
    }
    state.SetItemsProcessed(state.iterations() * basis.mode_count());
}
BENCHMARK(bm_noise_step)->Arg(16)->Arg(50);

void bm_field_evaluation(benchmark::State& state) {
    const int N = 50;
    const SpectralBasis basis{N, 1.0, 1.0};
    FemFixture& f = fem();
    std::vector<double> xs(f.mesh.nx + 1), ys(f.mesh.ny + 1);
    for (int i = 0; i <= f.mesh.nx; ++i) xs[i] = f.mesh.vertices[f.mesh.vertex_index(i, 0)].x;
    for (int j = 0; j <= f.mesh.ny; ++j) ys[j] = f.mesh.vertices[f.mesh.vertex_index(0, j)].y;
    const FieldEvaluator eval(basis, xs, ys);
    std::vector<double> coeffs(basis.mode_count());
    for (int k = 0; k < basis.mode_count(); ++k) coeffs[k] = 1.0 / (1 + k);
    std::vector<double> out(eval.size()), scratch;
    for (auto _ : state) {
        eval.evaluate(coeffs, out, scratch);
        benchmark::DoNotOptimize(out.data());
    }
    state.SetItemsProcessed(state.iterations() * eval.size());
}
BENCHMARK(bm_field_evaluation);

void bm_modified_step(benchmark::State& state) {
    FemFixture& f = fem();
    ProblemDef pb;
    pb.op = &f.op;
    pb.f = [](double, std::span<const double> x, std::span<double> out) {
        for (std::size_t i = 0; i < x.size(); ++i) out[i] = -0.5 * x[i];
    };
    pb.x0.assign(f.op.n, 0.1);
    std::vector<double> o_now(f.op.n, 0.0), o_next(f.op.n, 0.01);
    StepWorkspace ws;
    SchemeState st;
    st.x = pb.x0;
    for (auto _ : state) {
        st.t = 0.0;
        st.step = 0;
        const SolveReport rep = modified_step(f.step, pb, st, o_now, o_next, ws);
        benchmark::DoNotOptimize(rep.iterations);
    }
}
BENCHMARK(bm_modified_step);

void bm_darcy_solve(benchmark::State& state) {
    const int n = static_cast<int>(state.range(0));
    const Mesh mesh = build_fv_grid(1.0, 1.0, n, n);
    const StreakSpec streaks;
    for (auto _ : state) {
        const DarcyField f = solve_darcy(mesh, 0.01, streaks, 1.0, 1.0, 0.0);
        benchmark::DoNotOptimize(f.p.data());
    }
}
BENCHMARK(bm_darcy_solve)->Arg(50)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
