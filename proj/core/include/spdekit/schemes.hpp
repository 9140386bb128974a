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
#pragma once

#include <functional>
#include <span>
#include <vector>

#include "spdekit/fem.hpp"

namespace spdekit {

enum class SchemeKind { modified, standard };

// Semilinear problem dX/dt = A X + F(t, X) + noise in dof space. A is carried
// by the DiscreteOperator (implicit part); F is everything treated explicitly
// (reaction, advection, sources). f == nullptr means F = 0.
struct ProblemDef {
    const DiscreteOperator* op = nullptr;
    std::function<void(double t, std::span<const double> x, std::span<double> out)> f;
    std::vector<double> x0;
};

struct SchemeState {
    double t = 0.0;
    int step = 0;
    std::vector<double> x;
};

// Reused buffers; sized on first use.
struct StepWorkspace {
    std::vector<double> y;
    std::vector<double> guess;
    std::vector<double> fx;
    std::vector<double> rhs;
};

// X_{m+1} = S_dt(X_m + dt F(t_m, X_m) - O_m) + O_{m+1}, where O is the dof
// projection of the truncated stochastic convolution. The linear solve is
// warm-started from X_m - O_m, which equals the previous step's solve output.
SolveReport modified_step(const ImplicitStep& S, const ProblemDef& pb, SchemeState& st,
                          std::span<const double> o_now, std::span<const double> o_next,
                          StepWorkspace& ws);

// X_{m+1} = S_dt(X_m + dt F(t_m, X_m) + dW_m): the usual semi-implicit
// Euler-Maruyama reference scheme.
SolveReport standard_step(const ImplicitStep& S, const ProblemDef& pb, SchemeState& st,
                          std::span<const double> dw, StepWorkspace& ws);

// Supplies per-step noise fields already projected onto the scheme's dofs.
class NoiseSource {
  public:
    virtual ~NoiseSource() = default;
    virtual void convolution(int step, std::span<double> out) = 0;  // O(t_step)
    virtual void increment(int step, std::span<double> out) = 0;    // W(t_{step+1}) - W(t_step)
};

struct RunResult {
    SchemeState state;
    long total_cg_iterations = 0;
    int aborted_at = -1;  // step index of the first failed implicit solve, -1 if none
};

// Advances n_steps (or until a solve fails, which aborts the realization).
// `on_step` (optional) observes the initial state and every accepted step.
RunResult run_realization(SchemeKind kind, const ImplicitStep& S, const ProblemDef& pb,
                          NoiseSource& noise, int n_steps,
                          const std::function<void(const SchemeState&)>& on_step = {});

}  // namespace spdekit
