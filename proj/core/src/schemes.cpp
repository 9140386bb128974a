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
#include "spdekit/schemes.hpp"

#include <stdexcept>

namespace spdekit {

namespace {

void ensure_sizes(const ProblemDef& pb, const SchemeState& st, StepWorkspace& ws) {
    if (pb.op == nullptr) throw std::invalid_argument("scheme step: null operator");
    const std::size_t n = static_cast<std::size_t>(pb.op->n);
    if (st.x.size() != n) throw std::invalid_argument("scheme step: state size mismatch");
    ws.y.resize(n);
    ws.guess.resize(n);
    ws.fx.resize(n);
}

void drift(const ProblemDef& pb, const SchemeState& st, double dt, StepWorkspace& ws) {
    // ws.y = x + dt F(t, x)
    if (pb.f) {
        pb.f(st.t, st.x, ws.fx);
        for (std::size_t i = 0; i < st.x.size(); ++i) ws.y[i] = st.x[i] + dt * ws.fx[i];
    } else {
        for (std::size_t i = 0; i < st.x.size(); ++i) ws.y[i] = st.x[i];
    }
}

}  // namespace

SolveReport modified_step(const ImplicitStep& S, const ProblemDef& pb, SchemeState& st,
                          std::span<const double> o_now, std::span<const double> o_next,
                          StepWorkspace& ws) {
    ensure_sizes(pb, st, ws);
    if (o_now.size() != st.x.size() || o_next.size() != st.x.size())
        throw std::invalid_argument("modified_step: convolution size mismatch");

    drift(pb, st, S.dt, ws);
    for (std::size_t i = 0; i < st.x.size(); ++i) {
        ws.y[i] -= o_now[i];
        ws.guess[i] = st.x[i] - o_now[i];
    }
    SolveReport rep = S.apply(ws.y, ws.guess, ws.rhs);
    for (std::size_t i = 0; i < st.x.size(); ++i) st.x[i] = ws.guess[i] + o_next[i];
    st.t += S.dt;
    st.step += 1;
    return rep;
}

SolveReport standard_step(const ImplicitStep& S, const ProblemDef& pb, SchemeState& st,
                          std::span<const double> dw, StepWorkspace& ws) {
    ensure_sizes(pb, st, ws);
    if (dw.size() != st.x.size()) throw std::invalid_argument("standard_step: increment size mismatch");

    drift(pb, st, S.dt, ws);
    for (std::size_t i = 0; i < st.x.size(); ++i) {
        ws.y[i] += dw[i];
        ws.guess[i] = st.x[i];
    }
    SolveReport rep = S.apply(ws.y, ws.guess, ws.rhs);
    for (std::size_t i = 0; i < st.x.size(); ++i) st.x[i] = ws.guess[i];
    st.t += S.dt;
    st.step += 1;
    return rep;
}

RunResult run_realization(SchemeKind kind, const ImplicitStep& S, const ProblemDef& pb,
                          NoiseSource& noise, int n_steps,
                          const std::function<void(const SchemeState&)>& on_step) {
    if (pb.op == nullptr) throw std::invalid_argument("run_realization: null operator");
    const std::size_t n = static_cast<std::size_t>(pb.op->n);
    if (pb.x0.size() != n) throw std::invalid_argument("run_realization: x0 size mismatch");

    RunResult res;
    res.state.x = pb.x0;
    StepWorkspace ws;
    std::vector<double> o_now(n), o_next(n), dw(n);

    if (on_step) on_step(res.state);
    if (kind == SchemeKind::modified) noise.convolution(0, o_now);
    for (int m = 0; m < n_steps; ++m) {
        SolveReport rep;
        if (kind == SchemeKind::modified) {
            noise.convolution(m + 1, o_next);
            rep = modified_step(S, pb, res.state, o_now, o_next, ws);
            std::swap(o_now, o_next);
        } else {
            noise.increment(m, dw);
            rep = standard_step(S, pb, res.state, dw, ws);
        }
        res.total_cg_iterations += rep.iterations;
        if (!rep.converged) {
            res.aborted_at = m;
            break;
        }
        if (on_step) on_step(res.state);
    }
    return res;
}

}  // namespace spdekit
