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
#include "spdekit/noise.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

namespace spdekit {

double SpectralBasis::laplace_eigenvalue(int i, int j) const {
    const double ax = i * std::numbers::pi / L1;
    const double ay = j * std::numbers::pi / L2;
    return ax * ax + ay * ay;
}

double SpectralBasis::eval_x(int i, double x) const {
    if (i == 0) return std::sqrt(1.0 / L1);
    return std::sqrt(2.0 / L1) * std::cos(i * std::numbers::pi * x / L1);
}

double SpectralBasis::eval_y(int j, double y) const {
    if (j == 0) return std::sqrt(1.0 / L2);
    return std::sqrt(2.0 / L2) * std::cos(j * std::numbers::pi * y / L2);
}

double q_coefficient(const NoiseSpec& spec, int i, int j) {
    if (spec.r != 1 && spec.r != 2)
        throw std::invalid_argument("noise: r must be 1 or 2");
    if (spec.amplitude < 0.0) throw std::invalid_argument("noise: amplitude must be >= 0");
    if (i == 0 && j == 0) return spec.zero_mode_one ? spec.amplitude : 0.0;
    const double s2 = static_cast<double>(i) * i + static_cast<double>(j) * j;
    return spec.amplitude * std::pow(s2, -(spec.r + spec.delta));
}

double ou_decay(double rate, double dt) { return std::exp(-rate * dt); }

double ou_step_variance(double rate, double q, double dt) {
    if (rate == 0.0) return q * dt;
    return q * (-std::expm1(-2.0 * rate * dt)) / (2.0 * rate);
}

double ou_variance_at(double rate, double q, double t) { return ou_step_variance(rate, q, t); }

double ou_brownian_covariance(double rate, double q, double dt) {
    if (rate == 0.0) return q * dt;
    return q * (-std::expm1(-rate * dt)) / rate;
}

double ou_cross_covariance(double rate_a, double rate_b, double q, double dt) {
    const double s = rate_a + rate_b;
    if (s == 0.0) return q * dt;
    return q * (-std::expm1(-s * dt)) / s;
}

void ModeSampler::increments(const double* g, double& inc_scheme, double& inc_oracle,
                             double& dbeta) const {
    inc_scheme = L[0][0] * g[0];
    inc_oracle = L[1][0] * g[0] + L[1][1] * g[1];
    dbeta = L[2][0] * g[0] + L[2][1] * g[1] + L[2][2] * g[2];
}

ModeSampler make_mode_sampler(double rate_scheme, double rate_oracle, double q, double dt,
                              const StreamConfig& streams) {
    ModeSampler s;
    s.decay_scheme = ou_decay(rate_scheme, dt);
    s.decay_oracle = ou_decay(rate_oracle, dt);

    // Joint covariance of (scheme innovation, oracle innovation, dBeta).
    // Inactive components are left at zero variance, which the factorization
    // below treats as exactly degenerate.
    double C[3][3] = {{0, 0, 0}, {0, 0, 0}, {0, 0, 0}};
    const double sq = std::sqrt(q);
    if (streams.scheme_ou) C[0][0] = ou_step_variance(rate_scheme, q, dt);
    if (streams.oracle_ou) C[1][1] = ou_step_variance(rate_oracle, q, dt);
    if (streams.brownian) C[2][2] = dt;
    if (streams.scheme_ou && streams.oracle_ou)
        C[1][0] = C[0][1] = ou_cross_covariance(rate_scheme, rate_oracle, q, dt);
    if (streams.scheme_ou && streams.brownian)
        C[2][0] = C[0][2] = sq == 0.0 ? 0.0 : ou_brownian_covariance(rate_scheme, q, dt) / sq;
    if (streams.oracle_ou && streams.brownian)
        C[2][1] = C[1][2] = sq == 0.0 ? 0.0 : ou_brownian_covariance(rate_oracle, q, dt) / sq;

    // Cholesky with degenerate-pivot handling: a vanishing pivot means the
    // component is a.s. a linear function of the previous ones (e.g. the
    // Brownian limit at rate 0, or coinciding stream rates).
    for (int i = 0; i < 3; ++i) {
        double d = C[i][i];
        for (int k = 0; k < i; ++k) d -= s.L[i][k] * s.L[i][k];
        if (d <= 1e-15 * std::max(C[i][i], dt)) {
            s.L[i][i] = 0.0;
            continue;
        }
        s.L[i][i] = std::sqrt(d);
        for (int j = i + 1; j < 3; ++j) {
            double v = C[j][i];
            for (int k = 0; k < i; ++k) v -= s.L[j][k] * s.L[i][k];
            s.L[j][i] = v / s.L[i][i];
        }
    }

    // Coinciding rates mean the oracle stream *is* the scheme stream.  The
    // cross-covariance formula rounds differently from the variance formula,
    // so the factored row would miss exact degeneracy by an ulp; copy the row
    // instead so the two streams reproduce bit-identical paths.
    if (streams.scheme_ou && streams.oracle_ou && rate_scheme == rate_oracle) {
        s.L[1][0] = s.L[0][0];
        s.L[1][1] = 0.0;
        s.L[2][1] = 0.0;
    }
    return s;
}

PathGenerator::PathGenerator(const SpectralBasis& basis, const NoiseSpec& spec, double diffusion,
                             double scheme_shift, double oracle_shift, double dt,
                             const StreamConfig& streams, std::uint64_t seed,
                             std::uint32_t realization, std::uint32_t stream_id)
    : n_modes_(basis.mode_count()),
      dt_(dt),
      streams_(streams),
      seed_(seed),
      realization_(realization),
      stream_id_(stream_id) {
    if (!(dt > 0.0)) throw std::invalid_argument("noise: dt must be positive");
    if (basis.N < 1) throw std::invalid_argument("noise: basis must retain at least one mode");

    const int active = (streams.scheme_ou ? 1 : 0) + (streams.oracle_ou ? 1 : 0) +
                       (streams.brownian ? 1 : 0);
    if (active == 0) throw std::invalid_argument("noise: no active streams");
    gaussians_per_mode_ = active;

    samplers_.reserve(n_modes_);
    q_.reserve(n_modes_);
    sqrt_q_.reserve(n_modes_);
    rate_scheme_.reserve(n_modes_);
    rate_oracle_.reserve(n_modes_);
    for (int i = 0; i < basis.N; ++i) {
        for (int j = 0; j < basis.N; ++j) {
            const double q = q_coefficient(spec, i, j);
            const double lam = basis.laplace_eigenvalue(i, j);
            const double rs = diffusion * lam + scheme_shift + spec.epsilon;
            const double ro = diffusion * lam + oracle_shift + spec.epsilon;
            q_.push_back(q);
            sqrt_q_.push_back(std::sqrt(q));
            rate_scheme_.push_back(rs);
            rate_oracle_.push_back(ro);
            samplers_.push_back(make_mode_sampler(rs, ro, q, dt, streams));
        }
    }
}

NoiseState PathGenerator::initial() const {
    NoiseState st;
    st.seed = seed_;
    st.realization = realization_;
    st.stream_id = stream_id_;
    st.o_scheme.assign(n_modes_, 0.0);
    if (streams_.oracle_ou) st.o_oracle.assign(n_modes_, 0.0);
    if (streams_.brownian) st.dbeta_last.assign(n_modes_, 0.0);
    return st;
}

void PathGenerator::advance(NoiseState& state) const {
    const std::uint32_t step = static_cast<std::uint32_t>(state.step);
    DrawKey key{seed_, realization_, step, 0, stream_id_};

    for (int m = 0; m < n_modes_; ++m) {
        key.mode = static_cast<std::uint32_t>(m);
        double g[3] = {0.0, 0.0, 0.0};
        const auto p0 = normal_pair(key, 0);
        g[0] = p0[0];
        if (gaussians_per_mode_ >= 2) g[1] = p0[1];
        if (gaussians_per_mode_ >= 3) g[2] = normal_pair(key, 1)[0];

        // Pack the active components into the fixed (scheme, oracle, beta)
        // slots expected by the sampler.
        double slots[3] = {0.0, 0.0, 0.0};
        {
            int next = 0;
            if (streams_.scheme_ou) slots[0] = g[next++];
            if (streams_.oracle_ou) slots[1] = g[next++];
            if (streams_.brownian) slots[2] = g[next++];
        }

        double inc_s, inc_o, db;
        samplers_[m].increments(slots, inc_s, inc_o, db);
        if (streams_.scheme_ou)
            state.o_scheme[m] = samplers_[m].decay_scheme * state.o_scheme[m] + inc_s;
        if (streams_.oracle_ou)
            state.o_oracle[m] = samplers_[m].decay_oracle * state.o_oracle[m] + inc_o;
        if (streams_.brownian) state.dbeta_last[m] = db;
    }

    state.step += 1;
    state.t = static_cast<double>(state.step) * dt_;
}

NoiseState ou_step(const PathGenerator& gen, const NoiseState& state) {
    NoiseState next = state;
    gen.advance(next);
    return next;
}

std::vector<NoiseState> generate_path(const PathGenerator& gen, int n_steps) {
    std::vector<NoiseState> path;
    path.reserve(n_steps + 1);
    path.push_back(gen.initial());
    for (int k = 0; k < n_steps; ++k) path.push_back(ou_step(gen, path.back()));
    return path;
}

std::vector<double> evaluate_field(const SpectralBasis& basis, std::span<const double> coeffs,
                                   std::span<const Vec2> points) {
    if (static_cast<int>(coeffs.size()) != basis.mode_count())
        throw std::invalid_argument("evaluate_field: coefficient count != N^2");
    std::vector<double> out(points.size(), 0.0);
    std::vector<double> row(basis.N);
    for (std::size_t p = 0; p < points.size(); ++p) {
        for (int j = 0; j < basis.N; ++j) row[j] = basis.eval_y(j, points[p].y);
        double acc = 0.0;
        for (int i = 0; i < basis.N; ++i) {
            const double ex = basis.eval_x(i, points[p].x);
            double inner = 0.0;
            for (int j = 0; j < basis.N; ++j) inner += coeffs[basis.mode_index(i, j)] * row[j];
            acc += ex * inner;
        }
        out[p] = acc;
    }
    return out;
}

FieldEvaluator::FieldEvaluator(const SpectralBasis& basis, std::span<const double> xs,
                               std::span<const double> ys)
    : N_(basis.N), n_x_(static_cast<int>(xs.size())), n_y_(static_cast<int>(ys.size())) {
    ex_.resize(static_cast<std::size_t>(N_) * n_x_);
    ey_.resize(static_cast<std::size_t>(N_) * n_y_);
    for (int i = 0; i < N_; ++i)
        for (int px = 0; px < n_x_; ++px) ex_[i * n_x_ + px] = basis.eval_x(i, xs[px]);
    for (int j = 0; j < N_; ++j)
        for (int py = 0; py < n_y_; ++py) ey_[j * n_y_ + py] = basis.eval_y(j, ys[py]);
}

void FieldEvaluator::evaluate(std::span<const double> coeffs, std::span<double> out,
                              std::vector<double>& scratch) const {
    if (static_cast<int>(coeffs.size()) != N_ * N_)
        throw std::invalid_argument("FieldEvaluator: coefficient count != N^2");
    if (static_cast<int>(out.size()) != size())
        throw std::invalid_argument("FieldEvaluator: output size mismatch");

    // scratch(i, py) = sum_j coeffs(i, j) ey(j, py)
    scratch.assign(static_cast<std::size_t>(N_) * n_y_, 0.0);
    for (int i = 0; i < N_; ++i) {
        double* t = scratch.data() + static_cast<std::size_t>(i) * n_y_;
        const double* c = coeffs.data() + static_cast<std::size_t>(i) * N_;
        for (int j = 0; j < N_; ++j) {
            const double cij = c[j];
            if (cij == 0.0) continue;
            const double* e = ey_.data() + static_cast<std::size_t>(j) * n_y_;
            for (int py = 0; py < n_y_; ++py) t[py] += cij * e[py];
        }
    }
    // out(py, px) = sum_i scratch(i, py) ex(i, px)
    std::fill(out.begin(), out.end(), 0.0);
    for (int i = 0; i < N_; ++i) {
        const double* t = scratch.data() + static_cast<std::size_t>(i) * n_y_;
        const double* e = ex_.data() + static_cast<std::size_t>(i) * n_x_;
        for (int py = 0; py < n_y_; ++py) {
            const double w = t[py];
            if (w == 0.0) continue;
            double* o = out.data() + static_cast<std::size_t>(py) * n_x_;
            for (int px = 0; px < n_x_; ++px) o[px] += w * e[px];
        }
    }
}

std::vector<double> FieldEvaluator::evaluate(std::span<const double> coeffs) const {
    std::vector<double> out(size());
    std::vector<double> scratch;
    evaluate(coeffs, out, scratch);
    return out;
}

}  // namespace spdekit
