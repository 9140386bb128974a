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

#include <cstdint>
#include <span>
#include <vector>

#include "spdekit/mesh.hpp"
#include "spdekit/rng.hpp"

namespace spdekit {

// Neumann-Laplacian eigenbasis on [0,L1]x[0,L2]:
//   e_0(x) = sqrt(1/L),  e_i(x) = sqrt(2/L) cos(i pi x / L)  (i >= 1),
// tensorized over both axes. Modes are indexed (i, j) in {0..N-1}^2.
struct SpectralBasis {
    int N = 0;
    double L1 = 1.0, L2 = 1.0;

    int mode_count() const { return N * N; }
    int mode_index(int i, int j) const { return i * N + j; }

    double laplace_eigenvalue(int i, int j) const;  // (i pi / L1)^2 + (j pi / L2)^2
    double eval_x(int i, double x) const;
    double eval_y(int j, double y) const;
};

// Q-Wiener covariance spectrum: q_{i,j} = (i^2 + j^2)^-(r + delta).
// The (0,0) coefficient uses the same formula with i^2+j^2 replaced by 1
// (so q_00 = 1); `zero_mode_one = false` switches it off entirely.
struct NoiseSpec {
    int r = 2;
    double delta = 0.05;
    bool zero_mode_one = true;
    double amplitude = 1.0;  // overall factor on every q_{i,j}; 0 turns the noise off
    double epsilon = 0.0;    // optional uniform spectral shift added to all OU rates
};

double q_coefficient(const NoiseSpec& spec, int i, int j);

// Closed forms for the exact one-step Ornstein-Uhlenbeck transition with
// rate lambda and intensity q (dW has covariance coefficient q):
//   step mean factor  exp(-lambda dt)
//   step variance     (q / 2 lambda)(1 - exp(-2 lambda dt)),   q dt at lambda = 0
//   Cov(sqrt(q) dBeta, innovation) = (q / lambda)(1 - exp(-lambda dt)), q dt at 0.
double ou_decay(double rate, double dt);
double ou_step_variance(double rate, double q, double dt);
double ou_variance_at(double rate, double q, double t);  // from a zero start
double ou_brownian_covariance(double rate, double q, double dt);
double ou_cross_covariance(double rate_a, double rate_b, double q, double dt);

// Which jointly-Gaussian components the path carries per mode and step.
struct StreamConfig {
    bool scheme_ou = true;   // OU coefficients at rate D*lambda + scheme_shift
    bool oracle_ou = false;  // second OU stream at rate D*lambda + oracle_shift
    bool brownian = false;   // raw Brownian increments dBeta (Var = dt)
};

// Per-mode exact one-step sampler: lower-triangular factor of the joint
// covariance of (scheme innovation, oracle innovation, dBeta), restricted to
// the active components. Exposed separately so tests can pin the covariance.
struct ModeSampler {
    double decay_scheme = 0.0, decay_oracle = 0.0;
    double L[3][3] = {{0, 0, 0}, {0, 0, 0}, {0, 0, 0}};

    // g: iid standard normals; outputs are the correlated increments.
    void increments(const double* g, double& inc_scheme, double& inc_oracle,
                    double& dbeta) const;
};

ModeSampler make_mode_sampler(double rate_scheme, double rate_oracle, double q, double dt,
                              const StreamConfig& streams);

// Evolving state of one truncated noise path.
struct NoiseState {
    double t = 0.0;
    std::int64_t step = 0;
    std::uint64_t seed = 0;
    std::uint32_t realization = 0;
    std::uint32_t stream_id = 0;
    std::vector<double> o_scheme;    // per-mode (e_i, O(t)) for the scheme stream
    std::vector<double> o_oracle;    // per-mode exact-solution stream (optional)
    std::vector<double> dbeta_last;  // per-mode Brownian increment over the last step
};

// Generates the path at a fixed step size with counter-based draws keyed by
// (seed, realization, step, mode, stream): the same configuration always
// reproduces the same path bit-for-bit, independent of thread scheduling.
class PathGenerator {
  public:
    PathGenerator(const SpectralBasis& basis, const NoiseSpec& spec, double diffusion,
                  double scheme_shift, double oracle_shift, double dt,
                  const StreamConfig& streams, std::uint64_t seed, std::uint32_t realization,
                  std::uint32_t stream_id = 0);

    NoiseState initial() const;
    void advance(NoiseState& state) const;  // one exact step of size dt

    double dt() const { return dt_; }
    int modes() const { return n_modes_; }
    std::span<const double> sqrt_q() const { return sqrt_q_; }
    std::span<const double> q() const { return q_; }
    std::span<const double> scheme_rates() const { return rate_scheme_; }
    std::span<const double> oracle_rates() const { return rate_oracle_; }

  private:
    int n_modes_ = 0;
    double dt_ = 0.0;
    StreamConfig streams_;
    std::uint64_t seed_ = 0;
    std::uint32_t realization_ = 0;
    std::uint32_t stream_id_ = 0;
    int gaussians_per_mode_ = 0;
    std::vector<ModeSampler> samplers_;
    std::vector<double> q_, sqrt_q_, rate_scheme_, rate_oracle_;
};

// One exact OU update of every retained mode (helper over PathGenerator for
// callers that step a path directly).
NoiseState ou_step(const PathGenerator& gen, const NoiseState& state);

// Whole path up-front; used by the dump tool and tests. Entry k is the state
// after k steps (entry 0 is the zero initial state).
std::vector<NoiseState> generate_path(const PathGenerator& gen, int n_steps);

// field(p) = sum_{i,j} coeffs[i*N+j] e_i(p.x) e_j(p.y) at arbitrary points.
std::vector<double> evaluate_field(const SpectralBasis& basis, std::span<const double> coeffs,
                                   std::span<const Vec2> points);

// Fast path for tensor-product point sets (FEM vertices / FV cell centers):
// out[iy * nx + ix] = field(xs[ix], ys[iy]).
class FieldEvaluator {
  public:
    FieldEvaluator() = default;  // empty evaluator; evaluate() rejects any input
    FieldEvaluator(const SpectralBasis& basis, std::span<const double> xs,
                   std::span<const double> ys);

    int size() const { return n_x_ * n_y_; }

    // Thread-safe: pass a worker-local scratch vector in hot loops.
    void evaluate(std::span<const double> coeffs, std::span<double> out,
                  std::vector<double>& scratch) const;
    std::vector<double> evaluate(std::span<const double> coeffs) const;

  private:
    int N_ = 0, n_x_ = 0, n_y_ = 0;
    std::vector<double> ex_;  // N x n_x, basis values along x
    std::vector<double> ey_;  // N x n_y
};

}  // namespace spdekit
