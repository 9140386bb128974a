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
#include <functional>
#include <iosfwd>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "spdekit/darcy.hpp"
#include "spdekit/fem.hpp"
#include "spdekit/mesh.hpp"
#include "spdekit/noise.hpp"
#include "spdekit/schemes.hpp"

namespace spdekit {

enum class ProblemKind { linear_rd, adr_darcy };
enum class SpaceMethod { fem, fvm };
enum class CouplingMode { coupled, independent };

struct DarcyParams {
    double k_base = 0.01;
    double contrast = 100.0;
    double viscosity = 1.0;
    double p_in = 1.0;
    double p_out = 0.0;
    StreakSpec streaks;  // height fraction + band centers
};

// Fully resolved description of one Monte-Carlo convergence experiment.
struct ExperimentPlan {
    ProblemKind problem = ProblemKind::linear_rd;
    SpaceMethod space = SpaceMethod::fem;

    int nx = 50, ny = 50;
    double L1 = 1.0, L2 = 1.0;
    int modes = 50;  // N: retained modes per axis
    NoiseSpec noise;

    double T = 1.0;
    std::vector<double> dt_ladder;  // strictly descending
    double dt_reference = 0.0;      // 0 = auto: ladder min (linear), ladder min / 8 (adr)

    int realizations = 30;
    std::uint64_t seed = 12345;
    CouplingMode coupling = CouplingMode::coupled;
    bool run_modified = true;
    bool run_standard = true;
    int threads = 1;

    // problem coefficients
    double diffusion = 1.0;       // D in A = D Laplace
    double reaction_c = 0.5;      // linear problem: F(X) = -c X
    bool fold_reaction = false;   // fold c into the implicit matrix and the
                                  // convolution rate (diagnostic: the scheme
                                  // then reproduces the oracle to roundoff)
    double inflow_value = 1.0;    // adr: Dirichlet trace of X on the left side
    double x0_value = 0.0;        // constant initial condition
    DarcyParams darcy;
};

// Throws std::invalid_argument with a message naming the offending field.
void validate_plan(const ExperimentPlan& plan);

// dt_reference when set; otherwise the finest ladder dt (linear_rd) or an
// eightfold refinement of it (adr_darcy, where the reference is a scheme run).
double resolve_reference_dt(const ExperimentPlan& plan);

// Everything realizations share read-only: grid, operators, nonlinearity,
// noise geometry. Heap-allocated so internal pointers stay valid.
struct ProblemSetup {
    Mesh mesh;
    DiscreteOperator op;
    ProblemDef problem;  // problem.op points at this->op
    SpectralBasis basis;
    StreamConfig streams;
    double scheme_shift = 0.0;  // OU rate = diffusion * lambda + shift
    double oracle_shift = 0.0;
    FieldEvaluator evaluator;  // spectral field -> dof values
    DarcyField darcy;          // populated for adr_darcy only
    std::vector<std::string> warnings;
};

std::unique_ptr<ProblemSetup> build_problem(const ExperimentPlan& plan);

struct LadderPoint {
    double dt = 0.0;
    double rms_error = 0.0;
    double std_error = 0.0;
    int realizations = 0;  // samples that entered this estimate
};

struct RateFit {
    double rate = 0.0;
    double half_width = 0.0;  // 95% confidence half-width of the slope
    int points = 0;
    bool weighted = false;  // false when any point had zero standard error
};

struct SchemeResult {
    SchemeKind kind = SchemeKind::modified;
    std::vector<LadderPoint> points;  // ladder order (descending dt)
    RateFit fit;
};

struct ConvergenceReport {
    ExperimentPlan plan;  // echo of the inputs
    double reference_dt = 0.0;
    std::vector<SchemeResult> schemes;
    std::string coupling_used;  // "coupled" or "independent"
    std::vector<std::string> warnings;
    bool aborted = false;            // some realization failed; results partial
    std::string abort_reason;
    long total_solver_iterations = 0;
    double wall_seconds = 0.0;  // not part of the deterministic outputs
};

// Called per (realization, ladder point, scheme) with the final state and its
// error; may run concurrently with itself when threads > 1.
struct RealizationRecord {
    int realization = 0;
    SchemeKind scheme = SchemeKind::modified;
    double dt = 0.0;
    const std::vector<double>* final_x = nullptr;
    double error = 0.0;
};
using RealizationObserver = std::function<void(const RealizationRecord&)>;

// Runs the full ensemble: one fine noise path per realization, reference on
// that path (exact mode-wise oracle for linear_rd, finest-dt modified scheme
// for adr_darcy), every ladder dt for every requested scheme on the
// subsampled path, RMS errors and a log-log rate fit.
ConvergenceReport run_convergence(const ExperimentPlan& plan,
                                  const RealizationObserver& observer = {},
                                  std::ostream* progress = nullptr);

struct ComparisonPair {
    SchemeKind scheme = SchemeKind::modified;
    double dt = 0.0;
    double fem_rms = 0.0;
    double fvm_rms = 0.0;
    double rel_discrepancy = 0.0;  // |a-b| / (0.5 (a+b))
};

struct ComparisonReport {
    ConvergenceReport fem;
    ConvergenceReport fvm;
    std::vector<ComparisonPair> pairs;
    double max_rel_discrepancy = 0.0;
};

// Same plan, same seed (hence identical spectral noise paths), both spatial
// discretizations.
ComparisonReport compare_fem_fvm(const ExperimentPlan& plan, std::ostream* progress = nullptr);

struct RmsEstimate {
    double rms = 0.0;
    double std_error = 0.0;
};

// rms = sqrt(mean of squares); the standard error propagates the Monte-Carlo
// uncertainty of the mean square through the square root (delta method).
// Throws on fewer than 2 samples.
RmsEstimate estimate_rms_error(std::span<const double> errors);

// Weighted least squares of log(rms) on log(dt); weights 1/SE_log^2 with
// SE_log = std_error / rms. Falls back to the unweighted fit (residual-based
// confidence) when any point has zero standard error.
RateFit fit_rate(std::span<const LadderPoint> points);

// Adapts a PathGenerator + FieldEvaluator to the scheme-facing NoiseSource.
// Calls must move forward in time (the generator is advanced lazily).
class SpectralNoiseSource final : public NoiseSource {
  public:
    SpectralNoiseSource(const PathGenerator& gen, const FieldEvaluator& eval);

    void convolution(int step, std::span<double> out) override;
    void increment(int step, std::span<double> out) override;

  private:
    void advance_to(std::int64_t step);

    const PathGenerator* gen_;
    const FieldEvaluator* eval_;
    NoiseState state_;
    std::vector<double> coeff_, scratch_;
};

const char* scheme_name(SchemeKind kind);
const char* problem_name(ProblemKind kind);
const char* space_name(SpaceMethod method);
const char* coupling_name(CouplingMode mode);

}  // namespace spdekit
