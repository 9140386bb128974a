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

#include <span>
#include <string>

#include "spdekit/config.hpp"
#include "spdekit/harness.hpp"
#include "spdekit/mesh.hpp"

namespace spdekit {

std::string read_text_file(const std::string& path);

// Creates parent directories as needed; overwrites.
void write_text_file(const std::string& path, const std::string& content);

// One row per (scheme, ladder point). Deterministic for a fixed report.
// Header: scheme,dt,rms_error,std_error
std::string csv_report(const ConvergenceReport& report);

// Machine-readable summary: resolved configuration, fitted rates, ladder
// points, warnings. Contains no clocks or host details, so identical runs
// produce identical bytes.
std::string json_report(const ConvergenceReport& report, const RunConfig& cfg);

// FEM-vs-FVM cross-check for the same plan.
std::string json_comparison(const ComparisonReport& report, const RunConfig& cfg);

// Human-oriented sidecar with timestamps and wall-clock durations. This is
// the only artifact allowed to differ between reruns.
std::string log_report(const ConvergenceReport& report, const RunConfig& cfg);

// x,y,value rows; sample points are FEM vertices or FV cell centers.
std::string field_csv(const Mesh& mesh, SpaceMethod space, std::span<const double> values);

// Face-midpoint rows x,y,nx,ny,value (e.g. Darcy normal velocities).
std::string faces_csv(const Mesh& mesh, std::span<const double> face_values);

}  // namespace spdekit
