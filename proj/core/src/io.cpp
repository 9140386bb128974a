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
#include "spdekit/io.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "json.hpp"

namespace spdekit {

namespace {

using ordered_json = nlohmann::ordered_json;

std::string hex16(std::uint64_t v) {
    char buf[17];
    std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(v));
    return std::string(buf);
}

ordered_json config_json(const RunConfig& cfg) {
    ordered_json sections = ordered_json::object();
    for (const ConfigEntry& e : cfg.provenance) {
        if (!sections.contains(e.section)) sections[e.section] = ordered_json::object();
        sections[e.section][e.key] = e.value;
    }
    return sections;
}

ordered_json scheme_json(const SchemeResult& s) {
    ordered_json j = ordered_json::object();
    j["name"] = scheme_name(s.kind);
    j["rate"] = s.fit.rate;
    j["rate_half_width"] = s.fit.half_width;
    j["fit_points"] = s.fit.points;
    j["weighted_fit"] = s.fit.weighted;
    ordered_json ladder = ordered_json::array();
    for (const LadderPoint& p : s.points) {
        ordered_json row = ordered_json::object();
        row["dt"] = p.dt;
        row["rms_error"] = p.rms_error;
        row["std_error"] = p.std_error;
        row["realizations"] = p.realizations;
        ladder.push_back(row);
    }
    j["ladder"] = ladder;
    return j;
}

ordered_json report_body(const ConvergenceReport& report) {
    ordered_json j = ordered_json::object();
    j["problem"] = problem_name(report.plan.problem);
    j["space"] = space_name(report.plan.space);
    j["coupling"] = report.coupling_used;
    j["reference_dt"] = report.reference_dt;
    ordered_json schemes = ordered_json::array();
    for (const SchemeResult& s : report.schemes) schemes.push_back(scheme_json(s));
    j["schemes"] = schemes;
    j["warnings"] = report.warnings;
    j["aborted"] = report.aborted;
    if (report.aborted) j["abort_reason"] = report.abort_reason;
    j["total_solver_iterations"] = report.total_solver_iterations;
    return j;
}

std::string local_timestamp() {
    const auto now = std::chrono::system_clock::now();
    const std::time_t t = std::chrono::system_clock::to_time_t(now);
    std::tm tm{};
    localtime_r(&t, &tm);
    char buf[64];
    std::strftime(buf, sizeof(buf), "%Y-%m-%d %H:%M:%S %Z", &tm);
    return std::string(buf);
}

}  // namespace

std::string read_text_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot read file '" + path + "'");
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

void write_text_file(const std::string& path, const std::string& content) {
    const std::filesystem::path p(path);
    if (p.has_parent_path()) std::filesystem::create_directories(p.parent_path());
    std::ofstream out(p, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot open file '" + path + "' for writing");
    out << content;
    if (!out) throw std::runtime_error("failed while writing '" + path + "'");
}

std::string csv_report(const ConvergenceReport& report) {
    std::ostringstream os;
    os << "scheme,dt,rms_error,std_error\n";
    for (const SchemeResult& s : report.schemes)
        for (const LadderPoint& p : s.points)
            os << scheme_name(s.kind) << "," << format_double(p.dt) << ","
               << format_double(p.rms_error) << "," << format_double(p.std_error) << "\n";
    return os.str();
}

std::string json_report(const ConvergenceReport& report, const RunConfig& cfg) {
    ordered_json j = ordered_json::object();
    ordered_json exp = ordered_json::object();
    exp["name"] = cfg.name;
    exp["hash"] = hex16(plan_hash(cfg));
    exp["seed"] = cfg.plan.seed;
    exp["config"] = config_json(cfg);
    j["experiment"] = exp;
    j["report"] = report_body(report);
    return j.dump(2) + "\n";
}

std::string json_comparison(const ComparisonReport& report, const RunConfig& cfg) {
    ordered_json j = ordered_json::object();
    ordered_json exp = ordered_json::object();
    exp["name"] = cfg.name;
    exp["hash"] = hex16(plan_hash(cfg));
    exp["seed"] = cfg.plan.seed;
    exp["config"] = config_json(cfg);
    j["experiment"] = exp;
    j["fem"] = report_body(report.fem);
    j["fvm"] = report_body(report.fvm);
    ordered_json pairs = ordered_json::array();
    for (const ComparisonPair& p : report.pairs) {
        ordered_json row = ordered_json::object();
        row["scheme"] = scheme_name(p.scheme);
        row["dt"] = p.dt;
        row["fem_rms"] = p.fem_rms;
        row["fvm_rms"] = p.fvm_rms;
        row["rel_discrepancy"] = p.rel_discrepancy;
        pairs.push_back(row);
    }
    j["pairs"] = pairs;
    j["max_rel_discrepancy"] = report.max_rel_discrepancy;
    return j.dump(2) + "\n";
}

std::string log_report(const ConvergenceReport& report, const RunConfig& cfg) {
    std::ostringstream os;
    os << "spdekit convergence run\n";
    os << "finished:   " << local_timestamp() << "\n";
    os << "wall time:  " << report.wall_seconds << " s\n";
    os << "hash:       " << hex16(plan_hash(cfg)) << "\n";
    os << "seed:       " << cfg.plan.seed << "\n";
    os << "problem:    " << problem_name(report.plan.problem) << " on "
       << space_name(report.plan.space) << " (" << report.plan.nx << "x" << report.plan.ny
       << "), " << report.plan.realizations << " realizations, coupling "
       << report.coupling_used << "\n";
    os << "reference:  dt = " << format_double(report.reference_dt) << "\n";
    os << "solver its: " << report.total_solver_iterations << "\n";
    for (const SchemeResult& s : report.schemes) {
        os << "\n" << scheme_name(s.kind) << ": rate " << format_double(s.fit.rate) << " +/- "
           << format_double(s.fit.half_width) << (s.fit.weighted ? " (weighted" : " (unweighted")
           << ", " << s.fit.points << " points)\n";
        for (const LadderPoint& p : s.points)
            os << "  dt " << format_double(p.dt) << "  rms " << format_double(p.rms_error)
               << "  se " << format_double(p.std_error) << "  n " << p.realizations << "\n";
    }
    if (!report.warnings.empty()) {
        os << "\nwarnings:\n";
        for (const std::string& w : report.warnings) os << "  " << w << "\n";
    }
    if (report.aborted) os << "\nABORTED: " << report.abort_reason << "\n";
    return os.str();
}

std::string field_csv(const Mesh& mesh, SpaceMethod space, std::span<const double> values) {
    std::ostringstream os;
    os << "x,y,value\n";
    if (space == SpaceMethod::fem) {
        if (values.size() != mesh.vertices.size())
            throw std::invalid_argument("field_csv: value count does not match vertex count");
        for (std::size_t i = 0; i < mesh.vertices.size(); ++i)
            os << format_double(mesh.vertices[i].x) << "," << format_double(mesh.vertices[i].y)
               << "," << format_double(values[i]) << "\n";
    } else {
        if (values.size() != mesh.cells.size())
            throw std::invalid_argument("field_csv: value count does not match cell count");
        for (std::size_t i = 0; i < mesh.cells.size(); ++i)
            os << format_double(mesh.cells[i].center.x) << ","
               << format_double(mesh.cells[i].center.y) << "," << format_double(values[i])
               << "\n";
    }
    return os.str();
}

std::string faces_csv(const Mesh& mesh, std::span<const double> face_values) {
    if (face_values.size() != mesh.faces.size())
        throw std::invalid_argument("faces_csv: value count does not match face count");
    std::ostringstream os;
    os << "x,y,nx,ny,value\n";
    for (std::size_t i = 0; i < mesh.faces.size(); ++i) {
        const Face& f = mesh.faces[i];
        const Cell& ca = mesh.cells[static_cast<std::size_t>(f.a)];
        double mx = 0.0, my = 0.0;
        if (f.boundary()) {
            // Midpoint sits half a cell away from the owner center, outward.
            const double t =
                0.5 * (std::abs(f.normal.x) * mesh.dx + std::abs(f.normal.y) * mesh.dy);
            mx = ca.center.x + t * f.normal.x;
            my = ca.center.y + t * f.normal.y;
        } else {
            const Cell& cb = mesh.cells[static_cast<std::size_t>(f.b)];
            mx = 0.5 * (ca.center.x + cb.center.x);
            my = 0.5 * (ca.center.y + cb.center.y);
        }
        os << format_double(mx) << "," << format_double(my) << "," << format_double(f.normal.x)
           << "," << format_double(f.normal.y) << "," << format_double(face_values[i]) << "\n";
    }
    return os.str();
}

}  // namespace spdekit
