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
#include <map>
#include <stdexcept>
#include <string>
#include <vector>

#include "spdekit/harness.hpp"

namespace spdekit {

enum class ConfigSource { defaults, file, environment, cli };

// One resolved key with where its value came from; the full list is the
// canonical echo used by --print-config and the plan hash.
struct ConfigEntry {
    std::string section;
    std::string key;
    std::string value;
    ConfigSource source = ConfigSource::defaults;
};

struct RunConfig {
    ExperimentPlan plan;
    std::string name = "experiment";  // label echoed in reports, not hashed
    std::string out_dir = "out";
    int verbosity = 1;
    bool write_csv = true;
    bool write_json = true;
    bool dump_mesh = false;      // vertex/triangle tables next to the report
    bool dump_noise = false;     // low-mode noise trajectories (run subcommand)
    bool dump_velocity = false;  // Darcy face velocities (adr_darcy)
    std::vector<double> snapshot_times;   // for the single-path run subcommand
    std::vector<ConfigEntry> provenance;  // every known key, schema order
};

// All schema violations (unknown key, bad type, constraint breach) carry the
// offending line and key path in the message.
class ConfigError : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

// Strict sectioned key=value format. `extra` entries (normally environment
// overrides) replace file values; remaining keys take documented defaults.
RunConfig parse_config(const std::string& text,
                       const std::map<std::string, std::string>& extra = {});

// Reads the file and applies SPDEKIT_<SECTION>_<KEY> process-environment
// overrides. Throws ConfigError when the file cannot be read.
RunConfig parse_config_file(const std::string& path, bool use_process_env = true);

// Collects SPDEKIT_-prefixed variables from the process environment, mapped
// to section/key form. Unknown SPDEKIT_ variables raise ConfigError.
std::map<std::string, std::string> spdekit_env_overrides();

// Canonical, fully-resolved text; parse_config(print_config(c)) resolves to
// the same configuration.
std::string print_config(const RunConfig& cfg);

// FNV-1a 64-bit over the experiment-defining subset of the canonical text:
// [output], the seed, and the thread count do not participate, so reports of
// the same experiment share a hash across seeds and machines.
std::uint64_t plan_hash(const RunConfig& cfg);

// "report_<hash as 16 hex digits>_seed<seed>"
std::string report_basename(const RunConfig& cfg);

// Command-line overrides; keep the provenance echo in sync.
void override_seed(RunConfig& cfg, std::uint64_t seed);
void override_threads(RunConfig& cfg, int threads);
void override_out_dir(RunConfig& cfg, const std::string& dir);

// Shortest text that parses back to exactly the same double.
std::string format_double(double v);

}  // namespace spdekit
