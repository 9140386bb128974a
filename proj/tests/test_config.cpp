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
#include <cstdio>
#include <functional>
#include <map>
#include <string>

#include "doctest.h"
#include "spdekit/config.hpp"

using namespace spdekit;

namespace {

bool contains(const std::string& hay, const std::string& needle) {
    return hay.find(needle) != std::string::npos;
}

std::string message_of(const std::function<void()>& fn) {
    try {
        fn();
    } catch (const ConfigError& e) {
        return e.what();
    }
    return "";
}

}  // namespace

TEST_CASE("an empty document resolves to the documented linear defaults") {
    RunConfig cfg = parse_config("");
    CHECK(cfg.plan.problem == ProblemKind::linear_rd);
    CHECK(cfg.plan.space == SpaceMethod::fem);
    CHECK(cfg.plan.nx == 50);
    CHECK(cfg.plan.ny == 50);
    CHECK(cfg.plan.L1 == 1.0);
    CHECK(cfg.plan.modes == 50);
    CHECK(cfg.plan.noise.r == 2);
    CHECK(cfg.plan.noise.delta == 0.05);
    CHECK(cfg.plan.noise.zero_mode_one);
    CHECK(cfg.plan.noise.amplitude == 1.0);
    CHECK(cfg.plan.T == 1.0);
    CHECK(cfg.plan.diffusion == 1.0);
    REQUIRE(cfg.plan.dt_ladder.size() == 5);
    CHECK(cfg.plan.dt_ladder.front() == 1.0 / 32);
    CHECK(cfg.plan.dt_ladder.back() == 1.0 / 512);
    CHECK(cfg.plan.dt_reference == 0.0);
    CHECK(cfg.plan.realizations == 30);
    CHECK(cfg.plan.seed == 12345);
    CHECK(cfg.plan.coupling == CouplingMode::coupled);
    CHECK(cfg.plan.threads == 1);
    CHECK(cfg.name == "experiment");
    CHECK(cfg.out_dir == "out");
    CHECK(cfg.write_csv);
    CHECK(cfg.write_json);
    CHECK_FALSE(cfg.dump_mesh);

    SUBCASE("every provenance entry is a default") {
        REQUIRE_FALSE(cfg.provenance.empty());
        for (const ConfigEntry& e : cfg.provenance) CHECK(e.source == ConfigSource::defaults);
    }

    SUBCASE("the adr kind swaps in its own defaults") {
        RunConfig adr = parse_config("[problem]\nkind = adr_darcy\n");
        CHECK(adr.plan.problem == ProblemKind::adr_darcy);
        CHECK(adr.plan.space == SpaceMethod::fvm);
        CHECK(adr.plan.diffusion == 0.01);
        CHECK(adr.plan.realizations == 100);
        CHECK(adr.plan.dt_ladder.front() == 1.0 / 64);
        CHECK(adr.plan.darcy.k_base == 0.01);
        CHECK(adr.plan.darcy.contrast == 100.0);
        REQUIRE(adr.plan.darcy.streaks.centers.size() == 3);
    }
}

TEST_CASE("values parse with exact fractions and strict types") {
    RunConfig cfg = parse_config(
        "[space]\n"
        "nx = 16\n"
        "ny = 12\n"
        "[noise]\n"
        "r = 1\n"
        "modes = 8\n"
        "[time]\n"
        "T = 1/2\n"
        "dt_ladder = 1/32, 1/64, 1/128\n"
        "[monte_carlo]\n"
        "realizations = 5\n"
        "seed = 999\n"
        "schemes = modified\n");
    CHECK(cfg.plan.nx == 16);
    CHECK(cfg.plan.ny == 12);
    CHECK(cfg.plan.noise.r == 1);
    CHECK(cfg.plan.modes == 8);
    CHECK(cfg.plan.T == 0.5);
    REQUIRE(cfg.plan.dt_ladder.size() == 3);
    CHECK(cfg.plan.dt_ladder[0] == 1.0 / 32);   // exact binary fractions
    CHECK(cfg.plan.dt_ladder[2] == 1.0 / 128);
    CHECK(cfg.plan.seed == 999);
    CHECK(cfg.plan.run_modified);
    CHECK_FALSE(cfg.plan.run_standard);

    SUBCASE("omitted modes default to every resolvable mode") {
        RunConfig m = parse_config("[space]\nnx = 20\nny = 30\n");
        CHECK(m.plan.modes == 20);  // min(nx, ny)
    }
    SUBCASE("an explicit zero is rejected rather than silently remapped") {
        CHECK_THROWS_WITH_AS(
            (void)parse_config("[space]\nnx = 20\nny = 30\n[noise]\nmodes = 0\n"),
            doctest::Contains("noise.modes"), ConfigError);
    }
}

TEST_CASE("schema violations carry the line and the key path") {
    const std::string dup = message_of([] {
        (void)parse_config("[time]\nT = 1\nT = 2\n");
    });
    CHECK(contains(dup, "line 3"));
    CHECK(contains(dup, "time.t"));

    const std::string unknown = message_of([] {
        (void)parse_config("[time]\nstep = 0.1\n");
    });
    CHECK(contains(unknown, "time.step"));

    const std::string bad_section = message_of([] {
        (void)parse_config("[clock]\nT = 1\n");
    });
    CHECK(contains(bad_section, "unknown section"));

    const std::string orphan = message_of([] {
        (void)parse_config("T = 1\n");
    });
    CHECK(contains(orphan, "outside any [section]"));

    const std::string bad_r = message_of([] {
        (void)parse_config("[noise]\nr = 3\n");
    });
    CHECK(contains(bad_r, "noise.r"));
    CHECK(contains(bad_r, "{1, 2}"));
    CHECK(contains(bad_r, "got 3"));

    const std::string bad_bool = message_of([] {
        (void)parse_config("[noise]\nzero_mode_one = yes\n");
    });
    CHECK(contains(bad_bool, "true"));

    const std::string bad_kind = message_of([] {
        (void)parse_config("[problem]\nkind = heat\n");
    });
    CHECK(contains(bad_kind, "linear_rd"));

    // Plan-level coherence failures surface as configuration errors too.
    CHECK_THROWS_AS(
        (void)parse_config("[time]\ndt_ladder = 1/16, 1/64, 1/100\n"), ConfigError);
    CHECK_THROWS_AS((void)parse_config("[space]\nnx = 1\n"), ConfigError);
}

TEST_CASE("keys and sections are case-insensitive; canonical casing is restored") {
    RunConfig cfg = parse_config("[TIME]\nt = 1/4\n[Space]\nl1 = 2.0\nNX = 8\nny = 8\n");
    CHECK(cfg.plan.T == 0.25);
    CHECK(cfg.plan.L1 == 2.0);
    CHECK(cfg.plan.nx == 8);

    bool saw_T = false, saw_L1 = false;
    for (const ConfigEntry& e : cfg.provenance) {
        if (e.section == "time" && e.key == "T") {
            saw_T = true;
            CHECK(e.source == ConfigSource::file);
            CHECK(e.value == "0.25");
        }
        if (e.section == "space" && e.key == "L1") saw_L1 = true;
    }
    CHECK(saw_T);
    CHECK(saw_L1);

    // Same key in two spellings is still a duplicate.
    CHECK_THROWS_AS((void)parse_config("[time]\nT = 1\nt = 2\n"), ConfigError);
}

TEST_CASE("environment-style overrides replace file values") {
    std::map<std::string, std::string> env;
    env["time.t"] = "1/4";
    env["monte_carlo.realizations"] = "7";
    RunConfig cfg = parse_config("[time]\nT = 1\n[monte_carlo]\nrealizations = 30\n", env);
    CHECK(cfg.plan.T == 0.25);
    CHECK(cfg.plan.realizations == 7);

    for (const ConfigEntry& e : cfg.provenance) {
        if (e.section == "time" && e.key == "T") CHECK(e.source == ConfigSource::environment);
        if (e.section == "monte_carlo" && e.key == "realizations")
            CHECK(e.source == ConfigSource::environment);
    }

    SUBCASE("unknown override keys are reported with the variable name hint") {
        std::map<std::string, std::string> bad;
        bad["time.step"] = "1";
        const std::string msg = message_of([&] { (void)parse_config("", bad); });
        CHECK(contains(msg, "SPDEKIT_TIME_STEP"));
    }
}

TEST_CASE("canonical echo round-trips and drives a stable plan hash") {
    RunConfig cfg = parse_config(
        "[problem]\nkind = linear_rd\nreaction_c = 0.25\n"
        "[space]\nnx = 24\nny = 24\n"
        "[noise]\nr = 1\n"
        "[time]\ndt_ladder = 1/32, 1/64, 1/128\n"
        "[monte_carlo]\nseed = 42\nrealizations = 10\n"
        "[output]\nname = roundtrip\n");

    const std::string echo = print_config(cfg);
    RunConfig again = parse_config(echo);
    CHECK(print_config(again) == echo);
    CHECK(plan_hash(again) == plan_hash(cfg));
    CHECK(again.plan.nx == 24);
    CHECK(again.name == "roundtrip");

    SUBCASE("hash tracks the experiment, not the run housekeeping") {
        RunConfig seed_changed = cfg;
        override_seed(seed_changed, 137);
        CHECK(plan_hash(seed_changed) == plan_hash(cfg));
        CHECK(seed_changed.plan.seed == 137);

        RunConfig threads_changed = cfg;
        override_threads(threads_changed, 8);
        CHECK(plan_hash(threads_changed) == plan_hash(cfg));

        RunConfig dir_changed = cfg;
        override_out_dir(dir_changed, "elsewhere");
        CHECK(plan_hash(dir_changed) == plan_hash(cfg));
        CHECK(dir_changed.out_dir == "elsewhere");

        RunConfig grid_changed = parse_config(
            "[problem]\nkind = linear_rd\nreaction_c = 0.25\n"
            "[space]\nnx = 25\nny = 24\n"
            "[noise]\nr = 1\n"
            "[time]\ndt_ladder = 1/32, 1/64, 1/128\n"
            "[monte_carlo]\nseed = 42\nrealizations = 10\n"
            "[output]\nname = roundtrip\n");
        CHECK(plan_hash(grid_changed) != plan_hash(cfg));
    }

    SUBCASE("cli overrides keep the echoed provenance in sync") {
        RunConfig c = cfg;
        override_seed(c, 2024);
        override_threads(c, 4);
        override_out_dir(c, "alt");
        bool seed_ok = false, threads_ok = false, dir_ok = false;
        for (const ConfigEntry& e : c.provenance) {
            if (e.key == "seed") {
                seed_ok = e.value == "2024" && e.source == ConfigSource::cli;
            } else if (e.key == "threads") {
                threads_ok = e.value == "4" && e.source == ConfigSource::cli;
            } else if (e.key == "dir") {
                dir_ok = e.value == "alt" && e.source == ConfigSource::cli;
            }
        }
        CHECK(seed_ok);
        CHECK(threads_ok);
        CHECK(dir_ok);
        const std::string echo2 = print_config(c);
        CHECK(contains(echo2, "seed = 2024"));
        CHECK(contains(echo2, "threads = 4"));
    }

    SUBCASE("report basename embeds the hash and the seed") {
        const std::string base = report_basename(cfg);
        char expect[64];
        std::snprintf(expect, sizeof expect, "report_%016llx_seed42",
                      static_cast<unsigned long long>(plan_hash(cfg)));
        CHECK(base == expect);
    }
}

TEST_CASE("doubles echo in shortest round-trip form") {
    CHECK(format_double(0.5) == "0.5");
    CHECK(format_double(1.0) == "1");
    CHECK(format_double(0.1) == "0.1");
    CHECK(format_double(1.0 / 512) == "0.001953125");
    const double awkward = 0.1 + 0.2;  // 0.30000000000000004
    CHECK(std::stod(format_double(awkward)) == awkward);
}

TEST_CASE("comments, blank lines, and whitespace are tolerated") {
    RunConfig cfg = parse_config(
        "# leading comment\n"
        "\n"
        "[time]   ; trailing note\n"
        "  T   =   1/2   # inline comment\n"
        "\n"
        "[space]\n"
        "nx=10\n"
        "ny  =10\n");
    CHECK(cfg.plan.T == 0.5);
    CHECK(cfg.plan.nx == 10);
    CHECK(cfg.plan.ny == 10);
}

TEST_CASE("reading a missing config file fails cleanly") {
    CHECK_THROWS_AS((void)parse_config_file("/nonexistent/path.cfg", false), ConfigError);
}
