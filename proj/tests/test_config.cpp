// SPDX-License-Identifier: Apache-2.0
//
// coupled-mimo: physically consistent MIMO channels for coupled antenna arrays
// Copyright (C) 2026 The coupled-mimo authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
// http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.
// ------------------------------------------------------------------------

#include <catch_amalgamated.hpp>

#include <coupled_mimo/channel_import.hpp>
#include <coupled_mimo/config.hpp>
#include <coupled_mimo/report.hpp>

#include <filesystem>
#include <random>
#include <sstream>

using Catch::Matchers::ContainsSubstring;
using cmimo::cmat;
using cmimo::config_error;
using cmimo::Emitter;
using cmimo::Strategy;

namespace
{
    const std::string minimal = "topology = su_miso\n"
                                "bs_antennas = 9\n"
                                "spacing_bs = 0.35\n"
                                "power_dbw = -100:10:-50\n"
                                "realizations = 20\n"
                                "seed = 3\n";

    cmimo::RunConfig parse(const std::string &text)
    {
        return cmimo::parse_config(text, "test.cfg", std::filesystem::path("/base"), "/out/default");
    }

    // Line number carried by the config_error thrown for text.
    int error_line(const std::string &text)
    {
        try
        {
            parse(text);
        }
        catch (const config_error &e)
        {
            return e.line();
        }
        return -1;
    }

    std::string error_message(const std::string &text)
    {
        try
        {
            parse(text);
        }
        catch (const config_error &e)
        {
            return e.what();
        }
        return {};
    }

    std::string drop_line(const std::string &text, const std::string &key)
    {
        std::istringstream in(text);
        std::string out, line;
        while (std::getline(in, line))
            if (line.rfind(key, 0) != 0)
                out += line + '\n';
        return out;
    }

    std::filesystem::path scratch_dir()
    {
        auto p = std::filesystem::temp_directory_path() / "cmimo_test_config";
        std::filesystem::create_directories(p);
        return p;
    }
}

TEST_CASE("Config - Minimal file and defaults")
{
    const auto cfg = parse(minimal);
    const auto &s = cfg.scenario;
    CHECK(s.topology == cmimo::Topology::su_miso);
    CHECK(s.N == 9);
    CHECK(s.users == std::vector<int>{1});
    CHECK(s.spacing_bs == 0.35);
    CHECK(s.n_realizations == 20);
    CHECK(s.seed == 3);
    CHECK(s.sigma_z == cmimo::default_sigma_z());
    CHECK(cfg.power_dbw == std::vector<double>{-100, -90, -80, -70, -60, -50});
    REQUIRE(s.power_grid.size() == 6);
    CHECK(s.power_grid.front() == Catch::Approx(1e-10).epsilon(1e-14));
    CHECK(s.strategies == std::vector<Strategy>{Strategy::cap, Strategy::recip, Strategy::hyp});
    CHECK(cfg.output_dir == "/out/default");
    CHECK(cfg.emit ==
          std::vector<Emitter>{Emitter::rates_csv, Emitter::alpha_csv, Emitter::streams_csv, Emitter::kde_csv});
    CHECK_FALSE(s.keep_records);
}

TEST_CASE("Config - Optional keys")
{
    const auto cfg = parse("# full example\n"
                           "topology = mu_mimo   # trailing comment\n"
                           "bs_antennas = 12\n"
                           "users = 2, 3\n"
                           "spacing_bs = 0.4\n"
                           "spacing_ue = 0.3\n"
                           "sigma_z = 0.5\n"
                           "power_dbw = -80, -70.5, -60\n"
                           "realizations = 7\n"
                           "seed = 18446744073709551615\n"
                           "strategies = hyp_lin, cap\n"
                           "noise.sigma_u = 2e-9\n"
                           "noise.sigma_i = 3e-12\n"
                           "noise.rho = 0.1,-0.2\n"
                           "noise.T_A = 290\n"
                           "noise.delta_f = 1e6\n"
                           "output_dir = results/x\n"
                           "emit = per_realization_json, rates_csv\n"
                           "threads = 4\n");
    const auto &s = cfg.scenario;
    CHECK(s.users == std::vector<int>{2, 3});
    CHECK(s.spacing_ue == 0.3);
    CHECK(s.sigma_z == 0.5);
    CHECK(cfg.power_dbw == std::vector<double>{-80, -70.5, -60});
    CHECK(s.seed == 18446744073709551615ULL);
    // Canonical order, whatever the file order.
    CHECK(s.strategies == std::vector<Strategy>{Strategy::cap, Strategy::hyp_lin});
    CHECK(s.noise.sigma_u == 2e-9);
    CHECK(s.noise.sigma_i == 3e-12);
    CHECK(s.noise.rho == cmimo::cplx(0.1, -0.2));
    CHECK(s.noise.T_A == 290.0);
    CHECK(s.noise.delta_f == 1e6);
    CHECK(cfg.output_dir == "results/x");
    CHECK(cfg.emit == std::vector<Emitter>{Emitter::rates_csv, Emitter::per_realization_json});
    CHECK(s.keep_records);
    CHECK(s.threads == 4);

    const auto mu = parse("topology = mu_miso\nbs_antennas = 4\nusers = 1,1\nspacing_bs = 0.4\n"
                          "power_dbw = -60\nrealizations = 2\nseed = 1\n");
    CHECK(mu.scenario.strategies == std::vector<Strategy>{Strategy::cap, Strategy::hyp, Strategy::cap_lin,
                                                          Strategy::recip_lin, Strategy::hyp_lin});
}

TEST_CASE("Config - Missing required keys are named")
{
    for (const std::string key : {"topology", "bs_antennas", "spacing_bs", "power_dbw", "realizations", "seed"})
    {
        const auto msg = error_message(drop_line(minimal, key));
        INFO(key);
        CHECK_THAT(msg, ContainsSubstring("missing required key '" + key + "'"));
    }
    const auto msg = error_message("topology = su_mimo\n" + drop_line(minimal, "topology"));
    CHECK_THAT(msg, ContainsSubstring("users"));
}

TEST_CASE("Config - Errors point at the offending line")
{
    CHECK(error_line(minimal + "bogus = 1\n") == 7);
    CHECK(error_line(minimal + "seed = 4\n") == 7);
    CHECK(error_line(minimal + "threads\n") == 7);
    CHECK(error_line(minimal + "threads =\n") == 7);
    CHECK(error_line("\n# c\n" + minimal + "spacing_ue = -1\n") == 9);
    CHECK(error_line("topology = su_miso\nbs_antennas = nine\n") == 2);
    CHECK(error_line("topology = planar\n") == 1);
    CHECK(error_line(drop_line(minimal, "power_dbw") + "power_dbw = -50,-60\n") == 6);
    CHECK(error_line(drop_line(minimal, "power_dbw") + "power_dbw = -50:0:-40\n") == 6);
    CHECK(error_line(minimal + "strategies = cap, ergodic\n") == 7);
    CHECK(error_line(minimal + "strategies = cap_lin\n") == 7);
    CHECK(error_line(minimal + "noise.rho = 2\n") == 7);
    CHECK(error_line(minimal + "emit = rates_csv, pdf\n") == 7);
    CHECK(error_line(minimal + "channel_file = z.csv\n") == 5);

    CHECK_THAT(error_message(minimal + "seed = 4\n"), ContainsSubstring("test.cfg:7: duplicate key 'seed'"));
    CHECK_THAT(error_message(minimal + "bogus = 1\n"), ContainsSubstring("unknown key 'bogus'"));
}

TEST_CASE("Config - Scenario-level consistency")
{
    CHECK_THAT(error_message(minimal + "users = 2\n"), ContainsSubstring("su_miso"));
    CHECK_THAT(error_message("topology = mu_miso\nbs_antennas = 4\nusers = 2,1\nspacing_bs = 0.4\n"
                             "power_dbw = -60\nrealizations = 2\nseed = 1\n"),
               ContainsSubstring("single-antenna"));
    // Alpha outputs need a hyp strategy.
    const auto no_hyp = parse(minimal + "strategies = cap, recip\n");
    CHECK(no_hyp.emit == std::vector<Emitter>{Emitter::rates_csv, Emitter::streams_csv});
    CHECK_THAT(error_message(minimal + "strategies = cap\nemit = kde_csv\n"), ContainsSubstring("hyp"));
}

TEST_CASE("Config - Effective configuration round trip")
{
    const auto cfg = parse(minimal + "strategies = hyp, cap\nnoise.rho = 0.3\nemit = rates_csv\nthreads = 2\n");
    const std::string dump = cmimo::effective_config(cfg);
    const auto again = parse(dump);
    CHECK(cmimo::effective_config(again) == dump);

    const auto &a = cfg.scenario, &b = again.scenario;
    CHECK(a.power_grid == b.power_grid);
    CHECK(a.sigma_z == b.sigma_z);
    CHECK(a.strategies == b.strategies);
    CHECK(a.noise.rho == b.noise.rho);
    CHECK(a.noise.sigma_u == b.noise.sigma_u);
    CHECK(a.seed == b.seed);
    CHECK(again.output_dir == cfg.output_dir);
    CHECK(again.emit == cfg.emit);

    // Same outputs from the dumped file.
    auto small = parse(minimal);
    small.scenario.n_realizations = 5;
    small.power_dbw = {-80.0, -60.0};
    small.scenario.power_grid = {cmimo::dbw_to_watt(-80.0), cmimo::dbw_to_watt(-60.0)};
    const auto reparsed = parse(cmimo::effective_config(small));
    CHECK(cmimo::rates_csv(small, cmimo::run_scenario(small.scenario)) ==
          cmimo::rates_csv(reparsed, cmimo::run_scenario(reparsed.scenario)));
}

TEST_CASE("Config - Loading from disk")
{
    const auto dir = scratch_dir();
    const auto path = dir / "cfg_load.cfg";
    cmimo::write_text_file(path, minimal + "channel_file = z.csv\n" );
    // realizations together with channel_file is rejected
    CHECK_THROWS_AS(cmimo::load_config(path, "/o"), config_error);

    cmimo::write_text_file(path, drop_line(minimal, "realizations") + "channel_file = z.csv\n");
    const auto cfg = cmimo::load_config(path, "/o");
    REQUIRE(cfg.channel_file);
    CHECK(*cfg.channel_file == dir / "z.csv");

    CHECK_THROWS_AS(cmimo::load_config(dir / "does_not_exist.cfg", "/o"), config_error);
}

// ---------------------------------------------------------------- channel import

TEST_CASE("Channel import - CSV round trip")
{
    std::mt19937_64 rng(5);
    std::vector<cmat> Z;
    for (int k = 0; k < 3; ++k)
        Z.push_back(cmimo::sample_Z21(2, 4, 0.3, rng));
    std::ostringstream os;
    cmimo::write_channel_csv(os, Z);
    const auto back = cmimo::read_channel_csv("# exported\n" + os.str(), "z.csv");
    REQUIRE(back.size() == 3);
    for (int k = 0; k < 3; ++k)
        CHECK(back[std::size_t(k)] == Z[std::size_t(k)]);
}

TEST_CASE("Channel import - CSV errors")
{
    const auto line_of = [](const std::string &text) {
        try
        {
            cmimo::read_channel_csv(text, "z.csv");
        }
        catch (const config_error &e)
        {
            return e.line();
        }
        return -1;
    };
    CHECK(line_of("realization,0,1,2\n1,2,3,4\nrealization,2,1,2\n1,2,3,4\n") == 3);
    CHECK(line_of("realization,0,1,2\n1,2,3\n") == 2);
    CHECK(line_of("realization,0,2,1\n1,2\n1,x\n") == 3);
    CHECK(line_of("realisation,0,1,1\n1,2\n") == 1);
    CHECK(line_of("realization,0,1,1\n1,nan\n") == 2);
    CHECK_THROWS_AS(cmimo::read_channel_csv("# nothing\n", "z.csv"), config_error);
    CHECK_THROWS_AS(cmimo::read_channel_csv("realization,0,2,1\n1,2\n", "z.csv"), config_error);
}

TEST_CASE("Channel import - JSON")
{
    const auto Z = cmimo::read_channel_json(
        R"({"realizations": [{"index": 0, "M": 1, "N": 2, "data": [[1, 2], [3, -4]]},
                             {"index": 1, "M": 2, "N": 1, "data": [[0.5, 0], [0, 0.25]]}]})",
        "z.json");
    REQUIRE(Z.size() == 2);
    CHECK(Z[0](0, 1) == cmimo::cplx(3, -4));
    CHECK(Z[1](1, 0) == cmimo::cplx(0, 0.25));

    CHECK_THROWS_AS(cmimo::read_channel_json("{", "z.json"), config_error);
    CHECK_THROWS_AS(cmimo::read_channel_json(R"({"realizations": []})", "z.json"), config_error);
    CHECK_THROWS_AS(
        cmimo::read_channel_json(R"({"realizations": [{"index": 1, "M": 1, "N": 1, "data": [[1, 0]]}]})", "z.json"),
        config_error);
    CHECK_THROWS_AS(
        cmimo::read_channel_json(R"({"realizations": [{"index": 0, "M": 1, "N": 2, "data": [[1, 0]]}]})", "z.json"),
        config_error);
    CHECK_THROWS_AS(
        cmimo::read_channel_json(R"({"realizations": [{"index": 0, "M": 1, "N": 1, "data": [[1]]}]})", "z.json"),
        config_error);
}

TEST_CASE("Channel import - Files dispatch on extension")
{
    const auto dir = scratch_dir();
    std::mt19937_64 rng(8);
    const std::vector<cmat> Z = {cmimo::sample_Z21(1, 3, 1.0, rng)};
    std::ostringstream os;
    cmimo::write_channel_csv(os, Z);
    cmimo::write_text_file(dir / "z.csv", os.str());
    CHECK(cmimo::read_channel_file(dir / "z.csv")[0] == Z[0]);

    cmimo::write_text_file(dir / "z.json", R"({"realizations": [{"index": 0, "M": 1, "N": 1, "data": [[2, 1]]}]})");
    CHECK(cmimo::read_channel_file(dir / "z.json")[0](0, 0) == cmimo::cplx(2, 1));
    CHECK_THROWS_AS(cmimo::read_channel_file(dir / "missing.csv"), config_error);
}

// ---------------------------------------------------------------- reports

TEST_CASE("Reports - CSV layout")
{
    auto cfg = parse(minimal);
    cfg.scenario.n_realizations = 4;
    const auto res = cmimo::run_scenario(cfg.scenario);

    const auto rates = cmimo::rates_csv(cfg, res);
    CHECK(rates.rfind("# units:", 0) == 0);
    CHECK_THAT(rates, ContainsSubstring("\nP_dBW,C_erg,R_erg_recip,R_erg_hyp\n-100,"));
    CHECK(std::count(rates.begin(), rates.end(), '\n') == 2 + 6);
    CHECK(rates.find('\r') == std::string::npos);

    CHECK_THAT(cmimo::streams_csv(cfg, res), ContainsSubstring("\nP_dBW,streams_cap,streams_recip,streams_hyp\n"));
    const auto alpha = cmimo::alpha_csv(cfg, res);
    CHECK_THAT(alpha, ContainsSubstring("\nP_dBW,realization,alpha\n-100,0,"));
    CHECK(std::count(alpha.begin(), alpha.end(), '\n') == 2 + 6 * 4);
    const auto kde = cmimo::kde_csv(cfg, res);
    CHECK(std::count(kde.begin(), kde.end(), '\n') == 2 + 6 * 128);

    cfg.scenario.keep_records = true;
    const auto json = nlohmann::json::parse(cmimo::per_realization_json(cfg, cmimo::run_scenario(cfg.scenario)));
    CHECK(json.is_object());
}

TEST_CASE("Reports - Written files")
{
    auto cfg = parse(minimal + "emit = rates_csv, per_realization_json\n");
    cfg.output_dir = scratch_dir() / "written";
    std::filesystem::remove_all(cfg.output_dir);
    cfg.scenario.n_realizations = 3;
    const auto files = cmimo::write_outputs(cfg, cmimo::run_scenario(cfg.scenario));
    for (const auto &f : files)
        CHECK(std::filesystem::exists(f));
    CHECK(std::filesystem::exists(cfg.output_dir / "rates.csv"));
    CHECK(std::filesystem::exists(cfg.output_dir / "effective.cfg"));
    CHECK_FALSE(std::filesystem::exists(cfg.output_dir / "alpha.csv"));
}
