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

#include <coupled_mimo.hpp>

#include <CLI11.hpp>

#include <chrono>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

namespace fs = std::filesystem;

namespace
{
    constexpr int exit_ok = 0;
    constexpr int exit_invalid = 2;
    constexpr int exit_aborted = 3;

    constexpr const char *output_env = "COUPLED_MIMO_OUTPUT_DIR";

    fs::path default_output_dir(const fs::path &config)
    {
        const char *root = std::getenv(output_env);
        return fs::path(root && *root ? root : "cmimo_output") / config.stem();
    }

    int cmd_run(const fs::path &config, const std::string &output_override, int threads, bool quiet)
    {
        cmimo::RunConfig cfg;
        try
        {
            cfg = cmimo::load_config(config, default_output_dir(config));
            if (!output_override.empty())
                cfg.output_dir = output_override;
            if (threads > 0)
                cfg.scenario.threads = threads;
            if (cfg.channel_file)
            {
                cfg.scenario.external_Z21 = cmimo::read_channel_file(*cfg.channel_file);
                cfg.scenario.validate();
            }
        }
        catch (const cmimo::config_error &e)
        {
            std::cerr << "error: " << e.what() << '\n';
            return exit_invalid;
        }
        catch (const std::invalid_argument &e)
        {
            std::cerr << "error: " << config.string() << ": " << e.what() << '\n';
            return exit_invalid;
        }

        const auto t0 = std::chrono::steady_clock::now();
        cmimo::ScenarioResult res;
        try
        {
            res = cmimo::run_scenario(cfg.scenario);
        }
        catch (const std::exception &e)
        {
            std::cerr << "error: simulation aborted: " << e.what() << '\n';
            return exit_aborted;
        }
        const double elapsed = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();

        try
        {
            cmimo::write_outputs(cfg, res);
        }
        catch (const std::exception &e)
        {
            std::cerr << "error: " << e.what() << '\n';
            return exit_aborted;
        }

        if (!quiet)
            for (std::size_t ip = 0; ip < res.power_grid.size(); ++ip)
                std::cout << cmimo::summary_line(cfg, res, ip) << '\n';
        const std::size_t n = cfg.scenario.external_Z21 ? cfg.scenario.external_Z21->size()
                                                        : std::size_t(cfg.scenario.n_realizations);
        std::cerr << "done: " << n << " realizations, " << res.resampled << " resampled";
        if (res.mac_nonconverged > 0)
            std::cerr << ", " << res.mac_nonconverged << " dual-MAC solves hit the iteration cap";
        std::cerr << ", " << cmimo::format_fixed(elapsed, 2) << " s, output in " << cfg.output_dir.string() << '\n';
        return exit_ok;
    }

    int cmd_dump_impedance(int n, double d)
    {
        if (n < 1 || !(d > 0.0) || !std::isfinite(d))
        {
            std::cerr << "error: --n must be at least 1 and --d positive\n";
            return exit_invalid;
        }
        cmimo::cmat Z;
        try
        {
            Z = cmimo::array_impedance_matrix(cmimo::ArrayGeometry(std::size_t(n), d));
        }
        catch (const std::exception &e)
        {
            std::cerr << "error: " << e.what() << '\n';
            return exit_invalid;
        }
        const auto fmt = [](cmimo::cplx z) {
            return cmimo::format_fixed(z.real(), 6) + (z.imag() < 0.0 ? " - j" : " + j") +
                   cmimo::format_fixed(std::abs(z.imag()), 6) + " ohm";
        };
        std::cout << "# UCA with " << n << " half-wave dipoles, spacing " << cmimo::format_double(d)
                  << " wavelengths\n";
        std::cout << "# self impedance: " << fmt(Z(0, 0)) << '\n';
        if (n > 1)
        {
            std::cout << "# nearest-neighbour mutual impedance: " << fmt(Z(0, 1)) << ", magnitude "
                      << cmimo::format_fixed(std::abs(Z(0, 1)), 6) << " ohm\n";
        }
        cmimo::write_complex_csv(std::cout, Z);
        return exit_ok;
    }

    int cmd_kde(const fs::path &in_path, const fs::path &out_path)
    {
        std::ifstream in(in_path, std::ios::binary);
        if (!in)
        {
            std::cerr << "error: cannot open " << in_path.string() << '\n';
            return exit_invalid;
        }
        std::vector<double> samples;
        std::string line;
        int line_no = 0;
        while (std::getline(in, line))
        {
            ++line_no;
            const auto t = cmimo::trim(line);
            if (t.empty() || t.front() == '#')
                continue;
            const auto v = cmimo::parse_double(t);
            if (!v || !std::isfinite(*v))
            {
                std::cerr << "error: " << in_path.string() << ':' << line_no << ": not a number: '" << t << "'\n";
                return exit_invalid;
            }
            samples.push_back(*v);
        }
        if (samples.empty())
        {
            std::cerr << "error: " << in_path.string() << ": no samples\n";
            return exit_invalid;
        }
        cmimo::Density d;
        try
        {
            d = cmimo::kde(samples);
        }
        catch (const std::invalid_argument &e)
        {
            std::cerr << "error: " << e.what() << '\n';
            return exit_invalid;
        }
        try
        {
            cmimo::write_text_file(out_path, cmimo::kde_csv(d));
        }
        catch (const std::exception &e)
        {
            std::cerr << "error: " << e.what() << '\n';
            return exit_invalid;
        }
        return exit_ok;
    }
}

int main(int argc, char **argv)
{
    CLI::App app{"Physically consistent MIMO up/downlink simulation with coupled antenna arrays"};
    app.require_subcommand(1);

    std::string config, output_dir;
    int threads = 0;
    bool quiet = false;
    auto *run = app.add_subcommand("run", "Run the Monte Carlo scenario described by a configuration file");
    run->add_option("config", config, "Configuration file")->required();
    run->add_option("--output-dir", output_dir,
                    std::string("Output directory (default: output_dir key, else $") + output_env +
                        "/<config name>)");
    run->add_option("--threads", threads, "Worker threads (overrides the configuration)")
        ->check(CLI::PositiveNumber);
    run->add_flag("-q,--quiet", quiet, "Do not print per-power summaries");

    int n = 0;
    double d = 0.0;
    auto *dump = app.add_subcommand("dump-impedance", "Print the impedance matrix of a uniform circular array");
    dump->add_option("--n", n, "Number of dipoles")->required();
    dump->add_option("--d", d, "Neighbour spacing in wavelengths")->required();

    std::string kde_in, kde_out;
    auto *kde = app.add_subcommand("kde", "Gaussian kernel density of one sample per line");
    kde->add_option("input", kde_in, "Input file, one real number per line")->required();
    kde->add_option("output", kde_out, "Output CSV (alpha,density)")->required();

    try
    {
        app.parse(argc, argv);
    }
    catch (const CLI::CallForHelp &e)
    {
        return app.exit(e);
    }
    catch (const CLI::ParseError &e)
    {
        app.exit(e);
        return exit_invalid;
    }

    if (*run)
        return cmd_run(config, output_dir, threads, quiet);
    if (*dump)
        return cmd_dump_impedance(n, d);
    return cmd_kde(kde_in, kde_out);
}
