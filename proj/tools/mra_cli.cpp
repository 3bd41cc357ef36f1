/*
 * SPDX-FileCopyrightText: Copyright (c) 2026 The mra-diffusion Authors. All rights reserved.
 * SPDX-License-Identifier: Apache-2.0
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 * http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

// mra: command line front end.
//
//   mra gen-channels --count 1000 --out channels.bin
//   mra aud --preset aud --trials 100
//   mra jcedd --preset desk --trials 10
//   mra sweep --preset fig6 --trials 200 --output fig6.csv
//   mra provider-check --provider "exec:./echo_provider --mx 8 --my 8"

#include <chrono>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>

#include <CLI11.hpp>

#include "mra/channel_dataset.hpp"
#include "mra/experiment.hpp"
#include "mra/metrics.hpp"
#include "mra/provider_client.hpp"
#include "mra/sweep.hpp"

namespace {

struct CommonOptions {
    std::string preset = "default";
    std::string config;
    std::vector<std::string> sets;
    std::optional<std::uint64_t> seed;
    std::optional<std::size_t> trials;
    std::optional<std::size_t> workers;
    std::string provider;
};

void add_common(CLI::App* app, CommonOptions& o)
{
    app->add_option("--preset", o.preset, "named preset")->check(CLI::IsMember(mra::preset_names()));
    app->add_option("--config", o.config, "key = value config file applied after the preset");
    app->add_option("--set", o.sets, "override, e.g. --set system.snr_db=8 (repeatable)");
    app->add_option("--seed", o.seed, "root seed");
    app->add_option("--trials", o.trials, "Monte-Carlo trials per point");
    app->add_option("--workers", o.workers, "worker threads");
    app->add_option("--provider", o.provider, "score provider endpoint (exec:CMD or unix:PATH)");
}

mra::ExperimentConfig build_config(const CommonOptions& o)
{
    mra::ExperimentConfig cfg = mra::preset(o.preset);
    if (!o.config.empty()) mra::load_config(cfg, o.config);
    for (const auto& s : o.sets) mra::apply_override(cfg, s);
    if (o.seed) cfg.system.seed = *o.seed;
    if (o.trials) cfg.trials = *o.trials;
    if (o.workers) cfg.workers = *o.workers;
    if (!o.provider.empty()) cfg.provider = o.provider;
    cfg.validate();
    return cfg;
}

int cmd_gen_channels(const CommonOptions& o, std::size_t count, const std::string& out)
{
    const mra::ExperimentConfig cfg = build_config(o);
    mra::SystemConfig s = cfg.system;
    s.num_users = count;
    mra::RngStream rng = mra::RngStream(s.seed, "gen-channels");
    const mra::ComplexMatrix h = mra::gen_rayleigh_channels(s, rng);
    mra::ChannelDataset ds;
    ds.antennas_x = static_cast<std::uint32_t>(s.antennas_x);
    ds.antennas_y = static_cast<std::uint32_t>(s.antennas_y);
    for (Eigen::Index i = 0; i < h.rows(); ++i) ds.push_back(h.row(i).transpose());
    mra::save_channel_dataset(ds, out);
    std::cout << "wrote " << ds.size() << " channels (" << s.antennas_x << "x" << s.antennas_y << ") to "
              << out << "\n";
    return 0;
}

int cmd_aud(const CommonOptions& o, const std::vector<double>& roc)
{
    mra::ExperimentConfig cfg = build_config(o);
    if (cfg.aud == mra::AudMode::Oracle) cfg.aud = mra::AudMode::Omp;
    std::vector<mra::TrialMetrics> trials;
    std::vector<std::vector<std::uint8_t>> truth;
    std::vector<mra::RealVector> scores;
    for (std::size_t t = 0; t < cfg.trials; ++t) {
        const mra::Scenario sc = mra::trial_scenario(cfg, t);
        const mra::AudResult r = mra::detect_activity(cfg, sc);
        mra::TrialMetrics m;
        m.aep = mra::activity_error_probability(sc.activity.alpha, r.alpha);
        const auto rates = mra::detection_rates(sc.activity.alpha, r.alpha);
        m.pfa = rates.pfa;
        m.pmd = rates.pmd;
        trials.push_back(m);
        truth.push_back(sc.activity.alpha);
        scores.push_back(r.scores);
    }
    const mra::MetricsRecord rec = mra::reduce_metrics(trials);
    std::printf("mode=%s trials=%zu aep=%.6g pfa=%.6g pmd=%.6g\n", mra::to_string(cfg.aud).c_str(),
                rec.trials, rec.aep, rec.pfa, rec.pmd);
    if (!roc.empty()) {
        std::printf("threshold,pfa,pmd\n");
        for (const auto& p : mra::roc_curve(truth, scores, roc)) {
            std::printf("%.6g,%.6g,%.6g\n", p.threshold, p.pfa, p.pmd);
        }
    }
    return 0;
}

int cmd_jcedd(const CommonOptions& o)
{
    mra::ExperimentConfig cfg = build_config(o);
    cfg.algorithms = {"jcedd"};
    cfg.values.clear();
    cfg.timing = true;
    const auto rows = mra::run_sweep(cfg, std::cout);
    for (const auto& r : rows) {
        if (!r.ok) return 1;
        std::fprintf(stderr, "jcedd: nmse=%.2f dB ber=%.4g aep=%.4g (%zu trials)\n", r.metrics.nmse_db,
                     r.metrics.ber, r.metrics.aep, r.metrics.trials);
    }
    return 0;
}

int cmd_sweep(const CommonOptions& o, const std::string& output, bool timing)
{
    mra::ExperimentConfig cfg = build_config(o);
    if (!output.empty()) cfg.output = output;
    cfg.timing = cfg.timing || timing;
    std::vector<mra::SweepRow> rows;
    if (cfg.output.empty() || cfg.output == "-") {
        rows = mra::run_sweep(cfg, std::cout);
    } else {
        std::ofstream f(cfg.output);
        if (!f) throw mra::ConfigError("cannot write " + cfg.output);
        rows = mra::run_sweep(cfg, f);
    }
    std::size_t failed = 0;
    for (const auto& r : rows) failed += !r.ok;
    if (failed) std::fprintf(stderr, "sweep: %zu of %zu rows failed\n", failed, rows.size());
    return failed ? 1 : 0;
}

int cmd_provider_check(const CommonOptions& o, std::size_t batch)
{
    const mra::ExperimentConfig cfg = build_config(o);
    if (cfg.provider.empty()) throw mra::ConfigError("provider-check needs --provider");
    const auto t0 = std::chrono::steady_clock::now();
    auto provider = mra::connect_provider(cfg.provider, cfg.system.antennas_x, cfg.system.antennas_y,
                                          std::chrono::milliseconds(cfg.provider_timeout_ms));
    mra::RngStream rng(cfg.system.seed, "provider-check");
    std::vector<mra::ChannelTensor> in(batch);
    for (auto& t : in) {
        t.re = mra::gaussian_sample(cfg.system.antennas_x, cfg.system.antennas_y, 0.5, rng);
        t.im = mra::gaussian_sample(cfg.system.antennas_x, cfg.system.antennas_y, 0.5, rng);
    }
    const auto out = provider->score(in, 1.0, 0.5);
    const double ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count();
    std::printf("provider ok: grid %zux%zu, %zu tensors returned, %.1f ms\n", provider->m_x(), provider->m_y(),
                out.size(), ms);
    return 0;
}

}  // namespace

int main(int argc, char** argv)
{
    CLI::App app{"Grant-free massive random access simulator"};
    app.require_subcommand(1);

    CommonOptions gen_o, aud_o, jcedd_o, sweep_o, prov_o;

    auto* gen = app.add_subcommand("gen-channels", "write a Rayleigh channel dataset");
    add_common(gen, gen_o);
    std::size_t count = 1000;
    std::string out_path;
    gen->add_option("--count", count, "number of channel samples");
    gen->add_option("--out", out_path, "output file")->required();

    auto* aud = app.add_subcommand("aud", "active user detection only");
    add_common(aud, aud_o);
    std::vector<double> roc;
    aud->add_option("--roc", roc, "thresholds for a Pfa/Pmd curve")->delimiter(',');

    auto* jcedd = app.add_subcommand("jcedd", "joint channel estimation and data detection");
    add_common(jcedd, jcedd_o);

    auto* sweep = app.add_subcommand("sweep", "Monte-Carlo sweep to CSV");
    add_common(sweep, sweep_o);
    std::string sweep_out;
    bool timing = false;
    sweep->add_option("--output", sweep_out, "CSV path (default stdout)");
    sweep->add_flag("--timing", timing, "fill the wall_time column");

    auto* prov = app.add_subcommand("provider-check", "handshake and one score round trip");
    add_common(prov, prov_o);
    std::size_t batch = 4;
    prov->add_option("--batch", batch, "tensors in the test request");

    CLI11_PARSE(app, argc, argv);
    try {
        if (*gen) return cmd_gen_channels(gen_o, count, out_path);
        if (*aud) return cmd_aud(aud_o, roc);
        if (*jcedd) return cmd_jcedd(jcedd_o);
        if (*sweep) return cmd_sweep(sweep_o, sweep_out, timing);
        if (*prov) return cmd_provider_check(prov_o, batch);
    } catch (const mra::ConfigError& e) {
        std::fprintf(stderr, "config error: %s\n", e.what());
        return 2;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 1;
    }
    return 0;
}
