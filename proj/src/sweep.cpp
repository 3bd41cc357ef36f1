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

#include "mra/sweep.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cinttypes>
#include <cmath>
#include <cstdio>
#include <optional>
#include <thread>

#include "mra/baselines.hpp"
#include "mra/constellation.hpp"
#include "mra/data_scores.hpp"
#include "mra/jcedd.hpp"

namespace mra {

const std::vector<std::string>& csv_columns()
{
    static const std::vector<std::string> cols{
        "algorithm", "axis", "value", "trials", "aep", "nmse", "nmse_db", "ber", "pfa", "pmd",
        "channel_score_evals", "data_score_evals", "wall_time", "scenario_checksum", "status",
    };
    return cols;
}

std::string csv_header()
{
    std::string out;
    for (const auto& c : csv_columns()) {
        if (!out.empty()) out += ',';
        out += c;
    }
    return out + "\n";
}

namespace {

std::string num(double v)
{
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.10g", v);
    return buf;
}

std::string csv_field(const std::string& s)
{
    if (s.find_first_of(",\"\n\r") == std::string::npos) return s;
    std::string out = "\"";
    for (char c : s) {
        if (c == '"') out += '"';
        out += (c == '\n' || c == '\r') ? ' ' : c;
    }
    return out + "\"";
}

}  // namespace

std::string format_csv_row(const SweepRow& r, bool timing)
{
    char checksum[32];
    std::snprintf(checksum, sizeof(checksum), "%016" PRIx64, r.scenario_checksum);
    const MetricsRecord& m = r.metrics;
    std::vector<std::string> f{csv_field(r.algorithm), csv_field(r.axis), num(r.value),
                               std::to_string(m.trials)};
    if (r.ok) {
        for (double v : {m.aep, m.nmse, m.nmse_db, m.ber, m.pfa, m.pmd, m.channel_score_evals,
                         m.data_score_evals}) {
            f.push_back(num(v));
        }
        f.push_back(timing ? num(m.wall_seconds) : "NA");
    } else {
        for (int i = 0; i < 9; ++i) f.emplace_back("NA");
    }
    f.emplace_back(checksum);
    f.push_back(r.ok ? "ok" : csv_field("error: " + r.error));
    std::string out;
    for (const auto& s : f) {
        if (!out.empty()) out += ',';
        out += s;
    }
    return out + "\n";
}

PriorSession open_prior(const ExperimentConfig& cfg)
{
    PriorSession s;
    if (cfg.provider.empty()) {
        s.prior = std::make_unique<AnalyticGaussianPrior>(cfg.jcedd.prior_variance);
        return s;
    }
    s.provider = connect_provider(cfg.provider, cfg.system.antennas_x, cfg.system.antennas_y,
                                  std::chrono::milliseconds(cfg.provider_timeout_ms));
    s.prior = std::make_unique<ExternalPrior>(*s.provider);
    return s;
}

AudResult detect_activity(const ExperimentConfig& cfg, const Scenario& sc)
{
    const std::size_t lp = cfg.system.pilot_length;
    switch (cfg.aud) {
    case AudMode::Oracle: return oracle_aus(sc.activity);
    case AudMode::Omp: {
        OmpConfig o;
        o.k_max = cfg.omp_k_max;
        o.expected_active = cfg.system.fixed_active > 0
                                ? static_cast<double>(cfg.system.fixed_active)
                                : cfg.system.activity_prob * static_cast<double>(cfg.system.num_users);
        o.energy_threshold = cfg.aud_threshold;
        return omp_aud(sc.tx.received_pilot_padded, sc.pool.masked(lp), o);
    }
    case AudMode::Amp: {
        AmpConfig a;
        a.iterations = cfg.amp_iterations;
        a.activity_prob = cfg.system.fixed_active > 0
                              ? static_cast<double>(cfg.system.fixed_active) /
                                    static_cast<double>(cfg.system.num_users)
                              : cfg.system.activity_prob;
        a.threshold = cfg.aud_threshold;
        return amp_aud(sc.tx.received_pilot_padded, sc.pool.masked(lp), a);
    }
    }
    throw ConfigError("unknown AUD mode");
}

namespace {

std::vector<std::size_t> support(const std::vector<std::uint8_t>& alpha)
{
    std::vector<std::size_t> out;
    for (std::size_t k = 0; k < alpha.size(); ++k) {
        if (alpha[k]) out.push_back(k);
    }
    return out;
}

/// Column j of the true data for user users[j]; zero for users that did not transmit.
ComplexMatrix known_data(const Scenario& sc, const std::vector<std::size_t>& users)
{
    const ComplexMatrix& x = sc.tx.frames.data;
    ComplexMatrix out = ComplexMatrix::Zero(x.rows(), static_cast<Eigen::Index>(users.size()));
    for (std::size_t j = 0; j < users.size(); ++j) {
        const auto it = std::lower_bound(sc.tx.active.begin(), sc.tx.active.end(), users[j]);
        if (it != sc.tx.active.end() && *it == users[j]) {
            out.col(static_cast<Eigen::Index>(j)) = x.col(it - sc.tx.active.begin());
        }
    }
    return out;
}

ComplexMatrix known_channels(const Scenario& sc, const std::vector<std::size_t>& users)
{
    ComplexMatrix out = ComplexMatrix::Zero(static_cast<Eigen::Index>(users.size()), sc.channels.cols());
    for (std::size_t j = 0; j < users.size(); ++j) {
        if (sc.activity.alpha[users[j]]) {
            out.row(static_cast<Eigen::Index>(j)) = sc.channels.row(static_cast<Eigen::Index>(users[j]));
        }
    }
    return out;
}

struct AlgorithmOutput {
    ComplexMatrix h;
    ComplexMatrix x;
    std::size_t channel_evals = 0;
    std::size_t data_evals = 0;
};

AlgorithmOutput run_algorithm(const std::string& name, const ExperimentConfig& cfg, const Scenario& sc,
                              const std::vector<std::size_t>& users, ChannelPriorScorer& prior,
                              RngStream& rng)
{
    const Constellation c(cfg.system.qam_order);
    const std::size_t lp = cfg.system.pilot_length;
    const ComplexMatrix p_a = sc.pool.active_pilots(users, lp);
    const ComplexMatrix& y = sc.tx.received;
    const ComplexMatrix y_p = sc.tx.pilot_part();
    const ComplexMatrix y_d = sc.tx.data_part();
    const double nv = sc.tx.noise_variance;
    const JceddConfig& j = cfg.jcedd;

    AlgorithmOutput out;
    if (name == "jcedd") {
        const EstimationResult r = run_jcedd(y, p_a, nv, c, j, prior, rng);
        out.h = r.h;
        out.x = r.x_hard;
        out.channel_evals = r.counters.channel_score_evals;
        out.data_evals = r.counters.data_score_evals;
    } else if (name == "sde_perfect_data") {
        out.x = known_data(sc, users);
        ChannelPcOptions opts;
        opts.divergence_factor = j.divergence_factor;
        const ChannelPcResult r = estimate_channel_pc(y, stack_frames(p_a, out.x), nv, j.lambda_h, j.sigma,
                                                      j.channel_pc, prior, j.sigma.steps(), rng, opts);
        out.h = r.h;
        out.channel_evals = r.stats.score_evals;
    } else if (name == "langevin") {
        LangevinConfig lc;
        lc.base = j;
        lc.iterations = cfg.langevin_iterations;
        lc.cold_start = j.cold_start;
        const LangevinResult r = langevin_jcedd(y, p_a, nv, c, lc, prior, rng);
        out.h = r.h;
        out.x = r.x_hard;
        out.channel_evals = r.channel_score_evals;
        out.data_evals = r.data_score_evals;
    } else if (name == "ls_zf") {
        out.h = ls_ce(y_p, p_a);
        out.x = zf_init(y_d, out.h, &c);
    } else if (name == "ls_oamp") {
        out.h = ls_ce(y_p, p_a);
        const ComplexMatrix g = inverse_full_rank(p_a.adjoint() * p_a, "ls_oamp");
        const double err = users.empty() ? 0.0 : nv * g.diagonal().real().mean();
        out.x = oamp_dd(y_d, out.h, nv, err, c, cfg.oamp_iterations).hard;
    } else if (name == "lmmse_oamp" || name == "iter_lmmse_oamp") {
        const std::size_t rounds = name == "lmmse_oamp" ? 0 : cfg.lmmse_rounds;
        const IterLmmseOampResult r =
            iter_lmmse_oamp(y, p_a, nv, c, rounds, cfg.oamp_iterations, 2.0 * j.prior_variance);
        out.h = r.h;
        out.x = r.x_hard;
    } else if (name == "ls_perfect_data") {
        out.x = known_data(sc, users);
        out.h = ls_ce(y, stack_frames(p_a, out.x));
    } else if (name == "lmmse_perfect_data") {
        out.x = known_data(sc, users);
        out.h = iter_lmmse_oamp(y, p_a, nv, c, 0, cfg.oamp_iterations, 2.0 * j.prior_variance, &out.x).h;
    } else if (name == "perfect_csi_sde") {
        out.h = known_channels(sc, users);
        const DataPcResult r = detect_data_pc(y_d, out.h, nv, j.lambda_x, c, j.tau, j.data_pc, rng);
        out.x = r.hard;
        out.data_evals = r.stats.score_evals;
    } else if (name == "perfect_csi_oamp") {
        out.h = known_channels(sc, users);
        out.x = oamp_dd(y_d, out.h, nv, 0.0, c, cfg.oamp_iterations).hard;
    } else {
        throw ConfigError("unknown algorithm '" + name + "'");
    }
    return out;
}

}  // namespace

TrialMetrics evaluate_trial(const std::string& algorithm, const ExperimentConfig& cfg,
                            const Scenario& sc, ChannelPriorScorer& prior, RngStream& rng)
{
    const auto t0 = std::chrono::steady_clock::now();
    const Constellation c(cfg.system.qam_order);
    const AudResult aud = detect_activity(cfg, sc);
    const std::vector<std::size_t> users = support(aud.alpha);

    TrialMetrics m;
    m.aep = activity_error_probability(sc.activity.alpha, aud.alpha);
    const DetectionRates rates = detection_rates(sc.activity.alpha, aud.alpha);
    m.pfa = rates.pfa;
    m.pmd = rates.pmd;

    AlgorithmOutput out;
    if (users.empty()) {
        out.h = ComplexMatrix(0, static_cast<Eigen::Index>(cfg.system.antennas()));
        out.x = ComplexMatrix(static_cast<Eigen::Index>(cfg.system.data_length), 0);
    } else {
        out = run_algorithm(algorithm, cfg, sc, users, prior, rng);
    }
    const AlignedEstimate a = align_to_truth(sc.tx.active, users, out.h, out.x, c);
    m.nmse = nmse(sc.active_channels(), a.h);
    m.ber = bit_error_rate(sc.tx.frames.data, a.x, c);
    m.channel_score_evals = out.channel_evals;
    m.data_score_evals = out.data_evals;
    m.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    return m;
}

Scenario trial_scenario(const ExperimentConfig& cfg, std::size_t trial, const ChannelDataset* dataset)
{
    RngStream rng = RngStream(cfg.system.seed, "sweep").fork("scenario", trial);
    if (!dataset) return generate_scenario(cfg.system, rng);
    RngStream pick = rng.fork("dataset");
    return generate_scenario(cfg.system, channels_from_dataset(*dataset, cfg.system.num_users, pick), rng);
}

std::vector<SweepRow> run_sweep(const ExperimentConfig& cfg, std::ostream& csv)
{
    cfg.validate();
    const RngStream root(cfg.system.seed, "sweep");
    const std::vector<double> values = cfg.sweep_values();
    const std::size_t workers = std::max<std::size_t>(1, std::min(cfg.workers, cfg.trials));

    std::optional<ChannelDataset> dataset;
    if (!cfg.channel_dataset.empty()) {
        dataset = load_channel_dataset(cfg.channel_dataset,
                                       std::make_pair(static_cast<std::uint32_t>(cfg.system.antennas_x),
                                                      static_cast<std::uint32_t>(cfg.system.antennas_y)));
    }

    csv << csv_header() << std::flush;
    std::vector<SweepRow> rows;
    for (std::size_t p = 0; p < values.size(); ++p) {
        const ExperimentConfig point = cfg.at(values[p]);
        for (const std::string& alg : cfg.algorithms) {
            std::vector<TrialMetrics> trials(cfg.trials);
            std::vector<std::uint64_t> checksums(cfg.trials, 0);
            std::vector<std::optional<std::string>> errors(cfg.trials);
            std::atomic<std::size_t> next{0};

            const auto work = [&]() {
                std::optional<PriorSession> session;
                for (std::size_t t = next++; t < cfg.trials; t = next++) {
                    try {
                        if (!session) session = open_prior(point);
                        const Scenario sc = trial_scenario(point, t, dataset ? &*dataset : nullptr);
                        checksums[t] = scenario_checksum(sc);
                        RngStream rng = root.fork("algorithm:" + alg, p).fork("trial", t);
                        trials[t] = evaluate_trial(alg, point, sc, *session->prior, rng);
                    } catch (const std::exception& e) {
                        errors[t] = e.what();
                    }
                }
            };
            if (workers == 1) {
                work();
            } else {
                std::vector<std::thread> pool;
                for (std::size_t w = 0; w < workers; ++w) pool.emplace_back(work);
                for (auto& th : pool) th.join();
            }

            SweepRow row;
            row.algorithm = alg;
            row.axis = to_string(cfg.axis);
            row.value = values[p];
            std::uint64_t h = 1469598103934665603ull;
            for (std::uint64_t c : checksums) {
                for (int b = 0; b < 8; ++b) {
                    h ^= (c >> (8 * b)) & 0xffu;
                    h *= 1099511628211ull;
                }
            }
            row.scenario_checksum = h;
            const auto failed = std::find_if(errors.begin(), errors.end(), [](const auto& e) { return e.has_value(); });
            if (failed != errors.end()) {
                row.ok = false;
                row.error = "trial " + std::to_string(failed - errors.begin()) + ": " + **failed;
                row.metrics.trials = cfg.trials;
            } else {
                row.metrics = reduce_metrics(trials);
            }
            csv << format_csv_row(row, cfg.timing) << std::flush;
            rows.push_back(std::move(row));
        }
    }
    return rows;
}

}  // namespace mra
