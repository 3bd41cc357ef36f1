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

// Monte-Carlo sweeps and CSV output.
//
// Trial t of every sweep point and every algorithm draws its scenario from the
// same stream fork("scenario", t) of the root seed, so rows at one point are
// paired; the scenario_checksum column folds the per-trial scenario checksums
// and must agree across algorithms. Algorithm randomness uses separate streams
// keyed by algorithm, point and trial. Trials are reduced in trial order, so
// the output does not depend on the worker count.
//
// CSV columns (fixed):
//   algorithm,axis,value,trials,aep,nmse,nmse_db,ber,pfa,pmd,
//   channel_score_evals,data_score_evals,wall_time,scenario_checksum,status
// wall_time is NA unless timing is enabled. A failed (algorithm, point) pair
// yields a row with NA metrics and status "error: <message>".

#pragma once

#include <cstdint>
#include <memory>
#include <ostream>
#include <string>
#include <vector>

#include "mra/aud.hpp"
#include "mra/channel_dataset.hpp"
#include "mra/channel_scores.hpp"
#include "mra/experiment.hpp"
#include "mra/metrics.hpp"
#include "mra/provider_client.hpp"
#include "mra/system_model.hpp"

namespace mra {

const std::vector<std::string>& csv_columns();
std::string csv_header();

struct SweepRow {
    std::string algorithm;
    std::string axis;
    double value = 0.0;
    MetricsRecord metrics;
    std::uint64_t scenario_checksum = 0;
    bool ok = true;
    std::string error;
};

/// One line with trailing newline.
std::string format_csv_row(const SweepRow& row, bool timing);

/// Prior used by one worker: the analytic Gaussian prior, or a provider session.
struct PriorSession {
    std::unique_ptr<ScoreProvider> provider;
    std::unique_ptr<ChannelPriorScorer> prior;
};

PriorSession open_prior(const ExperimentConfig& cfg);

AudResult detect_activity(const ExperimentConfig& cfg, const Scenario& scenario);

/// Runs AUD plus one algorithm on a scenario and scores the result.
TrialMetrics evaluate_trial(const std::string& algorithm, const ExperimentConfig& cfg,
                            const Scenario& scenario, ChannelPriorScorer& prior, RngStream& rng);

/// Scenario of trial t; identical at every sweep point with the same system
/// shape. Channels are drawn from the dataset when one is given.
Scenario trial_scenario(const ExperimentConfig& point_cfg, std::size_t trial,
                        const ChannelDataset* dataset = nullptr);

/// Runs every (point, algorithm) pair, writing and flushing one row each.
std::vector<SweepRow> run_sweep(const ExperimentConfig& cfg, std::ostream& csv);

}  // namespace mra
