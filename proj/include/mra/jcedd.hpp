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

// Joint channel estimation and data detection with asynchronous PC sampling.
//
// The channel sampler starts at level i* from the pilot-only LMMSE estimate,
// with data rows of S_a initialized by zero forcing. Every N_update channel
// levels the data block is re-detected by a fresh N_X-level PC run against the
// current channel state, and S_a is refactorized.

#pragma once

#include <cstddef>
#include <optional>
#include <vector>

#include "mra/channel_scores.hpp"
#include "mra/constellation.hpp"
#include "mra/data_scores.hpp"
#include "mra/diffusion.hpp"

namespace mra {

enum class StartRule {
    MeanVariance,  // argmin |sigma_i^2 - mean diag(R_delta) / 2|
    LiteralSum,    // argmin |sigma_i - sum of all K_a M diagonal entries|
};

struct JceddConfig {
    NoiseSchedule sigma{0.01, 30.0, 1500};
    NoiseSchedule tau{0.01, 1.0, 1500};
    PcConfig channel_pc{3, 0.3};
    PcConfig data_pc{3, 0.3};
    double lambda_h = 2.5;
    double lambda_x = 2.5;
    std::size_t n_update = 50;
    double prior_variance = 0.5;      // per real component; LMMSE uses R_h = 2 v I
    StartRule start_rule = StartRule::MeanVariance;
    bool hard_data = true;            // project refreshed data before it enters S_a
    bool raw_zf = false;              // skip projection of the ZF initialization
    bool cold_start = false;          // i* = N from N(0, sigma_max^2 I)
    double divergence_factor = 1e3;

    /// Throws ConfigError on invalid values.
    void validate() const;
};

struct LmmseResult {
    ComplexMatrix h;        // K_a x M
    ComplexMatrix r_delta;  // K_a x K_a error covariance shared by every antenna
};

/// Per-antenna LMMSE of H from Y_p = P_a H + W. r_h defaults to the identity.
/// noise_var = 0 requires P_a^H P_a invertible (RankError otherwise).
LmmseResult lmmse_init(const ComplexMatrix& y_p, const ComplexMatrix& p_a, double noise_var,
                       const std::optional<ComplexMatrix>& r_h = std::nullopt);

/// Variance-matched start level: argmin_i |sigma_i^2 - v|.
std::size_t start_index_for_variance(double v, const NoiseSchedule& schedule);

/// Start level from the LMMSE error covariance of a K_a x M channel.
std::size_t start_index(const ComplexMatrix& r_delta, std::size_t antennas,
                        const NoiseSchedule& schedule, StartRule rule = StartRule::MeanVariance);

/// X = Y_d H^H (H H^H)^{-1}; RankError when H H^H is singular. Projected onto
/// the constellation unless constellation is null.
ComplexMatrix zf_init(const ComplexMatrix& y_d, const ComplexMatrix& h,
                      const Constellation* constellation);

/// S_a = [P_a; X]. Throws DimensionError when the user counts differ.
ComplexMatrix stack_frames(const ComplexMatrix& p_a, const ComplexMatrix& x);

struct JceddCounters {
    std::size_t channel_score_evals = 0;
    std::size_t data_score_evals = 0;
    std::size_t data_updates = 0;
    std::size_t channel_svds = 0;
    std::size_t data_svds = 0;
    std::size_t skipped_corrector_steps = 0;
};

struct TracePoint {
    std::size_t level = 0;
    double nmse = 0.0;
    double ber = 0.0;
};

struct JceddTruth {
    ComplexMatrix h;  // K_a x M
    ComplexMatrix x;  // L_d x K_a
};

struct EstimationResult {
    ComplexMatrix h;        // K_a x M
    ComplexMatrix x_soft;   // L_d x K_a
    ComplexMatrix x_hard;
    ComplexMatrix h_init;   // LMMSE warm start
    std::size_t start_index = 0;
    JceddCounters counters;
    std::vector<TracePoint> trace;  // filled when truth is supplied
    double wall_seconds = 0.0;
};

/// y: L x M with the first p_a.rows() rows carrying pilots.
EstimationResult run_jcedd(const ComplexMatrix& y, const ComplexMatrix& p_a, double noise_var,
                           const Constellation& constellation, const JceddConfig& cfg,
                           ChannelPriorScorer& prior, RngStream& rng,
                           const JceddTruth* truth = nullptr);

}  // namespace mra
