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

// Detection and estimation metrics.
//
//   AEP  = (1/K) sum_k |alpha_k - alpha_hat_k|
//   NMSE = ||H_a - H_a_hat||_F^2 / ||H_a||_F^2   over the true active users
//   BER  = bit errors / (K_a L_d log2 |X|)
//   Pfa  = P(alpha_hat = 1 | alpha = 0),  Pmd = P(alpha_hat = 0 | alpha = 1)
//
// Trial records are averaged per sweep point (NMSE is the mean of per-trial
// ratios). Active users missed by detection contribute a zero channel
// estimate and symbol index 0 to NMSE and BER.

#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

#include "mra/constellation.hpp"
#include "mra/numerics.hpp"

namespace mra {

double activity_error_probability(const std::vector<std::uint8_t>& truth,
                                  const std::vector<std::uint8_t>& estimate);

struct DetectionRates {
    double pfa = 0.0;
    double pmd = 0.0;
};

/// NaN-free: a rate with an empty conditioning set is 0.
DetectionRates detection_rates(const std::vector<std::uint8_t>& truth,
                               const std::vector<std::uint8_t>& estimate);

double nmse(const ComplexMatrix& truth, const ComplexMatrix& estimate);

double bit_error_rate(const ComplexMatrix& truth, const ComplexMatrix& detected,
                      const Constellation& constellation);

/// Rows / columns of an estimate made for `estimated_users` re-indexed onto
/// `true_users` (both ascending). Missing users get zero channels and symbol 0.
struct AlignedEstimate {
    ComplexMatrix h;  // |true_users| x M
    ComplexMatrix x;  // L_d x |true_users|
};

AlignedEstimate align_to_truth(const std::vector<std::size_t>& true_users,
                               const std::vector<std::size_t>& estimated_users,
                               const ComplexMatrix& h_est, const ComplexMatrix& x_est,
                               const Constellation& constellation);

struct TrialMetrics {
    double aep = 0.0;
    double nmse = 0.0;
    double ber = 0.0;
    double pfa = 0.0;
    double pmd = 0.0;
    std::size_t channel_score_evals = 0;
    std::size_t data_score_evals = 0;
    double wall_seconds = 0.0;
};

struct MetricsRecord {
    double aep = 0.0;
    double nmse = 0.0;
    double nmse_db = 0.0;
    double ber = 0.0;
    double pfa = 0.0;
    double pmd = 0.0;
    std::size_t trials = 0;
    double wall_seconds = 0.0;
    double channel_score_evals = 0.0;  // mean per trial
    double data_score_evals = 0.0;
};

/// Averages trials in the order given.
MetricsRecord reduce_metrics(const std::vector<TrialMetrics>& trials);

struct RocPoint {
    double threshold = 0.0;
    double pfa = 0.0;
    double pmd = 0.0;
};

/// Pfa / Pmd pooled over trials for each threshold on soft activity scores.
std::vector<RocPoint> roc_curve(const std::vector<std::vector<std::uint8_t>>& truth,
                                const std::vector<RealVector>& scores,
                                const std::vector<double>& thresholds);

}  // namespace mra
