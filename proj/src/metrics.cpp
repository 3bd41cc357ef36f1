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

#include "mra/metrics.hpp"

#include <algorithm>
#include <cmath>

#include "mra/aud.hpp"

namespace mra {

namespace {

void require_same_size(std::size_t a, std::size_t b, const char* who)
{
    if (a != b) {
        throw DimensionError(std::string(who) + ": sizes " + std::to_string(a) + " and " +
                             std::to_string(b) + " differ");
    }
}

}  // namespace

double activity_error_probability(const std::vector<std::uint8_t>& truth,
                                  const std::vector<std::uint8_t>& estimate)
{
    require_same_size(truth.size(), estimate.size(), "activity_error_probability");
    if (truth.empty()) return 0.0;
    std::size_t errors = 0;
    for (std::size_t k = 0; k < truth.size(); ++k) errors += (truth[k] != 0) != (estimate[k] != 0);
    return static_cast<double>(errors) / static_cast<double>(truth.size());
}

DetectionRates detection_rates(const std::vector<std::uint8_t>& truth,
                               const std::vector<std::uint8_t>& estimate)
{
    require_same_size(truth.size(), estimate.size(), "detection_rates");
    std::size_t inactive = 0, active = 0, fa = 0, md = 0;
    for (std::size_t k = 0; k < truth.size(); ++k) {
        if (truth[k]) {
            ++active;
            md += estimate[k] == 0;
        } else {
            ++inactive;
            fa += estimate[k] != 0;
        }
    }
    DetectionRates r;
    r.pfa = inactive ? static_cast<double>(fa) / static_cast<double>(inactive) : 0.0;
    r.pmd = active ? static_cast<double>(md) / static_cast<double>(active) : 0.0;
    return r;
}

double nmse(const ComplexMatrix& truth, const ComplexMatrix& estimate)
{
    if (truth.rows() != estimate.rows() || truth.cols() != estimate.cols()) {
        throw DimensionError("nmse: truth " + shape_string(truth.rows(), truth.cols()) +
                             " vs estimate " + shape_string(estimate.rows(), estimate.cols()));
    }
    const double den = truth.squaredNorm();
    if (den == 0.0) return 0.0;
    return (truth - estimate).squaredNorm() / den;
}

double bit_error_rate(const ComplexMatrix& truth, const ComplexMatrix& detected,
                      const Constellation& constellation)
{
    const double bits = static_cast<double>(truth.size()) * constellation.bits_per_symbol();
    if (bits == 0.0) {
        if (detected.size() != 0) throw DimensionError("bit_error_rate: shape mismatch");
        return 0.0;
    }
    return static_cast<double>(constellation.bit_errors(truth, detected)) / bits;
}

AlignedEstimate align_to_truth(const std::vector<std::size_t>& true_users,
                               const std::vector<std::size_t>& estimated_users,
                               const ComplexMatrix& h_est, const ComplexMatrix& x_est,
                               const Constellation& constellation)
{
    if (static_cast<std::size_t>(h_est.rows()) != estimated_users.size() ||
        static_cast<std::size_t>(x_est.cols()) != estimated_users.size()) {
        throw DimensionError("align_to_truth: estimates do not match the estimated user set");
    }
    AlignedEstimate out;
    const auto ka = static_cast<Eigen::Index>(true_users.size());
    out.h = ComplexMatrix::Zero(ka, h_est.cols());
    out.x = ComplexMatrix::Constant(x_est.rows(), ka, constellation.symbol(0));
    for (Eigen::Index j = 0; j < ka; ++j) {
        const auto it = std::lower_bound(estimated_users.begin(), estimated_users.end(), true_users[j]);
        if (it == estimated_users.end() || *it != true_users[j]) continue;
        const auto src = static_cast<Eigen::Index>(it - estimated_users.begin());
        out.h.row(j) = h_est.row(src);
        out.x.col(j) = x_est.col(src);
    }
    return out;
}

MetricsRecord reduce_metrics(const std::vector<TrialMetrics>& trials)
{
    MetricsRecord r;
    r.trials = trials.size();
    if (trials.empty()) return r;
    for (const auto& t : trials) {
        r.aep += t.aep;
        r.nmse += t.nmse;
        r.ber += t.ber;
        r.pfa += t.pfa;
        r.pmd += t.pmd;
        r.wall_seconds += t.wall_seconds;
        r.channel_score_evals += static_cast<double>(t.channel_score_evals);
        r.data_score_evals += static_cast<double>(t.data_score_evals);
    }
    const double n = static_cast<double>(trials.size());
    r.aep /= n;
    r.nmse /= n;
    r.ber /= n;
    r.pfa /= n;
    r.pmd /= n;
    r.channel_score_evals /= n;
    r.data_score_evals /= n;
    r.nmse_db = to_db(r.nmse);
    return r;
}

std::vector<RocPoint> roc_curve(const std::vector<std::vector<std::uint8_t>>& truth,
                                const std::vector<RealVector>& scores,
                                const std::vector<double>& thresholds)
{
    require_same_size(truth.size(), scores.size(), "roc_curve");
    std::vector<RocPoint> out;
    for (double thr : thresholds) {
        std::size_t inactive = 0, active = 0, fa = 0, md = 0;
        for (std::size_t t = 0; t < truth.size(); ++t) {
            const auto est = threshold_scores(scores[t], thr);
            require_same_size(truth[t].size(), est.size(), "roc_curve");
            for (std::size_t k = 0; k < est.size(); ++k) {
                if (truth[t][k]) {
                    ++active;
                    md += est[k] == 0;
                } else {
                    ++inactive;
                    fa += est[k] != 0;
                }
            }
        }
        RocPoint p;
        p.threshold = thr;
        p.pfa = inactive ? static_cast<double>(fa) / static_cast<double>(inactive) : 0.0;
        p.pmd = active ? static_cast<double>(md) / static_cast<double>(active) : 0.0;
        out.push_back(p);
    }
    return out;
}

}  // namespace mra
