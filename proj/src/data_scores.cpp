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

#include "mra/data_scores.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace mra {

ConstellationPrior::ConstellationPrior(const Constellation& c) : alphabet_(c.levels()) {}

ConstellationPrior::ConstellationPrior(std::vector<double> alphabet) : alphabet_(std::move(alphabet))
{
    if (alphabet_.empty()) throw ConfigError("ConstellationPrior: empty alphabet");
    std::sort(alphabet_.begin(), alphabet_.end());
}

double ConstellationPrior::posterior_mean(double x, double tau) const
{
    if (tau < kTweedieNearestTau) {
        double best = alphabet_.front();
        for (double c : alphabet_) {
            if (std::abs(x - c) < std::abs(x - best)) best = c;
        }
        return best;
    }
    const double inv = 1.0 / (2.0 * tau * tau);
    double max_e = -std::numeric_limits<double>::infinity();
    for (double c : alphabet_) max_e = std::max(max_e, -(x - c) * (x - c) * inv);
    double num = 0.0;
    double den = 0.0;
    for (double c : alphabet_) {
        const double w = std::exp(-(x - c) * (x - c) * inv - max_e);
        num += c * w;
        den += w;
    }
    return num / den;
}

std::pair<double, double> ConstellationPrior::posterior_moments(double x, double tau) const
{
    if (tau < kTweedieNearestTau) return {posterior_mean(x, tau), 0.0};
    const double inv = 1.0 / (2.0 * tau * tau);
    double max_e = -std::numeric_limits<double>::infinity();
    for (double c : alphabet_) max_e = std::max(max_e, -(x - c) * (x - c) * inv);
    double s0 = 0.0, s1 = 0.0, s2 = 0.0;
    for (double c : alphabet_) {
        const double w = std::exp(-(x - c) * (x - c) * inv - max_e);
        s0 += w;
        s1 += c * w;
        s2 += c * c * w;
    }
    const double mean = s1 / s0;
    return {mean, std::max(0.0, s2 / s0 - mean * mean)};
}

RealMatrix tweedie_prior_score(const RealMatrix& x, double tau, const ConstellationPrior& prior)
{
    if (!(tau > 0.0)) throw std::invalid_argument("tweedie_prior_score: tau must be > 0");
    RealMatrix out(x.rows(), x.cols());
    const double inv_var = 1.0 / (tau * tau);
    for (Eigen::Index r = 0; r < x.rows(); ++r) {
        for (Eigen::Index c = 0; c < x.cols(); ++c) {
            const double v = x(r, c);
            out(r, c) = (prior.posterior_mean(v, tau) - v) * inv_var;
        }
    }
    return out;
}

ScoreContext make_data_context(const ComplexMatrix& h_a, const ComplexMatrix& y_d,
                               double noise_var, double weight)
{
    if (h_a.cols() != y_d.cols()) {
        throw DimensionError("make_data_context: H_a " + shape_string(h_a.rows(), h_a.cols()) +
                             " vs Y_d " + shape_string(y_d.rows(), y_d.cols()));
    }
    const ComplexMatrix ht = h_a.transpose();
    const ComplexMatrix yt = y_d.transpose();
    return ScoreContext(real_embed(ht), stack_real(yt), noise_var / 2.0, weight);
}

RealMatrix data_likelihood_score(const ScoreContext& ctx, const RealMatrix& x, double tau_i)
{
    return ctx.likelihood(x, tau_i);
}

RealMatrix data_posterior_score(const ScoreContext& ctx, const ConstellationPrior& prior,
                                const RealMatrix& x, double tau_i)
{
    RealMatrix p = tweedie_prior_score(x, tau_i, prior);
    if (ctx.weight() == 0.0) return p;
    return ctx.weight() * ctx.likelihood(x, tau_i) + p;
}

RealMatrix data_to_state(const ComplexMatrix& x)
{
    const ComplexMatrix xt = x.transpose();
    return stack_real(xt);
}

ComplexMatrix state_to_data(const RealMatrix& state)
{
    return unstack_real(state).transpose();
}

DataPcResult detect_data_pc(const ScoreContext& ctx, const Constellation& constellation,
                            const NoiseSchedule& tau_schedule, const PcConfig& pc,
                            RngStream& rng, double divergence_factor)
{
    const Eigen::Index rows = ctx.state_rows();
    const Eigen::Index obs_rows = ctx.svd().u.rows();
    if (rows > obs_rows) {
        throw DimensionError("detect_data_pc: K_a = " + std::to_string(rows / 2) +
                             " exceeds 2M = " + std::to_string(obs_rows));
    }
    const ConstellationPrior prior(constellation);
    RealMatrix x = gaussian_sample(rows, ctx.state_cols(), tau_schedule.variance(tau_schedule.steps()), rng);
    ScoreFn fn = [&](const RealMatrix& s, double tau, std::size_t) {
        return data_posterior_score(ctx, prior, s, tau);
    };
    PcSampler sampler(tau_schedule, pc, fn, rng);
    sampler.set_divergence_factor(divergence_factor);
    for (std::size_t j = tau_schedule.steps(); j >= 1; --j) sampler.step(x, j);

    DataPcResult out;
    out.soft = state_to_data(x);
    out.hard = constellation.project(out.soft);
    out.stats = sampler.stats();
    return out;
}

DataPcResult detect_data_pc(const ComplexMatrix& y_d, const ComplexMatrix& h_a, double noise_var,
                            double weight, const Constellation& constellation,
                            const NoiseSchedule& tau_schedule, const PcConfig& pc, RngStream& rng)
{
    const ScoreContext ctx = make_data_context(h_a, y_d, noise_var, weight);
    return detect_data_pc(ctx, constellation, tau_schedule, pc, rng);
}

}  // namespace mra
