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

#include "mra/channel_scores.hpp"

#include <stdexcept>

namespace mra {

ScoreContext::ScoreContext(const RealMatrix& op, const RealMatrix& obs, double noise_var,
                           double weight)
    : svd_(mra::svd(op)), noise_var_(noise_var), weight_(weight)
{
    if (obs.rows() != op.rows()) {
        throw DimensionError("ScoreContext: observation " + shape_string(obs.rows(), obs.cols()) +
                             " vs operator " + shape_string(op.rows(), op.cols()));
    }
    if (!(noise_var >= 0.0)) throw std::invalid_argument("ScoreContext: negative noise variance");
    if (!(weight >= 0.0)) throw std::invalid_argument("ScoreContext: negative weight");
    require_finite(obs, "ScoreContext observation");
    rotated_ = svd_.u.transpose() * obs;
}

RealMatrix ScoreContext::likelihood(const RealMatrix& x, double s) const
{
    if (x.rows() != state_rows() || x.cols() != state_cols()) {
        throw DimensionError("likelihood score: state " + shape_string(x.rows(), x.cols()) +
                             ", expected " + shape_string(state_rows(), state_cols()));
    }
    const RealVector& sig = svd_.sigma;
    RealVector gain(sig.size());
    for (Eigen::Index j = 0; j < sig.size(); ++j) {
        const double den = noise_var_ + s * s * sig(j) * sig(j);
        gain(j) = den > 0.0 ? sig(j) / den : 0.0;
    }
    const RealMatrix resid = rotated_ - sig.asDiagonal() * (svd_.v.transpose() * x);
    return svd_.v * (gain.asDiagonal() * resid);
}

ScoreContext make_channel_context(const ComplexMatrix& s_a, const ComplexMatrix& y,
                                  double noise_var, double weight)
{
    if (s_a.rows() != y.rows()) {
        throw DimensionError("make_channel_context: S_a " + shape_string(s_a.rows(), s_a.cols()) +
                             " vs Y " + shape_string(y.rows(), y.cols()));
    }
    return ScoreContext(real_embed(s_a), stack_real(y), noise_var / 2.0, weight);
}

RealMatrix channel_likelihood_score(const ScoreContext& ctx, const RealMatrix& h, double sigma_i)
{
    return ctx.likelihood(h, sigma_i);
}

RealMatrix gaussian_prior_score(const RealMatrix& h, double sigma_i, double v)
{
    if (!(v > 0.0)) throw std::invalid_argument("gaussian_prior_score: variance must be > 0");
    return -h / (v + sigma_i * sigma_i);
}

AnalyticGaussianPrior::AnalyticGaussianPrior(double variance) : variance_(variance)
{
    if (!(variance > 0.0)) throw ConfigError("AnalyticGaussianPrior: variance must be > 0");
}

RealMatrix AnalyticGaussianPrior::score(const RealMatrix& h, double sigma, double)
{
    return gaussian_prior_score(h, sigma, variance_);
}

RealMatrix channel_posterior_score(const ScoreContext& ctx, ChannelPriorScorer& prior,
                                   const RealMatrix& h, double sigma_i, double t)
{
    RealMatrix p = prior.score(h, sigma_i, t);
    if (p.rows() != h.rows() || p.cols() != h.cols()) {
        throw DimensionError("prior score shape " + shape_string(p.rows(), p.cols()) +
                             " differs from state " + shape_string(h.rows(), h.cols()));
    }
    if (ctx.weight() == 0.0) return p;
    return ctx.weight() * ctx.likelihood(h, sigma_i) + p;
}

ChannelPcResult estimate_channel_pc(const ComplexMatrix& y, const ComplexMatrix& s_a,
                                    double noise_var, double weight,
                                    const NoiseSchedule& schedule, const PcConfig& pc,
                                    ChannelPriorScorer& prior, std::size_t i_start,
                                    RngStream& rng, const ChannelPcOptions& opts)
{
    const ScoreContext ctx = make_channel_context(s_a, y, noise_var, weight);
    const auto rows = 2 * s_a.cols();
    const auto cols = y.cols();

    RealMatrix h;
    if (opts.init) {
        if (opts.init->rows() != rows || opts.init->cols() != cols) {
            throw DimensionError("estimate_channel_pc: init " +
                                 shape_string(opts.init->rows(), opts.init->cols()) +
                                 ", expected " + shape_string(rows, cols));
        }
        h = *opts.init;
    } else {
        h = gaussian_sample(rows, cols, schedule.variance(i_start), rng);
    }

    ChannelPcResult out;
    if (i_start > 0) {
        const double n = static_cast<double>(schedule.steps());
        ScoreFn fn = [&](const RealMatrix& x, double s, std::size_t level) {
            return channel_posterior_score(ctx, prior, x, s, static_cast<double>(level) / n);
        };
        PcSampler sampler(schedule, pc, fn, rng);
        sampler.set_divergence_factor(opts.divergence_factor);
        sampler.record_predictor_mean(opts.record_predictor_mean);
        for (std::size_t i = i_start; i >= 1; --i) sampler.step(h, i);
        out.stats = sampler.stats();
        out.predictor_mean = sampler.last_predictor_mean();
    }
    out.h = unstack_real(h);
    out.h_real = std::move(h);
    return out;
}

}  // namespace mra
