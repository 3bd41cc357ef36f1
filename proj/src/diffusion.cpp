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

#include "mra/diffusion.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace mra {

NoiseSchedule::NoiseSchedule(double sigma_min, double sigma_max, std::size_t steps)
    : sigma_min_(sigma_min), sigma_max_(sigma_max), steps_(steps)
{
    if (!(sigma_min > 0.0) || !(sigma_max > sigma_min)) {
        throw ConfigError("noise schedule requires 0 < sigma_min < sigma_max");
    }
    if (steps == 0) throw ConfigError("noise schedule requires at least one step");
}

double NoiseSchedule::sigma(std::size_t i) const
{
    if (i > steps_) {
        throw std::out_of_range("noise level " + std::to_string(i) + " outside [0, " +
                                std::to_string(steps_) + "]");
    }
    if (i == steps_) return sigma_max_;
    const double t = static_cast<double>(i) / static_cast<double>(steps_);
    return sigma_min_ * std::pow(sigma_max_ / sigma_min_, t);
}

SamplerStats& SamplerStats::operator+=(const SamplerStats& o)
{
    score_evals += o.score_evals;
    predictor_steps += o.predictor_steps;
    corrector_steps += o.corrector_steps;
    skipped_corrector_steps += o.skipped_corrector_steps;
    return *this;
}

RealMatrix predictor_step(const RealMatrix& x, const RealMatrix& score, double sigma_i,
                          double sigma_prev, const RealMatrix& noise)
{
    if (!(sigma_i > sigma_prev) || sigma_prev < 0.0) {
        throw std::invalid_argument("predictor_step: requires sigma_i > sigma_prev >= 0");
    }
    const double dvar = sigma_i * sigma_i - sigma_prev * sigma_prev;
    return x + dvar * score + std::sqrt(dvar) * noise;
}

RealMatrix predictor_step(const RealMatrix& x, const RealMatrix& score, double sigma_i,
                          double sigma_prev, RngStream& rng)
{
    return predictor_step(x, score, sigma_i, sigma_prev,
                          gaussian_sample(x.rows(), x.cols(), 1.0, rng));
}

CorrectorResult corrector_step(const RealMatrix& x, const RealMatrix& score, double sigma_i,
                               double snr_ratio, const RealMatrix& noise)
{
    const double score_norm = score.norm();
    if (score_norm == 0.0) return {x, 0.0, true};
    const double ratio = snr_ratio * noise.norm() / score_norm;
    const double eps = 2.0 * sigma_i * ratio * ratio;
    return {x + eps * score + std::sqrt(2.0 * eps) * noise, eps, false};
}

PcSampler::PcSampler(const NoiseSchedule& schedule, const PcConfig& cfg, ScoreFn score,
                     RngStream& rng)
    : schedule_(schedule), cfg_(cfg), score_(std::move(score)), rng_(rng)
{
}

void PcSampler::check_divergence(const RealMatrix& x, std::size_t level) const
{
    if (divergence_factor_ <= 0.0) return;
    const double norm = x.norm();
    const double bound = divergence_factor_ * std::sqrt(static_cast<double>(x.size()));
    if (!(norm <= bound)) {
        throw DivergenceError("sampler diverged at level " + std::to_string(level) +
                                  ": state norm " + std::to_string(norm) + " exceeds " +
                                  std::to_string(bound),
                              level, norm);
    }
}

void PcSampler::step(RealMatrix& x, std::size_t i)
{
    if (i == 0 || i > schedule_.steps()) {
        throw std::out_of_range("PcSampler::step: level " + std::to_string(i) + " outside [1, " +
                                std::to_string(schedule_.steps()) + "]");
    }
    const double s_i = schedule_.sigma(i);
    const double s_prev = schedule_.sigma(i - 1);

    RealMatrix g = score_(x, s_i, i);
    ++stats_.score_evals;
    const RealMatrix z = gaussian_sample(x.rows(), x.cols(), 1.0, rng_);
    const double dvar = s_i * s_i - s_prev * s_prev;
    if (record_mean_) last_mean_ = x + dvar * g;
    x = predictor_step(x, g, s_i, s_prev, z);
    ++stats_.predictor_steps;
    check_divergence(x, i);

    for (std::size_t j = 0; j < cfg_.corrector_steps; ++j) {
        const RealMatrix zc = gaussian_sample(x.rows(), x.cols(), 1.0, rng_);
        g = score_(x, s_prev, i - 1);
        ++stats_.score_evals;
        CorrectorResult r = corrector_step(x, g, s_prev, cfg_.snr_ratio, zc);
        ++stats_.corrector_steps;
        if (r.skipped) {
            ++stats_.skipped_corrector_steps;
            continue;
        }
        x = std::move(r.x);
        check_divergence(x, i - 1);
    }
}

RealMatrix pc_sample(RealMatrix x_init, std::size_t i_start, const NoiseSchedule& schedule,
                     const PcConfig& cfg, const ScoreFn& score, RngStream& rng,
                     SamplerStats* stats)
{
    if (i_start == 0 || i_start > schedule.steps()) {
        throw std::out_of_range("pc_sample: i_start " + std::to_string(i_start) +
                                " outside [1, " + std::to_string(schedule.steps()) + "]");
    }
    PcSampler sampler(schedule, cfg, score, rng);
    for (std::size_t i = i_start; i >= 1; --i) sampler.step(x_init, i);
    if (stats) *stats += sampler.stats();
    return x_init;
}

}  // namespace mra
