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

// Predictor-corrector sampling for variance-exploding (SMLD) diffusions.
//
// Level i of an N-step schedule has noise sigma_i = sigma_min (sigma_max /
// sigma_min)^(i/N). One PC iteration at level i >= 1 is
//
//   predictor:  x <- x + (s_i^2 - s_{i-1}^2) g(x, s_i) + sqrt(s_i^2 - s_{i-1}^2) z
//   corrector (Q times, annealed Langevin at level i-1):
//               z ~ N(0, I)
//               eps = 2 s_{i-1} (r ||z|| / ||g(x, s_{i-1})||)^2
//               x <- x + eps g + sqrt(2 eps) z
//
// where g is the posterior score supplied by the caller and norms are
// Frobenius norms over the whole state.

#pragma once

#include <cstddef>
#include <functional>
#include <optional>

#include "mra/numerics.hpp"

namespace mra {

class NoiseSchedule {
public:
    /// Requires 0 < sigma_min < sigma_max and steps >= 1 (ConfigError otherwise).
    NoiseSchedule(double sigma_min, double sigma_max, std::size_t steps);

    double sigma_min() const noexcept { return sigma_min_; }
    double sigma_max() const noexcept { return sigma_max_; }
    std::size_t steps() const noexcept { return steps_; }

    /// sigma_i for 0 <= i <= N; std::out_of_range otherwise.
    double sigma(std::size_t i) const;
    double variance(std::size_t i) const { const double s = sigma(i); return s * s; }

private:
    double sigma_min_;
    double sigma_max_;
    std::size_t steps_;
};

struct PcConfig {
    std::size_t corrector_steps = 1;  // Q
    double snr_ratio = 0.3;           // r
};

struct SamplerStats {
    std::size_t score_evals = 0;
    std::size_t predictor_steps = 0;
    std::size_t corrector_steps = 0;
    std::size_t skipped_corrector_steps = 0;  // ||score|| == 0

    SamplerStats& operator+=(const SamplerStats& o);
};

/// Score of the target at noise level sigma (level index passed for learned scorers).
using ScoreFn = std::function<RealMatrix(const RealMatrix& x, double sigma, std::size_t level)>;

/// Reverse-diffusion step with caller-supplied noise. Requires
/// sigma_i > sigma_prev >= 0 (std::invalid_argument otherwise).
RealMatrix predictor_step(const RealMatrix& x, const RealMatrix& score, double sigma_i,
                          double sigma_prev, const RealMatrix& noise);
RealMatrix predictor_step(const RealMatrix& x, const RealMatrix& score, double sigma_i,
                          double sigma_prev, RngStream& rng);

struct CorrectorResult {
    RealMatrix x;
    double step_size = 0.0;
    bool skipped = false;
};

/// Annealed Langevin step; the same noise draw sets the step size and the
/// injected noise. A zero score skips the step.
CorrectorResult corrector_step(const RealMatrix& x, const RealMatrix& score, double sigma_i,
                               double snr_ratio, const RealMatrix& noise);

/// Drives PC iterations one level at a time so callers can interleave work
/// (e.g. data refreshes) between levels.
class PcSampler {
public:
    PcSampler(const NoiseSchedule& schedule, const PcConfig& cfg, ScoreFn score, RngStream& rng);

    /// One predictor step from level i to i-1 followed by Q corrector steps at
    /// level i-1. Requires 1 <= i <= N.
    void step(RealMatrix& x, std::size_t i);

    /// Abort with DivergenceError once ||x|| > factor * sqrt(x.size()); 0 disables.
    void set_divergence_factor(double factor) { divergence_factor_ = factor; }

    /// Deterministic part of the most recent predictor step (x + d_sigma^2 g).
    const std::optional<RealMatrix>& last_predictor_mean() const noexcept { return last_mean_; }
    void record_predictor_mean(bool on) { record_mean_ = on; }

    const SamplerStats& stats() const noexcept { return stats_; }

private:
    void check_divergence(const RealMatrix& x, std::size_t level) const;

    const NoiseSchedule& schedule_;
    PcConfig cfg_;
    ScoreFn score_;
    RngStream& rng_;
    SamplerStats stats_;
    double divergence_factor_ = 1e3;
    bool record_mean_ = false;
    std::optional<RealMatrix> last_mean_;
};

/// Runs levels i_start, i_start-1, ..., 1 from x_init. Requires 1 <= i_start <= N.
RealMatrix pc_sample(RealMatrix x_init, std::size_t i_start, const NoiseSchedule& schedule,
                     const PcConfig& cfg, const ScoreFn& score, RngStream& rng,
                     SamplerStats* stats = nullptr);

}  // namespace mra
