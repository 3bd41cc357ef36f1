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

// Data detection in the transposed real model
//
//   stack_real(Y_d^T) = real_embed(H_a^T) stack_real(X_a^T) + W
//
// with state X = stack_real(X_a^T) of shape 2 K_a x L_d. Square QAM factorizes
// over real dimensions, so the constellation prior is a per-entry mixture of
// Gaussians centred on the per-dimension alphabet.

#pragma once

#include <cstddef>
#include <utility>
#include <vector>

#include "mra/channel_scores.hpp"
#include "mra/constellation.hpp"
#include "mra/diffusion.hpp"

namespace mra {

/// Uniform prior over a symmetric per-dimension alphabet.
class ConstellationPrior {
public:
    explicit ConstellationPrior(const Constellation& c);
    explicit ConstellationPrior(std::vector<double> alphabet);

    const std::vector<double>& alphabet() const noexcept { return alphabet_; }

    /// E{x0 | x0 + tau z = x}; nearest alphabet point below tau = 1e-3.
    double posterior_mean(double x, double tau) const;
    /// Posterior mean and variance of x0 given x = x0 + tau z.
    std::pair<double, double> posterior_moments(double x, double tau) const;

private:
    std::vector<double> alphabet_;
};

inline constexpr double kTweedieNearestTau = 1e-3;

/// (E{X0 | X} - X) / tau^2 entrywise.
RealMatrix tweedie_prior_score(const RealMatrix& x, double tau, const ConstellationPrior& prior);

/// Context of Y_d = X_a H_a + W. h_a: K_a x M, y_d: L_d x M, noise_var the complex sigma_n^2.
ScoreContext make_data_context(const ComplexMatrix& h_a, const ComplexMatrix& y_d,
                               double noise_var, double weight);

RealMatrix data_likelihood_score(const ScoreContext& ctx, const RealMatrix& x, double tau_i);

/// weight * likelihood + Tweedie prior.
RealMatrix data_posterior_score(const ScoreContext& ctx, const ConstellationPrior& prior,
                                const RealMatrix& x, double tau_i);

/// stack_real(X^T) <-> X for an L_d x K_a data block.
RealMatrix data_to_state(const ComplexMatrix& x);
ComplexMatrix state_to_data(const RealMatrix& state);

struct DataPcResult {
    ComplexMatrix soft;   // L_d x K_a, final sampler state
    ComplexMatrix hard;   // nearest-constellation projection of soft
    SamplerStats stats;
};

/// Full PC run over tau levels N_X .. 1 from N(0, tau_max^2 I).
/// Requires K_a <= 2M (DimensionError otherwise).
DataPcResult detect_data_pc(const ScoreContext& ctx, const Constellation& constellation,
                            const NoiseSchedule& tau_schedule, const PcConfig& pc,
                            RngStream& rng, double divergence_factor = 1e3);

DataPcResult detect_data_pc(const ComplexMatrix& y_d, const ComplexMatrix& h_a, double noise_var,
                            double weight, const Constellation& constellation,
                            const NoiseSchedule& tau_schedule, const PcConfig& pc,
                            RngStream& rng);

}  // namespace mra
