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

// Scores for linear Gaussian observation models and the channel posterior.
//
// For y = A x + w with w ~ N(0, n I) and x perturbed by N(0, s^2 I), the
// likelihood score is
//
//   A^T (n I + s^2 A A^T)^{-1} (y - A x)
//     = V diag(sigma_j / (n + s^2 sigma_j^2)) (U^T y - diag(sigma) V^T x)
//
// with the thin SVD A = U diag(sigma) V^T. The channel model uses
// A = real_embed(S_a), x = stack_real(H_a), y = stack_real(Y).

#pragma once

#include <cstddef>
#include <optional>

#include "mra/diffusion.hpp"
#include "mra/numerics.hpp"

namespace mra {

/// Cached SVD of the operator plus the rotated observation.
class ScoreContext {
public:
    /// op: rows x n, obs: rows x m; noise_var is per real component.
    ScoreContext(const RealMatrix& op, const RealMatrix& obs, double noise_var, double weight);

    const SvdFactors& svd() const noexcept { return svd_; }
    const RealMatrix& rotated_obs() const noexcept { return rotated_; }
    double noise_var() const noexcept { return noise_var_; }
    double weight() const noexcept { return weight_; }
    Eigen::Index state_rows() const noexcept { return svd_.v.rows(); }
    Eigen::Index state_cols() const noexcept { return rotated_.cols(); }

    /// Unweighted likelihood score at state x and perturbation level s.
    RealMatrix likelihood(const RealMatrix& x, double s) const;

private:
    SvdFactors svd_;
    RealMatrix rotated_;
    double noise_var_;
    double weight_;
};

/// Context of Y = S_a H_a + W. noise_var is the complex sigma_n^2.
ScoreContext make_channel_context(const ComplexMatrix& s_a, const ComplexMatrix& y,
                                  double noise_var, double weight);

/// Likelihood score of H_r = stack_real(H_a) at level sigma_i.
RealMatrix channel_likelihood_score(const ScoreContext& ctx, const RealMatrix& h, double sigma_i);

/// -H / (v + sigma_i^2). Requires v > 0.
RealMatrix gaussian_prior_score(const RealMatrix& h, double sigma_i, double v);

/// Prior over per-user channels. Input and output are 2 K_a x M real
/// (stack_real of the K_a x M complex channel); user k owns rows k and K_a + k.
class ChannelPriorScorer {
public:
    virtual ~ChannelPriorScorer() = default;
    /// t = i / N is the diffusion time of level sigma.
    virtual RealMatrix score(const RealMatrix& h, double sigma, double t) = 0;
};

class AnalyticGaussianPrior final : public ChannelPriorScorer {
public:
    explicit AnalyticGaussianPrior(double variance = 0.5);
    double variance() const noexcept { return variance_; }
    RealMatrix score(const RealMatrix& h, double sigma, double t) override;

private:
    double variance_;
};

/// Zero prior score, i.e. a flat prior.
class FlatPrior final : public ChannelPriorScorer {
public:
    RealMatrix score(const RealMatrix& h, double, double) override
    {
        return RealMatrix::Zero(h.rows(), h.cols());
    }
};

/// weight * likelihood + prior.
RealMatrix channel_posterior_score(const ScoreContext& ctx, ChannelPriorScorer& prior,
                                   const RealMatrix& h, double sigma_i, double t);

struct ChannelPcOptions {
    std::optional<RealMatrix> init;  // 2 K_a x M; default N(0, sigma_{i_start}^2 I)
    double divergence_factor = 1e3;
    bool record_predictor_mean = false;
};

struct ChannelPcResult {
    ComplexMatrix h;                          // K_a x M
    RealMatrix h_real;                        // 2 K_a x M
    std::optional<RealMatrix> predictor_mean; // pre-noise mean of the last predictor step
    SamplerStats stats;
};

/// PC sampling of the channel posterior from level i_start down to 0.
/// i_start = 0 returns the initial state unchanged.
ChannelPcResult estimate_channel_pc(const ComplexMatrix& y, const ComplexMatrix& s_a,
                                    double noise_var, double weight,
                                    const NoiseSchedule& schedule, const PcConfig& pc,
                                    ChannelPriorScorer& prior, std::size_t i_start,
                                    RngStream& rng, const ChannelPcOptions& opts = {});

}  // namespace mra
