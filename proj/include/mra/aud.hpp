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

// Active user detection over the masked pilot model Y_p = P H + W, where P is
// the pilot pool restricted to the transmitted pilot length and H is row
// sparse (one row per potential user).

#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

#include "mra/numerics.hpp"
#include "mra/system_model.hpp"

namespace mra {

struct AudResult {
    std::vector<std::uint8_t> alpha;  // K
    RealVector scores;                // soft activity or normalized row energy, K
    ComplexMatrix h;                  // K x M channel byproduct (zero rows when unused)
    std::vector<double> residual_trace;
    std::size_t iterations = 0;
    bool diverged = false;
};

/// alpha_k = 1 iff scores_k > threshold.
std::vector<std::uint8_t> threshold_scores(const RealVector& scores, double threshold);

struct OmpConfig {
    std::size_t k_max = 0;            // 0: ceil(1.5 * expected_active)
    double expected_active = 0.0;
    double residual_tol = 0.0;        // stop when ||R|| / ||Y|| < tol
    double energy_threshold = 0.5;    // on ||h_k||^2 / M of the final refit
};

/// Simultaneous OMP. Scores are refit row energies ||h_k||^2 / M (zero off-support).
AudResult omp_aud(const ComplexMatrix& y_p, const ComplexMatrix& pilots, const OmpConfig& cfg);

struct AmpConfig {
    std::size_t iterations = 50;
    double activity_prob = 0.1;
    double channel_variance = 1.0;    // complex variance of active channel entries
    double threshold = 0.5;
    double tolerance = 1e-7;          // stop on relative change of the estimate
    double damping = 0.5;             // used only by the restart after divergence
};

/// MMV-AMP with a Bernoulli-Gaussian row denoiser. Scores are posterior
/// activity probabilities; residual_trace holds the effective noise variance
/// per iteration.
AudResult amp_aud(const ComplexMatrix& y_p, const ComplexMatrix& pilots, const AmpConfig& cfg);

/// Genie detector returning the true activity.
AudResult oracle_aus(const ActivityVector& activity);

}  // namespace mra
