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

// Reference estimators and detectors: least squares CE, OAMP detection, the
// iterative LMMSE/OAMP receiver and a corrector-only Langevin JCEDD.

#pragma once

#include <cstddef>
#include <vector>

#include "mra/channel_scores.hpp"
#include "mra/constellation.hpp"
#include "mra/jcedd.hpp"

namespace mra {

/// (S^H S)^{-1} S^H Y; RankError when S lacks full column rank.
ComplexMatrix ls_ce(const ComplexMatrix& y, const ComplexMatrix& s);

struct OampResult {
    ComplexMatrix soft;   // L_d x K_a posterior means after the last iteration
    ComplexMatrix hard;
    std::vector<double> error_trace;  // linear-stage error variance per iteration
    bool diverged = false;
};

/// OAMP detection of Y_d = X H + W given an estimate of H whose entries carry
/// error variance channel_error_var (complex). Requires iterations >= 1.
OampResult oamp_dd(const ComplexMatrix& y_d, const ComplexMatrix& h_hat, double noise_var,
                   double channel_error_var, const Constellation& constellation,
                   std::size_t iterations = 10);

struct IterLmmseOampResult {
    ComplexMatrix h;
    ComplexMatrix x_hard;
    double channel_error_var = 0.0;
};

/// Pilot LMMSE, OAMP, then `rounds` refinements where detected data act as
/// extra pilots. known_data replaces detection with the true symbols.
IterLmmseOampResult iter_lmmse_oamp(const ComplexMatrix& y, const ComplexMatrix& p_a,
                                    double noise_var, const Constellation& constellation,
                                    std::size_t rounds, std::size_t oamp_iterations = 10,
                                    double channel_variance = 1.0,
                                    const ComplexMatrix* known_data = nullptr);

struct LangevinConfig {
    JceddConfig base;
    std::size_t iterations = 0;  // 0: half the score budget of run_jcedd at the same i*
    bool cold_start = false;     // channel from N(0, sigma_max^2 I) instead of LMMSE
};

struct LangevinResult {
    ComplexMatrix h;
    ComplexMatrix x_soft;
    ComplexMatrix x_hard;
    std::size_t start_index = 0;
    std::size_t iterations = 0;
    std::size_t channel_score_evals = 0;
    std::size_t data_score_evals = 0;
};

/// Score evaluations run_jcedd spends from start level i_star.
std::size_t jcedd_score_budget(std::size_t i_star, const JceddConfig& cfg);

/// Corrector-only alternation: one channel Langevin step then one data Langevin
/// step per iteration, with sigma annealed geometrically from sigma_{i*} to
/// sigma_min and tau from tau_max to tau_min. S_a uses the continuous data state.
LangevinResult langevin_jcedd(const ComplexMatrix& y, const ComplexMatrix& p_a, double noise_var,
                              const Constellation& constellation, const LangevinConfig& cfg,
                              ChannelPriorScorer& prior, RngStream& rng);

}  // namespace mra
