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

#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <vector>

#include "mra/channel_scores.hpp"
#include "mra/diffusion.hpp"

using namespace mra;

namespace {

/// Kolmogorov-Smirnov statistic of samples against N(0, var).
double ks_normal(std::vector<double> v, double var)
{
    std::sort(v.begin(), v.end());
    const double n = static_cast<double>(v.size());
    double d = 0.0;
    for (std::size_t i = 0; i < v.size(); ++i) {
        const double f = 0.5 * std::erfc(-v[i] / std::sqrt(2.0 * var));
        d = std::max({d, std::abs(f - i / n), std::abs(f - (i + 1) / n)});
    }
    return d;
}

}  // namespace

TEST_SUITE("diffusion") {

TEST_CASE("noise schedule is geometric with exact endpoints")
{
    const NoiseSchedule s(0.01, 30.0, 1500);
    CHECK(s.sigma(0) == 0.01);
    CHECK(s.sigma(1500) == 30.0);
    const double ratio = s.sigma(1) / s.sigma(0);
    for (std::size_t i = 1; i < 1500; i += 97) CHECK(s.sigma(i + 1) / s.sigma(i) == doctest::Approx(ratio));
    CHECK_THROWS_AS(s.sigma(1501), std::out_of_range);
    CHECK_THROWS_AS(NoiseSchedule(1.0, 0.5, 10), ConfigError);
    CHECK_THROWS_AS(NoiseSchedule(0.1, 1.0, 0), ConfigError);
}

TEST_CASE("predictor step is the reverse-diffusion update")
{
    const RealMatrix x = RealMatrix::Constant(2, 2, 1.0);
    const RealMatrix g = RealMatrix::Constant(2, 2, -0.5);
    const RealMatrix z = RealMatrix::Constant(2, 2, 2.0);
    const RealMatrix out = predictor_step(x, g, 2.0, 1.0, z);
    // dvar = 4 - 1 = 3
    CHECK(out(0, 0) == doctest::Approx(1.0 + 3 * -0.5 + std::sqrt(3.0) * 2.0));
    CHECK_THROWS_AS(predictor_step(x, g, 1.0, 1.0, z), std::invalid_argument);
}

TEST_CASE("corrector step size follows the signal-to-noise rule")
{
    const RealMatrix x = RealMatrix::Zero(1, 4);
    const RealMatrix g = RealMatrix::Constant(1, 4, 2.0);  // norm 4
    const RealMatrix z = RealMatrix::Constant(1, 4, 0.5);  // norm 1
    const CorrectorResult r = corrector_step(x, g, 0.8, 0.3, z);
    const double eps = 2.0 * 0.8 * std::pow(0.3 * 1.0 / 4.0, 2);
    CHECK(r.step_size == doctest::Approx(eps));
    CHECK(r.x(0, 0) == doctest::Approx(eps * 2.0 + std::sqrt(2 * eps) * 0.5));
    const CorrectorResult skip = corrector_step(x, RealMatrix::Zero(1, 4), 0.8, 0.3, z);
    CHECK(skip.skipped);
    CHECK(skip.x.norm() == 0.0);
}

TEST_CASE("sampler counts evaluations and skipped corrector steps")
{
    const NoiseSchedule s(0.01, 1.0, 20);
    RngStream rng(1);
    const ScoreFn zero = [](const RealMatrix& x, double, std::size_t) { return RealMatrix::Zero(x.rows(), x.cols()); };
    SamplerStats st;
    pc_sample(RealMatrix::Zero(2, 2), 20, s, PcConfig{2, 0.3}, zero, rng, &st);
    CHECK(st.score_evals == 60);
    CHECK(st.predictor_steps == 20);
    CHECK(st.corrector_steps == 40);
    CHECK(st.skipped_corrector_steps == 40);
    CHECK_THROWS_AS(pc_sample(RealMatrix::Zero(2, 2), 21, s, PcConfig{}, zero, rng), std::out_of_range);
}

TEST_CASE("sampler raises DivergenceError on an exploding score")
{
    const NoiseSchedule s(0.01, 1.0, 20);
    RngStream rng(2);
    const ScoreFn boom = [](const RealMatrix& x, double, std::size_t) { return RealMatrix(1e8 * (x.array() + 1.0).matrix()); };
    PcSampler sampler(s, PcConfig{1, 0.3}, boom, rng);
    RealMatrix x = RealMatrix::Zero(2, 2);
    try {
        for (std::size_t i = 20; i >= 1; --i) sampler.step(x, i);
        FAIL("expected divergence");
    } catch (const DivergenceError& e) {
        CHECK(e.norm() > 1e3 * 2.0);
    }
}

TEST_CASE("PC sampler draws from the Gaussian target (KS test)")
{
    const double v = 0.5;
    const NoiseSchedule s(0.01, 30.0, 1500);
    RngStream rng(3);
    const ScoreFn score = [v](const RealMatrix& x, double sigma, std::size_t) {
        return gaussian_prior_score(x, sigma, v);
    };
    RealMatrix x = gaussian_sample(1, 4000, 30.0 * 30.0, rng);
    x = pc_sample(x, 1500, s, PcConfig{3, 0.3}, score, rng);
    const std::vector<double> samples(x.data(), x.data() + x.size());
    // 1% critical value 1.63 / sqrt(n)
    CHECK(ks_normal(samples, v + 0.01 * 0.01) < 1.63 / std::sqrt(4000.0));
}

}  // TEST_SUITE
