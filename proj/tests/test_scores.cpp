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

#include "mra/channel_scores.hpp"
#include "mra/data_scores.hpp"
#include "oracles.hpp"

using namespace mra;

namespace {

double rel_err(const RealMatrix& a, const RealMatrix& b) { return (a - b).norm() / b.norm(); }

}  // namespace

TEST_SUITE("channel_scores") {

TEST_CASE("channel likelihood score is the gradient of the perturbed log-likelihood")
{
    RngStream rng(11);
    for (int inst = 0; inst < 5; ++inst) {
        const ComplexMatrix s = complex_gaussian_sample(6, 3, 1.0, rng);
        const ComplexMatrix h = complex_gaussian_sample(3, 4, 1.0, rng);
        const ComplexMatrix y = s * h + complex_gaussian_sample(6, 4, 0.3, rng);
        const double sigma2 = 0.3, pert = 0.7;
        const ScoreContext ctx = make_channel_context(s, y, sigma2, 1.0);
        const RealMatrix g = channel_likelihood_score(ctx, stack_real(h), pert);
        const oracle::CMat sc = s, yc = y;
        const RealMatrix fd = oracle::fd_gradient(
            [&](const oracle::CMat& hh) { return oracle::channel_log_density(sc, yc, hh, sigma2, pert); },
            oracle::CMat(h), 1e-5);
        CHECK(rel_err(g, fd) < 1e-6);
    }
}

TEST_CASE("SVD form equals the dense inverse form, including rank-deficient operators")
{
    RngStream rng(12);
    RealMatrix a = gaussian_sample(5, 8, 1.0, rng);  // wide, rank 5
    const RealMatrix y = gaussian_sample(5, 3, 1.0, rng);
    const RealMatrix x = gaussian_sample(8, 3, 1.0, rng);
    for (double s : {0.0, 0.1, 3.0}) {
        const ScoreContext ctx(a, y, 0.2, 1.0);
        const RealMatrix dense = oracle::dense_likelihood(a, y, x, 0.2, s);
        CHECK(rel_err(ctx.likelihood(x, s), dense) < 1e-10);
    }
}

TEST_CASE("zero-noise, zero-perturbation gain vanishes on null singular values")
{
    RealMatrix a = RealMatrix::Zero(2, 2);
    a(0, 0) = 2.0;
    const ScoreContext ctx(a, RealMatrix::Ones(2, 1), 0.0, 1.0);
    const RealMatrix g = ctx.likelihood(RealMatrix::Zero(2, 1), 0.0);
    CHECK(all_finite(g));
    CHECK(g(1, 0) == 0.0);
}

TEST_CASE("posterior score is weight times likelihood plus prior")
{
    RngStream rng(13);
    const ComplexMatrix s = complex_gaussian_sample(5, 2, 1.0, rng);
    const ComplexMatrix y = complex_gaussian_sample(5, 3, 1.0, rng);
    const RealMatrix h = gaussian_sample(4, 3, 0.5, rng);
    const ScoreContext ctx = make_channel_context(s, y, 0.1, 2.5);
    AnalyticGaussianPrior prior(0.5);
    const RealMatrix post = channel_posterior_score(ctx, prior, h, 0.4, 0.1);
    const RealMatrix expect = 2.5 * channel_likelihood_score(ctx, h, 0.4) - h / (0.5 + 0.16);
    CHECK((post - expect).norm() < 1e-12);
    CHECK_THROWS_AS(channel_posterior_score(ctx, prior, RealMatrix::Zero(3, 3), 0.4, 0.1), DimensionError);
}

TEST_CASE("analytic Gaussian prior score is the perturbed Gaussian score")
{
    const RealMatrix h = RealMatrix::Constant(2, 2, 1.5);
    CHECK((gaussian_prior_score(h, 1.0, 0.5) + h / 1.5).norm() < 1e-15);
    CHECK_THROWS_AS(gaussian_prior_score(h, 1.0, 0.0), std::invalid_argument);
}

TEST_CASE("channel context rejects mismatched shapes")
{
    CHECK_THROWS_AS(make_channel_context(ComplexMatrix::Ones(4, 2), ComplexMatrix::Ones(5, 3), 1.0, 1.0),
                    DimensionError);
    const ScoreContext ctx = make_channel_context(ComplexMatrix::Ones(4, 2), ComplexMatrix::Ones(4, 3), 1.0, 1.0);
    CHECK_THROWS_AS(ctx.likelihood(RealMatrix::Zero(4, 2), 1.0), DimensionError);
}

}  // TEST_SUITE

TEST_SUITE("data_scores") {

TEST_CASE("data likelihood score is the gradient of the perturbed log-likelihood")
{
    RngStream rng(21);
    const Constellation c(4);
    for (int inst = 0; inst < 5; ++inst) {
        const ComplexMatrix h = complex_gaussian_sample(2, 5, 1.0, rng);
        const ComplexMatrix x = c.random_symbols(6, 2, rng) + complex_gaussian_sample(6, 2, 0.1, rng);
        const ComplexMatrix y = x * h + complex_gaussian_sample(6, 5, 0.2, rng);
        const double sigma2 = 0.2, tau = 0.3;
        const ScoreContext ctx = make_data_context(h, y, sigma2, 1.0);
        const RealMatrix g = data_likelihood_score(ctx, data_to_state(x), tau);
        const oracle::CMat hc = h, yc = y;
        // State rows index users and columns index channel uses, so differentiate X^T.
        const RealMatrix fd = oracle::fd_gradient(
            [&](const oracle::CMat& xt) {
                return oracle::data_log_density(hc, yc, xt.transpose(), sigma2, tau);
            },
            oracle::CMat(x.transpose()), 1e-5);
        CHECK(rel_err(g, fd) < 1e-6);
    }
}

TEST_CASE("data state conversion round trips")
{
    RngStream rng(22);
    const ComplexMatrix x = complex_gaussian_sample(7, 3, 1.0, rng);
    const RealMatrix st = data_to_state(x);
    CHECK(st.rows() == 6);
    CHECK(st.cols() == 7);
    CHECK((state_to_data(st) - x).norm() == 0.0);
}

TEST_CASE("Tweedie score matches the mixture score for 4QAM and 16QAM")
{
    RngStream rng(23);
    for (unsigned q : {4u, 16u}) {
        const Constellation c(q);
        const ConstellationPrior prior(c);
        for (double tau : {0.01, 0.05, 0.3, 1.0, 10.0}) {
            RealMatrix x(1, 40);
            for (Eigen::Index i = 0; i < x.cols(); ++i) x(0, i) = 1.5 * (2.0 * rng.uniform() - 1.0);
            const RealMatrix g = tweedie_prior_score(x, tau, prior);
            for (Eigen::Index i = 0; i < x.cols(); ++i) {
                const double ref = oracle::mixture_score_numeric(x(0, i), tau, c.levels());
                CHECK(std::abs(g(0, i) - ref) <= 1e-6 * std::max(1.0, std::abs(ref)));
            }
        }
    }
}

TEST_CASE("Tweedie posterior mean snaps to the nearest point for tiny tau")
{
    const Constellation c(16);
    const ConstellationPrior prior(c);
    for (double v : {-1.2, -0.1, 0.2, 0.9}) {
        CHECK(prior.posterior_mean(v, 1e-4) == c.project_level(v));
    }
    const auto [m, var] = prior.posterior_moments(0.0, 100.0);
    CHECK(std::abs(m) < 1e-12);
    double second = 0.0;
    for (double l : c.levels()) second += l * l / c.levels().size();
    CHECK(var == doctest::Approx(second).epsilon(1e-4));
}

TEST_CASE("data detection rejects more users than real observations")
{
    const Constellation c(4);
    RngStream rng(24);
    const NoiseSchedule tau(0.01, 1.0, 10);
    CHECK_THROWS_AS(detect_data_pc(ComplexMatrix::Ones(4, 1), ComplexMatrix::Ones(3, 1), 0.1, 1.0, c, tau,
                                   PcConfig{}, rng),
                    DimensionError);
}

TEST_CASE("noiseless well-conditioned data detection is exact")
{
    const Constellation c(4);
    RngStream rng(25);
    const NoiseSchedule tau(0.01, 1.0, 300);
    std::size_t errors = 0;
    for (int frame = 0; frame < 10; ++frame) {
        const ComplexMatrix h = complex_gaussian_sample(2, 8, 1.0, rng);
        const ComplexMatrix x = c.random_symbols(10, 2, rng);
        const DataPcResult r = detect_data_pc(x * h, h, 0.0, 1.0, c, tau, PcConfig{3, 0.3}, rng);
        errors += c.bit_errors(x, r.hard);
    }
    CHECK(errors == 0);
}

}  // TEST_SUITE
