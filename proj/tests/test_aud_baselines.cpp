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

#include "mra/aud.hpp"
#include "mra/baselines.hpp"
#include "mra/metrics.hpp"
#include "oracles.hpp"

using namespace mra;

namespace {

/// Unitary DFT columns: orthogonal pilots for K <= L.
ComplexMatrix dft_pilots(std::size_t l, std::size_t k)
{
    ComplexMatrix p(static_cast<Eigen::Index>(l), static_cast<Eigen::Index>(k));
    const double pi = std::acos(-1.0);
    for (std::size_t r = 0; r < l; ++r) {
        for (std::size_t c = 0; c < k; ++c) p(r, c) = std::polar(1.0, -2.0 * pi * r * c / l);
    }
    return p;
}

ComplexMatrix sparse_channels(std::size_t k, std::size_t m, const std::vector<std::size_t>& active, RngStream& rng)
{
    ComplexMatrix h = ComplexMatrix::Zero(static_cast<Eigen::Index>(k), static_cast<Eigen::Index>(m));
    for (std::size_t a : active) h.row(static_cast<Eigen::Index>(a)) = complex_gaussian_sample(1, m, 1.0, rng);
    return h;
}

}  // namespace

TEST_SUITE("aud") {

TEST_CASE("OMP recovers the exact support on noiseless orthogonal pilots")
{
    RngStream rng(1);
    const ComplexMatrix p = dft_pilots(16, 16);
    for (int t = 0; t < 20; ++t) {
        std::vector<std::uint8_t> alpha(16, 0);
        std::vector<std::size_t> act;
        for (std::size_t k = 0; k < 16; ++k) {
            if (rng.bernoulli(0.25)) {
                alpha[k] = 1;
                act.push_back(k);
            }
        }
        OmpConfig cfg;
        cfg.k_max = std::max<std::size_t>(1, act.size());
        cfg.energy_threshold = 0.0;
        const AudResult r = omp_aud(p * sparse_channels(16, 8, act, rng), p, cfg);
        CHECK(r.alpha == alpha);
    }
}

TEST_CASE("OMP refit recovers the active channels")
{
    RngStream rng(2);
    const ComplexMatrix p = dft_pilots(12, 12);
    const ComplexMatrix h = sparse_channels(12, 4, {1, 5, 9}, rng);
    OmpConfig cfg;
    cfg.k_max = 3;
    const AudResult r = omp_aud(p * h, p, cfg);
    CHECK((r.h - h).norm() < 1e-9);
    CHECK(r.scores(5) == doctest::Approx(h.row(5).squaredNorm() / 4));
}

TEST_CASE("AMP recovers the support of a noiseless square system")
{
    RngStream rng(3);
    SystemConfig c;
    c.num_users = 32;
    c.activity_prob = 0.1;
    c.antennas_x = 4;
    c.antennas_y = 4;
    c.pilot_length_max = 32;
    c.pilot_length = 32;
    c.snr_db = kNoiselessSnr;
    for (int t = 0; t < 10; ++t) {
        RngStream srng = rng.fork("scenario", t);
        const Scenario s = generate_scenario(c, srng);
        AmpConfig a;
        a.iterations = 200;
        const AudResult r = amp_aud(s.tx.received_pilot_padded, s.pool.masked(c.pilot_length), a);
        CHECK(r.alpha == s.activity.alpha);
    }
}

TEST_CASE("AMP effective noise does not increase early when it converges at 10 dB")
{
    RngStream rng(31);
    SystemConfig c;
    c.num_users = 64;
    c.antennas_x = 4;
    c.antennas_y = 8;
    c.fixed_active = 6;
    c.pilot_length = 24;
    c.snr_db = 10.0;
    int converged = 0;
    for (int t = 0; t < 20; ++t) {
        RngStream srng = rng.fork("scenario", t);
        const Scenario s = generate_scenario(c, srng);
        AmpConfig a;
        a.tolerance = 0.0;
        const AudResult r = amp_aud(s.tx.received_pilot_padded, s.pool.masked(c.pilot_length), a);
        CHECK_FALSE(r.diverged);
        if (r.alpha != s.activity.alpha) continue;
        ++converged;
        // the empirical residual variance jitters around the fixed point
        for (std::size_t i = 1; i < 10; ++i) CHECK(r.residual_trace[i] <= r.residual_trace[i - 1] * 1.01);
    }
    CHECK(converged >= 18);
}

TEST_CASE("AMP with a zero activity prior detects nobody")
{
    RngStream rng(32);
    const ComplexMatrix p = complex_gaussian_sample(8, 16, 1.0, rng);
    AmpConfig a;
    a.activity_prob = 0.0;
    const AudResult r = amp_aud(complex_gaussian_sample(8, 4, 1.0, rng), p, a);
    CHECK(r.scores.norm() == 0.0);
    CHECK(std::count(r.alpha.begin(), r.alpha.end(), 1) == 0);
}

TEST_CASE("oracle detection and thresholding")
{
    ActivityVector a;
    a.alpha = {0, 1, 1, 0};
    CHECK(oracle_aus(a).alpha == a.alpha);
    RealVector s(3);
    s << 0.2, 0.5, 0.7;
    CHECK(threshold_scores(s, 0.5) == std::vector<std::uint8_t>{0, 0, 1});
}

}  // TEST_SUITE

TEST_SUITE("baselines") {

TEST_CASE("least squares is exact without noise")
{
    RngStream rng(4);
    const ComplexMatrix s = complex_gaussian_sample(8, 3, 1.0, rng);
    const ComplexMatrix h = complex_gaussian_sample(3, 5, 1.0, rng);
    CHECK((ls_ce(s * h, s) - h).norm() < 1e-10);
    CHECK_THROWS_AS(ls_ce(s * h, s.topRows(2)), DimensionError);
    CHECK_THROWS_AS(ls_ce(complex_gaussian_sample(2, 5, 1.0, rng), complex_gaussian_sample(2, 3, 1.0, rng)),
                    RankError);
}

TEST_CASE("OAMP with perfect CSI matches exhaustive MAP at high SNR")
{
    const Constellation c(4);
    RngStream rng(5);
    std::size_t oamp_err = 0, map_err = 0;
    for (int t = 0; t < 20; ++t) {
        const ComplexMatrix h = complex_gaussian_sample(3, 6, 1.0, rng);
        const ComplexMatrix x = c.random_symbols(20, 3, rng);
        const double nv = 0.05;
        const ComplexMatrix y = x * h + complex_gaussian_sample(20, 6, nv, rng);
        const OampResult r = oamp_dd(y, h, nv, 0.0, c, 10);
        CHECK_FALSE(r.diverged);
        oamp_err += c.bit_errors(x, r.hard);
        ComplexMatrix xm(20, 3);
        for (Eigen::Index l = 0; l < 20; ++l) {
            const auto idx = oracle::exhaustive_map(h, y.row(l).transpose(), c);
            for (Eigen::Index k = 0; k < 3; ++k) xm(l, k) = c.symbol(idx[k]);
        }
        map_err += c.bit_errors(x, xm);
    }
    CHECK(oamp_err <= map_err + 2);
}

TEST_CASE("OAMP error variance trace decreases")
{
    const Constellation c(4);
    RngStream rng(6);
    const ComplexMatrix h = complex_gaussian_sample(4, 8, 1.0, rng);
    const ComplexMatrix x = c.random_symbols(50, 4, rng);
    const ComplexMatrix y = x * h + complex_gaussian_sample(50, 8, 0.3, rng);
    const OampResult r = oamp_dd(y, h, 0.3, 0.0, c, 6);
    REQUIRE(r.error_trace.size() == 6);
    CHECK(r.error_trace.back() < r.error_trace.front());
    CHECK_THROWS_AS(oamp_dd(y, h, 0.3, 0.0, c, 0), std::invalid_argument);
}

TEST_CASE("iterative LMMSE with known data is the data-aided LMMSE")
{
    const Constellation c(4);
    RngStream rng(7);
    const ComplexMatrix p = complex_gaussian_sample(6, 3, 1.0, rng);
    const ComplexMatrix x = c.random_symbols(10, 3, rng);
    const ComplexMatrix h = complex_gaussian_sample(3, 4, 1.0, rng);
    const ComplexMatrix s(stack_frames(p, x));
    const ComplexMatrix y = s * h + complex_gaussian_sample(16, 4, 0.2, rng);
    const IterLmmseOampResult r = iter_lmmse_oamp(y, p, 0.2, c, 0, 10, 1.0, &x);
    const auto ref = oracle::conjugate_posterior(s, y, 0.2, 1.0);
    CHECK((oracle::CMat(r.h) - ref.mean).norm() < 1e-10);
    CHECK(r.channel_error_var == doctest::Approx(ref.cov.diagonal().real().mean()));

    const IterLmmseOampResult blind = iter_lmmse_oamp(y, p, 0.2, c, 2, 10, 1.0);
    CHECK(blind.x_hard.rows() == 10);
    CHECK(nmse(h, blind.h) < nmse(h, lmmse_init(y.topRows(6), p, 0.2).h));
}

TEST_CASE("score budget and corrector-only counters")
{
    JceddConfig cfg;
    cfg.n_update = 50;
    CHECK(jcedd_score_budget(560, cfg) == 560 * 4 + 11 * 4 * 1500);
    SystemConfig sc;
    sc.num_users = 16;
    sc.fixed_active = 2;
    sc.antennas_x = 2;
    sc.antennas_y = 2;
    sc.pilot_length_min = 4;
    sc.pilot_length = 4;
    sc.data_length = 6;
    RngStream srng(8);
    const Scenario s = generate_scenario(sc, srng);
    LangevinConfig lc;
    lc.base.sigma = NoiseSchedule(0.01, 30.0, 100);
    lc.base.tau = NoiseSchedule(0.01, 1.0, 20);
    lc.base.n_update = 10;
    AnalyticGaussianPrior prior;
    RngStream rng(9);
    const LangevinResult r = langevin_jcedd(s.tx.received, s.tx.frames.pilots, s.tx.noise_variance, Constellation(4),
                                            lc, prior, rng);
    const std::size_t budget = jcedd_score_budget(r.start_index, lc.base);
    CHECK(r.iterations == std::max<std::size_t>(1, budget / 2));
    CHECK(r.channel_score_evals == r.iterations);
    CHECK(r.data_score_evals == r.iterations);
    lc.iterations = 7;
    const LangevinResult fixed = langevin_jcedd(s.tx.received, s.tx.frames.pilots, s.tx.noise_variance,
                                                Constellation(4), lc, prior, rng);
    CHECK(fixed.iterations == 7);
}

}  // TEST_SUITE
