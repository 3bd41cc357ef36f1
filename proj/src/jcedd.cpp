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

#include "mra/jcedd.hpp"

#include <chrono>
#include <cmath>
#include <limits>
#include <memory>

namespace mra {

void JceddConfig::validate() const
{
    if (n_update == 0) throw ConfigError("n_update must be >= 1");
    if (!(lambda_h >= 0.0) || !(lambda_x >= 0.0)) throw ConfigError("lambda weights must be >= 0");
    if (!(channel_pc.snr_ratio > 0.0) || !(data_pc.snr_ratio > 0.0)) {
        throw ConfigError("corrector ratio r must be > 0");
    }
    if (!(prior_variance > 0.0)) throw ConfigError("prior_variance must be > 0");
    if (!(divergence_factor >= 0.0)) throw ConfigError("divergence_factor must be >= 0");
}

LmmseResult lmmse_init(const ComplexMatrix& y_p, const ComplexMatrix& p_a, double noise_var,
                       const std::optional<ComplexMatrix>& r_h)
{
    const Eigen::Index ka = p_a.cols();
    if (y_p.rows() != p_a.rows()) {
        throw DimensionError("lmmse_init: Y_p " + shape_string(y_p.rows(), y_p.cols()) +
                             " vs P_a " + shape_string(p_a.rows(), p_a.cols()));
    }
    if (r_h && (r_h->rows() != ka || r_h->cols() != ka)) {
        throw DimensionError("lmmse_init: R_h " + shape_string(r_h->rows(), r_h->cols()) +
                             ", expected " + shape_string(ka, ka));
    }
    if (!(noise_var >= 0.0)) throw std::invalid_argument("lmmse_init: negative noise variance");

    const ComplexMatrix ph = p_a.adjoint();
    LmmseResult out;
    if (noise_var == 0.0) {
        out.h = solve_full_rank(ph * p_a, ph * y_p, "lmmse_init (noiseless)");
        out.r_delta = ComplexMatrix::Zero(ka, ka);
        return out;
    }
    const ComplexMatrix rh = r_h ? *r_h : ComplexMatrix::Identity(ka, ka);
    const ComplexMatrix cov = p_a * rh * ph + noise_var * ComplexMatrix::Identity(p_a.rows(), p_a.rows());
    out.h = rh * ph * solve_full_rank(cov, y_p, "lmmse_init");
    const ComplexMatrix info = inverse_full_rank(rh, "lmmse_init R_h") + ph * p_a / noise_var;
    out.r_delta = inverse_full_rank(info, "lmmse_init");
    return out;
}

std::size_t start_index_for_variance(double v, const NoiseSchedule& schedule)
{
    std::size_t best = 0;
    double best_gap = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i <= schedule.steps(); ++i) {
        const double gap = std::abs(schedule.variance(i) - v);
        if (gap < best_gap) {
            best_gap = gap;
            best = i;
        }
    }
    return best;
}

std::size_t start_index(const ComplexMatrix& r_delta, std::size_t antennas,
                        const NoiseSchedule& schedule, StartRule rule)
{
    if (r_delta.rows() != r_delta.cols()) {
        throw DimensionError("start_index: R_delta must be square, got " +
                             shape_string(r_delta.rows(), r_delta.cols()));
    }
    const double trace = r_delta.diagonal().real().sum();
    if (rule == StartRule::LiteralSum) {
        const double total = trace * static_cast<double>(antennas);
        std::size_t best = 0;
        double best_gap = std::numeric_limits<double>::infinity();
        for (std::size_t i = 0; i <= schedule.steps(); ++i) {
            const double gap = std::abs(schedule.sigma(i) - total);
            if (gap < best_gap) {
                best_gap = gap;
                best = i;
            }
        }
        return best;
    }
    if (r_delta.rows() == 0) return 0;
    const double mean_complex = trace / static_cast<double>(r_delta.rows());
    return start_index_for_variance(mean_complex / 2.0, schedule);
}

ComplexMatrix zf_init(const ComplexMatrix& y_d, const ComplexMatrix& h,
                      const Constellation* constellation)
{
    if (y_d.cols() != h.cols()) {
        throw DimensionError("zf_init: Y_d " + shape_string(y_d.rows(), y_d.cols()) + " vs H " +
                             shape_string(h.rows(), h.cols()));
    }
    const ComplexMatrix hh = h.adjoint();
    const ComplexMatrix gram = h * hh;
    // X G = Y_d H^H with Hermitian G, so X^H = G^{-1} H Y_d^H.
    const ComplexMatrix xh = solve_full_rank(gram, h * y_d.adjoint(), "zf_init");
    ComplexMatrix x = xh.adjoint();
    return constellation ? constellation->project(x) : x;
}

ComplexMatrix stack_frames(const ComplexMatrix& p_a, const ComplexMatrix& x)
{
    if (p_a.cols() != x.cols()) {
        throw DimensionError("stack_frames: pilots " + shape_string(p_a.rows(), p_a.cols()) +
                             " vs data " + shape_string(x.rows(), x.cols()));
    }
    ComplexMatrix s(p_a.rows() + x.rows(), p_a.cols());
    s.topRows(p_a.rows()) = p_a;
    s.bottomRows(x.rows()) = x;
    return s;
}

namespace {

double nmse_of(const ComplexMatrix& truth, const ComplexMatrix& est)
{
    const double den = truth.squaredNorm();
    return den > 0.0 ? (truth - est).squaredNorm() / den : 0.0;
}

TracePoint trace_point(std::size_t level, const JceddTruth& truth, const ComplexMatrix& h,
                       const ComplexMatrix& x_hard, const Constellation& c)
{
    TracePoint p;
    p.level = level;
    p.nmse = nmse_of(truth.h, h);
    const double bits = static_cast<double>(truth.x.size()) * c.bits_per_symbol();
    p.ber = bits > 0 ? static_cast<double>(c.bit_errors(truth.x, x_hard)) / bits : 0.0;
    return p;
}

}  // namespace

EstimationResult run_jcedd(const ComplexMatrix& y, const ComplexMatrix& p_a, double noise_var,
                           const Constellation& constellation, const JceddConfig& cfg,
                           ChannelPriorScorer& prior, RngStream& rng, const JceddTruth* truth)
{
    cfg.validate();
    const auto t0 = std::chrono::steady_clock::now();
    const Eigen::Index lp = p_a.rows();
    const Eigen::Index ka = p_a.cols();
    if (y.rows() <= lp) {
        throw DimensionError("run_jcedd: Y has " + std::to_string(y.rows()) +
                             " rows, needs more than L_p = " + std::to_string(lp));
    }
    const ComplexMatrix y_p = y.topRows(lp);
    const ComplexMatrix y_d = y.bottomRows(y.rows() - lp);
    const std::size_t n = cfg.sigma.steps();

    EstimationResult out;
    const ComplexMatrix r_h = 2.0 * cfg.prior_variance * ComplexMatrix::Identity(ka, ka);
    LmmseResult init = lmmse_init(y_p, p_a, noise_var, r_h);
    out.h_init = init.h;
    out.start_index = cfg.cold_start
                          ? n
                          : start_index(init.r_delta, static_cast<std::size_t>(y.cols()), cfg.sigma,
                                        cfg.start_rule);
    out.x_soft = zf_init(y_d, init.h, nullptr);
    out.x_hard = constellation.project(out.x_soft);
    ComplexMatrix x_in_s = cfg.raw_zf ? out.x_soft : out.x_hard;

    RealMatrix h = cfg.cold_start
                       ? gaussian_sample(2 * ka, y.cols(), cfg.sigma.variance(n), rng)
                       : stack_real(init.h);

    auto ctx = std::make_unique<ScoreContext>(
        make_channel_context(stack_frames(p_a, x_in_s), y, noise_var, cfg.lambda_h));
    ++out.counters.channel_svds;

    const double nd = static_cast<double>(n);
    ScoreFn channel_score = [&](const RealMatrix& s, double sigma, std::size_t level) {
        return channel_posterior_score(*ctx, prior, s, sigma, static_cast<double>(level) / nd);
    };
    PcSampler sampler(cfg.sigma, cfg.channel_pc, channel_score, rng);
    sampler.set_divergence_factor(cfg.divergence_factor);

    for (std::size_t i = out.start_index; i >= 1; --i) {
        sampler.step(h, i);
        if (i % cfg.n_update != 0) continue;

        const ComplexMatrix h_now = unstack_real(h);
        const ScoreContext dctx = make_data_context(h_now, y_d, noise_var, cfg.lambda_x);
        ++out.counters.data_svds;
        RngStream drng = rng.fork("data-update", out.counters.data_updates);
        const DataPcResult dd = detect_data_pc(dctx, constellation, cfg.tau, cfg.data_pc, drng,
                                               cfg.divergence_factor);
        ++out.counters.data_updates;
        out.counters.data_score_evals += dd.stats.score_evals;
        out.counters.skipped_corrector_steps += dd.stats.skipped_corrector_steps;
        out.x_soft = dd.soft;
        out.x_hard = dd.hard;
        x_in_s = cfg.hard_data ? dd.hard : dd.soft;

        ctx = std::make_unique<ScoreContext>(
            make_channel_context(stack_frames(p_a, x_in_s), y, noise_var, cfg.lambda_h));
        ++out.counters.channel_svds;
        if (truth) out.trace.push_back(trace_point(i - 1, *truth, h_now, out.x_hard, constellation));
    }

    out.counters.channel_score_evals = sampler.stats().score_evals;
    out.counters.skipped_corrector_steps += sampler.stats().skipped_corrector_steps;
    out.h = unstack_real(h);
    if (truth) out.trace.push_back(trace_point(0, *truth, out.h, out.x_hard, constellation));
    out.wall_seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    return out;
}

}  // namespace mra
