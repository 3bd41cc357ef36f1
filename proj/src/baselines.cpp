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

#include "mra/baselines.hpp"

#include <algorithm>
#include <cmath>

#include "mra/data_scores.hpp"

namespace mra {

ComplexMatrix ls_ce(const ComplexMatrix& y, const ComplexMatrix& s)
{
    if (y.rows() != s.rows()) {
        throw DimensionError("ls_ce: Y " + shape_string(y.rows(), y.cols()) + " vs S " +
                             shape_string(s.rows(), s.cols()));
    }
    const ComplexMatrix sh = s.adjoint();
    return solve_full_rank(sh * s, sh * y, "ls_ce");
}

namespace {

/// Entrywise constellation posterior for complex observations with noise variance tau2.
void denoise(const ComplexMatrix& r, double tau2, const ConstellationPrior& prior,
             ComplexMatrix& mean, double& mean_var)
{
    const double tau = std::sqrt(std::max(tau2, 0.0) / 2.0);
    mean.resize(r.rows(), r.cols());
    double var_sum = 0.0;
    for (Eigen::Index i = 0; i < r.rows(); ++i) {
        for (Eigen::Index j = 0; j < r.cols(); ++j) {
            const auto [mr, vr] = prior.posterior_moments(r(i, j).real(), tau);
            const auto [mi, vi] = prior.posterior_moments(r(i, j).imag(), tau);
            mean(i, j) = Complex(mr, mi);
            var_sum += vr + vi;
        }
    }
    mean_var = r.size() > 0 ? var_sum / static_cast<double>(r.size()) : 0.0;
}

}  // namespace

OampResult oamp_dd(const ComplexMatrix& y_d, const ComplexMatrix& h_hat, double noise_var,
                   double channel_error_var, const Constellation& constellation,
                   std::size_t iterations)
{
    if (iterations == 0) throw std::invalid_argument("oamp_dd: iterations must be >= 1");
    if (y_d.cols() != h_hat.cols()) {
        throw DimensionError("oamp_dd: Y_d " + shape_string(y_d.rows(), y_d.cols()) + " vs H " +
                             shape_string(h_hat.rows(), h_hat.cols()));
    }
    const Eigen::Index ka = h_hat.rows();
    const double kd = static_cast<double>(ka);
    const ComplexMatrix a = h_hat.transpose();   // M x K_a
    const ComplexMatrix ah = a.adjoint();
    const ComplexMatrix gram = ah * a;
    const ComplexMatrix y = y_d.transpose();     // M x L_d
    const double sigma2 = noise_var + channel_error_var * kd;
    const ConstellationPrior prior(constellation);
    const ComplexMatrix eye = ComplexMatrix::Identity(ka, ka);

    OampResult out;
    ComplexMatrix x = ComplexMatrix::Zero(ka, y.cols());
    ComplexMatrix post = x;
    double v = 1.0;
    for (std::size_t it = 0; it < iterations; ++it) {
        const ComplexMatrix w_hat = solve_full_rank(gram + (sigma2 / v) * eye, ah, "oamp_dd");
        const Complex tr = (w_hat * a).trace();
        if (!(std::abs(tr) > 0.0)) {
            out.diverged = true;
            break;
        }
        const ComplexMatrix w = (kd / tr.real()) * w_hat;
        const ComplexMatrix r = x + w * (y - a * x);
        const ComplexMatrix b = eye - w * a;
        const double tau2 = (v * b.squaredNorm() + sigma2 * w.squaredNorm()) / kd;
        out.error_trace.push_back(tau2);
        if (!all_finite(r) || !std::isfinite(tau2)) {
            out.diverged = true;
            break;
        }
        double v_post = 0.0;
        denoise(r, tau2, prior, post, v_post);
        if (it + 1 == iterations) break;

        if (v_post <= 1e-12 || tau2 <= 0.0) {
            x = post;
            v = 1e-12;
        } else if (v_post >= tau2) {
            x = r;
            v = tau2;
        } else {
            const double v_ext = 1.0 / (1.0 / v_post - 1.0 / tau2);
            x = v_ext * (post / v_post - r / tau2);
            v = std::max(v_ext, 1e-12);
        }
    }
    out.soft = post.transpose();
    out.hard = constellation.project(out.soft);
    return out;
}

IterLmmseOampResult iter_lmmse_oamp(const ComplexMatrix& y, const ComplexMatrix& p_a,
                                    double noise_var, const Constellation& constellation,
                                    std::size_t rounds, std::size_t oamp_iterations,
                                    double channel_variance, const ComplexMatrix* known_data)
{
    const Eigen::Index lp = p_a.rows();
    const Eigen::Index ka = p_a.cols();
    if (y.rows() <= lp) throw DimensionError("iter_lmmse_oamp: Y has no data rows");
    const ComplexMatrix y_d = y.bottomRows(y.rows() - lp);
    const ComplexMatrix r_h = channel_variance * ComplexMatrix::Identity(ka, ka);
    const auto err_var = [ka](const ComplexMatrix& r_delta) {
        return ka > 0 ? r_delta.diagonal().real().mean() : 0.0;
    };

    IterLmmseOampResult out;
    if (known_data) {
        const LmmseResult est = lmmse_init(y, stack_frames(p_a, *known_data), noise_var, r_h);
        out.h = est.h;
        out.channel_error_var = err_var(est.r_delta);
        out.x_hard = *known_data;
        return out;
    }

    LmmseResult est = lmmse_init(y.topRows(lp), p_a, noise_var, r_h);
    out.channel_error_var = err_var(est.r_delta);
    out.x_hard = oamp_dd(y_d, est.h, noise_var, out.channel_error_var, constellation,
                         oamp_iterations).hard;
    for (std::size_t round = 0; round < rounds; ++round) {
        est = lmmse_init(y, stack_frames(p_a, out.x_hard), noise_var, r_h);
        out.channel_error_var = err_var(est.r_delta);
        out.x_hard = oamp_dd(y_d, est.h, noise_var, out.channel_error_var, constellation,
                             oamp_iterations).hard;
    }
    out.h = est.h;
    return out;
}

std::size_t jcedd_score_budget(std::size_t i_star, const JceddConfig& cfg)
{
    const std::size_t updates = i_star / cfg.n_update;
    return i_star * (1 + cfg.channel_pc.corrector_steps) +
           updates * (1 + cfg.data_pc.corrector_steps) * cfg.tau.steps();
}

LangevinResult langevin_jcedd(const ComplexMatrix& y, const ComplexMatrix& p_a, double noise_var,
                              const Constellation& constellation, const LangevinConfig& cfg,
                              ChannelPriorScorer& prior, RngStream& rng)
{
    const JceddConfig& base = cfg.base;
    base.validate();
    const Eigen::Index lp = p_a.rows();
    const Eigen::Index ka = p_a.cols();
    if (y.rows() <= lp) throw DimensionError("langevin_jcedd: Y has no data rows");
    const ComplexMatrix y_d = y.bottomRows(y.rows() - lp);
    const std::size_t n = base.sigma.steps();

    LangevinResult out;
    RealMatrix h;
    if (cfg.cold_start) {
        out.start_index = n;
        h = gaussian_sample(2 * ka, y.cols(), base.sigma.variance(n), rng);
    } else {
        const ComplexMatrix r_h = 2.0 * base.prior_variance * ComplexMatrix::Identity(ka, ka);
        const LmmseResult init = lmmse_init(y.topRows(lp), p_a, noise_var, r_h);
        out.start_index = start_index(init.r_delta, static_cast<std::size_t>(y.cols()),
                                      base.sigma, base.start_rule);
        h = stack_real(init.h);
    }
    std::size_t iters = cfg.iterations;
    if (iters == 0) iters = std::max<std::size_t>(1, jcedd_score_budget(out.start_index, base) / 2);
    out.iterations = iters;

    RealMatrix x = gaussian_sample(2 * ka, y_d.rows(), base.tau.variance(base.tau.steps()), rng);
    const ConstellationPrior cprior(constellation);
    const double s_hi = base.sigma.sigma(out.start_index);
    const double s_lo = base.sigma.sigma_min();
    const double t_hi = base.tau.sigma_max();
    const double t_lo = base.tau.sigma_min();
    const double r_h = base.channel_pc.snr_ratio;
    const double r_x = base.data_pc.snr_ratio;
    const double bound = base.divergence_factor;

    for (std::size_t t = 0; t < iters; ++t) {
        const double frac = iters > 1 ? static_cast<double>(t) / static_cast<double>(iters - 1) : 1.0;
        const double sigma = s_hi * std::pow(s_lo / s_hi, frac);
        const double tau = t_hi * std::pow(t_lo / t_hi, frac);

        const ComplexMatrix s_a = stack_frames(p_a, state_to_data(x));
        const ScoreContext cctx = make_channel_context(s_a, y, noise_var, base.lambda_h);
        const RealMatrix zc = gaussian_sample(h.rows(), h.cols(), 1.0, rng);
        const double t_diff = std::log(sigma / s_lo) / std::log(base.sigma.sigma_max() / s_lo);
        const RealMatrix gh = channel_posterior_score(cctx, prior, h, sigma, t_diff);
        ++out.channel_score_evals;
        CorrectorResult ch = corrector_step(h, gh, sigma, r_h, zc);
        if (!ch.skipped) h = std::move(ch.x);

        const ScoreContext dctx = make_data_context(unstack_real(h), y_d, noise_var, base.lambda_x);
        const RealMatrix zx = gaussian_sample(x.rows(), x.cols(), 1.0, rng);
        const RealMatrix gx = data_posterior_score(dctx, cprior, x, tau);
        ++out.data_score_evals;
        CorrectorResult dx = corrector_step(x, gx, tau, r_x, zx);
        if (!dx.skipped) x = std::move(dx.x);

        if (bound > 0.0) {
            const double hn = h.norm();
            const double xn = x.norm();
            if (!(hn <= bound * std::sqrt(static_cast<double>(h.size()))) ||
                !(xn <= bound * std::sqrt(static_cast<double>(x.size())))) {
                throw DivergenceError("langevin_jcedd diverged at iteration " + std::to_string(t),
                                      t, std::max(hn, xn));
            }
        }
    }
    out.h = unstack_real(h);
    out.x_soft = state_to_data(x);
    out.x_hard = constellation.project(out.x_soft);
    return out;
}

}  // namespace mra
