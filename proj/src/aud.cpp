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

#include "mra/aud.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace mra {

namespace {

void check_shapes(const ComplexMatrix& y_p, const ComplexMatrix& pilots, const char* who)
{
    if (y_p.rows() != pilots.rows()) {
        throw DimensionError(std::string(who) + ": Y_p " + shape_string(y_p.rows(), y_p.cols()) +
                             " vs pilots " + shape_string(pilots.rows(), pilots.cols()));
    }
}

/// Number of leading rows up to the last nonzero pilot row.
Eigen::Index effective_rows(const ComplexMatrix& pilots)
{
    for (Eigen::Index r = pilots.rows(); r > 0; --r) {
        if (pilots.row(r - 1).squaredNorm() > 0.0) return r;
    }
    return 0;
}

double sigmoid(double z)
{
    if (z >= 0) return 1.0 / (1.0 + std::exp(-z));
    const double e = std::exp(z);
    return e / (1.0 + e);
}

}  // namespace

std::vector<std::uint8_t> threshold_scores(const RealVector& scores, double threshold)
{
    std::vector<std::uint8_t> alpha(static_cast<std::size_t>(scores.size()));
    for (Eigen::Index k = 0; k < scores.size(); ++k) alpha[k] = scores(k) > threshold ? 1 : 0;
    return alpha;
}

AudResult omp_aud(const ComplexMatrix& y_p, const ComplexMatrix& pilots, const OmpConfig& cfg)
{
    check_shapes(y_p, pilots, "omp_aud");
    const Eigen::Index k_users = pilots.cols();
    const Eigen::Index m = y_p.cols();
    std::size_t k_max = cfg.k_max;
    if (k_max == 0) k_max = static_cast<std::size_t>(std::ceil(1.5 * cfg.expected_active));
    k_max = std::min<std::size_t>(k_max, static_cast<std::size_t>(
                                             std::min(k_users, effective_rows(pilots))));

    AudResult out;
    out.alpha.assign(static_cast<std::size_t>(k_users), 0);
    out.scores = RealVector::Zero(k_users);
    out.h = ComplexMatrix::Zero(k_users, m);

    const double y_norm = y_p.norm();
    if (y_norm == 0.0 || k_max == 0) return out;

    const RealVector col_norm = pilots.colwise().norm().transpose();
    std::vector<Eigen::Index> support;
    std::vector<bool> chosen(static_cast<std::size_t>(k_users), false);
    ComplexMatrix residual = y_p;
    ComplexMatrix coef;

    while (support.size() < k_max) {
        const ComplexMatrix corr = pilots.adjoint() * residual;
        Eigen::Index best = -1;
        double best_val = -1.0;
        for (Eigen::Index k = 0; k < k_users; ++k) {
            if (chosen[k] || col_norm(k) == 0.0) continue;
            const double v = corr.row(k).norm() / col_norm(k);
            if (v > best_val) {
                best_val = v;
                best = k;
            }
        }
        if (best < 0) break;
        support.push_back(best);
        chosen[best] = true;

        ComplexMatrix ps(pilots.rows(), static_cast<Eigen::Index>(support.size()));
        for (std::size_t j = 0; j < support.size(); ++j) ps.col(j) = pilots.col(support[j]);
        const ComplexMatrix psh = ps.adjoint();
        coef = solve_full_rank(psh * ps, psh * y_p, "omp_aud refit");
        residual = y_p - ps * coef;
        out.residual_trace.push_back(residual.norm() / y_norm);
        ++out.iterations;
        if (out.residual_trace.back() < cfg.residual_tol) break;
    }

    for (std::size_t j = 0; j < support.size(); ++j) {
        out.h.row(support[j]) = coef.row(j);
        out.scores(support[j]) = coef.row(j).squaredNorm() / static_cast<double>(m);
    }
    out.alpha = threshold_scores(out.scores, cfg.energy_threshold);
    return out;
}

AudResult amp_aud(const ComplexMatrix& y_full, const ComplexMatrix& pilots_full, const AmpConfig& cfg)
{
    check_shapes(y_full, pilots_full, "amp_aud");
    const Eigen::Index l = effective_rows(pilots_full);
    const Eigen::Index k_users = pilots_full.cols();
    const Eigen::Index m = y_full.cols();

    AudResult out;
    out.alpha.assign(static_cast<std::size_t>(k_users), 0);
    out.scores = RealVector::Zero(k_users);
    out.h = ComplexMatrix::Zero(k_users, m);
    if (l == 0 || cfg.activity_prob <= 0.0) return out;

    const double sqrt_l = std::sqrt(static_cast<double>(l));
    const ComplexMatrix a = pilots_full.topRows(l) / sqrt_l;
    const ComplexMatrix ah = a.adjoint();
    const ComplexMatrix y = y_full.topRows(l);
    const double g = static_cast<double>(l) * cfg.channel_variance;
    const double log_prior = std::log(cfg.activity_prob) - std::log1p(-cfg.activity_prob);
    const double lm = static_cast<double>(l * m);
    const double tau_floor = 1e-14 * std::max(y.squaredNorm() / lm, 1e-300);
    const double md = static_cast<double>(m);

    auto run = [&](double beta, AudResult& res) -> bool {
        ComplexMatrix x = ComplexMatrix::Zero(k_users, m);
        ComplexMatrix z = y;
        RealVector pi = RealVector::Zero(k_users);
        res.residual_trace.clear();
        const double tau0 = std::max(z.squaredNorm() / lm, tau_floor);
        for (std::size_t t = 0; t < cfg.iterations; ++t) {
            const double tau2 = std::max(z.squaredNorm() / lm, tau_floor);
            res.residual_trace.push_back(tau2);
            if (!std::isfinite(tau2) || tau2 > 1e8 * tau0) return false;
            const ComplexMatrix r = x + ah * z;
            const double c = g / (g + tau2);
            const double delta = 1.0 / tau2 - 1.0 / (g + tau2);
            const double log_ratio = md * std::log((g + tau2) / tau2);
            ComplexMatrix x_new(k_users, m);
            double div_sum = 0.0;
            for (Eigen::Index k = 0; k < k_users; ++k) {
                const double e = r.row(k).squaredNorm();
                const double p = sigmoid(log_prior - log_ratio + e * delta);
                pi(k) = p;
                x_new.row(k) = (p * c) * r.row(k);
                div_sum += c * p + c * (e / md) * p * (1.0 - p) * delta;
            }
            const ComplexMatrix z_new = y - a * x_new + (div_sum / static_cast<double>(l)) * z;
            const double change = (x_new - x).norm();
            x = beta * x_new + (1.0 - beta) * x;
            z = beta * z_new + (1.0 - beta) * z;
            ++res.iterations;
            if (!all_finite(x)) return false;
            if (change <= cfg.tolerance * std::max(x.norm(), 1e-300)) break;
        }
        res.scores = pi;
        res.h = x / sqrt_l;
        return true;
    };

    if (!run(1.0, out)) {
        out.diverged = true;
        out.iterations = 0;
        if (!run(cfg.damping, out)) {
            out.scores = RealVector::Zero(k_users);
            out.h = ComplexMatrix::Zero(k_users, m);
        }
    }
    out.alpha = threshold_scores(out.scores, cfg.threshold);
    return out;
}

AudResult oracle_aus(const ActivityVector& activity)
{
    AudResult out;
    out.alpha = activity.alpha;
    out.scores = RealVector(static_cast<Eigen::Index>(activity.alpha.size()));
    for (std::size_t k = 0; k < activity.alpha.size(); ++k) out.scores(k) = activity.alpha[k];
    return out;
}

}  // namespace mra
