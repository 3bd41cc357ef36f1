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

#include "mra/system_model.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

namespace mra {

void SystemConfig::validate() const
{
    if (num_users == 0) throw ConfigError("num_users must be >= 1");
    if (!(activity_prob >= 0.0 && activity_prob <= 1.0)) {
        throw ConfigError("activity_prob must lie in [0, 1]");
    }
    if (fixed_active > num_users) throw ConfigError("fixed_active exceeds num_users");
    if (antennas_x == 0 || antennas_y == 0) throw ConfigError("antenna counts must be >= 1");
    if (pilot_length_min > pilot_length || pilot_length > pilot_length_max) {
        throw ConfigError("pilot lengths must satisfy L_p_min <= L_p <= L_p_max (got " +
                          std::to_string(pilot_length_min) + " <= " +
                          std::to_string(pilot_length) + " <= " +
                          std::to_string(pilot_length_max) + ")");
    }
    if (pilot_length == 0) throw ConfigError("pilot_length must be >= 1");
    if (qam_order != 4 && qam_order != 16 && qam_order != 64) {
        throw ConfigError("qam_order must be 4, 16 or 64");
    }
    if (std::isnan(snr_db)) throw ConfigError("snr_db is NaN");
}

ComplexMatrix PilotPool::masked(std::size_t pilot_length) const
{
    ComplexMatrix out = pilots;
    const auto keep = std::min<Eigen::Index>(static_cast<Eigen::Index>(pilot_length), out.rows());
    out.bottomRows(out.rows() - keep).setZero();
    return out;
}

ComplexMatrix PilotPool::active_pilots(const std::vector<std::size_t>& users,
                                       std::size_t pilot_length) const
{
    if (static_cast<Eigen::Index>(pilot_length) > pilots.rows()) {
        throw DimensionError("active_pilots: pilot_length exceeds pool length");
    }
    ComplexMatrix out(pilot_length, users.size());
    for (std::size_t j = 0; j < users.size(); ++j) {
        out.col(j) = pilots.col(users[j]).head(pilot_length);
    }
    return out;
}

std::vector<std::size_t> ActivityVector::active_set() const
{
    std::vector<std::size_t> out;
    for (std::size_t k = 0; k < alpha.size(); ++k) {
        if (alpha[k]) out.push_back(k);
    }
    return out;
}

std::size_t ActivityVector::active_count() const
{
    return static_cast<std::size_t>(std::count(alpha.begin(), alpha.end(), std::uint8_t{1}));
}

ComplexMatrix FrameSet::stacked() const
{
    ComplexMatrix s(pilots.rows() + data.rows(), pilots.cols());
    s.topRows(pilots.rows()) = pilots;
    s.bottomRows(data.rows()) = data;
    return s;
}

ComplexMatrix Transmission::pilot_part() const
{
    return received.topRows(frames.pilots.rows());
}

ComplexMatrix Transmission::data_part() const
{
    return received.bottomRows(frames.data.rows());
}

PilotPool gen_pilot_pool(const SystemConfig& cfg, RngStream& rng)
{
    // Pilots are always unit-modulus 4QAM, independent of the data order.
    const Constellation qpsk(4);
    return PilotPool{qpsk.random_symbols(cfg.pilot_length_max, cfg.num_users, rng)};
}

ActivityVector sample_activity(const SystemConfig& cfg, RngStream& rng)
{
    ActivityVector a;
    a.alpha.assign(cfg.num_users, 0);
    if (cfg.fixed_active > 0) {
        std::vector<std::size_t> idx(cfg.num_users);
        std::iota(idx.begin(), idx.end(), std::size_t{0});
        for (std::size_t i = 0; i < cfg.fixed_active; ++i) {
            const std::size_t j = i + rng.uniform_index(cfg.num_users - i);
            std::swap(idx[i], idx[j]);
            a.alpha[idx[i]] = 1;
        }
        return a;
    }
    for (auto& x : a.alpha) x = rng.bernoulli(cfg.activity_prob) ? 1 : 0;
    return a;
}

ComplexMatrix gen_rayleigh_channels(const SystemConfig& cfg, RngStream& rng)
{
    return complex_gaussian_sample(cfg.num_users, cfg.antennas(), 1.0, rng);
}

double noise_variance_for(const ComplexMatrix& clean_signal, double snr_db)
{
    if (std::isinf(snr_db) && snr_db > 0) return 0.0;
    const double snr = from_db(snr_db);
    const double entries = static_cast<double>(clean_signal.size());
    const double power = entries > 0 ? clean_signal.squaredNorm() / entries : 0.0;
    return (power > 0.0 ? power : 1.0) / snr;
}

Transmission transmit(const SystemConfig& cfg, const PilotPool& pool,
                      const ActivityVector& activity, const ComplexMatrix& channels,
                      const ComplexMatrix& data, RngStream& rng)
{
    const std::size_t m = cfg.antennas();
    if (activity.alpha.size() != cfg.num_users ||
        static_cast<std::size_t>(channels.rows()) != cfg.num_users ||
        static_cast<std::size_t>(channels.cols()) != m) {
        throw DimensionError("transmit: channels " + shape_string(channels.rows(), channels.cols()) +
                             " do not match K x M = " + shape_string(cfg.num_users, m));
    }
    if (static_cast<std::size_t>(pool.pilots.rows()) != cfg.pilot_length_max ||
        static_cast<std::size_t>(pool.pilots.cols()) != cfg.num_users) {
        throw DimensionError("transmit: pilot pool has shape " +
                             shape_string(pool.pilots.rows(), pool.pilots.cols()));
    }
    Transmission tx;
    tx.active = activity.active_set();
    const std::size_t ka = tx.active.size();
    if (static_cast<std::size_t>(data.rows()) != cfg.data_length ||
        static_cast<std::size_t>(data.cols()) != ka) {
        throw DimensionError("transmit: data " + shape_string(data.rows(), data.cols()) +
                             " does not match L_d x K_a = " + shape_string(cfg.data_length, ka));
    }
    tx.frames.pilots = pool.active_pilots(tx.active, cfg.pilot_length);
    tx.frames.data = data;

    ComplexMatrix h_active(ka, m);
    for (std::size_t j = 0; j < ka; ++j) h_active.row(j) = channels.row(tx.active[j]);

    const std::size_t l = cfg.frame_length();
    ComplexMatrix clean = ComplexMatrix::Zero(l, m);
    if (ka > 0) clean = tx.frames.stacked() * h_active;

    tx.noise_variance = noise_variance_for(clean, cfg.snr_db);
    tx.received = clean + complex_gaussian_sample(l, m, tx.noise_variance, rng);

    tx.received_pilot_padded = ComplexMatrix::Zero(cfg.pilot_length_max, m);
    tx.received_pilot_padded.topRows(cfg.pilot_length) = tx.received.topRows(cfg.pilot_length);
    return tx;
}

ComplexMatrix Scenario::active_channels() const
{
    ComplexMatrix out(tx.active.size(), channels.cols());
    for (std::size_t j = 0; j < tx.active.size(); ++j) out.row(j) = channels.row(tx.active[j]);
    return out;
}

Scenario generate_scenario(const SystemConfig& cfg, const ComplexMatrix& channels, RngStream& rng)
{
    cfg.validate();
    Scenario s;
    RngStream pool_rng = rng.fork("pool");
    RngStream activity_rng = rng.fork("activity");
    RngStream data_rng = rng.fork("data");
    RngStream noise_rng = rng.fork("noise");
    s.pool = gen_pilot_pool(cfg, pool_rng);
    s.activity = sample_activity(cfg, activity_rng);
    s.channels = channels;
    const Constellation c(cfg.qam_order);
    const ComplexMatrix data = c.random_symbols(cfg.data_length, s.activity.active_count(), data_rng);
    s.tx = transmit(cfg, s.pool, s.activity, s.channels, data, noise_rng);
    return s;
}

Scenario generate_scenario(const SystemConfig& cfg, RngStream& rng)
{
    RngStream channel_rng = rng.fork("channels");
    return generate_scenario(cfg, gen_rayleigh_channels(cfg, channel_rng), rng);
}

std::uint64_t scenario_checksum(const Scenario& s)
{
    std::uint64_t h = 0xcbf29ce484222325ULL;
    const auto feed = [&h](const void* p, std::size_t n) {
        const auto* b = static_cast<const unsigned char*>(p);
        for (std::size_t i = 0; i < n; ++i) {
            h ^= b[i];
            h *= 0x100000001b3ULL;
        }
    };
    feed(s.activity.alpha.data(), s.activity.alpha.size());
    feed(&s.tx.noise_variance, sizeof(double));
    feed(s.tx.received.data(), sizeof(Complex) * static_cast<std::size_t>(s.tx.received.size()));
    return h;
}

}  // namespace mra
