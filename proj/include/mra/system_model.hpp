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

// Uplink grant-free transmission model.
//
//   Y = S A H_bar + W = S H + W,   S = [P; X]  (L x K),  H = A H_bar  (K x M)
//
// Each user owns one column of an L_p_max x K pilot pool; only the first L_p
// symbols are sent, so the receiver sees the pool masked to its first L_p rows
// and the received pilot block zero-padded to L_p_max rows.

#pragma once

#include <cstddef>
#include <cstdint>
#include <limits>
#include <vector>

#include "mra/constellation.hpp"
#include "mra/numerics.hpp"

namespace mra {

struct SystemConfig {
    std::size_t num_users = 128;        // K
    double activity_prob = 0.1;
    std::size_t fixed_active = 0;       // > 0: exactly this many active users
    std::size_t antennas_x = 8;
    std::size_t antennas_y = 8;
    std::size_t pilot_length_max = 28;
    std::size_t pilot_length_min = 8;
    std::size_t pilot_length = 15;
    std::size_t data_length = 50;
    unsigned qam_order = 4;
    double snr_db = 10.0;               // +inf: noiseless
    std::uint64_t seed = 0;

    std::size_t antennas() const noexcept { return antennas_x * antennas_y; }
    std::size_t frame_length() const noexcept { return pilot_length + data_length; }
    /// Throws ConfigError on any violated invariant.
    void validate() const;
};

/// L_p_max x K pool; column k is bound to user k.
struct PilotPool {
    ComplexMatrix pilots;

    /// Pool with rows >= pilot_length zeroed (same shape as the pool).
    ComplexMatrix masked(std::size_t pilot_length) const;
    /// First pilot_length rows of the given user columns.
    ComplexMatrix active_pilots(const std::vector<std::size_t>& users,
                                std::size_t pilot_length) const;
};

struct ActivityVector {
    std::vector<std::uint8_t> alpha;

    std::vector<std::size_t> active_set() const;
    std::size_t active_count() const;
};

/// Frames of the active users: pilots (L_p x K_a), data (L_d x K_a).
struct FrameSet {
    ComplexMatrix pilots;
    ComplexMatrix data;

    /// S_a = [P_a; X_a].
    ComplexMatrix stacked() const;
};

struct Transmission {
    ComplexMatrix received;          // Y, L x M
    ComplexMatrix received_pilot_padded;  // L_p_max x M, rows >= L_p zero
    double noise_variance = 0.0;     // complex sigma_n^2
    FrameSet frames;
    std::vector<std::size_t> active;

    ComplexMatrix pilot_part() const;  // Y_p
    ComplexMatrix data_part() const;   // Y_d
};

PilotPool gen_pilot_pool(const SystemConfig& cfg, RngStream& rng);
ActivityVector sample_activity(const SystemConfig& cfg, RngStream& rng);
/// K x M i.i.d. CN(0, 1).
ComplexMatrix gen_rayleigh_channels(const SystemConfig& cfg, RngStream& rng);

/// Noise variance giving the configured SNR on a realized noiseless signal:
/// sigma_n^2 = ||S H||_F^2 / (L M snr). Falls back to one unit-power user when
/// the signal is empty; zero when snr_db is +inf.
double noise_variance_for(const ComplexMatrix& clean_signal, double snr_db);

/// channels: K x M (rows of inactive users are ignored); data: L_d x K_a for the
/// active users in ascending order. Throws DimensionError on inconsistent shapes.
Transmission transmit(const SystemConfig& cfg, const PilotPool& pool,
                      const ActivityVector& activity, const ComplexMatrix& channels,
                      const ComplexMatrix& data, RngStream& rng);

/// One fully realized random-access frame.
struct Scenario {
    PilotPool pool;
    ActivityVector activity;
    ComplexMatrix channels;        // K x M
    Transmission tx;

    /// Channels of the active users (K_a x M), the CE target.
    ComplexMatrix active_channels() const;
};

/// Generates pool, activity, Rayleigh channels, data and the received signal.
/// The same stream always produces the same scenario.
Scenario generate_scenario(const SystemConfig& cfg, RngStream& rng);

/// Scenario with a caller-supplied channel matrix (e.g. drawn from a dataset).
Scenario generate_scenario(const SystemConfig& cfg, const ComplexMatrix& channels,
                           RngStream& rng);

/// FNV-1a over the activity pattern, noise variance and received samples.
std::uint64_t scenario_checksum(const Scenario& s);

inline constexpr double kNoiselessSnr = std::numeric_limits<double>::infinity();

}  // namespace mra
