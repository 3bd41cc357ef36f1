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

// Binary channel dataset, little-endian:
//
//   offset 0   char[4]  magic "MRA1"
//   offset 4   u32      version (= 1)
//   offset 8   u32      n_samples
//   offset 12  u32      M_x
//   offset 16  u32      M_y
//   offset 20  n * M_x * M_y entries of (f32 re, f32 im), sample-major then row-major

#pragma once

#include <complex>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "mra/numerics.hpp"

namespace mra {

class DatasetError : public Error {
public:
    enum class Kind { Io, BadMagic, UnsupportedVersion, Truncated, DimensionMismatch };

    DatasetError(Kind kind, const std::string& what) : Error(what), kind_(kind) {}
    Kind kind() const noexcept { return kind_; }

private:
    Kind kind_;
};

struct ChannelDataset {
    std::uint32_t antennas_x = 0;
    std::uint32_t antennas_y = 0;
    std::vector<std::complex<float>> entries;  // size() * antennas_x * antennas_y

    std::size_t antennas() const noexcept { return std::size_t{antennas_x} * antennas_y; }
    std::size_t size() const noexcept { return antennas() ? entries.size() / antennas() : 0; }

    /// Sample i flattened to M entries (row-major over the M_x x M_y grid).
    ComplexVector sample(std::size_t i) const;
    void push_back(const ComplexVector& h);
};

inline constexpr std::size_t kDatasetHeaderBytes = 20;

void save_channel_dataset(const ChannelDataset& ds, const std::string& path);

/// When expected_grid is given, a header declaring a different M_x x M_y grid
/// is a DimensionMismatch.
ChannelDataset load_channel_dataset(
    const std::string& path,
    std::optional<std::pair<std::uint32_t, std::uint32_t>> expected_grid = std::nullopt);

/// K x M channel matrix with rows drawn uniformly (with replacement) from ds.
ComplexMatrix channels_from_dataset(const ChannelDataset& ds, std::size_t users, RngStream& rng);

}  // namespace mra
