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

#include "mra/channel_dataset.hpp"

#include <bit>
#include <cstring>
#include <fstream>
#include <iterator>

namespace mra {

static_assert(std::endian::native == std::endian::little,
              "dataset I/O assumes a little-endian host");

namespace {

constexpr char kMagic[4] = {'M', 'R', 'A', '1'};
constexpr std::uint32_t kVersion = 1;

void put_u32(std::string& buf, std::uint32_t v)
{
    char b[4];
    std::memcpy(b, &v, 4);
    buf.append(b, 4);
}

std::uint32_t get_u32(const std::string& buf, std::size_t offset)
{
    std::uint32_t v;
    std::memcpy(&v, buf.data() + offset, 4);
    return v;
}

}  // namespace

ComplexVector ChannelDataset::sample(std::size_t i) const
{
    const std::size_t m = antennas();
    ComplexVector h(m);
    for (std::size_t j = 0; j < m; ++j) {
        const auto& e = entries[i * m + j];
        h(j) = Complex(e.real(), e.imag());
    }
    return h;
}

void ChannelDataset::push_back(const ComplexVector& h)
{
    if (static_cast<std::size_t>(h.size()) != antennas()) {
        throw DimensionError("ChannelDataset::push_back: sample has " + std::to_string(h.size()) +
                             " entries, grid holds " + std::to_string(antennas()));
    }
    for (Eigen::Index j = 0; j < h.size(); ++j) {
        entries.emplace_back(static_cast<float>(h(j).real()), static_cast<float>(h(j).imag()));
    }
}

void save_channel_dataset(const ChannelDataset& ds, const std::string& path)
{
    std::string buf;
    buf.reserve(kDatasetHeaderBytes + ds.entries.size() * 8);
    buf.append(kMagic, 4);
    put_u32(buf, kVersion);
    put_u32(buf, static_cast<std::uint32_t>(ds.size()));
    put_u32(buf, ds.antennas_x);
    put_u32(buf, ds.antennas_y);
    for (const auto& e : ds.entries) {
        const float re = e.real();
        const float im = e.imag();
        char b[8];
        std::memcpy(b, &re, 4);
        std::memcpy(b + 4, &im, 4);
        buf.append(b, 8);
    }
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw DatasetError(DatasetError::Kind::Io, "cannot open " + path + " for writing");
    out.write(buf.data(), static_cast<std::streamsize>(buf.size()));
    if (!out) throw DatasetError(DatasetError::Kind::Io, "write failed: " + path);
}

ChannelDataset load_channel_dataset(
    const std::string& path, std::optional<std::pair<std::uint32_t, std::uint32_t>> expected_grid)
{
    std::ifstream in(path, std::ios::binary);
    if (!in) throw DatasetError(DatasetError::Kind::Io, "cannot open " + path);
    const std::string buf((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());

    if (buf.size() < kDatasetHeaderBytes) {
        if (buf.size() >= 4 && std::memcmp(buf.data(), kMagic, 4) != 0) {
            throw DatasetError(DatasetError::Kind::BadMagic, path + ": bad magic");
        }
        throw DatasetError(DatasetError::Kind::Truncated,
                           path + ": truncated header, expected " +
                               std::to_string(kDatasetHeaderBytes) + " bytes, got " +
                               std::to_string(buf.size()));
    }
    if (std::memcmp(buf.data(), kMagic, 4) != 0) {
        throw DatasetError(DatasetError::Kind::BadMagic, path + ": bad magic");
    }
    const std::uint32_t version = get_u32(buf, 4);
    if (version != kVersion) {
        throw DatasetError(DatasetError::Kind::UnsupportedVersion,
                           path + ": unsupported version " + std::to_string(version));
    }
    ChannelDataset ds;
    const std::uint32_t n = get_u32(buf, 8);
    ds.antennas_x = get_u32(buf, 12);
    ds.antennas_y = get_u32(buf, 16);
    if (expected_grid &&
        (expected_grid->first != ds.antennas_x || expected_grid->second != ds.antennas_y)) {
        throw DatasetError(DatasetError::Kind::DimensionMismatch,
                           path + ": grid " + shape_string(ds.antennas_x, ds.antennas_y) +
                               ", expected " +
                               shape_string(expected_grid->first, expected_grid->second));
    }
    const std::size_t count = std::size_t{n} * ds.antennas();
    const std::size_t expected = kDatasetHeaderBytes + count * 8;
    if (buf.size() < expected) {
        throw DatasetError(DatasetError::Kind::Truncated,
                           path + ": truncated payload, expected " + std::to_string(expected) +
                               " bytes, got " + std::to_string(buf.size()));
    }
    if (buf.size() > expected) {
        throw DatasetError(DatasetError::Kind::DimensionMismatch,
                           path + ": header declares " + std::to_string(expected) +
                               " bytes, file has " + std::to_string(buf.size()));
    }
    ds.entries.resize(count);
    for (std::size_t i = 0; i < count; ++i) {
        float re, im;
        std::memcpy(&re, buf.data() + kDatasetHeaderBytes + 8 * i, 4);
        std::memcpy(&im, buf.data() + kDatasetHeaderBytes + 8 * i + 4, 4);
        ds.entries[i] = {re, im};
    }
    return ds;
}

ComplexMatrix channels_from_dataset(const ChannelDataset& ds, std::size_t users, RngStream& rng)
{
    if (ds.size() == 0) throw DimensionError("channels_from_dataset: empty dataset");
    ComplexMatrix h(users, ds.antennas());
    for (std::size_t k = 0; k < users; ++k) h.row(k) = ds.sample(rng.uniform_index(ds.size())).transpose();
    return h;
}

}  // namespace mra
