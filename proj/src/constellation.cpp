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

#include "mra/constellation.hpp"

#include <bit>
#include <cmath>
#include <string>

namespace mra {

Constellation::Constellation(unsigned order) : order_(order)
{
    if (order != 4 && order != 16 && order != 64) {
        throw ConfigError("unsupported QAM order " + std::to_string(order) +
                          " (expected 4, 16 or 64)");
    }
    side_ = static_cast<unsigned>(std::lround(std::sqrt(static_cast<double>(order))));
    bits_ = static_cast<unsigned>(std::countr_zero(order));
    // E|s|^2 = 2 * (side^2 - 1) / 3 before scaling.
    const double scale = std::sqrt(2.0 * (order - 1.0) / 3.0);
    levels_.reserve(side_);
    for (unsigned l = 0; l < side_; ++l) {
        levels_.push_back((2.0 * l - (side_ - 1.0)) / scale);
    }
}

Complex Constellation::symbol(std::size_t index) const
{
    return {levels_[index / side_], levels_[index % side_]};
}

std::size_t Constellation::level_index(double x) const
{
    // Levels are equispaced: round onto the grid and clamp.
    const double step = levels_[1] - levels_[0];
    const long idx = std::lround((x - levels_[0]) / step);
    if (idx < 0) return 0;
    if (idx >= static_cast<long>(side_)) return side_ - 1;
    return static_cast<std::size_t>(idx);
}

double Constellation::project_level(double x) const
{
    return levels_[level_index(x)];
}

std::size_t Constellation::nearest_index(Complex z) const
{
    return level_index(z.real()) * side_ + level_index(z.imag());
}

std::uint32_t Constellation::label(std::size_t index) const
{
    const auto gray = [](std::uint32_t v) { return v ^ (v >> 1); };
    const auto i = static_cast<std::uint32_t>(index / side_);
    const auto q = static_cast<std::uint32_t>(index % side_);
    const unsigned half = bits_ / 2;
    return (gray(i) << half) | gray(q);
}

ComplexMatrix Constellation::random_symbols(std::size_t rows, std::size_t cols,
                                            RngStream& rng) const
{
    ComplexMatrix out(rows, cols);
    for (Eigen::Index i = 0; i < out.size(); ++i) out.data()[i] = symbol(rng.uniform_index(order_));
    return out;
}

ComplexMatrix Constellation::project(const ComplexMatrix& m) const
{
    ComplexMatrix out(m.rows(), m.cols());
    for (Eigen::Index i = 0; i < m.size(); ++i) out.data()[i] = project(m.data()[i]);
    return out;
}

std::size_t Constellation::bit_errors(const ComplexMatrix& truth,
                                      const ComplexMatrix& detected) const
{
    if (truth.rows() != detected.rows() || truth.cols() != detected.cols()) {
        throw DimensionError("bit_errors: shape mismatch " +
                             shape_string(truth.rows(), truth.cols()) + " vs " +
                             shape_string(detected.rows(), detected.cols()));
    }
    std::size_t errors = 0;
    for (Eigen::Index i = 0; i < truth.size(); ++i) {
        const auto a = label(nearest_index(truth.data()[i]));
        const auto b = label(nearest_index(detected.data()[i]));
        errors += static_cast<std::size_t>(std::popcount(a ^ b));
    }
    return errors;
}

}  // namespace mra
