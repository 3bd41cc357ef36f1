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

#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

#include "mra/numerics.hpp"

namespace mra {

/// Unit-energy square QAM with Gray labeling per real dimension.
///
/// Symbol index layout: index = i_level * side + q_level, where the bit label
/// is gray(i_level) followed by gray(q_level), most significant bit first.
class Constellation {
public:
    /// order in {4, 16, 64}; anything else throws ConfigError.
    explicit Constellation(unsigned order = 4);

    unsigned order() const noexcept { return order_; }
    unsigned side() const noexcept { return side_; }
    unsigned bits_per_symbol() const noexcept { return bits_; }

    /// Per-real-dimension alphabet, ascending, symmetric about 0.
    const std::vector<double>& levels() const noexcept { return levels_; }

    Complex symbol(std::size_t index) const;
    /// Nearest symbol index (per-dimension slicing).
    std::size_t nearest_index(Complex z) const;
    Complex project(Complex z) const { return symbol(nearest_index(z)); }
    /// Nearest alphabet value for one real dimension.
    double project_level(double x) const;

    /// Gray label of a symbol, MSB first.
    std::uint32_t label(std::size_t index) const;

    /// Uniform i.i.d. symbols.
    ComplexMatrix random_symbols(std::size_t rows, std::size_t cols, RngStream& rng) const;

    /// Entrywise nearest-point projection.
    ComplexMatrix project(const ComplexMatrix& m) const;

    /// Number of differing Gray bits between the hard decisions of two matrices.
    std::size_t bit_errors(const ComplexMatrix& truth, const ComplexMatrix& detected) const;

private:
    std::size_t level_index(double x) const;

    unsigned order_;
    unsigned side_;
    unsigned bits_;
    std::vector<double> levels_;
};

}  // namespace mra
