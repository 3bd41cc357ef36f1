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
#include <stdexcept>
#include <string>

namespace mra {

/// Base of every error raised by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class DimensionError : public Error {
public:
    using Error::Error;
};

/// Numerical failure (non-finite input, SVD convergence, divergence).
class NumericError : public Error {
public:
    using Error::Error;
};

/// A matrix that must have full rank does not.
class RankError : public Error {
public:
    using Error::Error;
};

class ConfigError : public Error {
public:
    using Error::Error;
};

/// Sampler state norm exceeded the divergence bound.
class DivergenceError : public NumericError {
public:
    DivergenceError(const std::string& what, std::size_t step, double norm)
        : NumericError(what), step_(step), norm_(norm) {}
    std::size_t step() const noexcept { return step_; }
    double norm() const noexcept { return norm_; }

private:
    std::size_t step_;
    double norm_;
};

std::string shape_string(std::size_t rows, std::size_t cols);

}  // namespace mra
