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

// Dense real/complex algebra substrate shared by every module.
//
// Complex models y = A x + w are handled in one of two real forms:
//   real_embed(A)  = [[Re A, -Im A], [Im A, Re A]]   (operators)
//   stack_real(X)  = [Re X; Im X]                      (variables)
// so that stack_real(A X) == real_embed(A) * stack_real(X).

#pragma once

#include <complex>
#include <cstdint>
#include <random>
#include <string_view>

#include <Eigen/Dense>

#include "mra/errors.hpp"

namespace mra {

using Complex = std::complex<double>;

using RealMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using ComplexMatrix = Eigen::Matrix<Complex, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using RealVector = Eigen::VectorXd;
using ComplexVector = Eigen::VectorXcd;

/// Thin SVD M = U diag(sigma) V^T with sigma sorted descending.
struct SvdFactors {
    RealMatrix u;       // rows(M) x r
    RealVector sigma;   // r = min(rows, cols)
    RealMatrix v;       // cols(M) x r
};

/// [[Re M, -Im M], [Im M, Re M]]; a ring homomorphism on products and sums.
RealMatrix real_embed(const ComplexMatrix& m);

/// [Re M; Im M], the real-valued representation of a complex variable.
RealMatrix stack_real(const ComplexMatrix& m);

/// Inverse of stack_real. Throws DimensionError for an odd row count.
ComplexMatrix unstack_real(const RealMatrix& m);

/// Throws NumericError for an empty input or one with non-finite entries
/// (NumericError message names the dimensions).
SvdFactors svd(const RealMatrix& m);

/// U diag(sigma) V^T.
RealMatrix reconstruct(const SvdFactors& f);

bool all_finite(const RealMatrix& m);
bool all_finite(const ComplexMatrix& m);
void require_finite(const RealMatrix& m, std::string_view what);
void require_finite(const ComplexMatrix& m, std::string_view what);

/// Deterministic random stream.
///
/// Every random draw in the library goes through a named stream. A stream is
/// fully determined by (root seed, name, index path), so replaying a seed
/// replays every draw in order and distinct trials never share state.
class RngStream {
public:
    explicit RngStream(std::uint64_t seed, std::string_view name = "root");

    /// Child stream keyed by name and an optional index (trial, sweep point, ...).
    RngStream fork(std::string_view name, std::uint64_t index = 0) const;

    std::uint64_t key() const noexcept { return key_; }

    double normal();
    double uniform();
    bool bernoulli(double p);
    std::size_t uniform_index(std::size_t n);

    std::mt19937_64& engine() noexcept { return engine_; }

private:
    explicit RngStream(std::uint64_t key, int);

    std::uint64_t key_;
    std::mt19937_64 engine_;
    std::normal_distribution<double> normal_{0.0, 1.0};
};

/// I.i.d. N(0, variance) entries. Negative variance throws std::invalid_argument.
RealMatrix gaussian_sample(std::size_t rows, std::size_t cols, double variance_per_component,
                           RngStream& rng);

/// I.i.d. CN(0, variance) entries (variance/2 per real component).
ComplexMatrix complex_gaussian_sample(std::size_t rows, std::size_t cols, double variance,
                                      RngStream& rng);

/// Solves A X = B for square A; RankError names `what` when A is singular.
ComplexMatrix solve_full_rank(const ComplexMatrix& a, const ComplexMatrix& b, std::string_view what);

/// Inverse of a square matrix; RankError when singular.
ComplexMatrix inverse_full_rank(const ComplexMatrix& a, std::string_view what);

/// 10 log10(x).
double to_db(double linear);
double from_db(double db);

}  // namespace mra
