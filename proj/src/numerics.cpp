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

#include "mra/numerics.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace mra {

std::string shape_string(std::size_t rows, std::size_t cols)
{
    return std::to_string(rows) + "x" + std::to_string(cols);
}

RealMatrix real_embed(const ComplexMatrix& m)
{
    const Eigen::Index r = m.rows();
    const Eigen::Index c = m.cols();
    RealMatrix out(2 * r, 2 * c);
    out.topLeftCorner(r, c) = m.real();
    out.topRightCorner(r, c) = -m.imag();
    out.bottomLeftCorner(r, c) = m.imag();
    out.bottomRightCorner(r, c) = m.real();
    return out;
}

RealMatrix stack_real(const ComplexMatrix& m)
{
    RealMatrix out(2 * m.rows(), m.cols());
    out.topRows(m.rows()) = m.real();
    out.bottomRows(m.rows()) = m.imag();
    return out;
}

ComplexMatrix unstack_real(const RealMatrix& m)
{
    if (m.rows() % 2 != 0) {
        throw DimensionError("unstack_real: odd row count " +
                             shape_string(m.rows(), m.cols()));
    }
    const Eigen::Index r = m.rows() / 2;
    ComplexMatrix out(r, m.cols());
    out.real() = m.topRows(r);
    out.imag() = m.bottomRows(r);
    return out;
}

SvdFactors svd(const RealMatrix& m)
{
    if (m.size() == 0) {
        throw NumericError("svd: empty matrix " + shape_string(m.rows(), m.cols()));
    }
    if (!all_finite(m)) {
        throw NumericError("svd: non-finite entries in " + shape_string(m.rows(), m.cols()));
    }
    // Column-major copy: JacobiSVD is tuned for it and the input is small.
    const Eigen::MatrixXd a = m;
    Eigen::JacobiSVD<Eigen::MatrixXd> solver(a, Eigen::ComputeThinU | Eigen::ComputeThinV);
    if (solver.info() != Eigen::Success) {
        throw NumericError("svd: no convergence for " + shape_string(m.rows(), m.cols()));
    }
    return SvdFactors{solver.matrixU(), solver.singularValues(), solver.matrixV()};
}

RealMatrix reconstruct(const SvdFactors& f)
{
    return f.u * f.sigma.asDiagonal() * f.v.transpose();
}

bool all_finite(const RealMatrix& m)
{
    return m.allFinite();
}

bool all_finite(const ComplexMatrix& m)
{
    return m.real().allFinite() && m.imag().allFinite();
}

void require_finite(const RealMatrix& m, std::string_view what)
{
    if (!all_finite(m)) {
        throw NumericError(std::string(what) + ": non-finite entries in " +
                           shape_string(m.rows(), m.cols()));
    }
}

void require_finite(const ComplexMatrix& m, std::string_view what)
{
    if (!all_finite(m)) {
        throw NumericError(std::string(what) + ": non-finite entries in " +
                           shape_string(m.rows(), m.cols()));
    }
}

namespace {

// splitmix64 finalizer
std::uint64_t mix(std::uint64_t x)
{
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

std::uint64_t hash_name(std::string_view name)
{
    std::uint64_t h = 0xcbf29ce484222325ULL;  // FNV-1a
    for (unsigned char c : name) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    return h;
}

std::mt19937_64 seeded_engine(std::uint64_t key)
{
    std::seed_seq seq{static_cast<std::uint32_t>(key), static_cast<std::uint32_t>(key >> 32)};
    return std::mt19937_64(seq);
}

}  // namespace

RngStream::RngStream(std::uint64_t seed, std::string_view name)
    : RngStream(mix(mix(seed) ^ hash_name(name)), 0)
{
}

RngStream::RngStream(std::uint64_t key, int) : key_(key), engine_(seeded_engine(key)) {}

RngStream RngStream::fork(std::string_view name, std::uint64_t index) const
{
    return RngStream(mix(mix(key_ ^ hash_name(name)) + index), 0);
}

double RngStream::normal()
{
    return normal_(engine_);
}

double RngStream::uniform()
{
    return std::uniform_real_distribution<double>(0.0, 1.0)(engine_);
}

bool RngStream::bernoulli(double p)
{
    if (p <= 0.0) return false;
    if (p >= 1.0) return true;
    return uniform() < p;
}

std::size_t RngStream::uniform_index(std::size_t n)
{
    return std::uniform_int_distribution<std::size_t>(0, n - 1)(engine_);
}

RealMatrix gaussian_sample(std::size_t rows, std::size_t cols, double variance_per_component,
                           RngStream& rng)
{
    if (!(variance_per_component >= 0.0)) {
        throw std::invalid_argument("gaussian_sample: negative variance");
    }
    RealMatrix out(rows, cols);
    if (variance_per_component == 0.0) {
        out.setZero();
        return out;
    }
    const double sd = std::sqrt(variance_per_component);
    for (Eigen::Index i = 0; i < out.size(); ++i) out.data()[i] = sd * rng.normal();
    return out;
}

ComplexMatrix complex_gaussian_sample(std::size_t rows, std::size_t cols, double variance,
                                      RngStream& rng)
{
    if (!(variance >= 0.0)) {
        throw std::invalid_argument("complex_gaussian_sample: negative variance");
    }
    const double sd = std::sqrt(variance / 2.0);
    ComplexMatrix out(rows, cols);
    for (Eigen::Index i = 0; i < out.size(); ++i) {
        const double re = rng.normal();
        const double im = rng.normal();
        out.data()[i] = Complex(sd * re, sd * im);
    }
    return out;
}

ComplexMatrix solve_full_rank(const ComplexMatrix& a, const ComplexMatrix& b, std::string_view what)
{
    if (a.rows() != a.cols() || a.rows() != b.rows()) {
        throw DimensionError(std::string(what) + ": system " + shape_string(a.rows(), a.cols()) +
                             " with right-hand side " + shape_string(b.rows(), b.cols()));
    }
    using ColMajor = Eigen::Matrix<Complex, Eigen::Dynamic, Eigen::Dynamic>;
    const Eigen::FullPivLU<ColMajor> lu{ColMajor(a)};
    if (!lu.isInvertible()) {
        throw RankError(std::string(what) + ": matrix " + shape_string(a.rows(), a.cols()) +
                        " has rank " + std::to_string(lu.rank()));
    }
    return lu.solve(ColMajor(b));
}

ComplexMatrix inverse_full_rank(const ComplexMatrix& a, std::string_view what)
{
    return solve_full_rank(a, ComplexMatrix::Identity(a.rows(), a.cols()), what);
}

double to_db(double linear)
{
    return 10.0 * std::log10(linear);
}

double from_db(double db)
{
    return std::pow(10.0, db / 10.0);
}

}  // namespace mra
