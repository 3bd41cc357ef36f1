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

// Client for an external channel score provider.
//
// Every message is a u32 little-endian byte count followed by a JSON payload
// terminated by '\n' (the count includes the newline):
//
//   client -> {"kind":"hello","version":1}
//   provider -> {"kind":"ready","M_x":8,"M_y":8}
//   client -> {"id":7,"kind":"score","t":0.4,"sigma":1.2,"tensors":[n][2][M_x][M_y]}
//   provider -> {"id":7,"kind":"score_ok","tensors":[n][2][M_x][M_y]}
//             | {"id":7,"kind":"error","message":"..."}
//
// One request is in flight per handle. Endpoints are "exec:<command line>"
// (child process over stdio, whitespace-split argv) or "unix:<socket path>".

#pragma once

#include <chrono>
#include <cstddef>
#include <cstdint>
#include <memory>
#include <string>
#include <vector>

#include <json.hpp>

#include "mra/channel_scores.hpp"
#include "mra/errors.hpp"
#include "mra/numerics.hpp"

namespace mra {

class ProviderError : public Error {
public:
    using Error::Error;
};

/// Malformed frame, unexpected message kind, id mismatch or bad tensor shape.
class ProtocolError : public ProviderError {
public:
    using ProviderError::ProviderError;
};

class ProviderTimeout : public ProviderError {
public:
    using ProviderError::ProviderError;
};

/// The provider answered a request with kind "error".
class ProviderRemoteError : public ProviderError {
public:
    ProviderRemoteError(std::uint64_t id, const std::string& message)
        : ProviderError("provider error for request " + std::to_string(id) + ": " + message),
          id_(id),
          remote_message_(message)
    {
    }
    std::uint64_t id() const noexcept { return id_; }
    const std::string& remote_message() const noexcept { return remote_message_; }

private:
    std::uint64_t id_;
    std::string remote_message_;
};

inline constexpr int kProviderProtocolVersion = 1;
inline constexpr std::uint32_t kMaxFrameBytes = 1u << 28;

/// Length prefix plus payload (dump + '\n').
std::string encode_frame(const nlohmann::json& message);

/// Parses the payload of one frame (without the prefix). Throws ProtocolError.
nlohmann::json decode_payload(const std::string& payload);

/// Byte stream with per-call deadlines.
class Transport {
public:
    virtual ~Transport() = default;
    virtual void write_all(const std::string& bytes, std::chrono::milliseconds timeout) = 0;
    virtual std::string read_exact(std::size_t n, std::chrono::milliseconds timeout) = 0;
};

/// Reads and writes through a pair of file descriptors, which it owns.
/// A child pid, if given, is terminated and reaped on destruction.
class FdTransport final : public Transport {
public:
    FdTransport(int read_fd, int write_fd, int child_pid = -1);
    ~FdTransport() override;
    FdTransport(const FdTransport&) = delete;
    FdTransport& operator=(const FdTransport&) = delete;

    void write_all(const std::string& bytes, std::chrono::milliseconds timeout) override;
    std::string read_exact(std::size_t n, std::chrono::milliseconds timeout) override;

private:
    int read_fd_;
    int write_fd_;
    int child_pid_;
};

std::unique_ptr<Transport> spawn_process(const std::vector<std::string>& argv);

/// Retries until the socket accepts or the timeout elapses.
std::unique_ptr<Transport> connect_unix(const std::string& path, std::chrono::milliseconds timeout);

void write_frame(Transport& t, const nlohmann::json& message, std::chrono::milliseconds timeout);
nlohmann::json read_frame(Transport& t, std::chrono::milliseconds timeout);

/// One channel tensor [2][M_x][M_y]: real and imaginary planes.
struct ChannelTensor {
    RealMatrix re;
    RealMatrix im;
};

class ScoreProvider {
public:
    /// Performs the handshake. A ready message whose grid differs from
    /// (m_x, m_y) raises DimensionError.
    ScoreProvider(std::unique_ptr<Transport> transport, std::size_t m_x, std::size_t m_y,
                  std::chrono::milliseconds timeout = std::chrono::seconds(30));

    std::size_t m_x() const noexcept { return m_x_; }
    std::size_t m_y() const noexcept { return m_y_; }
    std::uint64_t requests() const noexcept { return next_id_; }

    std::vector<ChannelTensor> score(const std::vector<ChannelTensor>& batch, double sigma, double t);

private:
    std::unique_ptr<Transport> transport_;
    std::size_t m_x_;
    std::size_t m_y_;
    std::chrono::milliseconds timeout_;
    std::uint64_t next_id_ = 0;
};

std::unique_ptr<ScoreProvider> connect_provider(const std::string& endpoint, std::size_t m_x,
                                                std::size_t m_y,
                                                std::chrono::milliseconds timeout = std::chrono::seconds(30));

/// Prior score served by a provider. The 2 K_a x M real state maps user k to
/// rows k (real) and K_a + k (imaginary), each reshaped row-major to M_x x M_y.
class ExternalPrior final : public ChannelPriorScorer {
public:
    explicit ExternalPrior(ScoreProvider& provider) : provider_(provider) {}
    RealMatrix score(const RealMatrix& h, double sigma, double t) override;

private:
    ScoreProvider& provider_;
};

}  // namespace mra
