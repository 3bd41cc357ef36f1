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

// Reference score provider answering every request with score = -input.
// Serves stdio by default, or one connection on a Unix socket.
//
//   gaussian   score of N(0, v) perturbed at sigma: -input / (v + sigma^2)
//
// Fault modes for client tests:
//   bad-dims   advertise M_x + 1
//   stall      never answer score requests
//   garbage    answer with a non-JSON payload
//   error      answer with kind "error"
//   wrong-id   answer with id + 1
//   short      drop the last tensor of each reply

#include <sys/socket.h>
#include <sys/un.h>
#include <unistd.h>

#include <chrono>
#include <cstdio>
#include <cstring>
#include <thread>

#include <CLI11.hpp>
#include <json.hpp>

#include "mra/provider_client.hpp"

using nlohmann::json;

namespace {

void serve(mra::Transport& io, std::size_t mx, std::size_t my, const std::string& mode, double variance)
{
    const auto forever = std::chrono::hours(24);
    const json hello = mra::read_frame(io, forever);
    if (hello.value("kind", "") != "hello") return;
    mra::write_frame(io, json{{"kind", "ready"}, {"M_x", mode == "bad-dims" ? mx + 1 : mx}, {"M_y", my}},
                     forever);
    for (;;) {
        json req;
        try {
            req = mra::read_frame(io, forever);
        } catch (const mra::ProtocolError&) {
            return;  // client closed the stream
        }
        const auto id = req.value("id", std::uint64_t{0});
        if (mode == "stall") {
            std::this_thread::sleep_for(forever);
        } else if (mode == "garbage") {
            const std::string junk = "not json\n";
            const auto n = static_cast<std::uint32_t>(junk.size());
            std::string frame(4, '\0');
            for (int b = 0; b < 4; ++b) frame[b] = static_cast<char>((n >> (8 * b)) & 0xffu);
            io.write_all(frame + junk, forever);
        } else if (mode == "error") {
            mra::write_frame(io, json{{"id", id}, {"kind", "error"}, {"message", "injected failure"}}, forever);
        } else {
            json tensors = req.at("tensors");
            const double sigma = req.value("sigma", 0.0);
            const double scale = mode == "gaussian" ? 1.0 / (variance + sigma * sigma) : 1.0;
            for (auto& t : tensors) {
                for (auto& plane : t) {
                    for (auto& row : plane) {
                        for (auto& v : row) v = -v.get<double>() * scale;
                    }
                }
            }
            if (mode == "short" && !tensors.empty()) tensors.erase(tensors.size() - 1);
            mra::write_frame(io,
                             json{{"id", mode == "wrong-id" ? id + 1 : id}, {"kind", "score_ok"},
                                  {"tensors", std::move(tensors)}},
                             forever);
        }
    }
}

}  // namespace

int main(int argc, char** argv)
{
    CLI::App app{"Echo score provider"};
    std::size_t mx = 8, my = 8;
    std::string mode = "echo";
    std::string socket_path;
    double variance = 0.5;
    app.add_option("--mx", mx, "antenna rows");
    app.add_option("--my", my, "antenna columns");
    app.add_option("--mode", mode, "fault mode")
        ->check(CLI::IsMember({"echo", "gaussian", "bad-dims", "stall", "garbage", "error", "wrong-id", "short"}));
    app.add_option("--variance", variance, "per-component prior variance of the gaussian mode");
    app.add_option("--socket", socket_path, "listen on this Unix socket instead of stdio");
    CLI11_PARSE(app, argc, argv);

    try {
        if (socket_path.empty()) {
            mra::FdTransport io(STDIN_FILENO, STDOUT_FILENO);
            serve(io, mx, my, mode, variance);
            return 0;
        }
        const int srv = ::socket(AF_UNIX, SOCK_STREAM, 0);
        sockaddr_un addr{};
        addr.sun_family = AF_UNIX;
        std::strncpy(addr.sun_path, socket_path.c_str(), sizeof(addr.sun_path) - 1);
        ::unlink(socket_path.c_str());
        if (srv < 0 || ::bind(srv, reinterpret_cast<sockaddr*>(&addr), sizeof(addr)) != 0 ||
            ::listen(srv, 1) != 0) {
            std::perror("echo_provider: socket");
            return 1;
        }
        const int conn = ::accept(srv, nullptr, nullptr);
        ::close(srv);
        ::unlink(socket_path.c_str());
        if (conn < 0) return 1;
        mra::FdTransport io(conn, conn);
        serve(io, mx, my, mode, variance);
    } catch (const std::exception& e) {
        std::fprintf(stderr, "echo_provider: %s\n", e.what());
        return 1;
    }
    return 0;
}
