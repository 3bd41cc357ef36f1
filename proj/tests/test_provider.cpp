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

#include <doctest.h>

#include <sys/socket.h>
#include <unistd.h>

#include <chrono>
#include <string>
#include <thread>
#include <vector>

#include "mra/provider_client.hpp"

using namespace mra;
using nlohmann::json;
using namespace std::chrono_literals;

namespace {

std::string echo_cmd(const std::string& extra = "") { return std::string("exec:") + MRA_ECHO_PROVIDER + " " + extra; }

std::vector<ChannelTensor> batch(std::size_t n, std::size_t mx, std::size_t my, RngStream& rng)
{
    std::vector<ChannelTensor> b(n);
    for (auto& t : b) {
        t.re = gaussian_sample(mx, my, 1.0, rng);
        t.im = gaussian_sample(mx, my, 1.0, rng);
    }
    return b;
}

}  // namespace

TEST_SUITE("provider") {

TEST_CASE("frames carry a little-endian length that includes the newline")
{
    const json m{{"kind", "hello"}, {"version", 1}};
    const std::string f = encode_frame(m);
    const std::string payload = m.dump() + "\n";
    REQUIRE(f.size() == 4 + payload.size());
    const auto n = static_cast<std::uint32_t>(static_cast<unsigned char>(f[0])) |
                   static_cast<std::uint32_t>(static_cast<unsigned char>(f[1])) << 8 |
                   static_cast<std::uint32_t>(static_cast<unsigned char>(f[2])) << 16 |
                   static_cast<std::uint32_t>(static_cast<unsigned char>(f[3])) << 24;
    CHECK(n == payload.size());
    CHECK(f.substr(4) == payload);
    CHECK(decode_payload(payload) == m);
    CHECK_THROWS_AS(decode_payload(m.dump()), ProtocolError);
    CHECK_THROWS_AS(decode_payload("{not json\n"), ProtocolError);
    CHECK_THROWS_AS(decode_payload("[1,2]\n"), ProtocolError);
}

TEST_CASE("tensors follow the [n][2][M_x][M_y] row-major layout")
{
    int fds[2];
    REQUIRE(::socketpair(AF_UNIX, SOCK_STREAM, 0, fds) == 0);
    const int srv_fd = ::dup(fds[1]);
    json seen;
    std::thread server([&] {
        FdTransport io(srv_fd, fds[1]);
        read_frame(io, 5s);
        write_frame(io, json{{"kind", "ready"}, {"M_x", 2}, {"M_y", 3}}, 5s);
        seen = read_frame(io, 5s);
        write_frame(io, json{{"id", seen["id"]}, {"kind", "score_ok"}, {"tensors", seen["tensors"]}}, 5s);
    });
    {
        ScoreProvider p(std::make_unique<FdTransport>(fds[0], ::dup(fds[0])), 2, 3, 5000ms);
        ExternalPrior prior(p);
        RealMatrix h(4, 6);
        for (Eigen::Index i = 0; i < h.size(); ++i) h.data()[i] = static_cast<double>(i);
        const RealMatrix out = prior.score(h, 0.7, 0.25);
        CHECK((out - h).norm() == 0.0);
        CHECK_THROWS_AS(prior.score(RealMatrix::Zero(4, 5), 0.7, 0.25), DimensionError);
    }
    server.join();
    CHECK(seen["kind"] == "score");
    CHECK(seen["sigma"].get<double>() == 0.7);
    CHECK(seen["t"].get<double>() == 0.25);
    // user 1 real plane is state row 1, reshaped row by row
    CHECK(seen["tensors"][1][0][1][2].get<double>() == 1 * 6 + 1 * 3 + 2);
    // user 0 imaginary plane is state row K_a + 0 = 2
    CHECK(seen["tensors"][0][1][0][1].get<double>() == 2 * 6 + 1);
}

TEST_CASE("echo provider over stdio answers a batch of 12")
{
    RngStream rng(1);
    auto p = connect_provider(echo_cmd("--mx 4 --my 8"), 4, 8, 10000ms);
    const auto in = batch(12, 4, 8, rng);
    const auto out = p->score(in, 1.0, 0.5);
    REQUIRE(out.size() == 12);
    for (std::size_t i = 0; i < 12; ++i) {
        CHECK((out[i].re + in[i].re).norm() == 0.0);
        CHECK((out[i].im + in[i].im).norm() == 0.0);
    }
    p->score(in, 0.5, 0.2);
    CHECK(p->requests() == 2);
    CHECK_THROWS_AS(p->score(batch(1, 3, 8, rng), 1.0, 0.5), DimensionError);
}

TEST_CASE("external prior through the echo provider negates the state")
{
    RngStream rng(2);
    auto p = connect_provider(echo_cmd("--mx 2 --my 2"), 2, 2, 10000ms);
    ExternalPrior prior(*p);
    const RealMatrix h = gaussian_sample(6, 4, 1.0, rng);
    CHECK((prior.score(h, 1.0, 0.0) + h).norm() == 0.0);
}

TEST_CASE("grid mismatch at handshake is a dimension error")
{
    CHECK_THROWS_AS(connect_provider(echo_cmd("--mx 2 --my 2 --mode bad-dims"), 2, 2, 10000ms), DimensionError);
    CHECK_THROWS_AS(connect_provider(echo_cmd("--mx 2 --my 2"), 2, 3, 10000ms), DimensionError);
}

TEST_CASE("faulty providers raise typed errors")
{
    RngStream rng(3);
    const auto in = batch(2, 2, 2, rng);
    SUBCASE("stall")
    {
        auto p = connect_provider(echo_cmd("--mx 2 --my 2 --mode stall"), 2, 2, 300ms);
        CHECK_THROWS_AS(p->score(in, 1.0, 0.0), ProviderTimeout);
    }
    SUBCASE("garbage")
    {
        auto p = connect_provider(echo_cmd("--mx 2 --my 2 --mode garbage"), 2, 2, 10000ms);
        CHECK_THROWS_AS(p->score(in, 1.0, 0.0), ProtocolError);
    }
    SUBCASE("remote error")
    {
        auto p = connect_provider(echo_cmd("--mx 2 --my 2 --mode error"), 2, 2, 10000ms);
        try {
            p->score(in, 1.0, 0.0);
            FAIL("expected a remote error");
        } catch (const ProviderRemoteError& e) {
            CHECK(e.id() == 0);
            CHECK_FALSE(e.remote_message().empty());
        }
    }
    SUBCASE("wrong id")
    {
        auto p = connect_provider(echo_cmd("--mx 2 --my 2 --mode wrong-id"), 2, 2, 10000ms);
        CHECK_THROWS_AS(p->score(in, 1.0, 0.0), ProtocolError);
    }
    SUBCASE("short reply")
    {
        auto p = connect_provider(echo_cmd("--mx 2 --my 2 --mode short"), 2, 2, 10000ms);
        CHECK_THROWS_AS(p->score(in, 1.0, 0.0), ProtocolError);
    }
    SUBCASE("missing executable")
    {
        CHECK_THROWS_AS(connect_provider("exec:/nonexistent/provider", 2, 2, 2000ms), ProviderError);
    }
    SUBCASE("bad endpoint")
    {
        CHECK_THROWS_AS(connect_provider("tcp:1.2.3.4", 2, 2), ConfigError);
    }
}

TEST_CASE("Unix socket endpoint")
{
    const std::string path = "/tmp/mra_echo_" + std::to_string(::getpid()) + ".sock";
    auto child = spawn_process({MRA_ECHO_PROVIDER, "--mx", "3", "--my", "2", "--socket", path});
    RngStream rng(4);
    auto p = connect_provider("unix:" + path, 3, 2, 10000ms);
    const auto in = batch(3, 3, 2, rng);
    const auto out = p->score(in, 0.3, 0.1);
    REQUIRE(out.size() == 3);
    CHECK((out[2].im + in[2].im).norm() == 0.0);
}

}  // TEST_SUITE
