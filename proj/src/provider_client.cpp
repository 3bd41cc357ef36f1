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

#include "mra/provider_client.hpp"

#include <fcntl.h>
#include <poll.h>
#include <signal.h>
#include <sys/socket.h>
#include <sys/un.h>
#include <sys/wait.h>
#include <unistd.h>

#include <cerrno>
#include <cstring>
#include <mutex>
#include <sstream>
#include <thread>

namespace mra {

using nlohmann::json;
using Clock = std::chrono::steady_clock;

namespace {

void ignore_sigpipe()
{
    static std::once_flag once;
    std::call_once(once, [] { ::signal(SIGPIPE, SIG_IGN); });
}

std::string errno_text(const char* what)
{
    return std::string(what) + ": " + std::strerror(errno);
}

/// Waits until fd is ready for `events` or the deadline passes.
void wait_ready(int fd, short events, Clock::time_point deadline, const char* what)
{
    for (;;) {
        const auto left = std::chrono::duration_cast<std::chrono::milliseconds>(deadline - Clock::now());
        if (left.count() <= 0) throw ProviderTimeout(std::string("provider timed out during ") + what);
        pollfd p{fd, events, 0};
        const int rc = ::poll(&p, 1, static_cast<int>(std::min<long long>(left.count(), 1 << 30)));
        if (rc > 0) return;
        if (rc < 0 && errno != EINTR) throw ProviderError(errno_text("poll"));
    }
}

}  // namespace

std::string encode_frame(const json& message)
{
    const std::string payload = message.dump() + "\n";
    if (payload.size() > kMaxFrameBytes) throw ProtocolError("frame exceeds the size limit");
    const auto n = static_cast<std::uint32_t>(payload.size());
    std::string out(4, '\0');
    for (int b = 0; b < 4; ++b) out[b] = static_cast<char>((n >> (8 * b)) & 0xffu);
    return out + payload;
}

json decode_payload(const std::string& payload)
{
    if (payload.empty() || payload.back() != '\n') {
        throw ProtocolError("frame payload is not newline terminated");
    }
    json j = json::parse(payload, nullptr, false);
    if (j.is_discarded()) throw ProtocolError("frame payload is not valid JSON");
    if (!j.is_object()) throw ProtocolError("frame payload is not a JSON object");
    return j;
}

FdTransport::FdTransport(int read_fd, int write_fd, int child_pid)
    : read_fd_(read_fd), write_fd_(write_fd), child_pid_(child_pid)
{
}

FdTransport::~FdTransport()
{
    if (write_fd_ >= 0 && write_fd_ != read_fd_) ::close(write_fd_);
    if (read_fd_ >= 0) ::close(read_fd_);
    if (child_pid_ > 0) {
        // Closing stdin lets a well-behaved provider exit; stragglers are killed.
        const auto deadline = Clock::now() + std::chrono::milliseconds(500);
        int status = 0;
        while (::waitpid(child_pid_, &status, WNOHANG) == 0) {
            if (Clock::now() > deadline) {
                ::kill(child_pid_, SIGKILL);
                ::waitpid(child_pid_, &status, 0);
                break;
            }
            std::this_thread::sleep_for(std::chrono::milliseconds(5));
        }
    }
}

void FdTransport::write_all(const std::string& bytes, std::chrono::milliseconds timeout)
{
    const auto deadline = Clock::now() + timeout;
    std::size_t done = 0;
    while (done < bytes.size()) {
        wait_ready(write_fd_, POLLOUT, deadline, "write");
        const ssize_t n = ::write(write_fd_, bytes.data() + done, bytes.size() - done);
        if (n < 0) {
            if (errno == EINTR || errno == EAGAIN) continue;
            throw ProviderError(errno_text("provider write failed"));
        }
        done += static_cast<std::size_t>(n);
    }
}

std::string FdTransport::read_exact(std::size_t n, std::chrono::milliseconds timeout)
{
    const auto deadline = Clock::now() + timeout;
    std::string out(n, '\0');
    std::size_t done = 0;
    while (done < n) {
        wait_ready(read_fd_, POLLIN, deadline, "read");
        const ssize_t r = ::read(read_fd_, out.data() + done, n - done);
        if (r < 0) {
            if (errno == EINTR || errno == EAGAIN) continue;
            throw ProviderError(errno_text("provider read failed"));
        }
        if (r == 0) throw ProtocolError("provider closed the stream");
        done += static_cast<std::size_t>(r);
    }
    return out;
}

std::unique_ptr<Transport> spawn_process(const std::vector<std::string>& argv)
{
    if (argv.empty()) throw ConfigError("provider command is empty");
    ignore_sigpipe();
    int to_child[2];
    int from_child[2];
    if (::pipe2(to_child, O_CLOEXEC) != 0) throw ProviderError(errno_text("pipe"));
    if (::pipe2(from_child, O_CLOEXEC) != 0) {
        ::close(to_child[0]);
        ::close(to_child[1]);
        throw ProviderError(errno_text("pipe"));
    }
    std::vector<char*> args;
    for (const auto& a : argv) args.push_back(const_cast<char*>(a.c_str()));
    args.push_back(nullptr);

    const pid_t pid = ::fork();
    if (pid < 0) {
        for (int fd : {to_child[0], to_child[1], from_child[0], from_child[1]}) ::close(fd);
        throw ProviderError(errno_text("fork"));
    }
    if (pid == 0) {
        ::dup2(to_child[0], STDIN_FILENO);
        ::dup2(from_child[1], STDOUT_FILENO);
        ::execvp(args[0], args.data());
        ::_exit(127);
    }
    ::close(to_child[0]);
    ::close(from_child[1]);
    return std::make_unique<FdTransport>(from_child[0], to_child[1], pid);
}

std::unique_ptr<Transport> connect_unix(const std::string& path, std::chrono::milliseconds timeout)
{
    ignore_sigpipe();
    sockaddr_un addr{};
    addr.sun_family = AF_UNIX;
    if (path.size() >= sizeof(addr.sun_path)) throw ConfigError("socket path too long: " + path);
    std::memcpy(addr.sun_path, path.c_str(), path.size() + 1);

    const auto deadline = Clock::now() + timeout;
    for (;;) {
        const int fd = ::socket(AF_UNIX, SOCK_STREAM | SOCK_CLOEXEC, 0);
        if (fd < 0) throw ProviderError(errno_text("socket"));
        if (::connect(fd, reinterpret_cast<const sockaddr*>(&addr), sizeof(addr)) == 0) {
            return std::make_unique<FdTransport>(fd, fd);
        }
        const int err = errno;
        ::close(fd);
        if (err != ENOENT && err != ECONNREFUSED && err != EAGAIN) {
            errno = err;
            throw ProviderError(errno_text(("connect " + path).c_str()));
        }
        if (Clock::now() > deadline) throw ProviderTimeout("no provider listening on " + path);
        std::this_thread::sleep_for(std::chrono::milliseconds(10));
    }
}

void write_frame(Transport& t, const json& message, std::chrono::milliseconds timeout)
{
    t.write_all(encode_frame(message), timeout);
}

json read_frame(Transport& t, std::chrono::milliseconds timeout)
{
    const auto deadline = Clock::now() + timeout;
    const std::string prefix = t.read_exact(4, timeout);
    std::uint32_t n = 0;
    for (int b = 0; b < 4; ++b) n |= static_cast<std::uint32_t>(static_cast<unsigned char>(prefix[b])) << (8 * b);
    if (n == 0 || n > kMaxFrameBytes) throw ProtocolError("invalid frame length " + std::to_string(n));
    const auto left = std::chrono::duration_cast<std::chrono::milliseconds>(deadline - Clock::now());
    return decode_payload(t.read_exact(n, std::max(left, std::chrono::milliseconds(1))));
}

namespace {

std::size_t get_dim(const json& j, const char* key)
{
    const auto it = j.find(key);
    if (it == j.end() || !it->is_number_integer() || it->get<long long>() <= 0) {
        throw ProtocolError(std::string("ready message lacks a positive integer ") + key);
    }
    return it->get<std::size_t>();
}

json tensor_to_json(const ChannelTensor& t)
{
    json planes = json::array();
    for (const RealMatrix* m : {&t.re, &t.im}) {
        json rows = json::array();
        for (Eigen::Index i = 0; i < m->rows(); ++i) {
            json row = json::array();
            for (Eigen::Index j = 0; j < m->cols(); ++j) row.push_back((*m)(i, j));
            rows.push_back(std::move(row));
        }
        planes.push_back(std::move(rows));
    }
    return planes;
}

ChannelTensor tensor_from_json(const json& j, std::size_t mx, std::size_t my)
{
    if (!j.is_array() || j.size() != 2) throw ProtocolError("score tensor must have 2 planes");
    ChannelTensor t;
    for (int p = 0; p < 2; ++p) {
        const json& rows = j[p];
        if (!rows.is_array() || rows.size() != mx) {
            throw ProtocolError("score tensor plane must have " + std::to_string(mx) + " rows");
        }
        RealMatrix m(static_cast<Eigen::Index>(mx), static_cast<Eigen::Index>(my));
        for (std::size_t i = 0; i < mx; ++i) {
            const json& row = rows[i];
            if (!row.is_array() || row.size() != my) {
                throw ProtocolError("score tensor row must have " + std::to_string(my) + " entries");
            }
            for (std::size_t c = 0; c < my; ++c) {
                if (!row[c].is_number()) throw ProtocolError("score tensor entry is not a number");
                m(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(c)) = row[c].get<double>();
            }
        }
        (p == 0 ? t.re : t.im) = std::move(m);
    }
    return t;
}

}  // namespace

ScoreProvider::ScoreProvider(std::unique_ptr<Transport> transport, std::size_t m_x, std::size_t m_y,
                             std::chrono::milliseconds timeout)
    : transport_(std::move(transport)), m_x_(m_x), m_y_(m_y), timeout_(timeout)
{
    if (!transport_) throw std::invalid_argument("ScoreProvider: null transport");
    write_frame(*transport_, json{{"kind", "hello"}, {"version", kProviderProtocolVersion}}, timeout_);
    const json ready = read_frame(*transport_, timeout_);
    if (ready.value("kind", "") != "ready") {
        throw ProtocolError("expected a ready message, got " + ready.dump());
    }
    const std::size_t mx = get_dim(ready, "M_x");
    const std::size_t my = get_dim(ready, "M_y");
    if (mx != m_x_ || my != m_y_) {
        throw DimensionError("provider grid " + shape_string(mx, my) + " does not match antenna grid " +
                             shape_string(m_x_, m_y_));
    }
}

std::vector<ChannelTensor> ScoreProvider::score(const std::vector<ChannelTensor>& batch, double sigma,
                                                double t)
{
    json tensors = json::array();
    for (const auto& x : batch) {
        const auto r = static_cast<Eigen::Index>(m_x_);
        const auto c = static_cast<Eigen::Index>(m_y_);
        if (x.re.rows() != r || x.re.cols() != c || x.im.rows() != r || x.im.cols() != c) {
            throw DimensionError("score request tensor does not match grid " + shape_string(m_x_, m_y_));
        }
        tensors.push_back(tensor_to_json(x));
    }
    const std::uint64_t id = next_id_++;
    write_frame(*transport_,
                json{{"id", id}, {"kind", "score"}, {"t", t}, {"sigma", sigma}, {"tensors", std::move(tensors)}},
                timeout_);
    const json reply = read_frame(*transport_, timeout_);
    const auto rid = reply.find("id");
    if (rid == reply.end() || !rid->is_number_unsigned() || rid->get<std::uint64_t>() != id) {
        throw ProtocolError("reply id does not match request " + std::to_string(id));
    }
    const std::string kind = reply.value("kind", "");
    if (kind == "error") throw ProviderRemoteError(id, reply.value("message", std::string("(no message)")));
    if (kind != "score_ok") throw ProtocolError("unexpected reply kind '" + kind + "'");
    const auto it = reply.find("tensors");
    if (it == reply.end() || !it->is_array() || it->size() != batch.size()) {
        throw ProtocolError("reply to request " + std::to_string(id) + " has the wrong tensor count");
    }
    std::vector<ChannelTensor> out;
    out.reserve(batch.size());
    for (const auto& tj : *it) out.push_back(tensor_from_json(tj, m_x_, m_y_));
    return out;
}

std::unique_ptr<ScoreProvider> connect_provider(const std::string& endpoint, std::size_t m_x,
                                                std::size_t m_y, std::chrono::milliseconds timeout)
{
    std::unique_ptr<Transport> transport;
    if (endpoint.rfind("exec:", 0) == 0) {
        std::istringstream in(endpoint.substr(5));
        std::vector<std::string> argv;
        for (std::string a; in >> a;) argv.push_back(a);
        transport = spawn_process(argv);
    } else if (endpoint.rfind("unix:", 0) == 0) {
        transport = connect_unix(endpoint.substr(5), timeout);
    } else {
        throw ConfigError("provider endpoint must start with exec: or unix:, got '" + endpoint + "'");
    }
    return std::make_unique<ScoreProvider>(std::move(transport), m_x, m_y, timeout);
}

RealMatrix ExternalPrior::score(const RealMatrix& h, double sigma, double t)
{
    const auto mx = static_cast<Eigen::Index>(provider_.m_x());
    const auto my = static_cast<Eigen::Index>(provider_.m_y());
    if (h.rows() % 2 != 0 || h.cols() != mx * my) {
        throw DimensionError("ExternalPrior: state " + shape_string(h.rows(), h.cols()) +
                             " does not fit grid " + shape_string(mx, my));
    }
    const Eigen::Index ka = h.rows() / 2;
    std::vector<ChannelTensor> batch(static_cast<std::size_t>(ka));
    for (Eigen::Index k = 0; k < ka; ++k) {
        batch[k].re = Eigen::Map<const RealMatrix>(h.row(k).eval().data(), mx, my);
        batch[k].im = Eigen::Map<const RealMatrix>(h.row(ka + k).eval().data(), mx, my);
    }
    const auto scores = provider_.score(batch, sigma, t);
    RealMatrix out(h.rows(), h.cols());
    for (Eigen::Index k = 0; k < ka; ++k) {
        out.row(k) = Eigen::Map<const RealVector>(scores[k].re.data(), mx * my).transpose();
        out.row(ka + k) = Eigen::Map<const RealVector>(scores[k].im.data(), mx * my).transpose();
    }
    return out;
}

}  // namespace mra
