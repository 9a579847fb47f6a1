#include "mimovlc/transport.hpp"

#include <arpa/inet.h>
#include <netinet/in.h>
#include <poll.h>
#include <sys/socket.h>
#include <unistd.h>

#include <algorithm>
#include <cerrno>
#include <cstring>
#include <exception>
#include <map>
#include <thread>

#include "mimovlc/bytes.hpp"
#include "mimovlc/link.hpp"

namespace mimovlc {

using bytes::get_f32;
using bytes::get_u32;
using bytes::put_f32;
using bytes::put_u32;

namespace {

using Clock = std::chrono::steady_clock;

sockaddr_in make_addr(const std::string& host, int port)
{
    sockaddr_in addr{};
    addr.sin_family = AF_INET;
    addr.sin_port = htons(static_cast<std::uint16_t>(port));
    if (inet_pton(AF_INET, host.c_str(), &addr.sin_addr) != 1)
        throw Error(ErrorKind::Config, "invalid IPv4 address '" + host + "'");
    return addr;
}

[[noreturn]] void sys_error(const std::string& what)
{
    throw Error(ErrorKind::Io, what + ": " + std::strerror(errno));
}

void send_streams(const UdpSocket& sock, const Endpoint& to, const Streams& streams, std::uint8_t flags,
                  std::vector<std::uint32_t>& seq)
{
    if (seq.size() < streams.size())
        seq.resize(streams.size(), 0);
    for (std::size_t s = 0; s < streams.size(); ++s) {
        const auto& x = streams[s];
        std::size_t pos = 0;
        do {
            const std::size_t n = std::min(kMaxSamplesPerDatagram, x.size() - pos);
            const bool last = pos + n == x.size();
            const auto bytes = serialize_frame(std::span(x).subspan(pos, n), seq[s]++, static_cast<std::uint8_t>(s),
                                               static_cast<std::uint8_t>(flags | (last ? kFlagLast : 0)));
            sock.send_to(to, bytes);
            pos += n;
        } while (pos < x.size());
    }
}

struct Incoming {
    Streams streams;
    bool lost = false;
};

/// Collects one frame of `count` streams. A sequence gap or a lost flag
/// marks the frame lost; the remaining fragments are still drained.
Incoming receive_streams(const UdpSocket& sock, std::size_t count, std::chrono::milliseconds deadline,
                         std::vector<std::uint32_t>& expected)
{
    if (expected.size() < count)
        expected.resize(count, 0);
    Incoming in;
    in.streams.assign(count, {});
    std::vector<bool> done(count, false);
    std::size_t remaining = count;
    while (remaining > 0) {
        const auto bytes = sock.receive(deadline);
        if (!bytes)
            throw Error(ErrorKind::Timeout, "no datagram within the deadline");
        const WireFrame f = deserialize_frame(*bytes);
        if (f.stream >= count)
            throw Error(ErrorKind::MalformedFrame, "stream id out of range");
        if (done[f.stream])
            continue;
        if (f.sequence != expected[f.stream])
            in.lost = true;
        expected[f.stream] = f.sequence + 1;
        if (f.flags & kFlagLost)
            in.lost = true;
        auto& dst = in.streams[f.stream];
        dst.insert(dst.end(), f.samples.begin(), f.samples.end());
        if (f.flags & kFlagLast) {
            done[f.stream] = true;
            --remaining;
        }
    }
    return in;
}

std::uint8_t domain_flags(const ExperimentConfig& cfg)
{
    return cfg.waveform && cfg.passband ? kFlagPassband : 0;
}

} // namespace

std::vector<std::uint8_t> serialize_frame(std::span<const cplx> samples, std::uint32_t sequence, std::uint8_t stream,
                                          std::uint8_t flags)
{
    std::vector<std::uint8_t> out;
    out.reserve(kWireHeaderSize + samples.size() * 8);
    for (char c : {'V', 'L', 'C', 'F'})
        out.push_back(static_cast<std::uint8_t>(c));
    put_u32(out, sequence);
    put_u32(out, static_cast<std::uint32_t>(samples.size()));
    out.push_back(stream);
    out.push_back(flags);
    for (const cplx& s : samples) {
        put_f32(out, static_cast<float>(s.real()));
        put_f32(out, static_cast<float>(s.imag()));
    }
    return out;
}

WireFrame deserialize_frame(std::span<const std::uint8_t> bytes)
{
    if (bytes.size() < kWireHeaderSize)
        throw Error(ErrorKind::MalformedFrame, "truncated header");
    if (!std::equal(bytes.begin(), bytes.begin() + 4, "VLCF"))
        throw Error(ErrorKind::MalformedFrame, "bad magic");
    WireFrame f;
    f.sequence = get_u32(bytes, 4);
    const std::uint32_t count = get_u32(bytes, 8);
    f.stream = bytes[12];
    f.flags = bytes[13];
    if (bytes.size() - kWireHeaderSize != static_cast<std::size_t>(count) * 8)
        throw Error(ErrorKind::MalformedFrame, "payload length does not match sample count");
    f.samples.resize(count);
    for (std::uint32_t i = 0; i < count; ++i) {
        const std::size_t at = kWireHeaderSize + 8 * static_cast<std::size_t>(i);
        f.samples[i] = {get_f32(bytes, at), get_f32(bytes, at + 4)};
    }
    return f;
}

std::vector<std::uint8_t> encode_feedback(const FeedbackMsg& msg)
{
    std::vector<std::uint8_t> out{encode_feedback_byte(msg.mode)};
    put_u32(out, msg.frame);
    return out;
}

FeedbackMsg decode_feedback(std::span<const std::uint8_t> bytes)
{
    if (bytes.size() != 5)
        throw Error(ErrorKind::MalformedFrame, "feedback message must be 5 bytes");
    return {decode_feedback_byte(bytes[0]), get_u32(bytes, 1)};
}

UdpSocket::UdpSocket(const std::string& host, int port)
{
    fd_ = ::socket(AF_INET, SOCK_DGRAM, 0);
    if (fd_ < 0)
        sys_error("socket");
    int buf = 8 << 20;
    ::setsockopt(fd_, SOL_SOCKET, SO_RCVBUF, &buf, sizeof buf);
    ::setsockopt(fd_, SOL_SOCKET, SO_SNDBUF, &buf, sizeof buf);
    const sockaddr_in addr = make_addr(host, port);
    if (::bind(fd_, reinterpret_cast<const sockaddr*>(&addr), sizeof addr) != 0) {
        ::close(fd_);
        fd_ = -1;
        sys_error("bind " + host + ":" + std::to_string(port));
    }
}

UdpSocket::~UdpSocket()
{
    if (fd_ >= 0)
        ::close(fd_);
}

UdpSocket::UdpSocket(UdpSocket&& other) noexcept : fd_(std::exchange(other.fd_, -1)) {}

UdpSocket& UdpSocket::operator=(UdpSocket&& other) noexcept
{
    if (this != &other) {
        if (fd_ >= 0)
            ::close(fd_);
        fd_ = std::exchange(other.fd_, -1);
    }
    return *this;
}

int UdpSocket::port() const
{
    sockaddr_in addr{};
    socklen_t len = sizeof addr;
    if (::getsockname(fd_, reinterpret_cast<sockaddr*>(&addr), &len) != 0)
        sys_error("getsockname");
    return ntohs(addr.sin_port);
}

void UdpSocket::send_to(const Endpoint& to, std::span<const std::uint8_t> bytes) const
{
    const sockaddr_in addr = make_addr(to.host, to.port);
    const auto n = ::sendto(fd_, bytes.data(), bytes.size(), 0, reinterpret_cast<const sockaddr*>(&addr), sizeof addr);
    if (n < 0 || static_cast<std::size_t>(n) != bytes.size())
        sys_error("sendto");
}

std::optional<std::vector<std::uint8_t>> UdpSocket::receive(std::chrono::milliseconds timeout) const
{
    const auto until = Clock::now() + timeout;
    for (;;) {
        const auto left = std::chrono::duration_cast<std::chrono::milliseconds>(until - Clock::now());
        pollfd p{fd_, POLLIN, 0};
        const int r = ::poll(&p, 1, static_cast<int>(std::max<std::int64_t>(0, left.count())));
        if (r < 0) {
            if (errno == EINTR)
                continue;
            sys_error("poll");
        }
        if (r == 0)
            return std::nullopt;
        std::vector<std::uint8_t> buf(70000);
        const auto n = ::recv(fd_, buf.data(), buf.size(), 0);
        if (n < 0) {
            if (errno == EINTR || errno == EAGAIN)
                continue;
            sys_error("recv");
        }
        buf.resize(static_cast<std::size_t>(n));
        return buf;
    }
}

void run_tx_role(const ExperimentConfig& cfg, double axis_value, std::uint64_t seed, const UdpSocket& sock,
                 const Endpoint& channel)
{
    const TxRole tx(cfg, axis_value, seed);
    const RxRole initial(cfg, axis_value, seed);
    const std::chrono::milliseconds deadline(cfg.udp.deadline_ms);
    ModeDecision mode = initial.initial_mode();
    std::vector<std::uint32_t> seq;
    for (int k = 0; k < tx.total_frames(); ++k) {
        const auto frame = static_cast<std::uint32_t>(k);
        send_streams(sock, channel, tx.build(frame, mode), domain_flags(cfg), seq);
        for (;;) {
            const auto bytes = sock.receive(deadline);
            if (!bytes)
                throw Error(ErrorKind::Timeout, "no feedback for frame " + std::to_string(frame));
            const FeedbackMsg fb = decode_feedback(*bytes);
            if (fb.frame == frame) {
                mode = fb.mode;
                break;
            }
        }
    }
}

void run_channel_role(const ExperimentConfig& cfg, double axis_value, std::uint64_t seed, const UdpSocket& sock,
                      const Endpoint& receiver)
{
    const ChannelRole chan(cfg, axis_value, seed);
    const std::chrono::milliseconds deadline(cfg.udp.deadline_ms);
    const int total = cfg.warmup_frames + cfg.frames;
    std::vector<std::uint32_t> expected;
    std::vector<std::uint32_t> seq;
    for (int k = 0; k < total; ++k) {
        const auto frame = static_cast<std::uint32_t>(k);
        const Incoming in = receive_streams(sock, static_cast<std::size_t>(cfg.num_tx()), deadline, expected);
        if (in.lost) {
            const Streams empty(cfg.num_rx());
            send_streams(sock, receiver, empty, kFlagLost, seq);
            continue;
        }
        send_streams(sock, receiver, chan.apply(frame, in.streams), domain_flags(cfg), seq);
    }
}

LinkReport run_rx_role(const ExperimentConfig& cfg, double axis_value, std::uint64_t seed, const UdpSocket& sock,
                       const Endpoint& transmitter)
{
    RxRole rx(cfg, axis_value, seed);
    const std::chrono::milliseconds deadline(cfg.udp.deadline_ms);
    const int total = cfg.warmup_frames + cfg.frames;
    std::vector<std::uint32_t> expected;
    ModeDecision mode = rx.initial_mode();
    for (int k = 0; k < total; ++k) {
        const auto frame = static_cast<std::uint32_t>(k);
        const Incoming in = receive_streams(sock, static_cast<std::size_t>(cfg.num_rx()), deadline, expected);
        ModeDecision next = mode;
        if (in.lost) {
            rx.account_lost(frame, mode);
        } else {
            const Observation obs = rx.observe(frame, in.streams);
            next = rx.adapt(obs);
            rx.account(obs, mode);
        }
        sock.send_to(transmitter, encode_feedback({next, frame}));
        mode = next;
    }
    return rx.finish();
}

LinkReport run_emulated_link(const ExperimentConfig& cfg, double axis_value, std::uint64_t seed)
{
    cfg.validate();
    if (cfg.feedback_latency != 1)
        throw Error(ErrorKind::Config, "the UDP transport carries feedback with one frame of latency");
    const std::string& host = cfg.udp.host;
    UdpSocket tx_sock(host, cfg.udp.tx_port);
    UdpSocket chan_sock(host, cfg.udp.chan_port);
    UdpSocket rx_sock(host, cfg.udp.rx_port);
    const Endpoint tx_ep{host, tx_sock.port()};
    const Endpoint chan_ep{host, chan_sock.port()};
    const Endpoint rx_ep{host, rx_sock.port()};

    std::exception_ptr tx_err;
    std::exception_ptr chan_err;
    std::thread tx_thread([&] {
        try {
            run_tx_role(cfg, axis_value, seed, tx_sock, chan_ep);
        } catch (...) {
            tx_err = std::current_exception();
        }
    });
    std::thread chan_thread([&] {
        try {
            run_channel_role(cfg, axis_value, seed, chan_sock, rx_ep);
        } catch (...) {
            chan_err = std::current_exception();
        }
    });

    LinkReport report;
    std::exception_ptr rx_err;
    try {
        report = run_rx_role(cfg, axis_value, seed, rx_sock, tx_ep);
    } catch (...) {
        rx_err = std::current_exception();
    }
    tx_thread.join();
    chan_thread.join();
    for (const auto& e : {tx_err, chan_err, rx_err})
        if (e)
            std::rethrow_exception(e);
    return report;
}

} // namespace mimovlc
