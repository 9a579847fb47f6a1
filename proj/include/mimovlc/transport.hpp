#pragma once

#include <chrono>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "mimovlc/config.hpp"
#include "mimovlc/link_adaptation.hpp"
#include "mimovlc/metrics.hpp"

namespace mimovlc {

// "VLCF", u32 sequence, u32 sample count, u8 stream id, u8 flags, then
// interleaved little-endian binary32 I/Q.
inline constexpr std::size_t kWireHeaderSize = 14;
inline constexpr std::size_t kMaxSamplesPerDatagram = 8000;

enum WireFlags : std::uint8_t {
    kFlagPassband = 1,
    /// Final fragment of a stream's frame.
    kFlagLast = 2,
    /// The sender lost this frame; the payload is empty.
    kFlagLost = 4,
};

struct WireFrame {
    std::uint32_t sequence = 0;
    std::uint8_t stream = 0;
    std::uint8_t flags = 0;
    std::vector<cplx> samples;
};

std::vector<std::uint8_t> serialize_frame(std::span<const cplx> samples, std::uint32_t sequence,
                                          std::uint8_t stream, std::uint8_t flags = kFlagLast);
/// MalformedFrame on short header, bad magic, or a payload whose size
/// disagrees with the sample count.
WireFrame deserialize_frame(std::span<const std::uint8_t> bytes);

struct FeedbackMsg {
    ModeDecision mode;
    std::uint32_t frame = 0;

    friend bool operator==(const FeedbackMsg&, const FeedbackMsg&) = default;
};

/// Mode byte followed by the u32 frame index it answers.
std::vector<std::uint8_t> encode_feedback(const FeedbackMsg& msg);
FeedbackMsg decode_feedback(std::span<const std::uint8_t> bytes);

struct Endpoint {
    std::string host = "127.0.0.1";
    int port = 0;
};

class UdpSocket {
public:
    /// Binds host:port; port 0 picks an ephemeral port.
    UdpSocket(const std::string& host, int port);
    ~UdpSocket();
    UdpSocket(const UdpSocket&) = delete;
    UdpSocket& operator=(const UdpSocket&) = delete;
    UdpSocket(UdpSocket&& other) noexcept;
    UdpSocket& operator=(UdpSocket&& other) noexcept;

    int port() const;
    void send_to(const Endpoint& to, std::span<const std::uint8_t> bytes) const;
    /// Empty on timeout.
    std::optional<std::vector<std::uint8_t>> receive(std::chrono::milliseconds timeout) const;

private:
    int fd_ = -1;
};

/// Transmit role: sends frame k to the channel, then waits for the feedback
/// answering frame k before building k+1.
void run_tx_role(const ExperimentConfig& cfg, double axis_value, std::uint64_t seed, const UdpSocket& sock,
                 const Endpoint& channel);
void run_channel_role(const ExperimentConfig& cfg, double axis_value, std::uint64_t seed, const UdpSocket& sock,
                      const Endpoint& receiver);
LinkReport run_rx_role(const ExperimentConfig& cfg, double axis_value, std::uint64_t seed, const UdpSocket& sock,
                       const Endpoint& transmitter);

/// Runs the three roles on loopback threads. Ports come from the config
/// (0 means ephemeral).
LinkReport run_emulated_link(const ExperimentConfig& cfg, double axis_value, std::uint64_t seed);

} // namespace mimovlc
