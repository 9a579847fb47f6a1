#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <vector>

#include "mimovlc/common.hpp"

namespace mimovlc {

enum class Domain : std::uint8_t { Baseband, Passband };

/// Complex baseband samples, or real passband samples stored with a zero
/// imaginary part.
struct IqBuffer {
    std::vector<cplx> samples;
    double sample_rate = 0.0;
    Domain domain = Domain::Baseband;

    void validate() const;
};

struct ShapingConfig {
    int sps = 8;
    double rolloff = 0.35;
    int span = 16;
    double symbol_rate = 2.5e6;
    double carrier = 2.5e6;

    double sample_rate() const noexcept { return sps * symbol_rate; }
    /// One-sided bandwidth of the shaped baseband signal.
    double baseband_edge() const noexcept { return (1.0 + rolloff) * symbol_rate / 2.0; }
    std::size_t num_taps() const noexcept { return static_cast<std::size_t>(span) * sps + 1; }
    /// Delay of one filter, in samples.
    std::size_t group_delay() const noexcept { return num_taps() / 2; }

    void validate() const;
    /// Additionally checks carrier placement for the IF stage.
    void validate_passband() const;
};

/// Unit-energy root-raised-cosine taps spanning `span` symbols, nudged so
/// that taps convolved with themselves vanish at every non-zero symbol lag.
std::vector<double> rrc_taps(const ShapingConfig& cfg);

/// Upsample by sps and filter with the RRC. Output length is
/// n * sps + num_taps - 1; symbol k peaks at k * sps + group_delay.
IqBuffer pulse_shape(std::span<const cplx> symbols, const ShapingConfig& cfg);

/// Real passband x = I cos(2 pi fc t) - Q sin(2 pi fc t) on the sample grid.
IqBuffer upconvert(const IqBuffer& baseband, const ShapingConfig& cfg);

/// Mix by 2 cos / -2 sin and apply an ideal (DFT-domain, circular) low-pass
/// at the carrier frequency.
IqBuffer downconvert(const IqBuffer& passband, const ShapingConfig& cfg);

/// Matched RRC filtering followed by sampling at
/// 2 * group_delay + timing_offset + k * sps. Without `count`, every symbol
/// instant that lies inside the input is returned.
std::vector<cplx> matched_filter_decimate(const IqBuffer& baseband, const ShapingConfig& cfg,
                                          std::ptrdiff_t timing_offset,
                                          std::optional<std::size_t> count = std::nullopt);

/// Full convolution with the RRC; output length n + num_taps - 1. Sampling
/// it at num_taps - 1 + offset + k * sps matches matched_filter_decimate.
IqBuffer matched_filter(const IqBuffer& baseband, const ShapingConfig& cfg);

struct SyncResult {
    std::size_t index = 0;
    double metric = 0.0;
};

inline constexpr double kDefaultSyncThreshold = 0.5;

/// Lag maximizing the fraction of received energy that lies in the span of
/// the known training waveforms (one template per transmitter), pooled
/// across receivers. The metric is in [0, 1]. Never throws on weak peaks.
SyncResult best_alignment(std::span<const IqBuffer> received, std::span<const std::vector<cplx>> templates,
                          std::size_t max_lag = SIZE_MAX);

/// best_alignment plus a SyncFailure error when the peak metric is below
/// `threshold`.
SyncResult synchronize(std::span<const IqBuffer> received, std::span<const std::vector<cplx>> templates,
                       double threshold = kDefaultSyncThreshold, std::size_t max_lag = SIZE_MAX);

SyncResult synchronize(const IqBuffer& received, std::span<const cplx> known_training,
                       double threshold = kDefaultSyncThreshold);

// IQ file: "VLIQ", u32 sample count, u32 sample rate (Hz), u32 flags
// (bit0: passband), then interleaved little-endian binary32 I/Q pairs.
inline constexpr std::size_t kIqHeaderSize = 16;

std::vector<std::uint8_t> encode_iq(const IqBuffer& buffer);
IqBuffer decode_iq(std::span<const std::uint8_t> data);
void write_iq_file(const std::filesystem::path& path, const IqBuffer& buffer);
IqBuffer read_iq_file(const std::filesystem::path& path);

} // namespace mimovlc
