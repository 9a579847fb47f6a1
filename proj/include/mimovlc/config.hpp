#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

#include "json.hpp"
#include "mimovlc/channel_model.hpp"
#include "mimovlc/framing.hpp"
#include "mimovlc/link_adaptation.hpp"
#include "mimovlc/waveform.hpp"

namespace mimovlc {

enum class Axis : std::uint8_t { SnrDb, DistanceM };
enum class Transport : std::uint8_t { InProcess, Udp };

struct UdpConfig {
    std::string host = "127.0.0.1";
    /// Zero picks an ephemeral port (single-process emulation only).
    int tx_port = 0;
    int chan_port = 0;
    int rx_port = 0;
    int deadline_ms = 2000;
};

struct ExperimentConfig {
    /// Empty means adaptive.
    std::optional<ModeCode> fixed_mode;

    /// Channel: a literal matrix (SNR axis) or a geometry (either axis).
    bool use_geometry = false;
    Eigen::MatrixXd matrix = Eigen::MatrixXd::Identity(2, 2);
    GeometryConfig geometry;
    /// Per-branch noise variance on the distance axis.
    double noise_variance = 1e-4;

    Axis axis = Axis::SnrDb;
    std::vector<double> axis_values{20.0};

    int frames = 20;
    int warmup_frames = 4;
    int blocks_per_frame = 4;
    std::vector<std::uint64_t> seeds{1};

    FrameLayout frame;
    AdaptPolicy policy;
    int hold_frames = 2;
    /// Frames between an estimate and the mode it selects going on air (0 or 1).
    int feedback_latency = 1;
    ModeCode initial_mode{Scheme::SM, 64};

    bool waveform = false;
    bool passband = false;
    ShapingConfig shaping;
    /// Largest random start offset of a burst, in samples.
    int max_delay = 16;
    double sync_threshold = kDefaultSyncThreshold;

    /// Receiver uses the configured noise variance rather than its estimate.
    bool known_noise = true;
    bool perfect_csi = false;

    Transport transport = Transport::InProcess;
    UdpConfig udp;
    /// Sweep worker threads; 0 uses the hardware concurrency.
    int threads = 0;

    int num_tx() const;
    int num_rx() const;
    void validate() const;
};

/// Defaults are filled for absent keys; unknown keys are a Config error.
/// When "total_power" is absent it defaults to the number of transmitters.
ExperimentConfig config_from_json(const nlohmann::json& j);
ExperimentConfig load_config(const std::string& path);

/// Fully resolved document; round-trips through config_from_json.
nlohmann::json config_to_json(const ExperimentConfig& cfg);

/// Channel realised at one axis point.
ChannelMatrix point_channel(const ExperimentConfig& cfg, double axis_value);

/// Parses "adaptive" (empty) or a mode name.
std::optional<ModeCode> parse_policy(std::string_view text);

} // namespace mimovlc
