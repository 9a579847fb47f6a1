#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "mimovlc/channel_estimation.hpp"
#include "mimovlc/config.hpp"
#include "mimovlc/constellation.hpp"
#include "mimovlc/metrics.hpp"

namespace mimovlc {

/// Seed of one (axis point, replica) pair; every per-frame stream derives
/// from it.
std::uint64_t point_seed(std::uint64_t seed, double axis_value);

/// Rounds every sample to binary32 precision, as the wire format does.
void quantize_f32(Streams& s);

/// Builds frame k for a given mode: bits, mapping, framing, optional
/// shaping and up-conversion. Output is one sample stream per transmitter.
class TxRole {
public:
    TxRole(const ExperimentConfig& cfg, double axis_value, std::uint64_t seed);

    Streams build(std::uint32_t frame, const ModeDecision& mode) const;
    int total_frames() const noexcept { return cfg_.warmup_frames + cfg_.frames; }

private:
    ExperimentConfig cfg_;
    std::uint64_t seed_;
    Streams training_;
};

class ChannelRole {
public:
    ChannelRole(const ExperimentConfig& cfg, double axis_value, std::uint64_t seed);

    Streams apply(std::uint32_t frame, const Streams& tx) const;
    const ChannelMatrix& channel() const noexcept { return channel_; }

private:
    ExperimentConfig cfg_;
    std::uint64_t seed_;
    ChannelMatrix channel_;
};

/// What the receiver learns from a frame before demodulating it.
struct Observation {
    std::uint32_t frame = 0;
    bool synced = false;
    double sync_metric = 0.0;
    ChannelEstimate estimate;
    /// Estimate in units of the unscaled channel, used for adaptation.
    Eigen::MatrixXd h;
    double noise_variance = 0.0;
    LinkSnrs snrs;
    std::vector<double> eigen;
    Streams payload;
};

/// Synchronizes, estimates, adapts and demodulates. It regenerates the
/// transmitted bits from the shared seed to count errors, and owns the mode
/// controller whose output is fed back to the transmitter.
class RxRole {
public:
    RxRole(const ExperimentConfig& cfg, double axis_value, std::uint64_t seed);

    /// Mode the transmitter starts with.
    ModeDecision initial_mode() const;

    Observation observe(std::uint32_t frame, const Streams& rx) const;
    /// Runs the controller on an observation; returns the active mode.
    ModeDecision adapt(const Observation& obs);
    /// Demodulates and accounts frame `obs.frame`, sent in `mode`.
    void account(const Observation& obs, const ModeDecision& mode);
    /// A frame that never arrived.
    void account_lost(std::uint32_t frame, const ModeDecision& mode);

    LinkReport finish() const;

private:
    void record_mode(std::uint32_t frame, const ModeDecision& mode, bool lost);

    ExperimentConfig cfg_;
    std::uint64_t seed_;
    double axis_value_;
    ChannelMatrix channel_;
    Training training_;
    std::vector<std::vector<cplx>> templates_;
    ModeController controller_;

    std::vector<std::string> trace_;
    std::map<std::string, int> dwell_;
    int measured_ = 0;
    int lost_ = 0;
    std::uint64_t bits_ = 0;
    std::uint64_t errors_ = 0;
    std::vector<double> err_energy_;
    std::vector<double> ref_energy_;
    std::vector<double> eigen_sum_;
    std::vector<double> sinr_sum_;
    double sd_sum_ = 0.0;
    double imag_sum_ = 0.0;
    double noise_sum_ = 0.0;
    double se_sum_ = 0.0;
    int observed_ = 0;
};

/// Single-process run of one axis point.
LinkReport run_link_inproc(const ExperimentConfig& cfg, double axis_value, std::uint64_t seed);

} // namespace mimovlc
