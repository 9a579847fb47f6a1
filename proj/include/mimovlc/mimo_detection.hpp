#pragma once

#include <span>
#include <vector>

#include <Eigen/Dense>

#include "mimovlc/channel_estimation.hpp"
#include "mimovlc/common.hpp"

namespace mimovlc {

enum class DetectMethod { Inverse, PseudoInverse, Mrc };

const char* to_string(DetectMethod m) noexcept;

inline constexpr double kConditionLimit = 1e8;
inline constexpr double kSingularFloor = 1e-12;

struct PseudoInverse {
    Eigen::MatrixXd w;
    bool rank_deficient = false;
    int rank = 0;
};

/// Moore-Penrose inverse by SVD; singular values below
/// kSingularFloor * sigma_max are treated as zero.
PseudoInverse pseudo_inverse(const Eigen::MatrixXd& h);

struct ZfWeights {
    Eigen::MatrixXd w;
    DetectMethod method = DetectMethod::Inverse;
    bool rank_deficient = false;
    double condition = 0.0;
};

/// Direct inverse for square H with condition number below kConditionLimit,
/// otherwise the pseudo-inverse.
ZfWeights zf_weights(const Eigen::MatrixXd& h);

struct DetectorOutput {
    Streams streams;
    /// Noise gain per output stream: diag(W W^T). Multiply by sigma^2 for the
    /// post-detection noise variance.
    std::vector<double> enhancement;
    DetectMethod method = DetectMethod::Inverse;
    bool rank_deficient = false;
};

/// x_est[k] = W y[k] per instant. y holds one stream per receiver.
DetectorOutput zf_detect(const ChannelEstimate& est, std::span<const std::vector<cplx>> y);

/// MRC over h_eff = row sums of H: x_est[k] = h_eff^T y[k] / ||h_eff||^2.
/// Throws Outage when h_eff vanishes.
DetectorOutput diversity_combine(const ChannelEstimate& est, std::span<const std::vector<cplx>> y);

/// Post-ZF SINR per stream with every transmitter at power `per_tx_power`:
/// |(WH)_ii|^2 P / (sum_{j != i} |(WH)_ij|^2 P + sigma^2 (W W^T)_ii).
/// Reduces to rho / enhancement when H has full column rank.
std::vector<double> zf_stream_sinr(const Eigen::MatrixXd& h, double per_tx_power, double noise_variance);

/// per_tx_power * ||h_eff||^2 / sigma^2.
double sd_combined_snr(const Eigen::MatrixXd& h, double per_tx_power, double noise_variance);

} // namespace mimovlc
