#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "mimovlc/common.hpp"
#include "mimovlc/framing.hpp"

namespace mimovlc {

struct ChannelEstimate {
    Eigen::MatrixXd h;
    /// Per-entry residual: mean |y - h ts|^2 over the slot.
    Eigen::MatrixXd residual_variance;
    /// |Im <y, ts>| / <ts, ts>, the energy folded out by the real projection.
    Eigen::MatrixXd imaginary_residue;
    /// Eigenvalues of h h^T, descending.
    std::vector<double> eigenvalues;
    std::uint64_t frame_index = 0;

    /// Mean residual variance over all entries; a rough noise estimate.
    double noise_estimate() const;
};

/// Least-squares estimate from one observation per (receiver, slot).
/// observations[n][m] is the slot-m segment seen by receiver n.
ChannelEstimate estimate_channel(std::span<const Streams> observations, const Training& known,
                                 std::uint64_t frame_index = 0);

/// Wraps a known matrix as an estimate (genie receiver, tests).
ChannelEstimate perfect_estimate(const Eigen::MatrixXd& h);

struct ModeSnrs {
    /// rho * lambda_i^2, descending.
    std::vector<double> sm;
    /// (P_t / N_t) * ||h_eff||^2 / sigma^2 with h_eff the row sums of H.
    double sd = 0.0;
};

ModeSnrs eigen_snrs(const ChannelEstimate& est, double total_power, int num_tx, double noise_variance);

/// 1 / evm^2; Saturation when evm is zero.
double snr_from_evm(double evm);

} // namespace mimovlc
