#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "mimovlc/common.hpp"
#include "mimovlc/rng.hpp"
#include "mimovlc/waveform.hpp"

namespace mimovlc {

/// Real non-negative intensity channel (N_r x N_t) and per-branch complex
/// noise variance. A zero variance is the noiseless limit.
struct ChannelMatrix {
    Eigen::MatrixXd h;
    double noise_variance = 0.0;

    int num_rx() const noexcept { return static_cast<int>(h.rows()); }
    int num_tx() const noexcept { return static_cast<int>(h.cols()); }
    void validate() const;
};

/// Line-of-sight geometry. Transmitters and receivers sit on parallel lines
/// separated by `distance`, centred on the common axis. LEDs point along the
/// axis; each receiver normal is tilted outward (away from the array centre)
/// by `rx_tilt_deg`, and sees nothing beyond `rx_fov_deg` off its normal.
struct GeometryConfig {
    double distance = 1.0;
    double tx_spacing = 0.5;
    double rx_spacing = 0.5;
    double lambertian_order = 1.0;
    double gain = 1.0;
    double crosstalk = 0.0;
    double rx_fov_deg = 90.0;
    double rx_tilt_deg = 0.0;
    int num_tx = 2;
    int num_rx = 2;

    void validate() const;
};

/// Bench geometry used for distance sweeps: tilted narrow-field receivers
/// whose field of view loses the LEDs a little beyond 2.3 m. `gain` still
/// needs calibration.
GeometryConfig bench_geometry();

/// h_nm = g0 cos^m(phi) cos(psi) / d_nm^2 inside the field of view, with
/// cross paths floored at crosstalk * h_nn.
ChannelMatrix generate_channel(const GeometryConfig& geo, double noise_variance);

/// y_n[k] = sum_m h_nm x_m[k] + n_n[k], n ~ CN(0, sigma^2).
Streams apply_channel(const ChannelMatrix& ch, std::span<const std::vector<cplx>> tx, rng::Engine& eng);
Streams apply_channel(const ChannelMatrix& ch, std::span<const std::vector<cplx>> tx, std::uint64_t seed);

/// Sample-level version. Baseband buffers get CN(0, sigma^2) noise per
/// sample, which is sigma^2 per symbol after the unit-energy matched filter.
/// Passband buffers get real N(0, sigma^2 / 4) noise, which downconversion
/// turns into the same CN(0, sigma^2).
std::vector<IqBuffer> apply_channel(const ChannelMatrix& ch, std::span<const IqBuffer> tx, rng::Engine& eng);

/// Eigenvalues of H H^T in descending order (min(N_r, N_t) of them).
std::vector<double> gram_eigenvalues(const Eigen::MatrixXd& h);

struct SnrSummary {
    /// rho * lambda_i^2, descending.
    std::vector<double> eigen;
    /// rho * ||H||_F^2.
    double frobenius = 0.0;
    /// rho * sum_m h_nm^2 for each receiver.
    std::vector<double> branch;
};

/// rho = total_power / (num_tx * noise_variance).
SnrSummary snr_per_stream(const Eigen::MatrixXd& h, double total_power, int num_tx, double noise_variance);

} // namespace mimovlc
