#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

#include "mimovlc/channel_estimation.hpp"

namespace mimovlc {

enum class Scheme : std::uint8_t { SM, SD };

struct ModeCode {
    Scheme scheme = Scheme::SM;
    int order = 4;

    friend bool operator==(const ModeCode&, const ModeCode&) = default;
};

/// Empty means outage: nothing is transmitted.
using ModeDecision = std::optional<ModeCode>;

/// bit2: scheme (1 = SD), bits1..0: index of the order in {4, 16, 64, 256}.
std::uint8_t encode_mode(ModeCode m);
ModeCode decode_mode(std::uint8_t code);

/// All eight modes in code order.
std::array<ModeCode, 8> all_modes();
std::vector<ModeCode> all_modes_list();

/// "SM-64", "SD-4", or "outage".
std::string to_string(ModeCode m);
std::string to_string(const ModeDecision& m);

/// Accepts "sm64", "SM-64", "sd_4" and friends; throws Config otherwise.
ModeCode parse_mode(std::string_view text);

/// Nominal spectral efficiency, b/s/Hz: num_tx * log2 M for SM, log2 M for SD.
double mode_spectral_efficiency(ModeCode m, int num_tx);
double mode_spectral_efficiency(const ModeDecision& m, int num_tx);

/// Feedback byte: low three bits carry the mode, bit 7 flags outage.
std::uint8_t encode_feedback_byte(const ModeDecision& m);
ModeDecision decode_feedback_byte(std::uint8_t byte);

/// Approximate Gray M-QAM bit error rate at symbol SNR gamma (linear).
double predict_ber(int order, double gamma);

/// 0.2 exp(-1.5 gamma / (M - 1)).
double ber_bound(int order, double gamma);

/// K = -1.5 / ln(5 BER_tgt).
double ber_constant_k(double ber_target);

/// log2(1 + K gamma).
double max_spectral_efficiency(double gamma, double ber_target);

struct CapacityForms {
    double eigen = 0.0;
    double determinant = 0.0;
    /// N_m log2(1 + rho ||H||^2 / N_m), N_m = min(N_t, N_r). Upper bound.
    double frobenius_bound = 0.0;
    /// log2(1 + rho ||H||^2): all channel energy in one mode. Lower bound.
    double frobenius_single = 0.0;
};

/// Both capacity forms and the Frobenius upper bound, with
/// rho = total_power / (num_tx sigma^2).
CapacityForms capacity_forms(const Eigen::MatrixXd& h, double total_power, int num_tx, double noise_variance);

/// Eigenvalue form; throws std::logic_error if the forms disagree beyond 1e-9
/// or exceed the bound.
double spectral_efficiency_mimo(const Eigen::MatrixXd& h, double total_power, int num_tx, double noise_variance);

enum class OutageRule : std::uint8_t {
    /// Transmit nothing until some mode is feasible.
    Silence,
    /// Fall back to the most robust available mode.
    MostRobust,
};

struct AdaptPolicy {
    double ber_target = 1e-3;
    /// Sum over transmitters; each gets total_power / num_tx.
    double total_power = 2.0;
    int num_tx = 2;
    std::vector<ModeCode> modes = all_modes_list();
    OutageRule outage = OutageRule::Silence;

    double per_tx_power() const noexcept { return total_power / num_tx; }
    void validate() const;
};

/// gamma_min for each order in kQamOrders: the SNR at which predict_ber hits
/// the target.
std::array<double, 4> mode_threshold_table(const AdaptPolicy& policy);

struct LinkSnrs {
    /// Post-ZF SINR per stream.
    std::vector<double> sm;
    /// MRC output SNR for the diversity scheme.
    double sd = 0.0;
};

LinkSnrs link_snrs(const Eigen::MatrixXd& h, const AdaptPolicy& policy, double noise_variance);

/// Feasible mode of largest nominal spectral efficiency; ties go to SD.
ModeDecision select_mode(const LinkSnrs& snrs, const AdaptPolicy& policy, const std::array<double, 4>& thresholds);
ModeDecision select_mode(const LinkSnrs& snrs, const AdaptPolicy& policy);
ModeDecision select_mode(const ChannelEstimate& est, const AdaptPolicy& policy, double noise_variance);

/// Hysteresis: the active mode changes only after the same different
/// proposal arrives `hold` times in a row.
class ModeController {
public:
    explicit ModeController(ModeDecision initial = ModeCode{Scheme::SM, 64}, int hold = 2);

    /// Feed one proposal; returns the active mode afterwards.
    ModeDecision propose(const ModeDecision& proposal);
    const ModeDecision& current() const noexcept { return current_; }

private:
    ModeDecision current_;
    ModeDecision pending_;
    int count_ = 0;
    int hold_;
};

} // namespace mimovlc
