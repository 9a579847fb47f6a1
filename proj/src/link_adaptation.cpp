#include "mimovlc/link_adaptation.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <stdexcept>

#include "mimovlc/channel_model.hpp"
#include "mimovlc/constellation.hpp"
#include "mimovlc/mimo_detection.hpp"

namespace mimovlc {

std::uint8_t encode_mode(ModeCode m)
{
    const int idx = order_index(m.order);
    return static_cast<std::uint8_t>((m.scheme == Scheme::SD ? 4 : 0) | idx);
}

ModeCode decode_mode(std::uint8_t code)
{
    if (code > 7)
        throw Error(ErrorKind::InvalidArgument, "mode code exceeds three bits");
    return {(code & 4) ? Scheme::SD : Scheme::SM, kQamOrders[code & 3]};
}

std::array<ModeCode, 8> all_modes()
{
    std::array<ModeCode, 8> out;
    for (std::uint8_t c = 0; c < 8; ++c)
        out[c] = decode_mode(c);
    return out;
}

std::vector<ModeCode> all_modes_list()
{
    const auto a = all_modes();
    return {a.begin(), a.end()};
}

std::string to_string(ModeCode m)
{
    return std::string(m.scheme == Scheme::SD ? "SD-" : "SM-") + std::to_string(m.order);
}

std::string to_string(const ModeDecision& m)
{
    return m ? to_string(*m) : "outage";
}

ModeCode parse_mode(std::string_view text)
{
    std::string t;
    for (char c : text)
        if (c != '-' && c != '_')
            t += static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    if (t.size() > 2 && (t.starts_with("sm") || t.starts_with("sd"))) {
        const std::string digits = t.substr(2);
        if (std::all_of(digits.begin(), digits.end(), [](char c) { return std::isdigit(static_cast<unsigned char>(c)); })
            && digits.size() <= 3) {
            const int order = std::stoi(digits);
            if (is_supported_order(order))
                return {t[1] == 'd' ? Scheme::SD : Scheme::SM, order};
        }
    }
    throw Error(ErrorKind::Config, "unknown mode '" + std::string(text) + "'");
}

double mode_spectral_efficiency(ModeCode m, int num_tx)
{
    const double bits = std::log2(static_cast<double>(m.order));
    return m.scheme == Scheme::SM ? num_tx * bits : bits;
}

double mode_spectral_efficiency(const ModeDecision& m, int num_tx)
{
    return m ? mode_spectral_efficiency(*m, num_tx) : 0.0;
}

std::uint8_t encode_feedback_byte(const ModeDecision& m)
{
    return m ? encode_mode(*m) : std::uint8_t{0x80};
}

ModeDecision decode_feedback_byte(std::uint8_t byte)
{
    if (byte & 0x80)
        return std::nullopt;
    if (byte & 0x78)
        throw Error(ErrorKind::MalformedFrame, "reserved feedback bits set");
    return decode_mode(byte & 7);
}

double predict_ber(int order, double gamma)
{
    order_index(order);
    if (!(gamma >= 0.0))
        throw Error(ErrorKind::InvalidArgument, "SNR must be non-negative");
    const double root = std::sqrt(static_cast<double>(order));
    const double pre = 2.0 * (root - 1.0) / (root * std::log2(static_cast<double>(order)));
    return pre * std::erfc(std::sqrt(3.0 * gamma / (2.0 * (order - 1))));
}

double ber_bound(int order, double gamma)
{
    order_index(order);
    if (!(gamma >= 0.0))
        throw Error(ErrorKind::InvalidArgument, "SNR must be non-negative");
    return 0.2 * std::exp(-1.5 * gamma / (order - 1));
}

double ber_constant_k(double ber_target)
{
    if (!(ber_target > 0.0 && ber_target < 0.2))
        throw Error(ErrorKind::InvalidArgument, "BER target must lie in (0, 0.2)");
    return -1.5 / std::log(5.0 * ber_target);
}

double max_spectral_efficiency(double gamma, double ber_target)
{
    if (!(gamma >= 0.0))
        throw Error(ErrorKind::InvalidArgument, "SNR must be non-negative");
    return std::log2(1.0 + ber_constant_k(ber_target) * gamma);
}

CapacityForms capacity_forms(const Eigen::MatrixXd& h, double total_power, int num_tx, double noise_variance)
{
    if (!(noise_variance > 0.0) || num_tx < 1)
        throw Error(ErrorKind::InvalidArgument, "capacity needs positive noise variance and num_tx");
    const double rho = total_power / (num_tx * noise_variance);
    CapacityForms c;
    for (double ev : gram_eigenvalues(h))
        c.eigen += std::log2(1.0 + rho * ev);
    const Eigen::MatrixXd a = Eigen::MatrixXd::Identity(h.rows(), h.rows()) + rho * h * h.transpose();
    // log det via Cholesky: a is symmetric positive definite.
    const Eigen::LLT<Eigen::MatrixXd> llt(a);
    double logdet = 0.0;
    for (Eigen::Index i = 0; i < a.rows(); ++i)
        logdet += 2.0 * std::log2(llt.matrixL()(i, i));
    c.determinant = logdet;
    const double nm = static_cast<double>(std::min(h.rows(), h.cols()));
    c.frobenius_bound = nm * std::log2(1.0 + rho * h.squaredNorm() / nm);
    c.frobenius_single = std::log2(1.0 + rho * h.squaredNorm());
    return c;
}

double spectral_efficiency_mimo(const Eigen::MatrixXd& h, double total_power, int num_tx, double noise_variance)
{
    const CapacityForms c = capacity_forms(h, total_power, num_tx, noise_variance);
    const double tol = 1e-9 * std::max(1.0, std::abs(c.eigen));
    if (std::abs(c.eigen - c.determinant) > tol)
        throw std::logic_error("determinant and eigenvalue capacity forms disagree");
    if (c.eigen > c.frobenius_bound + tol || c.eigen < c.frobenius_single - tol)
        throw std::logic_error("capacity outside the Frobenius bounds");
    return c.eigen;
}

void AdaptPolicy::validate() const
{
    if (!(ber_target > 0.0 && ber_target < 0.5))
        throw Error(ErrorKind::InvalidArgument, "BER target must lie in (0, 0.5)");
    if (!(total_power > 0.0))
        throw Error(ErrorKind::InvalidArgument, "total power must be positive");
    if (num_tx < 1)
        throw Error(ErrorKind::InvalidArgument, "num_tx must be positive");
    if (modes.empty())
        throw Error(ErrorKind::InvalidArgument, "mode set is empty");
    for (const auto& m : modes)
        order_index(m.order);
}

std::array<double, 4> mode_threshold_table(const AdaptPolicy& policy)
{
    policy.validate();
    std::array<double, 4> out{};
    for (std::size_t i = 0; i < kQamOrders.size(); ++i) {
        const int order = kQamOrders[i];
        if (predict_ber(order, 0.0) <= policy.ber_target)
            continue;
        double lo = 0.0;
        double hi = 1.0;
        while (predict_ber(order, hi) > policy.ber_target)
            hi *= 2.0;
        for (int it = 0; it < 200 && hi - lo > 1e-15 * hi; ++it) {
            const double mid = 0.5 * (lo + hi);
            (predict_ber(order, mid) > policy.ber_target ? lo : hi) = mid;
        }
        out[i] = hi;
    }
    return out;
}

LinkSnrs link_snrs(const Eigen::MatrixXd& h, const AdaptPolicy& policy, double noise_variance)
{
    if (h.cols() != policy.num_tx)
        throw Error(ErrorKind::DimensionMismatch, "channel columns differ from policy num_tx");
    return {zf_stream_sinr(h, policy.per_tx_power(), noise_variance),
            sd_combined_snr(h, policy.per_tx_power(), noise_variance)};
}

ModeDecision select_mode(const LinkSnrs& snrs, const AdaptPolicy& policy, const std::array<double, 4>& thresholds)
{
    const double sm_min = snrs.sm.empty() ? 0.0 : *std::min_element(snrs.sm.begin(), snrs.sm.end());
    ModeDecision best;
    double best_se = 0.0;
    for (const ModeCode& m : policy.modes) {
        const double governing = m.scheme == Scheme::SM ? sm_min : snrs.sd;
        if (!(governing >= thresholds[order_index(m.order)]))
            continue;
        const double se = mode_spectral_efficiency(m, policy.num_tx);
        const bool better = !best || se > best_se || (se == best_se && m.scheme == Scheme::SD);
        if (better) {
            best = m;
            best_se = se;
        }
    }
    if (!best && policy.outage == OutageRule::MostRobust) {
        for (const ModeCode& m : policy.modes)
            if (!best || mode_spectral_efficiency(m, policy.num_tx) < best_se
                || (mode_spectral_efficiency(m, policy.num_tx) == best_se && m.scheme == Scheme::SD)) {
                best = m;
                best_se = mode_spectral_efficiency(m, policy.num_tx);
            }
    }
    return best;
}

ModeDecision select_mode(const LinkSnrs& snrs, const AdaptPolicy& policy)
{
    return select_mode(snrs, policy, mode_threshold_table(policy));
}

ModeDecision select_mode(const ChannelEstimate& est, const AdaptPolicy& policy, double noise_variance)
{
    return select_mode(link_snrs(est.h, policy, noise_variance), policy);
}

ModeController::ModeController(ModeDecision initial, int hold) : current_(initial), hold_(std::max(1, hold)) {}

ModeDecision ModeController::propose(const ModeDecision& proposal)
{
    if (proposal == current_) {
        pending_.reset();
        count_ = 0;
        return current_;
    }
    if (count_ > 0 && proposal == pending_)
        ++count_;
    else {
        pending_ = proposal;
        count_ = 1;
    }
    if (count_ >= hold_) {
        current_ = proposal;
        pending_.reset();
        count_ = 0;
    }
    return current_;
}

} // namespace mimovlc
