#pragma once

#include <cstdint>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "json.hpp"
#include "mimovlc/common.hpp"
#include "mimovlc/link_adaptation.hpp"

namespace mimovlc {

struct BitErrorCount {
    std::uint64_t errors = 0;
    double ber = 0.0;
};

/// Hamming distance and its ratio (0 for empty input).
BitErrorCount count_bit_errors(std::span<const std::uint8_t> tx, std::span<const std::uint8_t> rx);

/// Nominal spectral efficiency when ber <= target, else 0; outage gives 0.
double achieved_spectral_efficiency(const ModeDecision& mode, double ber, const AdaptPolicy& policy);

struct LinkReport {
    std::uint64_t seed = 0;
    /// NaN when the run is not on a distance axis.
    double distance_m = 0.0;
    /// 10 log10(rho ||H||_F^2 / N_r): mean received SNR per branch.
    double snr_db = 0.0;

    int frames = 0;
    int warmup_frames = 0;
    int lost_frames = 0;
    std::uint64_t total_bits = 0;
    std::uint64_t bit_errors = 0;
    double ber = 0.0;
    /// 10 / total_bits; BER claims below this are not resolvable.
    double ber_floor = 0.0;

    double evm = 0.0;
    std::vector<double> stream_evm;

    /// Measured frames per mode (warm-up excluded).
    std::map<std::string, int> dwell;
    /// Active mode of every frame, warm-up included.
    std::vector<std::string> mode_trace;
    std::string dominant_mode = "outage";

    /// Means over measured frames, in dB.
    std::vector<double> eigen_snr_db;
    std::vector<double> zf_sinr_db;
    double sd_snr_db = 0.0;
    double evm_snr_db = 0.0;
    double imaginary_residue = 0.0;
    double noise_estimate = 0.0;

    double nominal_spec_eff = 0.0;
    double achieved_spec_eff = 0.0;
    bool error_free = false;

    nlohmann::json config;
};

nlohmann::json report_to_json(const LinkReport& r);
LinkReport report_from_json(const nlohmann::json& j);

struct MetricSummary {
    double mean = 0.0;
    double lo = 0.0;
    double hi = 0.0;
};

struct ReportSummary {
    std::size_t count = 0;
    std::uint64_t total_bits = 0;
    MetricSummary ber;
    MetricSummary evm;
    MetricSummary snr_db;
    MetricSummary nominal_spec_eff;
    MetricSummary achieved_spec_eff;
    double error_free_fraction = 0.0;
    /// Share of measured frames spent in outage.
    double outage_fraction = 0.0;
    std::string dominant_mode = "outage";
};

/// Means with 95% normal intervals. The BER interval uses the binomial
/// standard error over the pooled bits; a single report has zero width.
ReportSummary aggregate_reports(std::span<const LinkReport> reports);

inline constexpr const char* kCsvHeader = "distance_m,snr_db,mode,scheme,qam_order,ber,evm,spec_eff,outage";

std::string csv_row(const LinkReport& r);
std::string csv_row(const ReportSummary& s, double distance_m, double snr_db);

} // namespace mimovlc
