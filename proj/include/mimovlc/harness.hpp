#pragma once

#include <cstdint>
#include <optional>
#include <ostream>
#include <string>
#include <utility>
#include <vector>

#include "mimovlc/config.hpp"
#include "mimovlc/metrics.hpp"

namespace mimovlc {

/// One axis point with one seed, over the configured transport.
LinkReport run_link(const ExperimentConfig& cfg, double axis_value, std::uint64_t seed);

struct SweepResult {
    std::vector<double> axis;
    /// Ordered by axis point, then by seed.
    std::vector<LinkReport> reports;
    /// One per axis point.
    std::vector<ReportSummary> summaries;
};

/// Runs every (point, seed) task, in parallel when the transport allows it.
/// Output order never depends on completion order.
SweepResult sweep(const ExperimentConfig& cfg);

void write_csv(std::ostream& out, const SweepResult& result);
void write_summary_csv(std::ostream& out, const SweepResult& result);

/// Human-readable notes on settings that cannot support a BER claim.
std::vector<std::string> config_warnings(const ExperimentConfig& cfg);

struct CalibrationTarget {
    ModeCode mode{Scheme::SM, 64};
    double distance = 1.7;
    double ber_target = 1e-3;
    /// Relative width of the final gain bracket.
    double tolerance = 0.01;
    /// Defaults to a factor of 1.5 either side of the analytic estimate.
    std::optional<std::pair<double, double>> gain_bracket;
};

struct CalibrationResult {
    double gain = 0.0;
    double noise_variance = 0.0;
    /// Gain at which the predicted governing SNR equals the threshold.
    double predicted_gain = 0.0;
    double ber = 0.0;
    int evaluations = 0;
};

/// Gain at which the target mode's governing SNR at the anchor distance
/// equals its threshold, from the closed-form predictor.
double predicted_anchor_gain(const ExperimentConfig& cfg, const CalibrationTarget& target);

/// Bisection on the gain (noise fixed) until the measured BER of the fixed
/// target mode crosses the target at the anchor distance. Throws
/// Calibration when the range does not bracket the crossing.
CalibrationResult calibrate(const ExperimentConfig& cfg, const CalibrationTarget& target, std::uint64_t seed);

/// Copy of cfg with the geometry gain replaced.
ExperimentConfig with_gain(ExperimentConfig cfg, double gain);

} // namespace mimovlc
