#include "mimovlc/harness.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <mutex>
#include <thread>

#include "mimovlc/link.hpp"
#include "mimovlc/mimo_detection.hpp"
#include "mimovlc/transport.hpp"

namespace mimovlc {

LinkReport run_link(const ExperimentConfig& cfg, double axis_value, std::uint64_t seed)
{
    cfg.validate();
    if (cfg.transport == Transport::Udp)
        return run_emulated_link(cfg, axis_value, seed);
    return run_link_inproc(cfg, axis_value, seed);
}

SweepResult sweep(const ExperimentConfig& cfg)
{
    cfg.validate();
    SweepResult result;
    result.axis = cfg.axis_values;
    const std::size_t nseeds = cfg.seeds.size();
    const std::size_t tasks = result.axis.size() * nseeds;
    result.reports.resize(tasks);

    const bool fixed_ports =
        cfg.transport == Transport::Udp && (cfg.udp.tx_port || cfg.udp.chan_port || cfg.udp.rx_port);
    std::size_t workers = cfg.threads > 0 ? static_cast<std::size_t>(cfg.threads)
                                          : std::max(1u, std::thread::hardware_concurrency());
    if (fixed_ports)
        workers = 1;
    workers = std::min(workers, tasks);

    std::atomic<std::size_t> next{0};
    std::exception_ptr failure;
    std::mutex failure_mutex;
    auto work = [&] {
        for (std::size_t t; (t = next++) < tasks;) {
            try {
                result.reports[t] = run_link(cfg, result.axis[t / nseeds], cfg.seeds[t % nseeds]);
            } catch (...) {
                std::lock_guard lock(failure_mutex);
                if (!failure)
                    failure = std::current_exception();
                next = tasks;
            }
        }
    };
    if (workers <= 1)
        work();
    else {
        std::vector<std::thread> pool;
        for (std::size_t i = 0; i < workers; ++i)
            pool.emplace_back(work);
        for (auto& th : pool)
            th.join();
    }
    if (failure)
        std::rethrow_exception(failure);

    for (std::size_t p = 0; p < result.axis.size(); ++p)
        result.summaries.push_back(
            aggregate_reports(std::span(result.reports).subspan(p * nseeds, nseeds)));
    return result;
}

void write_csv(std::ostream& out, const SweepResult& result)
{
    out << kCsvHeader << '\n';
    for (const auto& r : result.reports)
        out << csv_row(r) << '\n';
}

void write_summary_csv(std::ostream& out, const SweepResult& result)
{
    out << kCsvHeader << '\n';
    const std::size_t nseeds = result.summaries.empty() ? 0 : result.reports.size() / result.summaries.size();
    for (std::size_t p = 0; p < result.summaries.size(); ++p) {
        const auto& first = result.reports[p * nseeds];
        out << csv_row(result.summaries[p], first.distance_m, result.summaries[p].snr_db.mean) << '\n';
    }
}

std::vector<std::string> config_warnings(const ExperimentConfig& cfg)
{
    std::vector<std::string> out;
    const double symbols = static_cast<double>(cfg.blocks_per_frame) * cfg.frame.block * cfg.frames;
    double bits_per_symbol = 0.0;
    if (cfg.fixed_mode)
        bits_per_symbol = cfg.fixed_mode->scheme == Scheme::SM ? cfg.num_tx() * std::log2(cfg.fixed_mode->order)
                                                               : std::log2(cfg.fixed_mode->order);
    else
        for (const auto& m : cfg.policy.modes) {
            const double b = mode_spectral_efficiency(m, cfg.num_tx());
            bits_per_symbol = bits_per_symbol == 0.0 ? b : std::min(bits_per_symbol, b);
        }
    const double floor = 10.0 / (symbols * bits_per_symbol);
    if (floor > cfg.policy.ber_target)
        out.push_back("resolvable BER floor " + std::to_string(floor) + " per point exceeds the BER target "
                      + std::to_string(cfg.policy.ber_target) + "; increase frames");
    return out;
}

ExperimentConfig with_gain(ExperimentConfig cfg, double gain)
{
    cfg.geometry.gain = gain;
    return cfg;
}

double predicted_anchor_gain(const ExperimentConfig& cfg, const CalibrationTarget& target)
{
    if (!cfg.use_geometry)
        throw Error(ErrorKind::Calibration, "calibration needs a geometry channel");
    GeometryConfig geo = cfg.geometry;
    geo.distance = target.distance;
    geo.gain = 1.0;
    const ChannelMatrix ch = generate_channel(geo, cfg.noise_variance);
    AdaptPolicy policy = cfg.policy;
    policy.ber_target = target.ber_target;
    const LinkSnrs s = link_snrs(ch.h, policy, cfg.noise_variance);
    const double governing =
        target.mode.scheme == Scheme::SM ? *std::min_element(s.sm.begin(), s.sm.end()) : s.sd;
    if (!(governing > 0.0) || !std::isfinite(governing))
        throw Error(ErrorKind::Calibration, "anchor distance has no usable line of sight for " + to_string(target.mode));
    const double gamma = mode_threshold_table(policy)[order_index(target.mode.order)];
    return std::sqrt(gamma / governing);
}

CalibrationResult calibrate(const ExperimentConfig& cfg, const CalibrationTarget& target, std::uint64_t seed)
{
    ExperimentConfig run = cfg;
    run.fixed_mode = target.mode;
    run.axis = Axis::DistanceM;
    run.axis_values = {target.distance};
    run.policy.ber_target = target.ber_target;
    run.transport = Transport::InProcess;
    run.validate();

    CalibrationResult result;
    result.noise_variance = cfg.noise_variance;
    result.predicted_gain = predicted_anchor_gain(run, target);
    auto [lo, hi] = target.gain_bracket.value_or(
        std::pair{result.predicted_gain / 1.5, result.predicted_gain * 1.5});
    if (!(lo > 0.0 && hi > lo))
        throw Error(ErrorKind::Calibration, "gain bracket must satisfy 0 < lo < hi");

    auto ber_at = [&](double g) {
        ++result.evaluations;
        return run_link_inproc(with_gain(run, g), target.distance, seed).ber;
    };
    const double ber_lo = ber_at(lo);
    const double ber_hi = ber_at(hi);
    if (!(ber_lo > target.ber_target && ber_hi <= target.ber_target))
        throw Error(ErrorKind::Calibration, "gain range [" + std::to_string(lo) + ", " + std::to_string(hi)
                                                + "] does not bracket the BER target (BER " + std::to_string(ber_lo)
                                                + " .. " + std::to_string(ber_hi) + ")");
    result.ber = ber_hi;
    while (hi / lo > 1.0 + target.tolerance) {
        const double mid = std::sqrt(lo * hi);
        const double b = ber_at(mid);
        if (b > target.ber_target)
            lo = mid;
        else {
            hi = mid;
            result.ber = b;
        }
    }
    result.gain = hi;
    return result;
}

} // namespace mimovlc
