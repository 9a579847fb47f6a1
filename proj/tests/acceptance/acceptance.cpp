// Acceptance run: one PASS/FAIL line per criterion, exit status 1 if any fails.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <map>
#include <string>
#include <vector>

#include "checks/suites.hpp"
#include "mimovlc/harness.hpp"
#include "mimovlc/transport.hpp"

using namespace mimovlc;

namespace {

// Reference BER from the textbook closed form, kept separate from the library.
double ref_ber(int m, double gamma)
{
    const double sm = std::sqrt(static_cast<double>(m));
    const double k = std::log2(static_cast<double>(m));
    return 2.0 * (sm - 1.0) / (sm * k) * std::erfc(std::sqrt(3.0 * gamma / (2.0 * (m - 1.0))));
}

double ref_gamma(int m, double ber)
{
    double lo = 0.0, hi = 1e6;
    for (int i = 0; i < 200; ++i) {
        const double mid = 0.5 * (lo + hi);
        (ref_ber(m, mid) > ber ? lo : hi) = mid;
    }
    return 0.5 * (lo + hi);
}

double db(double x) { return 10.0 * std::log10(x); }

struct Outcome {
    bool pass = true;
    std::string detail;

    void require(bool ok, const std::string& what)
    {
        if (!ok)
            pass = false;
        if (!detail.empty())
            detail += "; ";
        detail += (ok ? "" : "!") + what;
    }
};

std::string fmt(const char* f, double a)
{
    char buf[64];
    std::snprintf(buf, sizeof buf, f, a);
    return buf;
}

ExperimentConfig matrix_config(Eigen::MatrixXd h, std::optional<ModeCode> mode)
{
    ExperimentConfig cfg;
    const int nt = static_cast<int>(h.cols());
    cfg.matrix = std::move(h);
    cfg.frame.n_tx = nt;
    cfg.policy.num_tx = nt;
    cfg.policy.total_power = nt;
    cfg.fixed_mode = mode;
    cfg.warmup_frames = 0;
    return cfg;
}

// Criterion 1: single-stream AWGN BER against the closed form.
Outcome ber_fidelity()
{
    Outcome o;
    const double targets[] = {1e-2, 1e-3, 1e-4};
    for (int m : {4, 16, 64, 256}) {
        ExperimentConfig cfg = matrix_config(Eigen::MatrixXd::Ones(1, 1), ModeCode{Scheme::SM, m});
        cfg.blocks_per_frame = 64;
        const double bits_per_frame = 64.0 * 256 * std::log2(m);
        cfg.frames = static_cast<int>(std::ceil(1e7 / bits_per_frame));
        double worst = 0.0;
        for (double p : targets) {
            const double snr = db(ref_gamma(m, p));
            const LinkReport r = run_link(cfg, snr, 100 + m);
            const double rel = r.ber / ref_ber(m, std::pow(10.0, snr / 10.0)) - 1.0;
            worst = std::max(worst, std::abs(rel));
            if (r.total_bits < 10000000 || std::abs(rel) > 0.3)
                o.pass = false;
        }
        o.require(worst <= 0.3, "M=" + std::to_string(m) + " worst " + fmt("%+.1f%%", 100 * worst));
    }
    return o;
}

// SNR where BER crosses `target`, by log-linear interpolation over a grid.
double crossing(const ExperimentConfig& cfg, double from, double to, double step, double target,
                std::uint64_t seed)
{
    double prev_snr = NAN, prev_ber = NAN;
    for (double s = from; s <= to + 1e-9; s += step) {
        const double ber = std::max(run_link(cfg, s, seed).ber, 1e-9);
        if (ber <= target) {
            if (std::isnan(prev_ber))
                return s;
            const double t = (std::log10(prev_ber) - std::log10(target)) / (std::log10(prev_ber) - std::log10(ber));
            return prev_snr + t * (s - prev_snr);
        }
        prev_snr = s;
        prev_ber = ber;
    }
    return NAN;
}

// Criterion 2: SD reaches the target 3 dB before SM on the identity channel.
Outcome diversity_gain()
{
    Outcome o;
    for (int m : {4, 16}) {
        const double g = db(ref_gamma(m, 1e-3));
        const double bits_per_frame = 16.0 * 256 * std::log2(m);
        ExperimentConfig sm = matrix_config(Eigen::MatrixXd::Identity(2, 2), ModeCode{Scheme::SM, m});
        sm.blocks_per_frame = 16;
        sm.frames = static_cast<int>(std::ceil(1e6 / bits_per_frame));
        ExperimentConfig sd = sm;
        sd.fixed_mode = ModeCode{Scheme::SD, m};
        sd.frames *= 2;
        const double at_sm = crossing(sm, g - 1.5, g + 1.5, 0.25, 1e-3, 7);
        const double at_sd = crossing(sd, g - 4.5, g - 1.5, 0.25, 1e-3, 7);
        const double gap = at_sm - at_sd;
        o.require(std::abs(gap - 3.0) <= 0.5, "M=" + std::to_string(m) + " gap " + fmt("%.2f dB", gap));
    }
    return o;
}

// Criterion 3: adaptive staircase on a correlated channel.
Outcome staircase()
{
    Outcome o;
    Eigen::MatrixXd h(2, 2);
    h << 1.0, 0.5, 0.5, 1.0;
    ExperimentConfig cfg = matrix_config(h, std::nullopt);
    cfg.frames = 12;
    cfg.warmup_frames = 3;

    // Per-stream ZF and combined gains relative to the per-transmitter SNR.
    const Eigen::MatrixXd inv = (h.transpose() * h).inverse();
    const double sm_gain = 1.0 / std::max(inv(0, 0), inv(1, 1));
    const double sd_gain = (h * Eigen::VectorXd::Ones(2)).squaredNorm();
    const int orders[] = {4, 16, 64, 256};
    std::map<double, double> expected; // spectral efficiency -> first axis value
    for (int i = 0; i < 4; ++i) {
        const double g = ref_gamma(orders[i], 1e-3);
        const double k = std::log2(orders[i]);
        for (const auto& [se, at] : {std::pair{k, db(g / sd_gain)}, std::pair{2 * k, db(g / sm_gain)}}) {
            auto it = expected.find(se);
            if (it == expected.end() || at < it->second)
                expected[se] = at;
        }
    }
    // Only levels that raise the staircase.
    std::vector<std::pair<double, double>> steps;
    double best = 0.0;
    for (auto [at, se] : [&] {
             std::vector<std::pair<double, double>> v;
             for (auto [se, at] : expected)
                 v.emplace_back(at, se);
             std::sort(v.begin(), v.end());
             return v;
         }())
        if (se > best) {
            steps.emplace_back(se, at);
            best = se;
        }

    std::vector<double> axis, se;
    for (double s = -2.0; s <= 36.0 + 1e-9; s += 0.1) {
        const LinkReport r = run_link(cfg, s, 3);
        axis.push_back(s);
        se.push_back(r.dominant_mode == "outage" ? 0.0 : mode_spectral_efficiency(parse_mode(r.dominant_mode), 2));
    }
    std::vector<double> levels(se);
    std::sort(levels.begin(), levels.end());
    levels.erase(std::unique(levels.begin(), levels.end()), levels.end());
    o.require(levels == std::vector<double>{0, 2, 4, 6, 8, 12, 16}, "levels " + std::to_string(levels.size()));

    double worst = 0.0;
    for (const auto& [level, at] : steps) {
        const auto it = std::find_if(se.begin(), se.end(), [&](double v) { return v >= level; });
        const double found = it == se.end() ? INFINITY : axis[it - se.begin()];
        worst = std::max(worst, std::abs(found - at));
    }
    o.require(worst <= 0.5, "worst step offset " + fmt("%.2f dB", worst));
    return o;
}

// Farthest distance of the leading run of error-free points.
double error_free_range(const SweepResult& r)
{
    double range = 0.0;
    for (std::size_t i = 0; i < r.axis.size(); ++i) {
        if (r.summaries[i].error_free_fraction < 1.0)
            break;
        range = r.axis[i];
    }
    return range;
}

// Criterion 4: calibrated distance behaviour.
Outcome distance_behaviour()
{
    Outcome o;
    ExperimentConfig cfg;
    cfg.use_geometry = true;
    cfg.geometry = bench_geometry();
    cfg.axis = Axis::DistanceM;
    cfg.frames = 20;
    cfg.warmup_frames = 4;

    const CalibrationResult cal = calibrate(cfg, CalibrationTarget{}, 1);
    cfg = with_gain(cfg, cal.gain);
    o.require(cal.ber >= 0.5e-3 && cal.ber <= 2e-3, "anchor BER " + fmt("%.2e", cal.ber));

    cfg.axis_values.clear();
    for (int i = 2; i <= 30; ++i)
        cfg.axis_values.push_back(i / 10.0);

    cfg.fixed_mode = std::nullopt;
    const SweepResult adaptive = sweep(cfg);
    cfg.fixed_mode = ModeCode{Scheme::SM, 64};
    const SweepResult sm64 = sweep(cfg);
    cfg.fixed_mode = ModeCode{Scheme::SD, 64};
    const SweepResult sd64 = sweep(cfg);

    // (a) monotone downgrade through SM-256, SM-64, SM-16.
    double last = INFINITY;
    bool monotone = true;
    std::vector<std::string> seen;
    for (const auto& s : adaptive.summaries) {
        const double se =
            s.dominant_mode == "outage" ? 0.0 : mode_spectral_efficiency(parse_mode(s.dominant_mode), 2);
        monotone &= se <= last;
        last = se;
        if (seen.empty() || seen.back() != s.dominant_mode)
            seen.push_back(s.dominant_mode);
    }
    const auto has = [&](const char* m) { return std::find(seen.begin(), seen.end(), m) != seen.end(); };
    std::string trace;
    for (const auto& m : seen)
        trace += (trace.empty() ? "" : ">") + m;
    o.require(monotone && has("SM-256") && has("SM-64") && has("SM-16"), "trace " + trace);

    // (b) range ordering and magnitudes.
    const double ra = error_free_range(adaptive), rd = error_free_range(sd64), rs = error_free_range(sm64);
    o.require(ra > rd && rd > rs, "ranges adaptive " + fmt("%.1f", ra) + " SD-64 " + fmt("%.1f", rd) + " SM-64 "
                                      + fmt("%.1f", rs));
    o.require(std::abs(rd - 1.9) <= 0.15 * 1.9, "SD-64 range within 15%");
    o.require(std::abs(ra - 2.2) <= 0.15 * 2.2, "adaptive range within 15%");

    // (c) mean error-free spectral efficiency over 0.2 to 2.2 m.
    double sum = 0.0;
    int n = 0;
    for (std::size_t i = 0; i < adaptive.axis.size(); ++i)
        if (adaptive.axis[i] <= 2.2 + 1e-9) {
            sum += adaptive.summaries[i].achieved_spec_eff.mean;
            ++n;
        }
    o.require(std::abs(sum / n - 12.0) <= 2.0, "mean SE " + fmt("%.2f", sum / n));
    return o;
}

// Criterion 5: invariant suites.
Outcome property_suites()
{
    Outcome o;
    for (const auto& r : checks::run_all_suites(1))
        o.require(r.passed, r.name);
    return o;
}

// Criterion 6: UDP loopback equals the in-process run; latency shifts the trace.
Outcome transport_transparency()
{
    Outcome o;
    std::vector<std::pair<std::string, ExperimentConfig>> configs;
    {
        ExperimentConfig a = matrix_config(Eigen::MatrixXd::Identity(2, 2), std::nullopt);
        a.frames = 8;
        configs.emplace_back("adaptive-symbols", a);
    }
    {
        Eigen::MatrixXd h(2, 2);
        h << 1.0, 0.3, 0.2, 0.9;
        ExperimentConfig b = matrix_config(h, ModeCode{Scheme::SD, 16});
        b.frames = 6;
        b.waveform = true;
        configs.emplace_back("sd16-waveform", b);
    }
    {
        ExperimentConfig c;
        c.use_geometry = true;
        c.geometry = bench_geometry();
        c.axis = Axis::DistanceM;
        c.frames = 6;
        c.waveform = true;
        c.passband = true;
        configs.emplace_back("geometry-passband", c);
    }
    const double points[] = {22.0, 18.0, 1.2};
    int identical = 0, total = 0;
    for (std::size_t i = 0; i < configs.size(); ++i)
        for (std::uint64_t seed : {1, 2, 3}) {
            const auto& cfg = configs[i].second;
            const bool same =
                report_to_json(run_link(cfg, points[i], seed)) == report_to_json(run_emulated_link(cfg, points[i], seed));
            identical += same;
            ++total;
        }
    o.require(identical == total, std::to_string(identical) + "/" + std::to_string(total) + " identical");

    // Trace shift: a point near a threshold so the mode moves.
    ExperimentConfig lat = matrix_config(Eigen::MatrixXd::Identity(2, 2), std::nullopt);
    lat.frames = 30;
    lat.hold_frames = 1;
    lat.initial_mode = ModeCode{Scheme::SD, 4};
    const double snr = db(ref_gamma(64, 1e-3));
    lat.feedback_latency = 0;
    const auto t0 = run_link(lat, snr, 5).mode_trace;
    lat.feedback_latency = 1;
    const auto t1 = run_emulated_link(lat, snr, 5).mode_trace;
    bool shifted = t0.size() == t1.size() && t1.front() == to_string(lat.initial_mode);
    for (std::size_t k = 1; shifted && k < t1.size(); ++k)
        shifted = t1[k] == t0[k - 1];
    const bool moves = std::adjacent_find(t0.begin(), t0.end(), std::not_equal_to<>()) != t0.end();
    o.require(shifted && moves, "latency shift over " + std::to_string(t0.size()) + " frames");
    return o;
}

} // namespace

int main(int argc, char** argv)
{
    const std::vector<std::pair<const char*, Outcome (*)()>> criteria{
        {"1 BER curve fidelity", ber_fidelity},     {"2 diversity gain", diversity_gain},
        {"3 spectral-efficiency steps", staircase}, {"4 distance behaviour", distance_behaviour},
        {"5 property suites", property_suites},     {"6 transport transparency", transport_transparency},
    };
    const std::string only = argc > 1 ? argv[1] : "";
    bool all = true;
    for (const auto& [name, run] : criteria) {
        if (!only.empty() && only != std::string(name).substr(0, only.size()))
            continue;
        const auto t0 = std::chrono::steady_clock::now();
        Outcome o;
        try {
            o = run();
        } catch (const std::exception& e) {
            o.pass = false;
            o.detail = std::string("exception: ") + e.what();
        }
        const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        std::printf("%s criterion %s: %s (%.0f s)\n", o.pass ? "PASS" : "FAIL", name, o.detail.c_str(), secs);
        std::fflush(stdout);
        all &= o.pass;
    }
    return all ? 0 : 1;
}
