#include "mimovlc/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>

namespace mimovlc {

namespace {

constexpr double kZ95 = 1.959963984540054;

// JSON has no non-finite numbers; keep them as strings so they survive.
nlohmann::json num(double v)
{
    if (std::isnan(v))
        return "nan";
    if (std::isinf(v))
        return v > 0 ? "inf" : "-inf";
    return v;
}

double num(const nlohmann::json& j)
{
    if (j.is_string()) {
        const auto s = j.get<std::string>();
        if (s == "inf")
            return std::numeric_limits<double>::infinity();
        if (s == "-inf")
            return -std::numeric_limits<double>::infinity();
        return std::numeric_limits<double>::quiet_NaN();
    }
    return j.get<double>();
}

nlohmann::json nums(const std::vector<double>& v)
{
    auto a = nlohmann::json::array();
    for (double x : v)
        a.push_back(num(x));
    return a;
}

std::vector<double> nums(const nlohmann::json& j)
{
    std::vector<double> v;
    for (const auto& x : j)
        v.push_back(num(x));
    return v;
}

MetricSummary summarize(const std::vector<double>& xs)
{
    MetricSummary s;
    const double n = static_cast<double>(xs.size());
    for (double x : xs)
        s.mean += x / n;
    s.lo = s.hi = s.mean;
    if (xs.size() < 2 || !std::isfinite(s.mean))
        return s;
    double ss = 0.0;
    for (double x : xs)
        ss += (x - s.mean) * (x - s.mean);
    const double half = kZ95 * std::sqrt(ss / (n - 1.0) / n);
    s.lo = s.mean - half;
    s.hi = s.mean + half;
    return s;
}

std::string fmt(double v)
{
    if (std::isnan(v))
        return "";
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.9g", v);
    return buf;
}

std::string mode_columns(const std::string& mode)
{
    if (mode == "outage")
        return "outage,none,0";
    return mode + "," + mode.substr(0, 2) + "," + mode.substr(3);
}

} // namespace

BitErrorCount count_bit_errors(std::span<const std::uint8_t> tx, std::span<const std::uint8_t> rx)
{
    if (tx.size() != rx.size())
        throw Error(ErrorKind::LengthMismatch, "bit streams differ in length");
    BitErrorCount c;
    for (std::size_t i = 0; i < tx.size(); ++i)
        c.errors += (tx[i] != 0) != (rx[i] != 0);
    c.ber = tx.empty() ? 0.0 : static_cast<double>(c.errors) / static_cast<double>(tx.size());
    return c;
}

double achieved_spectral_efficiency(const ModeDecision& mode, double ber, const AdaptPolicy& policy)
{
    if (!mode || !(ber <= policy.ber_target))
        return 0.0;
    return mode_spectral_efficiency(*mode, policy.num_tx);
}

nlohmann::json report_to_json(const LinkReport& r)
{
    nlohmann::json j;
    j["seed"] = r.seed;
    j["distance_m"] = num(r.distance_m);
    j["snr_db"] = num(r.snr_db);
    j["frames"] = r.frames;
    j["warmup_frames"] = r.warmup_frames;
    j["lost_frames"] = r.lost_frames;
    j["total_bits"] = r.total_bits;
    j["bit_errors"] = r.bit_errors;
    j["ber"] = num(r.ber);
    j["ber_floor"] = num(r.ber_floor);
    j["evm"] = num(r.evm);
    j["stream_evm"] = nums(r.stream_evm);
    j["dwell"] = r.dwell;
    j["mode_trace"] = r.mode_trace;
    j["dominant_mode"] = r.dominant_mode;
    j["eigen_snr_db"] = nums(r.eigen_snr_db);
    j["zf_sinr_db"] = nums(r.zf_sinr_db);
    j["sd_snr_db"] = num(r.sd_snr_db);
    j["evm_snr_db"] = num(r.evm_snr_db);
    j["imaginary_residue"] = num(r.imaginary_residue);
    j["noise_estimate"] = num(r.noise_estimate);
    j["nominal_spec_eff"] = num(r.nominal_spec_eff);
    j["achieved_spec_eff"] = num(r.achieved_spec_eff);
    j["error_free"] = r.error_free;
    j["config"] = r.config;
    return j;
}

LinkReport report_from_json(const nlohmann::json& j)
{
    try {
        LinkReport r;
        r.seed = j.at("seed").get<std::uint64_t>();
        r.distance_m = num(j.at("distance_m"));
        r.snr_db = num(j.at("snr_db"));
        r.frames = j.at("frames").get<int>();
        r.warmup_frames = j.at("warmup_frames").get<int>();
        r.lost_frames = j.at("lost_frames").get<int>();
        r.total_bits = j.at("total_bits").get<std::uint64_t>();
        r.bit_errors = j.at("bit_errors").get<std::uint64_t>();
        r.ber = num(j.at("ber"));
        r.ber_floor = num(j.at("ber_floor"));
        r.evm = num(j.at("evm"));
        r.stream_evm = nums(j.at("stream_evm"));
        r.dwell = j.at("dwell").get<std::map<std::string, int>>();
        r.mode_trace = j.at("mode_trace").get<std::vector<std::string>>();
        r.dominant_mode = j.at("dominant_mode").get<std::string>();
        r.eigen_snr_db = nums(j.at("eigen_snr_db"));
        r.zf_sinr_db = nums(j.at("zf_sinr_db"));
        r.sd_snr_db = num(j.at("sd_snr_db"));
        r.evm_snr_db = num(j.at("evm_snr_db"));
        r.imaginary_residue = num(j.at("imaginary_residue"));
        r.noise_estimate = num(j.at("noise_estimate"));
        r.nominal_spec_eff = num(j.at("nominal_spec_eff"));
        r.achieved_spec_eff = num(j.at("achieved_spec_eff"));
        r.error_free = j.at("error_free").get<bool>();
        r.config = j.at("config");
        return r;
    } catch (const nlohmann::json::exception& e) {
        throw Error(ErrorKind::Config, std::string("malformed report: ") + e.what());
    }
}

ReportSummary aggregate_reports(std::span<const LinkReport> reports)
{
    if (reports.empty())
        throw Error(ErrorKind::InvalidArgument, "no reports to aggregate");
    ReportSummary s;
    s.count = reports.size();
    std::vector<double> ber, evm, snr, nominal, achieved;
    std::map<std::string, int> dwell;
    int error_free = 0;
    for (const auto& r : reports) {
        s.total_bits += r.total_bits;
        ber.push_back(r.ber);
        evm.push_back(r.evm);
        snr.push_back(r.snr_db);
        nominal.push_back(r.nominal_spec_eff);
        achieved.push_back(r.achieved_spec_eff);
        error_free += r.error_free;
        for (const auto& [mode, n] : r.dwell)
            dwell[mode] += n;
    }
    s.ber = summarize(ber);
    if (reports.size() > 1 && s.total_bits > 0) {
        const double p = s.ber.mean;
        const double half = kZ95 * std::sqrt(p * (1.0 - p) / static_cast<double>(s.total_bits));
        s.ber.lo = std::max(0.0, p - half);
        s.ber.hi = std::min(1.0, p + half);
    }
    s.evm = summarize(evm);
    s.snr_db = summarize(snr);
    s.nominal_spec_eff = summarize(nominal);
    s.achieved_spec_eff = summarize(achieved);
    s.error_free_fraction = static_cast<double>(error_free) / static_cast<double>(reports.size());
    int best = -1;
    int total = 0;
    for (const auto& [mode, n] : dwell)
        total += n;
    if (total > 0 && dwell.count("outage"))
        s.outage_fraction = static_cast<double>(dwell["outage"]) / total;
    for (const auto& [mode, n] : dwell)
        if (n > best) {
            best = n;
            s.dominant_mode = mode;
        }
    return s;
}

std::string csv_row(const LinkReport& r)
{
    const int measured = std::max(1, r.frames);
    const auto it = r.dwell.find("outage");
    const double outage = it == r.dwell.end() ? 0.0 : static_cast<double>(it->second) / measured;
    return fmt(r.distance_m) + "," + fmt(r.snr_db) + "," + mode_columns(r.dominant_mode) + "," + fmt(r.ber) + ","
           + fmt(r.evm) + "," + fmt(r.achieved_spec_eff) + "," + fmt(outage);
}

std::string csv_row(const ReportSummary& s, double distance_m, double snr_db)
{
    return fmt(distance_m) + "," + fmt(snr_db) + "," + mode_columns(s.dominant_mode) + "," + fmt(s.ber.mean) + ","
           + fmt(s.evm.mean) + "," + fmt(s.achieved_spec_eff.mean) + "," + fmt(s.outage_fraction);
}

} // namespace mimovlc
