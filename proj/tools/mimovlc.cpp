// mimovlc: command-line front end for link runs, sweeps, calibration,
// transport roles and the self-test suites.

#include <chrono>
#include <cstdint>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <thread>

#include "CLI11.hpp"
#include "checks/suites.hpp"
#include "json.hpp"
#include "mimovlc/harness.hpp"
#include "mimovlc/transport.hpp"

using namespace mimovlc;
using nlohmann::json;

namespace {

struct Common {
    std::string config;
    std::optional<std::uint64_t> seed;
    std::string out;
    std::string mode;
    std::optional<int> frames;
    std::string waveform;
    std::string transport;
};

void add_common(CLI::App* cmd, Common& c)
{
    cmd->add_option("--config", c.config, "Experiment configuration (JSON)");
    cmd->add_option("--seed", c.seed, "Master seed; replaces the configured seed list");
    cmd->add_option("--out", c.out, "Output path (CSV for sweeps, JSON otherwise)");
    cmd->add_option("--mode", c.mode, "sm4|sm16|sm64|sm256|sd4|sd16|sd64|sd256|adaptive");
    cmd->add_option("--frames", c.frames, "Measured frames per point");
    cmd->add_option("--waveform", c.waveform, "on|off")->check(CLI::IsMember({"on", "off"}));
    cmd->add_option("--transport", c.transport, "inproc|udp")->check(CLI::IsMember({"inproc", "udp"}));
}

ExperimentConfig resolve(const Common& c)
{
    json j = json::object();
    if (!c.config.empty()) {
        std::ifstream in(c.config);
        if (!in)
            throw Error(ErrorKind::Io, "cannot open config " + c.config);
        try {
            j = json::parse(in);
        } catch (const json::exception& e) {
            throw Error(ErrorKind::Config, std::string("config parse: ") + e.what());
        }
    }
    if (c.seed)
        j["seeds"] = json::array({*c.seed});
    if (!c.mode.empty())
        j["policy"] = c.mode;
    if (c.frames)
        j["frames"] = *c.frames;
    if (!c.waveform.empty()) {
        if (j.contains("waveform") && j["waveform"].is_object())
            j["waveform"]["enabled"] = c.waveform == "on";
        else
            j["waveform"] = c.waveform == "on";
    }
    if (!c.transport.empty())
        j["transport"] = c.transport;
    return config_from_json(j);
}

void emit(const std::string& path, const std::string& text)
{
    if (path.empty()) {
        std::cout << text;
        return;
    }
    std::ofstream out(path);
    if (!out)
        throw Error(ErrorKind::Io, "cannot write " + path);
    out << text;
}

std::string summary_path(const std::string& out)
{
    const auto dot = out.rfind('.');
    const auto slash = out.rfind('/');
    if (dot == std::string::npos || (slash != std::string::npos && dot < slash))
        return out + ".summary.csv";
    return out.substr(0, dot) + ".summary" + out.substr(dot);
}

void warn(const ExperimentConfig& cfg)
{
    for (const auto& w : config_warnings(cfg))
        std::cerr << json{{"warning", w}}.dump() << '\n';
}

int cmd_run(const Common& c, std::optional<double> point)
{
    const ExperimentConfig cfg = resolve(c);
    warn(cfg);
    const double v = point.value_or(cfg.axis_values.front());
    json reports = json::array();
    for (const auto seed : cfg.seeds)
        reports.push_back(report_to_json(run_link(cfg, v, seed)));
    emit(c.out, (reports.size() == 1 ? reports.front() : reports).dump(2) + "\n");
    return 0;
}

int cmd_sweep(const Common& c, Axis axis, const std::optional<double>& from, const std::optional<double>& to,
              const std::optional<double>& step)
{
    ExperimentConfig cfg = resolve(c);
    if (from || to || step) {
        if (!(from && to && step))
            throw Error(ErrorKind::Config, "--from, --to and --step go together");
        json j = config_to_json(cfg);
        j["axis"] = {{axis == Axis::SnrDb ? "snr_db" : "distance_m", {{"start", *from}, {"stop", *to}, {"step", *step}}}};
        cfg = config_from_json(j);
    }
    if (cfg.axis != axis)
        throw Error(ErrorKind::Config, std::string("configuration sweeps ")
                                           + (cfg.axis == Axis::SnrDb ? "snr_db" : "distance_m")
                                           + "; use the matching subcommand or --from/--to/--step");
    warn(cfg);
    const SweepResult result = sweep(cfg);
    std::ostringstream rows;
    write_csv(rows, result);
    emit(c.out, rows.str());
    if (!c.out.empty()) {
        std::ostringstream agg;
        write_summary_csv(agg, result);
        emit(summary_path(c.out), agg.str());
    }
    return 0;
}

int cmd_calibrate(const Common& c, double distance, double ber, const std::string& target_mode)
{
    const ExperimentConfig cfg = resolve(c);
    CalibrationTarget target;
    target.mode = parse_mode(target_mode);
    target.distance = distance;
    target.ber_target = ber;
    const CalibrationResult r = calibrate(cfg, target, cfg.seeds.front());
    json calibrated = config_to_json(with_gain(cfg, r.gain));
    json doc{{"gain", r.gain},
             {"noise_variance", r.noise_variance},
             {"predicted_gain", r.predicted_gain},
             {"ber_at_anchor", r.ber},
             {"evaluations", r.evaluations},
             {"anchor", {{"mode", to_string(target.mode)}, {"distance_m", distance}, {"ber_target", ber}}},
             {"config", calibrated}};
    emit(c.out, doc.dump(2) + "\n");
    return 0;
}

int cmd_role(const Common& c, const std::string& role, int start_delay_ms)
{
    const ExperimentConfig cfg = resolve(c);
    const auto& u = cfg.udp;
    if (!u.tx_port || !u.chan_port || !u.rx_port)
        throw Error(ErrorKind::Config, "role processes need fixed udp ports in the configuration");
    const int own = role == "tx" ? u.tx_port : (role == "chan" ? u.chan_port : u.rx_port);
    const UdpSocket sock(u.host, own);
    const Endpoint tx{u.host, u.tx_port}, chan{u.host, u.chan_port}, rx{u.host, u.rx_port};
    // The socket is bound already, so datagrams sent to us meanwhile queue up.
    std::this_thread::sleep_for(std::chrono::milliseconds(start_delay_ms));

    std::ostringstream rows;
    rows << kCsvHeader << '\n';
    json reports = json::array();
    for (const double v : cfg.axis_values)
        for (const auto seed : cfg.seeds) {
            if (role == "tx")
                run_tx_role(cfg, v, seed, sock, chan);
            else if (role == "chan")
                run_channel_role(cfg, v, seed, sock, rx);
            else {
                const LinkReport r = run_rx_role(cfg, v, seed, sock, tx);
                rows << csv_row(r) << '\n';
                reports.push_back(report_to_json(r));
            }
        }
    if (role == "rx")
        emit(c.out, c.out.ends_with(".csv") ? rows.str() : reports.dump(2) + "\n");
    return 0;
}

int cmd_selftest(const Common& c)
{
    const std::uint64_t seed = c.seed.value_or(1);
    bool ok = true;
    for (const auto& r : checks::run_all_suites(seed)) {
        std::cout << (r.passed ? "PASS " : "FAIL ") << r.name << ": " << r.detail << '\n';
        ok &= r.passed;
    }
    return ok ? 0 : 1;
}

} // namespace

int main(int argc, char** argv)
{
    CLI::App app{"Adaptive MIMO VLC link simulator"};
    app.require_subcommand(1);

    Common c;
    std::optional<double> point, from, to, step;
    double distance = 1.7, ber = 1e-3;
    std::string target_mode = "sm64";

    auto* run = app.add_subcommand("run", "Run one axis point and print its report");
    add_common(run, c);
    run->add_option("--point", point, "Axis value (defaults to the first configured one)");

    auto* snr = app.add_subcommand("sweep-snr", "Sweep the SNR axis and write CSV");
    auto* dist = app.add_subcommand("sweep-distance", "Sweep the distance axis and write CSV");
    for (auto* s : {snr, dist}) {
        add_common(s, c);
        s->add_option("--from", from);
        s->add_option("--to", to);
        s->add_option("--step", step);
    }

    auto* cal = app.add_subcommand("calibrate", "Fit the geometry gain to a BER anchor");
    add_common(cal, c);
    cal->add_option("--distance", distance, "Anchor distance in metres");
    cal->add_option("--ber", ber, "BER at the anchor");
    cal->add_option("--target-mode", target_mode, "Mode that must reach the BER at the anchor");

    auto* tx = app.add_subcommand("tx", "Transmitter role over UDP");
    auto* chan = app.add_subcommand("chan", "Channel emulator role over UDP");
    auto* rx = app.add_subcommand("rx", "Receiver role over UDP (start it first)");
    int start_delay_ms = 0;
    for (auto* s : {tx, chan, rx}) {
        add_common(s, c);
        s->add_option("--start-delay-ms", start_delay_ms, "Wait after binding before the first frame");
    }

    auto* self = app.add_subcommand("selftest", "Run the invariant suites");
    add_common(self, c);

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        std::cerr << json{{"error", "usage"}, {"message", e.what()}}.dump() << '\n';
        return 64;
    }

    try {
        if (*run)
            return cmd_run(c, point);
        if (*snr)
            return cmd_sweep(c, Axis::SnrDb, from, to, step);
        if (*dist)
            return cmd_sweep(c, Axis::DistanceM, from, to, step);
        if (*cal)
            return cmd_calibrate(c, distance, ber, target_mode);
        if (*tx)
            return cmd_role(c, "tx", start_delay_ms);
        if (*chan)
            return cmd_role(c, "chan", start_delay_ms);
        if (*rx)
            return cmd_role(c, "rx", start_delay_ms);
        if (*self)
            return cmd_selftest(c);
    } catch (const Error& e) {
        std::cerr << json{{"error", to_string(e.kind())}, {"message", e.what()}}.dump() << '\n';
        return 2;
    } catch (const std::exception& e) {
        std::cerr << json{{"error", "internal"}, {"message", e.what()}}.dump() << '\n';
        return 3;
    }
    return 0;
}
