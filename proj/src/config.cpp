#include "mimovlc/config.hpp"

#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

namespace mimovlc {

namespace {

using nlohmann::json;

void check_keys(const json& j, const std::set<std::string>& allowed, const std::string& where)
{
    if (!j.is_object())
        throw Error(ErrorKind::Config, where + " must be an object");
    for (const auto& [key, _] : j.items())
        if (!allowed.count(key))
            throw Error(ErrorKind::Config, "unknown key '" + key + "' in " + where);
}

template <class T>
void read(const json& j, const char* key, T& out)
{
    if (j.contains(key))
        out = j.at(key).get<T>();
}

Eigen::MatrixXd matrix_from_json(const json& j)
{
    if (!j.is_array() || j.empty() || !j.front().is_array() || j.front().empty())
        throw Error(ErrorKind::Config, "matrix must be a non-empty array of rows");
    const auto rows = static_cast<Eigen::Index>(j.size());
    const auto cols = static_cast<Eigen::Index>(j.front().size());
    Eigen::MatrixXd m(rows, cols);
    for (Eigen::Index r = 0; r < rows; ++r) {
        if (static_cast<Eigen::Index>(j[r].size()) != cols)
            throw Error(ErrorKind::Config, "matrix rows differ in length");
        for (Eigen::Index c = 0; c < cols; ++c)
            m(r, c) = j[r][c].get<double>();
    }
    return m;
}

json matrix_to_json(const Eigen::MatrixXd& m)
{
    json rows = json::array();
    for (Eigen::Index r = 0; r < m.rows(); ++r) {
        json row = json::array();
        for (Eigen::Index c = 0; c < m.cols(); ++c)
            row.push_back(m(r, c));
        rows.push_back(row);
    }
    return rows;
}

} // namespace

std::optional<ModeCode> parse_policy(std::string_view text)
{
    if (text == "adaptive")
        return std::nullopt;
    return parse_mode(text);
}

int ExperimentConfig::num_tx() const
{
    return use_geometry ? geometry.num_tx : static_cast<int>(matrix.cols());
}

int ExperimentConfig::num_rx() const
{
    return use_geometry ? geometry.num_rx : static_cast<int>(matrix.rows());
}

void ExperimentConfig::validate() const
{
    if (axis_values.empty())
        throw Error(ErrorKind::Config, "sweep axis is empty");
    if (axis == Axis::DistanceM && !use_geometry)
        throw Error(ErrorKind::Config, "a distance axis needs a geometry channel");
    for (double v : axis_values)
        if (!std::isfinite(v) || (axis == Axis::DistanceM && !(v > 0.0)))
            throw Error(ErrorKind::Config, "invalid axis value");
    if (use_geometry)
        geometry.validate();
    else
        ChannelMatrix{matrix, 0.0}.validate();
    if (!(noise_variance >= 0.0))
        throw Error(ErrorKind::Config, "noise variance must be non-negative");
    if (frames < 1 || warmup_frames < 0 || blocks_per_frame < 1)
        throw Error(ErrorKind::Config, "frames and blocks_per_frame must be positive");
    if (seeds.empty())
        throw Error(ErrorKind::Config, "at least one seed is required");
    if (frame.block < 1 || frame.cp < 0 || frame.cp > frame.block)
        throw Error(ErrorKind::Config, "block size and cyclic prefix must satisfy 0 <= cp <= block");
    frame.training_config().validate();
    if (frame.n_tx != num_tx() || policy.num_tx != num_tx())
        throw Error(ErrorKind::Config, "transmitter count is inconsistent");
    policy.validate();
    if (hold_frames < 1)
        throw Error(ErrorKind::Config, "hold_frames must be at least 1");
    if (feedback_latency != 0 && feedback_latency != 1)
        throw Error(ErrorKind::Config, "feedback_latency must be 0 or 1");
    order_index(initial_mode.order);
    if (fixed_mode)
        order_index(fixed_mode->order);
    if (waveform) {
        if (passband)
            shaping.validate_passband();
        else
            shaping.validate();
        if (max_delay < 0)
            throw Error(ErrorKind::Config, "max_delay must be non-negative");
    }
    if (transport == Transport::Udp && feedback_latency != 1)
        throw Error(ErrorKind::Config, "the UDP transport carries feedback with one frame of latency");
    if (udp.deadline_ms < 1)
        throw Error(ErrorKind::Config, "udp deadline must be positive");
    if (threads < 0)
        throw Error(ErrorKind::Config, "threads must be non-negative");
}

ExperimentConfig config_from_json(const json& j)
{
    ExperimentConfig cfg;
    try {
        check_keys(j,
                   {"policy", "channel", "axis", "frames", "warmup_frames", "blocks_per_frame", "seeds", "frame",
                    "adapt", "waveform", "receiver", "transport", "udp", "threads"},
                   "config");
        if (j.contains("policy"))
            cfg.fixed_mode = parse_policy(j.at("policy").get<std::string>());

        if (j.contains("channel")) {
            const auto& c = j.at("channel");
            check_keys(c, {"matrix", "geometry", "noise_variance"}, "channel");
            if (c.contains("matrix") && c.contains("geometry"))
                throw Error(ErrorKind::Config, "channel takes either a matrix or a geometry");
            if (c.contains("matrix"))
                cfg.matrix = matrix_from_json(c.at("matrix"));
            if (c.contains("geometry")) {
                const auto& g = c.at("geometry");
                check_keys(g,
                           {"preset", "distance", "tx_spacing", "rx_spacing", "lambertian_order", "gain",
                            "crosstalk", "rx_fov_deg", "rx_tilt_deg", "num_tx", "num_rx"},
                           "geometry");
                cfg.use_geometry = true;
                if (g.value("preset", std::string{}) == "bench")
                    cfg.geometry = bench_geometry();
                else if (g.contains("preset") && g.at("preset").get<std::string>() != "none")
                    throw Error(ErrorKind::Config, "unknown geometry preset");
                auto& geo = cfg.geometry;
                read(g, "distance", geo.distance);
                read(g, "tx_spacing", geo.tx_spacing);
                read(g, "rx_spacing", geo.rx_spacing);
                read(g, "lambertian_order", geo.lambertian_order);
                read(g, "gain", geo.gain);
                read(g, "crosstalk", geo.crosstalk);
                read(g, "rx_fov_deg", geo.rx_fov_deg);
                read(g, "rx_tilt_deg", geo.rx_tilt_deg);
                read(g, "num_tx", geo.num_tx);
                read(g, "num_rx", geo.num_rx);
            }
            read(c, "noise_variance", cfg.noise_variance);
        }

        if (j.contains("axis")) {
            const auto& a = j.at("axis");
            check_keys(a, {"snr_db", "distance_m"}, "axis");
            if (a.size() != 1)
                throw Error(ErrorKind::Config, "axis needs exactly one of snr_db or distance_m");
            cfg.axis = a.contains("snr_db") ? Axis::SnrDb : Axis::DistanceM;
            const auto& v = a.contains("snr_db") ? a.at("snr_db") : a.at("distance_m");
            if (v.is_object()) {
                check_keys(v, {"start", "stop", "step"}, "axis range");
                const double start = v.at("start").get<double>();
                const double stop = v.at("stop").get<double>();
                const double step = v.at("step").get<double>();
                if (!(step > 0.0) || stop < start)
                    throw Error(ErrorKind::Config, "axis range needs step > 0 and stop >= start");
                cfg.axis_values.clear();
                const auto n = static_cast<int>(std::floor((stop - start) / step + 1e-9));
                for (int i = 0; i <= n; ++i)
                    cfg.axis_values.push_back(start + i * step);
            } else
                cfg.axis_values = v.get<std::vector<double>>();
        }

        read(j, "frames", cfg.frames);
        read(j, "warmup_frames", cfg.warmup_frames);
        read(j, "blocks_per_frame", cfg.blocks_per_frame);
        if (j.contains("seeds")) {
            const auto& s = j.at("seeds");
            cfg.seeds = s.is_array() ? s.get<std::vector<std::uint64_t>>()
                                     : std::vector<std::uint64_t>{s.get<std::uint64_t>()};
        }

        if (j.contains("frame")) {
            const auto& f = j.at("frame");
            check_keys(f, {"l_ts", "block", "cp", "seed"}, "frame");
            read(f, "l_ts", cfg.frame.l_ts);
            read(f, "block", cfg.frame.block);
            read(f, "cp", cfg.frame.cp);
            read(f, "seed", cfg.frame.seed);
        }

        cfg.policy.num_tx = cfg.num_tx();
        cfg.frame.n_tx = cfg.num_tx();
        cfg.policy.total_power = cfg.num_tx();
        if (j.contains("adapt")) {
            const auto& a = j.at("adapt");
            check_keys(a,
                       {"ber_target", "total_power", "hold_frames", "feedback_latency", "initial_mode", "modes",
                        "outage_rule"},
                       "adapt");
            read(a, "ber_target", cfg.policy.ber_target);
            read(a, "total_power", cfg.policy.total_power);
            read(a, "hold_frames", cfg.hold_frames);
            read(a, "feedback_latency", cfg.feedback_latency);
            if (a.contains("initial_mode"))
                cfg.initial_mode = parse_mode(a.at("initial_mode").get<std::string>());
            if (a.contains("modes")) {
                cfg.policy.modes.clear();
                for (const auto& m : a.at("modes"))
                    cfg.policy.modes.push_back(parse_mode(m.get<std::string>()));
            }
            if (a.contains("outage_rule")) {
                const auto rule = a.at("outage_rule").get<std::string>();
                if (rule == "silence")
                    cfg.policy.outage = OutageRule::Silence;
                else if (rule == "most_robust")
                    cfg.policy.outage = OutageRule::MostRobust;
                else
                    throw Error(ErrorKind::Config, "outage_rule must be silence or most_robust");
            }
        }

        if (j.contains("waveform")) {
            const auto& w = j.at("waveform");
            if (w.is_boolean())
                cfg.waveform = w.get<bool>();
            else {
                check_keys(w,
                           {"enabled", "passband", "sps", "rolloff", "span", "symbol_rate", "carrier", "max_delay",
                            "sync_threshold"},
                           "waveform");
                read(w, "enabled", cfg.waveform);
                read(w, "passband", cfg.passband);
                read(w, "sps", cfg.shaping.sps);
                read(w, "rolloff", cfg.shaping.rolloff);
                read(w, "span", cfg.shaping.span);
                read(w, "symbol_rate", cfg.shaping.symbol_rate);
                read(w, "carrier", cfg.shaping.carrier);
                read(w, "max_delay", cfg.max_delay);
                read(w, "sync_threshold", cfg.sync_threshold);
            }
        }

        if (j.contains("receiver")) {
            const auto& r = j.at("receiver");
            check_keys(r, {"known_noise", "perfect_csi"}, "receiver");
            read(r, "known_noise", cfg.known_noise);
            read(r, "perfect_csi", cfg.perfect_csi);
        }

        if (j.contains("transport")) {
            const auto t = j.at("transport").get<std::string>();
            if (t == "inproc")
                cfg.transport = Transport::InProcess;
            else if (t == "udp")
                cfg.transport = Transport::Udp;
            else
                throw Error(ErrorKind::Config, "transport must be inproc or udp");
        }
        if (j.contains("udp")) {
            const auto& u = j.at("udp");
            check_keys(u, {"host", "tx_port", "chan_port", "rx_port", "deadline_ms"}, "udp");
            read(u, "host", cfg.udp.host);
            read(u, "tx_port", cfg.udp.tx_port);
            read(u, "chan_port", cfg.udp.chan_port);
            read(u, "rx_port", cfg.udp.rx_port);
            read(u, "deadline_ms", cfg.udp.deadline_ms);
        }
        read(j, "threads", cfg.threads);
    } catch (const json::exception& e) {
        throw Error(ErrorKind::Config, e.what());
    }
    cfg.validate();
    return cfg;
}

ExperimentConfig load_config(const std::string& path)
{
    std::ifstream in(path);
    if (!in)
        throw Error(ErrorKind::Io, "cannot open config " + path);
    std::stringstream ss;
    ss << in.rdbuf();
    json j;
    try {
        j = json::parse(ss.str());
    } catch (const json::exception& e) {
        throw Error(ErrorKind::Config, std::string("config parse: ") + e.what());
    }
    return config_from_json(j);
}

json config_to_json(const ExperimentConfig& cfg)
{
    json j;
    j["policy"] = cfg.fixed_mode ? to_string(*cfg.fixed_mode) : "adaptive";
    json channel;
    if (cfg.use_geometry) {
        const auto& g = cfg.geometry;
        channel["geometry"] = {{"distance", g.distance},
                               {"tx_spacing", g.tx_spacing},
                               {"rx_spacing", g.rx_spacing},
                               {"lambertian_order", g.lambertian_order},
                               {"gain", g.gain},
                               {"crosstalk", g.crosstalk},
                               {"rx_fov_deg", g.rx_fov_deg},
                               {"rx_tilt_deg", g.rx_tilt_deg},
                               {"num_tx", g.num_tx},
                               {"num_rx", g.num_rx}};
    } else
        channel["matrix"] = matrix_to_json(cfg.matrix);
    channel["noise_variance"] = cfg.noise_variance;
    j["channel"] = channel;
    j["axis"] = {{cfg.axis == Axis::SnrDb ? "snr_db" : "distance_m", cfg.axis_values}};
    j["frames"] = cfg.frames;
    j["warmup_frames"] = cfg.warmup_frames;
    j["blocks_per_frame"] = cfg.blocks_per_frame;
    j["seeds"] = cfg.seeds;
    j["frame"] = {{"l_ts", cfg.frame.l_ts}, {"block", cfg.frame.block}, {"cp", cfg.frame.cp}, {"seed", cfg.frame.seed}};
    json modes = json::array();
    for (const auto& m : cfg.policy.modes)
        modes.push_back(to_string(m));
    j["adapt"] = {{"ber_target", cfg.policy.ber_target},
                  {"total_power", cfg.policy.total_power},
                  {"hold_frames", cfg.hold_frames},
                  {"feedback_latency", cfg.feedback_latency},
                  {"initial_mode", to_string(cfg.initial_mode)},
                  {"modes", modes},
                  {"outage_rule", cfg.policy.outage == OutageRule::Silence ? "silence" : "most_robust"}};
    j["waveform"] = {{"enabled", cfg.waveform},
                     {"passband", cfg.passband},
                     {"sps", cfg.shaping.sps},
                     {"rolloff", cfg.shaping.rolloff},
                     {"span", cfg.shaping.span},
                     {"symbol_rate", cfg.shaping.symbol_rate},
                     {"carrier", cfg.shaping.carrier},
                     {"max_delay", cfg.max_delay},
                     {"sync_threshold", cfg.sync_threshold}};
    j["receiver"] = {{"known_noise", cfg.known_noise}, {"perfect_csi", cfg.perfect_csi}};
    j["transport"] = cfg.transport == Transport::Udp ? "udp" : "inproc";
    j["udp"] = {{"host", cfg.udp.host},
                {"tx_port", cfg.udp.tx_port},
                {"chan_port", cfg.udp.chan_port},
                {"rx_port", cfg.udp.rx_port},
                {"deadline_ms", cfg.udp.deadline_ms}};
    j["threads"] = cfg.threads;
    return j;
}

ChannelMatrix point_channel(const ExperimentConfig& cfg, double axis_value)
{
    if (cfg.axis == Axis::DistanceM) {
        GeometryConfig geo = cfg.geometry;
        geo.distance = axis_value;
        return generate_channel(geo, cfg.noise_variance);
    }
    ChannelMatrix ch = cfg.use_geometry ? generate_channel(cfg.geometry, 0.0) : ChannelMatrix{cfg.matrix, 0.0};
    ch.noise_variance = cfg.policy.per_tx_power() / std::pow(10.0, axis_value / 10.0);
    ch.validate();
    return ch;
}

} // namespace mimovlc
