#include "mimovlc/link.hpp"

#include <bit>
#include <cmath>
#include <limits>

#include "mimovlc/channel_model.hpp"
#include "mimovlc/framing.hpp"
#include "mimovlc/mimo_detection.hpp"
#include "mimovlc/rng.hpp"
#include "mimovlc/waveform.hpp"

namespace mimovlc {

namespace {

FrameLayout layout_of(const ExperimentConfig& cfg)
{
    FrameLayout l = cfg.frame;
    l.n_tx = cfg.num_tx();
    l.num_blocks = cfg.blocks_per_frame;
    return l;
}

std::size_t payload_symbols(const ExperimentConfig& cfg)
{
    return static_cast<std::size_t>(cfg.blocks_per_frame) * cfg.frame.block;
}

int stream_count(const ModeCode& m, int num_tx)
{
    return m.scheme == Scheme::SM ? num_tx : 1;
}

Bits frame_bits(const ExperimentConfig& cfg, std::uint64_t ps, std::uint32_t frame, const ModeCode& mode)
{
    auto eng = rng::engine(ps, rng::Stream::Bits, frame);
    const std::size_t bps = static_cast<std::size_t>(std::countr_zero(static_cast<unsigned>(mode.order)));
    return rng::random_bits(eng, stream_count(mode, cfg.num_tx()) * payload_symbols(cfg) * bps);
}

double db(double x)
{
    return 10.0 * std::log10(x);
}

} // namespace

std::uint64_t point_seed(std::uint64_t seed, double axis_value)
{
    return rng::derive(seed, rng::Stream::Point, std::bit_cast<std::uint64_t>(axis_value));
}

namespace {

// Through the bit pattern, so the narrowing cannot be folded away.
double to_f32(double x)
{
    return static_cast<double>(std::bit_cast<float>(std::bit_cast<std::uint32_t>(static_cast<float>(x))));
}

} // namespace

void quantize_f32(Streams& s)
{
    for (auto& stream : s)
        for (auto& v : stream)
            v = {to_f32(v.real()), to_f32(v.imag())};
}

TxRole::TxRole(const ExperimentConfig& cfg, double axis_value, std::uint64_t seed)
    : cfg_(cfg), seed_(point_seed(seed, axis_value))
{
    cfg_.validate();
}

Streams TxRole::build(std::uint32_t frame, const ModeDecision& mode) const
{
    const int nt = cfg_.num_tx();
    const std::size_t n = payload_symbols(cfg_);
    std::vector<SymbolBlock> payloads(nt);
    if (!mode) {
        for (auto& p : payloads)
            p = {std::vector<cplx>(n), 4};
    } else {
        const Constellation c = build_constellation(mode->order);
        const Bits bits = frame_bits(cfg_, seed_, frame, *mode);
        const std::size_t per_stream = n * c.bits_per_symbol();
        if (mode->scheme == Scheme::SM) {
            for (int m = 0; m < nt; ++m)
                payloads[m] = map_bits(std::span(bits).subspan(m * per_stream, per_stream), c);
        } else {
            const SymbolBlock shared = map_bits(bits, c);
            for (auto& p : payloads)
                p = shared;
        }
    }

    Frame f = build_frame(payloads, cfg_.frame.training_config(), cfg_.frame.block, cfg_.frame.cp);
    const double a = std::sqrt(cfg_.policy.per_tx_power());
    for (auto& s : f.streams)
        for (auto& v : s)
            v *= a;

    if (!cfg_.waveform) {
        quantize_f32(f.streams);
        return std::move(f.streams);
    }

    auto eng = rng::engine(seed_, rng::Stream::Delay, frame);
    const auto delay = static_cast<std::size_t>(
        std::uniform_int_distribution<int>(0, cfg_.max_delay)(eng));
    Streams out;
    for (const auto& s : f.streams) {
        IqBuffer shaped = pulse_shape(s, cfg_.shaping);
        IqBuffer buf;
        buf.sample_rate = shaped.sample_rate;
        buf.samples.assign(delay, cplx{});
        buf.samples.insert(buf.samples.end(), shaped.samples.begin(), shaped.samples.end());
        buf.samples.resize(buf.samples.size() + (cfg_.max_delay - delay), cplx{});
        if (cfg_.passband)
            buf = upconvert(buf, cfg_.shaping);
        out.push_back(std::move(buf.samples));
    }
    quantize_f32(out);
    return out;
}

ChannelRole::ChannelRole(const ExperimentConfig& cfg, double axis_value, std::uint64_t seed)
    : cfg_(cfg), seed_(point_seed(seed, axis_value)), channel_(point_channel(cfg, axis_value))
{
}

Streams ChannelRole::apply(std::uint32_t frame, const Streams& tx) const
{
    auto eng = rng::engine(seed_, rng::Stream::Noise, frame);
    Streams out;
    if (!cfg_.waveform) {
        out = apply_channel(channel_, tx, eng);
    } else {
        std::vector<IqBuffer> bufs;
        for (const auto& s : tx)
            bufs.push_back({s, cfg_.shaping.sample_rate(), cfg_.passband ? Domain::Passband : Domain::Baseband});
        for (auto& b : apply_channel(channel_, bufs, eng))
            out.push_back(std::move(b.samples));
    }
    quantize_f32(out);
    return out;
}

RxRole::RxRole(const ExperimentConfig& cfg, double axis_value, std::uint64_t seed)
    : cfg_(cfg),
      seed_(seed),
      axis_value_(axis_value),
      channel_(point_channel(cfg, axis_value)),
      training_(generate_training(cfg.frame.training_config())),
      controller_(cfg.initial_mode, cfg.hold_frames),
      err_energy_(cfg.num_tx(), 0.0),
      ref_energy_(cfg.num_tx(), 0.0)
{
    if (cfg_.waveform)
        for (const auto& s : training_.streams())
            templates_.push_back(matched_filter(pulse_shape(s, cfg_.shaping), cfg_.shaping).samples);
}

ModeDecision RxRole::initial_mode() const
{
    return cfg_.fixed_mode ? cfg_.fixed_mode : ModeDecision{cfg_.initial_mode};
}

Observation RxRole::observe(std::uint32_t frame, const Streams& rx) const
{
    Observation obs;
    obs.frame = frame;
    const FrameLayout layout = layout_of(cfg_);

    Streams symbols;
    if (!cfg_.waveform) {
        symbols = rx;
        obs.synced = true;
        obs.sync_metric = 1.0;
    } else {
        std::vector<IqBuffer> filtered;
        for (const auto& s : rx) {
            IqBuffer b{s, cfg_.shaping.sample_rate(), cfg_.passband ? Domain::Passband : Domain::Baseband};
            if (cfg_.passband)
                b = downconvert(b, cfg_.shaping);
            filtered.push_back(matched_filter(b, cfg_.shaping));
        }
        const SyncResult sync = best_alignment(filtered, templates_, static_cast<std::size_t>(cfg_.max_delay));
        obs.sync_metric = sync.metric;
        if (sync.metric < cfg_.sync_threshold)
            return obs;
        obs.synced = true;
        const std::size_t first = cfg_.shaping.num_taps() - 1 + sync.index;
        const std::size_t n = layout.frame_length();
        for (const auto& f : filtered) {
            std::vector<cplx> s(n);
            for (std::size_t k = 0; k < n; ++k)
                s[k] = f.samples.at(first + k * cfg_.shaping.sps);
            symbols.push_back(std::move(s));
        }
    }

    ParsedFrame parsed = parse_frame(symbols, layout);
    const double a = std::sqrt(cfg_.policy.per_tx_power());
    obs.estimate = cfg_.perfect_csi ? perfect_estimate(channel_.h * a)
                                    : estimate_channel(parsed.training, training_, frame);
    obs.h = obs.estimate.h / a;
    obs.noise_variance = cfg_.known_noise ? channel_.noise_variance : obs.estimate.noise_estimate();
    obs.snrs = link_snrs(obs.h, cfg_.policy, obs.noise_variance);
    obs.eigen = snr_per_stream(obs.h, cfg_.policy.total_power, cfg_.num_tx(), obs.noise_variance).eigen;
    obs.payload = std::move(parsed.payload);
    return obs;
}

ModeDecision RxRole::adapt(const Observation& obs)
{
    if (cfg_.fixed_mode)
        return cfg_.fixed_mode;
    if (!obs.synced)
        return controller_.current();
    return controller_.propose(select_mode(obs.snrs, cfg_.policy));
}

void RxRole::record_mode(std::uint32_t frame, const ModeDecision& mode, bool lost)
{
    trace_.push_back(to_string(mode));
    if (frame < static_cast<std::uint32_t>(cfg_.warmup_frames))
        return;
    ++measured_;
    ++dwell_[to_string(mode)];
    se_sum_ += mode_spectral_efficiency(mode, cfg_.num_tx());
    lost_ += lost;
}

void RxRole::account_lost(std::uint32_t frame, const ModeDecision& mode)
{
    record_mode(frame, mode, true);
}

void RxRole::account(const Observation& obs, const ModeDecision& mode)
{
    record_mode(obs.frame, mode, !obs.synced);
    if (!obs.synced || obs.frame < static_cast<std::uint32_t>(cfg_.warmup_frames))
        return;

    ++observed_;
    if (eigen_sum_.size() < obs.eigen.size())
        eigen_sum_.resize(obs.eigen.size(), 0.0);
    for (std::size_t i = 0; i < obs.eigen.size(); ++i)
        eigen_sum_[i] += obs.eigen[i];
    if (sinr_sum_.size() < obs.snrs.sm.size())
        sinr_sum_.resize(obs.snrs.sm.size(), 0.0);
    for (std::size_t i = 0; i < obs.snrs.sm.size(); ++i)
        sinr_sum_[i] += obs.snrs.sm[i];
    sd_sum_ += obs.snrs.sd;
    imag_sum_ += obs.estimate.imaginary_residue.size() ? obs.estimate.imaginary_residue.mean() : 0.0;
    noise_sum_ += obs.estimate.noise_estimate();

    if (!mode)
        return;
    const Constellation c = build_constellation(mode->order);
    const Bits bits = frame_bits(cfg_, point_seed(seed_, axis_value_), obs.frame, *mode);
    const int streams = stream_count(*mode, cfg_.num_tx());
    const std::size_t per_stream = bits.size() / streams;

    Streams detected;
    if (mode->scheme == Scheme::SM) {
        detected = zf_detect(obs.estimate, obs.payload).streams;
    } else {
        try {
            detected = diversity_combine(obs.estimate, obs.payload).streams;
        } catch (const Error& e) {
            if (e.kind() != ErrorKind::Outage)
                throw;
            detected.assign(1, std::vector<cplx>(obs.payload.front().size()));
        }
    }

    for (int m = 0; m < streams; ++m) {
        const auto tx_bits = std::span(bits).subspan(m * per_stream, per_stream);
        const Bits rx_bits = demap_symbols(detected[m], c);
        errors_ += count_bit_errors(tx_bits, rx_bits).errors;
        bits_ += per_stream;
        const SymbolBlock ref = map_bits(tx_bits, c);
        for (std::size_t k = 0; k < ref.symbols.size(); ++k) {
            err_energy_[m] += std::norm(detected[m][k] - ref.symbols[k]);
            ref_energy_[m] += std::norm(ref.symbols[k]);
        }
    }
}

LinkReport RxRole::finish() const
{
    constexpr double nan = std::numeric_limits<double>::quiet_NaN();
    LinkReport r;
    r.seed = seed_;
    r.distance_m = cfg_.axis == Axis::DistanceM ? axis_value_ : nan;
    const double rho = cfg_.policy.per_tx_power() / channel_.noise_variance;
    r.snr_db = db(rho * channel_.h.squaredNorm() / static_cast<double>(channel_.num_rx()));
    r.frames = measured_;
    r.warmup_frames = cfg_.warmup_frames;
    r.lost_frames = lost_;
    r.total_bits = bits_;
    r.bit_errors = errors_;
    r.ber = bits_ ? static_cast<double>(errors_) / static_cast<double>(bits_) : 0.0;
    r.ber_floor = bits_ ? 10.0 / static_cast<double>(bits_) : 1.0;

    double err = 0.0;
    double ref = 0.0;
    for (std::size_t m = 0; m < err_energy_.size(); ++m) {
        err += err_energy_[m];
        ref += ref_energy_[m];
        if (ref_energy_[m] > 0.0)
            r.stream_evm.push_back(std::sqrt(err_energy_[m] / ref_energy_[m]));
    }
    r.evm = ref > 0.0 ? std::sqrt(err / ref) : nan;
    r.evm_snr_db = ref > 0.0 ? -2.0 * db(r.evm) : nan;

    r.dwell = dwell_;
    r.mode_trace = trace_;
    int best = -1;
    for (const auto& [mode, n] : dwell_)
        if (n > best) {
            best = n;
            r.dominant_mode = mode;
        }

    const double obs = observed_ > 0 ? static_cast<double>(observed_) : nan;
    for (double s : eigen_sum_)
        r.eigen_snr_db.push_back(db(s / obs));
    for (double s : sinr_sum_)
        r.zf_sinr_db.push_back(db(s / obs));
    r.sd_snr_db = db(sd_sum_ / obs);
    r.imaginary_residue = imag_sum_ / obs;
    r.noise_estimate = noise_sum_ / obs;

    r.nominal_spec_eff = measured_ > 0 ? se_sum_ / measured_ : 0.0;
    r.error_free = bits_ > 0 && r.ber <= cfg_.policy.ber_target && lost_ == 0;
    r.achieved_spec_eff = r.error_free ? r.nominal_spec_eff : 0.0;
    r.config = config_to_json(cfg_);
    return r;
}

LinkReport run_link_inproc(const ExperimentConfig& cfg, double axis_value, std::uint64_t seed)
{
    const TxRole tx(cfg, axis_value, seed);
    const ChannelRole chan(cfg, axis_value, seed);
    RxRole rx(cfg, axis_value, seed);

    ModeDecision mode = rx.initial_mode();
    for (int k = 0; k < tx.total_frames(); ++k) {
        const auto frame = static_cast<std::uint32_t>(k);
        Observation obs = rx.observe(frame, chan.apply(frame, tx.build(frame, mode)));
        const ModeDecision next = rx.adapt(obs);
        if (cfg.feedback_latency == 0 && next != mode) {
            // Same seeds, same frame length: only the payload changes.
            mode = next;
            obs = rx.observe(frame, chan.apply(frame, tx.build(frame, mode)));
        }
        rx.account(obs, mode);
        mode = next;
    }
    return rx.finish();
}

} // namespace mimovlc
