#include "mimovlc/waveform.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iterator>
#include <map>
#include <mutex>
#include <numbers>
#include <string>
#include <tuple>

#include <Eigen/Dense>
#include <fftw3.h>

#include "mimovlc/bytes.hpp"

namespace mimovlc {

namespace {

constexpr double kPi = std::numbers::pi;

double rrc_tap(double t, double beta)
{
    if (std::abs(t) < 1e-12)
        return 1.0 - beta + 4.0 * beta / kPi;
    if (std::abs(std::abs(t) - 1.0 / (4.0 * beta)) < 1e-9) {
        const double a = kPi / (4.0 * beta);
        return beta / std::numbers::sqrt2 * ((1.0 + 2.0 / kPi) * std::sin(a) + (1.0 - 2.0 / kPi) * std::cos(a));
    }
    const double num = std::sin(kPi * t * (1.0 - beta)) + 4.0 * beta * t * std::cos(kPi * t * (1.0 + beta));
    const double den = kPi * t * (1.0 - (4.0 * beta * t) * (4.0 * beta * t));
    return num / den;
}

// FFTW planning is not thread-safe; execution on distinct plans is.
std::mutex& fftw_planner_mutex()
{
    static std::mutex m;
    return m;
}

void ideal_lowpass(std::vector<cplx>& x, double sample_rate, double cutoff)
{
    const int n = static_cast<int>(x.size());
    if (n == 0)
        return;
    auto* data = reinterpret_cast<fftw_complex*>(x.data());
    fftw_plan fwd;
    fftw_plan inv;
    {
        std::lock_guard lock(fftw_planner_mutex());
        fwd = fftw_plan_dft_1d(n, data, data, FFTW_FORWARD, FFTW_ESTIMATE);
        inv = fftw_plan_dft_1d(n, data, data, FFTW_BACKWARD, FFTW_ESTIMATE);
    }
    fftw_execute(fwd);
    for (int i = 0; i < n; ++i) {
        const int k = i <= n / 2 ? i : i - n;
        const double f = std::abs(static_cast<double>(k) * sample_rate / n);
        x[i] = f <= cutoff ? x[i] / static_cast<double>(n) : cplx{};
    }
    fftw_execute(inv);
    {
        std::lock_guard lock(fftw_planner_mutex());
        fftw_destroy_plan(fwd);
        fftw_destroy_plan(inv);
    }
}

// Truncated RRC, then the tap change of least energy above the symbol rate
// (Gauss-Newton, weighted min-norm steps) that zeroes the cascaded response
// at every non-zero symbol lag. Plain truncation at span 16 leaves ~2e-3
// per lag; an unweighted correction would push energy out of band, where the
// IF mixer image folds it back.
std::vector<double> design_rrc(const ShapingConfig& cfg)
{
    const Eigen::Index n = static_cast<Eigen::Index>(cfg.num_taps());
    const double center = static_cast<double>(n / 2);
    Eigen::VectorXd h(n);
    for (Eigen::Index i = 0; i < n; ++i)
        h[i] = rrc_tap((static_cast<double>(i) - center) / cfg.sps, cfg.rolloff);
    h.normalize();

    // Energy above R_sym as a quadratic form, plus a small ridge.
    const double edge = 1.0 / cfg.sps;
    Eigen::MatrixXd q(n, n);
    for (Eigen::Index i = 0; i < n; ++i)
        for (Eigen::Index j = 0; j < n; ++j) {
            const double m = static_cast<double>(i - j);
            q(i, j) = i == j ? 1.0 - 2.0 * edge + 1e-6 : -std::sin(2.0 * kPi * edge * m) / (kPi * m);
        }
    // Changes stay symmetric: h = P a over the first half of the taps.
    const Eigen::Index half = (n + 1) / 2;
    Eigen::MatrixXd p = Eigen::MatrixXd::Zero(n, half);
    for (Eigen::Index i = 0; i < n; ++i)
        p(i, std::min(i, n - 1 - i)) = 1.0;
    const Eigen::LDLT<Eigen::MatrixXd> qf(p.transpose() * q * p);

    const Eigen::Index lags = (n - 1) / cfg.sps;
    for (int it = 0; it < 20 && lags > 0; ++it) {
        Eigen::VectorXd g(lags);
        Eigen::MatrixXd jac = Eigen::MatrixXd::Zero(lags, n);
        for (Eigen::Index k = 1; k <= lags; ++k) {
            const Eigen::Index d = k * cfg.sps;
            g[k - 1] = h.head(n - d).dot(h.tail(n - d));
            jac.row(k - 1).head(n - d) += h.tail(n - d).transpose();
            jac.row(k - 1).tail(n - d) += h.head(n - d).transpose();
        }
        if (g.cwiseAbs().maxCoeff() < 1e-14)
            break;
        const Eigen::MatrixXd jp = jac * p;
        const Eigen::MatrixXd qj = qf.solve(jp.transpose());
        h -= p * (qj * (jp * qj).ldlt().solve(g));
        h.normalize();
    }
    return {h.data(), h.data() + n};
}

} // namespace

void IqBuffer::validate() const
{
    if (!(sample_rate > 0.0))
        throw Error(ErrorKind::InvalidArgument, "sample rate must be positive");
    if (domain == Domain::Passband)
        for (const auto& s : samples)
            if (s.imag() != 0.0)
                throw Error(ErrorKind::InvalidArgument, "passband buffer has a non-zero imaginary part");
}

void ShapingConfig::validate() const
{
    if (sps < 2)
        throw Error(ErrorKind::InvalidArgument, "samples per symbol must be at least 2");
    if (!(rolloff > 0.0 && rolloff <= 1.0))
        throw Error(ErrorKind::InvalidArgument, "roll-off must lie in (0, 1]");
    if (span < 1)
        throw Error(ErrorKind::InvalidArgument, "filter span must be at least one symbol");
    if (!(symbol_rate > 0.0))
        throw Error(ErrorKind::InvalidArgument, "symbol rate must be positive");
}

void ShapingConfig::validate_passband() const
{
    validate();
    if (carrier + baseband_edge() > sample_rate() / 2.0)
        throw Error(ErrorKind::Aliasing, "carrier plus signal bandwidth exceeds Nyquist");
    if (carrier <= baseband_edge())
        throw Error(ErrorKind::Aliasing, "carrier below signal bandwidth folds the spectrum");
}

std::vector<double> rrc_taps(const ShapingConfig& cfg)
{
    cfg.validate();
    using Key = std::tuple<int, double, int>;
    static std::mutex m;
    static std::map<Key, std::vector<double>> cache;
    const Key key{cfg.sps, cfg.rolloff, cfg.span};
    {
        std::lock_guard lock(m);
        if (const auto it = cache.find(key); it != cache.end())
            return it->second;
    }
    auto taps = design_rrc(cfg);
    std::lock_guard lock(m);
    return cache.emplace(key, std::move(taps)).first->second;
}

IqBuffer pulse_shape(std::span<const cplx> symbols, const ShapingConfig& cfg)
{
    const auto taps = rrc_taps(cfg);
    if (symbols.empty())
        throw Error(ErrorKind::InvalidArgument, "nothing to shape");

    IqBuffer out;
    out.sample_rate = cfg.sample_rate();
    out.samples.assign(symbols.size() * cfg.sps + taps.size() - 1, cplx{});
    for (std::size_t k = 0; k < symbols.size(); ++k) {
        const cplx s = symbols[k];
        if (s == cplx{})
            continue;
        cplx* dst = out.samples.data() + k * cfg.sps;
        for (std::size_t j = 0; j < taps.size(); ++j)
            dst[j] += s * taps[j];
    }
    return out;
}

IqBuffer upconvert(const IqBuffer& baseband, const ShapingConfig& cfg)
{
    cfg.validate_passband();
    if (baseband.domain != Domain::Baseband)
        throw Error(ErrorKind::InvalidArgument, "upconvert expects a baseband buffer");

    const double w = 2.0 * kPi * cfg.carrier / baseband.sample_rate;
    IqBuffer out;
    out.sample_rate = baseband.sample_rate;
    out.domain = Domain::Passband;
    out.samples.resize(baseband.samples.size());
    for (std::size_t k = 0; k < baseband.samples.size(); ++k) {
        const double ph = w * static_cast<double>(k);
        const cplx s = baseband.samples[k];
        out.samples[k] = {s.real() * std::cos(ph) - s.imag() * std::sin(ph), 0.0};
    }
    return out;
}

IqBuffer downconvert(const IqBuffer& passband, const ShapingConfig& cfg)
{
    cfg.validate_passband();
    if (passband.domain != Domain::Passband)
        throw Error(ErrorKind::InvalidArgument, "downconvert expects a passband buffer");

    const double w = 2.0 * kPi * cfg.carrier / passband.sample_rate;
    IqBuffer out;
    out.sample_rate = passband.sample_rate;
    out.samples.resize(passband.samples.size());
    for (std::size_t k = 0; k < passband.samples.size(); ++k) {
        const double ph = w * static_cast<double>(k);
        out.samples[k] = 2.0 * passband.samples[k].real() * cplx(std::cos(ph), -std::sin(ph));
    }
    // The image sits at 2 fc; the carrier is midway between band edge and image.
    ideal_lowpass(out.samples, out.sample_rate, cfg.carrier);
    return out;
}

IqBuffer matched_filter(const IqBuffer& baseband, const ShapingConfig& cfg)
{
    const auto taps = rrc_taps(cfg);
    IqBuffer out;
    out.sample_rate = baseband.sample_rate;
    out.samples.assign(baseband.samples.size() + taps.size() - 1, cplx{});
    for (std::size_t i = 0; i < baseband.samples.size(); ++i) {
        const cplx s = baseband.samples[i];
        if (s == cplx{})
            continue;
        cplx* dst = out.samples.data() + i;
        for (std::size_t j = 0; j < taps.size(); ++j)
            dst[j] += s * taps[j];
    }
    return out;
}

std::vector<cplx> matched_filter_decimate(const IqBuffer& baseband, const ShapingConfig& cfg,
                                          std::ptrdiff_t timing_offset, std::optional<std::size_t> count)
{
    const auto taps = rrc_taps(cfg);
    const auto len = static_cast<std::ptrdiff_t>(baseband.samples.size());
    const auto ntaps = static_cast<std::ptrdiff_t>(taps.size());
    if (timing_offset < 0 || timing_offset > len - ntaps)
        throw Error(ErrorKind::OutOfRange, "timing offset outside the buffer");

    const std::size_t available = static_cast<std::size_t>((len - ntaps - timing_offset) / cfg.sps) + 1;
    const std::size_t n = count.value_or(available);
    if (n > available)
        throw Error(ErrorKind::OutOfRange, "requested more symbols than the buffer holds");

    std::vector<cplx> out(n);
    const cplx* x = baseband.samples.data();
    for (std::size_t k = 0; k < n; ++k) {
        // Full-convolution index (ntaps - 1) + offset + k sps, taps symmetric.
        const std::ptrdiff_t start = timing_offset + static_cast<std::ptrdiff_t>(k) * cfg.sps;
        cplx acc{};
        for (std::ptrdiff_t j = 0; j < ntaps; ++j)
            acc += x[start + j] * taps[j];
        out[k] = acc;
    }
    return out;
}

SyncResult best_alignment(std::span<const IqBuffer> received, std::span<const std::vector<cplx>> templates,
                          std::size_t max_lag)
{
    if (received.empty() || templates.empty())
        throw Error(ErrorKind::InvalidArgument, "synchronization needs receive buffers and templates");

    std::size_t tlen = 0;
    for (const auto& t : templates)
        tlen = std::max(tlen, t.size());
    const std::size_t len = received.front().samples.size();
    for (const auto& r : received)
        if (r.samples.size() != len)
            throw Error(ErrorKind::LengthMismatch, "receive buffers differ in length");
    if (tlen == 0 || len < tlen)
        throw Error(ErrorKind::InvalidArgument, "buffer shorter than the training waveform");

    const auto nt = static_cast<Eigen::Index>(templates.size());
    Eigen::MatrixXcd gram(nt, nt);
    for (Eigen::Index a = 0; a < nt; ++a)
        for (Eigen::Index b = 0; b < nt; ++b) {
            cplx acc{};
            const auto& ta = templates[a];
            const auto& tb = templates[b];
            for (std::size_t i = 0; i < std::min(ta.size(), tb.size()); ++i)
                acc += std::conj(ta[i]) * tb[i];
            gram(a, b) = acc;
        }
    const Eigen::FullPivLU<Eigen::MatrixXcd> lu(gram);
    if (!lu.isInvertible())
        throw Error(ErrorKind::InvalidArgument, "training templates are linearly dependent");
    const Eigen::MatrixXcd gram_inv = lu.inverse();

    // Support of each template, so silent slots cost nothing.
    std::vector<std::pair<std::size_t, std::size_t>> support;
    for (const auto& t : templates) {
        auto first = std::find_if(t.begin(), t.end(), [](cplx v) { return v != cplx{}; });
        auto last = std::find_if(t.rbegin(), t.rend(), [](cplx v) { return v != cplx{}; });
        support.emplace_back(static_cast<std::size_t>(first - t.begin()),
                             first == t.end() ? 0 : static_cast<std::size_t>(t.rend() - last));
    }

    const std::size_t lags = std::min(max_lag, len - tlen) + 1;
    SyncResult best;
    Eigen::VectorXcd c(nt);
    for (std::size_t lag = 0; lag < lags; ++lag) {
        double proj = 0.0;
        double energy = 0.0;
        for (const auto& r : received) {
            const cplx* x = r.samples.data() + lag;
            for (std::size_t i = 0; i < tlen; ++i)
                energy += std::norm(x[i]);
            for (Eigen::Index m = 0; m < nt; ++m) {
                cplx acc{};
                const auto& t = templates[m];
                for (std::size_t i = support[m].first; i < support[m].second; ++i)
                    acc += std::conj(t[i]) * x[i];
                c(m) = acc;
            }
            proj += std::real((c.adjoint() * gram_inv * c)(0, 0));
        }
        const double metric = energy > 0.0 ? std::clamp(proj / energy, 0.0, 1.0) : 0.0;
        if (metric > best.metric) {
            best.metric = metric;
            best.index = lag;
        }
    }
    return best;
}

SyncResult synchronize(std::span<const IqBuffer> received, std::span<const std::vector<cplx>> templates,
                       double threshold, std::size_t max_lag)
{
    const auto best = best_alignment(received, templates, max_lag);
    if (best.metric < threshold)
        throw Error(ErrorKind::SyncFailure,
                    "training correlation peak " + std::to_string(best.metric) + " below threshold");
    return best;
}

SyncResult synchronize(const IqBuffer& received, std::span<const cplx> known_training, double threshold)
{
    const std::vector<std::vector<cplx>> templates{{known_training.begin(), known_training.end()}};
    return synchronize(std::span(&received, 1), templates, threshold);
}

std::vector<std::uint8_t> encode_iq(const IqBuffer& buffer)
{
    buffer.validate();
    std::vector<std::uint8_t> out{'V', 'L', 'I', 'Q'};
    out.reserve(kIqHeaderSize + 8 * buffer.samples.size());
    bytes::put_u32(out, static_cast<std::uint32_t>(buffer.samples.size()));
    bytes::put_u32(out, static_cast<std::uint32_t>(std::llround(buffer.sample_rate)));
    bytes::put_u32(out, buffer.domain == Domain::Passband ? 1u : 0u);
    for (const auto& s : buffer.samples) {
        bytes::put_f32(out, static_cast<float>(s.real()));
        bytes::put_f32(out, static_cast<float>(s.imag()));
    }
    return out;
}

IqBuffer decode_iq(std::span<const std::uint8_t> data)
{
    if (data.size() < kIqHeaderSize || !std::equal(data.begin(), data.begin() + 4, "VLIQ"))
        throw Error(ErrorKind::MalformedFrame, "missing VLIQ header");
    const std::uint32_t count = bytes::get_u32(data, 4);
    if (data.size() != kIqHeaderSize + 8ull * count)
        throw Error(ErrorKind::MalformedFrame, "IQ payload length does not match sample count");

    IqBuffer out;
    out.sample_rate = bytes::get_u32(data, 8);
    out.domain = (bytes::get_u32(data, 12) & 1u) ? Domain::Passband : Domain::Baseband;
    out.samples.resize(count);
    for (std::uint32_t i = 0; i < count; ++i)
        out.samples[i] = {bytes::get_f32(data, kIqHeaderSize + 8ull * i),
                          bytes::get_f32(data, kIqHeaderSize + 8ull * i + 4)};
    return out;
}

void write_iq_file(const std::filesystem::path& path, const IqBuffer& buffer)
{
    const auto data = encode_iq(buffer);
    std::ofstream f(path, std::ios::binary);
    if (!f)
        throw Error(ErrorKind::Io, "cannot open " + path.string() + " for writing");
    f.write(reinterpret_cast<const char*>(data.data()), static_cast<std::streamsize>(data.size()));
}

IqBuffer read_iq_file(const std::filesystem::path& path)
{
    std::ifstream f(path, std::ios::binary);
    if (!f)
        throw Error(ErrorKind::Io, "cannot open " + path.string());
    const std::vector<std::uint8_t> data{std::istreambuf_iterator<char>(f), std::istreambuf_iterator<char>()};
    return decode_iq(data);
}

} // namespace mimovlc
