#include "mimovlc/channel_model.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

namespace mimovlc {

namespace {

constexpr double kDeg = std::numbers::pi / 180.0;

double array_position(int index, int count, double spacing)
{
    return (index - (count - 1) / 2.0) * spacing;
}

double snr_scale(double total_power, int num_tx, double noise_variance)
{
    const double per_tx = total_power / num_tx;
    return noise_variance > 0.0 ? per_tx / noise_variance : std::numeric_limits<double>::infinity();
}

// rho * x with 0 * inf taken as 0 (noiseless limit of a null direction).
double scaled(double rho, double x)
{
    return x > 0.0 ? rho * x : 0.0;
}

} // namespace

void ChannelMatrix::validate() const
{
    if (h.size() == 0)
        throw Error(ErrorKind::DimensionMismatch, "empty channel matrix");
    if (!h.allFinite() || (h.array() < 0.0).any())
        throw Error(ErrorKind::InvalidArgument, "channel gains must be finite and non-negative");
    if (!(noise_variance >= 0.0) || !std::isfinite(noise_variance))
        throw Error(ErrorKind::InvalidArgument, "noise variance must be finite and non-negative");
}

void GeometryConfig::validate() const
{
    if (!(distance > 0.0))
        throw Error(ErrorKind::InvalidArgument, "link distance must be positive");
    if (tx_spacing < 0.0 || rx_spacing < 0.0)
        throw Error(ErrorKind::InvalidArgument, "array spacing must be non-negative");
    if (!(lambertian_order >= 1.0))
        throw Error(ErrorKind::InvalidArgument, "Lambertian order must be at least 1");
    if (!(gain > 0.0))
        throw Error(ErrorKind::InvalidArgument, "gain constant must be positive");
    if (!(crosstalk >= 0.0 && crosstalk < 1.0))
        throw Error(ErrorKind::InvalidArgument, "crosstalk floor must lie in [0, 1)");
    if (!(rx_fov_deg > 0.0 && rx_fov_deg <= 90.0))
        throw Error(ErrorKind::InvalidArgument, "field of view must lie in (0, 90] degrees");
    if (!(std::abs(rx_tilt_deg) < 90.0))
        throw Error(ErrorKind::InvalidArgument, "receiver tilt must be below 90 degrees");
    if (num_tx < 1 || num_rx < 1)
        throw Error(ErrorKind::InvalidArgument, "at least one transmitter and one receiver");
}

GeometryConfig bench_geometry()
{
    GeometryConfig geo;
    geo.tx_spacing = 0.60;
    geo.rx_spacing = 0.19;
    geo.lambertian_order = 1.0;
    geo.crosstalk = 0.05;
    geo.rx_fov_deg = 30.0;
    geo.rx_tilt_deg = 35.0;
    geo.gain = 1.0;
    return geo;
}

ChannelMatrix generate_channel(const GeometryConfig& geo, double noise_variance)
{
    geo.validate();
    ChannelMatrix ch;
    ch.noise_variance = noise_variance;
    ch.h = Eigen::MatrixXd::Zero(geo.num_rx, geo.num_tx);

    const double cos_fov = std::cos(geo.rx_fov_deg * kDeg);
    for (int n = 0; n < geo.num_rx; ++n) {
        const double xr = array_position(n, geo.num_rx, geo.rx_spacing);
        const double side = xr > 0.0 ? 1.0 : (xr < 0.0 ? -1.0 : 0.0);
        // Receiver normal points back toward the transmitters, tilted outward.
        const double nx = side * std::sin(geo.rx_tilt_deg * kDeg);
        const double nz = -std::cos(geo.rx_tilt_deg * kDeg);
        for (int m = 0; m < geo.num_tx; ++m) {
            const double dx = xr - array_position(m, geo.num_tx, geo.tx_spacing);
            const double dist = std::hypot(dx, geo.distance);
            const double cos_phi = geo.distance / dist;
            // Unit vector receiver -> transmitter is (-dx, -distance) / dist.
            const double cos_psi = (-dx * nx - geo.distance * nz) / dist;
            if (cos_psi < cos_fov - 1e-15 || cos_psi <= 0.0)
                continue;
            ch.h(n, m) = geo.gain * std::pow(cos_phi, geo.lambertian_order) * cos_psi / (dist * dist);
        }
    }

    if (geo.num_rx == geo.num_tx && geo.crosstalk > 0.0)
        for (int n = 0; n < geo.num_rx; ++n)
            for (int m = 0; m < geo.num_tx; ++m)
                if (m != n)
                    ch.h(n, m) = std::max(ch.h(n, m), geo.crosstalk * ch.h(n, n));

    ch.validate();
    return ch;
}

Streams apply_channel(const ChannelMatrix& ch, std::span<const std::vector<cplx>> tx, rng::Engine& eng)
{
    ch.validate();
    if (static_cast<int>(tx.size()) != ch.num_tx())
        throw Error(ErrorKind::DimensionMismatch, "transmit stream count differs from channel columns");
    const std::size_t len = tx.empty() ? 0 : tx.front().size();
    for (const auto& s : tx)
        if (s.size() != len)
            throw Error(ErrorKind::LengthMismatch, "transmit streams differ in length");

    const double sd = std::sqrt(ch.noise_variance / 2.0);
    std::normal_distribution<double> gauss(0.0, 1.0);
    Streams rx(ch.num_rx(), std::vector<cplx>(len));
    // Noise is drawn instant by instant, receiver by receiver, so a prefix of
    // the output depends only on a prefix of the input.
    for (std::size_t k = 0; k < len; ++k)
        for (int n = 0; n < ch.num_rx(); ++n) {
            cplx acc{};
            for (int m = 0; m < ch.num_tx(); ++m)
                acc += ch.h(n, m) * tx[m][k];
            if (sd > 0.0) {
                const double re = gauss(eng);
                const double im = gauss(eng);
                acc += cplx(sd * re, sd * im);
            }
            rx[n][k] = acc;
        }
    return rx;
}

Streams apply_channel(const ChannelMatrix& ch, std::span<const std::vector<cplx>> tx, std::uint64_t seed)
{
    rng::Engine eng(seed);
    return apply_channel(ch, tx, eng);
}

std::vector<IqBuffer> apply_channel(const ChannelMatrix& ch, std::span<const IqBuffer> tx, rng::Engine& eng)
{
    if (tx.empty())
        throw Error(ErrorKind::DimensionMismatch, "no transmit buffers");
    const Domain domain = tx.front().domain;
    const double rate = tx.front().sample_rate;
    Streams samples;
    for (const auto& b : tx) {
        if (b.domain != domain || b.sample_rate != rate)
            throw Error(ErrorKind::InvalidArgument, "transmit buffers disagree on domain or rate");
        samples.push_back(b.samples);
    }

    std::vector<IqBuffer> out;
    if (domain == Domain::Baseband) {
        auto rx = apply_channel(ch, samples, eng);
        for (auto& s : rx)
            out.push_back({std::move(s), rate, Domain::Baseband});
        return out;
    }

    ChannelMatrix noiseless{ch.h, 0.0};
    auto rx = apply_channel(noiseless, samples, eng);
    const double sd = std::sqrt(ch.noise_variance / 4.0);
    std::normal_distribution<double> gauss(0.0, 1.0);
    for (std::size_t k = 0; k < (rx.empty() ? 0 : rx.front().size()); ++k)
        for (auto& s : rx)
            if (sd > 0.0)
                s[k] += sd * gauss(eng);
    for (auto& s : rx)
        out.push_back({std::move(s), rate, Domain::Passband});
    return out;
}

std::vector<double> gram_eigenvalues(const Eigen::MatrixXd& h)
{
    // Singular values squared: the non-trivial eigenvalues of H H^T.
    const Eigen::JacobiSVD<Eigen::MatrixXd> svd(h);
    std::vector<double> ev;
    for (Eigen::Index i = 0; i < svd.singularValues().size(); ++i)
        ev.push_back(svd.singularValues()(i) * svd.singularValues()(i));
    return ev;
}

SnrSummary snr_per_stream(const Eigen::MatrixXd& h, double total_power, int num_tx, double noise_variance)
{
    if (num_tx < 1)
        throw Error(ErrorKind::InvalidArgument, "num_tx must be positive");
    const double rho = snr_scale(total_power, num_tx, noise_variance);
    SnrSummary s;
    for (double ev : gram_eigenvalues(h))
        s.eigen.push_back(scaled(rho, ev));
    s.frobenius = scaled(rho, h.squaredNorm());
    for (Eigen::Index n = 0; n < h.rows(); ++n)
        s.branch.push_back(scaled(rho, h.row(n).squaredNorm()));
    return s;
}

} // namespace mimovlc
