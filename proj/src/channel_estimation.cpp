#include "mimovlc/channel_estimation.hpp"

#include <cmath>
#include <limits>

#include "mimovlc/channel_model.hpp"

namespace mimovlc {

double ChannelEstimate::noise_estimate() const
{
    return residual_variance.size() ? residual_variance.mean() : 0.0;
}

ChannelEstimate estimate_channel(std::span<const Streams> observations, const Training& known,
                                 std::uint64_t frame_index)
{
    const int nr = static_cast<int>(observations.size());
    const int nt = known.num_tx;
    if (nr == 0 || nt == 0 || static_cast<int>(known.sequences.size()) != nt)
        throw Error(ErrorKind::DimensionMismatch, "empty observation or training set");

    ChannelEstimate est;
    est.frame_index = frame_index;
    est.h.setZero(nr, nt);
    est.residual_variance.setZero(nr, nt);
    est.imaginary_residue.setZero(nr, nt);

    for (int m = 0; m < nt; ++m) {
        const auto& ts = known.sequences[m];
        double energy = 0.0;
        for (double v : ts)
            energy += v * v;
        if (!(energy > 0.0))
            throw Error(ErrorKind::InvalidArgument, "training sequence has zero energy");

        for (int n = 0; n < nr; ++n) {
            if (static_cast<int>(observations[n].size()) != nt)
                throw Error(ErrorKind::DimensionMismatch, "observation slot count differs from num_tx");
            const auto& y = observations[n][m];
            if (y.size() != ts.size())
                throw Error(ErrorKind::LengthMismatch, "observation slot length differs from training");
            cplx corr{};
            for (std::size_t k = 0; k < ts.size(); ++k)
                corr += y[k] * ts[k];
            const double h = corr.real() / energy;
            double resid = 0.0;
            for (std::size_t k = 0; k < ts.size(); ++k)
                resid += std::norm(y[k] - h * ts[k]);
            est.h(n, m) = h;
            est.residual_variance(n, m) = resid / static_cast<double>(ts.size());
            est.imaginary_residue(n, m) = std::abs(corr.imag()) / energy;
        }
    }
    est.eigenvalues = gram_eigenvalues(est.h);
    return est;
}

ChannelEstimate perfect_estimate(const Eigen::MatrixXd& h)
{
    ChannelEstimate est;
    est.h = h;
    est.residual_variance.setZero(h.rows(), h.cols());
    est.imaginary_residue.setZero(h.rows(), h.cols());
    est.eigenvalues = gram_eigenvalues(h);
    return est;
}

ModeSnrs eigen_snrs(const ChannelEstimate& est, double total_power, int num_tx, double noise_variance)
{
    const SnrSummary s = snr_per_stream(est.h, total_power, num_tx, noise_variance);
    ModeSnrs out;
    out.sm = s.eigen;
    const double per_tx = total_power / num_tx;
    const double g = est.h.rowwise().sum().squaredNorm();
    out.sd = noise_variance > 0.0 ? per_tx * g / noise_variance
                                  : (g > 0.0 ? std::numeric_limits<double>::infinity() : 0.0);
    return out;
}

double snr_from_evm(double evm)
{
    if (!(evm >= 0.0) || !std::isfinite(evm))
        throw Error(ErrorKind::InvalidArgument, "EVM must be finite and non-negative");
    if (evm == 0.0)
        throw Error(ErrorKind::Saturation, "EVM is zero; SNR estimate saturated");
    return 1.0 / (evm * evm);
}

} // namespace mimovlc
