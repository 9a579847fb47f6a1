#include "mimovlc/mimo_detection.hpp"

#include <cmath>
#include <limits>

namespace mimovlc {

namespace {

double ratio(double num, double den)
{
    if (den > 0.0)
        return num / den;
    return num > 0.0 ? std::numeric_limits<double>::infinity() : 0.0;
}

void check_observations(std::span<const std::vector<cplx>> y, Eigen::Index num_rx)
{
    if (static_cast<Eigen::Index>(y.size()) != num_rx)
        throw Error(ErrorKind::DimensionMismatch, "receiver stream count differs from estimate rows");
    for (const auto& s : y)
        if (s.size() != y.front().size())
            throw Error(ErrorKind::LengthMismatch, "receiver streams differ in length");
}

std::vector<double> row_norms(const Eigen::MatrixXd& w)
{
    std::vector<double> out;
    for (Eigen::Index i = 0; i < w.rows(); ++i)
        out.push_back(w.row(i).squaredNorm());
    return out;
}

} // namespace

const char* to_string(DetectMethod m) noexcept
{
    switch (m) {
    case DetectMethod::Inverse: return "inverse";
    case DetectMethod::PseudoInverse: return "pseudo-inverse";
    case DetectMethod::Mrc: return "mrc";
    }
    return "unknown";
}

PseudoInverse pseudo_inverse(const Eigen::MatrixXd& h)
{
    PseudoInverse out;
    out.w.setZero(h.cols(), h.rows());
    if (h.size() == 0)
        return out;
    const Eigen::JacobiSVD<Eigen::MatrixXd> svd(h, Eigen::ComputeThinU | Eigen::ComputeThinV);
    const auto& s = svd.singularValues();
    const double floor = kSingularFloor * (s.size() ? s(0) : 0.0);
    for (Eigen::Index i = 0; i < s.size(); ++i) {
        if (s(i) > floor && s(i) > 0.0) {
            out.w += svd.matrixV().col(i) * (1.0 / s(i)) * svd.matrixU().col(i).transpose();
            ++out.rank;
        }
    }
    out.rank_deficient = out.rank < std::min(h.rows(), h.cols());
    return out;
}

ZfWeights zf_weights(const Eigen::MatrixXd& h)
{
    ZfWeights out;
    const Eigen::JacobiSVD<Eigen::MatrixXd> svd(h);
    const auto& s = svd.singularValues();
    const double smin = s.size() ? s(s.size() - 1) : 0.0;
    out.condition = smin > 0.0 ? s(0) / smin : std::numeric_limits<double>::infinity();
    if (h.rows() == h.cols() && out.condition < kConditionLimit) {
        out.w = h.partialPivLu().inverse();
        return out;
    }
    PseudoInverse p = pseudo_inverse(h);
    out.w = std::move(p.w);
    out.method = DetectMethod::PseudoInverse;
    out.rank_deficient = p.rank_deficient;
    return out;
}

DetectorOutput zf_detect(const ChannelEstimate& est, std::span<const std::vector<cplx>> y)
{
    check_observations(y, est.h.rows());
    const ZfWeights zf = zf_weights(est.h);
    const std::size_t len = y.empty() ? 0 : y.front().size();
    const Eigen::Index nt = zf.w.rows();

    DetectorOutput out;
    out.method = zf.method;
    out.rank_deficient = zf.rank_deficient;
    out.enhancement = row_norms(zf.w);
    out.streams.assign(nt, std::vector<cplx>(len));
    for (std::size_t k = 0; k < len; ++k)
        for (Eigen::Index m = 0; m < nt; ++m) {
            cplx acc{};
            for (Eigen::Index n = 0; n < zf.w.cols(); ++n)
                acc += zf.w(m, n) * y[n][k];
            out.streams[m][k] = acc;
        }
    return out;
}

DetectorOutput diversity_combine(const ChannelEstimate& est, std::span<const std::vector<cplx>> y)
{
    check_observations(y, est.h.rows());
    const Eigen::VectorXd heff = est.h.rowwise().sum();
    const double g = heff.squaredNorm();
    if (!(g > 0.0))
        throw Error(ErrorKind::Outage, "effective diversity channel is zero");
    const std::size_t len = y.empty() ? 0 : y.front().size();

    DetectorOutput out;
    out.method = DetectMethod::Mrc;
    out.enhancement = {1.0 / g};
    out.streams.assign(1, std::vector<cplx>(len));
    for (std::size_t k = 0; k < len; ++k) {
        cplx acc{};
        for (Eigen::Index n = 0; n < heff.size(); ++n)
            acc += heff(n) * y[n][k];
        out.streams[0][k] = acc / g;
    }
    return out;
}

std::vector<double> zf_stream_sinr(const Eigen::MatrixXd& h, double per_tx_power, double noise_variance)
{
    const ZfWeights zf = zf_weights(h);
    const Eigen::MatrixXd g = zf.w * h;
    const std::vector<double> enh = row_norms(zf.w);
    std::vector<double> out;
    for (Eigen::Index i = 0; i < g.rows(); ++i) {
        const double signal = g(i, i) * g(i, i) * per_tx_power;
        double interference = 0.0;
        for (Eigen::Index j = 0; j < g.cols(); ++j)
            if (j != i)
                interference += g(i, j) * g(i, j) * per_tx_power;
        // Numerical leakage of an exact inverse is not interference.
        if (!zf.rank_deficient && zf.method == DetectMethod::Inverse)
            interference = 0.0;
        out.push_back(ratio(signal, interference + noise_variance * enh[i]));
    }
    return out;
}

double sd_combined_snr(const Eigen::MatrixXd& h, double per_tx_power, double noise_variance)
{
    return ratio(per_tx_power * h.rowwise().sum().squaredNorm(), noise_variance);
}

} // namespace mimovlc
