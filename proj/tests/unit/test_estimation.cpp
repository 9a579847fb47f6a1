#include <cmath>
#include <random>

#include "doctest.h"
#include "mimovlc/channel_estimation.hpp"
#include "mimovlc/channel_model.hpp"
#include "mimovlc/framing.hpp"
#include "mimovlc/rng.hpp"

using namespace mimovlc;

namespace {

// Observations of the training slots through H.
std::vector<Streams> observe(const Eigen::MatrixXd& h, const Training& t, double noise, std::uint64_t seed)
{
    const Streams y = apply_channel(ChannelMatrix{h, noise}, t.streams(), seed);
    std::vector<Streams> obs(y.size(), Streams(t.num_tx));
    for (std::size_t r = 0; r < y.size(); ++r)
        for (int s = 0; s < t.num_tx; ++s)
            obs[r][s].assign(y[r].begin() + s * t.length, y[r].begin() + (s + 1) * t.length);
    return obs;
}

} // namespace

TEST_CASE("estimate_channel: noiseless recovery")
{
    Eigen::MatrixXd h(2, 2);
    h << 1.0, 0.2, 0.2, 1.0;
    const Training t = generate_training({64, 3, 2});
    const ChannelEstimate est = estimate_channel(observe(h, t, 0.0, 1), t, 5);
    CHECK((est.h - h).cwiseAbs().maxCoeff() < 1e-12);
    CHECK(est.frame_index == 5);
    CHECK(est.noise_estimate() < 1e-20);

    auto eng = rng::engine(2, rng::Stream::Point);
    std::normal_distribution<double> g;
    for (int trial = 0; trial < 100; ++trial) {
        Eigen::MatrixXd r(2, 2);
        for (int i = 0; i < 4; ++i)
            r.data()[i] = std::abs(g(eng));
        const Training tt = generate_training({64, static_cast<std::uint64_t>(trial) + 100, 2});
        CHECK((estimate_channel(observe(r, tt, 0.0, trial), tt).h - r).norm() <= 1e-10 * r.norm());
    }
}

TEST_CASE("estimate_channel: least-squares error variance")
{
    Eigen::MatrixXd h(2, 2);
    h << 1.0, 0.3, 0.1, 0.8;
    const double noise = 0.01;
    const Training t = generate_training({64, 4, 2});
    double se = 0.0, resid = 0.0;
    const int trials = 1000;
    for (int k = 0; k < trials; ++k) {
        const ChannelEstimate est = estimate_channel(observe(h, t, noise, 1000 + k), t);
        se += (est.h - h).squaredNorm() / 4.0;
        resid += est.noise_estimate();
    }
    // Real projection keeps half of the complex noise power.
    const double predicted = std::sqrt(noise / 2.0 / 64.0);
    CHECK(std::sqrt(se / trials) == doctest::Approx(predicted).epsilon(0.3));
    CHECK(resid / trials == doctest::Approx(noise).epsilon(0.1));
}

TEST_CASE("estimate_channel: shape errors")
{
    const Training t = generate_training({64, 1, 2});
    std::vector<Streams> one_slot(2, Streams(1, std::vector<cplx>(64)));
    CHECK_THROWS_AS(estimate_channel(one_slot, t), Error);
    std::vector<Streams> short_slot(2, Streams(2, std::vector<cplx>(10)));
    CHECK_THROWS_AS(estimate_channel(short_slot, t), Error);
}

TEST_CASE("eigen_snrs and snr_from_evm")
{
    const ModeSnrs id = eigen_snrs(perfect_estimate(Eigen::MatrixXd::Identity(2, 2)), 20.0, 2, 1.0);
    CHECK(id.sm[0] == doctest::Approx(10.0));
    CHECK(id.sm[1] == doctest::Approx(10.0));
    CHECK(id.sd == doctest::Approx(20.0));

    const ModeSnrs ones = eigen_snrs(perfect_estimate(Eigen::MatrixXd::Ones(2, 2)), 20.0, 2, 1.0);
    CHECK(ones.sm[0] == doctest::Approx(40.0));
    CHECK(ones.sm[1] == doctest::Approx(0.0));
    // Row sums [2, 2]: rho ||h_eff||^2 = 8 rho.
    CHECK(ones.sd == doctest::Approx(80.0));

    CHECK(snr_from_evm(0.1) == doctest::Approx(100.0));
    CHECK(snr_from_evm(1.0) == 1.0);
    CHECK_THROWS_AS(snr_from_evm(0.0), Error);
    CHECK_THROWS_AS(snr_from_evm(-0.1), Error);
}
