#include <cmath>
#include <random>

#include "checks/oracles.hpp"
#include "doctest.h"
#include "mimovlc/channel_estimation.hpp"
#include "mimovlc/mimo_detection.hpp"
#include "mimovlc/rng.hpp"

using namespace mimovlc;

TEST_CASE("zf_detect: identity and diagonal")
{
    const Streams y{{cplx(1, 2), cplx(-3, 0.5)}, {cplx(0, 1), 4.0}};
    const DetectorOutput id = zf_detect(perfect_estimate(Eigen::MatrixXd::Identity(2, 2)), y);
    CHECK(id.streams == y);
    CHECK(id.enhancement == std::vector<double>{1.0, 1.0});
    CHECK(id.method == DetectMethod::Inverse);
    CHECK_FALSE(id.rank_deficient);

    Eigen::MatrixXd d = Eigen::MatrixXd::Zero(2, 2);
    d(0, 0) = 2.0;
    d(1, 1) = 4.0;
    const Streams yd{{2.0, 2.0}, {4.0, 4.0}};
    const DetectorOutput out = zf_detect(perfect_estimate(d), yd);
    for (const auto& s : out.streams)
        for (cplx v : s)
            CHECK(std::abs(v - 1.0) < 1e-15);
    CHECK(out.enhancement[0] == doctest::Approx(0.25));
    CHECK(out.enhancement[1] == doctest::Approx(1.0 / 16.0));
}

TEST_CASE("zf_detect: rank one uses the pseudo-inverse")
{
    const Eigen::MatrixXd h = Eigen::MatrixXd::Ones(2, 2);
    const Streams y{{cplx(1.0, 0.3), cplx(-0.4, 2.0)}, {cplx(0.7, 0.1), cplx(0.2, -1.0)}};
    const DetectorOutput out = zf_detect(perfect_estimate(h), y);
    CHECK(out.method == DetectMethod::PseudoInverse);
    CHECK(out.rank_deficient);
    const Eigen::MatrixXd w = oracle::pinv(h);
    for (int k = 0; k < 2; ++k)
        for (int t = 0; t < 2; ++t) {
            const cplx ref = w(t, 0) * y[0][k] + w(t, 1) * y[1][k];
            CHECK(std::abs(out.streams[t][k] - ref) < 1e-9);
        }

    const PseudoInverse p = pseudo_inverse(h);
    CHECK(p.rank == 1);
    CHECK((p.w - w).norm() < 1e-9);
}

TEST_CASE("zf_detect: random matrices agree with the SVD oracle")
{
    auto eng = rng::engine(8, rng::Stream::Point);
    std::normal_distribution<double> g;
    for (int t = 0; t < 100; ++t) {
        Eigen::MatrixXd h(2 + t % 2, 2);
        for (int i = 0; i < h.size(); ++i)
            h.data()[i] = g(eng);
        const ZfWeights z = zf_weights(h);
        CHECK((z.w - oracle::pinv(h)).norm() < 1e-9 * (1.0 + z.w.norm()));
    }
    CHECK_THROWS_AS(zf_detect(perfect_estimate(Eigen::MatrixXd::Identity(2, 2)), Streams(3, std::vector<cplx>(2))),
                    Error);
}

TEST_CASE("diversity_combine: MRC")
{
    const std::vector<cplx> s{cplx(0.7, -0.7), cplx(-0.7, 0.7)};
    const DetectorOutput id = diversity_combine(perfect_estimate(Eigen::MatrixXd::Identity(2, 2)), Streams{s, s});
    CHECK(id.method == DetectMethod::Mrc);
    for (std::size_t k = 0; k < s.size(); ++k)
        CHECK(std::abs(id.streams[0][k] - s[k]) < 1e-15);

    // Row sums give h_eff = [3, 4]; output noise variance 1/25 at unit noise.
    Eigen::MatrixXd h(2, 2);
    h << 1.0, 2.0, 1.5, 2.5;
    const Streams y{{3.0}, {4.0}};
    const DetectorOutput out = diversity_combine(perfect_estimate(h), y);
    CHECK(std::abs(out.streams[0][0] - 1.0) < 1e-15);
    CHECK(out.enhancement[0] == doctest::Approx(1.0 / 25.0));

    // No fixed weight vector beats MRC.
    auto eng = rng::engine(12, rng::Stream::Point);
    std::normal_distribution<double> g;
    const double mrc = sd_combined_snr(h, 1.0, 1.0);
    CHECK(mrc == doctest::Approx(25.0));
    for (int t = 0; t < 1000; ++t) {
        const double a = g(eng), b = g(eng);
        const double snr = std::pow(3.0 * a + 4.0 * b, 2) / (a * a + b * b);
        CHECK(snr <= mrc + 1e-9);
    }

    CHECK_THROWS_AS(diversity_combine(perfect_estimate(Eigen::MatrixXd::Zero(2, 2)), Streams{s, s}), Error);
}

TEST_CASE("stream SINR: identity gets exactly 3 dB from combining")
{
    const Eigen::MatrixXd id = Eigen::MatrixXd::Identity(2, 2);
    const auto sm = zf_stream_sinr(id, 1.0, 0.1);
    CHECK(sm[0] == doctest::Approx(10.0));
    CHECK(sd_combined_snr(id, 1.0, 0.1) / sm[0] == doctest::Approx(2.0));
}
