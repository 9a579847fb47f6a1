#include <cmath>
#include <random>
#include <vector>

#include "doctest.h"
#include "mimovlc/metrics.hpp"
#include "mimovlc/rng.hpp"

using namespace mimovlc;

TEST_CASE("count_bit_errors")
{
    auto eng = rng::engine(1, rng::Stream::Bits);
    const Bits tx = rng::random_bits(eng, 10000);
    CHECK(count_bit_errors(tx, tx).errors == 0);
    CHECK(count_bit_errors(tx, tx).ber == 0.0);

    Bits flipped(tx);
    for (auto& b : flipped)
        b ^= 1u;
    CHECK(count_bit_errors(tx, flipped).errors == tx.size());
    CHECK(count_bit_errors(tx, flipped).ber == 1.0);

    Bits some(tx);
    for (int i = 0; i < 17; ++i)
        some[i * 577] ^= 1u;
    const auto r = count_bit_errors(tx, some);
    CHECK(r.errors == 17);
    CHECK(r.ber == doctest::Approx(1.7e-3));

    CHECK_THROWS_AS(count_bit_errors(tx, Bits(5)), Error);
    CHECK(count_bit_errors(Bits{}, Bits{}).errors == 0);
}

TEST_CASE("achieved_spectral_efficiency")
{
    const AdaptPolicy p;
    CHECK(achieved_spectral_efficiency(ModeCode{Scheme::SM, 64}, 1e-5, p) == 12.0);
    CHECK(achieved_spectral_efficiency(ModeCode{Scheme::SD, 16}, 1e-4, p) == 4.0);
    CHECK(achieved_spectral_efficiency(ModeCode{Scheme::SM, 256}, 5e-3, p) == 0.0);
    CHECK(achieved_spectral_efficiency(std::nullopt, 0.0, p) == 0.0);
}

namespace {

LinkReport report(double ber, std::uint64_t bits = 100000)
{
    LinkReport r;
    r.ber = ber;
    r.total_bits = bits;
    r.bit_errors = static_cast<std::uint64_t>(std::llround(ber * bits));
    r.evm = 0.05;
    r.snr_db = 20.0;
    r.nominal_spec_eff = 12.0;
    r.achieved_spec_eff = ber <= 1e-3 ? 12.0 : 0.0;
    r.error_free = ber <= 1e-3;
    r.dominant_mode = "SM-64";
    r.dwell = {{"SM-64", 5}};
    return r;
}

} // namespace

TEST_CASE("aggregate_reports")
{
    const std::vector<LinkReport> one{report(2e-4)};
    const ReportSummary s1 = aggregate_reports(one);
    CHECK(s1.count == 1);
    CHECK(s1.ber.mean == doctest::Approx(2e-4));
    CHECK(s1.ber.lo == s1.ber.hi);
    CHECK(s1.evm.lo == s1.evm.hi);

    const std::vector<LinkReport> two{report(0.0), report(2e-3)};
    const ReportSummary s2 = aggregate_reports(two);
    CHECK(s2.ber.mean == doctest::Approx(1e-3));
    CHECK(s2.error_free_fraction == 0.5);
    CHECK(s2.dominant_mode == "SM-64");

    CHECK_THROWS_AS(aggregate_reports(std::span<const LinkReport>{}), Error);

    // Interval width scales as 1/sqrt(n).
    auto eng = rng::engine(3, rng::Stream::Noise);
    std::normal_distribution<double> g(20.0, 1.0);
    auto width = [&](int n) {
        double total = 0.0;
        for (int rep = 0; rep < 50; ++rep) {
            std::vector<LinkReport> rs;
            for (int i = 0; i < n; ++i) {
                LinkReport r = report(1e-4);
                r.snr_db = g(eng);
                rs.push_back(r);
            }
            const ReportSummary s = aggregate_reports(rs);
            total += s.snr_db.hi - s.snr_db.lo;
        }
        return total / 50;
    };
    CHECK(width(4) / width(400) == doctest::Approx(10.0).epsilon(0.2));
}

TEST_CASE("report JSON and CSV")
{
    LinkReport r = report(3e-4);
    r.distance_m = 1.5;
    r.evm_snr_db = INFINITY;
    r.mode_trace = {"SM-64", "SM-64", "outage"};
    r.dwell = {{"SM-64", 2}, {"outage", 1}};
    r.stream_evm = {0.04, 0.06};
    const LinkReport back = report_from_json(report_to_json(r));
    CHECK(back.ber == r.ber);
    CHECK(back.mode_trace == r.mode_trace);
    CHECK(back.dwell == r.dwell);
    CHECK(std::isinf(back.evm_snr_db));
    CHECK(back.stream_evm == r.stream_evm);

    const std::string row = csv_row(r);
    CHECK(row.rfind("1.5,", 0) == 0);
    CHECK(row.find("SM-64,SM,64") != std::string::npos);

    LinkReport dead = report(0.0);
    dead.dominant_mode = "outage";
    CHECK(csv_row(dead).find("outage,none,0") != std::string::npos);
}
