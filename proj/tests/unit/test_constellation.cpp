#include <bit>
#include <cmath>
#include <numbers>
#include <random>
#include <set>

#include "checks/oracles.hpp"
#include "doctest.h"
#include "mimovlc/constellation.hpp"
#include "mimovlc/rng.hpp"

using namespace mimovlc;

TEST_CASE("constellation: supported orders only")
{
    for (int m : {0, 2, 8, 32, 128, 512, 1024})
        CHECK_THROWS_AS(build_constellation(m), Error);
    try {
        build_constellation(8);
    } catch (const Error& e) {
        CHECK(e.kind() == ErrorKind::UnsupportedOrder);
    }
}

TEST_CASE("constellation: 4-QAM corners")
{
    const auto c = build_constellation(4);
    const double r = 1.0 / std::numbers::sqrt2;
    CHECK(std::abs(c.point(0) - cplx(r, r)) < 1e-15);
    std::set<std::pair<double, double>> pts;
    for (cplx p : c.points()) {
        CHECK(std::abs(std::abs(p.real()) - r) < 1e-15);
        CHECK(std::abs(std::abs(p.imag()) - r) < 1e-15);
        pts.insert({p.real(), p.imag()});
    }
    CHECK(pts.size() == 4);
}

TEST_CASE("constellation: 16-QAM levels and energy")
{
    const auto c = build_constellation(16);
    const double s = 1.0 / std::sqrt(10.0);
    double energy = 0.0;
    for (cplx p : c.points()) {
        for (double v : {p.real(), p.imag()}) {
            const double level = std::abs(v) / s;
            CHECK((std::abs(level - 1.0) < 1e-12 || std::abs(level - 3.0) < 1e-12));
        }
        energy += std::norm(p) / 16.0;
    }
    CHECK(energy == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("constellation: square grid, symmetry, Gray neighbours")
{
    for (int m : kQamOrders) {
        const auto c = build_constellation(m);
        const auto pts = c.points();
        std::set<std::pair<long, long>> grid;
        for (cplx p : pts)
            grid.insert({std::lround(p.real() / c.scale()), std::lround(p.imag() / c.scale())});
        CHECK(grid.size() == static_cast<std::size_t>(m));
        for (const auto& [x, y] : grid)
            CHECK(grid.count({-x, -y}) == 1);

        int pairs = 0;
        for (int a = 0; a < m; ++a)
            for (int b = a + 1; b < m; ++b)
                if (std::abs(std::abs(pts[a] - pts[b]) - 2.0 * c.scale()) < 1e-9) {
                    ++pairs;
                    CHECK(std::popcount(static_cast<unsigned>(a ^ b)) == 1);
                }
        const int side = c.side();
        CHECK(pairs == 2 * side * (side - 1));
    }
}

TEST_CASE("map_bits: examples and errors")
{
    const auto c4 = build_constellation(4);
    const Bits zeros{0, 0, 0, 0};
    const auto blk = map_bits(zeros, c4);
    REQUIRE(blk.symbols.size() == 2);
    CHECK(blk.symbols[0] == c4.point(0));
    CHECK(blk.symbols[1] == c4.point(0));
    CHECK(map_bits(Bits{}, c4).symbols.empty());
    CHECK_THROWS_AS(map_bits(Bits{1, 0, 1}, c4), Error);

    const auto c16 = build_constellation(16);
    Bits all;
    for (unsigned label = 0; label < 16; ++label)
        for (int b = 3; b >= 0; --b)
            all.push_back((label >> b) & 1u);
    const auto s = map_bits(all, c16);
    std::set<std::pair<double, double>> seen;
    for (unsigned label = 0; label < 16; ++label) {
        CHECK(s.symbols[label] == c16.point(label));
        seen.insert({s.symbols[label].real(), s.symbols[label].imag()});
    }
    CHECK(seen.size() == 16);
}

TEST_CASE("demap: roundtrip, decision regions, ties")
{
    auto eng = rng::engine(5, rng::Stream::Bits);
    for (int m : kQamOrders) {
        const auto c = build_constellation(m);
        const Bits bits = rng::random_bits(eng, 10000 - 10000 % c.bits_per_symbol());
        CHECK(demap_symbols(map_bits(bits, c).symbols, c) == bits);
    }

    const auto c4 = build_constellation(4);
    const cplx r = 0.9 * c4.point(1) + cplx(0.05, -0.04);
    CHECK(demap_symbols(std::vector<cplx>{r}, c4) == Bits{0, 1});

    const auto c16 = build_constellation(16);
    for (unsigned a = 0; a < 16; ++a)
        for (unsigned b = 0; b < 16; ++b) {
            if (std::abs(std::abs(c16.point(a) - c16.point(b)) - 2.0 * c16.scale()) > 1e-9)
                continue;
            const cplx mid = 0.5 * (c16.point(a) + c16.point(b));
            CHECK(c16.nearest_label(mid) == std::min(a, b));
        }

    // Exhaustive-search oracle, including far-out points.
    std::uniform_real_distribution<double> u(-2.0, 2.0);
    for (int m : kQamOrders) {
        const auto c = build_constellation(m);
        for (int i = 0; i < 5000; ++i) {
            const cplx x(u(eng), u(eng));
            CHECK(c.nearest_label(x) == oracle::nearest_label(c.points(), x));
        }
    }
}

TEST_CASE("compute_evm: definition and AWGN law")
{
    const auto c = build_constellation(16);
    auto eng = rng::engine(9, rng::Stream::Bits);
    const auto ref = map_bits(rng::random_bits(eng, 4 * 1000), c).symbols;
    CHECK(compute_evm(ref, ref) == 0.0);

    // A 0.1 constant offset on a unit-energy reference.
    std::vector<cplx> off(ref);
    for (auto& v : off)
        v += cplx(0.06, 0.08);
    const double energy = [&] {
        double e = 0.0;
        for (cplx v : ref)
            e += std::norm(v);
        return e / ref.size();
    }();
    CHECK(compute_evm(off, ref) == doctest::Approx(0.1 / std::sqrt(energy)).epsilon(1e-12));

    CHECK_THROWS_AS(compute_evm(std::vector<cplx>{}, std::vector<cplx>{}), Error);
    CHECK_THROWS_AS(compute_evm(std::vector<cplx>(3), std::vector<cplx>(4)), Error);

    std::normal_distribution<double> g;
    for (double snr_db : {5.0, 15.0, 20.0, 25.0}) {
        const auto sym = map_bits(rng::random_bits(eng, 4 * 100000), c).symbols;
        const double sd = std::sqrt(std::pow(10.0, -snr_db / 10.0) / 2.0);
        std::vector<cplx> rx(sym);
        for (auto& v : rx)
            v += cplx(sd * g(eng), sd * g(eng));
        const double evm = compute_evm(rx, sym);
        CHECK(std::abs(10.0 * std::log10(1.0 / (evm * evm)) - snr_db) <= 0.5);
        if (snr_db == 20.0)
            CHECK(std::abs(evm - 0.1) <= 0.005);
    }
}
