#include "doctest.h"
#include "mimovlc/constellation.hpp"
#include "mimovlc/framing.hpp"
#include "mimovlc/rng.hpp"

using namespace mimovlc;

TEST_CASE("training: block-diagonal, deterministic, unit magnitude")
{
    const Training t = generate_training({64, 0x5eed, 2});
    const Streams s = t.streams();
    REQUIRE(s.size() == 2);
    REQUIRE(s[0].size() == 128);
    for (int k = 0; k < 128; ++k) {
        CHECK(s[0][k] * s[1][k] == cplx{});
        const int owner = k / 64;
        CHECK(std::abs(s[owner][k]) == 1.0);
    }
    const Training again = generate_training({64, 0x5eed, 2});
    CHECK(again.sequences == t.sequences);
    CHECK(generate_training({64, 0x5eee, 2}).sequences != t.sequences);
    CHECK_THROWS_AS(generate_training({8, 1, 2}), Error);
    CHECK_THROWS_AS(generate_training({64, 1, 0}), Error);
}

TEST_CASE("cyclic prefix")
{
    const std::vector<cplx> block{1.0, 2.0, 3.0, 4.0};
    CHECK(add_cyclic_prefix(block, 2) == std::vector<cplx>{3.0, 4.0, 1.0, 2.0, 3.0, 4.0});
    CHECK(add_cyclic_prefix(block, 0) == block);
    CHECK_THROWS_AS(add_cyclic_prefix(block, 5), Error);
    CHECK(remove_cyclic_prefix(add_cyclic_prefix(block, 3), 4, 3) == block);
    CHECK_THROWS_AS(remove_cyclic_prefix(block, 4, 1), Error);
}

TEST_CASE("build_frame: layout arithmetic and roundtrip")
{
    const auto c = build_constellation(4);
    auto eng = rng::engine(3, rng::Stream::Bits);
    std::vector<SymbolBlock> p{map_bits(rng::random_bits(eng, 1024), c), map_bits(rng::random_bits(eng, 1024), c)};
    const Frame f = build_frame(p, {64, 1, 2}, 256, 8);
    CHECK(f.layout.num_blocks == 2);
    CHECK(f.streams[0].size() == 2 * 64 + 2 * (256 + 8));
    CHECK(f.streams[1].size() == f.streams[0].size());
    CHECK(f.layout.overhead() == doctest::Approx((128.0 + 16.0) / 656.0));

    const ParsedFrame parsed = parse_frame(f.streams, f.layout);
    CHECK(parsed.num_blocks == 2);
    CHECK(parsed.payload[0] == p[0].symbols);
    CHECK(parsed.payload[1] == p[1].symbols);

    // Each payload block is preceded by its own tail.
    for (int b = 0; b < 2; ++b) {
        const auto first = f.streams[0].begin() + 128 + b * 264;
        CHECK(std::equal(first, first + 8, first + 256));
    }

    auto truncated = f.streams;
    for (auto& s : truncated)
        s.pop_back();
    CHECK_THROWS_AS(parse_frame(truncated, f.layout), Error);
}

TEST_CASE("build_frame: empty payload, SD copies, errors")
{
    std::vector<SymbolBlock> empty(2, SymbolBlock{{}, 4});
    const Frame f = build_frame(empty, {64, 1, 2}, 256, 8);
    CHECK(f.streams[0].size() == 128);
    CHECK(parse_frame(f.streams, f.layout).num_blocks == 0);

    const auto c = build_constellation(64);
    auto eng = rng::engine(4, rng::Stream::Bits);
    const SymbolBlock shared = map_bits(rng::random_bits(eng, 6 * 256), c);
    const Frame sd = build_frame(std::vector<SymbolBlock>{shared, shared}, {64, 1, 2}, 256, 8);
    const ParsedFrame p = parse_frame(sd.streams, sd.layout);
    CHECK(p.payload[0] == shared.symbols);
    CHECK(p.payload[0] == p.payload[1]);

    std::vector<SymbolBlock> uneven{shared, SymbolBlock{std::vector<cplx>(512), 64}};
    CHECK_THROWS_AS(build_frame(uneven, {64, 1, 2}, 256, 8), Error);
    std::vector<SymbolBlock> odd(2, SymbolBlock{std::vector<cplx>(300), 4});
    CHECK_THROWS_AS(build_frame(odd, {64, 1, 2}, 256, 8), Error);
}

TEST_CASE("layout JSON")
{
    FrameLayout l;
    l.l_ts = 32;
    l.block = 128;
    l.cp = 4;
    l.n_tx = 3;
    l.seed = 77;
    const FrameLayout back = layout_from_json(layout_to_json(l));
    CHECK(back.l_ts == 32);
    CHECK(back.block == 128);
    CHECK(back.cp == 4);
    CHECK(back.n_tx == 3);
    CHECK(back.seed == 77);
    CHECK_THROWS_AS(layout_from_json("{\"l_ts\": 3}"), Error);
}
