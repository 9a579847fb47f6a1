#include <cmath>
#include <sstream>

#include "doctest.h"
#include "mimovlc/harness.hpp"

using namespace mimovlc;

TEST_CASE("run_link: zero-noise chain")
{
    ExperimentConfig cfg;
    cfg.fixed_mode = ModeCode{Scheme::SM, 4};
    cfg.frames = 3;
    cfg.warmup_frames = 0;
    cfg.axis_values = {300.0};
    const LinkReport r = run_link(cfg, 300.0, 1);
    CHECK(r.bit_errors == 0);
    CHECK(r.evm < 1e-6);
    CHECK(r.total_bits == 3ull * 4 * 256 * 2 * 2);
}

TEST_CASE("run_link: adaptive settles at the top mode")
{
    ExperimentConfig cfg;
    cfg.frames = 6;
    cfg.warmup_frames = 0;
    const LinkReport r = run_link(cfg, 45.0, 2);
    REQUIRE(r.mode_trace.size() >= 3);
    for (std::size_t i = 3; i < r.mode_trace.size(); ++i)
        CHECK(r.mode_trace[i] == "SM-256");
    CHECK(r.bit_errors == 0);
}

TEST_CASE("sweep: determinism and axis checks")
{
    ExperimentConfig cfg;
    cfg.fixed_mode = ModeCode{Scheme::SD, 4};
    cfg.frames = 2;
    cfg.warmup_frames = 0;
    cfg.axis_values = {0.0, 4.0, 8.0};
    cfg.seeds = {1, 2};
    std::ostringstream a, b;
    write_csv(a, sweep(cfg));
    write_csv(b, sweep(cfg));
    CHECK(a.str() == b.str());
    CHECK(a.str().rfind(kCsvHeader, 0) == 0);

    const SweepResult res = sweep(cfg);
    CHECK(res.reports.size() == 6);
    CHECK(res.summaries.size() == 3);
    CHECK(res.summaries[0].ber.mean >= res.summaries[2].ber.mean);

    ExperimentConfig empty = cfg;
    empty.axis_values.clear();
    CHECK_THROWS_AS(sweep(empty), Error);
}

TEST_CASE("config JSON round trip and strictness")
{
    const nlohmann::json j = {{"policy", "sd16"},
                              {"channel", {{"geometry", {{"preset", "bench"}}}, {"noise_variance", 2e-4}}},
                              {"axis", {{"distance_m", {{"start", 0.5}, {"stop", 1.0}, {"step", 0.25}}}}},
                              {"frames", 5}};
    const ExperimentConfig cfg = config_from_json(j);
    CHECK(cfg.use_geometry);
    CHECK(cfg.axis == Axis::DistanceM);
    CHECK(cfg.axis_values.size() == 3);
    CHECK(cfg.fixed_mode == ModeCode{Scheme::SD, 16});
    const ExperimentConfig again = config_from_json(config_to_json(cfg));
    CHECK(config_to_json(again) == config_to_json(cfg));

    CHECK_THROWS_AS(config_from_json({{"frame_count", 3}}), Error);
    CHECK_THROWS_AS(config_from_json({{"policy", "sm8"}}), Error);
}

TEST_CASE("calibration")
{
    ExperimentConfig cfg;
    cfg.use_geometry = true;
    cfg.axis = Axis::DistanceM;
    cfg.geometry.rx_fov_deg = 10.0;
    cfg.geometry.rx_tilt_deg = 0.0;
    cfg.geometry.tx_spacing = 0.5;
    cfg.geometry.rx_spacing = 0.5;
    cfg.geometry.gain = 1.0;
    cfg.frames = 8;
    cfg.warmup_frames = 0;
    cfg.axis_values = {1.0};

    CalibrationTarget t;
    t.distance = 1.0;
    const double g1 = predicted_anchor_gain(cfg, t);
    t.distance = std::sqrt(2.0);
    CHECK(predicted_anchor_gain(cfg, t) / g1 == doctest::Approx(2.0));
    CHECK(with_gain(cfg, 3.0).geometry.gain == 3.0);

    // Outside the field of view there is nothing to calibrate.
    ExperimentConfig blind = cfg;
    blind.geometry.rx_tilt_deg = 60.0;
    CHECK_THROWS_AS(predicted_anchor_gain(blind, t), Error);

    // A bracket that cannot reach the anchor BER.
    t.distance = 1.0;
    t.gain_bracket = std::pair{1e-6, 2e-6};
    CHECK_THROWS_AS(calibrate(cfg, t, 1), Error);
}

TEST_CASE("config warnings")
{
    ExperimentConfig cfg;
    cfg.frames = 1;
    cfg.blocks_per_frame = 1;
    cfg.fixed_mode = ModeCode{Scheme::SD, 4};
    cfg.policy.ber_target = 1e-5;
    CHECK_FALSE(config_warnings(cfg).empty());
    cfg.frames = 20;
    cfg.policy.ber_target = 1e-3;
    CHECK(config_warnings(cfg).empty());
}
