#include "checks/suites.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <random>
#include <sstream>

#include "checks/oracles.hpp"
#include "mimovlc/channel_estimation.hpp"
#include "mimovlc/channel_model.hpp"
#include "mimovlc/constellation.hpp"
#include "mimovlc/framing.hpp"
#include "mimovlc/harness.hpp"
#include "mimovlc/link_adaptation.hpp"
#include "mimovlc/mimo_detection.hpp"
#include "mimovlc/rng.hpp"

namespace mimovlc::checks {

namespace {

class Tally {
public:
    explicit Tally(std::string name) { r_.name = std::move(name); }

    bool check(bool ok, const std::string& what)
    {
        ++r_.checks;
        if (!ok && r_.passed) {
            r_.passed = false;
            r_.detail = what;
        }
        return ok;
    }

    SuiteResult done()
    {
        if (r_.passed)
            r_.detail = std::to_string(r_.checks) + " checks";
        return r_;
    }

private:
    SuiteResult r_;
};

Eigen::MatrixXd random_matrix(rng::Engine& eng, Eigen::Index rows, Eigen::Index cols)
{
    std::uniform_real_distribution<double> u(0.0, 1.0);
    Eigen::MatrixXd h(rows, cols);
    for (Eigen::Index i = 0; i < h.size(); ++i)
        h(i) = u(eng);
    return h;
}

std::string describe(const std::string& what, double value)
{
    std::ostringstream os;
    os << what << " (" << value << ")";
    return os.str();
}

} // namespace

SuiteResult zero_noise_end_to_end(std::uint64_t seed)
{
    Tally t("zero-noise end-to-end");
    ExperimentConfig cfg;
    cfg.use_geometry = true;
    cfg.geometry = bench_geometry();
    cfg.noise_variance = 0.0;
    cfg.axis = Axis::DistanceM;
    cfg.axis_values = {1.0};
    cfg.frames = 2;
    cfg.warmup_frames = 0;
    cfg.shaping.carrier = 5e6;

    for (int path = 0; path < 3; ++path) {
        cfg.waveform = path > 0;
        cfg.passband = path == 2;
        const char* label = path == 0 ? "symbols" : (path == 1 ? "baseband" : "passband");
        for (const ModeCode m : all_modes()) {
            cfg.fixed_mode = m;
            const LinkReport r = run_link(cfg, 1.0, seed);
            t.check(r.total_bits > 0 && r.bit_errors == 0 && r.lost_frames == 0,
                    to_string(m) + " over " + label + ": " + std::to_string(r.bit_errors) + " errors");
        }
    }
    return t.done();
}

SuiteResult estimator_exact(std::uint64_t seed)
{
    Tally t("noiseless estimator");
    auto eng = rng::engine(seed, rng::Stream::Point, 0xe5);
    for (int trial = 0; trial < 100; ++trial) {
        const Eigen::MatrixXd h = random_matrix(eng, 2, 2);
        const Training tr = generate_training({64, eng(), 2});
        const Streams tx = tr.streams();
        const Streams rx = apply_channel(ChannelMatrix{h, 0.0}, tx, eng());
        std::vector<Streams> obs(2);
        for (int n = 0; n < 2; ++n)
            for (int m = 0; m < 2; ++m)
                obs[n].emplace_back(rx[n].begin() + m * 64, rx[n].begin() + (m + 1) * 64);
        const ChannelEstimate est = estimate_channel(obs, tr);
        const double err = (est.h - h).cwiseAbs().maxCoeff();
        t.check(err <= 1e-10, describe("estimate error", err));
    }
    return t.done();
}

SuiteResult capacity_identity(std::uint64_t seed)
{
    Tally t("capacity forms");
    auto eng = rng::engine(seed, rng::Stream::Point, 0xca);
    std::uniform_real_distribution<double> snr_db(-10.0, 40.0);
    std::uniform_int_distribution<int> dim(1, 4);
    for (int trial = 0; trial < 1000; ++trial) {
        const Eigen::MatrixXd h = random_matrix(eng, dim(eng), dim(eng));
        const int nt = static_cast<int>(h.cols());
        const double sigma2 = 1.0 / std::pow(10.0, snr_db(eng) / 10.0);
        const CapacityForms c = capacity_forms(h, nt, nt, sigma2);

        // Independent determinant of I + rho H H^T.
        const double rho = 1.0 / sigma2;
        const Eigen::MatrixXd a = Eigen::MatrixXd::Identity(h.rows(), h.rows()) + rho * h * h.transpose();
        const double det_oracle = std::log2(oracle::laplace_det(a));
        double eig_oracle = 0.0;
        for (double ev : oracle::symmetric_eigenvalues(h * h.transpose()))
            eig_oracle += std::log2(1.0 + rho * std::max(0.0, ev));

        t.check(std::abs(c.eigen - c.determinant) <= 1e-9, describe("det vs eigen form", c.eigen - c.determinant));
        // Oracles lose relative precision at high SNR; compare relatively.
        const double scale = std::max(1.0, std::abs(c.eigen));
        t.check(std::abs(c.eigen - eig_oracle) <= 1e-9 * scale, describe("eigen form vs Jacobi oracle", c.eigen - eig_oracle));
        t.check(std::abs(c.determinant - det_oracle) <= 1e-9 * scale, describe("det form vs Laplace", c.determinant - det_oracle));
        const double tol = 1e-9 * std::max(1.0, c.eigen);
        t.check(c.eigen <= c.frobenius_bound + tol && c.determinant <= c.frobenius_bound + tol,
                describe("Frobenius bound violated", c.eigen - c.frobenius_bound));
        t.check(c.eigen >= c.frobenius_single - tol, describe("below the single-mode form", c.eigen - c.frobenius_single));
    }
    return t.done();
}

SuiteResult ber_bound_dominance()
{
    // The exponential bound starts at 0.2, below the approximation's
    // prefactor, so it only dominates once P_b has dropped a little (the
    // crossovers sit between P_b 0.06 and 0.2). Points above 5e-2 are skipped.
    Tally t("BER bound dominance");
    for (const int m : kQamOrders)
        for (int i = 0; i <= 4000; ++i) {
            const double gamma_db = -20.0 + 0.015 * i;
            const double gamma = std::pow(10.0, gamma_db / 10.0);
            const double p = predict_ber(m, gamma);
            if (p > 5e-2)
                continue;
            t.check(ber_bound(m, gamma) >= p,
                    "bound below approximation at M=" + std::to_string(m) + ", " + std::to_string(gamma_db) + " dB");
        }
    return t.done();
}

SuiteResult pseudo_inverse_oracle(std::uint64_t seed)
{
    Tally t("pseudo-inverse vs SVD oracle");
    auto eng = rng::engine(seed, rng::Stream::Point, 0x91);
    std::uniform_int_distribution<int> dim(1, 4);
    auto compare = [&](const Eigen::MatrixXd& h, const std::string& label) {
        const PseudoInverse p = pseudo_inverse(h);
        const Eigen::MatrixXd o = oracle::pinv(h);
        const double err = (p.w - o).cwiseAbs().maxCoeff() / std::max(1.0, o.cwiseAbs().maxCoeff());
        t.check(err <= 1e-9, describe(label + " pinv mismatch", err));
    };
    for (int trial = 0; trial < 300; ++trial) {
        const Eigen::MatrixXd h = random_matrix(eng, dim(eng), dim(eng));
        compare(h, "random");
        // Rank one: outer product of two positive vectors.
        const Eigen::MatrixXd r1 = random_matrix(eng, h.rows(), 1) * random_matrix(eng, 1, h.cols());
        compare(r1, "rank-one");
        const PseudoInverse p = pseudo_inverse(r1);
        t.check(std::min(r1.rows(), r1.cols()) == 1 || p.rank_deficient, "rank-deficiency flag not set");
    }
    const Eigen::MatrixXd ones = Eigen::MatrixXd::Ones(2, 2);
    compare(ones, "all-ones");
    t.check(zf_weights(ones).rank_deficient, "all-ones channel not flagged");
    const Eigen::MatrixXd sq = random_matrix(eng, 3, 3) + 3.0 * Eigen::MatrixXd::Identity(3, 3);
    t.check((zf_weights(sq).w - pseudo_inverse(sq).w).cwiseAbs().maxCoeff() <= 1e-9, "inverse and pinv paths differ");
    return t.done();
}

SuiteResult constellation_invariants(std::uint64_t seed)
{
    Tally t("constellation invariants");
    auto eng = rng::engine(seed, rng::Stream::Point, 0xc0);
    for (const int order : kQamOrders) {
        const Constellation c = build_constellation(order);
        const auto pts = c.points();
        double energy = 0.0;
        for (const cplx p : pts)
            energy += std::norm(p) / order;
        t.check(std::abs(energy - 1.0) <= 1e-12, describe("energy of " + std::to_string(order) + "-QAM", energy));

        const auto ref = oracle::gray_qam(order);
        double diff = 0.0;
        for (int i = 0; i < order; ++i)
            diff = std::max(diff, std::abs(pts[i] - ref[i]));
        t.check(diff <= 1e-12, describe("labelling differs from the reference Gray map", diff));

        // Gray: grid neighbours differ in one bit.
        const double step = 2.0 * c.scale();
        for (int a = 0; a < order; ++a)
            for (int b = a + 1; b < order; ++b)
                if (std::abs(std::abs(pts[a] - pts[b]) - step) < 1e-9)
                    t.check(std::popcount(static_cast<unsigned>(a ^ b)) == 1, "neighbours differ in more than one bit");

        std::uniform_real_distribution<double> u(-1.3, 1.3);
        for (int i = 0; i < 2000; ++i) {
            const cplx r(u(eng), u(eng));
            t.check(c.nearest_label(r) == oracle::nearest_label(pts, r), "slicer disagrees with exhaustive search");
        }

        const Bits bits = rng::random_bits(eng, static_cast<std::size_t>(c.bits_per_symbol()) * 512);
        const SymbolBlock blk = map_bits(bits, c);
        t.check(demap_symbols(blk.symbols, c) == bits, "map/demap roundtrip failed");
        t.check(compute_evm(blk.symbols, blk.symbols) == 0.0, "EVM of a clean block is not zero");
        std::vector<cplx> scaled(blk.symbols);
        for (auto& s : scaled)
            s *= 1.1;
        t.check(std::abs(compute_evm(scaled, blk.symbols) - 0.1) <= 1e-12, "EVM of a 10% gain error is not 0.1");
    }
    return t.done();
}

SuiteResult framing_roundtrips(std::uint64_t seed)
{
    Tally t("frame and CP roundtrips");
    auto eng = rng::engine(seed, rng::Stream::Point, 0xf4);
    std::normal_distribution<double> g;
    for (const int cp : {0, 1, 8, 32}) {
        std::vector<cplx> block(64);
        for (auto& v : block)
            v = {g(eng), g(eng)};
        const auto wrapped = add_cyclic_prefix(block, cp);
        t.check(wrapped.size() == block.size() + cp, "CP length");
        t.check(std::equal(wrapped.begin(), wrapped.begin() + cp, block.end() - cp), "CP is not the block tail");
        t.check(remove_cyclic_prefix(wrapped, 64, cp) == block, "CP roundtrip");
    }
    for (const int nt : {1, 2, 3}) {
        const Constellation c = build_constellation(16);
        std::vector<SymbolBlock> payloads;
        for (int m = 0; m < nt; ++m)
            payloads.push_back(map_bits(rng::random_bits(eng, 4 * 3 * 128), c));
        const Frame f = build_frame(payloads, {32, 9, nt}, 128, 16);
        const ParsedFrame p = parse_frame(f.streams, f.layout);
        const Training tr = generate_training({32, 9, nt});
        for (int m = 0; m < nt; ++m) {
            t.check(p.payload[m] == payloads[m].symbols, "payload roundtrip");
            for (int s = 0; s < nt; ++s) {
                bool ok = true;
                for (int k = 0; k < 32; ++k)
                    ok &= p.training[m][s][k] == (s == m ? cplx(tr.sequences[m][k]) : cplx{});
                t.check(ok, "training slot layout");
            }
        }
        const FrameLayout back = layout_from_json(layout_to_json(f.layout));
        t.check(back.l_ts == 32 && back.block == 128 && back.cp == 16 && back.n_tx == nt && back.seed == 9,
                "layout JSON roundtrip");
    }
    return t.done();
}

std::vector<SuiteResult> run_all_suites(std::uint64_t seed)
{
    return {zero_noise_end_to_end(seed), estimator_exact(seed),         capacity_identity(seed),
            ber_bound_dominance(),       pseudo_inverse_oracle(seed),   constellation_invariants(seed),
            framing_roundtrips(seed)};
}

} // namespace mimovlc::checks
