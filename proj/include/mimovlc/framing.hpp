#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "mimovlc/common.hpp"
#include "mimovlc/constellation.hpp"

namespace mimovlc {

struct TrainingConfig {
    int length_per_tx = 64;
    std::uint64_t seed = 0x7a11;
    int num_tx = 2;

    void validate() const;
};

/// BPSK training: one +-1 sequence per transmitter, each sent in its own
/// slot while every other transmitter is silent.
struct Training {
    int num_tx = 0;
    int length = 0;
    std::vector<std::vector<double>> sequences;

    /// Per-transmitter stream over all num_tx slots (block-diagonal layout).
    Streams streams() const;
};

Training generate_training(const TrainingConfig& cfg);

std::vector<cplx> add_cyclic_prefix(std::span<const cplx> block, int cp);
std::vector<cplx> remove_cyclic_prefix(std::span<const cplx> seq, int block, int cp);

struct FrameLayout {
    int l_ts = 64;
    int block = 256;
    int cp = 8;
    int n_tx = 2;
    std::uint64_t seed = 0x7a11;
    int num_blocks = 0;

    std::size_t training_length() const noexcept { return static_cast<std::size_t>(n_tx) * l_ts; }
    std::size_t payload_length() const noexcept { return static_cast<std::size_t>(num_blocks) * block; }
    std::size_t frame_length() const noexcept
    {
        return training_length() + static_cast<std::size_t>(num_blocks) * (block + cp);
    }
    /// Training plus cyclic-prefix symbols as a fraction of the frame.
    double overhead() const noexcept;

    TrainingConfig training_config() const { return {l_ts, seed, n_tx}; }
};

/// JSON with the fields "l_ts", "block", "cp", "n_tx", "seed". The block
/// count is not part of the document; parse_frame infers it from length.
std::string layout_to_json(const FrameLayout& layout);
FrameLayout layout_from_json(std::string_view text);

struct Frame {
    FrameLayout layout;
    int order = 0;
    Streams streams;
};

Frame build_frame(std::span<const SymbolBlock> payloads, const TrainingConfig& cfg, int block, int cp);

struct ParsedFrame {
    /// training[rx][slot]: the observation of slot `slot` at receiver `rx`.
    std::vector<Streams> training;
    /// payload[rx]: CP-stripped payload blocks, concatenated.
    Streams payload;
    int num_blocks = 0;
};

ParsedFrame parse_frame(std::span<const std::vector<cplx>> received, const FrameLayout& layout);

} // namespace mimovlc
