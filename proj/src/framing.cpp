#include "mimovlc/framing.hpp"

#include <algorithm>

#include "json.hpp"
#include "mimovlc/rng.hpp"

namespace mimovlc {

void TrainingConfig::validate() const
{
    if (length_per_tx < 16)
        throw Error(ErrorKind::InvalidArgument, "training length must be at least 16 symbols");
    if (num_tx < 1)
        throw Error(ErrorKind::InvalidArgument, "training needs at least one transmitter");
}

Streams Training::streams() const
{
    Streams out(num_tx, std::vector<cplx>(static_cast<std::size_t>(num_tx) * length));
    for (int m = 0; m < num_tx; ++m)
        std::copy(sequences[m].begin(), sequences[m].end(), out[m].begin() + m * length);
    return out;
}

Training generate_training(const TrainingConfig& cfg)
{
    cfg.validate();
    Training t;
    t.num_tx = cfg.num_tx;
    t.length = cfg.length_per_tx;
    for (int m = 0; m < cfg.num_tx; ++m) {
        auto eng = rng::engine(cfg.seed, rng::Stream::Bits, 0x7a11, static_cast<std::uint64_t>(m));
        const Bits bits = rng::random_bits(eng, static_cast<std::size_t>(cfg.length_per_tx));
        std::vector<double> seq(bits.size());
        std::transform(bits.begin(), bits.end(), seq.begin(),
                       [](std::uint8_t b) { return b ? -1.0 : 1.0; });
        t.sequences.push_back(std::move(seq));
    }
    return t;
}

std::vector<cplx> add_cyclic_prefix(std::span<const cplx> block, int cp)
{
    if (cp < 0 || static_cast<std::size_t>(cp) > block.size())
        throw Error(ErrorKind::InvalidArgument, "cyclic prefix longer than block");
    std::vector<cplx> out;
    out.reserve(block.size() + cp);
    out.insert(out.end(), block.end() - cp, block.end());
    out.insert(out.end(), block.begin(), block.end());
    return out;
}

std::vector<cplx> remove_cyclic_prefix(std::span<const cplx> seq, int block, int cp)
{
    if (block < 0 || cp < 0 || seq.size() != static_cast<std::size_t>(block + cp))
        throw Error(ErrorKind::LengthMismatch, "sequence length is not block + cp");
    return {seq.begin() + cp, seq.end()};
}

double FrameLayout::overhead() const noexcept
{
    const double total = static_cast<double>(frame_length());
    if (total == 0.0)
        return 0.0;
    return (static_cast<double>(training_length()) + static_cast<double>(num_blocks) * cp) / total;
}

std::string layout_to_json(const FrameLayout& layout)
{
    nlohmann::json j{{"l_ts", layout.l_ts},
                     {"block", layout.block},
                     {"cp", layout.cp},
                     {"n_tx", layout.n_tx},
                     {"seed", layout.seed}};
    return j.dump();
}

FrameLayout layout_from_json(std::string_view text)
{
    try {
        const auto j = nlohmann::json::parse(text);
        FrameLayout layout;
        layout.l_ts = j.at("l_ts").get<int>();
        layout.block = j.at("block").get<int>();
        layout.cp = j.at("cp").get<int>();
        layout.n_tx = j.at("n_tx").get<int>();
        layout.seed = j.at("seed").get<std::uint64_t>();
        return layout;
    } catch (const nlohmann::json::exception& e) {
        throw Error(ErrorKind::Config, std::string("frame layout: ") + e.what());
    }
}

Frame build_frame(std::span<const SymbolBlock> payloads, const TrainingConfig& cfg, int block, int cp)
{
    cfg.validate();
    if (static_cast<int>(payloads.size()) != cfg.num_tx)
        throw Error(ErrorKind::DimensionMismatch, "one payload per transmitter required");
    if (block < 1 || cp < 0 || cp > block)
        throw Error(ErrorKind::InvalidArgument, "block size and cyclic prefix must satisfy 0 <= cp <= block");

    const std::size_t n = payloads.front().symbols.size();
    for (const auto& p : payloads)
        if (p.symbols.size() != n)
            throw Error(ErrorKind::LengthMismatch, "payload lengths differ across transmitters");
    if (n % static_cast<std::size_t>(block) != 0)
        throw Error(ErrorKind::LengthMismatch, "payload length not divisible by block size");

    Frame frame;
    frame.layout = {cfg.length_per_tx, block, cp, cfg.num_tx, cfg.seed, static_cast<int>(n / block)};
    frame.order = payloads.front().order;
    frame.streams = generate_training(cfg).streams();

    for (int m = 0; m < cfg.num_tx; ++m) {
        auto& out = frame.streams[m];
        out.reserve(frame.layout.frame_length());
        const auto& sym = payloads[m].symbols;
        for (std::size_t b = 0; b < n; b += block) {
            const auto wrapped = add_cyclic_prefix(std::span(sym).subspan(b, block), cp);
            out.insert(out.end(), wrapped.begin(), wrapped.end());
        }
    }
    return frame;
}

ParsedFrame parse_frame(std::span<const std::vector<cplx>> received, const FrameLayout& layout)
{
    if (layout.l_ts < 1 || layout.block < 1 || layout.cp < 0 || layout.n_tx < 1)
        throw Error(ErrorKind::InvalidArgument, "invalid frame layout");
    if (received.empty())
        throw Error(ErrorKind::DimensionMismatch, "no receive streams");

    const std::size_t len = received.front().size();
    for (const auto& r : received)
        if (r.size() != len)
            throw Error(ErrorKind::LengthMismatch, "receive streams differ in length");

    const std::size_t train = layout.training_length();
    const std::size_t wrapped = static_cast<std::size_t>(layout.block + layout.cp);
    if (len < train || (len - train) % wrapped != 0)
        throw Error(ErrorKind::LengthMismatch, "received length does not match frame layout");

    ParsedFrame out;
    out.num_blocks = static_cast<int>((len - train) / wrapped);
    for (const auto& r : received) {
        Streams slots;
        for (int m = 0; m < layout.n_tx; ++m) {
            auto first = r.begin() + static_cast<std::ptrdiff_t>(m) * layout.l_ts;
            slots.emplace_back(first, first + layout.l_ts);
        }
        out.training.push_back(std::move(slots));

        std::vector<cplx> payload;
        payload.reserve(static_cast<std::size_t>(out.num_blocks) * layout.block);
        for (int b = 0; b < out.num_blocks; ++b) {
            const auto stripped = remove_cyclic_prefix(
                std::span(r).subspan(train + b * wrapped, wrapped), layout.block, layout.cp);
            payload.insert(payload.end(), stripped.begin(), stripped.end());
        }
        out.payload.push_back(std::move(payload));
    }
    return out;
}

} // namespace mimovlc
