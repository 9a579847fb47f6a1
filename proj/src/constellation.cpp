#include "mimovlc/constellation.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace mimovlc {

namespace {

// Relative tolerance under which two candidate distances count as a tie.
constexpr double kTieTolerance = 1e-12;

unsigned gray(unsigned i) noexcept { return i ^ (i >> 1); }

} // namespace

bool is_supported_order(int order) noexcept
{
    return std::find(kQamOrders.begin(), kQamOrders.end(), order) != kQamOrders.end();
}

int order_index(int order)
{
    auto it = std::find(kQamOrders.begin(), kQamOrders.end(), order);
    if (it == kQamOrders.end())
        throw Error(ErrorKind::UnsupportedOrder, "unsupported QAM order " + std::to_string(order));
    return static_cast<int>(it - kQamOrders.begin());
}

Constellation Constellation::build(int order)
{
    order_index(order);

    Constellation c;
    c.order_ = order;
    c.bits_ = static_cast<int>(std::lround(std::log2(order)));
    c.axis_bits_ = c.bits_ / 2;
    c.side_ = 1 << c.axis_bits_;
    // Per-axis levels are odd multiples of scale; mean energy of the square
    // grid is 2 (M - 1) / 3 in those units.
    c.scale_ = 1.0 / std::sqrt(2.0 * (order - 1) / 3.0);

    c.gray_of_index_.resize(c.side_);
    std::vector<unsigned> index_of_gray(c.side_);
    for (int i = 0; i < c.side_; ++i) {
        c.gray_of_index_[i] = gray(static_cast<unsigned>(i));
        index_of_gray[c.gray_of_index_[i]] = static_cast<unsigned>(i);
    }

    auto level = [&](unsigned index) {
        return (c.side_ - 1 - 2.0 * index) * c.scale_;
    };

    c.points_.resize(order);
    const unsigned mask = (1u << c.axis_bits_) - 1u;
    for (unsigned label = 0; label < static_cast<unsigned>(order); ++label) {
        const unsigned gi = label >> c.axis_bits_;
        const unsigned gq = label & mask;
        c.points_[label] = cplx(level(index_of_gray[gi]), level(index_of_gray[gq]));
    }
    return c;
}

unsigned Constellation::slice_axis(double v) const noexcept
{
    // Continuous level index: 0 at the most positive level.
    const double u = ((side_ - 1) - v / scale_) / 2.0;
    if (u <= 0.0)
        return gray_of_index_.front();
    if (u >= side_ - 1)
        return gray_of_index_.back();

    const auto lo = static_cast<unsigned>(std::floor(u));
    const unsigned hi = lo + 1;
    const double d_lo = std::abs(v - (side_ - 1 - 2.0 * lo) * scale_);
    const double d_hi = std::abs(v - (side_ - 1 - 2.0 * hi) * scale_);
    if (std::abs(d_lo - d_hi) <= kTieTolerance * scale_)
        return std::min(gray_of_index_[lo], gray_of_index_[hi]);
    return d_lo < d_hi ? gray_of_index_[lo] : gray_of_index_[hi];
}

unsigned Constellation::nearest_label(cplx r) const noexcept
{
    // Square grid: the 2-D nearest point is the product of per-axis nearest
    // levels, and the label order is lexicographic in (I code, Q code).
    return (slice_axis(r.real()) << axis_bits_) | slice_axis(r.imag());
}

SymbolBlock map_bits(std::span<const std::uint8_t> bits, const Constellation& c)
{
    const auto k = static_cast<std::size_t>(c.bits_per_symbol());
    if (bits.size() % k != 0)
        throw Error(ErrorKind::LengthMismatch,
                    "bit count " + std::to_string(bits.size()) + " not divisible by "
                        + std::to_string(k));

    SymbolBlock out;
    out.order = c.order();
    out.symbols.reserve(bits.size() / k);
    for (std::size_t i = 0; i < bits.size(); i += k) {
        unsigned label = 0;
        for (std::size_t j = 0; j < k; ++j)
            label = (label << 1) | (bits[i + j] & 1u);
        out.symbols.push_back(c.point(label));
    }
    return out;
}

Bits demap_symbols(std::span<const cplx> received, const Constellation& c)
{
    const int k = c.bits_per_symbol();
    Bits bits;
    bits.reserve(received.size() * k);
    for (const cplx& r : received) {
        const unsigned label = c.nearest_label(r);
        for (int j = k - 1; j >= 0; --j)
            bits.push_back(static_cast<std::uint8_t>((label >> j) & 1u));
    }
    return bits;
}

double compute_evm(std::span<const cplx> received, std::span<const cplx> reference)
{
    if (reference.empty())
        throw Error(ErrorKind::InvalidArgument, "EVM of an empty reference");
    if (received.size() != reference.size())
        throw Error(ErrorKind::LengthMismatch, "EVM inputs differ in length");

    double err = 0.0;
    double ref = 0.0;
    for (std::size_t i = 0; i < reference.size(); ++i) {
        err += std::norm(received[i] - reference[i]);
        ref += std::norm(reference[i]);
    }
    if (ref == 0.0)
        throw Error(ErrorKind::InvalidArgument, "EVM reference has zero energy");
    return std::sqrt(err / ref);
}

} // namespace mimovlc
