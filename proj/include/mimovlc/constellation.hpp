#pragma once

#include <array>
#include <span>
#include <vector>

#include "mimovlc/common.hpp"

namespace mimovlc {

inline constexpr std::array<int, 4> kQamOrders{4, 16, 64, 256};

bool is_supported_order(int order) noexcept;

/// Index of `order` in kQamOrders; throws UnsupportedOrder otherwise.
int order_index(int order);

struct SymbolBlock {
    std::vector<cplx> symbols;
    int order = 0;
};

/// Gray-labelled square M-QAM with unit average symbol energy.
///
/// A label is log2(M) bits: the upper half selects the in-phase level, the
/// lower half the quadrature level. Each axis uses a reflected binary code
/// over its sqrt(M) levels, ordered from the most positive level down, so
/// label 0 is the upper-right corner point.
class Constellation {
public:
    static Constellation build(int order);

    int order() const noexcept { return order_; }
    int bits_per_symbol() const noexcept { return bits_; }
    int side() const noexcept { return side_; }

    /// Half the distance between adjacent levels on one axis.
    double scale() const noexcept { return scale_; }

    /// Points indexed by label.
    std::span<const cplx> points() const noexcept { return points_; }
    cplx point(unsigned label) const { return points_.at(label); }

    /// Label of the Euclidean-nearest point; equidistant candidates resolve
    /// to the numerically smallest label.
    unsigned nearest_label(cplx r) const noexcept;

private:
    Constellation() = default;

    unsigned slice_axis(double v) const noexcept;

    int order_ = 0;
    int bits_ = 0;
    int side_ = 0;
    int axis_bits_ = 0;
    double scale_ = 0.0;
    std::vector<cplx> points_;
    std::vector<unsigned> gray_of_index_;
};

inline Constellation build_constellation(int order) { return Constellation::build(order); }

SymbolBlock map_bits(std::span<const std::uint8_t> bits, const Constellation& c);

Bits demap_symbols(std::span<const cplx> received, const Constellation& c);

/// sqrt(mean|r - s|^2 / mean|s|^2).
double compute_evm(std::span<const cplx> received, std::span<const cplx> reference);

} // namespace mimovlc
