#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <vector>

#include "ergodyn/torus_map.hpp"

namespace ergodyn {

inline constexpr std::uint64_t kDefaultMemoryBudget = 2ull << 30;  // 2 GiB

// Uniform grid E_N on the n-torus: the N^n points (i_1/N, ..., i_n/N).
struct GridSpec {
    int n;
    std::uint32_t N;

    GridSpec(int n_, std::uint32_t N_);
    std::uint64_t cell_count() const { return cells_; }
    bool operator==(const GridSpec&) const = default;

private:
    std::uint64_t cells_;
};

// Integer grid coordinate, componentwise in [0, N-1].
struct GridIndex {
    std::vector<std::uint32_t> idx;

    GridIndex() = default;
    explicit GridIndex(std::vector<std::uint32_t> i) : idx(std::move(i)) {}
    GridIndex(std::uint32_t i, std::uint32_t j) : idx{i, j} {}
    bool operator==(const GridIndex&) const = default;
};

// The unique integer k with k - 1/2 < x <= k + 1/2.
std::int64_t project_scalar(double x);

// Nearest-grid-point projection, wrapping i = N to i = 0.
GridIndex grid_project(const GridSpec& g, const TorusPoint& x);

// Embeds an index back on the torus: i -> i/N.
TorusPoint embed(const GridSpec& g, const GridIndex& i);

// Row-major flat address: sum of idx[d] * N^(n-d-1).
std::uint64_t linear_address(const GridSpec& g, const GridIndex& i);
GridIndex index_from_address(const GridSpec& g, std::uint64_t addr);

// The finite self-map of E_N induced by rounding: successor(i) is the
// projection of the image of i/N.  Available lazily from a TorusMapExpr or
// materialized as a dense successor table.
class DiscretizedMap {
public:
    static DiscretizedMap lazy(TorusMapExpr map, GridSpec grid);
    static DiscretizedMap from_table(GridSpec grid, std::vector<std::uint64_t> successors);

    const GridSpec& grid() const { return grid_; }
    bool materialized() const { return !table_.empty(); }

    std::uint64_t successor_addr(std::uint64_t addr) const;
    GridIndex successor(const GridIndex& i) const;

    // One-pass construction of the dense table; rejects if the table would
    // exceed budget_bytes.
    void materialize(std::uint64_t budget_bytes = kDefaultMemoryBudget);
    const std::vector<std::uint64_t>& table() const;

    // Binary export: 16-byte header (magic "EGRD", version, n, N as LE
    // 32-bit values), then N^n LE 64-bit successor addresses, row-major.
    void write_binary(std::ostream& out) const;
    static DiscretizedMap read_binary(std::istream& in);

private:
    DiscretizedMap(GridSpec grid) : grid_(grid) {}
    GridSpec grid_;
    std::optional<TorusMapExpr> map_;
    std::vector<std::uint64_t> table_;
};

DiscretizedMap discretize(TorusMapExpr map, const GridSpec& g);

}  // namespace ergodyn
