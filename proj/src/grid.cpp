#include "ergodyn/grid.hpp"

#include <cmath>
#include <cstring>
#include <istream>
#include <limits>
#include <ostream>
#include <stdexcept>

#include "ergodyn/errors.hpp"

namespace ergodyn {

GridSpec::GridSpec(int n_, std::uint32_t N_) : n(n_), N(N_) {
    if (n < 1) throw std::invalid_argument("grid dimension must be >= 1");
    if (N < 1) throw std::invalid_argument("grid order must be >= 1");
    cells_ = 1;
    for (int d = 0; d < n; ++d) {
        if (cells_ > std::numeric_limits<std::uint64_t>::max() / N)
            throw std::invalid_argument("grid cell count overflows 64 bits");
        cells_ *= N;
    }
}

std::int64_t project_scalar(double x) {
    if (!std::isfinite(x)) throw std::invalid_argument("project_scalar: non-finite input");
    return static_cast<std::int64_t>(std::ceil(x - 0.5));
}

GridIndex grid_project(const GridSpec& g, const TorusPoint& x) {
    if (x.dim() != g.n) throw std::invalid_argument("grid_project: dimension mismatch");
    GridIndex out;
    out.idx.resize(g.n);
    for (int d = 0; d < g.n; ++d) {
        std::int64_t k = project_scalar(static_cast<double>(g.N) * x.c[d]) % g.N;
        if (k < 0) k += g.N;
        out.idx[d] = static_cast<std::uint32_t>(k);
    }
    return out;
}

TorusPoint embed(const GridSpec& g, const GridIndex& i) {
    std::vector<double> c(g.n);
    for (int d = 0; d < g.n; ++d) c[d] = static_cast<double>(i.idx[d]) / g.N;
    return TorusPoint(std::move(c));
}

std::uint64_t linear_address(const GridSpec& g, const GridIndex& i) {
    std::uint64_t addr = 0;
    for (int d = 0; d < g.n; ++d) addr = addr * g.N + i.idx[d];
    return addr;
}

GridIndex index_from_address(const GridSpec& g, std::uint64_t addr) {
    GridIndex i;
    i.idx.resize(g.n);
    for (int d = g.n - 1; d >= 0; --d) {
        i.idx[d] = static_cast<std::uint32_t>(addr % g.N);
        addr /= g.N;
    }
    return i;
}

DiscretizedMap DiscretizedMap::lazy(TorusMapExpr map, GridSpec grid) {
    validate(map);
    if (map.dim != grid.n) throw std::invalid_argument("discretize: dimension mismatch");
    DiscretizedMap d(grid);
    d.map_ = std::move(map);
    return d;
}

DiscretizedMap DiscretizedMap::from_table(GridSpec grid, std::vector<std::uint64_t> successors) {
    if (successors.size() != grid.cell_count())
        throw std::invalid_argument("successor table size does not match grid");
    for (std::uint64_t s : successors)
        if (s >= grid.cell_count()) throw std::invalid_argument("successor address out of range");
    DiscretizedMap d(grid);
    d.table_ = std::move(successors);
    return d;
}

std::uint64_t DiscretizedMap::successor_addr(std::uint64_t addr) const {
    if (addr >= grid_.cell_count()) throw std::invalid_argument("address out of range");
    if (!table_.empty()) return table_[addr];
    GridIndex i = index_from_address(grid_, addr);
    return linear_address(grid_, grid_project(grid_, eval(*map_, embed(grid_, i))));
}

GridIndex DiscretizedMap::successor(const GridIndex& i) const {
    for (int d = 0; d < grid_.n; ++d)
        if (i.idx[d] >= grid_.N) throw std::invalid_argument("grid index out of range");
    if (!table_.empty()) return index_from_address(grid_, table_[linear_address(grid_, i)]);
    return grid_project(grid_, eval(*map_, embed(grid_, i)));
}

void DiscretizedMap::materialize(std::uint64_t budget_bytes) {
    if (!table_.empty()) return;
    std::uint64_t bytes = grid_.cell_count() * sizeof(std::uint64_t);
    if (bytes > budget_bytes)
        throw capacity_error("materialization needs " + std::to_string(bytes) +
                             " bytes, budget is " + std::to_string(budget_bytes));
    std::vector<std::uint64_t> table(grid_.cell_count());
    for (std::uint64_t addr = 0; addr < grid_.cell_count(); ++addr) {
        GridIndex i = index_from_address(grid_, addr);
        table[addr] = linear_address(grid_, grid_project(grid_, eval(*map_, embed(grid_, i))));
    }
    table_ = std::move(table);
}

const std::vector<std::uint64_t>& DiscretizedMap::table() const {
    if (table_.empty()) throw std::logic_error("map is not materialized");
    return table_;
}

namespace {

void put_u32(std::ostream& out, std::uint32_t v) {
    unsigned char b[4] = {static_cast<unsigned char>(v), static_cast<unsigned char>(v >> 8),
                          static_cast<unsigned char>(v >> 16), static_cast<unsigned char>(v >> 24)};
    out.write(reinterpret_cast<const char*>(b), 4);
}

std::uint32_t get_u32(std::istream& in) {
    unsigned char b[4];
    in.read(reinterpret_cast<char*>(b), 4);
    return static_cast<std::uint32_t>(b[0]) | (static_cast<std::uint32_t>(b[1]) << 8) |
           (static_cast<std::uint32_t>(b[2]) << 16) | (static_cast<std::uint32_t>(b[3]) << 24);
}

}  // namespace

void DiscretizedMap::write_binary(std::ostream& out) const {
    const auto& t = table();
    out.write("EGRD", 4);
    put_u32(out, 1);
    put_u32(out, static_cast<std::uint32_t>(grid_.n));
    put_u32(out, grid_.N);
    for (std::uint64_t s : t) {
        unsigned char b[8];
        for (int i = 0; i < 8; ++i) b[i] = static_cast<unsigned char>(s >> (8 * i));
        out.write(reinterpret_cast<const char*>(b), 8);
    }
}

DiscretizedMap DiscretizedMap::read_binary(std::istream& in) {
    char magic[4];
    in.read(magic, 4);
    if (!in || std::memcmp(magic, "EGRD", 4) != 0)
        throw std::invalid_argument("bad successor-table magic");
    std::uint32_t version = get_u32(in);
    if (version != 1) throw std::invalid_argument("unsupported successor-table version");
    int n = static_cast<int>(get_u32(in));
    std::uint32_t N = get_u32(in);
    GridSpec g(n, N);
    std::vector<std::uint64_t> table(g.cell_count());
    for (auto& s : table) {
        unsigned char b[8];
        in.read(reinterpret_cast<char*>(b), 8);
        std::uint64_t v = 0;
        for (int i = 0; i < 8; ++i) v |= static_cast<std::uint64_t>(b[i]) << (8 * i);
        s = v;
    }
    if (!in) throw std::invalid_argument("truncated successor table");
    return from_table(g, std::move(table));
}

DiscretizedMap discretize(TorusMapExpr map, const GridSpec& g) {
    return DiscretizedMap::lazy(std::move(map), g);
}

}  // namespace ergodyn
