#include "ergodyn/measure.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <istream>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <string>

#include "ergodyn/errors.hpp"

namespace ergodyn {

DiscreteMeasure::DiscreteMeasure(GridSpec g, std::vector<std::pair<std::uint64_t, double>> a)
    : grid(g), atoms(std::move(a)) {
    std::sort(atoms.begin(), atoms.end());
    // Merge duplicate addresses.
    std::size_t w = 0;
    for (std::size_t r = 0; r < atoms.size(); ++r) {
        if (w > 0 && atoms[w - 1].first == atoms[r].first)
            atoms[w - 1].second += atoms[r].second;
        else
            atoms[w++] = atoms[r];
    }
    atoms.resize(w);
    for (const auto& [addr, weight] : atoms) {
        if (addr >= grid.cell_count()) throw std::invalid_argument("atom address out of range");
        if (!(weight > 0.0)) throw std::invalid_argument("atom weights must be positive");
    }
    if (std::abs(total_mass() - 1.0) > 1e-9)
        throw std::invalid_argument("measure mass must be 1");
}

double DiscreteMeasure::total_mass() const {
    // Kahan summation; atom counts can reach millions.
    double sum = 0.0, comp = 0.0;
    for (const auto& [addr, weight] : atoms) {
        double y = weight - comp;
        double t = sum + y;
        comp = (t - sum) - y;
        sum = t;
    }
    return sum;
}

DiscreteMeasure lebesgue(const GridSpec& g, std::uint64_t budget_bytes) {
    std::uint64_t bytes = g.cell_count() * sizeof(std::pair<std::uint64_t, double>);
    if (bytes > budget_bytes)
        throw capacity_error("lebesgue needs " + std::to_string(bytes) + " bytes, budget is " +
                             std::to_string(budget_bytes));
    double w = 1.0 / static_cast<double>(g.cell_count());
    std::vector<std::pair<std::uint64_t, double>> atoms;
    atoms.reserve(g.cell_count());
    for (std::uint64_t addr = 0; addr < g.cell_count(); ++addr) atoms.emplace_back(addr, w);
    return DiscreteMeasure(g, std::move(atoms));
}

DiscreteMeasure dirac(const GridSpec& g, const GridIndex& at) {
    return DiscreteMeasure(g, {{linear_address(g, at), 1.0}});
}

namespace {

std::uint64_t cube_address(const TorusPoint& p, int k) {
    std::uint64_t side = 1ull << k;
    std::uint64_t addr = 0;
    for (double c : p.c) {
        auto cell = static_cast<std::uint64_t>(std::floor(c * static_cast<double>(side)));
        if (cell >= side) cell = side - 1;  // guard against rounding up to 1
        addr = addr * side + cell;
    }
    return addr;
}

}  // namespace

DyadicHistogram to_histogram(const DiscreteMeasure& mu, int K) {
    if (K < 0) throw std::invalid_argument("histogram level must be >= 0");
    if (static_cast<std::uint64_t>(mu.grid.n) * K > 30)
        throw capacity_error("histogram level too deep for dimension " +
                             std::to_string(mu.grid.n));
    DyadicHistogram h;
    h.n = mu.grid.n;
    h.K = K;
    h.levels.resize(K + 1);
    h.levels[K].assign(1ull << (static_cast<std::uint64_t>(h.n) * K), 0.0);
    for (const auto& [addr, weight] : mu.atoms) {
        TorusPoint p = embed(mu.grid, index_from_address(mu.grid, addr));
        h.levels[K][cube_address(p, K)] += weight;
    }
    // Coarser levels refine exactly by summation over children.
    for (int k = K; k > 0; --k) {
        std::uint64_t child_side = 1ull << k;
        std::uint64_t parent_side = child_side >> 1;
        auto& parent = h.levels[k - 1];
        parent.assign(1ull << (static_cast<std::uint64_t>(h.n) * (k - 1)), 0.0);
        for (std::uint64_t child = 0; child < h.levels[k].size(); ++child) {
            double m = h.levels[k][child];
            if (m == 0.0) continue;
            std::uint64_t rem = child, paddr = 0, mul = 1;
            for (int d = 0; d < h.n; ++d) {
                std::uint64_t cell = rem % child_side;
                rem /= child_side;
                paddr += (cell >> 1) * mul;
                mul *= parent_side;
            }
            parent[paddr] += m;
        }
    }
    return h;
}

DyadicHistogram lebesgue_histogram(const GridSpec& g, int K) {
    if (K < 0) throw std::invalid_argument("histogram level must be >= 0");
    if (static_cast<std::uint64_t>(g.n) * K > 30)
        throw capacity_error("histogram level too deep for dimension " + std::to_string(g.n));
    DyadicHistogram h;
    h.n = g.n;
    h.K = K;
    h.levels.resize(K + 1);
    const double total = static_cast<double>(g.cell_count());
    for (int k = 0; k <= K; ++k) {
        std::uint64_t side = 1ull << k;
        // Points j/N in cube i per axis: j in [ceil(iN/2^k), ceil((i+1)N/2^k)).
        std::vector<std::uint64_t> axis(side);
        for (std::uint64_t i = 0; i < side; ++i) {
            auto lo = (i * g.N + side - 1) / side;
            auto hi = ((i + 1) * g.N + side - 1) / side;
            axis[i] = hi - lo;
        }
        auto& level = h.levels[k];
        level.assign(1ull << (static_cast<std::uint64_t>(g.n) * k), 0.0);
        for (std::uint64_t addr = 0; addr < level.size(); ++addr) {
            std::uint64_t rem = addr, count = 1;
            for (int d = 0; d < g.n; ++d) {
                count *= axis[rem % side];
                rem /= side;
            }
            level[addr] = static_cast<double>(count) / total;
        }
    }
    return h;
}

double dyadic_distance(const DyadicHistogram& a, const DyadicHistogram& b) {
    if (a.n != b.n || a.K != b.K) throw std::invalid_argument("histogram shape mismatch");
    double dist = 0.0;
    for (int k = 0; k <= a.K; ++k) {
        double level = 0.0;
        for (std::size_t c = 0; c < a.levels[k].size(); ++c)
            level += std::abs(a.levels[k][c] - b.levels[k][c]);
        dist += std::ldexp(level, -k);
    }
    return dist;
}

double dyadic_distance(const DiscreteMeasure& mu, const DiscreteMeasure& nu, int K) {
    if (mu.grid.n != nu.grid.n) throw std::invalid_argument("dyadic_distance: dimension mismatch");
    return dyadic_distance(to_histogram(mu, K), to_histogram(nu, K));
}

double distance_to_lebesgue(const DiscreteMeasure& mu, int K) {
    return dyadic_distance(to_histogram(mu, K), lebesgue_histogram(mu.grid, K));
}

DiscreteMeasure pushforward(const DiscreteMeasure& mu, const DiscretizedMap& map) {
    if (!(mu.grid == map.grid())) throw std::invalid_argument("pushforward: grid mismatch");
    std::vector<std::pair<std::uint64_t, double>> atoms;
    atoms.reserve(mu.atoms.size());
    for (const auto& [addr, weight] : mu.atoms)
        atoms.emplace_back(map.successor_addr(addr), weight);
    return DiscreteMeasure(mu.grid, std::move(atoms));
}

double total_variation(const DiscreteMeasure& mu, const DiscreteMeasure& nu) {
    if (!(mu.grid == nu.grid)) throw std::invalid_argument("total_variation: grid mismatch");
    double sum = 0.0;
    std::size_t i = 0, j = 0;
    while (i < mu.atoms.size() || j < nu.atoms.size()) {
        if (j >= nu.atoms.size() ||
            (i < mu.atoms.size() && mu.atoms[i].first < nu.atoms[j].first)) {
            sum += mu.atoms[i++].second;
        } else if (i >= mu.atoms.size() || nu.atoms[j].first < mu.atoms[i].first) {
            sum += nu.atoms[j++].second;
        } else {
            sum += std::abs(mu.atoms[i].second - nu.atoms[j].second);
            ++i;
            ++j;
        }
    }
    return 0.5 * sum;
}

void write_measure_csv(std::ostream& out, const DiscreteMeasure& mu) {
    for (int d = 0; d < mu.grid.n; ++d) out << "i" << d << ",";
    out << "weight\n";
    char buf[32];
    for (const auto& [addr, weight] : mu.atoms) {
        GridIndex i = index_from_address(mu.grid, addr);
        for (int d = 0; d < mu.grid.n; ++d) out << i.idx[d] << ",";
        std::snprintf(buf, sizeof buf, "%.17g", weight);
        out << buf << "\n";
    }
}

DiscreteMeasure read_measure_csv(std::istream& in, const GridSpec& g) {
    std::vector<std::pair<std::uint64_t, double>> atoms;
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty() || line[0] == '#' || line[0] == 'i') continue;
        std::istringstream ss(line);
        GridIndex idx;
        idx.idx.resize(g.n);
        char comma;
        for (int d = 0; d < g.n; ++d) {
            if (!(ss >> idx.idx[d] >> comma)) throw std::invalid_argument("bad measure CSV row");
        }
        double w;
        if (!(ss >> w)) throw std::invalid_argument("bad measure CSV row");
        atoms.emplace_back(linear_address(g, idx), w);
    }
    return DiscreteMeasure(g, std::move(atoms));
}

void write_histogram_csv(std::ostream& out, const DyadicHistogram& h) {
    out << "level";
    for (int d = 0; d < h.n; ++d) out << ",c" << d;
    out << ",mass\n";
    char buf[32];
    for (int k = 0; k <= h.K; ++k) {
        std::uint64_t side = 1ull << k;
        for (std::uint64_t addr = 0; addr < h.levels[k].size(); ++addr) {
            double m = h.levels[k][addr];
            if (m == 0.0) continue;
            std::vector<std::uint64_t> cells(h.n);
            std::uint64_t rem = addr;
            for (int d = h.n - 1; d >= 0; --d) {
                cells[d] = rem % side;
                rem /= side;
            }
            out << k;
            for (int d = 0; d < h.n; ++d) out << "," << cells[d];
            std::snprintf(buf, sizeof buf, "%.17g", m);
            out << "," << buf << "\n";
        }
    }
}

}  // namespace ergodyn
