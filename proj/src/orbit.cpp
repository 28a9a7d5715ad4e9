#include "ergodyn/orbit.hpp"

#include <algorithm>
#include <cstdio>
#include <ostream>
#include <stdexcept>

#include "ergodyn/errors.hpp"

namespace ergodyn {

OrbitResult floyd_orbit(const DiscretizedMap& map, const GridIndex& start,
                        std::uint64_t step_budget) {
    const std::uint64_t s0 = linear_address(map.grid(), start);
    std::uint64_t steps = 0;
    auto step = [&](std::uint64_t a) {
        if (++steps > step_budget) throw budget_error("floyd_orbit step budget exceeded", steps);
        return map.successor_addr(a);
    };

    // Phase 1: tortoise and hare meet inside the cycle.
    std::uint64_t tortoise = step(s0);
    std::uint64_t hare = step(tortoise);
    while (tortoise != hare) {
        tortoise = step(tortoise);
        hare = step(step(hare));
    }

    // Phase 2: tail length; restarting the tortoise from the start, both
    // pointers meet at the first cycle point.
    std::uint64_t tail = 0;
    tortoise = s0;
    while (tortoise != hare) {
        tortoise = step(tortoise);
        hare = step(hare);
        ++tail;
    }

    // Phase 3: one traversal collects the cycle.
    OrbitResult result;
    result.tail_length = tail;
    result.cycle_addrs.push_back(tortoise);
    for (std::uint64_t a = step(tortoise); a != tortoise; a = step(a))
        result.cycle_addrs.push_back(a);
    result.cycle_length = result.cycle_addrs.size();
    return result;
}

GridAnalysis analyze_full_grid(const DiscretizedMap& map, std::uint64_t budget_bytes) {
    DiscretizedMap work = map;
    work.materialize(budget_bytes);
    const auto& succ = work.table();
    const std::uint64_t M = work.grid().cell_count();

    // Iterative three-state labeling: each point's terminal cycle id is
    // memoized, so every point is walked O(1) times.
    constexpr std::uint64_t kUnvisited = ~0ull;
    constexpr std::uint64_t kOnPath = ~0ull - 1;
    if (M * sizeof(std::uint64_t) > budget_bytes)
        throw capacity_error("label table exceeds memory budget");
    std::vector<std::uint64_t> label(M, kUnvisited);
    std::vector<std::uint64_t> path;
    std::vector<std::vector<std::uint64_t>> cycles;

    for (std::uint64_t s = 0; s < M; ++s) {
        if (label[s] != kUnvisited) continue;
        path.clear();
        std::uint64_t u = s;
        while (label[u] == kUnvisited) {
            label[u] = kOnPath;
            path.push_back(u);
            u = succ[u];
        }
        std::uint64_t cycle_id;
        if (label[u] == kOnPath) {
            // New cycle: it is the path suffix starting at u.
            std::size_t pos = path.size();
            while (path[pos - 1] != u) --pos;
            --pos;
            cycle_id = cycles.size();
            cycles.emplace_back(path.begin() + static_cast<std::ptrdiff_t>(pos), path.end());
        } else {
            cycle_id = label[u];
        }
        for (std::uint64_t p : path) label[p] = cycle_id;
    }

    std::vector<std::uint64_t> basin(cycles.size(), 0);
    for (std::uint64_t p = 0; p < M; ++p) ++basin[label[p]];

    GridAnalysis analysis{work.grid(), {}};
    analysis.cycles.reserve(cycles.size());
    for (std::size_t c = 0; c < cycles.size(); ++c) {
        // Rotate so the cycle starts at its smallest member.
        auto& pts = cycles[c];
        auto min_it = std::min_element(pts.begin(), pts.end());
        std::rotate(pts.begin(), min_it, pts.end());
        analysis.cycles.push_back({std::move(pts), basin[c]});
    }
    std::sort(analysis.cycles.begin(), analysis.cycles.end(),
              [](const CycleInfo& a, const CycleInfo& b) { return a.points[0] < b.points[0]; });
    return analysis;
}

std::uint64_t GridAnalysis::periodic_points() const {
    std::uint64_t total = 0;
    for (const auto& c : cycles) total += c.points.size();
    return total;
}

DiscreteMeasure orbit_measure(const OrbitResult& result, const GridSpec& grid) {
    double w = 1.0 / static_cast<double>(result.cycle_length);
    std::vector<std::pair<std::uint64_t, double>> atoms;
    atoms.reserve(result.cycle_addrs.size());
    for (std::uint64_t a : result.cycle_addrs) atoms.emplace_back(a, w);
    return DiscreteMeasure(grid, std::move(atoms));
}

DiscreteMeasure global_measure(const GridAnalysis& analysis) {
    const double total = static_cast<double>(analysis.grid.cell_count());
    std::vector<std::pair<std::uint64_t, double>> atoms;
    atoms.reserve(analysis.periodic_points());
    for (const auto& cycle : analysis.cycles) {
        double w = static_cast<double>(cycle.basin_size) /
                   (static_cast<double>(cycle.points.size()) * total);
        for (std::uint64_t p : cycle.points) atoms.emplace_back(p, w);
    }
    return DiscreteMeasure(analysis.grid, std::move(atoms));
}

Rational recurrence_degree(const GridAnalysis& analysis) {
    return {analysis.periodic_points(), analysis.grid.cell_count()};
}

void write_analysis_csv(std::ostream& out, const GridAnalysis& analysis) {
    out << "cycle_id,cycle_length,basin_size,basin_fraction,representative_index\n";
    char buf[32];
    const double total = static_cast<double>(analysis.grid.cell_count());
    for (std::size_t c = 0; c < analysis.cycles.size(); ++c) {
        const auto& cyc = analysis.cycles[c];
        std::snprintf(buf, sizeof buf, "%.17g", static_cast<double>(cyc.basin_size) / total);
        GridIndex rep = index_from_address(analysis.grid, cyc.points[0]);
        out << c << "," << cyc.points.size() << "," << cyc.basin_size << "," << buf << ",\"(";
        for (int d = 0; d < analysis.grid.n; ++d)
            out << (d ? " " : "") << rep.idx[d];
        out << ")\"\n";
    }
}

}  // namespace ergodyn
