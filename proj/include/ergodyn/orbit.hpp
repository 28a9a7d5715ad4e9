#pragma once

#include <cstdint>
#include <iosfwd>
#include <vector>

#include "ergodyn/grid.hpp"
#include "ergodyn/measure.hpp"

namespace ergodyn {

inline constexpr std::uint64_t kDefaultStepBudget = 10'000'000'000ull;

// Eventual periodic orbit of a single starting point: tail_length steps
// lead to cycle_points[0], then the cycle repeats.
struct OrbitResult {
    std::uint64_t tail_length;
    std::uint64_t cycle_length;
    std::vector<std::uint64_t> cycle_addrs;  // in successor order
};

OrbitResult floyd_orbit(const DiscretizedMap& map, const GridIndex& start,
                        std::uint64_t step_budget = kDefaultStepBudget);

struct CycleInfo {
    std::vector<std::uint64_t> points;  // successor order, starting at smallest address
    std::uint64_t basin_size;           // grid points whose forward orbit reaches the cycle
};

// Exact rational degree of recurrence: periodic points / N^n.
struct Rational {
    std::uint64_t num;
    std::uint64_t den;
    double value() const { return static_cast<double>(num) / static_cast<double>(den); }
};

// Full functional-graph decomposition: every cycle with its basin size.
// Cycles are ordered by smallest member address.
struct GridAnalysis {
    GridSpec grid;
    std::vector<CycleInfo> cycles;
    std::uint64_t periodic_points() const;
};

GridAnalysis analyze_full_grid(const DiscretizedMap& map,
                               std::uint64_t budget_bytes = kDefaultMemoryBudget);

// Uniform measure on the cycle (weight 1/cycle_length per point).
DiscreteMeasure orbit_measure(const OrbitResult& result, const GridSpec& grid);

// Cesaro limit of pushforwards of Leb_N: each point of a cycle of length c
// with basin size b carries weight b/(c*N^n).
DiscreteMeasure global_measure(const GridAnalysis& analysis);

Rational recurrence_degree(const GridAnalysis& analysis);

// CSV export: one row per cycle.
void write_analysis_csv(std::ostream& out, const GridAnalysis& analysis);

}  // namespace ergodyn
