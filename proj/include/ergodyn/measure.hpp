#pragma once

#include <cstdint>
#include <iosfwd>
#include <utility>
#include <vector>

#include "ergodyn/grid.hpp"

namespace ergodyn {

// Probability measure supported on finitely many grid points.  Atoms are
// kept sorted by flat address; all weights are positive and sum to 1.
struct DiscreteMeasure {
    GridSpec grid;
    std::vector<std::pair<std::uint64_t, double>> atoms;

    DiscreteMeasure(GridSpec g, std::vector<std::pair<std::uint64_t, double>> a);

    double total_mass() const;
};

DiscreteMeasure lebesgue(const GridSpec& g, std::uint64_t budget_bytes = kDefaultMemoryBudget);

DiscreteMeasure dirac(const GridSpec& g, const GridIndex& at);

// Masses of the half-open dyadic cubes at every level k <= K; level k holds
// 2^{nk} cubes in row-major order.
struct DyadicHistogram {
    int n;
    int K;
    std::vector<std::vector<double>> levels;
};

DyadicHistogram to_histogram(const DiscreteMeasure& mu, int K);

// Exact cube masses of Leb_N, computed by integer counting; avoids
// materializing the N^n atoms.
DyadicHistogram lebesgue_histogram(const GridSpec& g, int K);

// Truncated dyadic-cube distance: sum over k <= K of 2^{-k} times the total
// absolute cube-mass difference.  Pseudometric with values in [0,2].
double dyadic_distance(const DiscreteMeasure& mu, const DiscreteMeasure& nu, int K = 7);
double dyadic_distance(const DyadicHistogram& a, const DyadicHistogram& b);

// Distance of mu to Leb_N on mu's own grid.
double distance_to_lebesgue(const DiscreteMeasure& mu, int K = 7);

DiscreteMeasure pushforward(const DiscreteMeasure& mu, const DiscretizedMap& map);

double total_variation(const DiscreteMeasure& mu, const DiscreteMeasure& nu);

void write_measure_csv(std::ostream& out, const DiscreteMeasure& mu);
DiscreteMeasure read_measure_csv(std::istream& in, const GridSpec& g);
void write_histogram_csv(std::ostream& out, const DyadicHistogram& h);

}  // namespace ergodyn
