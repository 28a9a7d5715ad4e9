#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

namespace ergodyn {

// Dense row-major real matrix; dimensions stay small (n or n*k).
struct Mat {
    int rows = 0, cols = 0;
    std::vector<double> a;

    Mat() = default;
    Mat(int r, int c) : rows(r), cols(c), a(static_cast<std::size_t>(r) * c, 0.0) {}
    static Mat identity(int n);

    double& at(int i, int j) { return a[static_cast<std::size_t>(i) * cols + j]; }
    double at(int i, int j) const { return a[static_cast<std::size_t>(i) * cols + j]; }
};

Mat mat_mul(const Mat& x, const Mat& y);
Mat mat_inverse(const Mat& m);  // Gauss-Jordan with partial pivoting
double mat_det(const Mat& m);
double inf_norm(const Mat& m);  // max row abs sum
std::vector<double> mat_apply(const Mat& m, std::span<const double> x);

// Finite sequence of determinant-one matrices A_1..A_k with optional
// translation vectors w_1..w_k in [-1/2,1/2]^n.
struct MatrixSequence {
    int n;
    std::vector<Mat> mats;
    std::vector<std::vector<double>> translations;  // empty, or one vector per stage

    int k() const { return static_cast<int>(mats.size()); }
    MatrixSequence prefix(int len) const;
};

void validate(const MatrixSequence& seq);

MatrixSequence sequence_from_json(const nlohmann::json& doc);
nlohmann::json sequence_to_json(const MatrixSequence& seq);

// Discretized affine map: componentwise round of A x + w, with the round
// convention k - 1/2 < x <= k + 1/2.
std::vector<std::int64_t> hat_apply(const Mat& A, std::span<const double> w,
                                    std::span<const std::int64_t> x);

std::vector<std::int64_t> compose_discretized(const MatrixSequence& seq,
                                              std::span<const std::int64_t> x);

struct RateEstimate {
    double value;
    enum class Method { BruteForce, MonteCarlo } method;
    double radius_or_samples;
    double convergence_gap;
};

// Finite-radius estimate of the rate of injectivity: the fraction of
// integer points of the sup-norm ball B_R lying in the image of the
// composed discretizations.  The enumeration covers the exact preimage
// region of each stage, so every image point in B_R is found.
RateEstimate rate_brute_force(const MatrixSequence& seq, std::int64_t R,
                              std::uint64_t budget_points = 40'000'000'000ull);

// Forward variant: fraction of distinct images of B_S.  Feasible at large
// prefix lengths where the preimage-covering enumeration is not.
RateEstimate rate_forward(const MatrixSequence& seq, std::int64_t S,
                          std::uint64_t budget_points = 2'000'000'000ull);

// Block matrices generating the lattices behind the model-set identity:
// A_i on the diagonal, -Id on the superdiagonal, and Id (for M, size
// n(k+1)) or A_k (for M~, size nk) in the last block.
struct LatticeBasis {
    int m;
    Mat basis;
    Mat inverse;
};

LatticeBasis build_M(const MatrixSequence& seq);
LatticeBasis build_M_tilde(const MatrixSequence& seq);

// Monte Carlo estimate of the density of W^k + Lambda~_k, the union of
// half-open unit cubes centred on the lattice points.  Equals the rate of
// injectivity for generic sequences.
RateEstimate mean_rate_mc(const MatrixSequence& seq, std::uint64_t samples, std::uint64_t rng_seed,
                          std::uint64_t candidate_cap = 1'000'000);

// All x in B_R with compose_discretized(seq, x) == target, sorted by
// sup-norm descending then lexicographically.
std::vector<std::vector<std::int64_t>> preimage_search(const MatrixSequence& seq,
                                                       std::span<const std::int64_t> target,
                                                       std::int64_t R,
                                                       std::uint64_t budget_points =
                                                           2'000'000'000ull);

// Products of random elementary shears (exactly determinant one),
// rejection-sampled until matrix and inverse sup norms are within bound.
MatrixSequence random_sl_sequence(int n, int k, double norm_bound, std::uint64_t rng_seed);

struct DecayRow {
    int trial;
    std::uint64_t seed;
    int k;
    double tau_estimate;
    std::int64_t radius;
    double convergence_gap;
};

// Rate estimates at every prefix length 1..k_max of `trials` random
// sequences, via the forward estimator.
std::vector<DecayRow> decay_experiment(int n, int k_max, double norm_bound, int trials,
                                       std::uint64_t rng_seed, std::int64_t S = 500);

void write_decay_csv(std::ostream& out, const std::vector<DecayRow>& rows);

}  // namespace ergodyn
