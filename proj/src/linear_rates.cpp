#include "ergodyn/linear_rates.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdio>
#include <functional>
#include <ostream>
#include <random>
#include <stdexcept>

#include "ergodyn/errors.hpp"
#include "ergodyn/grid.hpp"  // project_scalar

namespace ergodyn {

Mat Mat::identity(int n) {
    Mat m(n, n);
    for (int i = 0; i < n; ++i) m.at(i, i) = 1.0;
    return m;
}

Mat mat_mul(const Mat& x, const Mat& y) {
    if (x.cols != y.rows) throw std::invalid_argument("mat_mul: shape mismatch");
    Mat out(x.rows, y.cols);
    for (int i = 0; i < x.rows; ++i)
        for (int l = 0; l < x.cols; ++l) {
            double v = x.at(i, l);
            if (v == 0.0) continue;
            for (int j = 0; j < y.cols; ++j) out.at(i, j) += v * y.at(l, j);
        }
    return out;
}

Mat mat_inverse(const Mat& m) {
    if (m.rows != m.cols) throw std::invalid_argument("mat_inverse: not square");
    int n = m.rows;
    Mat a = m;
    Mat inv = Mat::identity(n);
    for (int col = 0; col < n; ++col) {
        int pivot = col;
        for (int r = col + 1; r < n; ++r)
            if (std::abs(a.at(r, col)) > std::abs(a.at(pivot, col))) pivot = r;
        if (std::abs(a.at(pivot, col)) < 1e-14)
            throw std::invalid_argument("mat_inverse: singular matrix");
        if (pivot != col)
            for (int j = 0; j < n; ++j) {
                std::swap(a.at(pivot, j), a.at(col, j));
                std::swap(inv.at(pivot, j), inv.at(col, j));
            }
        double d = a.at(col, col);
        for (int j = 0; j < n; ++j) {
            a.at(col, j) /= d;
            inv.at(col, j) /= d;
        }
        for (int r = 0; r < n; ++r) {
            if (r == col) continue;
            double f = a.at(r, col);
            if (f == 0.0) continue;
            for (int j = 0; j < n; ++j) {
                a.at(r, j) -= f * a.at(col, j);
                inv.at(r, j) -= f * inv.at(col, j);
            }
        }
    }
    return inv;
}

double mat_det(const Mat& m) {
    if (m.rows != m.cols) throw std::invalid_argument("mat_det: not square");
    int n = m.rows;
    Mat a = m;
    double det = 1.0;
    for (int col = 0; col < n; ++col) {
        int pivot = col;
        for (int r = col + 1; r < n; ++r)
            if (std::abs(a.at(r, col)) > std::abs(a.at(pivot, col))) pivot = r;
        if (a.at(pivot, col) == 0.0) return 0.0;
        if (pivot != col) {
            for (int j = 0; j < n; ++j) std::swap(a.at(pivot, j), a.at(col, j));
            det = -det;
        }
        det *= a.at(col, col);
        for (int r = col + 1; r < n; ++r) {
            double f = a.at(r, col) / a.at(col, col);
            for (int j = col; j < n; ++j) a.at(r, j) -= f * a.at(col, j);
        }
    }
    return det;
}

double inf_norm(const Mat& m) {
    double best = 0.0;
    for (int i = 0; i < m.rows; ++i) {
        double s = 0.0;
        for (int j = 0; j < m.cols; ++j) s += std::abs(m.at(i, j));
        best = std::max(best, s);
    }
    return best;
}

std::vector<double> mat_apply(const Mat& m, std::span<const double> x) {
    if (static_cast<int>(x.size()) != m.cols) throw std::invalid_argument("mat_apply: size");
    std::vector<double> out(m.rows, 0.0);
    for (int i = 0; i < m.rows; ++i)
        for (int j = 0; j < m.cols; ++j) out[i] += m.at(i, j) * x[j];
    return out;
}

MatrixSequence MatrixSequence::prefix(int len) const {
    if (len < 1 || len > k()) throw std::invalid_argument("prefix length out of range");
    MatrixSequence p;
    p.n = n;
    p.mats.assign(mats.begin(), mats.begin() + len);
    if (!translations.empty())
        p.translations.assign(translations.begin(), translations.begin() + len);
    return p;
}

void validate(const MatrixSequence& seq) {
    if (seq.k() < 1) throw std::invalid_argument("matrix sequence must have k >= 1");
    for (const auto& m : seq.mats) {
        if (m.rows != seq.n || m.cols != seq.n)
            throw std::invalid_argument("matrix dimension mismatch");
        if (std::abs(mat_det(m) - 1.0) > 1e-9)
            throw std::invalid_argument("matrices must have determinant 1");
    }
    if (!seq.translations.empty()) {
        if (static_cast<int>(seq.translations.size()) != seq.k())
            throw std::invalid_argument("need one translation per stage");
        for (const auto& w : seq.translations) {
            if (static_cast<int>(w.size()) != seq.n)
                throw std::invalid_argument("translation dimension mismatch");
            for (double v : w)
                if (v < -0.5 || v > 0.5)
                    throw std::invalid_argument("translations must lie in [-1/2,1/2]^n");
        }
    }
}

MatrixSequence sequence_from_json(const nlohmann::json& doc) {
    MatrixSequence seq;
    seq.n = doc.at("dimension");
    for (const auto& rows : doc.at("matrices")) {
        Mat m(seq.n, seq.n);
        for (int i = 0; i < seq.n; ++i)
            for (int j = 0; j < seq.n; ++j) m.at(i, j) = rows.at(i).at(j);
        seq.mats.push_back(std::move(m));
    }
    if (doc.contains("translations"))
        for (const auto& w : doc.at("translations"))
            seq.translations.push_back(w.get<std::vector<double>>());
    validate(seq);
    return seq;
}

nlohmann::json sequence_to_json(const MatrixSequence& seq) {
    nlohmann::json mats = nlohmann::json::array();
    for (const auto& m : seq.mats) {
        nlohmann::json rows = nlohmann::json::array();
        for (int i = 0; i < seq.n; ++i) {
            nlohmann::json row = nlohmann::json::array();
            for (int j = 0; j < seq.n; ++j) row.push_back(m.at(i, j));
            rows.push_back(row);
        }
        mats.push_back(rows);
    }
    nlohmann::json doc{{"dimension", seq.n}, {"matrices", mats}};
    if (!seq.translations.empty()) doc["translations"] = seq.translations;
    return doc;
}

std::vector<std::int64_t> hat_apply(const Mat& A, std::span<const double> w,
                                    std::span<const std::int64_t> x) {
    if (static_cast<int>(x.size()) != A.cols) throw std::invalid_argument("hat_apply: size");
    std::vector<std::int64_t> out(A.rows);
    for (int i = 0; i < A.rows; ++i) {
        double acc = w.empty() ? 0.0 : w[i];
        for (int j = 0; j < A.cols; ++j) acc += A.at(i, j) * static_cast<double>(x[j]);
        out[i] = project_scalar(acc);
    }
    return out;
}

std::vector<std::int64_t> compose_discretized(const MatrixSequence& seq,
                                              std::span<const std::int64_t> x) {
    std::vector<std::int64_t> cur(x.begin(), x.end());
    static const std::vector<double> no_w;
    for (int i = 0; i < seq.k(); ++i) {
        std::span<const double> w =
            seq.translations.empty() ? std::span<const double>(no_w) : seq.translations[i];
        cur = hat_apply(seq.mats[i], w, cur);
    }
    return cur;
}

namespace {

// Point with up to 4 coordinates; enough for the supported dimensions.
using IPoint = std::array<std::int64_t, 4>;

// Dense bit set over the box [-r, r]^n.
class BoxBits {
public:
    BoxBits(int n, std::int64_t r, std::uint64_t budget_points) : n_(n), r_(r) {
        std::uint64_t side = static_cast<std::uint64_t>(2 * r + 1);
        std::uint64_t cells = 1;
        for (int d = 0; d < n; ++d) {
            if (cells > budget_points / side)
                throw capacity_error("enumeration box exceeds point budget");
            cells *= side;
        }
        cells_ = cells;
        words_.assign((cells + 63) / 64, 0);
    }

    std::int64_t radius() const { return r_; }
    std::uint64_t cells() const { return cells_; }

    bool inside(const std::int64_t* p) const {
        for (int d = 0; d < n_; ++d)
            if (p[d] < -r_ || p[d] > r_) return false;
        return true;
    }

    void set(const std::int64_t* p) {
        std::uint64_t addr = address(p);
        words_[addr >> 6] |= 1ull << (addr & 63);
    }

    template <class Fn>
    void for_each(Fn&& fn) const {
        for (std::uint64_t w = 0; w < words_.size(); ++w) {
            std::uint64_t word = words_[w];
            while (word) {
                int bit = std::countr_zero(word);
                word &= word - 1;
                IPoint p{};
                decode((w << 6) | static_cast<unsigned>(bit), p.data());
                fn(p);
            }
        }
    }

    std::uint64_t count_within(std::int64_t radius) const {
        std::uint64_t count = 0;
        for_each([&](const IPoint& p) {
            bool ok = true;
            for (int d = 0; d < n_; ++d)
                if (p[d] < -radius || p[d] > radius) ok = false;
            if (ok) ++count;
        });
        return count;
    }

private:
    std::uint64_t address(const std::int64_t* p) const {
        std::uint64_t side = static_cast<std::uint64_t>(2 * r_ + 1);
        std::uint64_t addr = 0;
        for (int d = 0; d < n_; ++d)
            addr = addr * side + static_cast<std::uint64_t>(p[d] + r_);
        return addr;
    }

    void decode(std::uint64_t addr, std::int64_t* p) const {
        std::uint64_t side = static_cast<std::uint64_t>(2 * r_ + 1);
        for (int d = n_ - 1; d >= 0; --d) {
            p[d] = static_cast<std::int64_t>(addr % side) - r_;
            addr /= side;
        }
    }

    int n_;
    std::int64_t r_;
    std::uint64_t cells_;
    std::vector<std::uint64_t> words_;
};

std::span<const double> stage_translation(const MatrixSequence& seq, int i) {
    static const std::vector<double> no_w;
    return seq.translations.empty() ? std::span<const double>(no_w)
                                    : std::span<const double>(seq.translations[i]);
}

// Enumerates every x in Z^n with |A x + w|_inf <= bound and feeds it to fn.
// Outer dimensions sweep the bounding box of A^{-1}(B_bound - w); the
// innermost dimension is cut to the exact interval given by the rows.
template <class Fn>
void enumerate_affine_preimage(const Mat& A, std::span<const double> w, double bound,
                               std::uint64_t budget_points, Fn&& fn) {
    const int n = A.rows;
    Mat inv = mat_inverse(A);
    std::vector<double> center(n, 0.0);
    if (!w.empty()) {
        auto neg = mat_apply(inv, w);
        for (int d = 0; d < n; ++d) center[d] = -neg[d];
    }
    std::vector<std::int64_t> lo(n), hi(n);
    std::uint64_t outer = 1;
    for (int d = 0; d < n; ++d) {
        double h = 0.0;
        for (int j = 0; j < n; ++j) h += std::abs(inv.at(d, j));
        h *= bound;
        lo[d] = static_cast<std::int64_t>(std::ceil(center[d] - h - 1e-9));
        hi[d] = static_cast<std::int64_t>(std::floor(center[d] + h + 1e-9));
        if (d < n - 1) {
            std::uint64_t span = static_cast<std::uint64_t>(hi[d] - lo[d] + 1);
            if (outer > budget_points / std::max<std::uint64_t>(span, 1))
                throw capacity_error("affine preimage box exceeds point budget");
            outer *= span;
        }
    }

    std::vector<std::int64_t> x(n);
    std::vector<double> partial(n);  // row sums over the fixed outer coordinates
    std::function<void(int)> sweep = [&](int d) {
        if (d == n - 1) {
            // Intersect the row intervals for the last coordinate.
            double blo = static_cast<double>(lo[d]), bhi = static_cast<double>(hi[d]);
            for (int row = 0; row < n; ++row) {
                double base = partial[row];
                double coef = A.at(row, d);
                if (coef == 0.0) {
                    if (std::abs(base) > bound + 1e-9) return;
                    continue;
                }
                double a = (-bound - base) / coef;
                double b = (bound - base) / coef;
                if (a > b) std::swap(a, b);
                blo = std::max(blo, a);
                bhi = std::min(bhi, b);
            }
            auto from = static_cast<std::int64_t>(std::ceil(blo - 1e-9));
            auto to = static_cast<std::int64_t>(std::floor(bhi + 1e-9));
            for (std::int64_t v = from; v <= to; ++v) {
                x[d] = v;
                fn(std::span<const std::int64_t>(x));
            }
            return;
        }
        for (std::int64_t v = lo[d]; v <= hi[d]; ++v) {
            x[d] = v;
            for (int row = 0; row < n; ++row)
                partial[row] += A.at(row, d) * static_cast<double>(v);
            sweep(d + 1);
            for (int row = 0; row < n; ++row)
                partial[row] -= A.at(row, d) * static_cast<double>(v);
        }
    };
    for (int row = 0; row < n; ++row) partial[row] = w.empty() ? 0.0 : w[row];
    sweep(0);
}

}  // namespace

RateEstimate rate_brute_force(const MatrixSequence& seq, std::int64_t R,
                              std::uint64_t budget_points) {
    validate(seq);
    if (R < 10) throw std::invalid_argument("rate_brute_force needs R >= 10");
    const int n = seq.n;
    const int k = seq.k();

    // Covering radii, chained backwards: a preimage of B_r under stage i
    // lies within |A_i x + w_i| <= r + 1/2.
    std::vector<std::int64_t> radii(k + 1);
    radii[k] = R;
    for (int i = k; i >= 1; --i) {
        double norm = inf_norm(mat_inverse(seq.mats[i - 1]));
        double r = norm * (static_cast<double>(radii[i]) + 1.0);
        if (r > 4e18) throw capacity_error("covering radius overflows");
        radii[i - 1] = static_cast<std::int64_t>(std::ceil(r));
    }

    BoxBits image(n, radii[1], budget_points);
    {
        const Mat& A = seq.mats[0];
        auto w = stage_translation(seq, 0);
        enumerate_affine_preimage(
            A, w, static_cast<double>(radii[1]) + 0.5, budget_points,
            [&](std::span<const std::int64_t> x) {
                auto y = hat_apply(A, w, x);
                if (image.inside(y.data())) image.set(y.data());
            });
    }
    for (int i = 1; i < k; ++i) {
        BoxBits next(n, radii[i + 1], budget_points);
        const Mat& A = seq.mats[i];
        auto w = stage_translation(seq, i);
        image.for_each([&](const IPoint& p) {
            auto y = hat_apply(A, w, std::span<const std::int64_t>(p.data(), n));
            if (next.inside(y.data())) next.set(y.data());
        });
        image = std::move(next);
    }

    auto ball_count = [n](std::int64_t r) {
        double c = 1.0;
        for (int d = 0; d < n; ++d) c *= static_cast<double>(2 * r + 1);
        return c;
    };
    double value = static_cast<double>(image.count_within(R)) / ball_count(R);
    double half = static_cast<double>(image.count_within(R / 2)) / ball_count(R / 2);
    return {value, RateEstimate::Method::BruteForce, static_cast<double>(R),
            std::abs(value - half)};
}

RateEstimate rate_forward(const MatrixSequence& seq, std::int64_t S,
                          std::uint64_t budget_points) {
    validate(seq);
    if (seq.n > 4) throw std::invalid_argument("rate_forward supports n <= 4");
    auto run = [&](std::int64_t radius) {
        std::uint64_t domain = 1;
        for (int d = 0; d < seq.n; ++d) {
            std::uint64_t side = static_cast<std::uint64_t>(2 * radius + 1);
            if (domain > budget_points / side)
                throw capacity_error("forward enumeration exceeds point budget");
            domain *= side;
        }
        std::vector<IPoint> cur;
        cur.reserve(domain);
        std::vector<std::int64_t> x(seq.n, -radius);
        for (;;) {
            IPoint p{};
            std::copy(x.begin(), x.end(), p.begin());
            cur.push_back(p);
            int d = seq.n - 1;
            while (d >= 0 && ++x[d] > radius) x[d--] = -radius;
            if (d < 0) break;
        }
        for (int i = 0; i < seq.k(); ++i) {
            const Mat& A = seq.mats[i];
            auto w = stage_translation(seq, i);
            for (auto& p : cur) {
                auto y = hat_apply(A, w, std::span<const std::int64_t>(p.data(), seq.n));
                std::copy(y.begin(), y.end(), p.begin());
            }
            std::sort(cur.begin(), cur.end());
            cur.erase(std::unique(cur.begin(), cur.end()), cur.end());
        }
        return static_cast<double>(cur.size()) / static_cast<double>(domain);
    };
    double value = run(S);
    double half = run(S / 2);
    return {value, RateEstimate::Method::BruteForce, static_cast<double>(S),
            std::abs(value - half)};
}

namespace {

LatticeBasis finish_basis(Mat basis, Mat inverse) {
    Mat prod = mat_mul(basis, inverse);
    for (int i = 0; i < prod.rows; ++i)
        for (int j = 0; j < prod.cols; ++j) {
            double expect = i == j ? 1.0 : 0.0;
            if (std::abs(prod.at(i, j) - expect) > 1e-9)
                throw std::invalid_argument("lattice basis inverse check failed");
        }
    return {basis.rows, std::move(basis), std::move(inverse)};
}

void place_block(Mat& target, int bi, int bj, const Mat& block, int n, double scale = 1.0) {
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) target.at(bi * n + i, bj * n + j) = scale * block.at(i, j);
}

}  // namespace

LatticeBasis build_M(const MatrixSequence& seq) {
    validate(seq);
    const int n = seq.n, k = seq.k();
    Mat basis(n * (k + 1), n * (k + 1));
    Mat id = Mat::identity(n);
    for (int i = 0; i < k; ++i) {
        place_block(basis, i, i, seq.mats[i], n);
        place_block(basis, i, i + 1, id, n, -1.0);
    }
    place_block(basis, k, k, id, n);
    return finish_basis(basis, mat_inverse(basis));
}

LatticeBasis build_M_tilde(const MatrixSequence& seq) {
    validate(seq);
    const int n = seq.n, k = seq.k();
    Mat basis(n * k, n * k);
    Mat id = Mat::identity(n);
    for (int i = 0; i < k; ++i) {
        place_block(basis, i, i, seq.mats[i], n);
        if (i + 1 < k) place_block(basis, i, i + 1, id, n, -1.0);
    }
    // Closed-form block inverse: block (i,j) = A_i^{-1} ... A_j^{-1}.
    std::vector<Mat> inv(k);
    for (int i = 0; i < k; ++i) inv[i] = mat_inverse(seq.mats[i]);
    Mat inverse(n * k, n * k);
    for (int i = 0; i < k; ++i) {
        Mat prod = inv[i];
        place_block(inverse, i, i, prod, n);
        for (int j = i + 1; j < k; ++j) {
            prod = mat_mul(prod, inv[j]);
            place_block(inverse, i, j, prod, n);
        }
    }
    return finish_basis(basis, std::move(inverse));
}

RateEstimate mean_rate_mc(const MatrixSequence& seq, std::uint64_t samples, std::uint64_t rng_seed,
                          std::uint64_t candidate_cap) {
    validate(seq);
    if (samples < 10'000) throw std::invalid_argument("mean_rate_mc needs >= 1e4 samples");
    const int n = seq.n, k = seq.k();
    std::vector<Mat> inv(k);
    std::vector<std::vector<double>> halfwidth(k, std::vector<double>(n, 0.0));
    for (int i = 0; i < k; ++i) {
        inv[i] = mat_inverse(seq.mats[i]);
        for (int d = 0; d < n; ++d)
            for (int j = 0; j < n; ++j) halfwidth[i][d] += 0.5 * std::abs(inv[i].at(d, j));
    }

    std::mt19937_64 rng(rng_seed);
    auto uniform01 = [&rng] { return static_cast<double>(rng() >> 11) * 0x1.0p-53; };

    std::vector<std::vector<double>> t(k, std::vector<double>(n));
    std::vector<std::vector<double>> u(k, std::vector<double>(n));
    std::vector<std::int64_t> z(n);
    std::uint64_t candidates = 0;

    // Coverage test for u in R^{nk}: does some lattice point M~ z land in
    // u - W?  Blocks are solved back to front; block i couples z_i with the
    // already-chosen z_{i+1}, so each level enumerates a small box around
    // A_i^{-1}(u_i + z_{i+1}).
    std::function<bool(int, const std::vector<std::int64_t>&)> solve =
        [&](int level, const std::vector<std::int64_t>& z_next) -> bool {
        std::vector<double> target(n);
        for (int d = 0; d < n; ++d)
            target[d] = u[level][d] + (level + 1 < k ? static_cast<double>(z_next[d]) : 0.0);
        auto center = mat_apply(inv[level], target);
        std::vector<std::int64_t> lo(n), hi(n), cand(n);
        for (int d = 0; d < n; ++d) {
            lo[d] = static_cast<std::int64_t>(std::ceil(center[d] - halfwidth[level][d] - 1e-9));
            hi[d] = static_cast<std::int64_t>(std::floor(center[d] + halfwidth[level][d] + 1e-9));
        }
        std::function<bool(int)> sweep = [&](int d) -> bool {
            if (d == n) {
                if (++candidates > candidate_cap)
                    throw capacity_error("mean_rate_mc candidate cap exceeded per sample");
                // Exact window test: u_level - A z + z_next in (-1/2,1/2]^n.
                for (int row = 0; row < n; ++row) {
                    double v = target[row];
                    for (int j = 0; j < n; ++j)
                        v -= seq.mats[level].at(row, j) * static_cast<double>(cand[j]);
                    if (!(v > -0.5 && v <= 0.5)) return false;
                }
                if (level == 0) return true;
                return solve(level - 1, cand);
            }
            for (std::int64_t v = lo[d]; v <= hi[d]; ++v) {
                cand[d] = v;
                if (sweep(d + 1)) return true;
            }
            return false;
        };
        return sweep(0);
    };

    std::uint64_t covered = 0, covered_first_half = 0;
    for (std::uint64_t s = 0; s < samples; ++s) {
        for (int i = 0; i < k; ++i)
            for (int d = 0; d < n; ++d) t[i][d] = uniform01();
        // u = M~ t, blockwise.
        for (int i = 0; i < k; ++i) {
            auto v = mat_apply(seq.mats[i], t[i]);
            for (int d = 0; d < n; ++d)
                u[i][d] = v[d] - (i + 1 < k ? t[i + 1][d] : 0.0);
        }
        candidates = 0;
        if (solve(k - 1, z)) {
            ++covered;
            if (s < samples / 2) ++covered_first_half;
        }
    }
    double value = static_cast<double>(covered) / static_cast<double>(samples);
    double first = static_cast<double>(covered_first_half) / static_cast<double>(samples / 2);
    double second = static_cast<double>(covered - covered_first_half) /
                    static_cast<double>(samples - samples / 2);
    return {value, RateEstimate::Method::MonteCarlo, static_cast<double>(samples),
            std::abs(first - second)};
}

std::vector<std::vector<std::int64_t>> preimage_search(const MatrixSequence& seq,
                                                       std::span<const std::int64_t> target,
                                                       std::int64_t R,
                                                       std::uint64_t budget_points) {
    validate(seq);
    if (static_cast<int>(target.size()) != seq.n)
        throw std::invalid_argument("preimage_search: target dimension mismatch");
    std::uint64_t total = 1;
    for (int d = 0; d < seq.n; ++d) {
        std::uint64_t side = static_cast<std::uint64_t>(2 * R + 1);
        if (total > budget_points / side)
            throw capacity_error("preimage enumeration exceeds point budget");
        total *= side;
    }
    std::vector<std::vector<std::int64_t>> found;
    std::vector<std::int64_t> x(seq.n, -R);
    for (;;) {
        auto y = compose_discretized(seq, x);
        if (std::equal(y.begin(), y.end(), target.begin(), target.end())) found.push_back(x);
        int d = seq.n - 1;
        while (d >= 0 && ++x[d] > R) x[d--] = -R;
        if (d < 0) break;
    }
    auto sup = [](const std::vector<std::int64_t>& v) {
        std::int64_t m = 0;
        for (auto c : v) m = std::max(m, std::abs(c));
        return m;
    };
    std::sort(found.begin(), found.end(),
              [&](const std::vector<std::int64_t>& a, const std::vector<std::int64_t>& b) {
                  std::int64_t sa = sup(a), sb = sup(b);
                  if (sa != sb) return sa > sb;
                  return a < b;
              });
    return found;
}

MatrixSequence random_sl_sequence(int n, int k, double norm_bound, std::uint64_t rng_seed) {
    if (n < 2) throw std::invalid_argument("random_sl_sequence needs n >= 2");
    if (norm_bound < 1.0) throw std::invalid_argument("norm bound must be >= 1");
    std::mt19937_64 rng(rng_seed);
    auto uniform01 = [&rng] { return static_cast<double>(rng() >> 11) * 0x1.0p-53; };

    MatrixSequence seq;
    seq.n = n;
    for (int stage = 0; stage < k; ++stage) {
        bool accepted = false;
        for (int attempt = 0; attempt < 100'000 && !accepted; ++attempt) {
            Mat m = Mat::identity(n);
            for (int s = 0; s < 3; ++s) {
                int i = static_cast<int>(rng() % static_cast<std::uint64_t>(n));
                int j = static_cast<int>(rng() % static_cast<std::uint64_t>(n - 1));
                if (j >= i) ++j;
                double amp = 4.0 * uniform01() - 2.0;
                Mat shear = Mat::identity(n);
                shear.at(i, j) = amp;
                m = mat_mul(m, shear);
            }
            if (inf_norm(m) <= norm_bound && inf_norm(mat_inverse(m)) <= norm_bound) {
                seq.mats.push_back(std::move(m));
                accepted = true;
            }
        }
        if (!accepted)
            throw std::invalid_argument("random_sl_sequence: rejection sampling failed");
    }
    return seq;
}

std::vector<DecayRow> decay_experiment(int n, int k_max, double norm_bound, int trials,
                                       std::uint64_t rng_seed, std::int64_t S) {
    if (k_max < 1 || trials < 1) throw std::invalid_argument("decay_experiment: bad parameters");
    // One incremental pass per trial: the image set after stage k is the
    // prefix-k image, so each stage yields one tau estimate.
    auto prefix_rates = [&](const MatrixSequence& seq, std::int64_t radius) {
        std::vector<IPoint> cur;
        std::uint64_t domain = 1;
        for (int d = 0; d < n; ++d) domain *= static_cast<std::uint64_t>(2 * radius + 1);
        cur.reserve(domain);
        std::vector<std::int64_t> x(n, -radius);
        for (;;) {
            IPoint p{};
            std::copy(x.begin(), x.end(), p.begin());
            cur.push_back(p);
            int d = n - 1;
            while (d >= 0 && ++x[d] > radius) x[d--] = -radius;
            if (d < 0) break;
        }
        std::vector<double> taus;
        for (int i = 0; i < seq.k(); ++i) {
            const Mat& A = seq.mats[i];
            auto w = stage_translation(seq, i);
            for (auto& p : cur) {
                auto y = hat_apply(A, w, std::span<const std::int64_t>(p.data(), n));
                std::copy(y.begin(), y.end(), p.begin());
            }
            std::sort(cur.begin(), cur.end());
            cur.erase(std::unique(cur.begin(), cur.end()), cur.end());
            taus.push_back(static_cast<double>(cur.size()) / static_cast<double>(domain));
        }
        return taus;
    };

    std::vector<DecayRow> rows;
    for (int trial = 0; trial < trials; ++trial) {
        std::uint64_t seed = rng_seed + static_cast<std::uint64_t>(trial);
        MatrixSequence seq = random_sl_sequence(n, k_max, norm_bound, seed);
        auto full = prefix_rates(seq, S);
        auto half = prefix_rates(seq, S / 2);
        for (int k = 1; k <= k_max; ++k)
            rows.push_back({trial, seed, k, full[k - 1], S,
                            std::abs(full[k - 1] - half[k - 1])});
    }
    return rows;
}

void write_decay_csv(std::ostream& out, const std::vector<DecayRow>& rows) {
    out << "trial,seed,k,tau_estimate,radius,convergence_gap\n";
    char buf[64];
    for (const auto& r : rows) {
        std::snprintf(buf, sizeof buf, "%.17g,%lld,%.17g", r.tau_estimate,
                      static_cast<long long>(r.radius), r.convergence_gap);
        out << r.trial << "," << r.seed << "," << r.k << "," << buf << "\n";
    }
}

}  // namespace ergodyn
