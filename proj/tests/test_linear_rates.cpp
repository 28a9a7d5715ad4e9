#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <map>
#include <sstream>

#include "ergodyn/errors.hpp"
#include "ergodyn/linear_rates.hpp"

using namespace ergodyn;

namespace {

Mat mat2(double a, double b, double c, double d) {
    Mat m(2, 2);
    m.at(0, 0) = a;
    m.at(0, 1) = b;
    m.at(1, 0) = c;
    m.at(1, 1) = d;
    return m;
}

MatrixSequence single(Mat m) {
    MatrixSequence seq;
    seq.n = m.rows;
    seq.mats.push_back(std::move(m));
    return seq;
}

}  // namespace

TEST_CASE("matrix utilities") {
    Mat a = mat2(2, 1, 1, 1);
    CHECK(mat_det(a) == doctest::Approx(1.0).epsilon(1e-14));
    CHECK(inf_norm(a) == 3.0);
    Mat inv = mat_inverse(a);
    CHECK(inv.at(0, 0) == doctest::Approx(1.0).epsilon(1e-14));
    CHECK(inv.at(0, 1) == doctest::Approx(-1.0).epsilon(1e-14));
    CHECK(inv.at(1, 0) == doctest::Approx(-1.0).epsilon(1e-14));
    CHECK(inv.at(1, 1) == doctest::Approx(2.0).epsilon(1e-14));
    Mat prod = mat_mul(a, inv);
    for (int i = 0; i < 2; ++i)
        for (int j = 0; j < 2; ++j)
            CHECK(prod.at(i, j) == doctest::Approx(i == j ? 1.0 : 0.0).epsilon(1e-14));
    double x[2] = {1.0, -2.0};
    auto y = mat_apply(a, x);
    CHECK(y[0] == 0.0);
    CHECK(y[1] == -1.0);
    CHECK_THROWS_AS(mat_inverse(mat2(1, 2, 2, 4)), std::invalid_argument);
    CHECK(mat_det(mat2(1, 2, 2, 4)) == 0.0);
}

TEST_CASE("hat_apply uses the half-open rounding convention") {
    Mat id = Mat::identity(2);
    std::vector<double> w{0.5, -0.5};
    std::vector<std::int64_t> x{0, 0};
    auto y = hat_apply(id, w, x);
    CHECK(y[0] == 0);   // 0.5 rounds down
    CHECK(y[1] == -1);  // -0.5 rounds down
    auto z = hat_apply(mat2(0.5, 0, 0, 2), {}, std::vector<std::int64_t>{3, 2});
    CHECK(z[0] == 1);  // 1.5 -> 1
    CHECK(z[1] == 4);
}

TEST_CASE("sequence validation and JSON round trip") {
    MatrixSequence seq;
    seq.n = 2;
    seq.mats.push_back(mat2(1, 0.75, 0, 1));
    seq.mats.push_back(mat2(1, 0, -0.5, 1));
    seq.translations = {{0.25, -0.25}, {0.0, 0.5}};
    validate(seq);
    MatrixSequence back = sequence_from_json(sequence_to_json(seq));
    CHECK(back.n == 2);
    REQUIRE(back.k() == 2);
    CHECK(back.mats[0].a == seq.mats[0].a);
    CHECK(back.mats[1].a == seq.mats[1].a);
    CHECK(back.translations == seq.translations);

    MatrixSequence det2 = single(mat2(2, 0, 0, 1));
    CHECK_THROWS_AS(validate(det2), std::invalid_argument);
    MatrixSequence badw = single(mat2(1, 0, 0, 1));
    badw.translations = {{0.6, 0.0}};
    CHECK_THROWS_AS(validate(badw), std::invalid_argument);
    MatrixSequence empty;
    empty.n = 2;
    CHECK_THROWS_AS(validate(empty), std::invalid_argument);

    MatrixSequence p = seq.prefix(1);
    CHECK(p.k() == 1);
    CHECK(p.translations.size() == 1);
    CHECK_THROWS_AS(seq.prefix(3), std::invalid_argument);
}

TEST_CASE("compose_discretized rounds stage by stage") {
    MatrixSequence seq;
    seq.n = 2;
    seq.mats.push_back(mat2(0.5, 0, 0, 2));
    seq.mats.push_back(mat2(1, 0, 0.5, 1));
    // (3,1) -> (round 1.5, 2) = (1,2) -> (1, round 2.5) = (1,2).
    auto y = compose_discretized(seq, std::vector<std::int64_t>{3, 1});
    CHECK(y[0] == 1);
    CHECK(y[1] == 2);
}

TEST_CASE("identity sequence has rate exactly one") {
    MatrixSequence seq = single(Mat::identity(2));
    RateEstimate est = rate_brute_force(seq, 20);
    CHECK(est.value == 1.0);
    CHECK(est.convergence_gap == 0.0);
    CHECK(est.method == RateEstimate::Method::BruteForce);
}

TEST_CASE("diag(1/2,2) has the exact finite-radius rate (R+1)/(2R+1)") {
    // Image of Z^2: every first coordinate, even second coordinates only.
    MatrixSequence seq = single(mat2(0.5, 0, 0, 2));
    RateEstimate est = rate_brute_force(seq, 100);
    CHECK(est.value == doctest::Approx(101.0 / 201.0).epsilon(1e-14));
    RateEstimate fwd = rate_forward(seq, 100);
    CHECK(fwd.value == doctest::Approx(101.0 / 201.0).epsilon(1e-14));
}

TEST_CASE("forward and preimage-covering estimators agree on random sequences") {
    for (std::uint64_t seed : {11ull, 12ull, 13ull}) {
        MatrixSequence seq = random_sl_sequence(2, 2, 3.0, seed);
        RateEstimate brute = rate_brute_force(seq, 120);
        RateEstimate fwd = rate_forward(seq, 240);
        CHECK(brute.value == doctest::Approx(fwd.value).epsilon(0.05));
    }
}

TEST_CASE("brute force honours the point budget") {
    MatrixSequence seq = single(mat2(0.5, 0, 0, 2));
    CHECK_THROWS_AS(rate_brute_force(seq, 5000, 1000), capacity_error);
    CHECK_THROWS_AS(rate_brute_force(seq, 5), std::invalid_argument);
}

TEST_CASE("lattice bases have unit determinant and the closed-form inverse") {
    MatrixSequence seq = random_sl_sequence(2, 3, 4.0, 21);
    LatticeBasis mt = build_M_tilde(seq);
    CHECK(mt.m == 6);
    CHECK(std::abs(mat_det(mt.basis)) == doctest::Approx(1.0).epsilon(1e-9));
    // Block (0,2) of the inverse is A_1^{-1} A_2^{-1} A_3^{-1}.
    Mat want = mat_mul(mat_mul(mat_inverse(seq.mats[0]), mat_inverse(seq.mats[1])),
                       mat_inverse(seq.mats[2]));
    for (int i = 0; i < 2; ++i)
        for (int j = 0; j < 2; ++j)
            CHECK(mt.inverse.at(i, 4 + j) == doctest::Approx(want.at(i, j)).epsilon(1e-9));

    LatticeBasis m = build_M(seq);
    CHECK(m.m == 8);
    CHECK(std::abs(mat_det(m.basis)) == doctest::Approx(1.0).epsilon(1e-9));
    // Last block row is the identity.
    for (int i = 0; i < 2; ++i)
        for (int j = 0; j < 8; ++j)
            CHECK(m.basis.at(6 + i, j) == (j == 6 + i ? 1.0 : 0.0));
}

TEST_CASE("mean rate of the identity is one and of diag(1/2,2) is one half") {
    RateEstimate id = mean_rate_mc(single(Mat::identity(2)), 10000, 31);
    CHECK(id.value == 1.0);
    CHECK(id.method == RateEstimate::Method::MonteCarlo);
    RateEstimate half = mean_rate_mc(single(mat2(0.5, 0, 0, 2)), 40000, 37);
    CHECK(half.value == doctest::Approx(0.5).epsilon(0.03));
    CHECK_THROWS_AS(mean_rate_mc(single(Mat::identity(2)), 100, 31), std::invalid_argument);
}

TEST_CASE("mean rate is deterministic in the seed") {
    MatrixSequence seq = random_sl_sequence(2, 2, 3.0, 41);
    RateEstimate a = mean_rate_mc(seq, 20000, 99);
    RateEstimate b = mean_rate_mc(seq, 20000, 99);
    CHECK(a.value == b.value);
    CHECK(a.convergence_gap == b.convergence_gap);
}

TEST_CASE("preimage search on diag(1/2,2) finds exactly (1,0) and (0,0)") {
    MatrixSequence seq = single(mat2(0.5, 0, 0, 2));
    auto pre = preimage_search(seq, std::vector<std::int64_t>{0, 0}, 3);
    REQUIRE(pre.size() == 2);
    // Sup norm descending, then lexicographic.
    CHECK(pre[0] == std::vector<std::int64_t>{1, 0});
    CHECK(pre[1] == std::vector<std::int64_t>{0, 0});
    CHECK_THROWS_AS(preimage_search(seq, std::vector<std::int64_t>{0}, 3), std::invalid_argument);
}

TEST_CASE("random SL sequences are deterministic, unimodular and norm bounded") {
    MatrixSequence a = random_sl_sequence(2, 5, 4.0, 77);
    MatrixSequence b = random_sl_sequence(2, 5, 4.0, 77);
    MatrixSequence c = random_sl_sequence(2, 5, 4.0, 78);
    REQUIRE(a.k() == 5);
    bool differs = false;
    for (int i = 0; i < 5; ++i) {
        CHECK(a.mats[i].a == b.mats[i].a);
        if (a.mats[i].a != c.mats[i].a) differs = true;
        CHECK(mat_det(a.mats[i]) == doctest::Approx(1.0).epsilon(1e-9));
        CHECK(inf_norm(a.mats[i]) <= 4.0);
        CHECK(inf_norm(mat_inverse(a.mats[i])) <= 4.0 + 1e-9);
    }
    CHECK(differs);

    MatrixSequence d3 = random_sl_sequence(3, 2, 5.0, 79);
    for (const auto& m : d3.mats) CHECK(mat_det(m) == doctest::Approx(1.0).epsilon(1e-9));
}

TEST_CASE("decay rows are monotone per trial and reproducible") {
    auto rows = decay_experiment(2, 4, 5.0, 3, 55, 60);
    auto again = decay_experiment(2, 4, 5.0, 3, 55, 60);
    REQUIRE(rows.size() == 12);
    for (std::size_t i = 0; i < rows.size(); ++i) {
        CHECK(rows[i].tau_estimate == again[i].tau_estimate);
        CHECK(rows[i].radius == 60);
        CHECK(rows[i].tau_estimate > 0.0);
        CHECK(rows[i].tau_estimate <= 1.0);
        if (rows[i].k > 1) CHECK(rows[i].tau_estimate <= rows[i - 1].tau_estimate);
    }
    std::ostringstream out;
    write_decay_csv(out, rows);
    std::istringstream in(out.str());
    std::string line;
    std::getline(in, line);
    CHECK(line == "trial,seed,k,tau_estimate,radius,convergence_gap");
    int count = 0;
    while (std::getline(in, line))
        if (!line.empty()) ++count;
    CHECK(count == 12);
}
