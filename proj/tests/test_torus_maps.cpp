#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>

#include "ergodyn/torus_map.hpp"

using namespace ergodyn;

TEST_CASE("identity composition returns the input") {
    TorusMapExpr id;
    id.dim = 2;
    TorusPoint x(0.3, 0.7);
    TorusPoint y = eval(id, x);
    CHECK(y.c[0] == 0.3);
    CHECK(y.c[1] == 0.7);
}

TEST_CASE("anosov matrix acts by exact integer arithmetic mod 1") {
    TorusMapExpr a = builtin_map("anosov");
    TorusPoint y = eval(a, TorusPoint(0.2, 0.4));
    // (2*0.2+0.4, 0.2+0.4) mod 1 = (0.8, 0.6)
    CHECK(y.c[0] == doctest::Approx(0.8).epsilon(1e-15));
    CHECK(y.c[1] == doctest::Approx(0.6).epsilon(1e-15));

    // Exact rational check: x = (3/8, 5/8) -> (2*3/8+5/8, 3/8+5/8) = (11/8, 1) = (3/8, 0).
    TorusPoint z = eval(a, TorusPoint(0.375, 0.625));
    CHECK(z.c[0] == 0.375);
    CHECK(z.c[1] == 0.0);
}

TEST_CASE("f1 at the origin matches the high-precision reference") {
    TorusMapExpr f1 = builtin_map("f1");
    TorusPoint y = eval(f1, TorusPoint(0.0, 0.0));
    // Reference values from a 60-digit evaluation of the defining
    // trigonometric polynomials; y after the first shear is 1/209 - 1/703.
    CHECK(y.c[1] == doctest::Approx(0.003362213888529678).epsilon(1e-13));
    CHECK(y.c[0] == doctest::Approx(0.003916314783376803).epsilon(1e-13));
}

TEST_CASE("f1 at (1/2,1/2) matches the high-precision reference") {
    TorusMapExpr f1 = builtin_map("f1");
    TorusPoint y = eval(f1, TorusPoint(0.5, 0.5));
    CHECK(y.c[0] == doctest::Approx(0.4972946292633329).epsilon(1e-13));
    CHECK(y.c[1] == doctest::Approx(0.4966377861114703).epsilon(1e-13));
}

TEST_CASE("builtin structure") {
    TorusMapExpr f1 = builtin_map("f1");
    REQUIRE(f1.stages.size() == 2);
    const auto& p = std::get<TrigShear>(f1.stages[0]);
    CHECK(p.axis_modified == 1);
    CHECK(p.axis_read == 0);
    REQUIRE(p.terms.size() == 3);
    CHECK(p.terms[0].amplitude == 1.0 / 209);
    CHECK(p.terms[1].amplitude == 1.0 / 471);
    CHECK(p.terms[2].amplitude == -1.0 / 703);
    CHECK(p.terms[0].frequency == 17);
    CHECK(p.terms[1].frequency == 29);
    CHECK(p.terms[2].frequency == 39);
    const auto& q = std::get<TrigShear>(f1.stages[1]);
    CHECK(q.axis_modified == 0);
    CHECK(q.terms[0].amplitude == 1.0 / 287);
    CHECK(q.terms[1].amplitude == 1.0 / 403);
    CHECK(q.terms[2].amplitude == -1.0 / 841);

    TorusMapExpr f2 = builtin_map("f2");
    REQUIRE(f2.stages.size() == 3);
    const auto& a = std::get<IntegerLinear>(f2.stages[2]);
    CHECK(a.at(0, 0) == 2);
    CHECK(a.at(0, 1) == 1);
    CHECK(a.at(1, 0) == 1);
    CHECK(a.at(1, 1) == 1);

    // g2 = g1 followed by A.
    TorusMapExpr g1 = builtin_map("g1");
    TorusMapExpr g2 = builtin_map("g2");
    CHECK(g2.stages.size() == g1.stages.size() + 1);

    CHECK_THROWS_AS(builtin_map("nope"), std::invalid_argument);
}

TEST_CASE("shear stages leave unread coordinates untouched") {
    TorusMapExpr f1 = builtin_map("f1");
    std::mt19937_64 rng(7);
    auto u01 = [&rng] { return static_cast<double>(rng() >> 11) * 0x1.0p-53; };
    TorusMapExpr p_only;
    p_only.dim = 2;
    p_only.stages.push_back(f1.stages[0]);
    for (int i = 0; i < 1000; ++i) {
        TorusPoint x(u01(), u01());
        TorusPoint y = eval(p_only, x);
        CHECK(y.c[0] == x.c[0]);  // exactly
    }
}

TEST_CASE("shear stages invert to within an ulp or two") {
    TorusMapExpr f1 = builtin_map("f1");
    const auto& p = std::get<TrigShear>(f1.stages[0]);
    TrigShear p_inv = p;
    for (auto& t : p_inv.terms) t.amplitude = -t.amplitude;
    TorusMapExpr fwd, back;
    fwd.dim = back.dim = 2;
    fwd.stages.push_back(p);
    back.stages.push_back(p_inv);
    std::mt19937_64 rng(11);
    auto u01 = [&rng] { return static_cast<double>(rng() >> 11) * 0x1.0p-53; };
    for (int i = 0; i < 1000; ++i) {
        TorusPoint x(u01(), u01());
        TorusPoint y = eval(back, eval(fwd, x));
        double d = std::abs(y.c[1] - x.c[1]);
        d = std::min(d, 1.0 - d);  // torus metric
        CHECK(d <= 1e-15);
    }
}

TEST_CASE("f1 and g1 displace by less than 0.02 in sup norm") {
    std::mt19937_64 rng(13);
    auto u01 = [&rng] { return static_cast<double>(rng() >> 11) * 0x1.0p-53; };
    for (const char* name : {"f1", "g1"}) {
        TorusMapExpr map = builtin_map(name);
        for (int i = 0; i < 10000; ++i) {
            TorusPoint x(u01(), u01());
            TorusPoint y = eval(map, x);
            for (int d = 0; d < 2; ++d) {
                double diff = std::abs(y.c[d] - x.c[d]);
                diff = std::min(diff, 1.0 - diff);
                CHECK(diff < 0.02);
            }
        }
    }
}

TEST_CASE("map JSON round trip") {
    for (const char* name : {"f1", "f2", "g1", "g2", "anosov"}) {
        TorusMapExpr map = builtin_map(name);
        TorusMapExpr back = map_from_json(map_to_json(map));
        CHECK(back.stages.size() == map.stages.size());
        std::mt19937_64 rng(17);
        auto u01 = [&rng] { return static_cast<double>(rng() >> 11) * 0x1.0p-53; };
        for (int i = 0; i < 50; ++i) {
            TorusPoint x(u01(), u01());
            TorusPoint a = eval(map, x);
            TorusPoint b = eval(back, x);
            CHECK(a.c[0] == b.c[0]);
            CHECK(a.c[1] == b.c[1]);
        }
    }
    CHECK(resolve_map(nlohmann::json("anosov")).stages.size() == 1);
}

TEST_CASE("validation rejects bad specs") {
    TorusMapExpr bad;
    bad.dim = 2;
    bad.stages.push_back(IntegerLinear{2, {2, 0, 0, 1}});  // det 2
    CHECK_THROWS_AS(validate(bad), std::invalid_argument);

    TorusMapExpr bad2;
    bad2.dim = 2;
    bad2.stages.push_back(TrigShear{0, 0, {{0.1, 1, Phase::Cos}}});
    CHECK_THROWS_AS(validate(bad2), std::invalid_argument);

    CHECK_THROWS_AS(eval(builtin_map("f1"), TorusPoint(std::vector<double>{0.5})),
                    std::invalid_argument);
    CHECK_THROWS_AS(TorusPoint(1.0, 0.5), std::invalid_argument);
}
