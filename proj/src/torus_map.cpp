#include "ergodyn/torus_map.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

namespace ergodyn {

namespace {

std::int64_t int_det(const std::vector<std::int64_t>& m, int n) {
    // Cofactor expansion; n is small (2 or 3 in practice).
    if (n == 1) return m[0];
    std::int64_t det = 0;
    std::int64_t sign = 1;
    for (int col = 0; col < n; ++col) {
        std::vector<std::int64_t> minor;
        minor.reserve(static_cast<std::size_t>(n - 1) * (n - 1));
        for (int i = 1; i < n; ++i)
            for (int j = 0; j < n; ++j)
                if (j != col) minor.push_back(m[static_cast<std::size_t>(i) * n + j]);
        det += sign * m[static_cast<std::size_t>(col)] * int_det(minor, n - 1);
        sign = -sign;
    }
    return det;
}

void validate_stage(const MapStage& stage, int dim) {
    if (const auto* s = std::get_if<TrigShear>(&stage)) {
        if (s->axis_modified == s->axis_read)
            throw std::invalid_argument("shear must read and modify distinct axes");
        if (s->axis_modified < 0 || s->axis_modified >= dim || s->axis_read < 0 ||
            s->axis_read >= dim)
            throw std::invalid_argument("shear axis out of range");
        for (const auto& t : s->terms)
            if (t.frequency <= 0) throw std::invalid_argument("shear frequency must be positive");
    } else {
        const auto& lin = std::get<IntegerLinear>(stage);
        if (lin.n != dim || lin.m.size() != static_cast<std::size_t>(dim) * dim)
            throw std::invalid_argument("linear stage dimension mismatch");
        std::int64_t d = int_det(lin.m, lin.n);
        if (d != 1 && d != -1)
            throw std::invalid_argument("linear stage must be unimodular (|det| = 1)");
    }
}

}  // namespace

TorusPoint::TorusPoint(std::vector<double> coords) : c(std::move(coords)) {
    if (c.empty()) throw std::invalid_argument("torus point needs dimension >= 1");
    for (double v : c)
        if (!(v >= 0.0 && v < 1.0)) throw std::invalid_argument("torus coordinate not in [0,1)");
}

double mod1(double x) {
    double r = x - std::floor(x);
    if (r >= 1.0) r = 0.0;
    return r;
}

double TrigShear::poly(double t) const {
    const double two_pi = 2.0 * std::numbers::pi;
    double acc = 0.0;
    for (const auto& term : terms) {
        double arg = two_pi * term.frequency * t;
        acc += term.amplitude * (term.phase == Phase::Cos ? std::cos(arg) : std::sin(arg));
    }
    return acc;
}

void validate(const TorusMapExpr& map) {
    if (map.dim < 1) throw std::invalid_argument("map dimension must be >= 1");
    for (const auto& stage : map.stages) validate_stage(stage, map.dim);
}

TorusPoint eval(const TorusMapExpr& map, const TorusPoint& x) {
    if (x.dim() != map.dim) throw std::invalid_argument("point/map dimension mismatch");
    TorusPoint y = x;
    for (const auto& stage : map.stages) {
        if (const auto* s = std::get_if<TrigShear>(&stage)) {
            y.c[s->axis_modified] = mod1(y.c[s->axis_modified] + s->poly(y.c[s->axis_read]));
        } else {
            const auto& lin = std::get<IntegerLinear>(stage);
            std::vector<double> out(lin.n);
            for (int i = 0; i < lin.n; ++i) {
                double acc = 0.0;
                for (int j = 0; j < lin.n; ++j) acc += static_cast<double>(lin.at(i, j)) * y.c[j];
                out[i] = mod1(acc);
            }
            y.c = std::move(out);
        }
    }
    return y;
}

namespace {

TrigShear shear(int modify, int read, std::vector<ShearTerm> terms) {
    return TrigShear{modify, read, std::move(terms)};
}

TorusMapExpr qp_composition(std::vector<ShearTerm> p_terms, std::vector<ShearTerm> q_terms) {
    // Q o P: the y-shear P applies first, then the x-shear Q.
    TorusMapExpr map;
    map.dim = 2;
    map.stages.push_back(shear(1, 0, std::move(p_terms)));
    map.stages.push_back(shear(0, 1, std::move(q_terms)));
    return map;
}

IntegerLinear anosov_matrix() { return IntegerLinear{2, {2, 1, 1, 1}}; }

}  // namespace

bool is_builtin_map(const std::string& name) {
    return name == "f1" || name == "f2" || name == "g1" || name == "g2" || name == "anosov" ||
           name == "identity";
}

TorusMapExpr builtin_map(const std::string& name) {
    if (name == "anosov") {
        TorusMapExpr map;
        map.dim = 2;
        map.stages.push_back(anosov_matrix());
        return map;
    }
    if (name == "identity") {
        TorusMapExpr map;
        map.dim = 2;
        return map;
    }
    if (name == "f1" || name == "f2") {
        TorusMapExpr map = qp_composition(
            {{1.0 / 209, 17, Phase::Cos}, {1.0 / 471, 29, Phase::Sin}, {-1.0 / 703, 39, Phase::Cos}},
            {{1.0 / 287, 15, Phase::Cos}, {1.0 / 403, 31, Phase::Sin}, {-1.0 / 841, 41, Phase::Sin}});
        if (name == "f2") map.stages.push_back(anosov_matrix());
        return map;
    }
    if (name == "g1" || name == "g2") {
        TorusMapExpr map = qp_composition(
            {{1.0 / 209, 17, Phase::Cos}, {1.0 / 271, 27, Phase::Sin}, {-1.0 / 703, 35, Phase::Cos}},
            {{1.0 / 287, 15, Phase::Cos}, {1.0 / 203, 27, Phase::Sin}, {-1.0 / 841, 38, Phase::Sin}});
        if (name == "g2") map.stages.push_back(anosov_matrix());
        return map;
    }
    throw std::invalid_argument("unknown builtin map: " + name);
}

nlohmann::json map_to_json(const TorusMapExpr& map) {
    nlohmann::json stages = nlohmann::json::array();
    for (const auto& stage : map.stages) {
        if (const auto* s = std::get_if<TrigShear>(&stage)) {
            nlohmann::json terms = nlohmann::json::array();
            for (const auto& t : s->terms)
                terms.push_back({{"a", t.amplitude},
                                 {"freq", t.frequency},
                                 {"phase", t.phase == Phase::Cos ? "cos" : "sin"}});
            stages.push_back({{"kind", "shear"},
                              {"modify", s->axis_modified},
                              {"read", s->axis_read},
                              {"terms", terms}});
        } else {
            const auto& lin = std::get<IntegerLinear>(stage);
            nlohmann::json rows = nlohmann::json::array();
            for (int i = 0; i < lin.n; ++i) {
                nlohmann::json row = nlohmann::json::array();
                for (int j = 0; j < lin.n; ++j) row.push_back(lin.at(i, j));
                rows.push_back(row);
            }
            stages.push_back({{"kind", "linear"}, {"matrix", rows}});
        }
    }
    return {{"dim", map.dim}, {"stages", stages}};
}

TorusMapExpr map_from_json(const nlohmann::json& doc) {
    TorusMapExpr map;
    map.dim = doc.value("dim", 2);
    for (const auto& stage : doc.at("stages")) {
        std::string kind = stage.at("kind");
        if (kind == "shear") {
            TrigShear s;
            s.axis_modified = stage.at("modify");
            s.axis_read = stage.at("read");
            for (const auto& t : stage.at("terms")) {
                std::string phase = t.at("phase");
                if (phase != "cos" && phase != "sin")
                    throw std::invalid_argument("shear phase must be cos or sin");
                s.terms.push_back(
                    {t.at("a"), t.at("freq"), phase == "cos" ? Phase::Cos : Phase::Sin});
            }
            map.stages.emplace_back(std::move(s));
        } else if (kind == "linear") {
            const auto& rows = stage.at("matrix");
            IntegerLinear lin;
            lin.n = static_cast<int>(rows.size());
            for (const auto& row : rows) {
                if (row.size() != rows.size())
                    throw std::invalid_argument("linear stage matrix must be square");
                for (const auto& v : row) lin.m.push_back(v.get<std::int64_t>());
            }
            map.stages.emplace_back(std::move(lin));
        } else {
            throw std::invalid_argument("unknown stage kind: " + kind);
        }
    }
    validate(map);
    return map;
}

TorusMapExpr resolve_map(const nlohmann::json& name_or_doc) {
    if (name_or_doc.is_string()) return builtin_map(name_or_doc.get<std::string>());
    return map_from_json(name_or_doc);
}

}  // namespace ergodyn
