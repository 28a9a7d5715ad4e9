#pragma once

#include <cstdint>
#include <string>
#include <variant>
#include <vector>

#include <json.hpp>

namespace ergodyn {

// Point of the n-torus, every coordinate in [0,1).
struct TorusPoint {
    std::vector<double> c;

    TorusPoint() = default;
    explicit TorusPoint(std::vector<double> coords);
    TorusPoint(double x, double y) : TorusPoint(std::vector<double>{x, y}) {}

    int dim() const { return static_cast<int>(c.size()); }
};

// Reduce to [0,1).  The clamp keeps the invariant even when floating
// rounding of x - floor(x) lands exactly on 1.
double mod1(double x);

enum class Phase { Cos, Sin };

struct ShearTerm {
    double amplitude;
    int frequency;  // positive
    Phase phase;
};

// One-coordinate shear (x_mod += p(x_read)) with p a trigonometric
// polynomial, 1-periodic by construction.
struct TrigShear {
    int axis_modified;
    int axis_read;
    std::vector<ShearTerm> terms;

    double poly(double t) const;
};

// Torus automorphism induced by an integer matrix with |det| = 1.
struct IntegerLinear {
    int n;
    std::vector<std::int64_t> m;  // row-major n*n

    std::int64_t at(int i, int j) const { return m[static_cast<std::size_t>(i) * n + j]; }
};

using MapStage = std::variant<TrigShear, IntegerLinear>;

// Composition of stages, applied left to right (stage 0 first).
struct TorusMapExpr {
    int dim = 2;
    std::vector<MapStage> stages;
};

void validate(const TorusMapExpr& map);

TorusPoint eval(const TorusMapExpr& map, const TorusPoint& x);

// The built-in maps: f1, f2, g1, g2, anosov.
TorusMapExpr builtin_map(const std::string& name);
bool is_builtin_map(const std::string& name);

nlohmann::json map_to_json(const TorusMapExpr& map);
TorusMapExpr map_from_json(const nlohmann::json& doc);

// Accepts a builtin name or a JSON map document.
TorusMapExpr resolve_map(const nlohmann::json& name_or_doc);

}  // namespace ergodyn
