#include "ergodyn/raster.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <ostream>
#include <stdexcept>
#include <string>

namespace ergodyn {

std::vector<ColorStop> default_colormap() {
    return {{0, 0, 255}, {0, 255, 255}, {0, 255, 0}, {255, 255, 0}, {255, 0, 0}};
}

RasterValues rasterize(const DiscreteMeasure& mu, const RasterSpec& spec) {
    if (mu.grid.n != 2) throw std::invalid_argument("rasterize: only n = 2 is supported");
    if (spec.width < 1 || spec.height < 1) throw std::invalid_argument("rasterize: bad size");
    std::vector<double> mass(static_cast<std::size_t>(spec.width) * spec.height, 0.0);
    for (const auto& [addr, weight] : mu.atoms) {
        TorusPoint p = embed(mu.grid, index_from_address(mu.grid, addr));
        auto col = static_cast<int>(std::floor(p.c[0] * spec.width));
        auto row = static_cast<int>(std::floor(p.c[1] * spec.height));
        if (col >= spec.width) col = spec.width - 1;
        if (row >= spec.height) row = spec.height - 1;
        mass[static_cast<std::size_t>(row) * spec.width + col] += weight;
    }
    RasterValues out{spec.width, spec.height, {}};
    out.v.resize(mass.size());
    for (std::size_t i = 0; i < mass.size(); ++i)
        out.v[i] = mass[i] > 0.0 ? std::log10(mass[i]) : kEmptyPixel;
    return out;
}

RgbImage colorize(const RasterValues& values, const RasterSpec& spec) {
    if (spec.colormap.size() < 2) throw std::invalid_argument("colormap needs >= 2 stops");
    double vmax = kEmptyPixel;
    for (double v : values.v) vmax = std::max(vmax, v);
    if (vmax == kEmptyPixel) vmax = 0.0;  // all-empty raster
    double vmin = vmax - spec.floor_decades;

    RgbImage img{values.width, values.height, {}, vmin, vmax};
    img.rgb.resize(values.v.size() * 3);
    const auto& stops = spec.colormap;
    for (std::size_t i = 0; i < values.v.size(); ++i) {
        double v = values.v[i];
        ColorStop c;
        if (v == kEmptyPixel) {
            c = stops.front();
        } else {
            double t = (v - vmin) / (vmax - vmin);
            t = std::clamp(t, 0.0, 1.0);
            double pos = t * static_cast<double>(stops.size() - 1);
            auto lo = static_cast<std::size_t>(pos);
            if (lo >= stops.size() - 1) lo = stops.size() - 2;
            double frac = pos - static_cast<double>(lo);
            auto lerp = [&](std::uint8_t a, std::uint8_t b) {
                return static_cast<std::uint8_t>(std::lround(a + frac * (b - a)));
            };
            c = {lerp(stops[lo].r, stops[lo + 1].r), lerp(stops[lo].g, stops[lo + 1].g),
                 lerp(stops[lo].b, stops[lo + 1].b)};
        }
        img.rgb[3 * i] = c.r;
        img.rgb[3 * i + 1] = c.g;
        img.rgb[3 * i + 2] = c.b;
    }
    return img;
}

void write_ppm(std::ostream& out, const RgbImage& image, const std::string& comment) {
    char buf[128];
    std::snprintf(buf, sizeof buf, "# scale log10 range [%.6f, %.6f], row 0 = bottom\n",
                  image.value_min, image.value_max);
    out << "P6\n" << buf;
    if (!comment.empty()) out << "# " << comment << "\n";
    out << image.width << " " << image.height << "\n255\n";
    // PPM stores top row first; our row 0 is the bottom.
    for (int row = image.height - 1; row >= 0; --row)
        out.write(reinterpret_cast<const char*>(image.rgb.data() +
                                                static_cast<std::size_t>(row) * image.width * 3),
                  static_cast<std::streamsize>(image.width) * 3);
}

void write_values_csv(std::ostream& out, const RasterValues& values) {
    out << "row,col,log10_mass\n";
    char buf[32];
    for (int row = 0; row < values.height; ++row)
        for (int col = 0; col < values.width; ++col) {
            double v = values.at(row, col);
            if (v == kEmptyPixel) continue;
            std::snprintf(buf, sizeof buf, "%.17g", v);
            out << row << "," << col << "," << buf << "\n";
        }
}

}  // namespace ergodyn
