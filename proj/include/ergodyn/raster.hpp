#pragma once

#include <cstdint>
#include <iosfwd>
#include <limits>
#include <string>
#include <vector>

#include "ergodyn/measure.hpp"

namespace ergodyn {

struct ColorStop {
    std::uint8_t r, g, b;
};

// Default palette: blue -> cyan -> green -> yellow -> red, linear in value.
std::vector<ColorStop> default_colormap();

struct RasterSpec {
    int width = 128;
    int height = 128;
    std::vector<ColorStop> colormap = default_colormap();
    double floor_decades = 6.0;
};

inline constexpr double kEmptyPixel = -std::numeric_limits<double>::infinity();

// log10 pixel masses; pixel (col a, row b) covers
// [a/width,(a+1)/width) x [b/height,(b+1)/height), row 0 at the bottom.
// Zero-mass pixels hold kEmptyPixel.
struct RasterValues {
    int width, height;
    std::vector<double> v;  // v[row * width + col]

    double at(int row, int col) const { return v[static_cast<std::size_t>(row) * width + col]; }
};

RasterValues rasterize(const DiscreteMeasure& mu, const RasterSpec& spec);

struct RgbImage {
    int width, height;
    std::vector<std::uint8_t> rgb;  // 3 bytes per pixel, row 0 at the bottom
    double value_min, value_max;    // numeric range of the scale bar
};

// Linear colormap interpolation over [max - floor_decades, max]; empty
// pixels map to the lowest stop.
RgbImage colorize(const RasterValues& values, const RasterSpec& spec);

// Binary PPM, P6 maxval 255.  The header comment records the scale-bar
// range and that row 0 of the values grid is the bottom image row.
void write_ppm(std::ostream& out, const RgbImage& image, const std::string& comment = {});

// CSV rows (row, col, log10_mass); empty pixels omitted.
void write_values_csv(std::ostream& out, const RasterValues& values);

}  // namespace ergodyn
