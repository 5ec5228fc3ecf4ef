#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace docsynth {

/// Page geometry. Defaults to A4 at 150 DPI with a small empty border.
struct PageSpec {
    int width_px = 1240;
    int height_px = 1754;
    int margin_px = 24;

    int interior_w() const { return width_px - 2 * margin_px; }
    int interior_h() const { return height_px - 2 * margin_px; }
    int64_t interior_area() const { return static_cast<int64_t>(interior_w()) * interior_h(); }

    void validate() const; // throws unless width, height > 2*margin

    bool operator==(const PageSpec&) const = default;
};

struct PlacedElement {
    int64_t element_id = 0;
    std::string category;
    int x = 0, y = 0; // top-left, px
    int w = 0, h = 0; // placed size, px
    double scale = 1.0;

    bool operator==(const PlacedElement&) const = default;
};

struct Layout {
    PageSpec page;
    std::vector<PlacedElement> placed;
    uint64_t seed = 0;
};

/// Axis-aligned empty rectangle derived from the meshgrid of a partial layout.
struct GridCell {
    int x = 0, y = 0, w = 0, h = 0;
    int64_t area() const { return static_cast<int64_t>(w) * h; }
    bool operator==(const GridCell&) const = default;
};

struct EngineConfig {
    int n_max = 15;                 // max elements per page
    double fr_thr = 1e-4;           // fill-rate stop threshold
    int mini_num = 5;               // max small elements per page
    double small_area_frac = 0.02;  // "small" = area below this fraction of the interior
    int candidate_set_size = 30;
    double scale_lo = 0.85; // central scaling range, shrink-only
    double scale_hi = 1.0;
    int gutter_px = 6; // spacing subtracted from each grid-cell side
    uint64_t seed = 0;

    void validate() const;
};

} // namespace docsynth
