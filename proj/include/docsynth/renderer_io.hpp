#pragma once

#include <string>
#include <vector>

#include "docsynth/element_pool.hpp"
#include "docsynth/layout.hpp"

namespace docsynth {

struct RenderedPage {
    ImageRGB raster;
    const Layout* layout = nullptr;
};

/// Composites a layout onto a white page: each element's raster is resized to
/// its placed size and pasted at its position, in placement order.
RenderedPage compose_page(const Layout& layout, const ElementPool& pool);

/// Writes a single COCO JSON (images / annotations / categories) covering all
/// layouts. Category ids follow the sorted category names; annotation ids are
/// sequential. Output bytes are deterministic.
void export_coco(const std::vector<Layout>& layouts, const std::string& out_path);

/// Debug SVG: category-colored element boxes with labels, plus optional
/// dashed meshgrid cells.
void export_svg_debug(const Layout& layout, const std::vector<GridCell>* cells,
                      const std::string& out_path);

} // namespace docsynth
