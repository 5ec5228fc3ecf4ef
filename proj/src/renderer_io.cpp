#include "docsynth/renderer_io.hpp"

#include <algorithm>
#include <fstream>
#include <set>
#include <stdexcept>

#include <json.hpp>

using json = nlohmann::ordered_json;

namespace docsynth {

RenderedPage compose_page(const Layout& layout, const ElementPool& pool) {
    RenderedPage page;
    page.layout = &layout;
    page.raster = ImageRGB(layout.page.width_px, layout.page.height_px, 255);
    for (const PlacedElement& e : layout.placed) {
        const ElementRecord* rec = pool.find(e.element_id);
        if (!rec)
            throw std::runtime_error("compose_page: element id " +
                                     std::to_string(e.element_id) + " not in pool");
        paste(page.raster, resize_area(rec->raster, e.w, e.h), e.x, e.y);
    }
    return page;
}

void export_coco(const std::vector<Layout>& layouts, const std::string& out_path) {
    std::set<std::string> category_names;
    for (const Layout& l : layouts)
        for (const PlacedElement& e : l.placed) category_names.insert(e.category);

    std::map<std::string, int> category_ids;
    json categories = json::array();
    int next_cat = 1;
    for (const std::string& name : category_names) {
        category_ids[name] = next_cat;
        categories.push_back({{"id", next_cat}, {"name", name}});
        ++next_cat;
    }

    json images = json::array();
    json annotations = json::array();
    int ann_id = 1;
    for (size_t i = 0; i < layouts.size(); ++i) {
        const Layout& l = layouts[i];
        char name[64];
        std::snprintf(name, sizeof(name), "page_%06zu.png", i);
        images.push_back({{"id", static_cast<int>(i) + 1},
                          {"file_name", name},
                          {"width", l.page.width_px},
                          {"height", l.page.height_px}});
        for (const PlacedElement& e : l.placed) {
            annotations.push_back({{"id", ann_id++},
                                   {"image_id", static_cast<int>(i) + 1},
                                   {"category_id", category_ids.at(e.category)},
                                   {"bbox", {e.x, e.y, e.w, e.h}},
                                   {"area", static_cast<int64_t>(e.w) * e.h},
                                   {"iscrowd", 0}});
        }
    }

    json doc;
    doc["images"] = std::move(images);
    doc["annotations"] = std::move(annotations);
    doc["categories"] = std::move(categories);

    std::ofstream out(out_path);
    if (!out) throw std::runtime_error("cannot write " + out_path);
    out << doc.dump(2) << "\n";
    if (!out) throw std::runtime_error("write failed: " + out_path);
}

namespace {

std::string category_color(const std::string& name) {
    uint32_t hash = 2166136261u;
    for (char c : name) hash = (hash ^ static_cast<uint8_t>(c)) * 16777619u;
    char buf[16];
    // keep channels mid-range so labels stay readable
    std::snprintf(buf, sizeof(buf), "#%02x%02x%02x", 64 + (hash & 0x7f),
                  64 + ((hash >> 8) & 0x7f), 64 + ((hash >> 16) & 0x7f));
    return buf;
}

} // namespace

void export_svg_debug(const Layout& layout, const std::vector<GridCell>* cells,
                      const std::string& out_path) {
    std::ofstream out(out_path);
    if (!out) throw std::runtime_error("cannot write " + out_path);

    out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << layout.page.width_px
        << "\" height=\"" << layout.page.height_px << "\">\n";
    out << "  <rect class=\"page\" x=\"0\" y=\"0\" width=\"" << layout.page.width_px
        << "\" height=\"" << layout.page.height_px << "\" fill=\"white\" stroke=\"#888\"/>\n";
    if (cells) {
        for (const GridCell& c : *cells)
            out << "  <rect class=\"cell\" x=\"" << c.x << "\" y=\"" << c.y << "\" width=\""
                << c.w << "\" height=\"" << c.h
                << "\" fill=\"none\" stroke=\"#999\" stroke-dasharray=\"4 3\"/>\n";
    }
    for (const PlacedElement& e : layout.placed) {
        const std::string color = category_color(e.category);
        out << "  <rect class=\"element\" x=\"" << e.x << "\" y=\"" << e.y << "\" width=\""
            << e.w << "\" height=\"" << e.h << "\" fill=\"" << color
            << "\" fill-opacity=\"0.35\" stroke=\"" << color << "\"/>\n";
        out << "  <text x=\"" << e.x + 4 << "\" y=\"" << e.y + 16 << "\" font-size=\"12\">"
            << e.category << "</text>\n";
    }
    out << "</svg>\n";
    if (!out) throw std::runtime_error("write failed: " + out_path);
}

} // namespace docsynth
