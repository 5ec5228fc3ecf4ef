#include "docsynth/element_pool.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <stdexcept>
#include <unordered_map>

#include <json.hpp>

#include "docsynth/rng.hpp"

namespace fs = std::filesystem;
using json = nlohmann::ordered_json;

namespace docsynth {

size_t ElementPool::total_count() const {
    size_t n = 0;
    for (const auto& [_, recs] : categories) n += recs.size();
    return n;
}

const ElementRecord* ElementPool::find(int64_t id) const {
    for (const auto& [_, recs] : categories)
        for (const auto& r : recs)
            if (r.id == id) return &r;
    return nullptr;
}

std::vector<const ElementRecord*> ElementPool::all_records() const {
    std::vector<const ElementRecord*> out;
    for (const auto& [_, recs] : categories)
        for (const auto& r : recs) out.push_back(&r);
    std::sort(out.begin(), out.end(),
              [](const ElementRecord* a, const ElementRecord* b) { return a->id < b->id; });
    return out;
}

ElementPool load_pool(const std::string& manifest_path, PoolLoadStats* stats) {
    std::ifstream in(manifest_path);
    if (!in) throw std::runtime_error("cannot open manifest: " + manifest_path);
    json doc;
    try {
        in >> doc;
    } catch (const json::exception& e) {
        throw std::runtime_error("invalid COCO JSON in " + manifest_path + ": " + e.what());
    }

    const fs::path base = fs::path(manifest_path).parent_path();

    std::unordered_map<int64_t, std::string> cat_names;
    for (const auto& c : doc.at("categories"))
        cat_names[c.at("id").get<int64_t>()] = c.at("name").get<std::string>();

    struct ImageEntry {
        std::string file;
        int width = 0, height = 0;
    };
    std::unordered_map<int64_t, ImageEntry> images;
    std::map<std::pair<int, int>, int> size_votes;
    for (const auto& im : doc.at("images")) {
        ImageEntry e;
        e.file = im.at("file_name").get<std::string>();
        e.width = im.at("width").get<int>();
        e.height = im.at("height").get<int>();
        images[im.at("id").get<int64_t>()] = e;
        size_votes[{e.width, e.height}]++;
    }

    ElementPool pool;
    if (!size_votes.empty()) {
        auto best = std::max_element(size_votes.begin(), size_votes.end(),
                                     [](auto& a, auto& b) { return a.second < b.second; });
        pool.page_spec_hint = PageSizeHint{best->first.first, best->first.second};
    }

    std::unordered_map<int64_t, ImageRGB> raster_cache;
    auto page_raster = [&](int64_t image_id) -> const ImageRGB& {
        auto it = raster_cache.find(image_id);
        if (it != raster_cache.end()) return it->second;
        const auto& entry = images.at(image_id);
        fs::path p = fs::path(entry.file);
        if (p.is_relative()) p = base / p;
        ImageRGB img = load_image(p.string());
        return raster_cache.emplace(image_id, std::move(img)).first->second;
    };

    PoolLoadStats local;
    int64_t next_id = 0;
    for (const auto& ann : doc.at("annotations")) {
        int64_t image_id = ann.at("image_id").get<int64_t>();
        auto img_it = images.find(image_id);
        if (img_it == images.end()) {
            local.skipped_out_of_bounds++;
            continue;
        }
        const auto& bbox = ann.at("bbox");
        int x = static_cast<int>(std::floor(bbox.at(0).get<double>()));
        int y = static_cast<int>(std::floor(bbox.at(1).get<double>()));
        int w = static_cast<int>(std::llround(bbox.at(2).get<double>()));
        int h = static_cast<int>(std::llround(bbox.at(3).get<double>()));
        if (x < 0 || y < 0 || w < 1 || h < 1 || x + w > img_it->second.width ||
            y + h > img_it->second.height) {
            local.skipped_out_of_bounds++;
            continue;
        }
        auto cat_it = cat_names.find(ann.at("category_id").get<int64_t>());
        if (cat_it == cat_names.end()) {
            local.skipped_out_of_bounds++;
            continue;
        }

        ElementRecord rec;
        rec.id = next_id++;
        rec.category = cat_it->second;
        rec.width_px = w;
        rec.height_px = h;
        rec.raster = crop(page_raster(image_id), x, y, w, h);
        rec.provenance.source_page = img_it->second.file;
        rec.provenance.bbox_x = x;
        rec.provenance.bbox_y = y;
        rec.provenance.bbox_w = w;
        rec.provenance.bbox_h = h;
        pool.categories[rec.category].push_back(std::move(rec));
        local.records++;
    }
    if (stats) *stats = local;
    if (local.records == 0)
        throw std::runtime_error("no usable records in manifest: " + manifest_path);
    return pool;
}

namespace {

void fill_rect(ImageRGB& img, int x0, int y0, int w, int h, uint8_t r, uint8_t g, uint8_t b) {
    int x1 = std::min(img.width, x0 + w), y1 = std::min(img.height, y0 + h);
    for (int y = std::max(0, y0); y < y1; ++y)
        for (int x = std::max(0, x0); x < x1; ++x) {
            uint8_t* p = img.at(x, y);
            p[0] = r;
            p[1] = g;
            p[2] = b;
        }
}

// Procedural raster styles cycled per category so categories look distinct.
ImageRGB draw_synthetic(int w, int h, int category, Rng& rng) {
    ImageRGB img(w, h, 250);
    uint8_t base_r = static_cast<uint8_t>(40 + (category * 53) % 160);
    uint8_t base_g = static_cast<uint8_t>(40 + (category * 97) % 160);
    uint8_t base_b = static_cast<uint8_t>(40 + (category * 31) % 160);
    switch (category % 3) {
    case 0: { // text-like: horizontal bars of varying length
        int line_h = std::max(2, h / 12);
        for (int y = line_h / 2; y + line_h / 2 < h; y += line_h * 2) {
            int len = static_cast<int>(rng.uniform_int(w / 2, w));
            fill_rect(img, 0, y, len, std::max(1, line_h / 2), base_r, base_g, base_b);
        }
        break;
    }
    case 1: { // table-like: grid of rules
        int cols = 3 + category % 3, rows = 3 + category % 4;
        for (int c = 0; c <= cols; ++c)
            fill_rect(img, c * (w - 1) / cols, 0, 1, h, 30, 30, 30);
        for (int r = 0; r <= rows; ++r)
            fill_rect(img, 0, r * (h - 1) / rows, w, 1, 30, 30, 30);
        break;
    }
    default: { // figure-like: frame plus random blocks
        fill_rect(img, 0, 0, w, h, base_r, base_g, base_b);
        fill_rect(img, 2, 2, std::max(1, w - 4), std::max(1, h - 4), 240, 240, 240);
        for (int i = 0; i < 4; ++i) {
            int bw = std::max(1, static_cast<int>(rng.uniform_int(w / 8, w / 3)));
            int bh = std::max(1, static_cast<int>(rng.uniform_int(h / 8, h / 3)));
            int bx = static_cast<int>(rng.uniform_int(0, std::max(0, w - bw)));
            int by = static_cast<int>(rng.uniform_int(0, std::max(0, h - bh)));
            fill_rect(img, bx, by, bw, bh, base_r, base_g, base_b);
        }
        break;
    }
    }
    return img;
}

const std::vector<SizeRange>& default_size_ranges() {
    static const std::vector<SizeRange> ranges = {
        {320, 560, 160, 300}, // large: figure/table scale
        {80, 170, 40, 80},    // medium: paragraph scale
        {20, 56, 12, 30},     // small: caption/label scale
    };
    return ranges;
}

} // namespace

ElementPool make_synthetic_pool(const SyntheticPoolSpec& spec) {
    if (spec.num_categories < 1 || spec.per_category < 1)
        throw std::runtime_error("synthetic pool: counts must be >= 1");
    const auto& ranges = spec.size_ranges.empty() ? default_size_ranges() : spec.size_ranges;
    for (const auto& r : ranges) {
        if (r.min_w < 1 || r.min_h < 1 || r.min_w > r.max_w || r.min_h > r.max_h)
            throw std::runtime_error("synthetic pool: bad size range");
        if (r.max_w > spec.page_width || r.max_h > spec.page_height)
            throw std::runtime_error("synthetic pool: size range exceeds page");
    }

    ElementPool pool;
    pool.page_spec_hint = PageSizeHint{spec.page_width, spec.page_height};
    int64_t next_id = 0;
    for (int c = 0; c < spec.num_categories; ++c) {
        const SizeRange& range = ranges[c % ranges.size()];
        char name[32];
        std::snprintf(name, sizeof(name), "synthetic_%02d", c);
        auto& recs = pool.categories[name];
        for (int i = 0; i < spec.per_category; ++i) {
            Rng rng(Rng::derive(spec.rng_seed, static_cast<uint64_t>(next_id)));
            ElementRecord rec;
            rec.id = next_id++;
            rec.category = name;
            rec.width_px = static_cast<int>(rng.uniform_int(range.min_w, range.max_w));
            rec.height_px = static_cast<int>(rng.uniform_int(range.min_h, range.max_h));
            rec.raster = draw_synthetic(rec.width_px, rec.height_px, c, rng);
            rec.provenance.source_page = "synthetic";
            recs.push_back(std::move(rec));
        }
    }
    return pool;
}

namespace {

json provenance_to_json(const Provenance& p) {
    json j;
    if (p.is_augmented()) {
        j["parent_id"] = p.parent_id;
        j["ops"] = p.ops;
        j["rng_seed"] = p.rng_seed;
    } else {
        j["source_page"] = p.source_page;
        j["bbox"] = {p.bbox_x, p.bbox_y, p.bbox_w, p.bbox_h};
    }
    return j;
}

Provenance provenance_from_json(const json& j) {
    Provenance p;
    if (j.contains("parent_id")) {
        p.parent_id = j.at("parent_id").get<int64_t>();
        p.ops = j.at("ops").get<std::vector<std::string>>();
        p.rng_seed = j.at("rng_seed").get<uint64_t>();
    } else {
        p.source_page = j.value("source_page", "");
        if (j.contains("bbox")) {
            p.bbox_x = j["bbox"].at(0).get<int>();
            p.bbox_y = j["bbox"].at(1).get<int>();
            p.bbox_w = j["bbox"].at(2).get<int>();
            p.bbox_h = j["bbox"].at(3).get<int>();
        }
    }
    return p;
}

std::string element_file_name(int64_t id) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%06lld.png", static_cast<long long>(id));
    return buf;
}

} // namespace

void save_pool(const ElementPool& pool, const std::string& dir) {
    fs::create_directories(fs::path(dir) / "elements");
    json index;
    if (pool.page_spec_hint)
        index["page_spec_hint"] = {{"width", pool.page_spec_hint->width_px},
                                   {"height", pool.page_spec_hint->height_px}};
    index["elements"] = json::array();
    for (const ElementRecord* rec : pool.all_records()) {
        std::string file = element_file_name(rec->id);
        save_png(rec->raster, (fs::path(dir) / "elements" / file).string());
        json j;
        j["id"] = rec->id;
        j["category"] = rec->category;
        j["width"] = rec->width_px;
        j["height"] = rec->height_px;
        j["file"] = "elements/" + file;
        j["provenance"] = provenance_to_json(rec->provenance);
        index["elements"].push_back(std::move(j));
    }
    std::ofstream out(fs::path(dir) / "pool.json");
    if (!out) throw std::runtime_error("cannot write pool index in " + dir);
    out << index.dump(2) << "\n";
}

ElementPool load_pool_dir(const std::string& dir) {
    std::ifstream in(fs::path(dir) / "pool.json");
    if (!in) throw std::runtime_error("cannot open pool index: " + dir + "/pool.json");
    json index;
    in >> index;

    ElementPool pool;
    if (index.contains("page_spec_hint"))
        pool.page_spec_hint = PageSizeHint{index["page_spec_hint"].at("width").get<int>(),
                                           index["page_spec_hint"].at("height").get<int>()};
    for (const auto& j : index.at("elements")) {
        ElementRecord rec;
        rec.id = j.at("id").get<int64_t>();
        rec.category = j.at("category").get<std::string>();
        rec.width_px = j.at("width").get<int>();
        rec.height_px = j.at("height").get<int>();
        rec.raster = load_image((fs::path(dir) / j.at("file").get<std::string>()).string());
        rec.provenance = provenance_from_json(j.at("provenance"));
        if (rec.raster.width != rec.width_px || rec.raster.height != rec.height_px)
            throw std::runtime_error("pool element " + std::to_string(rec.id) +
                                     ": raster size disagrees with index");
        pool.categories[rec.category].push_back(std::move(rec));
    }
    return pool;
}

} // namespace docsynth
