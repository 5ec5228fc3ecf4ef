#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "docsynth/image.hpp"

namespace docsynth {

/// Where a record came from: either a seed-page crop or an augmentation of
/// another record (parent id + ordered op list + the rng seed used).
struct Provenance {
    // crop provenance
    std::string source_page;
    int bbox_x = 0, bbox_y = 0, bbox_w = 0, bbox_h = 0;
    // augmentation lineage (empty ops == original record)
    int64_t parent_id = -1;
    std::vector<std::string> ops;
    uint64_t rng_seed = 0;

    bool is_augmented() const { return parent_id >= 0; }
};

struct ElementRecord {
    int64_t id = 0;
    std::string category;
    int width_px = 0;
    int height_px = 0;
    ImageRGB raster;
    Provenance provenance;

    int64_t area() const { return static_cast<int64_t>(width_px) * height_px; }
};

struct PageSizeHint {
    int width_px = 0;
    int height_px = 0;
};

struct ElementPool {
    std::map<std::string, std::vector<ElementRecord>> categories;
    std::optional<PageSizeHint> page_spec_hint;

    size_t total_count() const;
    const ElementRecord* find(int64_t id) const;
    std::vector<const ElementRecord*> all_records() const; // id order
};

struct PoolLoadStats {
    size_t records = 0;
    size_t skipped_out_of_bounds = 0;
};

/// Builds a pool from a COCO-format manifest (images/annotations/categories).
/// Image paths resolve relative to the manifest's directory unless absolute.
ElementPool load_pool(const std::string& manifest_path, PoolLoadStats* stats = nullptr);

/// Size profile for one synthetic category.
struct SizeRange {
    int min_w = 1, max_w = 1;
    int min_h = 1, max_h = 1;
};

struct SyntheticPoolSpec {
    int num_categories = 12;
    int per_category = 25;
    // Cycled across categories. Empty selects the built-in mixed profile
    // (large / medium / small element classes).
    std::vector<SizeRange> size_ranges;
    uint64_t rng_seed = 0;
    int page_width = 1240;
    int page_height = 1754;
};

/// Deterministic self-contained test corpus: procedurally drawn text-like,
/// table-like and figure-like rasters, visually distinct per category.
ElementPool make_synthetic_pool(const SyntheticPoolSpec& spec);

// pool directory round-trip: pool.json index + per-element PNG crops
void save_pool(const ElementPool& pool, const std::string& dir);
ElementPool load_pool_dir(const std::string& dir);

} // namespace docsynth
