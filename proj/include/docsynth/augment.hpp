#pragma once

#include "docsynth/element_pool.hpp"
#include "docsynth/rng.hpp"

namespace docsynth {

struct AugmentConfig {
    int min_count = 100;
    double p_flip = 0.5;
    double p_bc = 0.5;
    double p_crop = 0.7;
    double p_edge = 0.2;
    double crop_area_lo = 0.5;
    double crop_area_hi = 0.9;
    double bc_delta = 0.2;      // brightness/contrast relative range
    double elastic_alpha = 8.0; // displacement magnitude, px
    double elastic_sigma = 4.0; // displacement smoothing, px
    double noise_std = 0.02;    // Gaussian std on [0,1] intensity

    void validate() const; // throws on out-of-range values
};

/// One pass of the augmentation pipeline (flip, brightness/contrast, crop,
/// edge extraction, elastic + noise, in that order). The returned record has
/// id -1; callers assign ids. Lineage records the applied ops and seed so the
/// raster can be replayed from the parent.
ElementRecord apply_augmentation(const ElementRecord& elem, const AugmentConfig& cfg,
                                 uint64_t seed);

/// Re-derives a record's raster from its parent using the recorded seed.
ImageRGB replay_lineage(const ElementRecord& parent, const Provenance& lineage,
                        const AugmentConfig& cfg);

struct AugmentStats {
    size_t added = 0;
    std::vector<std::string> empty_rare_categories; // warned, left empty
};

/// Pads every category below cfg.min_count with augmented copies of its own
/// originals until the count reaches min_count. Originals are untouched.
/// Per-record seeds derive from (master_seed, new record id), so results do
/// not depend on processing order.
ElementPool augment_rare_categories(const ElementPool& pool, const AugmentConfig& cfg,
                                    uint64_t master_seed, AugmentStats* stats = nullptr);

} // namespace docsynth
