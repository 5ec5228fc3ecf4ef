#include "docsynth/augment.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace docsynth {

void AugmentConfig::validate() const {
    auto prob = [](double p) { return p >= 0.0 && p <= 1.0; };
    if (!prob(p_flip) || !prob(p_bc) || !prob(p_crop) || !prob(p_edge))
        throw std::runtime_error("augment config: probabilities must lie in [0,1]");
    if (crop_area_lo <= 0.0 || crop_area_hi > 1.0 || crop_area_lo > crop_area_hi)
        throw std::runtime_error("augment config: crop_area_range must be within (0,1], lo <= hi");
    if (min_count < 1) throw std::runtime_error("augment config: min_count must be >= 1");
}

namespace {

// Aspect-preserving crop window for a target area fraction. Rounding can push
// tiny rasters outside [lo,hi]; in that case the stage becomes a no-op.
struct CropWindow {
    int w = 0, h = 0;
    bool valid = false;
};

CropWindow crop_window(int w, int h, double frac, double lo, double hi) {
    double s = std::sqrt(frac);
    int cand_w[2] = {std::clamp(static_cast<int>(std::floor(w * s)), 1, w),
                     std::clamp(static_cast<int>(std::ceil(w * s)), 1, w)};
    int cand_h[2] = {std::clamp(static_cast<int>(std::floor(h * s)), 1, h),
                     std::clamp(static_cast<int>(std::ceil(h * s)), 1, h)};
    CropWindow best;
    double best_err = 1e9;
    for (int cw : cand_w)
        for (int ch : cand_h) {
            double f = static_cast<double>(cw) * ch / (static_cast<double>(w) * h);
            if (f < lo || f > hi) continue;
            double err = std::abs(f - frac);
            if (err < best_err) {
                best = {cw, ch, true};
                best_err = err;
            }
        }
    return best;
}

} // namespace

ElementRecord apply_augmentation(const ElementRecord& elem, const AugmentConfig& cfg,
                                 uint64_t seed) {
    cfg.validate();
    Rng rng(seed);
    ImageRGB img = elem.raster;
    std::vector<std::string> ops;

    if (rng.bernoulli(cfg.p_flip)) {
        if (rng.bernoulli(0.5)) {
            img = flip_horizontal(img);
            ops.push_back("flip_h");
        } else {
            img = flip_vertical(img);
            ops.push_back("flip_v");
        }
    }

    if (rng.bernoulli(cfg.p_bc)) {
        double brightness = rng.uniform(-cfg.bc_delta, cfg.bc_delta);
        double contrast = rng.uniform(1.0 - cfg.bc_delta, 1.0 + cfg.bc_delta);
        img = adjust_brightness_contrast(img, brightness, contrast);
        ops.push_back("brightness_contrast");
    }

    if (rng.bernoulli(cfg.p_crop)) {
        double frac = rng.uniform(cfg.crop_area_lo, cfg.crop_area_hi);
        CropWindow win = crop_window(img.width, img.height, frac, cfg.crop_area_lo,
                                     cfg.crop_area_hi);
        if (win.valid) {
            int x0 = static_cast<int>(rng.uniform_int(0, img.width - win.w));
            int y0 = static_cast<int>(rng.uniform_int(0, img.height - win.h));
            img = crop(img, x0, y0, win.w, win.h);
            ops.push_back("crop");
        }
    }

    if (rng.bernoulli(cfg.p_edge)) {
        img = sobel_edges(img);
        ops.push_back("edge");
    }

    if (cfg.elastic_alpha > 0.0 || cfg.noise_std > 0.0) {
        img = elastic_transform(img, cfg.elastic_alpha, cfg.elastic_sigma, rng);
        img = add_gaussian_noise(img, cfg.noise_std, rng);
        ops.push_back("elastic_noise");
    }

    ElementRecord out;
    out.id = -1;
    out.category = elem.category;
    out.width_px = img.width;
    out.height_px = img.height;
    out.raster = std::move(img);
    out.provenance.parent_id = elem.id;
    out.provenance.ops = std::move(ops);
    out.provenance.rng_seed = seed;
    return out;
}

ImageRGB replay_lineage(const ElementRecord& parent, const Provenance& lineage,
                        const AugmentConfig& cfg) {
    if (!lineage.is_augmented())
        throw std::runtime_error("replay_lineage: record carries no augmentation lineage");
    ElementRecord replayed = apply_augmentation(parent, cfg, lineage.rng_seed);
    if (replayed.provenance.ops != lineage.ops)
        throw std::runtime_error("replay_lineage: recorded op list does not replay");
    return replayed.raster;
}

ElementPool augment_rare_categories(const ElementPool& pool, const AugmentConfig& cfg,
                                    uint64_t master_seed, AugmentStats* stats) {
    cfg.validate();
    if (pool.categories.empty()) throw std::runtime_error("augment: empty pool");

    ElementPool out = pool;
    int64_t next_id = 0;
    for (const auto& [_, recs] : out.categories)
        for (const auto& r : recs) next_id = std::max(next_id, r.id + 1);

    AugmentStats local;
    for (auto& [name, recs] : out.categories) {
        if (recs.empty()) {
            local.empty_rare_categories.push_back(name);
            continue;
        }
        const size_t originals = recs.size();
        while (recs.size() < static_cast<size_t>(cfg.min_count)) {
            const ElementRecord& parent = recs[(recs.size() - originals) % originals];
            int64_t id = next_id++;
            ElementRecord rec =
                apply_augmentation(parent, cfg, Rng::derive(master_seed, static_cast<uint64_t>(id)));
            rec.id = id;
            recs.push_back(std::move(rec));
            local.added++;
        }
    }
    if (stats) *stats = local;
    return out;
}

} // namespace docsynth
