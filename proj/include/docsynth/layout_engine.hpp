#pragma once

#include <optional>

#include "docsynth/element_pool.hpp"
#include "docsynth/layout.hpp"
#include "docsynth/rng.hpp"

namespace docsynth {

/// Lightweight view of a pool element during layout search.
struct Candidate {
    int64_t id = 0;
    int w = 0, h = 0;
    std::string category;
    int64_t area() const { return static_cast<int64_t>(w) * h; }
    bool operator==(const Candidate&) const = default;
};

struct BestFitResult {
    Candidate candidate;
    GridCell cell;
    double fill_rate = 0.0;
};

/// Stratified sample over the pool's three area terciles, candidate_set_size
/// records total, no duplicates. Elements too large for the page interior are
/// excluded up front. If fewer elements than requested exist, all are
/// returned.
std::vector<Candidate> sample_candidate_set(const ElementPool& pool, const PageSpec& page,
                                            const EngineConfig& cfg, Rng& rng);

/// Places one candidate at a uniformly random valid position on an empty page.
Layout seed_layout(const PageSpec& page, const Candidate& candidate, Rng& rng);

/// All empty rectangles spanned by the grid lines that the page interior and
/// the placed element edges induce, each shrunk by gutter_px per side; a cell
/// is kept when it has positive area and overlaps no placed element.
std::vector<GridCell> build_meshgrid(const Layout& layout, const EngineConfig& cfg);

/// Candidate area over cell area, or nullopt when the candidate does not fit.
std::optional<double> fill_rate(const Candidate& candidate, const GridCell& cell);

/// Pair maximizing fill rate. Ties break toward the smaller cell, then the
/// lower candidate id, then the lexicographically smaller (x, y) cell
/// position.
std::optional<BestFitResult> best_fit_search(const std::vector<Candidate>& candidates,
                                             const std::vector<GridCell>& cells);

/// Inserts the candidate at the cell's top-left corner. Requires that the
/// candidate fits the cell.
void place(Layout& layout, const Candidate& candidate, const GridCell& cell);

/// Shrinks each element about its own center by an independent uniform factor
/// in [scale_lo, scale_hi].
void apply_central_scaling(Layout& layout, const EngineConfig& cfg, Rng& rng);

Layout generate_layout(const ElementPool& pool, const PageSpec& page, const EngineConfig& cfg,
                       uint64_t seed);

/// Baseline: same candidate sampling and element budget, uniform random
/// positions, overlaps permitted, no meshgrid and no central scaling.
Layout generate_random_layout(const ElementPool& pool, const PageSpec& page,
                              const EngineConfig& cfg, uint64_t seed);

enum class LayoutMethod { BestFit, Random };

/// Bulk driver. Per-layout seeds derive from (cfg.seed, index), so the output
/// is identical for any thread count.
std::vector<Layout> generate_dataset(const ElementPool& pool, const PageSpec& page,
                                     const EngineConfig& cfg, int count, LayoutMethod method,
                                     int threads = 1);

// layout JSON round-trip (stable key order, golden-file friendly)
std::string layout_to_json(const Layout& layout);
Layout layout_from_json(const std::string& text);

} // namespace docsynth
