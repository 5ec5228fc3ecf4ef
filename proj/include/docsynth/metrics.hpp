#pragma once

#include <map>
#include <string>
#include <vector>

#include "docsynth/layout.hpp"

namespace docsynth {

struct MetricsReport {
    double align_sum = 0.0;  // per-layout alignment penalty
    double align_mean = 0.0; // align_sum / element count
    double density = 0.0;
    int n_elements = 0;
};

/// Alignment penalty: per element, the minimum over six channels (left,
/// x-center and right edges; top, y-center and bottom edges) of
/// g(delta) with g(x) = -log(1 - x); delta is the nearest-neighbour gap in
/// page-normalized coordinates, clamped to [0, 1 - 1e-6]. A single-element
/// layout scores 0. Lower means better aligned.
MetricsReport align_score(const Layout& layout);

/// Sum of element areas over the page area. Plain sum, so overlapping
/// layouts can exceed 1.
double density_score(const Layout& layout);

/// Same, but counting overlapped pixels once.
double density_union_score(const Layout& layout);

struct MethodSummary {
    std::string method;
    double mean_align = 0.0; // mean of per-layout align_mean
    double mean_density = 0.0;
    double align_ratio = 1.0; // vs baseline method
    double density_ratio = 1.0;
    size_t n_layouts = 0;
};

struct ComparisonTable {
    std::string baseline;
    std::vector<MethodSummary> rows;

    std::string to_json() const;
    std::string to_text() const; // aligned columns
};

/// Per-method means plus ratios against the baseline (the method named
/// "random" when present, otherwise the first by name). Throws when the
/// datasets disagree on the page spec or a dataset is empty.
ComparisonTable compare_methods(const std::map<std::string, std::vector<Layout>>& datasets);

} // namespace docsynth
