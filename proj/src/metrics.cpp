#include "docsynth/metrics.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdio>
#include <limits>
#include <stdexcept>

#include <json.hpp>

using json = nlohmann::ordered_json;

namespace docsynth {

namespace {

constexpr double kDeltaCap = 1.0 - 1e-6;

double g(double delta) {
    return -std::log(1.0 - std::clamp(delta, 0.0, kDeltaCap));
}

} // namespace

MetricsReport align_score(const Layout& layout) {
    const size_t n = layout.placed.size();
    if (n == 0) throw std::runtime_error("align_score: empty layout");

    MetricsReport report;
    report.n_elements = static_cast<int>(n);
    if (n == 1) return report; // no j != i to compare against

    const double W = layout.page.width_px;
    const double H = layout.page.height_px;

    // six alignment channels per element, normalized per axis
    std::vector<std::array<double, 6>> ch(n);
    for (size_t i = 0; i < n; ++i) {
        const PlacedElement& e = layout.placed[i];
        ch[i] = {e.x / W, (e.x + e.w / 2.0) / W, (e.x + e.w) / W,
                 e.y / H, (e.y + e.h / 2.0) / H, (e.y + e.h) / H};
    }

    double sum = 0.0;
    for (size_t i = 0; i < n; ++i) {
        double best = std::numeric_limits<double>::infinity();
        for (int c = 0; c < 6; ++c) {
            double delta = std::numeric_limits<double>::infinity();
            for (size_t j = 0; j < n; ++j) {
                if (j == i) continue;
                delta = std::min(delta, std::abs(ch[i][c] - ch[j][c]));
            }
            best = std::min(best, g(delta));
        }
        sum += best;
    }
    report.align_sum = sum;
    report.align_mean = sum / static_cast<double>(n);
    return report;
}

double density_score(const Layout& layout) {
    double filled = 0.0;
    for (const PlacedElement& e : layout.placed)
        filled += static_cast<double>(e.w) * e.h;
    return filled / (static_cast<double>(layout.page.width_px) * layout.page.height_px);
}

double density_union_score(const Layout& layout) {
    // sweep over the coordinate grid the element edges induce
    std::vector<int> xs, ys;
    for (const PlacedElement& e : layout.placed) {
        xs.push_back(e.x);
        xs.push_back(e.x + e.w);
        ys.push_back(e.y);
        ys.push_back(e.y + e.h);
    }
    auto uniq = [](std::vector<int>& v) {
        std::sort(v.begin(), v.end());
        v.erase(std::unique(v.begin(), v.end()), v.end());
    };
    uniq(xs);
    uniq(ys);
    double covered = 0.0;
    for (size_t a = 0; a + 1 < xs.size(); ++a)
        for (size_t b = 0; b + 1 < ys.size(); ++b) {
            const double cx = 0.5 * (xs[a] + xs[a + 1]);
            const double cy = 0.5 * (ys[b] + ys[b + 1]);
            for (const PlacedElement& e : layout.placed)
                if (cx > e.x && cx < e.x + e.w && cy > e.y && cy < e.y + e.h) {
                    covered += static_cast<double>(xs[a + 1] - xs[a]) * (ys[b + 1] - ys[b]);
                    break;
                }
        }
    return covered / (static_cast<double>(layout.page.width_px) * layout.page.height_px);
}

ComparisonTable compare_methods(const std::map<std::string, std::vector<Layout>>& datasets) {
    if (datasets.empty()) throw std::runtime_error("compare_methods: no datasets");

    const PageSpec* page = nullptr;
    for (const auto& [name, layouts] : datasets) {
        if (layouts.empty())
            throw std::runtime_error("compare_methods: dataset '" + name + "' is empty");
        for (const Layout& l : layouts) {
            if (!page) page = &l.page;
            else if (!(l.page == *page))
                throw std::runtime_error("compare_methods: page specs differ across datasets");
        }
    }

    ComparisonTable table;
    table.baseline = datasets.count("random") ? "random" : datasets.begin()->first;

    for (const auto& [name, layouts] : datasets) {
        MethodSummary row;
        row.method = name;
        row.n_layouts = layouts.size();
        for (const Layout& l : layouts) {
            row.mean_align += align_score(l).align_mean;
            row.mean_density += density_score(l);
        }
        row.mean_align /= static_cast<double>(layouts.size());
        row.mean_density /= static_cast<double>(layouts.size());
        table.rows.push_back(std::move(row));
    }

    const MethodSummary* base = nullptr;
    for (const auto& row : table.rows)
        if (row.method == table.baseline) base = &row;
    for (auto& row : table.rows) {
        row.align_ratio = base->mean_align > 0.0 ? row.mean_align / base->mean_align : 1.0;
        row.density_ratio = base->mean_density > 0.0 ? row.mean_density / base->mean_density : 1.0;
    }
    return table;
}

std::string ComparisonTable::to_json() const {
    json j;
    j["baseline"] = baseline;
    j["methods"] = json::array();
    for (const auto& row : rows) {
        j["methods"].push_back({{"method", row.method},
                                {"n_layouts", row.n_layouts},
                                {"mean_align", row.mean_align},
                                {"mean_density", row.mean_density},
                                {"align_ratio", row.align_ratio},
                                {"density_ratio", row.density_ratio}});
    }
    return j.dump(2) + "\n";
}

std::string ComparisonTable::to_text() const {
    std::string out;
    char line[256];
    std::snprintf(line, sizeof(line), "%-12s %8s %12s %12s %12s %14s\n", "method", "layouts",
                  "align", "density", "align_ratio", "density_ratio");
    out += line;
    for (const auto& row : rows) {
        std::snprintf(line, sizeof(line), "%-12s %8zu %12.6f %12.4f %12.4f %14.4f\n",
                      row.method.c_str(), row.n_layouts, row.mean_align, row.mean_density,
                      row.align_ratio, row.density_ratio);
        out += line;
    }
    out += "baseline: " + baseline + "\n";
    return out;
}

} // namespace docsynth
