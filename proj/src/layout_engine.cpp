#include "docsynth/layout_engine.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <mutex>
#include <stdexcept>
#include <thread>

#include <json.hpp>

using json = nlohmann::ordered_json;

namespace docsynth {

void PageSpec::validate() const {
    if (width_px <= 2 * margin_px || height_px <= 2 * margin_px || margin_px < 0)
        throw std::runtime_error("page spec: width and height must exceed twice the margin");
}

void EngineConfig::validate() const {
    if (fr_thr <= 0.0 || fr_thr > 1.0)
        throw std::runtime_error("engine config: fr_thr must lie in (0,1]");
    if (scale_lo <= 0.0 || scale_hi > 1.0 || scale_lo > scale_hi)
        throw std::runtime_error("engine config: scale range must lie within (0,1], lo <= hi");
    if (n_max < 1) throw std::runtime_error("engine config: n_max must be >= 1");
    if (mini_num < 0 || candidate_set_size < 1 || gutter_px < 0)
        throw std::runtime_error("engine config: invalid value");
}

std::vector<Candidate> sample_candidate_set(const ElementPool& pool, const PageSpec& page,
                                            const EngineConfig& cfg, Rng& rng) {
    page.validate();
    cfg.validate();

    std::vector<Candidate> eligible;
    size_t oversized = 0;
    for (const ElementRecord* rec : pool.all_records()) {
        if (rec->width_px > page.interior_w() || rec->height_px > page.interior_h()) {
            ++oversized;
            continue;
        }
        eligible.push_back({rec->id, rec->width_px, rec->height_px, rec->category});
    }
    if (oversized > 0)
        std::fprintf(stderr, "warning: %zu pool elements exceed the page interior, excluded\n",
                     oversized);

    // area terciles
    std::sort(eligible.begin(), eligible.end(), [](const Candidate& a, const Candidate& b) {
        return a.area() != b.area() ? a.area() < b.area() : a.id < b.id;
    });

    const size_t want = static_cast<size_t>(cfg.candidate_set_size);
    if (eligible.size() <= want) {
        if (eligible.size() < want)
            std::fprintf(stderr, "warning: pool smaller than candidate set (%zu < %zu)\n",
                         eligible.size(), want);
        return eligible;
    }

    const size_t n = eligible.size();
    size_t bounds[4] = {0, n / 3 + (n % 3 > 0 ? 1 : 0), 0, n};
    bounds[2] = bounds[1] + n / 3 + (n % 3 > 1 ? 1 : 0);

    std::vector<std::vector<Candidate>> strata(3);
    for (int s = 0; s < 3; ++s)
        strata[s].assign(eligible.begin() + bounds[s], eligible.begin() + bounds[s + 1]);

    // split the request as evenly as possible, spilling into strata with spare
    size_t quota[3] = {0, 0, 0};
    size_t assigned = 0;
    for (int s = 0; s < 3; ++s) {
        quota[s] = std::min(strata[s].size(), want / 3 + (static_cast<size_t>(s) < want % 3 ? 1 : 0));
        assigned += quota[s];
    }
    while (assigned < want) {
        bool grew = false;
        for (int s = 0; s < 3 && assigned < want; ++s) {
            if (quota[s] < strata[s].size()) {
                ++quota[s];
                ++assigned;
                grew = true;
            }
        }
        if (!grew) break;
    }

    std::vector<Candidate> out;
    out.reserve(assigned);
    for (int s = 0; s < 3; ++s) {
        auto& stratum = strata[s];
        for (size_t k = 0; k < quota[s]; ++k) { // partial Fisher-Yates draw
            size_t j = k + static_cast<size_t>(rng.uniform_int(0, static_cast<int64_t>(stratum.size() - 1 - k)));
            std::swap(stratum[k], stratum[j]);
            out.push_back(stratum[k]);
        }
    }
    return out;
}

Layout seed_layout(const PageSpec& page, const Candidate& candidate, Rng& rng) {
    page.validate();
    if (candidate.w > page.interior_w() || candidate.h > page.interior_h())
        throw std::runtime_error("seed_layout: candidate larger than page interior");
    Layout layout;
    layout.page = page;
    PlacedElement pe;
    pe.element_id = candidate.id;
    pe.category = candidate.category;
    pe.w = candidate.w;
    pe.h = candidate.h;
    pe.x = page.margin_px +
           static_cast<int>(rng.uniform_int(0, page.interior_w() - candidate.w));
    pe.y = page.margin_px +
           static_cast<int>(rng.uniform_int(0, page.interior_h() - candidate.h));
    layout.placed.push_back(std::move(pe));
    return layout;
}

std::vector<GridCell> build_meshgrid(const Layout& layout, const EngineConfig& cfg) {
    if (layout.placed.empty())
        throw std::runtime_error("build_meshgrid: layout has no placed element");
    const PageSpec& page = layout.page;
    const int g = cfg.gutter_px;

    std::vector<int> xs = {page.margin_px, page.margin_px + page.interior_w()};
    std::vector<int> ys = {page.margin_px, page.margin_px + page.interior_h()};
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

    std::vector<GridCell> cells;
    std::vector<const PlacedElement*> x_hits;
    for (size_t a = 0; a + 1 < xs.size(); ++a) {
        for (size_t b = a + 1; b < xs.size(); ++b) {
            const int cx = xs[a] + g;
            const int cw = xs[b] - xs[a] - 2 * g;
            if (cw <= 0) continue;
            x_hits.clear();
            for (const PlacedElement& e : layout.placed)
                if (e.x < cx + cw && cx < e.x + e.w) x_hits.push_back(&e);
            for (size_t c = 0; c + 1 < ys.size(); ++c) {
                for (size_t d = c + 1; d < ys.size(); ++d) {
                    const int cy = ys[c] + g;
                    const int ch = ys[d] - ys[c] - 2 * g;
                    if (ch <= 0) continue;
                    bool overlaps = false;
                    for (const PlacedElement* e : x_hits)
                        if (e->y < cy + ch && cy < e->y + e->h) {
                            overlaps = true;
                            break;
                        }
                    if (!overlaps) cells.push_back({cx, cy, cw, ch});
                }
            }
        }
    }
    return cells;
}

std::optional<double> fill_rate(const Candidate& candidate, const GridCell& cell) {
    if (candidate.w > cell.w || candidate.h > cell.h) return std::nullopt;
    return static_cast<double>(candidate.area()) / static_cast<double>(cell.area());
}

std::optional<BestFitResult> best_fit_search(const std::vector<Candidate>& candidates,
                                             const std::vector<GridCell>& cells) {
    // Per cell, the best candidate is the largest that fits (lowest id on
    // area ties), so one pass over this order suffices.
    std::vector<const Candidate*> by_area;
    by_area.reserve(candidates.size());
    for (const Candidate& c : candidates) by_area.push_back(&c);
    std::sort(by_area.begin(), by_area.end(), [](const Candidate* a, const Candidate* b) {
        return a->area() != b->area() ? a->area() > b->area() : a->id < b->id;
    });

    std::optional<BestFitResult> best;
    for (const GridCell& cell : cells) {
        for (const Candidate* cand : by_area) {
            auto fr = fill_rate(*cand, cell);
            if (!fr) continue;
            if (!best || *fr > best->fill_rate ||
                (*fr == best->fill_rate &&
                 std::tuple(cell.area(), cand->id, cell.x, cell.y) <
                     std::tuple(best->cell.area(), best->candidate.id, best->cell.x,
                                best->cell.y))) {
                best = BestFitResult{*cand, cell, *fr};
            }
            break;
        }
    }
    return best;
}

void place(Layout& layout, const Candidate& candidate, const GridCell& cell) {
    if (!fill_rate(candidate, cell))
        throw std::runtime_error("place: candidate does not fit cell");
    PlacedElement pe;
    pe.element_id = candidate.id;
    pe.category = candidate.category;
    pe.x = cell.x;
    pe.y = cell.y;
    pe.w = candidate.w;
    pe.h = candidate.h;
    layout.placed.push_back(std::move(pe));
}

void apply_central_scaling(Layout& layout, const EngineConfig& cfg, Rng& rng) {
    for (PlacedElement& e : layout.placed) {
        const double s = rng.uniform(cfg.scale_lo, cfg.scale_hi);
        const int nw = std::max(1, static_cast<int>(std::llround(e.w * s)));
        const int nh = std::max(1, static_cast<int>(std::llround(e.h * s)));
        e.x += static_cast<int>(std::llround((e.w - nw) / 2.0));
        e.y += static_cast<int>(std::llround((e.h - nh) / 2.0));
        e.w = nw;
        e.h = nh;
        e.scale = s;
    }
}

namespace {

bool is_small(const Candidate& cand, const PageSpec& page, const EngineConfig& cfg) {
    return static_cast<double>(cand.area()) <
           cfg.small_area_frac * static_cast<double>(page.interior_area());
}

void erase_candidate(std::vector<Candidate>& candidates, int64_t id) {
    candidates.erase(std::remove_if(candidates.begin(), candidates.end(),
                                    [&](const Candidate& c) { return c.id == id; }),
                     candidates.end());
}

} // namespace

Layout generate_layout(const ElementPool& pool, const PageSpec& page, const EngineConfig& cfg,
                       uint64_t seed) {
    Rng rng(seed);
    std::vector<Candidate> candidates = sample_candidate_set(pool, page, cfg, rng);
    if (candidates.empty())
        throw std::runtime_error("generate_layout: no pool element fits the page");

    const size_t first =
        static_cast<size_t>(rng.uniform_int(0, static_cast<int64_t>(candidates.size() - 1)));
    const Candidate seed_cand = candidates[first];
    Layout layout = seed_layout(page, seed_cand, rng);
    layout.seed = seed;
    erase_candidate(candidates, seed_cand.id);

    int small_count = is_small(seed_cand, page, cfg) ? 1 : 0;

    while (static_cast<int>(layout.placed.size()) < cfg.n_max && !candidates.empty()) {
        std::vector<GridCell> cells = build_meshgrid(layout, cfg);

        std::vector<Candidate> eligible;
        for (const Candidate& c : candidates)
            if (small_count < cfg.mini_num || !is_small(c, page, cfg)) eligible.push_back(c);
        if (eligible.empty()) break;

        auto best = best_fit_search(eligible, cells);
        if (!best || best->fill_rate < cfg.fr_thr) break;

        place(layout, best->candidate, best->cell);
        if (is_small(best->candidate, page, cfg)) ++small_count;
        erase_candidate(candidates, best->candidate.id);
    }

    apply_central_scaling(layout, cfg, rng);
    return layout;
}

Layout generate_random_layout(const ElementPool& pool, const PageSpec& page,
                              const EngineConfig& cfg, uint64_t seed) {
    Rng rng(seed);
    std::vector<Candidate> candidates = sample_candidate_set(pool, page, cfg, rng);
    if (candidates.empty())
        throw std::runtime_error("generate_random_layout: no pool element fits the page");

    // Fisher-Yates, then take the budget in shuffled order
    for (size_t i = candidates.size(); i > 1; --i) {
        size_t j = static_cast<size_t>(rng.uniform_int(0, static_cast<int64_t>(i - 1)));
        std::swap(candidates[i - 1], candidates[j]);
    }

    Layout layout;
    layout.page = page;
    layout.seed = seed;
    const size_t budget = std::min(candidates.size(), static_cast<size_t>(cfg.n_max));
    for (size_t i = 0; i < budget; ++i) {
        const Candidate& c = candidates[i];
        PlacedElement pe;
        pe.element_id = c.id;
        pe.category = c.category;
        pe.w = c.w;
        pe.h = c.h;
        pe.x = page.margin_px + static_cast<int>(rng.uniform_int(0, page.interior_w() - c.w));
        pe.y = page.margin_px + static_cast<int>(rng.uniform_int(0, page.interior_h() - c.h));
        layout.placed.push_back(std::move(pe));
    }
    return layout;
}

std::vector<Layout> generate_dataset(const ElementPool& pool, const PageSpec& page,
                                     const EngineConfig& cfg, int count, LayoutMethod method,
                                     int threads) {
    if (count < 1) throw std::runtime_error("generate_dataset: count must be >= 1");
    std::vector<Layout> out(static_cast<size_t>(count));

    auto generate_one = [&](int i) {
        const uint64_t seed = Rng::derive(cfg.seed, static_cast<uint64_t>(i));
        out[static_cast<size_t>(i)] = method == LayoutMethod::BestFit
                                          ? generate_layout(pool, page, cfg, seed)
                                          : generate_random_layout(pool, page, cfg, seed);
    };

    if (threads <= 1) {
        for (int i = 0; i < count; ++i) generate_one(i);
        return out;
    }

    std::atomic<int> next{0};
    std::exception_ptr error;
    std::mutex error_mutex;
    std::vector<std::thread> workers;
    const int n_workers = std::min(threads, count);
    for (int t = 0; t < n_workers; ++t) {
        workers.emplace_back([&] {
            for (int i = next.fetch_add(1); i < count; i = next.fetch_add(1)) {
                try {
                    generate_one(i);
                } catch (...) {
                    std::lock_guard lock(error_mutex);
                    if (!error) error = std::current_exception();
                    return;
                }
            }
        });
    }
    for (auto& w : workers) w.join();
    if (error) std::rethrow_exception(error);
    return out;
}

std::string layout_to_json(const Layout& layout) {
    json j;
    j["page"] = {{"width", layout.page.width_px},
                 {"height", layout.page.height_px},
                 {"margin", layout.page.margin_px}};
    j["seed"] = layout.seed;
    j["placed"] = json::array();
    for (const PlacedElement& e : layout.placed) {
        j["placed"].push_back({{"element_id", e.element_id},
                               {"category", e.category},
                               {"x", e.x},
                               {"y", e.y},
                               {"w", e.w},
                               {"h", e.h},
                               {"scale", e.scale}});
    }
    return j.dump(2) + "\n";
}

Layout layout_from_json(const std::string& text) {
    json j = json::parse(text);
    Layout layout;
    layout.page.width_px = j.at("page").at("width").get<int>();
    layout.page.height_px = j.at("page").at("height").get<int>();
    layout.page.margin_px = j.at("page").at("margin").get<int>();
    layout.seed = j.at("seed").get<uint64_t>();
    for (const auto& pj : j.at("placed")) {
        PlacedElement e;
        e.element_id = pj.at("element_id").get<int64_t>();
        e.category = pj.at("category").get<std::string>();
        e.x = pj.at("x").get<int>();
        e.y = pj.at("y").get<int>();
        e.w = pj.at("w").get<int>();
        e.h = pj.at("h").get<int>();
        e.scale = pj.at("scale").get<double>();
        layout.placed.push_back(std::move(e));
    }
    return layout;
}

} // namespace docsynth
