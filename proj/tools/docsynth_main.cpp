#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "docsynth/augment.hpp"
#include "docsynth/crm.hpp"
#include "docsynth/element_pool.hpp"
#include "docsynth/layout_engine.hpp"
#include "docsynth/metrics.hpp"
#include "docsynth/renderer_io.hpp"

namespace fs = std::filesystem;
using namespace docsynth;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitUsage = 1;
constexpr int kExitData = 2;
constexpr int kExitSelfCheck = 3;

std::string default_out_dir() {
    const char* env = std::getenv("DOCSYNTH_OUT");
    return env ? env : ".";
}

std::vector<Layout> load_layout_dir(const std::string& dir) {
    std::vector<fs::path> files;
    for (const auto& entry : fs::directory_iterator(dir))
        if (entry.path().extension() == ".json" && entry.path().filename() != "coco.json")
            files.push_back(entry.path());
    std::sort(files.begin(), files.end());
    std::vector<Layout> layouts;
    for (const auto& p : files) {
        std::ifstream in(p);
        std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
        layouts.push_back(layout_from_json(text));
    }
    if (layouts.empty()) throw std::runtime_error("no layout JSON files in " + dir);
    return layouts;
}

void write_layouts(const std::vector<Layout>& layouts, const std::string& dir) {
    fs::create_directories(dir);
    for (size_t i = 0; i < layouts.size(); ++i) {
        char name[64];
        std::snprintf(name, sizeof(name), "layout_%06zu.json", i);
        std::ofstream out(fs::path(dir) / name);
        out << layout_to_json(layouts[i]);
    }
}

struct PageOptions {
    PageSpec page;
    void attach(CLI::App* cmd) {
        cmd->add_option("--page-width", page.width_px, "Page width in px")
            ->capture_default_str();
        cmd->add_option("--page-height", page.height_px, "Page height in px")
            ->capture_default_str();
        cmd->add_option("--margin", page.margin_px, "Empty border in px")
            ->capture_default_str();
    }
};

struct EngineOptions {
    EngineConfig cfg;
    void attach(CLI::App* cmd) {
        cmd->add_option("--n-max", cfg.n_max,
                        "Max elements per page (N, 15 in the source method)")
            ->capture_default_str();
        cmd->add_option("--fr-thr", cfg.fr_thr,
                        "Fill-rate stop threshold (fr_thr, 1e-4 in the source method)")
            ->capture_default_str();
        cmd->add_option("--mini-num", cfg.mini_num,
                        "Max small elements per page (Mini_num, 5 in the source method)")
            ->capture_default_str();
        cmd->add_option("--small-area-frac", cfg.small_area_frac,
                        "Area fraction of the interior below which an element counts as small")
            ->capture_default_str();
        cmd->add_option("--candidates", cfg.candidate_set_size, "Candidate set size")
            ->capture_default_str();
        cmd->add_option("--scale-lo", cfg.scale_lo, "Central scaling lower bound")
            ->capture_default_str();
        cmd->add_option("--scale-hi", cfg.scale_hi, "Central scaling upper bound")
            ->capture_default_str();
        cmd->add_option("--gutter", cfg.gutter_px,
                        "Spacing subtracted from each grid-cell side (0 recovers the strict "
                        "formulation)")
            ->capture_default_str();
    }
};

int cmd_pool(const std::string& manifest, const std::string& synthetic, uint64_t seed,
             bool augment, int min_count, const std::string& out_dir) {
    ElementPool pool;
    if (!synthetic.empty()) {
        SyntheticPoolSpec spec;
        spec.rng_seed = seed;
        if (std::sscanf(synthetic.c_str(), "%dx%d", &spec.num_categories, &spec.per_category) != 2)
            throw CLI::ValidationError("--synthetic expects CATEGORIESxCOUNT, e.g. 12x25");
        pool = make_synthetic_pool(spec);
    } else if (!manifest.empty()) {
        PoolLoadStats stats;
        pool = load_pool(manifest, &stats);
        if (stats.skipped_out_of_bounds > 0)
            std::fprintf(stderr, "warning: skipped %zu annotations outside image bounds\n",
                         stats.skipped_out_of_bounds);
    } else {
        throw CLI::ValidationError("pool requires --manifest or --synthetic");
    }

    if (augment) {
        AugmentConfig cfg;
        cfg.min_count = min_count;
        AugmentStats stats;
        pool = augment_rare_categories(pool, cfg, seed, &stats);
        for (const auto& name : stats.empty_rare_categories)
            std::fprintf(stderr, "warning: category '%s' has no originals to augment\n",
                         name.c_str());
        std::printf("augmented: %zu records added\n", stats.added);
    }

    save_pool(pool, out_dir);
    std::printf("pool: %zu elements in %zu categories -> %s\n", pool.total_count(),
                pool.categories.size(), out_dir.c_str());
    return kExitOk;
}

int cmd_synth(const std::string& pool_dir, const std::string& method, int count,
              const PageOptions& page_opts, EngineConfig cfg, int threads, bool render,
              const std::string& coco_path, const std::string& out_dir) {
    ElementPool pool = load_pool_dir(pool_dir);
    if (pool.total_count() == 0) throw std::runtime_error("pool is empty: " + pool_dir);

    const LayoutMethod m = method == "random" ? LayoutMethod::Random : LayoutMethod::BestFit;
    std::vector<Layout> layouts = generate_dataset(pool, page_opts.page, cfg, count, m, threads);
    write_layouts(layouts, out_dir);

    if (render) {
        fs::create_directories(fs::path(out_dir) / "pages");
        for (size_t i = 0; i < layouts.size(); ++i) {
            char name[64];
            std::snprintf(name, sizeof(name), "page_%06zu.png", i);
            save_png(compose_page(layouts[i], pool).raster,
                     (fs::path(out_dir) / "pages" / name).string());
        }
    }
    if (!coco_path.empty()) export_coco(layouts, coco_path);

    std::printf("synth: %d %s layouts -> %s\n", count, method.c_str(), out_dir.c_str());
    return kExitOk;
}

int cmd_render(const std::string& pool_dir, const std::string& layout_dir, bool svg,
               bool svg_cells, const std::string& out_dir) {
    ElementPool pool = load_pool_dir(pool_dir);
    std::vector<Layout> layouts = load_layout_dir(layout_dir);
    fs::create_directories(out_dir);
    EngineConfig cfg; // only the gutter matters for cell visualization
    for (size_t i = 0; i < layouts.size(); ++i) {
        char name[64];
        std::snprintf(name, sizeof(name), "page_%06zu", i);
        save_png(compose_page(layouts[i], pool).raster,
                 (fs::path(out_dir) / (std::string(name) + ".png")).string());
        if (svg) {
            std::vector<GridCell> cells;
            if (svg_cells && !layouts[i].placed.empty()) cells = build_meshgrid(layouts[i], cfg);
            export_svg_debug(layouts[i], svg_cells ? &cells : nullptr,
                             (fs::path(out_dir) / (std::string(name) + ".svg")).string());
        }
    }
    std::printf("render: %zu pages -> %s\n", layouts.size(), out_dir.c_str());
    return kExitOk;
}

int cmd_metrics(const std::vector<std::string>& dataset_specs, const std::string& json_out) {
    std::map<std::string, std::vector<Layout>> datasets;
    for (const std::string& spec : dataset_specs) {
        auto eq = spec.find('=');
        if (eq == std::string::npos)
            throw CLI::ValidationError("--dataset expects NAME=DIR");
        datasets[spec.substr(0, eq)] = load_layout_dir(spec.substr(eq + 1));
    }
    ComparisonTable table = compare_methods(datasets);
    std::printf("%s", table.to_text().c_str());
    if (!json_out.empty()) {
        std::ofstream out(json_out);
        out << table.to_json();
    }
    return kExitOk;
}

int cmd_crm_selfcheck(const std::string& preset, uint64_t seed, const std::string& params_path,
                      int pad_bias) {
    crm::CrmConfig cfg =
        preset == "global" ? crm::CrmConfig::global_preset() : crm::CrmConfig::block_preset();

    if (!params_path.empty()) {
        std::ifstream in(params_path);
        if (!in) throw std::runtime_error("cannot open params file: " + params_path);
        std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
        crm::CrmParams params = crm::params_from_json(text);
        params.validate(params.shared_kernel.out_ch, cfg);
        Rng rng(seed);
        crm::Tensor3 x = crm::random_tensor(params.shared_kernel.out_ch, 12, 12, rng);
        crm::Tensor3 y = crm::crm_forward(x, params, cfg);
        double max_abs = 0.0;
        for (double v : y.data) max_abs = std::max(max_abs, std::abs(v));
        std::printf("params file ok; forward max |value| = %.12g\n", max_abs);
    }

    crm::SelfCheckResult result = crm::self_check(cfg, seed, pad_bias);
    std::printf("%s", result.report.c_str());
    std::printf("crm-selfcheck (%s preset): %s\n", preset.c_str(),
                result.passed ? "PASS" : "FAIL");
    return result.passed ? kExitOk : kExitSelfCheck;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Deterministic document-layout synthesis via mesh-candidate best-fit packing"};
    app.require_subcommand(1);
    app.set_config("--config", "", "Key-value config file; flags override file values");

    // pool
    auto* pool_cmd = app.add_subcommand("pool", "Build an element pool");
    std::string manifest, synthetic;
    std::string pool_out = default_out_dir() + "/pool";
    uint64_t pool_seed = 0;
    bool pool_augment = false;
    int min_count = 100;
    pool_cmd->add_option("--manifest", manifest, "COCO JSON manifest of seed pages");
    pool_cmd->add_option("--synthetic", synthetic, "Synthetic pool spec, CATEGORIESxCOUNT");
    pool_cmd->add_option("--seed", pool_seed, "Master RNG seed")->capture_default_str();
    pool_cmd->add_flag("--augment", pool_augment, "Pad rare categories with augmented copies");
    pool_cmd->add_option("--min-count", min_count,
                         "Rare-category threshold (100 in the source method)")
        ->capture_default_str();
    pool_cmd->add_option("-o,--out", pool_out, "Output pool directory")->capture_default_str();

    // synth
    auto* synth_cmd = app.add_subcommand("synth", "Generate layouts");
    std::string synth_pool, synth_method = "bestfit", coco_path;
    std::string synth_out = default_out_dir() + "/layouts";
    int count = 1, threads = 1;
    bool render = false;
    PageOptions synth_page;
    EngineOptions synth_engine;
    synth_cmd->add_option("--pool", synth_pool, "Pool directory")->required();
    synth_cmd->add_option("--method", synth_method, "bestfit or random")
        ->check(CLI::IsMember({"bestfit", "random"}))
        ->capture_default_str();
    synth_cmd->add_option("--count", count, "Number of layouts")->capture_default_str();
    synth_cmd->add_option("--seed", synth_engine.cfg.seed, "Master RNG seed")
        ->capture_default_str();
    synth_cmd->add_option("--threads", threads, "Worker threads (output is thread-invariant)")
        ->capture_default_str();
    synth_cmd->add_flag("--render", render, "Also write composited page PNGs");
    synth_cmd->add_option("--coco", coco_path, "Also write a COCO annotation file");
    synth_cmd->add_option("-o,--out", synth_out, "Output directory")->capture_default_str();
    synth_page.attach(synth_cmd);
    synth_engine.attach(synth_cmd);

    // render
    auto* render_cmd = app.add_subcommand("render", "Composite stored layouts into images");
    std::string render_pool, render_layouts;
    std::string render_out = default_out_dir() + "/pages";
    bool svg = false, svg_cells = false;
    render_cmd->add_option("--pool", render_pool, "Pool directory")->required();
    render_cmd->add_option("--layouts", render_layouts, "Directory of layout JSON files")
        ->required();
    render_cmd->add_flag("--svg", svg, "Also write debug SVGs");
    render_cmd->add_flag("--svg-cells", svg_cells, "Include meshgrid cells in the SVGs");
    render_cmd->add_option("-o,--out", render_out, "Output directory")->capture_default_str();

    // export-coco
    auto* coco_cmd = app.add_subcommand("export-coco", "Write COCO annotations for layouts");
    std::string coco_layouts, coco_out = default_out_dir() + "/coco.json";
    coco_cmd->add_option("--layouts", coco_layouts, "Directory of layout JSON files")->required();
    coco_cmd->add_option("-o,--out", coco_out, "Output COCO JSON path")->capture_default_str();

    // metrics
    auto* metrics_cmd = app.add_subcommand("metrics", "Alignment/density report");
    std::vector<std::string> dataset_specs;
    std::string metrics_json;
    metrics_cmd->add_option("--dataset", dataset_specs, "NAME=DIR (repeatable)")->required();
    metrics_cmd->add_option("--json", metrics_json, "Also write the report as JSON");

    // crm-selfcheck
    auto* crm_cmd = app.add_subcommand("crm-selfcheck", "Run the receptive-module invariant suite");
    std::string preset = "block";
    uint64_t crm_seed = 0;
    std::string params_path;
    int pad_bias = 0;
    crm_cmd->add_option("--preset", preset, "global (k=5, d=1,2,3) or block (k=3, d=1,2,3)")
        ->check(CLI::IsMember({"global", "block"}))
        ->capture_default_str();
    crm_cmd->add_option("--seed", crm_seed, "RNG seed")->capture_default_str();
    crm_cmd->add_option("--params", params_path, "JSON tensor file to validate and run");
    crm_cmd->add_option("--inject-pad-bias", pad_bias,
                        "Test hook: shift conv padding to force a failure")
        ->group(""); // hidden

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int code = app.exit(e);
        return code == 0 ? kExitOk : kExitUsage;
    }

    try {
        if (pool_cmd->parsed())
            return cmd_pool(manifest, synthetic, pool_seed, pool_augment, min_count, pool_out);
        if (synth_cmd->parsed())
            return cmd_synth(synth_pool, synth_method, count, synth_page, synth_engine.cfg,
                             threads, render, coco_path, synth_out);
        if (render_cmd->parsed())
            return cmd_render(render_pool, render_layouts, svg, svg_cells, render_out);
        if (coco_cmd->parsed()) {
            export_coco(load_layout_dir(coco_layouts), coco_out);
            std::printf("export-coco: -> %s\n", coco_out.c_str());
            return kExitOk;
        }
        if (metrics_cmd->parsed()) return cmd_metrics(dataset_specs, metrics_json);
        if (crm_cmd->parsed()) return cmd_crm_selfcheck(preset, crm_seed, params_path, pad_bias);
    } catch (const CLI::ValidationError& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return kExitUsage;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return kExitData;
    }
    return kExitUsage;
}
