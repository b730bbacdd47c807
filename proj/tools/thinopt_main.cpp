#include <exception>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "thinopt/a3c.hpp"
#include "thinopt/config.hpp"
#include "thinopt/embedding.hpp"
#include "thinopt/errors.hpp"
#include "thinopt/ga.hpp"
#include "thinopt/material_db.hpp"
#include "thinopt/search.hpp"
#include "thinopt/svg.hpp"

namespace fs = std::filesystem;
using namespace thinopt;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitUnexpected = 1;
constexpr int kExitInput = 2;
constexpr int kExitTraining = 3;
constexpr int kExitSearch = 4;

int g_verbosity = 0;

void info(const std::string& line) {
    if (g_verbosity >= 1) std::cerr << "[thinopt] " << line << '\n';
}

void debug(const std::string& line) {
    if (g_verbosity >= 2) std::cerr << "[thinopt] " << line << '\n';
}

struct CommonArgs {
    std::string config_path;
    std::string out_dir = ".";
    std::optional<std::uint64_t> seed;
    std::optional<int> workers;
};

RunConfig load_config(const CommonArgs& args) {
    if (args.config_path.empty()) throw InputError("--config is required for this subcommand");
    RunConfig cfg = RunConfig::load(args.config_path);
    if (args.seed) {
        cfg.seed = *args.seed;
        cfg.ga.seed = *args.seed;
        cfg.a3c.seed = *args.seed;
        cfg.embedding.encoder.seed = *args.seed;
        cfg.embedding.tsne.seed = *args.seed;
    }
    if (args.workers) cfg.a3c.workers = *args.workers;
    return cfg;
}

std::string category_color(MaterialCategory c) {
    switch (c) {
        case MaterialCategory::Metal: return "#e6762c";       // orange
        case MaterialCategory::Alloy: return "#c2a029";
        case MaterialCategory::Semiconductor: return "#2c8f5a";
        case MaterialCategory::Dielectric: return "#7a4fb8";
        case MaterialCategory::Transparent: return "#2c62b8"; // blue
        default: return "#666666";
    }
}

int cmd_ingest(const CommonArgs& args, const std::string& dir_arg) {
    fs::path dir = dir_arg;
    if (dir.empty()) dir = load_config(args).catalog_dir;
    const MaterialDb db = MaterialDb::load(dir);
    const auto [lo, hi] = db.wavelength_support();
    std::cout << db.size() << " materials, support [" << lo << ", " << hi << "] nm\n";
    std::map<std::string_view, int> by_category;
    for (const MaterialRecord& rec : db.records()) ++by_category[to_string(rec.category)];
    for (const auto& [category, count] : by_category)
        std::cout << "  " << category << ": " << count << '\n';
    return kExitOk;
}

int cmd_embed(const CommonArgs& args) {
    const RunConfig cfg = load_config(args);
    const MaterialDb db = MaterialDb::load(cfg.catalog_dir);
    info("catalog: " + std::to_string(db.size()) + " materials from " + cfg.catalog_dir.string());

    info("training encoder (" + std::to_string(cfg.embedding.encoder.epochs) + " epochs)");
    const EmbeddingResult result = build_environment_map(db, cfg.embedding);
    debug("final reconstruction loss "
          + std::to_string(result.encoder.final_reconstruction_loss));

    const fs::path out = args.out_dir;
    fs::create_directories(out);
    const fs::path map_path =
        cfg.map_file.is_absolute() ? cfg.map_file : out / cfg.map_file.filename();
    result.map.save(map_path, result.names);
    result.map.write_csv(out / "embedding.csv", db);

    std::vector<SvgSeries> groups;
    for (MaterialCategory c :
         {MaterialCategory::Metal, MaterialCategory::Alloy, MaterialCategory::Semiconductor,
          MaterialCategory::Dielectric, MaterialCategory::Transparent, MaterialCategory::Other}) {
        SvgSeries group{std::string(to_string(c)), category_color(c), {}};
        for (std::size_t i = 0; i < db.size(); ++i)
            if (db.records()[i].category == c)
                group.points.emplace_back(result.map.point(static_cast<int>(i)).x,
                                          result.map.point(static_cast<int>(i)).y);
        if (!group.points.empty()) groups.push_back(std::move(group));
    }
    write_scatter_svg(out / "embedding.svg", "Material environment space", "x", "y", groups);

    std::cout << "map: " << map_path.string() << " (" << result.map.size() << " materials)\n";
    std::cout << "reconstruction loss: " << result.encoder.final_reconstruction_loss << '\n';
    std::cout << "category silhouette: " << result.mean_silhouette << '\n';
    return kExitOk;
}

int cmd_design(const CommonArgs& args) {
    const RunConfig cfg = load_config(args);
    const MaterialDb db = MaterialDb::load(cfg.catalog_dir);
    const LoadedMap loaded = EnvironmentMap::load(cfg.map_file);
    loaded.map.check_compatible(db, loaded.names);
    const DesignTask task = cfg.make_task(db);
    info("search: " + std::to_string(task.layer_count) + " layers, "
         + std::to_string(task.epoch_budget) + " epochs, " + std::to_string(cfg.a3c.workers)
         + " workers");

    const DesignResult result = run_search(task, cfg.a3c, cfg.ga, loaded.map, db);
    write_result_bundle(args.out_dir, task, result);

    std::cout << "layers (top first):\n";
    for (std::size_t i = 0; i < result.materials.size(); ++i)
        std::cout << "  " << result.materials[i] << "  " << result.thicknesses_nm[i] << " nm\n";
    std::cout << "merit: " << result.merit << '\n';
    std::cout << "band-average absorption [" << task.report_band_lo_nm << ", "
              << task.report_band_hi_nm << "] nm: " << result.average_absorption_band << '\n';
    std::cout << "bundle: " << fs::path(args.out_dir).string() << '\n';
    return kExitOk;
}

int cmd_evaluate(const CommonArgs& args, const std::vector<std::string>& materials,
                 const std::vector<double>& thicknesses) {
    const RunConfig cfg = load_config(args);
    const MaterialDb db = MaterialDb::load(cfg.catalog_dir);
    const DesignTask task = cfg.make_task(db);
    const DesignResult result = evaluate_design(materials, thicknesses, task, db);

    fs::create_directories(args.out_dir);
    write_spectra_csv(fs::path(args.out_dir) / "spectrum.csv", result.spectra);

    std::cout << "merit: " << result.merit << '\n';
    std::cout << "band-average absorption [" << task.report_band_lo_nm << ", "
              << task.report_band_hi_nm << "] nm: " << result.average_absorption_band << '\n';
    return kExitOk;
}

// Parses the bundle CSVs back into series; tolerant of extra columns.
std::vector<std::vector<double>> read_csv(const fs::path& path, std::size_t columns) {
    std::ifstream in(path);
    if (!in) throw InputError("cannot open " + path.string());
    std::vector<std::vector<double>> rows;
    std::string line;
    if (!std::getline(in, line)) throw InputError(path.string() + " is empty");
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        std::vector<double> row;
        std::stringstream ss(line);
        std::string cell;
        while (std::getline(ss, cell, ',')) {
            try {
                row.push_back(std::stod(cell));
            } catch (const std::exception&) {
                throw InputError(path.string() + ": non-numeric cell '" + cell + "'");
            }
        }
        if (row.size() < columns)
            throw InputError(path.string() + ": expected at least "
                             + std::to_string(columns) + " columns");
        rows.push_back(std::move(row));
    }
    if (rows.empty()) throw InputError(path.string() + " has no data rows");
    return rows;
}

int cmd_plot(const CommonArgs& args, const std::string& bundle_arg) {
    const fs::path bundle = bundle_arg.empty() ? fs::path(args.out_dir) : fs::path(bundle_arg);
    const fs::path out = args.out_dir.empty() ? bundle : fs::path(args.out_dir);
    fs::create_directories(out);

    // spectrum.csv: lambda_nm,angle_deg,A,R,T
    const auto spectrum = read_csv(bundle / "spectrum.csv", 5);
    SvgSeries a{"A", "#c23b3b", {}}, r{"R", "#2c62b8", {}}, t{"T", "#2c8f5a", {}};
    for (const auto& row : spectrum) {
        a.points.emplace_back(row[0], row[2]);
        r.points.emplace_back(row[0], row[3]);
        t.points.emplace_back(row[0], row[4]);
    }
    const std::vector<SvgSeries> spectrum_series{a, r, t};
    write_line_chart_svg(out / "spectrum.svg", "Spectral response", "wavelength (nm)",
                         "fraction", spectrum_series);

    // trace.csv: epoch,best_merit
    const auto trace = read_csv(bundle / "trace.csv", 2);
    SvgSeries best{"best merit", "#c23b3b", {}};
    for (const auto& row : trace) best.points.emplace_back(row[0], row[1]);
    const std::vector<SvgSeries> trace_series{best};
    write_line_chart_svg(out / "trace.svg", "Search progress", "epoch", "merit", trace_series);

    std::cout << (out / "spectrum.svg").string() << '\n' << (out / "trace.svg").string() << '\n';
    return kExitOk;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Layered optical thin-film inverse design"};
    app.require_subcommand(1);

    CommonArgs args;
    app.add_option("--config", args.config_path, "Run configuration JSON")
        ->envname("THINOPT_CONFIG");
    app.add_option("--out", args.out_dir, "Output directory");
    std::uint64_t seed_value = 0;
    auto* seed_opt = app.add_option("--seed", seed_value, "Override every configured seed");
    int workers_value = 0;
    auto* workers_opt =
        app.add_option("--workers", workers_value, "Override the a3c worker count");
    app.add_flag("-v", g_verbosity, "Verbose (-v progress, -vv debug)");

    std::string ingest_dir;
    auto* ingest = app.add_subcommand("ingest", "Validate and summarize a material catalog");
    ingest->add_option("dir", ingest_dir, "Catalog directory (default: config catalog_dir)");

    auto* embed = app.add_subcommand("embed", "Build the 2D material environment map");

    auto* design = app.add_subcommand("design", "Run the full inverse-design search");

    std::vector<std::string> eval_materials;
    std::vector<double> eval_thicknesses;
    auto* evaluate = app.add_subcommand("evaluate", "Score a fixed design (no search)");
    evaluate->add_option("--materials", eval_materials, "Layer materials, top first")
        ->required()
        ->delimiter(',');
    evaluate->add_option("--thicknesses", eval_thicknesses, "Layer thicknesses in nm")
        ->required()
        ->delimiter(',');

    std::string plot_bundle;
    auto* plot = app.add_subcommand("plot", "Render SVG charts from a result bundle");
    plot->add_option("bundle", plot_bundle, "Bundle directory (default: --out)");

    CLI11_PARSE(app, argc, argv);

    if (seed_opt->count() > 0) args.seed = seed_value;
    if (workers_opt->count() > 0) args.workers = workers_value;

    try {
        if (ingest->parsed()) return cmd_ingest(args, ingest_dir);
        if (embed->parsed()) return cmd_embed(args);
        if (design->parsed()) return cmd_design(args);
        if (evaluate->parsed()) return cmd_evaluate(args, eval_materials, eval_thicknesses);
        if (plot->parsed()) return cmd_plot(args, plot_bundle);
        std::cerr << "error: no subcommand\n";
        return kExitInput;
    } catch (const InputError& e) {
        std::cerr << "input error: " << e.what() << '\n';
        return kExitInput;
    } catch (const TrainingError& e) {
        std::cerr << "training error: " << e.what() << '\n';
        return kExitTraining;
    } catch (const SearchError& e) {
        std::cerr << "search error: " << e.what() << '\n';
        return kExitSearch;
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitUnexpected;
    } catch (const std::exception& e) {
        std::cerr << "unexpected error: " << e.what() << '\n';
        return kExitUnexpected;
    }
}
