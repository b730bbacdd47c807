#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <fstream>
#include <functional>
#include <string>

#include "test_util.hpp"
#include "thinopt/config.hpp"
#include "thinopt/errors.hpp"
#include "thinopt/material_db.hpp"

using namespace thinopt;
using testutil::TempDir;
using testutil::constant_material;

namespace {

std::filesystem::path write_config(const TempDir& dir, const std::string& text) {
    const auto path = dir.path() / "config.json";
    std::ofstream out(path);
    out << text;
    return path;
}

std::string error_of(const std::function<void()>& fn) {
    try {
        fn();
    } catch (const InputError& e) {
        return e.what();
    }
    return {};
}

MaterialDb three_materials() {
    std::vector<MaterialRecord> recs;
    recs.push_back(constant_material(0, "absorber", 2.5, 1.2, MaterialCategory::Semiconductor));
    recs.push_back(constant_material(1, "metal", 0.3, 3.5, MaterialCategory::Metal));
    recs.push_back(constant_material(2, "clear", 1.45, 0.0, MaterialCategory::Transparent));
    return MaterialDb(std::move(recs));
}

constexpr const char* kFullConfig = R"JSON({
  "catalog_dir": "cat",
  "map_file": "m.json",
  "seed": 42,
  "task": {
    "layer_count": 2,
    "target": {
      "grid_nm": {"from_nm": 400, "to_nm": 700, "step_nm": 100},
      "bands": [{"from_nm": 400, "to_nm": 550, "value": 1.0}],
      "default_value": 0.25,
      "component": "reflection",
      "weights": [1, 2, 3, 4]
    },
    "incidence": {"angles_deg": [0, 45], "polarization": "s"},
    "substrate": "metal",
    "incident": {"n": 1.2},
    "frozen_layers": {"1": "metal"},
    "epoch_budget": 55,
    "report_band_nm": [300, 900],
    "success_average_absorption": 0.9
  },
  "ga": {"population_size": 40},
  "a3c": {"workers": 2, "seed": 7, "reward": {"stall_threshold": 33}},
  "embedding": {
    "encoder": {"latent_dim": 6},
    "tsne": {"perplexity": 12, "seed": 9}
  }
})JSON";

} // namespace

TEST_CASE("a fully populated config file parses into every block") {
    TempDir dir("cfg-full");
    const RunConfig cfg = RunConfig::load(write_config(dir, kFullConfig));

    CHECK(cfg.catalog_dir == std::filesystem::path("cat"));
    CHECK(cfg.map_file == std::filesystem::path("m.json"));
    CHECK(cfg.seed == 42);

    CHECK(cfg.layer_count == 2);
    CHECK(cfg.target_grid_nm == std::vector<double>{400.0, 500.0, 600.0, 700.0});
    REQUIRE(cfg.target_bands.size() == 1);
    CHECK(cfg.target_bands[0].from_nm == 400.0);
    CHECK(cfg.target_bands[0].to_nm == 550.0);
    CHECK(cfg.target_bands[0].value == 1.0);
    CHECK(cfg.target_default == 0.25);
    CHECK(cfg.target_component == SpectrumComponent::Reflection);
    CHECK(cfg.target_weights == std::vector<double>{1.0, 2.0, 3.0, 4.0});
    CHECK(cfg.incidence.angles_deg == std::vector<double>{0.0, 45.0});
    CHECK(cfg.incidence.polarization == Polarization::S);
    REQUIRE(cfg.substrate.has_value());
    CHECK(*cfg.substrate == "metal");
    CHECK_FALSE(cfg.incident_material.has_value());
    CHECK(cfg.incident_nk == std::complex<double>(1.2, 0.0));
    REQUIRE(cfg.frozen_layers.size() == 1);
    CHECK(cfg.frozen_layers.at(1) == "metal");
    CHECK(cfg.epoch_budget == 55);
    CHECK(cfg.report_band_lo_nm == 300.0);
    CHECK(cfg.report_band_hi_nm == 900.0);
    CHECK(cfg.success_average_absorption == 0.9);

    CHECK(cfg.ga.population_size == 40);
    CHECK(cfg.a3c.workers == 2);
    CHECK(cfg.a3c.reward.stall_threshold == 33);
    CHECK(cfg.embedding.encoder.latent_dim == 6);
    CHECK(cfg.embedding.tsne.perplexity == 12.0);
}

TEST_CASE("the top-level seed feeds blocks that do not pin their own") {
    TempDir dir("cfg-seed");
    const RunConfig cfg = RunConfig::load(write_config(dir, kFullConfig));

    CHECK(cfg.ga.seed == 42);              // no seed in the ga block
    CHECK(cfg.a3c.seed == 7);              // pinned
    CHECK(cfg.embedding.encoder.seed == 42);
    CHECK(cfg.embedding.tsne.seed == 9);   // pinned
}

TEST_CASE("an empty config object yields the documented defaults") {
    TempDir dir("cfg-empty");
    const RunConfig cfg = RunConfig::load(write_config(dir, "{}"));

    CHECK(cfg.catalog_dir == std::filesystem::path("data/nk"));
    CHECK(cfg.map_file == std::filesystem::path("map.json"));
    CHECK(cfg.seed == 0);
    CHECK(cfg.layer_count == 1);
    CHECK(cfg.target_grid_nm.empty());
    CHECK(cfg.target_default == 0.0);
    CHECK(cfg.target_component == SpectrumComponent::Absorption);
    CHECK_FALSE(cfg.substrate.has_value());
    CHECK(cfg.incident_nk == std::complex<double>(1.0, 0.0));
    CHECK(cfg.epoch_budget == 100);
    CHECK(cfg.report_band_lo_nm == 250.0);
    CHECK(cfg.report_band_hi_nm == 800.0);
    CHECK(cfg.success_average_absorption == 0.95);
    CHECK(cfg.ga.population_size == 100);
    CHECK(cfg.ga.generations == 500);
    CHECK(cfg.ga.seed == 0);
    CHECK(cfg.a3c.workers == 4);
    CHECK(cfg.a3c.seed == 0);
    CHECK(cfg.embedding.encoder.seed == 0);
    CHECK(cfg.embedding.tsne.seed == 0);
}

TEST_CASE("unknown keys are rejected at every nesting level") {
    TempDir dir("cfg-keys");
    const auto load_text = [&dir](const std::string& text) {
        return error_of([&] { RunConfig::load(write_config(dir, text)); });
    };

    SUBCASE("top level") {
        const std::string msg = load_text(R"({"sed": 1})");
        CHECK(msg.find("top level") != std::string::npos);
        CHECK(msg.find("unknown key 'sed'") != std::string::npos);
    }
    SUBCASE("task") {
        const std::string msg =
            load_text(R"({"task": {"layers": 2, "target": {"grid_nm": [1, 2]}}})");
        CHECK(msg.find("config task") != std::string::npos);
        CHECK(msg.find("unknown key 'layers'") != std::string::npos);
    }
    SUBCASE("target") {
        const std::string msg = load_text(R"({"task": {"target": {"grid": [1, 2]}}})");
        CHECK(msg.find("task.target") != std::string::npos);
        CHECK(msg.find("unknown key 'grid'") != std::string::npos);
    }
    SUBCASE("ga") {
        const std::string msg = load_text(R"({"ga": {"pop": 10}})");
        CHECK(msg.find("config ga") != std::string::npos);
        CHECK(msg.find("unknown key 'pop'") != std::string::npos);
    }
    SUBCASE("a3c reward") {
        const std::string msg = load_text(R"({"a3c": {"reward": {"stall": 5}}})");
        CHECK(msg.find("a3c.reward") != std::string::npos);
        CHECK(msg.find("unknown key 'stall'") != std::string::npos);
    }
    SUBCASE("tsne") {
        const std::string msg = load_text(R"({"embedding": {"tsne": {"perp": 5}}})");
        CHECK(msg.find("embedding.tsne") != std::string::npos);
        CHECK(msg.find("unknown key 'perp'") != std::string::npos);
    }
}

TEST_CASE("wavelength grids accept explicit arrays and from/to/step objects") {
    TempDir dir("cfg-grid");

    SUBCASE("explicit array is taken verbatim") {
        const RunConfig cfg = RunConfig::load(write_config(
            dir, R"({"task": {"target": {"grid_nm": [500, 430, 610]}}})"));
        CHECK(cfg.target_grid_nm == std::vector<double>{500.0, 430.0, 610.0});
    }
    SUBCASE("step form includes both endpoints when they land on the lattice") {
        const RunConfig cfg = RunConfig::load(write_config(
            dir,
            R"({"task": {"target": {"grid_nm": {"from_nm": 250, "to_nm": 800, "step_nm": 50}}}})"));
        REQUIRE(cfg.target_grid_nm.size() == 12);
        CHECK(cfg.target_grid_nm.front() == 250.0);
        CHECK(cfg.target_grid_nm.back() == 800.0);
    }
    SUBCASE("a one-element array is rejected") {
        const std::string msg = error_of([&] {
            RunConfig::load(write_config(dir, R"({"task": {"target": {"grid_nm": [500]}}})"));
        });
        CHECK(msg.find("at least two wavelengths") != std::string::npos);
    }
    SUBCASE("a descending range is rejected") {
        const std::string msg = error_of([&] {
            RunConfig::load(write_config(
                dir,
                R"({"task": {"target": {"grid_nm": {"from_nm": 700, "to_nm": 400, "step_nm": 100}}}})"));
        });
        CHECK(msg.find("from_nm < to_nm") != std::string::npos);
    }
}

TEST_CASE("malformed values raise input errors that name the offending key") {
    TempDir dir("cfg-bad");

    SUBCASE("non-numeric population size") {
        const std::string msg = error_of([&] {
            RunConfig::load(write_config(dir, R"({"ga": {"population_size": "lots"}})"));
        });
        CHECK(msg.find("bad value for 'population_size'") != std::string::npos);
    }
    SUBCASE("report band with three entries") {
        const std::string msg = error_of([&] {
            RunConfig::load(write_config(
                dir,
                R"({"task": {"target": {"grid_nm": [1, 2]}, "report_band_nm": [1, 2, 3]}})"));
        });
        CHECK(msg.find("'report_band_nm' must be [lo, hi]") != std::string::npos);
    }
    SUBCASE("thickness bounds with one entry") {
        const std::string msg = error_of([&] {
            RunConfig::load(write_config(dir, R"({"ga": {"thickness_bounds_nm": [5]}})"));
        });
        CHECK(msg.find("'thickness_bounds_nm' must be [lo, hi]") != std::string::npos);
    }
    SUBCASE("unrecognized polarization") {
        const std::string msg = error_of([&] {
            RunConfig::load(write_config(
                dir,
                R"({"task": {"target": {"grid_nm": [1, 2]}, "incidence": {"polarization": "circular"}}})"));
        });
        CHECK(msg.find("polarization must be s, p, or unpolarized") != std::string::npos);
    }
    SUBCASE("unrecognized spectrum component") {
        const std::string msg = error_of([&] {
            RunConfig::load(write_config(
                dir, R"({"task": {"target": {"grid_nm": [1, 2], "component": "emission"}}})"));
        });
        CHECK(msg.find("component must be absorption, reflection, or transmission")
              != std::string::npos);
    }
    SUBCASE("frozen layer key that is not an integer") {
        const std::string msg = error_of([&] {
            RunConfig::load(write_config(
                dir,
                R"({"task": {"target": {"grid_nm": [1, 2]}, "frozen_layers": {"abc": "metal"}}})"));
        });
        CHECK(msg.find("frozen layer key 'abc' is not an integer") != std::string::npos);
    }
}

TEST_CASE("unreadable and unparsable config files raise input errors") {
    TempDir dir("cfg-io");

    SUBCASE("missing file") {
        const std::string msg =
            error_of([&] { RunConfig::load(dir.path() / "nope.json"); });
        CHECK(msg.find("cannot open config") != std::string::npos);
    }
    SUBCASE("truncated JSON") {
        const std::string msg = error_of(
            [&] { RunConfig::load(write_config(dir, R"({"seed": 42)")); });
        CHECK(msg.find("malformed config") != std::string::npos);
    }
}

TEST_CASE("make_task resolves names and builds the banded target") {
    TempDir dir("cfg-task");
    const MaterialDb db = three_materials();
    const RunConfig cfg = RunConfig::load(write_config(dir, kFullConfig));
    const DesignTask task = cfg.make_task(db);

    CHECK(task.layer_count == 2);
    CHECK(task.target.wavelengths_nm == std::vector<double>{400.0, 500.0, 600.0, 700.0});
    CHECK(task.target.target == std::vector<double>{1.0, 1.0, 0.25, 0.25});
    CHECK(task.target.weights == std::vector<double>{1.0, 2.0, 3.0, 4.0});
    CHECK(task.target.component == SpectrumComponent::Reflection);
    CHECK(task.incidence.polarization == Polarization::S);
    CHECK_FALSE(task.incident_medium.material_id.has_value());
    CHECK(task.incident_medium.fixed_nk == std::complex<double>(1.2, 0.0));
    REQUIRE(task.substrate_material.has_value());
    CHECK(*task.substrate_material == 1);
    REQUIRE(task.frozen_layers.size() == 1);
    CHECK(task.frozen_layers.at(1) == 1);
    CHECK(task.epoch_budget == 55);
    CHECK(task.seed == 42);
    CHECK(task.report_band_lo_nm == 300.0);
    CHECK(task.report_band_hi_nm == 900.0);
    CHECK(task.success_average_absorption == 0.9);
}

TEST_CASE("make_task rejects unresolvable and inconsistent inputs") {
    TempDir dir("cfg-task-bad");
    const MaterialDb db = three_materials();

    SUBCASE("a config without a target grid cannot build a task") {
        const RunConfig cfg = RunConfig::load(write_config(dir, "{}"));
        const std::string msg = error_of([&] { cfg.make_task(db); });
        CHECK(msg.find("task.target.grid_nm is required") != std::string::npos);
    }
    SUBCASE("unknown substrate names come back with suggestions") {
        const RunConfig cfg = RunConfig::load(write_config(
            dir,
            R"({"task": {"target": {"grid_nm": [400, 700]}, "substrate": "metel"}})"));
        const std::string msg = error_of([&] { cfg.make_task(db); });
        CHECK(msg.find("substrate names unknown material 'metel'") != std::string::npos);
        CHECK(msg.find("metal") != std::string::npos);
    }
    SUBCASE("unknown frozen layer material is reported with its role") {
        const RunConfig cfg = RunConfig::load(write_config(
            dir,
            R"({"task": {"target": {"grid_nm": [400, 700]}, "frozen_layers": {"0": "cleer"}}})"));
        const std::string msg = error_of([&] { cfg.make_task(db); });
        CHECK(msg.find("frozen layer names unknown material 'cleer'") != std::string::npos);
        CHECK(msg.find("clear") != std::string::npos);
    }
    SUBCASE("weights must match the grid length") {
        const RunConfig cfg = RunConfig::load(write_config(
            dir,
            R"({"task": {"target": {"grid_nm": [400, 550, 700], "weights": [1, 2]}}})"));
        const std::string msg = error_of([&] { cfg.make_task(db); });
        CHECK(msg.find("weights must match the grid length") != std::string::npos);
    }
}
