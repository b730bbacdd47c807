#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <fstream>
#include <limits>
#include <random>
#include <vector>

#include "test_util.hpp"
#include "thinopt/env_map.hpp"
#include "thinopt/errors.hpp"

using namespace thinopt;
using testutil::constant_material;

namespace {

std::vector<EnvPoint> random_points(std::size_t n, std::mt19937_64& rng) {
    std::uniform_real_distribution<double> u(0.0, 1.0);
    std::vector<EnvPoint> pts(n);
    for (EnvPoint& p : pts) p = {u(rng), u(rng)};
    return pts;
}

// O(N) oracle with the same tie-break rule.
int brute_nearest(const std::vector<EnvPoint>& pts, EnvPoint q) {
    int best = -1;
    double best_d2 = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < pts.size(); ++i) {
        const double dx = pts[i].x - q.x, dy = pts[i].y - q.y;
        const double d2 = dx * dx + dy * dy;
        if (d2 < best_d2) {
            best_d2 = d2;
            best = static_cast<int>(i);
        }
    }
    return best;
}

} // namespace

TEST_CASE("normalize: endpoints map to the unit square corners") {
    const std::vector<EnvPoint> raw{{0.0, 0.0}, {10.0, 20.0}};
    const auto out = normalize_to_unit_square(raw);
    CHECK(out[0] == EnvPoint{0.0, 0.0});
    CHECK(out[1] == EnvPoint{1.0, 1.0});
}

TEST_CASE("normalize: degenerate axis collapses to 0.5") {
    const std::vector<EnvPoint> raw{{5.0, 0.0}, {5.0, 1.0}};
    const auto out = normalize_to_unit_square(raw);
    CHECK(out[0] == EnvPoint{0.5, 0.0});
    CHECK(out[1] == EnvPoint{0.5, 1.0});
}

TEST_CASE("normalize: output bounding box is exactly the unit square") {
    std::mt19937_64 rng(7);
    std::uniform_real_distribution<double> u(-100.0, 100.0);
    std::vector<EnvPoint> raw(40);
    for (EnvPoint& p : raw) p = {u(rng), u(rng)};
    const auto out = normalize_to_unit_square(raw);
    double xmin = 1, xmax = 0, ymin = 1, ymax = 0;
    for (const EnvPoint& p : out) {
        xmin = std::min(xmin, p.x);
        xmax = std::max(xmax, p.x);
        ymin = std::min(ymin, p.y);
        ymax = std::max(ymax, p.y);
    }
    CHECK(xmin == 0.0);
    CHECK(xmax == 1.0);
    CHECK(ymin == 0.0);
    CHECK(ymax == 1.0);
}

TEST_CASE("normalize: idempotent on nondegenerate normalized input") {
    std::mt19937_64 rng(11);
    auto pts = random_points(25, rng);
    pts[0] = {0.0, 0.0};
    pts[1] = {1.0, 1.0};
    const auto once = normalize_to_unit_square(pts);
    const auto twice = normalize_to_unit_square(once);
    for (std::size_t i = 0; i < pts.size(); ++i) {
        CHECK(once[i].x == doctest::Approx(twice[i].x).epsilon(1e-15));
        CHECK(once[i].y == doctest::Approx(twice[i].y).epsilon(1e-15));
    }
}

TEST_CASE("normalize: rejects fewer than two distinct points") {
    CHECK_THROWS_AS(normalize_to_unit_square(std::vector<EnvPoint>{}), InputError);
    CHECK_THROWS_AS(normalize_to_unit_square(std::vector<EnvPoint>{{0.3, 0.4}}), InputError);
    const std::vector<EnvPoint> same{{0.3, 0.4}, {0.3, 0.4}, {0.3, 0.4}};
    CHECK_THROWS_AS(normalize_to_unit_square(same), InputError);
}

TEST_CASE("nearest: exact hit returns that material") {
    std::mt19937_64 rng(3);
    const auto pts = random_points(50, rng);
    const EnvironmentMap map(pts, "{}");
    for (int i = 0; i < 50; ++i) CHECK(map.nearest_material(pts[i]) == i);
}

TEST_CASE("nearest: equidistant from 3 and 7 resolves to 3") {
    std::vector<EnvPoint> pts(10);
    for (int i = 0; i < 10; ++i) pts[i] = {0.05 * i + 0.2, 0.9};
    pts[3] = {0.4, 0.5};
    pts[7] = {0.6, 0.5};
    const EnvironmentMap map(pts, "{}");
    CHECK(map.nearest_material({0.5, 0.5}) == 3);
}

TEST_CASE("nearest: agrees with the exhaustive scan on random queries") {
    std::mt19937_64 rng(13);
    for (int trial = 0; trial < 5; ++trial) {
        const auto pts = random_points(64, rng);
        const EnvironmentMap map(pts, "{}");
        for (int q = 0; q < 300; ++q) {
            std::uniform_real_distribution<double> u(0.0, 1.0);
            const EnvPoint query{u(rng), u(rng)};
            CHECK(map.nearest_material(query) == brute_nearest(pts, query));
        }
        // Grid-aligned queries provoke plane ties in the kd traversal.
        for (int gx = 0; gx <= 10; ++gx)
            for (int gy = 0; gy <= 10; ++gy) {
                const EnvPoint query{gx * 0.1, gy * 0.1};
                CHECK(map.nearest_material(query) == brute_nearest(pts, query));
            }
    }
}

TEST_CASE("nearest: duplicate points resolve to the lowest id") {
    std::vector<EnvPoint> pts{{0.2, 0.2}, {0.8, 0.8}, {0.8, 0.8}, {0.8, 0.8}};
    const EnvironmentMap map(pts, "{}");
    CHECK(map.nearest_material({0.79, 0.8}) == 1);
}

TEST_CASE("map: constructor validates the unit square and distinctness") {
    CHECK_THROWS_AS(EnvironmentMap({{0.1, 0.2}, {1.2, 0.5}}, "{}"), InputError);
    CHECK_THROWS_AS(EnvironmentMap({{0.1, 0.2}, {-0.01, 0.5}}, "{}"), InputError);
    CHECK_THROWS_AS(EnvironmentMap({{0.4, 0.4}, {0.4, 0.4}}, "{}"), InputError);
    CHECK_THROWS_AS(EnvironmentMap({{0.4, 0.4}}, "{}"), InputError);
    CHECK_THROWS_AS(EnvironmentMap({{0.1, 0.2}, {0.3, 0.4}}, "not json"), InputError);
}

TEST_CASE("map: save/load round trip preserves points, names, provenance") {
    testutil::TempDir tmp("envmap");
    std::mt19937_64 rng(17);
    const auto pts = random_points(20, rng);
    const std::string prov = R"({"encoder":{"latent_dim":20},"tsne":{"perplexity":30.0}})";
    const EnvironmentMap map(pts, prov);
    std::vector<std::string> names;
    for (int i = 0; i < 20; ++i) names.push_back("mat" + std::to_string(i));

    const auto path = tmp.path() / "map.json";
    map.save(path, names);
    const LoadedMap loaded = EnvironmentMap::load(path);

    REQUIRE(loaded.map.size() == 20);
    CHECK(loaded.names == names);
    for (int i = 0; i < 20; ++i) {
        CHECK(loaded.map.point(i).x == pts[i].x);
        CHECK(loaded.map.point(i).y == pts[i].y);
    }
    // Provenance survives as the same JSON object.
    CHECK(loaded.map.provenance_json().find("\"latent_dim\"") != std::string::npos);
    CHECK(loaded.map.provenance_json().find("\"perplexity\"") != std::string::npos);

    // And the reloaded map answers queries identically.
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (int q = 0; q < 100; ++q) {
        const EnvPoint query{u(rng), u(rng)};
        CHECK(loaded.map.nearest_material(query) == map.nearest_material(query));
    }
}

TEST_CASE("map: truncated file fails to load") {
    testutil::TempDir tmp("envmap_trunc");
    std::mt19937_64 rng(19);
    const EnvironmentMap map(random_points(8, rng), "{}");
    std::vector<std::string> names(8, "m");
    for (int i = 0; i < 8; ++i) names[i] += std::to_string(i);
    const auto path = tmp.path() / "map.json";
    map.save(path, names);

    std::ifstream in(path);
    std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    in.close();
    std::ofstream out(path, std::ios::trunc);
    out << text.substr(0, text.size() / 2);
    out.close();

    CHECK_THROWS_AS(EnvironmentMap::load(path), InputError);
    CHECK_THROWS_AS(EnvironmentMap::load(tmp.path() / "absent.json"), InputError);
}

TEST_CASE("map: catalog compatibility check") {
    std::vector<MaterialRecord> recs;
    recs.push_back(constant_material(0, "alpha", 1.5));
    recs.push_back(constant_material(1, "beta", 2.0));
    const MaterialDb db(std::move(recs));

    const EnvironmentMap map({{0.0, 0.0}, {1.0, 1.0}}, "{}");
    const std::vector<std::string> good{"alpha", "beta"};
    CHECK_NOTHROW(map.check_compatible(db, good));
    const std::vector<std::string> renamed{"alpha", "gamma"};
    CHECK_THROWS_AS(map.check_compatible(db, renamed), InputError);
    const std::vector<std::string> short_list{"alpha"};
    CHECK_THROWS_AS(map.check_compatible(db, short_list), InputError);
}

TEST_CASE("map: csv export lists every material with its category") {
    testutil::TempDir tmp("envmap_csv");
    std::vector<MaterialRecord> recs;
    recs.push_back(constant_material(0, "alpha", 1.5, 0.0, MaterialCategory::Metal));
    recs.push_back(constant_material(1, "beta", 2.0, 0.0, MaterialCategory::Transparent));
    const MaterialDb db(std::move(recs));
    const EnvironmentMap map({{0.25, 0.5}, {1.0, 0.0}}, "{}");

    const auto path = tmp.path() / "embedding.csv";
    map.write_csv(path, db);
    std::ifstream in(path);
    std::string header, row0, row1;
    std::getline(in, header);
    std::getline(in, row0);
    std::getline(in, row1);
    CHECK(header == "id,name,category,x,y");
    CHECK(row0 == "0,alpha,Metal,0.25,0.5");
    CHECK(row1 == "1,beta,Transparent,1,0");
}
