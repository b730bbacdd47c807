#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <fstream>

#include "test_util.hpp"
#include "thinopt/material_db.hpp"

using namespace thinopt;
using testutil::TempDir;

namespace {

void write_file(const std::filesystem::path& p, const std::string& body) {
    std::ofstream out(p);
    out << body;
}

// Independent interpolation oracle: linear scan instead of binary search.
double lerp_scan(const std::vector<double>& xs, const std::vector<double>& ys, double x) {
    for (std::size_t i = 0; i + 1 < xs.size(); ++i) {
        if (x >= xs[i] && x <= xs[i + 1]) {
            if (xs[i + 1] == x) return ys[i + 1];
            return ys[i] + (ys[i + 1] - ys[i]) * (x - xs[i]) / (xs[i + 1] - xs[i]);
        }
    }
    throw std::logic_error("oracle query out of range");
}

MaterialRecord wavy_material() {
    MaterialRecord r;
    r.id = 0;
    r.name = "wavy";
    r.category = MaterialCategory::Dielectric;
    for (int i = 0; i <= 60; ++i) {
        const double w = 200.0 + 50.0 * i; // 200..3200 nm
        r.dispersion.wavelengths_nm.push_back(w);
        r.dispersion.n.push_back(1.8 + 0.5 * std::sin(w / 400.0));
        r.dispersion.k.push_back(0.2 * std::abs(std::cos(w / 300.0)));
    }
    return r;
}

} // namespace

TEST_CASE("load_database: three valid files get ids 0,1,2 sorted by name") {
    TempDir dir("db3");
    write_file(dir.path() / "b.nk", "# name=BMat category=Metal\n400 1.1 2.0\n800 1.2 3.0\n");
    write_file(dir.path() / "a.nk", "# name=AMat category=Dielectric\n300 2.0 0\n900 2.1 0\n");
    write_file(dir.path() / "c.nk", "# name=CMat category=Transparent\n350 1.5 0\n700 1.4 0\n");

    const MaterialDb db = MaterialDb::load(dir.path());
    REQUIRE(db.size() == 3);
    CHECK(db.record(0).name == "AMat");
    CHECK(db.record(1).name == "BMat");
    CHECK(db.record(2).name == "CMat");
    CHECK(db.record(1).category == MaterialCategory::Metal);
    // support = intersection of [400,800], [300,900], [350,700]
    CHECK(db.wavelength_support().first == doctest::Approx(400.0));
    CHECK(db.wavelength_support().second == doctest::Approx(700.0));
}

TEST_CASE("load_database: decreasing wavelengths rejected naming the file") {
    TempDir dir("dbbad");
    write_file(dir.path() / "bad.nk", "# name=Bad category=Metal\n800 1.0 1.0\n400 1.0 1.0\n");
    try {
        MaterialDb::load(dir.path());
        FAIL("expected InputError");
    } catch (const InputError& e) {
        CHECK(std::string(e.what()).find("bad.nk") != std::string::npos);
        CHECK(std::string(e.what()).find("increasing") != std::string::npos);
    }
}

TEST_CASE("load_database: duplicate names and empty directories rejected") {
    TempDir dir("dbdup");
    CHECK_THROWS_AS(MaterialDb::load(dir.path()), InputError);

    write_file(dir.path() / "x.nk", "# name=Same category=Metal\n400 1 1\n800 1 1\n");
    write_file(dir.path() / "y.nk", "# name=Same category=Metal\n400 1 1\n800 1 1\n");
    CHECK_THROWS_AS(MaterialDb::load(dir.path()), InputError);
}

TEST_CASE("load_database: malformed rows and headers are named") {
    TempDir dir("dbrow");
    write_file(dir.path() / "m.nk", "# name=M category=Metal\n400 1.0\n");
    CHECK_THROWS_WITH_AS(MaterialDb::load(dir.path()),
                         doctest::Contains("m.nk:2"), InputError);

    std::filesystem::remove(dir.path() / "m.nk");
    write_file(dir.path() / "h.nk", "400 1.0 0.0\n800 1.0 0.0\n");
    CHECK_THROWS_WITH_AS(MaterialDb::load(dir.path()),
                         doctest::Contains("header"), InputError);
}

TEST_CASE("refractive_index: exact sample, midpoint, out of range") {
    MaterialRecord r;
    r.id = 0;
    r.name = "two-point";
    r.dispersion.wavelengths_nm = {500, 600};
    r.dispersion.n = {2.0, 2.2};
    r.dispersion.k = {0.0, 0.0};

    CHECK(r.refractive_index(500.0) == std::complex<double>(2.0, 0.0));
    CHECK(r.refractive_index(550.0).real() == doctest::Approx(2.1).epsilon(1e-12));
    CHECK(r.refractive_index(550.0).imag() == 0.0);
    CHECK(r.refractive_index(600.0) == std::complex<double>(2.2, 0.0));
    CHECK_THROWS_AS(r.refractive_index(700.0), InputError);
    CHECK_THROWS_AS(r.refractive_index(499.999), InputError);
}

TEST_CASE("resample: identity on own grid, empty grid, oracle agreement") {
    const MaterialRecord r = wavy_material();

    auto [ns, ks] = r.resample(r.dispersion.wavelengths_nm);
    CHECK(ns == r.dispersion.n);
    CHECK(ks == r.dispersion.k);

    auto [en, ek] = r.resample(std::vector<double>{});
    CHECK(en.empty());
    CHECK(ek.empty());

    // 121-point uniform grid over 250..2500, each point vs the scan oracle.
    const auto grid = testutil::uniform_grid(250.0, 2500.0, 121);
    auto [gn, gk] = r.resample(grid);
    REQUIRE(gn.size() == 121);
    for (std::size_t i = 0; i < grid.size(); ++i) {
        CHECK(gn[i] == doctest::Approx(lerp_scan(r.dispersion.wavelengths_nm, r.dispersion.n,
                                                 grid[i])).epsilon(1e-12));
        CHECK(gk[i] == doctest::Approx(lerp_scan(r.dispersion.wavelengths_nm, r.dispersion.k,
                                                 grid[i])).epsilon(1e-12));
    }

    CHECK_THROWS_AS(r.resample(std::vector<double>{100.0}), InputError);
}

TEST_CASE("interpolation stays inside the bracketing samples") {
    const MaterialRecord r = wavy_material();
    std::mt19937_64 rng(7);
    std::uniform_real_distribution<double> u(200.0, 3200.0);
    const auto& w = r.dispersion.wavelengths_nm;
    for (int trial = 0; trial < 2000; ++trial) {
        const double x = u(rng);
        auto it = std::upper_bound(w.begin(), w.end(), x);
        if (it == w.begin() || it == w.end()) continue;
        const std::size_t hi = static_cast<std::size_t>(it - w.begin());
        const auto nk = r.refractive_index(x);
        const auto [nlo, nhi] = std::minmax(r.dispersion.n[hi - 1], r.dispersion.n[hi]);
        const auto [klo, khi] = std::minmax(r.dispersion.k[hi - 1], r.dispersion.k[hi]);
        CHECK(nk.real() >= nlo - 1e-12);
        CHECK(nk.real() <= nhi + 1e-12);
        CHECK(nk.imag() >= klo - 1e-12);
        CHECK(nk.imag() <= khi + 1e-12);
    }
}

TEST_CASE("refractive_index is continuous in lambda") {
    const MaterialRecord r = wavy_material();
    std::mt19937_64 rng(11);
    std::uniform_real_distribution<double> u(250.0, 3100.0);
    for (int trial = 0; trial < 500; ++trial) {
        const double x = u(rng);
        const auto a = r.refractive_index(x);
        const auto b = r.refractive_index(x + 1e-6);
        CHECK(std::abs(a - b) < 1e-6);
    }
}

TEST_CASE("save then load round-trips the database") {
    TempDir src("rt_src");
    write_file(src.path() / "a.nk",
               "# name=Alpha category=Semiconductor\n"
               "400 3.5 0.01\n500 3.45 0.002\n900 3.4 0\n");
    write_file(src.path() / "b.nk", "# name=Beta category=Transparent\n300 1.45 0\n2000 1.43 0\n");

    const MaterialDb db1 = MaterialDb::load(src.path());
    TempDir dst("rt_dst");
    db1.save(dst.path());
    const MaterialDb db2 = MaterialDb::load(dst.path());

    REQUIRE(db1.size() == db2.size());
    for (std::size_t i = 0; i < db1.size(); ++i) {
        const auto& a = db1.records()[i];
        const auto& b = db2.records()[i];
        CHECK(a.id == b.id);
        CHECK(a.name == b.name);
        CHECK(a.category == b.category);
        CHECK(a.dispersion.wavelengths_nm == b.dispersion.wavelengths_nm);
        CHECK(a.dispersion.n == b.dispersion.n);
        CHECK(a.dispersion.k == b.dispersion.k);
    }
    CHECK(db1.wavelength_support() == db2.wavelength_support());
}

TEST_CASE("suggest returns closest names") {
    std::vector<MaterialRecord> recs;
    recs.push_back(testutil::constant_material(0, "TiO2", 2.4));
    recs.push_back(testutil::constant_material(1, "SiO2", 1.45));
    recs.push_back(testutil::constant_material(2, "Cu", 1.0, 2.0));
    const MaterialDb db(std::move(recs));
    const auto names = db.suggest("TiO3", 2);
    REQUIRE(names.size() == 2);
    CHECK(names[0] == "TiO2");
}

TEST_CASE("invariant violations in hand-built records are rejected") {
    auto bad_n = testutil::constant_material(0, "badn", 1.5);
    bad_n.dispersion.n[0] = -1.0;
    CHECK_THROWS_AS(MaterialDb({bad_n}), InputError);

    auto bad_k = testutil::constant_material(0, "badk", 1.5);
    bad_k.dispersion.k[1] = -0.25;
    CHECK_THROWS_AS(MaterialDb({bad_k}), InputError);

    auto short_table = testutil::constant_material(0, "short", 1.5);
    short_table.dispersion.wavelengths_nm.pop_back();
    short_table.dispersion.n.pop_back();
    short_table.dispersion.k.pop_back();
    CHECK_THROWS_AS(MaterialDb({short_table}), InputError);
}
