#include "thinopt/material_db.hpp"

#include <algorithm>
#include <array>
#include <charconv>
#include <cmath>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

namespace thinopt {

namespace {

constexpr std::array<std::pair<std::string_view, MaterialCategory>, 6> kCategoryNames = {{
    {"Metal", MaterialCategory::Metal},
    {"Alloy", MaterialCategory::Alloy},
    {"Semiconductor", MaterialCategory::Semiconductor},
    {"Dielectric", MaterialCategory::Dielectric},
    {"Transparent", MaterialCategory::Transparent},
    {"Other", MaterialCategory::Other},
}};

std::string format_double(double v) {
    char buf[32];
    auto res = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, res.ptr);
}

} // namespace

MaterialCategory category_from_string(std::string_view s) {
    for (const auto& [name, cat] : kCategoryNames) {
        if (name == s) return cat;
    }
    throw InputError("unknown material category '" + std::string(s) + "'");
}

std::string_view to_string(MaterialCategory c) {
    for (const auto& [name, cat] : kCategoryNames) {
        if (cat == c) return name;
    }
    return "Other";
}

void DispersionTable::validate(const std::string& context) const {
    if (wavelengths_nm.size() < 2)
        throw InputError(context + ": dispersion table needs at least 2 samples");
    if (n.size() != wavelengths_nm.size() || k.size() != wavelengths_nm.size())
        throw InputError(context + ": wavelength/n/k column lengths differ");
    for (std::size_t i = 0; i < wavelengths_nm.size(); ++i) {
        const double w = wavelengths_nm[i];
        if (!(w > 0.0) || !std::isfinite(w))
            throw InputError(context + ": wavelength " + format_double(w) + " not positive finite");
        if (i > 0 && !(w > wavelengths_nm[i - 1]))
            throw InputError(context + ": wavelengths not strictly increasing at sample " +
                             std::to_string(i) + " (" + format_double(w) + " after " +
                             format_double(wavelengths_nm[i - 1]) + ")");
        if (!(n[i] > 0.0) || !std::isfinite(n[i]))
            throw InputError(context + ": n must be positive finite at sample " + std::to_string(i));
        if (!(k[i] >= 0.0) || !std::isfinite(k[i]))
            throw InputError(context + ": k must be non-negative finite at sample " + std::to_string(i));
    }
}

std::complex<double> MaterialRecord::refractive_index(double lambda_nm) const {
    const auto& w = dispersion.wavelengths_nm;
    if (lambda_nm < w.front() || lambda_nm > w.back())
        throw InputError("wavelength " + format_double(lambda_nm) + " nm outside table range [" +
                         format_double(w.front()) + ", " + format_double(w.back()) + "] of '" +
                         name + "'");
    auto it = std::lower_bound(w.begin(), w.end(), lambda_nm);
    std::size_t hi = static_cast<std::size_t>(it - w.begin());
    if (hi == 0) return {dispersion.n[0], dispersion.k[0]};
    if (w[hi] == lambda_nm) return {dispersion.n[hi], dispersion.k[hi]};
    std::size_t lo = hi - 1;
    const double t = (lambda_nm - w[lo]) / (w[hi] - w[lo]);
    return {dispersion.n[lo] + t * (dispersion.n[hi] - dispersion.n[lo]),
            dispersion.k[lo] + t * (dispersion.k[hi] - dispersion.k[lo])};
}

std::pair<std::vector<double>, std::vector<double>>
MaterialRecord::resample(std::span<const double> grid_nm) const {
    std::vector<double> ns, ks;
    ns.reserve(grid_nm.size());
    ks.reserve(grid_nm.size());
    for (double lambda : grid_nm) {
        const auto nk = refractive_index(lambda);
        ns.push_back(nk.real());
        ks.push_back(nk.imag());
    }
    return {std::move(ns), std::move(ks)};
}

MaterialDb::MaterialDb(std::vector<MaterialRecord> records) : records_(std::move(records)) {
    if (records_.empty()) throw InputError("no materials found");
    std::sort(records_.begin(), records_.end(),
              [](const MaterialRecord& a, const MaterialRecord& b) { return a.id < b.id; });
    std::set<std::string> names;
    double lo = 0.0, hi = 1e300;
    for (std::size_t i = 0; i < records_.size(); ++i) {
        const auto& r = records_[i];
        if (r.id != static_cast<int>(i))
            throw InputError("material ids must be contiguous 0..N-1; got id " +
                             std::to_string(r.id) + " at position " + std::to_string(i));
        if (r.name.empty()) throw InputError("material with id " + std::to_string(r.id) + " has empty name");
        if (!names.insert(r.name).second)
            throw InputError("duplicate material name '" + r.name + "'");
        r.dispersion.validate(r.name);
        lo = std::max(lo, r.dispersion.min_wavelength());
        hi = std::min(hi, r.dispersion.max_wavelength());
    }
    support_ = {lo, hi};
}

MaterialDb MaterialDb::load(const std::filesystem::path& dir) {
    if (!std::filesystem::is_directory(dir))
        throw InputError("material database path '" + dir.string() + "' is not a directory");

    std::vector<std::filesystem::path> files;
    for (const auto& entry : std::filesystem::directory_iterator(dir)) {
        if (entry.is_regular_file() && entry.path().extension() == ".nk")
            files.push_back(entry.path());
    }
    std::sort(files.begin(), files.end());
    if (files.empty()) throw InputError("no materials found in '" + dir.string() + "'");

    std::vector<MaterialRecord> records;
    records.reserve(files.size());
    for (const auto& file : files) {
        std::ifstream in(file);
        if (!in) throw InputError("cannot open '" + file.string() + "'");

        MaterialRecord rec;
        std::string line;
        int line_no = 0;
        bool have_header = false;
        while (std::getline(in, line)) {
            ++line_no;
            if (line.empty()) continue;
            if (line[0] == '#') {
                // First comment line carries the metadata header.
                if (!have_header && line.find("name=") != std::string::npos) {
                    std::istringstream ss(line.substr(1));
                    std::string tok;
                    while (ss >> tok) {
                        if (tok.rfind("name=", 0) == 0) rec.name = tok.substr(5);
                        else if (tok.rfind("category=", 0) == 0) {
                            try {
                                rec.category = category_from_string(tok.substr(9));
                            } catch (const InputError&) {
                                throw InputError(file.string() + ":" + std::to_string(line_no) +
                                                 ": unknown category '" + tok.substr(9) + "'");
                            }
                        }
                    }
                    have_header = true;
                }
                continue;
            }
            std::istringstream ss(line);
            double w = 0.0, nv = 0.0, kv = 0.0;
            if (!(ss >> w >> nv >> kv))
                throw InputError(file.string() + ":" + std::to_string(line_no) +
                                 ": expected 'lambda_nm n k', got '" + line + "'");
            rec.dispersion.wavelengths_nm.push_back(w);
            rec.dispersion.n.push_back(nv);
            rec.dispersion.k.push_back(kv);
        }
        if (!have_header)
            throw InputError(file.string() + ": missing '# name=... category=...' header");
        if (rec.name.empty())
            throw InputError(file.string() + ": empty material name in header");
        try {
            rec.dispersion.validate(rec.name);
        } catch (const InputError& e) {
            throw InputError(file.string() + ": " + e.what());
        }
        records.push_back(std::move(rec));
    }

    std::sort(records.begin(), records.end(),
              [](const MaterialRecord& a, const MaterialRecord& b) { return a.name < b.name; });
    for (std::size_t i = 0; i < records.size(); ++i) {
        if (i > 0 && records[i].name == records[i - 1].name)
            throw InputError("duplicate material name '" + records[i].name + "'");
        records[i].id = static_cast<int>(i);
    }
    return MaterialDb(std::move(records));
}

void MaterialDb::save(const std::filesystem::path& dir) const {
    std::filesystem::create_directories(dir);
    for (const auto& r : records_) {
        std::ofstream out(dir / (r.name + ".nk"));
        if (!out) throw InputError("cannot write to '" + (dir / (r.name + ".nk")).string() + "'");
        out << "# name=" << r.name << " category=" << to_string(r.category) << "\n";
        for (std::size_t i = 0; i < r.dispersion.wavelengths_nm.size(); ++i) {
            out << format_double(r.dispersion.wavelengths_nm[i]) << ' '
                << format_double(r.dispersion.n[i]) << ' '
                << format_double(r.dispersion.k[i]) << '\n';
        }
    }
}

const MaterialRecord& MaterialDb::record(int id) const {
    if (id < 0 || id >= static_cast<int>(records_.size()))
        throw InputError("material id " + std::to_string(id) + " out of range");
    return records_[static_cast<std::size_t>(id)];
}

const MaterialRecord* MaterialDb::find(std::string_view name) const {
    for (const auto& r : records_)
        if (r.name == name) return &r;
    return nullptr;
}

namespace {

std::size_t edit_distance(std::string_view a, std::string_view b) {
    std::vector<std::size_t> prev(b.size() + 1), cur(b.size() + 1);
    for (std::size_t j = 0; j <= b.size(); ++j) prev[j] = j;
    for (std::size_t i = 1; i <= a.size(); ++i) {
        cur[0] = i;
        for (std::size_t j = 1; j <= b.size(); ++j) {
            const std::size_t sub = prev[j - 1] + (std::tolower(a[i - 1]) == std::tolower(b[j - 1]) ? 0 : 1);
            cur[j] = std::min({prev[j] + 1, cur[j - 1] + 1, sub});
        }
        std::swap(prev, cur);
    }
    return prev[b.size()];
}

} // namespace

std::vector<std::string> MaterialDb::suggest(std::string_view name, std::size_t count) const {
    std::vector<std::pair<std::size_t, std::string>> scored;
    scored.reserve(records_.size());
    for (const auto& r : records_) scored.emplace_back(edit_distance(name, r.name), r.name);
    std::stable_sort(scored.begin(), scored.end(),
                     [](const auto& a, const auto& b) { return a.first < b.first; });
    std::vector<std::string> out;
    for (std::size_t i = 0; i < std::min(count, scored.size()); ++i) out.push_back(scored[i].second);
    return out;
}

} // namespace thinopt
