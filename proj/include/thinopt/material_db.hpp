#pragma once

#include <complex>
#include <filesystem>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "thinopt/errors.hpp"

namespace thinopt {

enum class MaterialCategory {
    Metal,
    Alloy,
    Semiconductor,
    Dielectric,
    Transparent,
    Other,
};

MaterialCategory category_from_string(std::string_view s);
std::string_view to_string(MaterialCategory c);

// Tabulated complex refractive index n(lambda) + i k(lambda).
// Wavelengths in nanometers, strictly increasing; n > 0, k >= 0 (passive media).
struct DispersionTable {
    std::vector<double> wavelengths_nm;
    std::vector<double> n;
    std::vector<double> k;

    // Throws InputError naming `context` if any invariant is violated.
    void validate(const std::string& context) const;

    double min_wavelength() const { return wavelengths_nm.front(); }
    double max_wavelength() const { return wavelengths_nm.back(); }
};

struct MaterialRecord {
    int id = -1;
    std::string name;
    MaterialCategory category = MaterialCategory::Other;
    DispersionTable dispersion;

    // Linear interpolation of n and k independently; exact at table samples.
    // Throws InputError if lambda lies outside the table (no extrapolation).
    std::complex<double> refractive_index(double lambda_nm) const;

    // Element-wise refractive_index over `grid`. Returns (n values, k values).
    std::pair<std::vector<double>, std::vector<double>>
    resample(std::span<const double> grid_nm) const;
};

// Immutable after construction; safe for unrestricted concurrent reads.
class MaterialDb {
public:
    explicit MaterialDb(std::vector<MaterialRecord> records);

    // Loads one dispersion file per material from `dir` (*.nk files, format:
    // line 1 "# name=<str> category=<cat>", then "lambda_nm n k" rows).
    // Records are sorted by name and assigned ids 0..N-1.
    static MaterialDb load(const std::filesystem::path& dir);

    // Writes one file per record into `dir` in the load() format.
    void save(const std::filesystem::path& dir) const;

    std::size_t size() const { return records_.size(); }
    std::span<const MaterialRecord> records() const { return records_; }
    const MaterialRecord& record(int id) const;
    const MaterialRecord* find(std::string_view name) const; // nullptr if absent

    // Intersection of all record supports: [max of mins, min of maxes].
    std::pair<double, double> wavelength_support() const { return support_; }

    // Closest catalog names by edit distance, for error messages.
    std::vector<std::string> suggest(std::string_view name, std::size_t count = 3) const;

private:
    std::vector<MaterialRecord> records_;
    std::pair<double, double> support_{0.0, 0.0};
};

} // namespace thinopt
