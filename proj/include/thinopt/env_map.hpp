#pragma once

#include <filesystem>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "thinopt/material_db.hpp"

namespace thinopt {

// A material's position in the normalized 2D environment space.
struct EnvPoint {
    double x{0.0}, y{0.0};

    bool operator==(const EnvPoint&) const = default;
};

// Min-max scales each axis onto [0,1]. A degenerate axis (zero range) maps
// to 0.5 for every point. Idempotent on already-normalized nondegenerate
// inputs. Requires at least two distinct points.
std::vector<EnvPoint> normalize_to_unit_square(std::span<const EnvPoint> raw);

struct LoadedMap;

// Immutable map from material ids to unit-square positions with a kd-tree
// for nearest-material queries. Position i belongs to material id i.
//
// Provenance is an opaque JSON object (serialized text) describing how the
// map was built (encoder config, t-SNE parameters, seeds); it is carried
// through save/load byte-for-byte but never interpreted here.
class EnvironmentMap {
  public:
    EnvironmentMap(std::vector<EnvPoint> points, std::string provenance_json);

    // Material id whose point minimizes Euclidean distance to p; exact ties
    // resolve to the lowest id. Safe for unrestricted concurrent use.
    int nearest_material(EnvPoint p) const;

    const std::vector<EnvPoint>& points() const { return points_; }
    const EnvPoint& point(int material_id) const;
    const std::string& provenance_json() const { return provenance_; }
    std::size_t size() const { return points_.size(); }

    // Structured-text (JSON) round trip: points, names, provenance.
    // `names` length must equal the point count; load() re-checks all
    // invariants and returns the stored names for catalog cross-checking.
    void save(const std::filesystem::path& path, std::span<const std::string> names) const;
    static LoadedMap load(const std::filesystem::path& path);

    // Verifies this map was built over `db` (same size, matching names).
    void check_compatible(const MaterialDb& db, std::span<const std::string> names) const;

    // CSV export: header `id,name,category,x,y`, one row per material.
    void write_csv(const std::filesystem::path& path, const MaterialDb& db) const;

  private:
    struct KdNode {
        int point_index;
        int left{-1}, right{-1};
        int axis{0};
    };

    int build_kd(std::vector<int>& ids, int lo, int hi, int depth);
    void query_kd(int node, EnvPoint p, int& best_id, double& best_d2) const;

    std::vector<EnvPoint> points_;
    std::string provenance_;
    std::vector<KdNode> nodes_;
    int root_{-1};
};

struct LoadedMap {
    EnvironmentMap map;
    std::vector<std::string> names;
};

} // namespace thinopt
