#include "thinopt/env_map.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <limits>

#include <json.hpp>

#include "thinopt/errors.hpp"

namespace thinopt {

namespace {

double sq(double v) { return v * v; }

void check_unit(const EnvPoint& p, std::size_t i) {
    if (!(p.x >= 0.0 && p.x <= 1.0 && p.y >= 0.0 && p.y <= 1.0) || !std::isfinite(p.x) ||
        !std::isfinite(p.y))
        throw InputError("environment point " + std::to_string(i) + " (" + std::to_string(p.x) +
                         ", " + std::to_string(p.y) + ") outside the unit square");
}

} // namespace

std::vector<EnvPoint> normalize_to_unit_square(std::span<const EnvPoint> raw) {
    if (raw.size() < 2) throw InputError("need at least two points to normalize");
    bool any_distinct = false;
    for (const auto& p : raw) {
        if (!std::isfinite(p.x) || !std::isfinite(p.y))
            throw InputError("non-finite coordinate in embedding output");
        if (p.x != raw[0].x || p.y != raw[0].y) any_distinct = true;
    }
    if (!any_distinct) throw InputError("all embedding points are identical; cannot normalize");

    double xmin = raw[0].x, xmax = raw[0].x, ymin = raw[0].y, ymax = raw[0].y;
    for (const auto& p : raw) {
        xmin = std::min(xmin, p.x);
        xmax = std::max(xmax, p.x);
        ymin = std::min(ymin, p.y);
        ymax = std::max(ymax, p.y);
    }
    const double xr = xmax - xmin, yr = ymax - ymin;
    std::vector<EnvPoint> out;
    out.reserve(raw.size());
    for (const auto& p : raw) {
        EnvPoint q;
        q.x = xr > 0.0 ? (p.x - xmin) / xr : 0.5;
        q.y = yr > 0.0 ? (p.y - ymin) / yr : 0.5;
        // guard against FP overshoot of the closed interval
        q.x = std::clamp(q.x, 0.0, 1.0);
        q.y = std::clamp(q.y, 0.0, 1.0);
        out.push_back(q);
    }
    return out;
}

EnvironmentMap::EnvironmentMap(std::vector<EnvPoint> points, std::string provenance_json)
    : points_(std::move(points)), provenance_(std::move(provenance_json)) {
    if (points_.size() < 2) throw InputError("environment map needs at least two materials");
    bool any_distinct = false;
    for (std::size_t i = 0; i < points_.size(); ++i) {
        check_unit(points_[i], i);
        if (points_[i] != points_[0]) any_distinct = true;
    }
    if (!any_distinct) throw InputError("environment map has no two distinct points");
    if (!provenance_.empty()) {
        const auto parsed = nlohmann::json::parse(provenance_, nullptr, false);
        if (parsed.is_discarded() || !parsed.is_object())
            throw InputError("map provenance is not a JSON object");
    }

    nodes_.reserve(points_.size());
    std::vector<int> ids(points_.size());
    for (std::size_t i = 0; i < ids.size(); ++i) ids[i] = static_cast<int>(i);
    root_ = build_kd(ids, 0, static_cast<int>(ids.size()), 0);
}

int EnvironmentMap::build_kd(std::vector<int>& ids, int lo, int hi, int depth) {
    if (lo >= hi) return -1;
    const int axis = depth % 2;
    const int mid = lo + (hi - lo) / 2;
    std::nth_element(ids.begin() + lo, ids.begin() + mid, ids.begin() + hi,
                     [&](int a, int b) {
                         const double va = axis == 0 ? points_[a].x : points_[a].y;
                         const double vb = axis == 0 ? points_[b].x : points_[b].y;
                         return va < vb || (va == vb && a < b);
                     });
    const int node_index = static_cast<int>(nodes_.size());
    nodes_.push_back({ids[mid], -1, -1, axis});
    // children are built after the push; indices are stable because nodes_
    // only grows
    const int left = build_kd(ids, lo, mid, depth + 1);
    const int right = build_kd(ids, mid + 1, hi, depth + 1);
    nodes_[node_index].left = left;
    nodes_[node_index].right = right;
    return node_index;
}

void EnvironmentMap::query_kd(int node, EnvPoint p, int& best_id, double& best_d2) const {
    if (node < 0) return;
    const KdNode& n = nodes_[node];
    const EnvPoint& q = points_[n.point_index];
    const double d2 = sq(p.x - q.x) + sq(p.y - q.y);
    if (d2 < best_d2 || (d2 == best_d2 && n.point_index < best_id)) {
        best_d2 = d2;
        best_id = n.point_index;
    }
    const double diff = (n.axis == 0 ? p.x - q.x : p.y - q.y);
    const int near = diff < 0.0 ? n.left : n.right;
    const int far = diff < 0.0 ? n.right : n.left;
    query_kd(near, p, best_id, best_d2);
    // visit the far side on exact plane ties too, so equal-distance
    // candidates with lower ids are found
    if (diff * diff <= best_d2) query_kd(far, p, best_id, best_d2);
}

int EnvironmentMap::nearest_material(EnvPoint p) const {
    int best_id = std::numeric_limits<int>::max();
    double best_d2 = std::numeric_limits<double>::infinity();
    query_kd(root_, p, best_id, best_d2);
    return best_id;
}

const EnvPoint& EnvironmentMap::point(int material_id) const {
    if (material_id < 0 || static_cast<std::size_t>(material_id) >= points_.size())
        throw InputError("material id " + std::to_string(material_id) + " not in map");
    return points_[static_cast<std::size_t>(material_id)];
}

void EnvironmentMap::save(const std::filesystem::path& path,
                          std::span<const std::string> names) const {
    if (names.size() != points_.size())
        throw InputError("name count does not match map point count");
    nlohmann::ordered_json doc;
    auto& pts = doc["points"] = nlohmann::ordered_json::array();
    for (std::size_t i = 0; i < points_.size(); ++i) {
        nlohmann::ordered_json row;
        row["id"] = static_cast<int>(i);
        row["name"] = names[i];
        row["x"] = points_[i].x;
        row["y"] = points_[i].y;
        pts.push_back(std::move(row));
    }
    doc["provenance"] = provenance_.empty()
                            ? nlohmann::ordered_json::object()
                            : nlohmann::ordered_json::parse(provenance_);
    std::ofstream out(path);
    if (!out) throw InputError("cannot write '" + path.string() + "'");
    out << doc.dump(2) << '\n';
}

LoadedMap EnvironmentMap::load(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw InputError("cannot open map file '" + path.string() + "'");
    nlohmann::ordered_json doc = nlohmann::ordered_json::parse(in, nullptr, false);
    if (doc.is_discarded())
        throw InputError("map file '" + path.string() + "' is not valid JSON");
    if (!doc.is_object() || !doc.contains("points") || !doc["points"].is_array())
        throw InputError("map file '" + path.string() + "' lacks a points array");

    const auto& pts = doc["points"];
    std::vector<EnvPoint> points(pts.size());
    std::vector<std::string> names(pts.size());
    std::vector<bool> seen(pts.size(), false);
    for (const auto& row : pts) {
        if (!row.is_object() || !row.contains("id") || !row.contains("x") || !row.contains("y") ||
            !row.contains("name"))
            throw InputError("map file '" + path.string() + "' has a malformed point row");
        const int id = row["id"].get<int>();
        if (id < 0 || static_cast<std::size_t>(id) >= pts.size() || seen[static_cast<std::size_t>(id)])
            throw InputError("map file '" + path.string() + "' has missing or duplicate id " +
                             std::to_string(id));
        seen[static_cast<std::size_t>(id)] = true;
        points[static_cast<std::size_t>(id)] = {row["x"].get<double>(), row["y"].get<double>()};
        names[static_cast<std::size_t>(id)] = row["name"].get<std::string>();
    }
    std::string provenance;
    if (doc.contains("provenance")) provenance = doc["provenance"].dump();
    return {EnvironmentMap(std::move(points), std::move(provenance)), std::move(names)};
}

void EnvironmentMap::check_compatible(const MaterialDb& db,
                                      std::span<const std::string> names) const {
    if (points_.size() != db.size() || names.size() != db.size())
        throw InputError("environment map covers " + std::to_string(points_.size()) +
                         " materials but the catalog has " + std::to_string(db.size()));
    for (std::size_t i = 0; i < names.size(); ++i) {
        if (db.record(static_cast<int>(i)).name != names[i])
            throw InputError("environment map entry " + std::to_string(i) + " is '" + names[i] +
                             "' but the catalog has '" + db.record(static_cast<int>(i)).name +
                             "'; rebuild the map for this catalog");
    }
}

void EnvironmentMap::write_csv(const std::filesystem::path& path, const MaterialDb& db) const {
    if (points_.size() != db.size())
        throw InputError("map/catalog size mismatch in CSV export");
    std::ofstream out(path);
    if (!out) throw InputError("cannot write '" + path.string() + "'");
    out << "id,name,category,x,y\n";
    char buf[64];
    auto fmt = [&buf](double v) {
        const auto res = std::to_chars(buf, buf + sizeof(buf), v);
        return std::string(buf, res.ptr);
    };
    for (std::size_t i = 0; i < points_.size(); ++i) {
        const auto& rec = db.record(static_cast<int>(i));
        out << i << ',' << rec.name << ',' << to_string(rec.category) << ',' << fmt(points_[i].x)
            << ',' << fmt(points_[i].y) << '\n';
    }
}

} // namespace thinopt
