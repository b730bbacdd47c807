#include "thinopt/embedding.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>

#include <nlohmann/json.hpp>

#include "thinopt/errors.hpp"

namespace thinopt {

int macro_label(MaterialCategory c) {
    switch (c) {
        case MaterialCategory::Metal:
        case MaterialCategory::Alloy: return 0;
        case MaterialCategory::Semiconductor:
        case MaterialCategory::Dielectric: return 1;
        case MaterialCategory::Transparent: return 2;
        default: return -1;
    }
}

double mean_silhouette(const Eigen::MatrixXd& coords, const std::vector<int>& labels) {
    const int n = static_cast<int>(coords.rows());
    if (static_cast<int>(labels.size()) != n)
        throw InputError("silhouette: one label per coordinate row required");

    std::map<int, int> cluster_sizes;
    for (int lab : labels)
        if (lab >= 0) ++cluster_sizes[lab];

    int usable_clusters = 0;
    for (const auto& [lab, size] : cluster_sizes)
        if (size >= 2) ++usable_clusters;
    if (usable_clusters < 2)
        throw InputError("silhouette needs at least two clusters with two or more points");

    double total = 0.0;
    int counted = 0;
    for (int i = 0; i < n; ++i) {
        const int lab = labels[i];
        if (lab < 0 || cluster_sizes[lab] < 2) continue;

        std::map<int, double> dist_sum;
        std::map<int, int> dist_count;
        for (int j = 0; j < n; ++j) {
            if (j == i || labels[j] < 0) continue;
            const double d = (coords.row(i) - coords.row(j)).norm();
            dist_sum[labels[j]] += d;
            ++dist_count[labels[j]];
        }

        const double a = dist_sum[lab] / dist_count[lab];
        double b = std::numeric_limits<double>::infinity();
        for (const auto& [other, sum] : dist_sum) {
            if (other == lab) continue;
            b = std::min(b, sum / dist_count[other]);
        }
        const double denom = std::max(a, b);
        total += denom > 0.0 ? (b - a) / denom : 0.0;
        ++counted;
    }
    return total / counted;
}

EmbeddingResult build_environment_map(const MaterialDb& db, const EmbeddingConfig& cfg) {
    TrainedEncoder encoder = train_encoder(db, cfg.encoder);
    TsneResult tsne = embed_tsne(encoder.latents, cfg.tsne);

    std::vector<EnvPoint> raw(db.size());
    for (std::size_t i = 0; i < db.size(); ++i)
        raw[i] = {tsne.coords(static_cast<int>(i), 0), tsne.coords(static_cast<int>(i), 1)};
    std::vector<EnvPoint> unit = normalize_to_unit_square(raw);

    nlohmann::ordered_json prov;
    prov["encoder"] = {
        {"architecture", "fully-connected"},
        {"input_grid_nm", cfg.encoder.input_grid},
        {"latent_dim", cfg.encoder.latent_dim},
        {"hidden_dims", cfg.encoder.hidden_dims},
        {"epochs", cfg.encoder.epochs},
        {"learning_rate", cfg.encoder.learning_rate},
        {"kl_weight", cfg.encoder.kl_weight},
        {"seed", cfg.encoder.seed},
        {"final_reconstruction_loss", encoder.final_reconstruction_loss},
    };
    prov["tsne"] = {
        {"perplexity", cfg.tsne.perplexity},
        {"iterations", cfg.tsne.iterations},
        {"exaggeration", cfg.tsne.exaggeration},
        {"exaggeration_iters", cfg.tsne.exaggeration_iters},
        {"learning_rate", cfg.tsne.learning_rate},
        {"init_sigma", cfg.tsne.init_sigma},
        {"seed", cfg.tsne.seed},
        {"final_kl", tsne.final_kl},
    };
    prov["materials"] = db.size();

    EmbeddingResult result{EnvironmentMap(unit, prov.dump()),
                           {},
                           std::move(encoder),
                           std::move(tsne),
                           0.0};
    result.names.reserve(db.size());
    for (const MaterialRecord& rec : db.records()) result.names.push_back(rec.name);

    Eigen::MatrixXd coords(db.size(), 2);
    std::vector<int> labels(db.size());
    std::map<int, int> sizes;
    for (std::size_t i = 0; i < db.size(); ++i) {
        coords(static_cast<int>(i), 0) = unit[i].x;
        coords(static_cast<int>(i), 1) = unit[i].y;
        labels[i] = macro_label(db.records()[i].category);
        if (labels[i] >= 0) ++sizes[labels[i]];
    }
    int usable = 0;
    for (const auto& [lab, size] : sizes)
        if (size >= 2) ++usable;
    // Catalogs spanning a single macro-category have no silhouette to report.
    result.mean_silhouette =
        usable >= 2 ? mean_silhouette(coords, labels) : std::numeric_limits<double>::quiet_NaN();
    return result;
}

} // namespace thinopt
