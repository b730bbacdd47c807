#pragma once

#include <vector>

#include <Eigen/Dense>

#include "thinopt/env_map.hpp"
#include "thinopt/material_db.hpp"
#include "thinopt/tsne.hpp"
#include "thinopt/vae.hpp"

namespace thinopt {

struct EmbeddingConfig {
    EncoderConfig encoder;
    TsneConfig tsne;
};

struct EmbeddingResult {
    EnvironmentMap map;              // unit-square points + provenance
    std::vector<std::string> names;  // material_id -> name, aligned with db
    TrainedEncoder encoder;
    TsneResult tsne;
    double mean_silhouette{0.0};     // over macro-category labels (see below)
};

// Macro grouping for the coherence statistic: 0 = Metal+Alloy,
// 1 = Semiconductor+Dielectric, 2 = Transparent, -1 = excluded (Other).
int macro_label(MaterialCategory c);

// Mean silhouette of `coords` (one row per point) under integer labels;
// points with label < 0 or in singleton clusters are excluded. Throws
// InputError when fewer than two clusters remain.
double mean_silhouette(const Eigen::MatrixXd& coords, const std::vector<int>& labels);

// Full pipeline: train the encoder, t-SNE the latent means, normalize to the
// unit square, and assemble the map with a provenance record of both stages.
// Deterministic given the seeds in `cfg`.
EmbeddingResult build_environment_map(const MaterialDb& db, const EmbeddingConfig& cfg);

} // namespace thinopt
