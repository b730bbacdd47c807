#pragma once

#include <cstdint>
#include <vector>

#include <Eigen/Dense>

namespace thinopt {

// Exact (O(N^2)) t-SNE over latent codes.
struct TsneConfig {
    double perplexity = 30.0;        // capped at (N-1)/3
    int iterations = 1000;
    int exaggeration_iters = 250;    // early exaggeration phase length
    double exaggeration = 12.0;
    double learning_rate = 200.0;
    double momentum_initial = 0.5;
    double momentum_final = 0.8;
    int momentum_switch_iter = 250;
    double init_sigma = 1e-4;        // Gaussian init scale
    int kl_check_interval = 50;      // KL checkpoints after exaggeration
    std::uint64_t seed = 0;

    void validate() const;
};

struct TsneResult {
    Eigen::MatrixXd coords;          // N x 2
    // KL(P||Q) at every checkpoint after the exaggeration phase ends.
    // Non-increasing by construction: if a checkpoint regresses, the state
    // reverts to the previous checkpoint and the learning rate halves.
    std::vector<double> kl_history;
    double final_kl{0.0};
};

// Pairwise affinities use per-point bandwidths solved by bisection to match
// the (capped) perplexity; P is symmetrized; low-dimensional affinities are
// Student-t; KL(P||Q) is minimized by gradient descent with momentum and
// per-parameter gains. Deterministic given the seed. Throws TrainingError
// when all latents are identical (bandwidth calibration cannot converge).
TsneResult embed_tsne(const Eigen::MatrixXd& latents, const TsneConfig& cfg);

} // namespace thinopt
