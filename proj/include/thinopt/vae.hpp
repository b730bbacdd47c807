#pragma once

#include <cstdint>
#include <vector>

#include <Eigen/Dense>

#include "thinopt/material_db.hpp"
#include "thinopt/nnet.hpp"

namespace thinopt {

// Configuration for the material spectra encoder.
struct EncoderConfig {
    std::vector<double> input_grid;      // empty -> default_input_grid()
    int latent_dim = 20;
    std::vector<int> hidden_dims{128, 64};
    int epochs = 1000;
    double learning_rate = 1e-3;
    // Light prior regularization: heavier weights leave the objective
    // KL-dominated on catalog-sized datasets, starving reconstruction.
    double kl_weight = 1e-4;
    std::uint64_t seed = 0;

    void validate() const;
};

// Uniform 121-point grid over 250-2500 nm.
std::vector<double> default_input_grid();

/* Fully-connected variational autoencoder over a material's concatenated
 * (n, k) feature vector.
 *
 *   encoder trunk: D -> hidden_dims (tanh throughout)
 *   heads:         mu, logvar : hidden_dims.back() -> latent (linear)
 *   sampling:      z = mu + exp(0.5 logvar) * eps,  eps ~ N(0, I)
 *   decoder:       latent -> reversed hidden_dims -> D (tanh hidden, linear out)
 *
 * Loss per sample: mean squared reconstruction error over the D features
 * plus kl_weight * KL(N(mu, sigma^2) || N(0, I)) summed over latent
 * dimensions. Hidden activations are tanh (smooth everywhere), which keeps
 * the finite-difference gradient check exact to first order.
 */
struct VaeModel {
    Mlp enc_trunk, mu_head, logvar_head, decoder;

    VaeModel() = default;
    VaeModel(int input_dim, const std::vector<int>& hidden_dims, int latent_dim,
             std::mt19937_64& rng);

    int input_dim() const { return enc_trunk.widths().front(); }
    int latent_dim() const { return mu_head.widths().back(); }

    // Latent Gaussian parameters for one feature vector.
    void encode(const Eigen::VectorXd& x, Eigen::VectorXd& mu, Eigen::VectorXd& logvar) const;
    Eigen::VectorXd decode(const Eigen::VectorXd& z) const;
    // Deterministic reconstruction through the latent mean (eps = 0).
    Eigen::VectorXd reconstruct(const Eigen::VectorXd& x) const;

    Eigen::VectorXd flatten() const;
    void unflatten(const Eigen::VectorXd& flat);
    Eigen::Index parameter_count() const;
};

struct VaeGradients {
    Mlp::Gradients enc_trunk, mu_head, logvar_head, decoder;
};

struct VaeLossParts {
    double total{0.0};
    double reconstruction{0.0};
    double kl{0.0};
};

// Loss and analytic parameter gradients for a batch X (rows = samples) with
// an explicit noise matrix `eps` (same rows, latent_dim columns). Passing
// the noise explicitly makes the loss a deterministic function of the
// parameters, which the finite-difference check requires.
VaeLossParts vae_loss_and_gradients(const VaeModel& model, const Eigen::MatrixXd& X,
                                    const Eigen::MatrixXd& eps, double kl_weight,
                                    VaeGradients* grads);

// Result of training the encoder on a material catalog.
struct TrainedEncoder {
    VaeModel model;
    EncoderConfig config;           // with input_grid filled in
    Eigen::VectorXd feature_mean;   // per-feature standardization
    Eigen::VectorXd feature_scale;
    Eigen::MatrixXd latents;        // one row of latent means per material id
    std::vector<double> loss_history;   // total training loss per epoch
    std::vector<double> recon_history;  // reconstruction component per epoch
    double final_reconstruction_loss{0.0}; // deterministic (eps=0) pass
    std::vector<double> per_material_reconstruction; // same pass, per sample
};

// Builds the standardized feature matrix for the catalog: row i is material
// i's [n(grid), log1p(k(grid))], each feature standardized over the catalog.
// Returns features and fills mean/scale. Throws naming any material whose
// dispersion does not cover the grid.
Eigen::MatrixXd material_features(const MaterialDb& db, std::span<const double> grid,
                                  Eigen::VectorXd& mean, Eigen::VectorXd& scale);

TrainedEncoder train_encoder(const MaterialDb& db, const EncoderConfig& cfg);

} // namespace thinopt
