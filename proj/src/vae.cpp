#include "thinopt/vae.hpp"

#include <cmath>

#include "thinopt/errors.hpp"

namespace thinopt {

void EncoderConfig::validate() const {
    if (latent_dim < 2) throw InputError("latent_dim must be at least 2");
    if (epochs < 1) throw InputError("epochs must be at least 1");
    if (!(learning_rate > 0.0)) throw InputError("learning_rate must be positive");
    if (kl_weight < 0.0) throw InputError("kl_weight must be non-negative");
    if (hidden_dims.empty()) throw InputError("hidden_dims must be non-empty");
    for (int h : hidden_dims)
        if (h < 1) throw InputError("hidden dimensions must be positive");
}

std::vector<double> default_input_grid() {
    std::vector<double> grid;
    grid.reserve(121);
    for (int i = 0; i < 121; ++i) grid.push_back(250.0 + 2250.0 * i / 120.0);
    return grid;
}

VaeModel::VaeModel(int input_dim, const std::vector<int>& hidden_dims, int latent_dim,
                   std::mt19937_64& rng) {
    std::vector<int> enc_widths{input_dim};
    enc_widths.insert(enc_widths.end(), hidden_dims.begin(), hidden_dims.end());
    enc_trunk = Mlp(enc_widths, Mlp::Output::Tanh, Mlp::Hidden::Tanh);

    mu_head = Mlp({hidden_dims.back(), latent_dim}, Mlp::Output::Linear, Mlp::Hidden::Tanh);
    logvar_head = Mlp({hidden_dims.back(), latent_dim}, Mlp::Output::Linear, Mlp::Hidden::Tanh);

    std::vector<int> dec_widths{latent_dim};
    dec_widths.insert(dec_widths.end(), hidden_dims.rbegin(), hidden_dims.rend());
    dec_widths.push_back(input_dim);
    decoder = Mlp(dec_widths, Mlp::Output::Linear, Mlp::Hidden::Tanh);

    enc_trunk.init(rng, 1.0);
    mu_head.init(rng, 1.0);
    logvar_head.init(rng, 0.1); // start near unit variance
    decoder.init(rng, 1.0);
}

void VaeModel::encode(const Eigen::VectorXd& x, Eigen::VectorXd& mu,
                      Eigen::VectorXd& logvar) const {
    const Eigen::VectorXd h = enc_trunk.forward(x);
    mu = mu_head.forward(h);
    logvar = logvar_head.forward(h);
}

Eigen::VectorXd VaeModel::decode(const Eigen::VectorXd& z) const { return decoder.forward(z); }

Eigen::VectorXd VaeModel::reconstruct(const Eigen::VectorXd& x) const {
    Eigen::VectorXd mu, logvar;
    encode(x, mu, logvar);
    return decode(mu);
}

Eigen::VectorXd VaeModel::flatten() const {
    Eigen::VectorXd flat(parameter_count());
    Eigen::Index off = 0;
    for (const Mlp* part : {&enc_trunk, &mu_head, &logvar_head, &decoder}) {
        flat.segment(off, part->parameter_count()) = part->flatten();
        off += part->parameter_count();
    }
    return flat;
}

void VaeModel::unflatten(const Eigen::VectorXd& flat) {
    if (flat.size() != parameter_count())
        throw InputError("flat parameter vector has wrong length");
    Eigen::Index off = 0;
    for (Mlp* part : {&enc_trunk, &mu_head, &logvar_head, &decoder}) {
        part->unflatten(flat.segment(off, part->parameter_count()));
        off += part->parameter_count();
    }
}

Eigen::Index VaeModel::parameter_count() const {
    return enc_trunk.parameter_count() + mu_head.parameter_count() +
           logvar_head.parameter_count() + decoder.parameter_count();
}

VaeLossParts vae_loss_and_gradients(const VaeModel& model, const Eigen::MatrixXd& X,
                                    const Eigen::MatrixXd& eps, double kl_weight,
                                    VaeGradients* grads) {
    const Eigen::Index n = X.rows();
    const Eigen::Index dim = X.cols();
    if (n == 0) throw InputError("empty training batch");
    if (dim != model.input_dim()) throw InputError("feature width does not match the encoder");
    if (eps.rows() != n || eps.cols() != model.latent_dim())
        throw InputError("noise matrix shape does not match (samples, latent_dim)");

    if (grads) {
        grads->enc_trunk = model.enc_trunk.zero_gradients();
        grads->mu_head = model.mu_head.zero_gradients();
        grads->logvar_head = model.logvar_head.zero_gradients();
        grads->decoder = model.decoder.zero_gradients();
    }

    VaeLossParts parts;
    const double inv_n = 1.0 / static_cast<double>(n);
    const double inv_dim = 1.0 / static_cast<double>(dim);

    Mlp::Cache c_trunk, c_mu, c_lv, c_dec;
    for (Eigen::Index s = 0; s < n; ++s) {
        const Eigen::VectorXd x = X.row(s).transpose();
        const Eigen::VectorXd h = model.enc_trunk.forward(x, c_trunk);
        const Eigen::VectorXd mu = model.mu_head.forward(h, c_mu);
        const Eigen::VectorXd logvar = model.logvar_head.forward(h, c_lv);
        const Eigen::VectorXd sigma = (0.5 * logvar.array()).exp();
        const Eigen::VectorXd e = eps.row(s).transpose();
        const Eigen::VectorXd z = mu + sigma.cwiseProduct(e);
        const Eigen::VectorXd xhat = model.decoder.forward(z, c_dec);

        const Eigen::VectorXd diff = xhat - x;
        const double recon = inv_dim * diff.squaredNorm();
        const double kl =
            0.5 * (mu.array().square() + logvar.array().exp() - logvar.array() - 1.0).sum();
        parts.reconstruction += inv_n * recon;
        parts.kl += inv_n * kl;

        if (!grads) continue;

        // decoder: dL/dxhat -> parameter grads + dL/dz
        const Eigen::VectorXd d_xhat = (2.0 * inv_dim * inv_n) * diff;
        Eigen::VectorXd d_z;
        const Mlp::Gradients g_dec = model.decoder.backward(c_dec, d_xhat, &d_z);
        grads->decoder.add_scaled(g_dec, 1.0);

        // reparameterization + KL terms
        const Eigen::VectorXd d_mu =
            d_z + (kl_weight * inv_n) * mu;
        const Eigen::VectorXd d_logvar =
            (0.5 * d_z.array() * e.array() * sigma.array()) +
            (kl_weight * inv_n) * 0.5 * (logvar.array().exp() - 1.0);

        Eigen::VectorXd d_h_mu, d_h_lv;
        const Mlp::Gradients g_mu = model.mu_head.backward(c_mu, d_mu, &d_h_mu);
        const Mlp::Gradients g_lv = model.logvar_head.backward(c_lv, d_logvar, &d_h_lv);
        grads->mu_head.add_scaled(g_mu, 1.0);
        grads->logvar_head.add_scaled(g_lv, 1.0);

        const Eigen::VectorXd d_h = d_h_mu + d_h_lv;
        const Eigen::VectorXd d_z_trunk = model.enc_trunk.output_pre_gradient(c_trunk, d_h);
        const Mlp::Gradients g_trunk = model.enc_trunk.backward(c_trunk, d_z_trunk);
        grads->enc_trunk.add_scaled(g_trunk, 1.0);
    }
    parts.total = parts.reconstruction + kl_weight * parts.kl;
    return parts;
}

Eigen::MatrixXd material_features(const MaterialDb& db, std::span<const double> grid,
                                  Eigen::VectorXd& mean, Eigen::VectorXd& scale) {
    if (grid.empty()) throw InputError("encoder input grid is empty");
    const auto n_mat = static_cast<Eigen::Index>(db.size());
    const auto g = static_cast<Eigen::Index>(grid.size());
    Eigen::MatrixXd X(n_mat, 2 * g);
    for (Eigen::Index i = 0; i < n_mat; ++i) {
        const auto& rec = db.record(static_cast<int>(i));
        const auto& wl = rec.dispersion.wavelengths_nm;
        for (double lambda : grid) {
            if (lambda < wl.front() || lambda > wl.back())
                throw InputError("material '" + rec.name + "' does not cover " +
                                 std::to_string(lambda) + " nm required by the encoder grid");
        }
        const auto [ns, ks] = rec.resample(grid);
        for (Eigen::Index j = 0; j < g; ++j) {
            X(i, j) = ns[static_cast<std::size_t>(j)];
            X(i, g + j) = std::log1p(ks[static_cast<std::size_t>(j)]);
        }
    }
    mean = X.colwise().mean();
    Eigen::MatrixXd centered = X.rowwise() - mean.transpose();
    scale = (centered.array().square().colwise().sum() / static_cast<double>(n_mat)).sqrt();
    for (Eigen::Index j = 0; j < scale.size(); ++j)
        if (scale(j) < 1e-12) scale(j) = 1.0; // constant feature maps to 0
    centered.array().rowwise() /= scale.transpose().array();
    return centered;
}

TrainedEncoder train_encoder(const MaterialDb& db, const EncoderConfig& cfg_in) {
    EncoderConfig cfg = cfg_in;
    if (cfg.input_grid.empty()) cfg.input_grid = default_input_grid();
    cfg.validate();
    if (db.size() < 10)
        throw InputError("encoder training needs at least 10 materials, got " +
                         std::to_string(db.size()));

    TrainedEncoder out;
    out.config = cfg;
    const Eigen::MatrixXd X =
        material_features(db, cfg.input_grid, out.feature_mean, out.feature_scale);
    const auto n = X.rows();

    std::mt19937_64 rng(cfg.seed);
    out.model = VaeModel(static_cast<int>(X.cols()), cfg.hidden_dims, cfg.latent_dim, rng);

    Adam opt_trunk(out.model.enc_trunk, cfg.learning_rate);
    Adam opt_mu(out.model.mu_head, cfg.learning_rate);
    Adam opt_lv(out.model.logvar_head, cfg.learning_rate);
    Adam opt_dec(out.model.decoder, cfg.learning_rate);

    std::normal_distribution<double> gauss(0.0, 1.0);
    Eigen::MatrixXd eps(n, cfg.latent_dim);
    VaeGradients grads;
    out.loss_history.reserve(static_cast<std::size_t>(cfg.epochs));
    out.recon_history.reserve(static_cast<std::size_t>(cfg.epochs));
    for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
        for (Eigen::Index i = 0; i < eps.rows(); ++i)
            for (Eigen::Index j = 0; j < eps.cols(); ++j) eps(i, j) = gauss(rng);
        const VaeLossParts parts =
            vae_loss_and_gradients(out.model, X, eps, cfg.kl_weight, &grads);
        if (!std::isfinite(parts.total))
            throw TrainingError("encoder loss diverged at epoch " + std::to_string(epoch));
        out.loss_history.push_back(parts.total);
        out.recon_history.push_back(parts.reconstruction);
        opt_trunk.step(out.model.enc_trunk, grads.enc_trunk);
        opt_mu.step(out.model.mu_head, grads.mu_head);
        opt_lv.step(out.model.logvar_head, grads.logvar_head);
        opt_dec.step(out.model.decoder, grads.decoder);
        if (!out.model.enc_trunk.finite() || !out.model.decoder.finite() ||
            !out.model.mu_head.finite() || !out.model.logvar_head.finite())
            throw TrainingError("encoder parameters became non-finite at epoch " +
                                std::to_string(epoch));
    }

    // deterministic reporting pass: latent means and eps=0 reconstruction
    out.latents.resize(n, cfg.latent_dim);
    out.per_material_reconstruction.resize(static_cast<std::size_t>(n));
    double recon_sum = 0.0;
    for (Eigen::Index i = 0; i < n; ++i) {
        Eigen::VectorXd mu, logvar;
        out.model.encode(X.row(i).transpose(), mu, logvar);
        out.latents.row(i) = mu.transpose();
        const Eigen::VectorXd xhat = out.model.decode(mu);
        const double recon =
            (xhat - X.row(i).transpose()).squaredNorm() / static_cast<double>(X.cols());
        out.per_material_reconstruction[static_cast<std::size_t>(i)] = recon;
        recon_sum += recon;
    }
    out.final_reconstruction_loss = recon_sum / static_cast<double>(n);
    return out;
}

} // namespace thinopt
