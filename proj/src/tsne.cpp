#include "thinopt/tsne.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <string>

#include "thinopt/errors.hpp"

namespace thinopt {

namespace {

constexpr double kProbFloor = 1e-12;

// Squared Euclidean distances between rows of X.
Eigen::MatrixXd pairwise_sq_dist(const Eigen::MatrixXd& x) {
    const Eigen::VectorXd sq = x.rowwise().squaredNorm();
    Eigen::MatrixXd d2 = sq.replicate(1, x.rows()) + sq.transpose().replicate(x.rows(), 1)
        - 2.0 * x * x.transpose();
    d2 = d2.cwiseMax(0.0);
    d2.diagonal().setZero();
    return d2;
}

// Conditional distribution p_{j|i} for one row given precision beta; returns
// its Shannon entropy (nats).
double row_affinity(const Eigen::MatrixXd& d2, int i, double beta, Eigen::VectorXd& p) {
    const int n = static_cast<int>(d2.rows());
    p.resize(n);
    double sum = 0.0;
    for (int j = 0; j < n; ++j) {
        if (j == i) {
            p(j) = 0.0;
            continue;
        }
        p(j) = std::exp(-beta * d2(i, j));
        sum += p(j);
    }
    if (sum <= 0.0 || !std::isfinite(sum)) {
        // Degenerate row: all mass collapsed numerically. Spread uniformly.
        for (int j = 0; j < n; ++j) p(j) = (j == i) ? 0.0 : 1.0 / (n - 1);
        return std::log(static_cast<double>(n - 1));
    }
    double entropy = 0.0;
    for (int j = 0; j < n; ++j) {
        if (j == i) continue;
        p(j) /= sum;
        if (p(j) > 0.0) entropy -= p(j) * std::log(p(j));
    }
    return entropy;
}

// Bisect the per-point precision so the row entropy matches log(perplexity).
Eigen::MatrixXd conditional_affinities(const Eigen::MatrixXd& d2, double perplexity) {
    const int n = static_cast<int>(d2.rows());
    const double target_entropy = std::log(perplexity);
    Eigen::MatrixXd p = Eigen::MatrixXd::Zero(n, n);
    Eigen::VectorXd row;
    for (int i = 0; i < n; ++i) {
        double beta = 1.0;
        double lo = 0.0;
        double hi = std::numeric_limits<double>::infinity();
        double entropy = row_affinity(d2, i, beta, row);
        for (int iter = 0; iter < 200 && std::abs(entropy - target_entropy) > 1e-7; ++iter) {
            if (entropy > target_entropy) {
                lo = beta;
                beta = std::isfinite(hi) ? 0.5 * (lo + hi) : beta * 2.0;
            } else {
                hi = beta;
                beta = (lo > 0.0) ? 0.5 * (lo + hi) : beta * 0.5;
            }
            entropy = row_affinity(d2, i, beta, row);
        }
        p.row(i) = row.transpose();
    }
    return p;
}

double kl_divergence(const Eigen::MatrixXd& p, const Eigen::MatrixXd& q) {
    double kl = 0.0;
    for (int i = 0; i < p.rows(); ++i)
        for (int j = 0; j < p.cols(); ++j) {
            if (i == j) continue;
            const double pij = p(i, j);
            if (pij > 0.0) kl += pij * std::log(pij / q(i, j));
        }
    return kl;
}

} // namespace

void TsneConfig::validate() const {
    if (perplexity < 2.0) throw InputError("t-SNE perplexity must be at least 2");
    if (iterations < 1) throw InputError("t-SNE iteration count must be positive");
    if (exaggeration_iters < 0 || exaggeration_iters >= iterations)
        throw InputError("t-SNE exaggeration phase must end before the last iteration");
    if (exaggeration < 1.0) throw InputError("t-SNE exaggeration factor must be >= 1");
    if (learning_rate <= 0.0) throw InputError("t-SNE learning rate must be positive");
    if (momentum_initial < 0.0 || momentum_initial >= 1.0 || momentum_final < 0.0
        || momentum_final >= 1.0)
        throw InputError("t-SNE momentum values must lie in [0, 1)");
    if (init_sigma <= 0.0) throw InputError("t-SNE init sigma must be positive");
    if (kl_check_interval < 1) throw InputError("t-SNE KL check interval must be positive");
}

TsneResult embed_tsne(const Eigen::MatrixXd& latents, const TsneConfig& cfg) {
    cfg.validate();
    const int n = static_cast<int>(latents.rows());
    if (n < 7) throw InputError("t-SNE needs at least 7 points (perplexity floor of 2)");
    if (!latents.allFinite()) throw InputError("t-SNE input contains non-finite values");

    Eigen::MatrixXd d2 = pairwise_sq_dist(latents);
    double max_off = 0.0;
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j)
            if (i != j) max_off = std::max(max_off, d2(i, j));
    if (max_off <= 0.0)
        throw TrainingError("t-SNE input has identical rows; bandwidth calibration "
                            "cannot converge");

    const double perplexity = std::max(2.0, std::min(cfg.perplexity, (n - 1) / 3.0));

    // High-dimensional affinities: symmetrized conditionals.
    Eigen::MatrixXd p_cond = conditional_affinities(d2, perplexity);
    Eigen::MatrixXd p = (p_cond + p_cond.transpose()) / (2.0 * n);
    p = p.cwiseMax(kProbFloor);
    p.diagonal().setZero();

    std::mt19937_64 rng(cfg.seed);
    std::normal_distribution<double> gauss(0.0, cfg.init_sigma);
    Eigen::MatrixXd y(n, 2);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < 2; ++j) y(i, j) = gauss(rng);

    Eigen::MatrixXd velocity = Eigen::MatrixXd::Zero(n, 2);
    Eigen::MatrixXd gains = Eigen::MatrixXd::Ones(n, 2);
    double lr = cfg.learning_rate;

    // Checkpoint state for the KL backtracking guarantee.
    TsneResult result;
    double best_kl = std::numeric_limits<double>::infinity();
    Eigen::MatrixXd best_y, best_velocity, best_gains;

    Eigen::MatrixXd num(n, n), q(n, n), grad(n, 2);
    for (int iter = 0; iter < cfg.iterations; ++iter) {
        const bool exaggerating = iter < cfg.exaggeration_iters;
        const double p_scale = exaggerating ? cfg.exaggeration : 1.0;
        const double momentum =
            iter < cfg.momentum_switch_iter ? cfg.momentum_initial : cfg.momentum_final;

        // Student-t affinities in the embedding.
        for (int i = 0; i < n; ++i) {
            num(i, i) = 0.0;
            for (int j = i + 1; j < n; ++j) {
                const double dx = y(i, 0) - y(j, 0);
                const double dy = y(i, 1) - y(j, 1);
                num(i, j) = num(j, i) = 1.0 / (1.0 + dx * dx + dy * dy);
            }
        }
        const double num_sum = num.sum();
        q = (num / num_sum).cwiseMax(kProbFloor);
        q.diagonal().setZero();

        grad.setZero();
        for (int i = 0; i < n; ++i) {
            for (int j = 0; j < n; ++j) {
                if (i == j) continue;
                const double coeff = 4.0 * (p_scale * p(i, j) - q(i, j)) * num(i, j);
                grad(i, 0) += coeff * (y(i, 0) - y(j, 0));
                grad(i, 1) += coeff * (y(i, 1) - y(j, 1));
            }
        }

        for (int i = 0; i < n; ++i)
            for (int j = 0; j < 2; ++j) {
                const bool same_sign = (grad(i, j) > 0.0) == (velocity(i, j) > 0.0);
                gains(i, j) = same_sign ? std::max(gains(i, j) * 0.8, 0.01)
                                        : gains(i, j) + 0.2;
            }
        velocity = momentum * velocity - lr * gains.cwiseProduct(grad);
        y += velocity;
        y.rowwise() -= y.colwise().mean();
        if (!y.allFinite()) throw TrainingError("t-SNE embedding diverged to non-finite values");

        // KL checkpoints once exaggeration is over. A regression reverts the
        // optimizer to the previous checkpoint and halves the step size, so
        // the recorded history never increases.
        const int post = iter + 1 - cfg.exaggeration_iters;
        if (post > 0 && (post % cfg.kl_check_interval == 0 || iter + 1 == cfg.iterations)) {
            for (int i = 0; i < n; ++i) {
                num(i, i) = 0.0;
                for (int j = i + 1; j < n; ++j) {
                    const double dx = y(i, 0) - y(j, 0);
                    const double dy = y(i, 1) - y(j, 1);
                    num(i, j) = num(j, i) = 1.0 / (1.0 + dx * dx + dy * dy);
                }
            }
            q = (num / num.sum()).cwiseMax(kProbFloor);
            q.diagonal().setZero();
            const double kl = kl_divergence(p, q);
            if (kl <= best_kl) {
                best_kl = kl;
                best_y = y;
                best_velocity = velocity;
                best_gains = gains;
            } else {
                y = best_y;
                velocity = best_velocity;
                gains = best_gains;
                lr *= 0.5;
            }
            result.kl_history.push_back(best_kl);
        }
    }

    result.coords = best_y;
    result.final_kl = best_kl;
    return result;
}

} // namespace thinopt
