#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <random>
#include <vector>

#include <Eigen/Dense>

#include "thinopt/errors.hpp"
#include "thinopt/tsne.hpp"

using namespace thinopt;

namespace {

// Three well-separated Gaussian clusters in a higher-dimensional space.
Eigen::MatrixXd clustered_latents(int per_cluster, int dim, std::mt19937_64& rng,
                                  std::vector<int>* labels) {
    std::normal_distribution<double> noise(0.0, 0.1);
    Eigen::MatrixXd X(3 * per_cluster, dim);
    for (int c = 0; c < 3; ++c) {
        Eigen::VectorXd center = Eigen::VectorXd::Zero(dim);
        center[c % dim] = 6.0 * (c + 1);
        center[(c + 1) % dim] = -4.0 * c;
        for (int i = 0; i < per_cluster; ++i) {
            const int row = c * per_cluster + i;
            for (int j = 0; j < dim; ++j) X(row, j) = center[j] + noise(rng);
            if (labels) labels->push_back(c);
        }
    }
    return X;
}

// Fraction of points whose k nearest embedded neighbors share their label.
double knn_label_agreement(const Eigen::MatrixXd& coords, const std::vector<int>& labels, int k) {
    const int n = static_cast<int>(coords.rows());
    int agree = 0, total = 0;
    for (int i = 0; i < n; ++i) {
        std::vector<std::pair<double, int>> d;
        d.reserve(n - 1);
        for (int j = 0; j < n; ++j) {
            if (j == i) continue;
            d.emplace_back((coords.row(i) - coords.row(j)).squaredNorm(), j);
        }
        std::partial_sort(d.begin(), d.begin() + k, d.end());
        for (int m = 0; m < k; ++m) {
            ++total;
            if (labels[d[m].second] == labels[i]) ++agree;
        }
    }
    return static_cast<double>(agree) / total;
}

} // namespace

TEST_CASE("three latent clusters stay separated in the plane") {
    std::mt19937_64 rng(2024);
    std::vector<int> labels;
    const Eigen::MatrixXd X = clustered_latents(15, 5, rng, &labels);

    TsneConfig cfg;
    cfg.perplexity = 10.0;
    cfg.iterations = 600;
    cfg.seed = 3;
    const TsneResult res = embed_tsne(X, cfg);

    REQUIRE(res.coords.rows() == 45);
    REQUIRE(res.coords.cols() == 2);
    CHECK(knn_label_agreement(res.coords, labels, 5) >= 0.90);
}

TEST_CASE("recorded divergence never increases between checkpoints") {
    std::mt19937_64 rng(5);
    std::vector<int> labels;
    const Eigen::MatrixXd X = clustered_latents(10, 4, rng, &labels);

    TsneConfig cfg;
    cfg.perplexity = 8.0;
    cfg.iterations = 500;
    cfg.seed = 11;
    const TsneResult res = embed_tsne(X, cfg);

    REQUIRE(!res.kl_history.empty());
    for (std::size_t i = 1; i < res.kl_history.size(); ++i)
        CHECK(res.kl_history[i] <= res.kl_history[i - 1]);
    CHECK(res.final_kl == res.kl_history.back());
    CHECK(std::isfinite(res.final_kl));
    CHECK(res.final_kl >= 0.0);
}

TEST_CASE("embedding is deterministic for a fixed seed") {
    std::mt19937_64 rng(9);
    const Eigen::MatrixXd X = clustered_latents(8, 3, rng, nullptr);

    TsneConfig cfg;
    cfg.iterations = 300;
    cfg.seed = 42;
    const TsneResult a = embed_tsne(X, cfg);
    const TsneResult b = embed_tsne(X, cfg);
    CHECK((a.coords - b.coords).norm() == 0.0);
    CHECK(a.final_kl == b.final_kl);

    TsneConfig other = cfg;
    other.seed = 43;
    const TsneResult c = embed_tsne(X, other);
    CHECK((a.coords - c.coords).norm() > 0.0);
}

TEST_CASE("identical latent rows are rejected") {
    Eigen::MatrixXd X = Eigen::MatrixXd::Ones(12, 4);
    TsneConfig cfg;
    cfg.iterations = 50;
    cfg.exaggeration_iters = 10;
    CHECK_THROWS_AS(embed_tsne(X, cfg), TrainingError);
}

TEST_CASE("tiny and invalid inputs are rejected") {
    TsneConfig cfg;
    CHECK_THROWS_AS(embed_tsne(Eigen::MatrixXd::Random(3, 4), cfg), InputError);
    Eigen::MatrixXd X = Eigen::MatrixXd::Random(10, 4);
    X(2, 1) = std::numeric_limits<double>::quiet_NaN();
    CHECK_THROWS_AS(embed_tsne(X, cfg), InputError);
}

TEST_CASE("perplexity is capped for small inputs instead of failing") {
    std::mt19937_64 rng(31);
    Eigen::MatrixXd X(8, 3);
    std::normal_distribution<double> g(0.0, 1.0);
    for (Eigen::Index r = 0; r < X.rows(); ++r)
        for (Eigen::Index c = 0; c < X.cols(); ++c) X(r, c) = g(rng);

    TsneConfig cfg;
    cfg.perplexity = 30.0; // far above (N-1)/3
    cfg.iterations = 200;
    cfg.exaggeration_iters = 50;
    cfg.seed = 1;
    const TsneResult res = embed_tsne(X, cfg);
    CHECK(res.coords.rows() == 8);
    CHECK(std::isfinite(res.final_kl));
}

TEST_CASE("config validation rejects nonsense") {
    TsneConfig cfg;
    cfg.perplexity = 0.0;
    CHECK_THROWS_AS(cfg.validate(), InputError);
    cfg = TsneConfig{};
    cfg.iterations = 0;
    CHECK_THROWS_AS(cfg.validate(), InputError);
    cfg = TsneConfig{};
    cfg.exaggeration_iters = -1;
    CHECK_THROWS_AS(cfg.validate(), InputError);
    cfg = TsneConfig{};
    cfg.learning_rate = -5.0;
    CHECK_THROWS_AS(cfg.validate(), InputError);
    cfg = TsneConfig{};
    CHECK_NOTHROW(cfg.validate());
}
