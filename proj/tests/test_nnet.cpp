#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>
#include <vector>

#include <Eigen/Dense>

#include "thinopt/nnet.hpp"

using namespace thinopt;

namespace {

Eigen::VectorXd random_vec(int n, std::mt19937_64& rng, double scale = 1.0) {
    std::uniform_real_distribution<double> u(-scale, scale);
    Eigen::VectorXd v(n);
    for (int i = 0; i < n; ++i) v[i] = u(rng);
    return v;
}

// Forward pass re-implemented from the layer equations, independent of Mlp
// internals, for cross-checking.
Eigen::VectorXd reference_forward(const Mlp& net, const Eigen::VectorXd& x) {
    Eigen::VectorXd a = x;
    const std::size_t layers = net.w.size();
    for (std::size_t l = 0; l < layers; ++l) {
        Eigen::VectorXd z = net.w[l] * a + net.b[l];
        if (l + 1 < layers) {
            if (net.hidden_kind() == Mlp::Hidden::Relu)
                a = z.cwiseMax(0.0);
            else
                a = z.array().tanh().matrix();
        } else {
            switch (net.output_kind()) {
            case Mlp::Output::Linear: a = z; break;
            case Mlp::Output::Tanh: a = z.array().tanh().matrix(); break;
            case Mlp::Output::Softmax: {
                const double zmax = z.maxCoeff();
                Eigen::VectorXd e = (z.array() - zmax).exp().matrix();
                a = e / e.sum();
                break;
            }
            }
        }
    }
    return a;
}

} // namespace

TEST_CASE("forward matches an independent layer-by-layer evaluation") {
    std::mt19937_64 rng(42);
    const std::vector<std::vector<int>> shapes{{3, 5, 2}, {4, 8, 8, 3}, {2, 1}};
    for (const auto output : {Mlp::Output::Linear, Mlp::Output::Tanh, Mlp::Output::Softmax}) {
        for (const auto hidden : {Mlp::Hidden::Relu, Mlp::Hidden::Tanh}) {
            for (const auto& widths : shapes) {
                Mlp net(widths, output, hidden);
                net.init(rng, 1.0);
                for (int trial = 0; trial < 10; ++trial) {
                    const Eigen::VectorXd x = random_vec(widths.front(), rng, 2.0);
                    const Eigen::VectorXd got = net.forward(x);
                    const Eigen::VectorXd want = reference_forward(net, x);
                    REQUIRE(got.size() == want.size());
                    for (Eigen::Index i = 0; i < got.size(); ++i)
                        CHECK(got[i] == doctest::Approx(want[i]).epsilon(1e-12));
                }
            }
        }
    }
}

TEST_CASE("softmax output sums to one and stays positive") {
    std::mt19937_64 rng(7);
    Mlp net({4, 16, 6}, Mlp::Output::Softmax);
    net.init(rng, 1.0);
    for (int trial = 0; trial < 200; ++trial) {
        const Eigen::VectorXd p = net.forward(random_vec(4, rng, 5.0));
        CHECK(std::abs(p.sum() - 1.0) <= 1e-12);
        CHECK(p.minCoeff() >= 0.0);
    }
}

TEST_CASE("softmax is shift-invariant and handles large logits") {
    Eigen::VectorXd z(3);
    z << 1000.0, 1000.0, 999.0;
    const Eigen::VectorXd p = softmax(z);
    CHECK(std::isfinite(p.sum()));
    CHECK(p.sum() == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(p[0] == doctest::Approx(p[1]).epsilon(1e-12));
    Eigen::VectorXd shifted = z.array() - 500.0;
    const Eigen::VectorXd q = softmax(shifted);
    for (int i = 0; i < 3; ++i) CHECK(p[i] == doctest::Approx(q[i]).epsilon(1e-12));
}

TEST_CASE("backward gradients match central finite differences") {
    // Loss: L = sum_i c_i * y_i with fixed random c, so dL/dy = c exactly.
    std::mt19937_64 rng(99);
    for (const auto output : {Mlp::Output::Linear, Mlp::Output::Tanh}) {
        Mlp net({3, 6, 4, 2}, output, Mlp::Hidden::Tanh);
        net.init(rng, 1.0);
        const Eigen::VectorXd x = random_vec(3, rng);
        const Eigen::VectorXd c = random_vec(2, rng);

        Mlp::Cache cache;
        net.forward(x, cache);
        Eigen::VectorXd dinput;
        const Eigen::VectorXd dz = net.output_pre_gradient(cache, c);
        const Mlp::Gradients grads = net.backward(cache, dz, &dinput);

        auto loss_at = [&](const Eigen::VectorXd& flat, const Eigen::VectorXd& xin) {
            Mlp probe = net;
            probe.unflatten(flat);
            return c.dot(probe.forward(xin));
        };

        const Eigen::VectorXd theta = net.flatten();
        // Flatten the analytic gradients in the same order for comparison.
        Mlp grad_holder = net;
        grad_holder.w = grads.w;
        grad_holder.b = grads.b;
        const Eigen::VectorXd analytic = grad_holder.flatten();

        const double h = 1e-6;
        for (Eigen::Index i = 0; i < theta.size(); ++i) {
            Eigen::VectorXd plus = theta, minus = theta;
            plus[i] += h;
            minus[i] -= h;
            const double fd = (loss_at(plus, x) - loss_at(minus, x)) / (2.0 * h);
            CHECK(analytic[i] == doctest::Approx(fd).epsilon(1e-5));
        }
        // Input gradient via the same scheme.
        for (Eigen::Index i = 0; i < x.size(); ++i) {
            Eigen::VectorXd plus = x, minus = x;
            plus[i] += h;
            minus[i] -= h;
            const double fd = (loss_at(theta, plus) - loss_at(theta, minus)) / (2.0 * h);
            CHECK(dinput[i] == doctest::Approx(fd).epsilon(1e-5));
        }
    }
}

TEST_CASE("flatten/unflatten round trips and parameter_count is consistent") {
    std::mt19937_64 rng(5);
    Mlp net({4, 7, 3}, Mlp::Output::Linear);
    net.init(rng);
    const Eigen::VectorXd flat = net.flatten();
    CHECK(flat.size() == net.parameter_count());
    CHECK(static_cast<Eigen::Index>(flat.size()) == 4 * 7 + 7 + 7 * 3 + 3);

    Mlp other({4, 7, 3}, Mlp::Output::Linear);
    other.init(rng);
    other.unflatten(flat);
    const Eigen::VectorXd back = other.flatten();
    for (Eigen::Index i = 0; i < flat.size(); ++i) CHECK(back[i] == flat[i]);
    const Eigen::VectorXd x = random_vec(4, rng);
    CHECK((net.forward(x) - other.forward(x)).norm() == 0.0);
}

TEST_CASE("init with small output gain yields near-uniform softmax") {
    std::mt19937_64 rng(21);
    Mlp net({6, 32, 16, 9}, Mlp::Output::Softmax);
    net.init(rng); // default output_gain = 0.01
    for (int trial = 0; trial < 50; ++trial) {
        const Eigen::VectorXd p = net.forward(random_vec(6, rng));
        CHECK(p.maxCoeff() / p.minCoeff() < 1.5);
    }
}

TEST_CASE("adam reduces a simple regression loss") {
    std::mt19937_64 rng(31);
    Mlp net({2, 8, 1}, Mlp::Output::Linear, Mlp::Hidden::Tanh);
    net.init(rng, 1.0);
    Adam opt(net, 1e-2);

    // Fit y = x0 - x1 on a fixed batch.
    std::vector<Eigen::VectorXd> xs;
    std::vector<double> ys;
    for (int i = 0; i < 16; ++i) {
        xs.push_back(random_vec(2, rng));
        ys.push_back(xs.back()[0] - xs.back()[1]);
    }
    auto batch_loss = [&]() {
        double total = 0.0;
        for (std::size_t i = 0; i < xs.size(); ++i) {
            const double e = net.forward(xs[i])[0] - ys[i];
            total += e * e;
        }
        return total / static_cast<double>(xs.size());
    };

    const double before = batch_loss();
    for (int iter = 0; iter < 300; ++iter) {
        Mlp::Gradients grads = net.zero_gradients();
        for (std::size_t i = 0; i < xs.size(); ++i) {
            Mlp::Cache cache;
            const double y = net.forward(xs[i], cache)[0];
            Eigen::VectorXd dz(1);
            dz[0] = 2.0 * (y - ys[i]) / static_cast<double>(xs.size());
            grads.add_scaled(net.backward(cache, dz), 1.0);
        }
        opt.step(net, grads);
    }
    const double after = batch_loss();
    CHECK(opt.steps_taken() == 300);
    CHECK(after < before * 0.05);
    CHECK(after < 1e-3);
}

TEST_CASE("gradient accumulator add_scaled and set_zero behave linearly") {
    std::mt19937_64 rng(77);
    Mlp net({2, 3, 2}, Mlp::Output::Linear);
    net.init(rng, 1.0);
    Mlp::Cache cache;
    const Eigen::VectorXd x = random_vec(2, rng);
    net.forward(x, cache);
    Eigen::VectorXd dz(2);
    dz << 1.0, -0.5;
    const Mlp::Gradients g = net.backward(cache, dz);

    Mlp::Gradients acc = net.zero_gradients();
    acc.add_scaled(g, 2.0);
    acc.add_scaled(g, -1.0);
    for (std::size_t l = 0; l < g.w.size(); ++l) {
        CHECK((acc.w[l] - g.w[l]).norm() <= 1e-15);
        CHECK((acc.b[l] - g.b[l]).norm() <= 1e-15);
    }
    acc.set_zero();
    for (std::size_t l = 0; l < g.w.size(); ++l) {
        CHECK(acc.w[l].norm() == 0.0);
        CHECK(acc.b[l].norm() == 0.0);
    }
}

TEST_CASE("finite() detects corrupted parameters") {
    std::mt19937_64 rng(13);
    Mlp net({2, 4, 1}, Mlp::Output::Linear);
    net.init(rng);
    CHECK(net.finite());
    net.w[0](0, 0) = std::numeric_limits<double>::quiet_NaN();
    CHECK(!net.finite());
}
