#include "thinopt/nnet.hpp"

#include <cmath>

#include "thinopt/errors.hpp"

namespace thinopt {

void Mlp::Gradients::add_scaled(const Gradients& other, double scale) {
    for (std::size_t l = 0; l < w.size(); ++l) {
        w[l] += scale * other.w[l];
        b[l] += scale * other.b[l];
    }
}

void Mlp::Gradients::set_zero() {
    for (auto& m : w) m.setZero();
    for (auto& v : b) v.setZero();
}

Mlp::Mlp(std::vector<int> widths, Output output, Hidden hidden)
    : widths_(std::move(widths)), output_(output), hidden_(hidden) {
    if (widths_.size() < 2) throw InputError("network needs at least input and output widths");
    for (int width : widths_)
        if (width < 1) throw InputError("network layer width must be positive");
    for (std::size_t l = 0; l + 1 < widths_.size(); ++l) {
        w.emplace_back(Eigen::MatrixXd::Zero(widths_[l + 1], widths_[l]));
        b.emplace_back(Eigen::VectorXd::Zero(widths_[l + 1]));
    }
}

void Mlp::init(std::mt19937_64& rng, double output_gain) {
    for (std::size_t l = 0; l < w.size(); ++l) {
        const double limit = std::sqrt(6.0 / (widths_[l] + widths_[l + 1]));
        std::uniform_real_distribution<double> u(-limit, limit);
        for (Eigen::Index i = 0; i < w[l].rows(); ++i)
            for (Eigen::Index j = 0; j < w[l].cols(); ++j) w[l](i, j) = u(rng);
        b[l].setZero();
        if (l + 1 == w.size()) w[l] *= output_gain;
    }
}

Eigen::VectorXd softmax(const Eigen::VectorXd& z) {
    const Eigen::VectorXd shifted = z.array() - z.maxCoeff();
    Eigen::VectorXd e = shifted.array().exp();
    return e / e.sum();
}

Eigen::VectorXd Mlp::forward(const Eigen::VectorXd& x) const {
    Cache cache;
    return forward(x, cache);
}

Eigen::VectorXd Mlp::forward(const Eigen::VectorXd& x, Cache& cache) const {
    if (x.size() != widths_.front())
        throw InputError("network input size " + std::to_string(x.size()) + " != " +
                         std::to_string(widths_.front()));
    cache.input = x;
    cache.pre.resize(w.size());
    cache.post.resize(w.size());
    Eigen::VectorXd a = x;
    for (std::size_t l = 0; l < w.size(); ++l) {
        cache.pre[l] = w[l] * a + b[l];
        if (l + 1 < w.size()) {
            cache.post[l] = hidden_ == Hidden::Relu ? cache.pre[l].cwiseMax(0.0).eval()
                                                    : cache.pre[l].array().tanh().matrix().eval();
        } else {
            switch (output_) {
            case Output::Linear: cache.post[l] = cache.pre[l]; break;
            case Output::Tanh: cache.post[l] = cache.pre[l].array().tanh(); break;
            case Output::Softmax: cache.post[l] = softmax(cache.pre[l]); break;
            }
        }
        a = cache.post[l];
    }
    return a;
}

Mlp::Gradients Mlp::backward(const Cache& cache, const Eigen::VectorXd& dloss_dzout,
                             Eigen::VectorXd* dloss_dinput) const {
    Gradients g = zero_gradients();
    Eigen::VectorXd delta = dloss_dzout; // dL/dz at the current layer
    for (std::size_t l = w.size(); l-- > 0;) {
        const Eigen::VectorXd& below = l == 0 ? cache.input : cache.post[l - 1];
        g.w[l] = delta * below.transpose();
        g.b[l] = delta;
        if (l > 0) {
            const Eigen::VectorXd da = w[l].transpose() * delta;
            if (hidden_ == Hidden::Relu) {
                // gate: pass gradient where the pre-activation was positive
                delta = (cache.pre[l - 1].array() > 0.0).select(da.array(), 0.0);
            } else {
                delta = da.array() * (1.0 - cache.post[l - 1].array().square());
            }
        } else if (dloss_dinput) {
            *dloss_dinput = w[0].transpose() * delta;
        }
    }
    return g;
}

Eigen::VectorXd Mlp::output_pre_gradient(const Cache& cache,
                                         const Eigen::VectorXd& dloss_dy) const {
    switch (output_) {
    case Output::Linear: return dloss_dy;
    case Output::Tanh:
        return (dloss_dy.array() * (1.0 - cache.post.back().array().square())).matrix();
    case Output::Softmax: break;
    }
    throw InputError("softmax heads fold their Jacobian at the loss site");
}

Mlp::Gradients Mlp::zero_gradients() const {
    Gradients g;
    for (std::size_t l = 0; l < w.size(); ++l) {
        g.w.emplace_back(Eigen::MatrixXd::Zero(w[l].rows(), w[l].cols()));
        g.b.emplace_back(Eigen::VectorXd::Zero(b[l].size()));
    }
    return g;
}

Eigen::VectorXd Mlp::flatten() const {
    Eigen::VectorXd flat(parameter_count());
    Eigen::Index off = 0;
    for (std::size_t l = 0; l < w.size(); ++l) {
        for (Eigen::Index j = 0; j < w[l].cols(); ++j)
            for (Eigen::Index i = 0; i < w[l].rows(); ++i) flat(off++) = w[l](i, j);
        for (Eigen::Index i = 0; i < b[l].size(); ++i) flat(off++) = b[l](i);
    }
    return flat;
}

void Mlp::unflatten(const Eigen::VectorXd& flat) {
    if (flat.size() != parameter_count())
        throw InputError("flat parameter vector has wrong length");
    Eigen::Index off = 0;
    for (std::size_t l = 0; l < w.size(); ++l) {
        for (Eigen::Index j = 0; j < w[l].cols(); ++j)
            for (Eigen::Index i = 0; i < w[l].rows(); ++i) w[l](i, j) = flat(off++);
        for (Eigen::Index i = 0; i < b[l].size(); ++i) b[l](i) = flat(off++);
    }
}

Eigen::Index Mlp::parameter_count() const {
    Eigen::Index n = 0;
    for (std::size_t l = 0; l < w.size(); ++l) n += w[l].size() + b[l].size();
    return n;
}

bool Mlp::finite() const {
    for (const auto& m : w)
        if (!m.allFinite()) return false;
    for (const auto& v : b)
        if (!v.allFinite()) return false;
    return true;
}

Adam::Adam(const Mlp& net, double learning_rate, double beta1, double beta2, double epsilon)
    : lr_(learning_rate), beta1_(beta1), beta2_(beta2), eps_(epsilon),
      m_(net.zero_gradients()), v_(net.zero_gradients()) {}

void Adam::step(Mlp& net, const Mlp::Gradients& grads) {
    ++t_;
    const double bc1 = 1.0 - std::pow(beta1_, static_cast<double>(t_));
    const double bc2 = 1.0 - std::pow(beta2_, static_cast<double>(t_));
    for (std::size_t l = 0; l < net.w.size(); ++l) {
        m_.w[l] = beta1_ * m_.w[l] + (1.0 - beta1_) * grads.w[l];
        v_.w[l] = beta2_ * v_.w[l] + (1.0 - beta2_) * grads.w[l].cwiseProduct(grads.w[l]);
        net.w[l].array() -=
            lr_ * (m_.w[l].array() / bc1) / ((v_.w[l].array() / bc2).sqrt() + eps_);

        m_.b[l] = beta1_ * m_.b[l] + (1.0 - beta1_) * grads.b[l];
        v_.b[l] = beta2_ * v_.b[l] + (1.0 - beta2_) * grads.b[l].cwiseProduct(grads.b[l]);
        net.b[l].array() -=
            lr_ * (m_.b[l].array() / bc1) / ((v_.b[l].array() / bc2).sqrt() + eps_);
    }
}

} // namespace thinopt
