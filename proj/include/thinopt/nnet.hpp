#pragma once

#include <cstdint>
#include <random>
#include <vector>

#include <Eigen/Dense>

namespace thinopt {

/* Small fully-connected network with manual backpropagation.
 *
 * Layout: widths = {in, h1, ..., out}; hidden layers use rectified-linear
 * or tanh activations, the output layer is linear, tanh, or softmax.
 * backward() takes the loss gradient with respect to the final
 * PRE-activation z_out; output_pre_gradient() converts dLoss/dy into that
 * form for tanh outputs. Softmax heads fold their own Jacobian into
 * dLoss/dz at the call site (the numerically stable route for log-prob and
 * entropy losses), so output_pre_gradient() rejects them.
 */
class Mlp {
  public:
    enum class Output { Linear, Tanh, Softmax };
    enum class Hidden { Relu, Tanh };

    struct Gradients {
        std::vector<Eigen::MatrixXd> w;
        std::vector<Eigen::VectorXd> b;

        void add_scaled(const Gradients& other, double scale);
        void set_zero();
    };

    struct Cache {
        Eigen::VectorXd input;
        std::vector<Eigen::VectorXd> pre;  // z_l per layer
        std::vector<Eigen::VectorXd> post; // activation(z_l) per layer
    };

    Mlp() = default;
    Mlp(std::vector<int> widths, Output output, Hidden hidden = Hidden::Relu);

    // Xavier-uniform hidden init; the output layer is scaled down by
    // `output_gain` (small values keep initial policies near-uniform and
    // initial values near zero).
    void init(std::mt19937_64& rng, double output_gain = 0.01);

    // Output activation (softmax applied for Output::Softmax).
    Eigen::VectorXd forward(const Eigen::VectorXd& x) const;
    Eigen::VectorXd forward(const Eigen::VectorXd& x, Cache& cache) const;

    // dLoss/dparams given dLoss/dz_out; also returns dLoss/dinput if asked.
    Gradients backward(const Cache& cache, const Eigen::VectorXd& dloss_dzout,
                       Eigen::VectorXd* dloss_dinput = nullptr) const;

    // Applies the output activation's Jacobian: dLoss/dy -> dLoss/dz_out.
    Eigen::VectorXd output_pre_gradient(const Cache& cache, const Eigen::VectorXd& dloss_dy) const;

    Gradients zero_gradients() const;

    // Flat parameter vector (weights then biases, layer by layer); used by
    // checkpoints and finite-difference tests.
    Eigen::VectorXd flatten() const;
    void unflatten(const Eigen::VectorXd& flat);
    Eigen::Index parameter_count() const;

    bool finite() const;

    const std::vector<int>& widths() const { return widths_; }
    Output output_kind() const { return output_; }
    Hidden hidden_kind() const { return hidden_; }

    std::vector<Eigen::MatrixXd> w;
    std::vector<Eigen::VectorXd> b;

  private:
    std::vector<int> widths_;
    Output output_{Output::Linear};
    Hidden hidden_{Hidden::Relu};
};

Eigen::VectorXd softmax(const Eigen::VectorXd& z);

// Adaptive-moment gradient descent over an Mlp's parameters.
class Adam {
  public:
    Adam() = default;
    Adam(const Mlp& net, double learning_rate, double beta1 = 0.9, double beta2 = 0.999,
         double epsilon = 1e-8);

    void step(Mlp& net, const Mlp::Gradients& grads);

    std::uint64_t steps_taken() const { return t_; }
    double learning_rate() const { return lr_; }

  private:
    double lr_{1e-4}, beta1_{0.9}, beta2_{0.999}, eps_{1e-8};
    std::uint64_t t_{0};
    Mlp::Gradients m_, v_;
};

} // namespace thinopt
