#pragma once

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <vector>

#include "evomap/cppn.hpp"
#include "evomap/rng.hpp"

namespace evomap {

// Fully connected autoencoder: rectifier hidden layers, identity output,
// trained with Adam on mean squared error. Layer sizes are a constructor
// parameter so tiny networks can be built for numeric checks; the terrain
// autoencoder is 200-64-32-64-200.
class Mlp {
public:
    explicit Mlp(std::vector<int> layer_sizes) : sizes_(std::move(layer_sizes)) {
        if (sizes_.size() < 2) throw std::invalid_argument("need at least two layers");
        const int n = num_layers();
        weights_.resize(n);
        biases_.resize(n);
        m_w_.resize(n);
        v_w_.resize(n);
        m_b_.resize(n);
        v_b_.resize(n);
        for (int l = 0; l < n; ++l) {
            weights_[l].setZero(sizes_[l + 1], sizes_[l]);
            biases_[l].setZero(sizes_[l + 1]);
            m_w_[l].setZero(sizes_[l + 1], sizes_[l]);
            v_w_[l].setZero(sizes_[l + 1], sizes_[l]);
            m_b_[l].setZero(sizes_[l + 1]);
            v_b_[l].setZero(sizes_[l + 1]);
        }
    }

    static std::vector<int> terrain_layer_sizes() { return {200, 64, 32, 64, 200}; }

    int num_layers() const { return static_cast<int>(sizes_.size()) - 1; }
    const std::vector<int>& layer_sizes() const { return sizes_; }
    int input_size() const { return sizes_.front(); }
    int output_size() const { return sizes_.back(); }

    // Uniform fan-in scaled initialization.
    void init_weights(Rng& rng) {
        for (int l = 0; l < num_layers(); ++l) {
            double limit = 1.0 / std::sqrt(static_cast<double>(sizes_[l]));
            for (int r = 0; r < weights_[l].rows(); ++r)
                for (int c = 0; c < weights_[l].cols(); ++c)
                    weights_[l](r, c) = rng.uniform(-limit, limit);
            biases_[l].setZero();
        }
        for (int l = 0; l < num_layers(); ++l) {
            m_w_[l].setZero();
            v_w_[l].setZero();
            m_b_[l].setZero();
            v_b_[l].setZero();
        }
        adam_step_ = 0;
    }

    Eigen::VectorXd forward(const Eigen::VectorXd& x) const {
        Eigen::VectorXd a = x;
        for (int l = 0; l < num_layers(); ++l) {
            a = (weights_[l] * a + biases_[l]).eval();
            if (l + 1 < num_layers()) a = a.cwiseMax(0.0);
        }
        return a;
    }

    // MSE over a batch of columns.
    double loss(const Eigen::MatrixXd& inputs, const Eigen::MatrixXd& targets) const {
        double total = 0.0;
        for (Eigen::Index i = 0; i < inputs.cols(); ++i)
            total += (forward(inputs.col(i)) - targets.col(i)).squaredNorm();
        return total / static_cast<double>(inputs.cols() * targets.rows());
    }

    // One Adam step on the mean-squared-error of a batch (inputs as columns).
    void train_batch(const Eigen::MatrixXd& inputs, const Eigen::MatrixXd& targets,
                     double lr) {
        std::vector<Eigen::MatrixXd> grad_w;
        std::vector<Eigen::VectorXd> grad_b;
        gradients(inputs, targets, grad_w, grad_b);
        adam_update(grad_w, grad_b, lr);
    }

    // Analytic gradient of the batch MSE, also used by finite-difference checks.
    void gradients(const Eigen::MatrixXd& inputs, const Eigen::MatrixXd& targets,
                   std::vector<Eigen::MatrixXd>& grad_w,
                   std::vector<Eigen::VectorXd>& grad_b) const {
        const int n = num_layers();
        grad_w.assign(n, Eigen::MatrixXd());
        grad_b.assign(n, Eigen::VectorXd());
        for (int l = 0; l < n; ++l) {
            grad_w[l].setZero(weights_[l].rows(), weights_[l].cols());
            grad_b[l].setZero(biases_[l].size());
        }
        const double batch = static_cast<double>(inputs.cols());
        for (Eigen::Index i = 0; i < inputs.cols(); ++i) {
            std::vector<Eigen::VectorXd> act(n + 1);
            std::vector<Eigen::VectorXd> pre(n);
            act[0] = inputs.col(i);
            for (int l = 0; l < n; ++l) {
                pre[l] = weights_[l] * act[l] + biases_[l];
                act[l + 1] = (l + 1 < n) ? pre[l].cwiseMax(0.0).eval() : pre[l];
            }
            Eigen::VectorXd delta = (act[n] - targets.col(i)) *
                                    (2.0 / (static_cast<double>(output_size()) * batch));
            for (int l = n - 1; l >= 0; --l) {
                grad_w[l] += delta * act[l].transpose();
                grad_b[l] += delta;
                if (l > 0) {
                    delta = (weights_[l].transpose() * delta).eval();
                    for (Eigen::Index k = 0; k < delta.size(); ++k)
                        if (pre[l - 1](k) <= 0.0) delta(k) = 0.0;
                }
            }
        }
    }

    std::vector<Eigen::MatrixXd>& weights() { return weights_; }
    std::vector<Eigen::VectorXd>& biases() { return biases_; }
    const std::vector<Eigen::MatrixXd>& weights() const { return weights_; }
    const std::vector<Eigen::VectorXd>& biases() const { return biases_; }
    std::vector<Eigen::MatrixXd>& adam_m_w() { return m_w_; }
    std::vector<Eigen::MatrixXd>& adam_v_w() { return v_w_; }
    std::vector<Eigen::VectorXd>& adam_m_b() { return m_b_; }
    std::vector<Eigen::VectorXd>& adam_v_b() { return v_b_; }
    const std::vector<Eigen::MatrixXd>& adam_m_w() const { return m_w_; }
    const std::vector<Eigen::MatrixXd>& adam_v_w() const { return v_w_; }
    const std::vector<Eigen::VectorXd>& adam_m_b() const { return m_b_; }
    const std::vector<Eigen::VectorXd>& adam_v_b() const { return v_b_; }
    std::int64_t& adam_step() { return adam_step_; }
    std::int64_t adam_step() const { return adam_step_; }

private:
    void adam_update(const std::vector<Eigen::MatrixXd>& grad_w,
                     const std::vector<Eigen::VectorXd>& grad_b, double lr) {
        constexpr double beta1 = 0.9, beta2 = 0.999, eps = 1e-8;
        ++adam_step_;
        const double bc1 = 1.0 - std::pow(beta1, static_cast<double>(adam_step_));
        const double bc2 = 1.0 - std::pow(beta2, static_cast<double>(adam_step_));
        for (int l = 0; l < num_layers(); ++l) {
            m_w_[l] = beta1 * m_w_[l] + (1.0 - beta1) * grad_w[l];
            v_w_[l] = beta2 * v_w_[l] + (1.0 - beta2) * grad_w[l].cwiseProduct(grad_w[l]);
            m_b_[l] = beta1 * m_b_[l] + (1.0 - beta1) * grad_b[l];
            v_b_[l] = beta2 * v_b_[l] + (1.0 - beta2) * grad_b[l].cwiseProduct(grad_b[l]);
            weights_[l] -= lr * (m_w_[l] / bc1)
                               .cwiseQuotient(((v_w_[l] / bc2).cwiseSqrt().array() + eps).matrix());
            biases_[l] -= lr * (m_b_[l] / bc1)
                              .cwiseQuotient(((v_b_[l] / bc2).cwiseSqrt().array() + eps).matrix());
        }
    }

    std::vector<int> sizes_;
    std::vector<Eigen::MatrixXd> weights_;
    std::vector<Eigen::VectorXd> biases_;
    std::vector<Eigen::MatrixXd> m_w_, v_w_;
    std::vector<Eigen::VectorXd> m_b_, v_b_;
    std::int64_t adam_step_ = 0;
};

inline Mlp ae_init(Rng& rng) {
    Mlp m(Mlp::terrain_layer_sizes());
    m.init_weights(rng);
    return m;
}

// Heights enter the network scaled into [0,1]; errors are reported back in
// height units.
inline Eigen::VectorXd terrain_to_input(const Terrain& t) {
    Eigen::VectorXd x(kTerrainUnits);
    for (int i = 0; i < kTerrainUnits; ++i) x(i) = t.heights[i] / kMaxTerrainHeight;
    return x;
}

// Shuffled mini-batch Adam training on the normalized heights. Warm start:
// weights and optimizer state continue from the current values.
inline void ae_train(Mlp& m, const std::vector<Terrain>& terrains, int epochs,
                     int batch_size, double lr, Rng& rng) {
    if (terrains.empty()) throw std::invalid_argument("empty autoencoder training set");
    const int n = static_cast<int>(terrains.size());
    Eigen::MatrixXd data(kTerrainUnits, n);
    for (int i = 0; i < n; ++i) data.col(i) = terrain_to_input(terrains[i]);

    std::vector<int> order(n);
    for (int i = 0; i < n; ++i) order[i] = i;
    for (int e = 0; e < epochs; ++e) {
        // Fisher-Yates shuffle
        for (int i = n - 1; i > 0; --i)
            std::swap(order[i], order[rng.uniform_int(static_cast<std::uint64_t>(i) + 1)]);
        for (int start = 0; start < n; start += batch_size) {
            int count = std::min(batch_size, n - start);
            Eigen::MatrixXd batch(kTerrainUnits, count);
            for (int k = 0; k < count; ++k) batch.col(k) = data.col(order[start + k]);
            m.train_batch(batch, batch, lr);
        }
    }
}

// Mean absolute per-unit error between the terrain and its reconstruction,
// in height units.
inline double ae_reconstruction_error(const Mlp& m, const Terrain& t) {
    Eigen::VectorXd x = terrain_to_input(t);
    Eigen::VectorXd y = m.forward(x);
    double total = 0.0;
    for (int i = 0; i < kTerrainUnits; ++i)
        total += std::abs(t.heights[i] - y(i) * kMaxTerrainHeight);
    return total / kTerrainUnits;
}

}  // namespace evomap
