#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "evomap/autoencoder.hpp"
#include "evomap/cppn.hpp"
#include "evomap/rng.hpp"

using namespace evomap;

namespace {

Terrain random_terrain(Rng& rng) {
    Cppn c = cppn_init_flat();
    for (int i = 0; i < 4; ++i) c = cppn_mutate(c, rng);
    return generate_terrain(c);
}

bool networks_equal(const Mlp& a, const Mlp& b) {
    for (int l = 0; l < a.num_layers(); ++l) {
        if (a.weights()[l] != b.weights()[l]) return false;
        if (a.biases()[l] != b.biases()[l]) return false;
    }
    return true;
}

}  // namespace

TEST_CASE("initialization is deterministic per seed and outputs are finite") {
    Rng a(4), b(4);
    Mlp ma = ae_init(a);
    Mlp mb = ae_init(b);
    CHECK(networks_equal(ma, mb));

    Rng tr(8);
    Terrain t = random_terrain(tr);
    Eigen::VectorXd y = ma.forward(terrain_to_input(t));
    for (Eigen::Index i = 0; i < y.size(); ++i) CHECK(std::isfinite(y(i)));
}

TEST_CASE("zero learning rate leaves the weights unchanged") {
    Rng rng(6);
    Mlp m = ae_init(rng);
    Mlp before = m;
    Rng tr(9);
    ae_train(m, {random_terrain(tr)}, 5, 1, 0.0, rng);
    CHECK(networks_equal(m, before));
}

TEST_CASE("empty training set is an error") {
    Rng rng(6);
    Mlp m = ae_init(rng);
    CHECK_THROWS(ae_train(m, {}, 1, 1, 1e-3, rng));
}

TEST_CASE("training 500 epochs on one terrain collapses its error") {
    Rng rng(12);
    Mlp m = ae_init(rng);
    Rng tr(21);
    Terrain t = random_terrain(tr);
    double before = ae_reconstruction_error(m, t);
    ae_train(m, {t}, 500, 1, 1e-3, rng);
    double after = ae_reconstruction_error(m, t);
    CHECK(after < 0.05 * before);
}

TEST_CASE("training reduces loss on the training set for nearly all seeds") {
    int improved = 0;
    const int seeds = 20;
    for (int s = 0; s < seeds; ++s) {
        Rng rng(1000 + s);
        Mlp m = ae_init(rng);
        std::vector<Terrain> set;
        for (int i = 0; i < 16; ++i) set.push_back(random_terrain(rng));
        Eigen::MatrixXd data(kTerrainUnits, set.size());
        for (std::size_t i = 0; i < set.size(); ++i) data.col(i) = terrain_to_input(set[i]);
        double before = m.loss(data, data);
        ae_train(m, set, 50, 8, 1e-3, rng);
        double after = m.loss(data, data);
        if (after <= before) ++improved;
    }
    CHECK(improved >= static_cast<int>(0.95 * seeds));
}

TEST_CASE("reconstruction error is non-negative and matches its formula") {
    Rng rng(3);
    Mlp m = ae_init(rng);
    Rng tr(14);
    for (int i = 0; i < 20; ++i) {
        Terrain t = random_terrain(tr);
        double err = ae_reconstruction_error(m, t);
        CHECK(err >= 0.0);
        Eigen::VectorXd y = m.forward(terrain_to_input(t));
        double expected = 0.0;
        for (int k = 0; k < kTerrainUnits; ++k)
            expected += std::abs(t.heights[k] - y(k) * kMaxTerrainHeight);
        expected /= kTerrainUnits;
        CHECK(err == doctest::Approx(expected).epsilon(1e-12));
    }
}

TEST_CASE("a hand-computed toy network matches the MAE formula") {
    // 4-2-4 network, weights chosen by hand
    Mlp m({4, 2, 4});
    m.weights()[0] << 0.5, 0.0, 0.0, 0.0,
                      0.0, 0.5, 0.0, 0.0;
    m.biases()[0] << 0.1, 0.1;
    m.weights()[1] << 1.0, 0.0,
                      0.0, 1.0,
                      1.0, 1.0,
                      0.0, 0.0;
    m.biases()[1] << 0.0, 0.0, 0.0, 0.2;
    Eigen::VectorXd x(4);
    x << 0.2, 0.4, 0.6, 0.8;
    // hidden: relu(0.5*0.2+0.1, 0.5*0.4+0.1) = (0.2, 0.3)
    // output: (0.2, 0.3, 0.5, 0.2)
    Eigen::VectorXd y = m.forward(x);
    CHECK(y(0) == doctest::Approx(0.2));
    CHECK(y(1) == doctest::Approx(0.3));
    CHECK(y(2) == doctest::Approx(0.5));
    CHECK(y(3) == doctest::Approx(0.2));
    double mae = ((y - x).cwiseAbs().sum()) / 4.0;
    CHECK(mae == doctest::Approx((0.0 + 0.1 + 0.1 + 0.6) / 4.0));
}

TEST_CASE("analytic gradients match central finite differences") {
    Rng rng(19);
    Mlp m({6, 4, 3, 6});
    m.init_weights(rng);
    // check at a generic point: zero biases put rectifier pre-activations
    // exactly on the kink, where finite differences are invalid
    for (auto& b : m.biases())
        for (Eigen::Index i = 0; i < b.size(); ++i) b(i) = rng.uniform(-0.3, 0.3);
    Eigen::MatrixXd inputs(6, 3);
    for (int r = 0; r < 6; ++r)
        for (int c = 0; c < 3; ++c) inputs(r, c) = rng.uniform(-1.0, 1.0);

    std::vector<Eigen::MatrixXd> grad_w;
    std::vector<Eigen::VectorXd> grad_b;
    m.gradients(inputs, inputs, grad_w, grad_b);

    const double eps = 1e-6;
    for (int l = 0; l < m.num_layers(); ++l) {
        for (Eigen::Index r = 0; r < m.weights()[l].rows(); ++r)
            for (Eigen::Index c = 0; c < m.weights()[l].cols(); ++c) {
                double saved = m.weights()[l](r, c);
                m.weights()[l](r, c) = saved + eps;
                double up = m.loss(inputs, inputs);
                m.weights()[l](r, c) = saved - eps;
                double down = m.loss(inputs, inputs);
                m.weights()[l](r, c) = saved;
                double numeric = (up - down) / (2.0 * eps);
                double analytic = grad_w[l](r, c);
                double scale = std::max({std::abs(numeric), std::abs(analytic), 1e-4});
                CHECK(std::abs(numeric - analytic) / scale < 1e-4);
            }
        for (Eigen::Index i = 0; i < m.biases()[l].size(); ++i) {
            double saved = m.biases()[l](i);
            m.biases()[l](i) = saved + eps;
            double up = m.loss(inputs, inputs);
            m.biases()[l](i) = saved - eps;
            double down = m.loss(inputs, inputs);
            m.biases()[l](i) = saved;
            double numeric = (up - down) / (2.0 * eps);
            double analytic = grad_b[l](i);
            double scale = std::max({std::abs(numeric), std::abs(analytic), 1e-4});
            CHECK(std::abs(numeric - analytic) / scale < 1e-4);
        }
    }
}

TEST_CASE("init + train + query is deterministic per seed") {
    auto build = []() {
        Rng rng(77);
        Mlp m = ae_init(rng);
        Rng tr(78);
        std::vector<Terrain> set;
        for (int i = 0; i < 8; ++i) set.push_back(random_terrain(tr));
        ae_train(m, set, 20, 4, 1e-3, rng);
        return ae_reconstruction_error(m, set[0]);
    };
    CHECK(build() == build());
}
