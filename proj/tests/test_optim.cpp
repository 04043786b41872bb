#include <cmath>
#include <stdexcept>
#include <vector>

#include <doctest.h>

#include "embedlab/optim.hpp"
#include "embedlab/rng.hpp"

using namespace embedlab::optim;
using embedlab::Matrix;
using embedlab::SplitMix64;

namespace {

Matrix single(double value) {
    Matrix m(1, 1);
    m.at(0, 0) = value;
    return m;
}

Matrix column(std::initializer_list<double> values) {
    Matrix m(values.size(), 1);
    std::size_t i = 0;
    for (double v : values) m.at(i++, 0) = v;
    return m;
}

Matrix random_grad(std::size_t rows, std::size_t cols, SplitMix64& rng) {
    Matrix g(rows, cols);
    for (double& x : g.data) x = rng.next_normal();
    return g;
}

// last row absorbs the others so every column sums to (FP-almost) zero
void zero_column_sums(Matrix& g) {
    for (std::size_t d = 0; d < g.cols; ++d) {
        double s = 0.0;
        for (std::size_t i = 0; i + 1 < g.rows; ++i) s += g.at(i, d);
        g.at(g.rows - 1, d) = -s;
    }
}

}  // namespace

TEST_CASE("optimizer kinds round-trip through their names") {
    for (const char* name : {"sgd", "adam", "coupled", "scaled-coupled"})
        CHECK(to_string(kind_from_string(name)) == name);
    CHECK_THROWS_AS(kind_from_string("adamw"), std::invalid_argument);
}

TEST_CASE("plain sgd step without momentum") {
    std::vector<double> p{1.0};
    std::vector<double> g{1.0};
    Matrix vel;
    sgd_step(p, g, vel, 0.1, 0.0);
    CHECK(p[0] == 0.9);
}

TEST_CASE("momentum compounds the velocity") {
    std::vector<double> p{0.0};
    std::vector<double> g{1.0};
    Matrix vel;
    sgd_step(p, g, vel, 1.0, 0.9);
    CHECK(p[0] == doctest::Approx(-1.0).epsilon(1e-15));
    sgd_step(p, g, vel, 1.0, 0.9);
    CHECK(p[0] == doctest::Approx(-2.9).epsilon(1e-15));  // second delta is -1.9
}

TEST_CASE("sgd embedding step folds in the lr factor") {
    OptimConfig cfg;
    cfg.momentum = 0.0;
    cfg.sgd_lr_factor = 0.5;
    Matrix e = single(0.0);
    Matrix g = single(1.0);
    SgdState st;
    sgd_embedding_step(e, g, st, cfg, 0.1, nullptr);
    CHECK(e.at(0, 0) == doctest::Approx(-0.05).epsilon(1e-15));
}

TEST_CASE("first adam step with zero epsilon moves by exactly the learning rate") {
    OptimConfig cfg;
    cfg.epsilon = 0.0;
    Matrix e = single(0.0);
    Matrix g = single(2.0);
    AdamState st;
    adam_embedding_step(e, g, st, cfg, cfg.eta, nullptr);
    // mhat = g and vhat = g^2 after one step, so u = -eta * g / |g|
    CHECK(e.at(0, 0) == -cfg.eta);
    CHECK(st.tau == 1);
}

TEST_CASE("zero gradient leaves the parameter untouched") {
    OptimConfig cfg;  // default epsilon keeps the denominator positive
    Matrix e = single(3.25);
    Matrix g = single(0.0);
    AdamState st;
    adam_embedding_step(e, g, st, cfg, cfg.eta, nullptr);
    CHECK(e.at(0, 0) == 3.25);
}

TEST_CASE("decoupled decay shrinks the parameter independently of the gradient") {
    OptimConfig cfg;
    std::vector<double> p{2.0};
    std::vector<double> g{0.0};
    AdamState st;
    adam_step(p, g, st, cfg, 0.1, 0.1);
    CHECK(p[0] == doctest::Approx(2.0 - 0.1 * 0.1 * 2.0).epsilon(1e-15));
}

TEST_CASE("adam breaks update conservation where coupled restores it") {
    // zero-sum gradient column (2, -1, -1); with epsilon 0 the per-row adam
    // updates are -eta, +eta, +eta, so their sum is +eta, not zero.
    OptimConfig cfg;
    cfg.epsilon = 0.0;

    Matrix e_adam = column({0.0, 0.0, 0.0});
    Matrix g = column({2.0, -1.0, -1.0});
    AdamState st_adam;
    UpdateRecord rec_adam;
    adam_embedding_step(e_adam, g, st_adam, cfg, cfg.eta, &rec_adam);
    CHECK(rec_adam.update_sum[0] == cfg.eta);
    CHECK(rec_adam.effective_lr_spread == 2.0);  // denominators are |g| = 2 and 1

    Matrix e_cpl = column({0.0, 0.0, 0.0});
    AdamState st_cpl;
    UpdateRecord rec_cpl;
    coupled_adam_step(e_cpl, g, st_cpl, cfg, cfg.eta, &rec_cpl);
    CHECK(rec_cpl.update_sum[0] == 0.0);
    CHECK(rec_cpl.effective_lr_spread == 1.0);
}

TEST_CASE("coupled denominator is the vocabulary mean of vhat") {
    OptimConfig cfg;
    cfg.epsilon = 0.0;
    Matrix e = column({0.0, 0.0});
    Matrix g = column({3.0, 1.0});
    AdamState st;
    coupled_adam_step(e, g, st, cfg, cfg.eta, nullptr);
    // vhat rows are 9 and 1, so nu_hat = 5 and u_i = -eta * g_i / sqrt(5)
    CHECK(e.at(0, 0) == doctest::Approx(-cfg.eta * 3.0 / std::sqrt(5.0)).epsilon(1e-15));
    CHECK(e.at(1, 0) == doctest::Approx(-cfg.eta * 1.0 / std::sqrt(5.0)).epsilon(1e-15));
}

TEST_CASE("coupled updates conserve the embedding mean over a long run") {
    OptimConfig cfg;
    SplitMix64 rng(404);
    Matrix e = random_grad(8, 3, rng);
    AdamState st;
    for (int step = 1; step <= 50; ++step) {
        Matrix g = random_grad(8, 3, rng);
        zero_column_sums(g);
        Matrix before = e;
        UpdateRecord rec;
        coupled_adam_step(e, g, st, cfg, 1e-3, &rec);
        for (std::size_t d = 0; d < 3; ++d) {
            double abs_total = 0.0;
            for (std::size_t i = 0; i < 8; ++i)
                abs_total += std::abs(e.at(i, d) - before.at(i, d));
            CHECK(std::abs(rec.update_sum[d]) <= 1e-12 * (abs_total + 1e-3));
        }
        CHECK(rec.effective_lr_spread == 1.0);
    }
    CHECK(st.tau == 50);
}

TEST_CASE("scale exponent zero reproduces coupled bit for bit") {
    OptimConfig cfg;
    SplitMix64 rng(7);
    Matrix e1 = random_grad(8, 4, rng);
    Matrix e2 = e1;
    AdamState s1, s2;
    for (int step = 0; step < 500; ++step) {
        Matrix g = random_grad(8, 4, rng);
        coupled_adam_step(e1, g, s1, cfg, 1e-3, nullptr);
        scaled_coupled_adam_step(e2, g, s2, cfg, 1e-3, 0, nullptr);
        REQUIRE(e1.data == e2.data);
    }
    CHECK(s1.m.data == s2.m.data);
    CHECK(s1.v.data == s2.v.data);
}

TEST_CASE("positive scale exponents double the update per two exponent steps") {
    OptimConfig cfg;
    cfg.epsilon = 0.0;
    SplitMix64 rng(11);
    Matrix g = random_grad(4, 2, rng);

    Matrix e0(4, 2), e2(4, 2);
    AdamState s0, s2;
    coupled_adam_step(e0, g, s0, cfg, 1e-3, nullptr);
    scaled_coupled_adam_step(e2, g, s2, cfg, 1e-3, 2, nullptr);
    for (std::size_t k = 0; k < e0.data.size(); ++k)
        CHECK(e2.data[k] == 2.0 * e0.data[k]);  // exact: power-of-two rescale
}

TEST_CASE("opposite scale exponents sit a factor 2^n apart") {
    OptimConfig cfg;
    cfg.epsilon = 0.0;
    SplitMix64 rng(12);
    Matrix g = random_grad(6, 2, rng);

    Matrix lo(6, 2), hi(6, 2);
    AdamState s_lo, s_hi;
    scaled_coupled_adam_step(lo, g, s_lo, cfg, 1e-3, -5, nullptr);
    scaled_coupled_adam_step(hi, g, s_hi, cfg, 1e-3, 5, nullptr);
    for (std::size_t k = 0; k < lo.data.size(); ++k)
        CHECK(lo.data[k] == doctest::Approx(std::ldexp(hi.data[k], -5)).epsilon(1e-12));
}

TEST_CASE("a single row makes coupled and plain adam identical") {
    OptimConfig cfg;
    SplitMix64 rng(21);
    Matrix e1 = random_grad(1, 5, rng);
    Matrix e2 = e1;
    AdamState s1, s2;
    for (int step = 0; step < 20; ++step) {
        Matrix g = random_grad(1, 5, rng);
        adam_embedding_step(e1, g, s1, cfg, 1e-3, nullptr);
        coupled_adam_step(e2, g, s2, cfg, 1e-3, nullptr);
        REQUIRE(e1.data == e2.data);
    }
}

TEST_CASE("schedule endpoints and midpoint") {
    OptimConfig cfg;  // eta 1e-3, floor_frac 0.1
    cfg.schedule.warmup_steps = 10;
    CHECK(schedule_lr(cfg, 0, 100) == 0.0);
    CHECK(schedule_lr(cfg, 5, 100) == doctest::Approx(0.5 * cfg.eta).epsilon(1e-15));
    CHECK(schedule_lr(cfg, 10, 100) == cfg.eta);  // warmup boundary hits the peak
    CHECK(schedule_lr(cfg, 100, 100) == cfg.eta * cfg.schedule.floor_frac);

    cfg.schedule.warmup_steps = 0;
    CHECK(schedule_lr(cfg, 0, 100) == cfg.eta);
    CHECK(schedule_lr(cfg, 50, 100) == doctest::Approx(0.55 * cfg.eta).epsilon(1e-12));
    CHECK_THROWS_AS(schedule_lr(cfg, 101, 100), std::invalid_argument);
}

TEST_CASE("schedule is monotone after warmup") {
    OptimConfig cfg;
    cfg.schedule.warmup_steps = 20;
    double prev = schedule_lr(cfg, 20, 200);
    for (std::size_t s = 21; s <= 200; ++s) {
        const double lr = schedule_lr(cfg, s, 200);
        CHECK(lr < prev);
        CHECK(lr >= cfg.eta * cfg.schedule.floor_frac);
        prev = lr;
    }
}

TEST_CASE("effective rates are shared across rows under coupled rules only") {
    OptimConfig cfg;
    SplitMix64 rng(31);
    Matrix e(6, 3);
    Matrix g = random_grad(6, 3, rng);
    AdamState st;
    coupled_adam_step(e, g, st, cfg, 1e-3, nullptr);

    Matrix coupled_rates = effective_lr_rows(st, cfg, 1e-3, Kind::coupled_adam);
    for (std::size_t i = 1; i < 6; ++i)
        for (std::size_t d = 0; d < 3; ++d)
            CHECK(coupled_rates.at(i, d) == coupled_rates.at(0, d));

    Matrix adam_rates = effective_lr_rows(st, cfg, 1e-3, Kind::adam);
    double lo = adam_rates.data[0], hi = adam_rates.data[0];
    for (double r : adam_rates.data) {
        lo = std::min(lo, r);
        hi = std::max(hi, r);
    }
    CHECK(hi / lo > 1.0);

    // scaled rates are the coupled rates stretched by 2^(n/2); the doubling
    // is bit-exact once the additive epsilon is out of the denominator
    OptimConfig flat = cfg;
    flat.epsilon = 0.0;
    flat.scale_exponent = 2;
    Matrix base_rates = effective_lr_rows(st, flat, 1e-3, Kind::coupled_adam);
    Matrix scaled_rates = effective_lr_rows(st, flat, 1e-3, Kind::scaled_coupled_adam);
    for (std::size_t k = 0; k < scaled_rates.data.size(); ++k)
        CHECK(scaled_rates.data[k] == 2.0 * base_rates.data[k]);
}

TEST_CASE("effective rate inspection rejects unusable states") {
    OptimConfig cfg;
    AdamState st;
    st.resize_for(4, 2);
    CHECK_THROWS_WITH_AS(effective_lr_rows(st, cfg, 1e-3, Kind::adam),
                         doctest::Contains("has not stepped"), std::invalid_argument);
    st.tau = 1;
    CHECK_THROWS_WITH_AS(effective_lr_rows(st, cfg, 1e-3, Kind::sgd),
                         doctest::Contains("global rate"), std::invalid_argument);
}

TEST_CASE("shape mismatches are rejected") {
    OptimConfig cfg;
    Matrix e(3, 2);
    Matrix g(2, 2);
    AdamState st;
    CHECK_THROWS_AS(adam_embedding_step(e, g, st, cfg, 1e-3, nullptr),
                    std::invalid_argument);
    SgdState sgd;
    CHECK_THROWS_AS(sgd_embedding_step(e, g, sgd, cfg, 1e-3, nullptr),
                    std::invalid_argument);
    AdamState stale;
    stale.resize_for(5, 5);
    stale.tau = 3;
    Matrix g3(3, 2);
    CHECK_THROWS_AS(adam_embedding_step(e, g3, stale, cfg, 1e-3, nullptr),
                    std::invalid_argument);
}

TEST_CASE("fresh states start at zero and count completed steps") {
    AdamState st;
    st.resize_for(2, 2);
    CHECK(st.tau == 0);
    for (double x : st.m.data) CHECK(x == 0.0);
    for (double x : st.v.data) CHECK(x == 0.0);

    OptimConfig cfg;
    Matrix e(2, 2);
    Matrix g(2, 2);
    g.at(0, 0) = 1.0;
    adam_embedding_step(e, g, st, cfg, 1e-3, nullptr);
    CHECK(st.tau == 1);
    adam_embedding_step(e, g, st, cfg, 1e-3, nullptr);
    CHECK(st.tau == 2);
}

TEST_CASE("epsilon sits outside the square root") {
    // with v = 0 after a zero gradient the denominator is exactly epsilon,
    // so a crafted second gradient resolves the placement unambiguously
    OptimConfig cfg;
    cfg.beta2 = 0.0;  // v tracks g^2 directly
    cfg.beta1 = 0.0;  // m tracks g directly
    cfg.epsilon = 3.0;
    Matrix e = single(0.0);
    Matrix g = single(4.0);
    AdamState st;
    adam_embedding_step(e, g, st, cfg, 1.0, nullptr);
    // u = -g / (sqrt(g^2) + eps) = -4 / 7; inside the root it would be -4/5
    CHECK(e.at(0, 0) == doctest::Approx(-4.0 / 7.0).epsilon(1e-15));
}
