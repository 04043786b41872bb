#include "embedlab/optim.hpp"

#include <cmath>
#include <limits>
#include <numbers>
#include <stdexcept>

namespace embedlab::optim {

namespace {

void check_shapes(const Matrix& e, const Matrix& g, const char* who) {
    if (e.rows < 1 || e.cols < 1)
        throw std::invalid_argument(std::string(who) + ": empty parameter");
    if (g.rows != e.rows || g.cols != e.cols)
        throw std::invalid_argument(std::string(who) + ": gradient shape mismatch");
}

void ensure_adam_state(AdamState& state, const Matrix& e, const char* who) {
    if (state.m.size() == 0 && state.v.size() == 0 && state.tau == 0)
        state.resize_for(e.rows, e.cols);
    if (state.m.rows != e.rows || state.m.cols != e.cols || state.v.rows != e.rows ||
        state.v.cols != e.cols)
        throw std::invalid_argument(std::string(who) + ": state shape mismatch");
}

// m <- b1 m + (1-b1) g ; v <- b2 v + (1-b2) g^2 ; tau <- tau + 1.
void advance_moments(const Matrix& g, AdamState& state, const OptimConfig& cfg) {
    if (state.tau == std::numeric_limits<std::uint64_t>::max())
        throw std::overflow_error("adam: step counter overflow");
    for (std::size_t k = 0; k < g.data.size(); ++k) {
        state.m.data[k] = cfg.beta1 * state.m.data[k] + (1.0 - cfg.beta1) * g.data[k];
        state.v.data[k] = cfg.beta2 * state.v.data[k] + (1.0 - cfg.beta2) * g.data[k] * g.data[k];
    }
    ++state.tau;
}

double bias_correction(double beta, std::uint64_t tau) {
    return 1.0 - std::pow(beta, static_cast<double>(tau));
}

// Shared implementation of the coupled family; plain coupled is n = 0.
void coupled_step_impl(Matrix& e, const Matrix& g, AdamState& state,
                       const OptimConfig& cfg, double lr, int n, UpdateRecord* rec,
                       const char* who) {
    check_shapes(e, g, who);
    ensure_adam_state(state, e, who);
    advance_moments(g, state, cfg);

    const std::size_t V = e.rows;
    const std::size_t H = e.cols;
    const double c1 = bias_correction(cfg.beta1, state.tau);
    const double c2 = bias_correction(cfg.beta2, state.tau);

    // nu_hat(d): raw-v vocabulary mean, bias-corrected once, then 2^-n scaled.
    std::vector<double> denom(H);
    for (std::size_t d = 0; d < H; ++d) {
        double sum = 0.0;
        for (std::size_t i = 0; i < V; ++i) sum += state.v.at(i, d);
        const double nu_hat = std::ldexp(sum / static_cast<double>(V) / c2, -n);
        denom[d] = std::sqrt(nu_hat) + cfg.epsilon;
    }

    if (rec) {
        rec->update_sum.assign(H, 0.0);
        rec->effective_lr_spread = 1.0;  // one denominator per dimension, by construction
    }
    for (std::size_t i = 0; i < V; ++i) {
        for (std::size_t d = 0; d < H; ++d) {
            const double mhat = state.m.at(i, d) / c1;
            const double u = -lr * mhat / denom[d];
            e.at(i, d) += u;
            if (rec) rec->update_sum[d] += u;
        }
    }
}

// max_i / min_i ratio of per-row denominators, worst dimension. Equals the
// ratio of per-row effective learning rates since lr is shared.
double denom_spread(const std::vector<double>& dmax, const std::vector<double>& dmin) {
    double spread = 1.0;
    for (std::size_t d = 0; d < dmax.size(); ++d) {
        if (dmax[d] == 0.0) continue;  // all rows zero: equal rates
        if (dmin[d] == 0.0) return std::numeric_limits<double>::infinity();
        spread = std::max(spread, dmax[d] / dmin[d]);
    }
    return spread;
}

}  // namespace

Kind kind_from_string(const std::string& name) {
    if (name == "sgd") return Kind::sgd;
    if (name == "adam") return Kind::adam;
    if (name == "coupled") return Kind::coupled_adam;
    if (name == "scaled-coupled") return Kind::scaled_coupled_adam;
    throw std::invalid_argument("unknown optimizer '" + name +
                                "' (expected sgd, adam, coupled, scaled-coupled)");
}

std::string to_string(Kind kind) {
    switch (kind) {
        case Kind::sgd: return "sgd";
        case Kind::adam: return "adam";
        case Kind::coupled_adam: return "coupled";
        case Kind::scaled_coupled_adam: return "scaled-coupled";
    }
    throw std::invalid_argument("to_string: bad optimizer kind");
}

double schedule_lr(const OptimConfig& cfg, std::size_t step, std::size_t total_steps) {
    if (step > total_steps)
        throw std::invalid_argument("schedule_lr: step past total_steps");
    const std::size_t warmup = cfg.schedule.warmup_steps;
    if (step < warmup)
        return cfg.eta * static_cast<double>(step) / static_cast<double>(warmup);
    if (step == total_steps) return cfg.eta * cfg.schedule.floor_frac;
    if (total_steps <= warmup) return cfg.eta;
    const double t = static_cast<double>(step - warmup) /
                     static_cast<double>(total_steps - warmup);
    const double cosine = 0.5 * (1.0 + std::cos(std::numbers::pi * t));
    return cfg.eta * (cfg.schedule.floor_frac + (1.0 - cfg.schedule.floor_frac) * cosine);
}

void sgd_step(std::span<double> param, std::span<const double> grad, Matrix& velocity,
              double lr, double momentum) {
    if (param.size() != grad.size())
        throw std::invalid_argument("sgd_step: gradient shape mismatch");
    if (velocity.size() == 0) velocity = Matrix(1, param.size());
    if (velocity.size() != param.size())
        throw std::invalid_argument("sgd_step: state shape mismatch");
    for (std::size_t k = 0; k < param.size(); ++k) {
        velocity.data[k] = momentum * velocity.data[k] + grad[k];
        param[k] -= lr * velocity.data[k];
    }
}

void adam_step(std::span<double> param, std::span<const double> grad, AdamState& state,
               const OptimConfig& cfg, double lr, double weight_decay) {
    if (param.size() != grad.size())
        throw std::invalid_argument("adam_step: gradient shape mismatch");
    if (state.m.size() == 0 && state.v.size() == 0 && state.tau == 0)
        state.resize_for(1, param.size());
    if (state.m.size() != param.size() || state.v.size() != param.size())
        throw std::invalid_argument("adam_step: state shape mismatch");

    if (state.tau == std::numeric_limits<std::uint64_t>::max())
        throw std::overflow_error("adam: step counter overflow");
    for (std::size_t k = 0; k < param.size(); ++k) {
        state.m.data[k] = cfg.beta1 * state.m.data[k] + (1.0 - cfg.beta1) * grad[k];
        state.v.data[k] = cfg.beta2 * state.v.data[k] + (1.0 - cfg.beta2) * grad[k] * grad[k];
    }
    ++state.tau;

    const double c1 = bias_correction(cfg.beta1, state.tau);
    const double c2 = bias_correction(cfg.beta2, state.tau);
    for (std::size_t k = 0; k < param.size(); ++k) {
        const double mhat = state.m.data[k] / c1;
        const double denom = std::sqrt(state.v.data[k] / c2) + cfg.epsilon;
        param[k] += -lr * mhat / denom - lr * weight_decay * param[k];
    }
}

void sgd_embedding_step(Matrix& e, const Matrix& g, SgdState& state,
                        const OptimConfig& cfg, double lr, UpdateRecord* rec) {
    check_shapes(e, g, "sgd_embedding_step");
    if (state.velocity.size() == 0) state.resize_for(e.rows, e.cols);
    if (state.velocity.rows != e.rows || state.velocity.cols != e.cols)
        throw std::invalid_argument("sgd_embedding_step: state shape mismatch");

    const double f_lr = cfg.sgd_lr_factor * lr;
    if (rec) {
        rec->update_sum.assign(e.cols, 0.0);
        rec->effective_lr_spread = 1.0;  // single global rate
    }
    for (std::size_t i = 0; i < e.rows; ++i) {
        for (std::size_t d = 0; d < e.cols; ++d) {
            double& vel = state.velocity.at(i, d);
            vel = cfg.momentum * vel + g.at(i, d);
            const double u = -f_lr * vel;
            e.at(i, d) += u;
            if (rec) rec->update_sum[d] += u;
        }
    }
}

void adam_embedding_step(Matrix& e, const Matrix& g, AdamState& state,
                         const OptimConfig& cfg, double lr, UpdateRecord* rec) {
    check_shapes(e, g, "adam_embedding_step");
    ensure_adam_state(state, e, "adam_embedding_step");
    advance_moments(g, state, cfg);

    const double c1 = bias_correction(cfg.beta1, state.tau);
    const double c2 = bias_correction(cfg.beta2, state.tau);
    std::vector<double> dmax, dmin;
    if (rec) {
        rec->update_sum.assign(e.cols, 0.0);
        dmax.assign(e.cols, -std::numeric_limits<double>::infinity());
        dmin.assign(e.cols, std::numeric_limits<double>::infinity());
    }
    for (std::size_t i = 0; i < e.rows; ++i) {
        for (std::size_t d = 0; d < e.cols; ++d) {
            const double mhat = state.m.at(i, d) / c1;
            const double denom = std::sqrt(state.v.at(i, d) / c2) + cfg.epsilon;
            const double u = -lr * mhat / denom;
            e.at(i, d) += u;
            if (rec) {
                rec->update_sum[d] += u;
                dmax[d] = std::max(dmax[d], denom);
                dmin[d] = std::min(dmin[d], denom);
            }
        }
    }
    if (rec) rec->effective_lr_spread = denom_spread(dmax, dmin);
}

void coupled_adam_step(Matrix& e, const Matrix& g, AdamState& state,
                       const OptimConfig& cfg, double lr, UpdateRecord* rec) {
    coupled_step_impl(e, g, state, cfg, lr, 0, rec, "coupled_adam_step");
}

void scaled_coupled_adam_step(Matrix& e, const Matrix& g, AdamState& state,
                              const OptimConfig& cfg, double lr, int n,
                              UpdateRecord* rec) {
    coupled_step_impl(e, g, state, cfg, lr, n, rec, "scaled_coupled_adam_step");
}

Matrix effective_lr_rows(const AdamState& state, const OptimConfig& cfg, double lr,
                         Kind kind) {
    if (kind == Kind::sgd)
        throw std::invalid_argument("effective_lr_rows: sgd has one global rate");
    if (state.tau < 1)
        throw std::invalid_argument("effective_lr_rows: state has not stepped");

    const std::size_t V = state.v.rows;
    const std::size_t H = state.v.cols;
    const double c2 = bias_correction(cfg.beta2, state.tau);
    Matrix rates(V, H);

    if (kind == Kind::adam) {
        for (std::size_t i = 0; i < V; ++i)
            for (std::size_t d = 0; d < H; ++d)
                rates.at(i, d) = lr / (std::sqrt(state.v.at(i, d) / c2) + cfg.epsilon);
        return rates;
    }

    const int n = kind == Kind::scaled_coupled_adam ? cfg.scale_exponent : 0;
    for (std::size_t d = 0; d < H; ++d) {
        double sum = 0.0;
        for (std::size_t i = 0; i < V; ++i) sum += state.v.at(i, d);
        const double nu_hat = std::ldexp(sum / static_cast<double>(V) / c2, -n);
        const double rate = lr / (std::sqrt(nu_hat) + cfg.epsilon);
        for (std::size_t i = 0; i < V; ++i) rates.at(i, d) = rate;
    }
    return rates;
}

}  // namespace embedlab::optim
