#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "embedlab/linalg.hpp"

namespace embedlab::optim {

// Update rule applied to the embedding-type parameter groups (the V x H
// token-indexed matrices). Hidden-layer parameters always train with
// decoupled-decay Adam regardless of this choice, so weight decay is
// structurally impossible on embedding rows.
enum class Kind { sgd, adam, coupled_adam, scaled_coupled_adam };

Kind kind_from_string(const std::string& name);
std::string to_string(Kind kind);

// Cosine learning-rate schedule: linear warmup from zero over warmup_steps,
// then cosine decay from eta down to floor_frac * eta at total_steps.
struct Schedule {
    std::size_t warmup_steps = 0;
    double floor_frac = 0.1;

    bool operator==(const Schedule&) const = default;
};

struct OptimConfig {
    double eta = 1e-3;          // peak learning rate
    double beta1 = 0.9;
    double beta2 = 0.95;
    double epsilon = 1e-8;      // added outside the sqrt; zero is allowed
    double momentum = 0.9;      // SGD velocity coefficient gamma
    double sgd_lr_factor = 1.0; // f: multiplies eta for the embedding group only
    int scale_exponent = 0;     // n in nu_hat -> 2^-n * nu_hat
    double weight_decay = 0.0;  // decoupled decay, linear layers only
    Schedule schedule;

    bool operator==(const OptimConfig&) const = default;
};

// Scheduled learning rate at `step` of a `total_steps` run (0 <= step <=
// total_steps). Warmup is linear from zero: step 0 yields 0 whenever
// warmup_steps > 0; the configured eta is reached exactly at the warmup
// boundary, and the cosine tail ends at floor_frac * eta.
double schedule_lr(const OptimConfig& cfg, std::size_t step, std::size_t total_steps);

// SGD with momentum: f <- gamma * f + g;  u = -lr * f.
struct SgdState {
    Matrix velocity;

    void resize_for(std::size_t rows, std::size_t cols) { velocity = Matrix(rows, cols); }
};

// Adam moments. tau counts completed steps: the first step runs with tau = 1,
// bias corrections 1 - beta^tau.
struct AdamState {
    Matrix m;
    Matrix v;
    std::uint64_t tau = 0;

    void resize_for(std::size_t rows, std::size_t cols) {
        m = Matrix(rows, cols);
        v = Matrix(rows, cols);
        tau = 0;
    }
};

// Opt-in per-step diagnostics. update_sum is sum_i u_i over the embedding
// rows (length H). effective_lr_spread is the worst per-dimension ratio
// max_i eta_i(d) / min_i eta_i(d) of the per-row effective learning rates
// eta_i = lr / (sqrt(vhat_i) + eps); the coupled rules hold it at exactly 1.
struct UpdateRecord {
    std::vector<double> update_sum;
    double effective_lr_spread = 1.0;
};

// Flat-parameter steps for the hidden layer. `lr` is the scheduled learning
// rate for this step (the embedding wrappers below fold in sgd_lr_factor;
// these do not). Decay is decoupled: p <- p - lr * wd * p, applied alongside
// the gradient update.
void sgd_step(std::span<double> param, std::span<const double> grad, Matrix& velocity,
              double lr, double momentum);
void adam_step(std::span<double> param, std::span<const double> grad, AdamState& state,
               const OptimConfig& cfg, double lr, double weight_decay = 0.0);

// Embedding-matrix steps. Each consumes the V x H gradient, advances the
// state, applies the update in place, and fills `rec` when given.
// sgd_embedding_step uses sgd_lr_factor * lr as its learning rate.
void sgd_embedding_step(Matrix& e, const Matrix& g, SgdState& state,
                        const OptimConfig& cfg, double lr, UpdateRecord* rec = nullptr);
void adam_embedding_step(Matrix& e, const Matrix& g, AdamState& state,
                         const OptimConfig& cfg, double lr, UpdateRecord* rec = nullptr);

// Coupled Adam: every row's bias-corrected second moment is replaced by the
// vocabulary average nu_hat(d) = (1/V) sum_i vhat_i(d), so all rows share one
// effective learning rate and the update sum inherits sum_i g_i = 0. The
// implementation averages the raw v and bias-corrects the mean once; the
// correction is a scalar factor, so this is algebraically identical.
void coupled_adam_step(Matrix& e, const Matrix& g, AdamState& state,
                       const OptimConfig& cfg, double lr, UpdateRecord* rec = nullptr);

// Scaled variant: nu_hat -> 2^-n * nu_hat via ldexp, exact in binary floating
// point. n = 0 reproduces coupled_adam_step bit for bit.
void scaled_coupled_adam_step(Matrix& e, const Matrix& g, AdamState& state,
                              const OptimConfig& cfg, double lr, int n,
                              UpdateRecord* rec = nullptr);

// Per-row effective learning rates eta_i(d) implied by the state after a
// step: lr / (sqrt(vhat_i(d)) + eps), with vhat replaced by the (scaled)
// vocabulary mean under the coupled kinds. Pure inspection of a stepped
// state (tau >= 1); reproduces bit-for-bit the rates the step applied.
Matrix effective_lr_rows(const AdamState& state, const OptimConfig& cfg, double lr,
                         Kind kind);

}  // namespace embedlab::optim
