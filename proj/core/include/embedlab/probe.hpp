#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "embedlab/corpus.hpp"
#include "embedlab/linalg.hpp"
#include "embedlab/model.hpp"
#include "embedlab/optim.hpp"

namespace embedlab::probe {

// Zero-learning-rate measurement pass: per-token conditional second-moment
// factors, the hidden-state scale, and the fits connecting them to the
// unigram distribution.
//
// Per-token scalars reduce H-vectors by their mean over hidden dimensions.
// x_true[i] estimates E[(1-p_i)^2 | i = t] and is only valid where
// target_count[i] > 0; x_false[i] estimates E[p_i^2 | i != t]; g_sq[i] is the
// directly measured E[g_i^2].
struct ProbeReport {
    std::vector<double> x_true;
    std::vector<double> x_false;
    std::vector<double> g_sq;
    std::vector<std::uint64_t> target_count;
    std::uint64_t example_count = 0;
    std::vector<double> s_vector;    // E[h^2] per hidden dimension
    std::vector<double> vhat_mean;   // per-token second-moment summary, see below

    linalg::FitResult fit_true;   // x_true vs unigram probs, observed targets only
    linalg::FitResult fit_false;  // x_false vs unigram probs
    linalg::FitResult fit_v;      // vhat_mean vs unigram probs
    double A = 0.0;               // fit_v slope
};

// Forward-only accumulation over num_batches * batch_size examples drawn by a
// fresh position sampler; the model is never mutated (guarded by a parameter
// checksum before and after — a mismatch is an internal fault).
ProbeReport measure_conditionals(const model::ModelParams& params,
                                 const corpus::TokenStream& stream,
                                 std::size_t num_batches, std::size_t batch_size,
                                 std::uint64_t seed);

// Bias-corrected second moments v_i / (1 - beta2^tau), reduced per token by
// the mean over hidden dimensions. Requires a stepped state (tau >= 1).
std::vector<double> second_moment_snapshot(const optim::AdamState& state,
                                           const optim::OptimConfig& cfg);

// Fills the through-origin fits against the unigram probabilities. fit_true
// uses only tokens observed as targets and requires at least 8 of them;
// fit_v is computed when vhat_mean (from second_moment_snapshot) is attached.
void fit_probe(ProbeReport& report, const corpus::UnigramDistribution& unigram);

// CSV: index,prob,x_true,x_false,vhat_mean,target_count. x_true is empty for
// tokens never observed as targets; vhat_mean cells are empty when no
// snapshot was attached.
std::string probe_csv(const ProbeReport& report,
                      const corpus::UnigramDistribution& unigram);

// JSON summary of the three fits (slope, R^2, mutual information) plus A.
std::string fits_json(const ProbeReport& report);

}  // namespace embedlab::probe
