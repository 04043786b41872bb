#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "embedlab/linalg.hpp"
#include "embedlab/rng.hpp"

namespace embedlab::model {

// Minimal tied-weight language model: embedding lookup, optional tanh hidden
// transform, dot-product head.
//
//   h = hidden(e_context)           (identity when has_hidden is false)
//   l_i = o_i . h                   (o_i = e_i when tied, else unembedding row)
//   p = softmax(l),  loss = -log p_target
//
// With head_only_grad set, backward keeps only the head contribution
//   g_i = -(delta_it - p_i) * h
// and drops the gradient flowing into the input embedding row.
struct ModelParams {
    Matrix embeddings;     // V x H
    Matrix hidden_weight;  // H x H when has_hidden, else empty
    std::vector<double> hidden_bias;
    Matrix unembedding;    // V x H when !tie_weights, else empty (shares embeddings)
    bool has_hidden = false;
    bool tie_weights = true;
    bool head_only_grad = false;

    std::size_t vocab_size() const { return embeddings.rows; }
    std::size_t hidden_dim() const { return embeddings.cols; }
    const Matrix& output_matrix() const { return tie_weights ? embeddings : unembedding; }
    bool all_finite() const;
};

ModelParams init_params(std::size_t vocab_size, std::size_t hidden_dim, bool has_hidden,
                        bool tie_weights, bool head_only_grad, double init_std,
                        SplitMix64& rng);

struct ForwardTrace {
    std::vector<double> h;       // final hidden state
    std::vector<double> logits;  // V
    std::vector<double> probs;   // V
    std::uint32_t target = 0;
    double loss = 0.0;

    // backward bookkeeping
    std::vector<std::uint32_t> context;  // input token ids (usually one)
    std::vector<double> pooled_input;    // mean context embedding
    std::vector<double> pre_activation;  // W*pooled + b, only when has_hidden
};

struct Gradients {
    Matrix d_embeddings;               // V x H
    Matrix d_unembedding;              // V x H when untied, else empty
    Matrix d_hidden_weight;            // H x H when has_hidden
    std::vector<double> d_hidden_bias; // H when has_hidden
    std::vector<double> d_h;           // V-row head input gradient, length H

    void resize_for(const ModelParams& params);
    void zero();
    void scaled_add(const Gradients& other, double scale);
};

ForwardTrace forward(const ModelParams& params, std::uint32_t context,
                     std::uint32_t target);

// Mean-pooled context window variant; `context` must be non-empty.
ForwardTrace forward_window(const ModelParams& params,
                            std::span<const std::uint32_t> context,
                            std::uint32_t target);

// Accumulates `scale` times the gradients of trace.loss into `grads`, which
// must be sized via resize_for. Fixed accumulation order.
void backward_accumulate(const ModelParams& params, const ForwardTrace& trace,
                         double scale, Gradients& grads);

Gradients backward(const ModelParams& params, const ForwardTrace& trace);

// Central finite differences of the loss against backward() over every
// parameter. The comparison always runs with head_only_grad off: finite
// differences see the full loss, so only the full gradient can match them.
// Returns the max relative error, denominator max(|analytic|, |numeric|, 1e-12).
double grad_check(const ModelParams& params, std::uint32_t context,
                  std::uint32_t target, double step);

}  // namespace embedlab::model
