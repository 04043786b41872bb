#include "embedlab/model.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace embedlab::model {

namespace {

void check_finite(std::span<const double> v, const char* stage) {
    for (double x : v)
        if (!std::isfinite(x))
            throw std::runtime_error(std::string("forward: non-finite value in ") + stage);
}

}  // namespace

bool ModelParams::all_finite() const {
    if (!embeddings.all_finite()) return false;
    if (has_hidden) {
        if (!hidden_weight.all_finite()) return false;
        for (double b : hidden_bias)
            if (!std::isfinite(b)) return false;
    }
    if (!tie_weights && !unembedding.all_finite()) return false;
    return true;
}

ModelParams init_params(std::size_t vocab_size, std::size_t hidden_dim, bool has_hidden,
                        bool tie_weights, bool head_only_grad, double init_std,
                        SplitMix64& rng) {
    if (vocab_size < 2) throw std::invalid_argument("init_params: need V >= 2");
    if (hidden_dim < 1) throw std::invalid_argument("init_params: need H >= 1");

    ModelParams p;
    p.has_hidden = has_hidden;
    p.tie_weights = tie_weights;
    p.head_only_grad = head_only_grad;
    p.embeddings = Matrix(vocab_size, hidden_dim);
    for (double& v : p.embeddings.data) v = init_std * rng.next_normal();
    if (has_hidden) {
        p.hidden_weight = Matrix(hidden_dim, hidden_dim);
        for (double& v : p.hidden_weight.data) v = init_std * rng.next_normal();
        p.hidden_bias.assign(hidden_dim, 0.0);
    }
    if (!tie_weights) {
        p.unembedding = Matrix(vocab_size, hidden_dim);
        for (double& v : p.unembedding.data) v = init_std * rng.next_normal();
    }
    return p;
}

void Gradients::resize_for(const ModelParams& params) {
    const std::size_t V = params.vocab_size();
    const std::size_t H = params.hidden_dim();
    d_embeddings = Matrix(V, H);
    d_unembedding = params.tie_weights ? Matrix() : Matrix(V, H);
    d_hidden_weight = params.has_hidden ? Matrix(H, H) : Matrix();
    d_hidden_bias.assign(params.has_hidden ? H : 0, 0.0);
    d_h.assign(H, 0.0);
}

void Gradients::zero() {
    std::fill(d_embeddings.data.begin(), d_embeddings.data.end(), 0.0);
    std::fill(d_unembedding.data.begin(), d_unembedding.data.end(), 0.0);
    std::fill(d_hidden_weight.data.begin(), d_hidden_weight.data.end(), 0.0);
    std::fill(d_hidden_bias.begin(), d_hidden_bias.end(), 0.0);
    std::fill(d_h.begin(), d_h.end(), 0.0);
}

void Gradients::scaled_add(const Gradients& other, double scale) {
    for (std::size_t i = 0; i < d_embeddings.data.size(); ++i)
        d_embeddings.data[i] += scale * other.d_embeddings.data[i];
    for (std::size_t i = 0; i < d_unembedding.data.size(); ++i)
        d_unembedding.data[i] += scale * other.d_unembedding.data[i];
    for (std::size_t i = 0; i < d_hidden_weight.data.size(); ++i)
        d_hidden_weight.data[i] += scale * other.d_hidden_weight.data[i];
    for (std::size_t i = 0; i < d_hidden_bias.size(); ++i)
        d_hidden_bias[i] += scale * other.d_hidden_bias[i];
    for (std::size_t i = 0; i < d_h.size(); ++i) d_h[i] += scale * other.d_h[i];
}

ForwardTrace forward_window(const ModelParams& params,
                            std::span<const std::uint32_t> context,
                            std::uint32_t target) {
    const std::size_t V = params.vocab_size();
    const std::size_t H = params.hidden_dim();
    if (context.empty()) throw std::invalid_argument("forward: empty context");
    for (std::uint32_t c : context)
        if (c >= V) throw std::invalid_argument("forward: context id out of range");
    if (target >= V) throw std::invalid_argument("forward: target id out of range");

    ForwardTrace trace;
    trace.target = target;
    trace.context.assign(context.begin(), context.end());

    trace.pooled_input.assign(H, 0.0);
    const double inv_w = 1.0 / static_cast<double>(context.size());
    for (std::uint32_t c : context) {
        const auto row = params.embeddings.row(c);
        for (std::size_t d = 0; d < H; ++d) trace.pooled_input[d] += inv_w * row[d];
    }
    check_finite(trace.pooled_input, "embedding lookup");

    if (params.has_hidden) {
        trace.pre_activation.assign(H, 0.0);
        for (std::size_t i = 0; i < H; ++i) {
            double s = params.hidden_bias[i];
            const auto wrow = params.hidden_weight.row(i);
            for (std::size_t j = 0; j < H; ++j) s += wrow[j] * trace.pooled_input[j];
            trace.pre_activation[i] = s;
        }
        check_finite(trace.pre_activation, "hidden transform");
        trace.h.resize(H);
        for (std::size_t i = 0; i < H; ++i) trace.h[i] = std::tanh(trace.pre_activation[i]);
    } else {
        trace.h = trace.pooled_input;
    }

    const Matrix& out = params.output_matrix();
    trace.logits.resize(V);
    for (std::size_t i = 0; i < V; ++i) {
        double s = 0.0;
        const auto orow = out.row(i);
        for (std::size_t d = 0; d < H; ++d) s += orow[d] * trace.h[d];
        trace.logits[i] = s;
    }
    check_finite(trace.logits, "logits");

    const double lmax = *std::max_element(trace.logits.begin(), trace.logits.end());
    double sum = 0.0;
    trace.probs.resize(V);
    for (std::size_t i = 0; i < V; ++i) {
        trace.probs[i] = std::exp(trace.logits[i] - lmax);
        sum += trace.probs[i];
    }
    const double log_sum = std::log(sum);
    for (std::size_t i = 0; i < V; ++i) trace.probs[i] /= sum;
    check_finite(trace.probs, "softmax");

    trace.loss = log_sum - (trace.logits[target] - lmax);
    if (!std::isfinite(trace.loss)) throw std::runtime_error("forward: non-finite loss");
    return trace;
}

ForwardTrace forward(const ModelParams& params, std::uint32_t context,
                     std::uint32_t target) {
    const std::uint32_t ctx[1] = {context};
    return forward_window(params, ctx, target);
}

void backward_accumulate(const ModelParams& params, const ForwardTrace& trace,
                         double scale, Gradients& grads) {
    const std::size_t V = params.vocab_size();
    const std::size_t H = params.hidden_dim();
    if (trace.probs.size() != V || trace.h.size() != H)
        throw std::invalid_argument("backward: trace does not match params");

    const Matrix& out = params.output_matrix();
    Matrix& d_out = params.tie_weights ? grads.d_embeddings : grads.d_unembedding;

    // head: g_i = (p_i - delta_it) * h, and d_h = sum_i (p_i - delta_it) * o_i
    std::vector<double> d_h(H, 0.0);
    for (std::size_t i = 0; i < V; ++i) {
        const double coeff = trace.probs[i] - (i == trace.target ? 1.0 : 0.0);
        auto drow = d_out.row(i);
        const auto orow = out.row(i);
        for (std::size_t d = 0; d < H; ++d) {
            drow[d] += scale * coeff * trace.h[d];
            d_h[d] += coeff * orow[d];
        }
    }
    for (std::size_t d = 0; d < H; ++d) grads.d_h[d] += scale * d_h[d];

    if (params.head_only_grad) return;

    // input path: through the hidden transform into the context embedding rows
    std::vector<double> d_pooled(H, 0.0);
    if (params.has_hidden) {
        std::vector<double> d_pre(H);
        for (std::size_t i = 0; i < H; ++i) {
            const double th = std::tanh(trace.pre_activation[i]);
            d_pre[i] = (1.0 - th * th) * d_h[i];
        }
        for (std::size_t i = 0; i < H; ++i) {
            auto dwrow = grads.d_hidden_weight.row(i);
            for (std::size_t j = 0; j < H; ++j)
                dwrow[j] += scale * d_pre[i] * trace.pooled_input[j];
            grads.d_hidden_bias[i] += scale * d_pre[i];
        }
        for (std::size_t j = 0; j < H; ++j) {
            double s = 0.0;
            for (std::size_t i = 0; i < H; ++i) s += params.hidden_weight.at(i, j) * d_pre[i];
            d_pooled[j] = s;
        }
    } else {
        d_pooled = d_h;
    }

    const double inv_w = scale / static_cast<double>(trace.context.size());
    for (std::uint32_t c : trace.context) {
        auto erow = grads.d_embeddings.row(c);
        for (std::size_t d = 0; d < H; ++d) erow[d] += inv_w * d_pooled[d];
    }
}

Gradients backward(const ModelParams& params, const ForwardTrace& trace) {
    Gradients grads;
    grads.resize_for(params);
    backward_accumulate(params, trace, 1.0, grads);
    return grads;
}

namespace {

double loss_at(const ModelParams& params, std::uint32_t context, std::uint32_t target) {
    return forward(params, context, target).loss;
}

double central_diff(ModelParams& params, double* slot, double step,
                    std::uint32_t context, std::uint32_t target) {
    const double saved = *slot;
    *slot = saved + step;
    const double up = loss_at(params, context, target);
    *slot = saved - step;
    const double down = loss_at(params, context, target);
    *slot = saved;
    return (up - down) / (2.0 * step);
}

double rel_err(double analytic, double numeric) {
    const double denom = std::max({std::abs(analytic), std::abs(numeric), 1e-12});
    return std::abs(analytic - numeric) / denom;
}

}  // namespace

double grad_check(const ModelParams& params, std::uint32_t context,
                  std::uint32_t target, double step) {
    if (step < 1e-7 || step > 1e-3)
        throw std::invalid_argument("grad_check: step outside [1e-7, 1e-3]");

    ModelParams work = params;
    work.head_only_grad = false;
    const Gradients grads = backward(work, forward(work, context, target));

    double worst = 0.0;
    auto probe = [&](double* slot, double analytic) {
        const double numeric = central_diff(work, slot, step, context, target);
        worst = std::max(worst, rel_err(analytic, numeric));
    };

    for (std::size_t i = 0; i < work.embeddings.data.size(); ++i)
        probe(&work.embeddings.data[i], grads.d_embeddings.data[i]);
    if (!work.tie_weights)
        for (std::size_t i = 0; i < work.unembedding.data.size(); ++i)
            probe(&work.unembedding.data[i], grads.d_unembedding.data[i]);
    if (work.has_hidden) {
        for (std::size_t i = 0; i < work.hidden_weight.data.size(); ++i)
            probe(&work.hidden_weight.data[i], grads.d_hidden_weight.data[i]);
        for (std::size_t i = 0; i < work.hidden_bias.size(); ++i)
            probe(&work.hidden_bias[i], grads.d_hidden_bias[i]);
    }
    return worst;
}

}  // namespace embedlab::model
