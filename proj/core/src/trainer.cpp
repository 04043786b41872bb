#include "embedlab/trainer.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "embedlab/metrics.hpp"

namespace embedlab::train {

namespace {

double l2_norm(std::span<const double> v) {
    double s = 0.0;
    for (double x : v) s += x * x;
    return std::sqrt(s);
}

double l2_distance(std::span<const double> a, std::span<const double> b) {
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        const double d = a[i] - b[i];
        s += d * d;
    }
    return std::sqrt(s);
}

std::uint64_t snapshot_interval_for(std::size_t steps) {
    return std::max<std::uint64_t>(steps / 50, 1);
}

}  // namespace

CorpusBundle prepare_corpus(const config::ExperimentConfig& cfg) {
    CorpusBundle bundle;
    if (cfg.corpus == "synthetic") {
        corpus::SyntheticSpec spec;
        spec.vocab_size = cfg.synthetic_vocab;
        spec.length = cfg.synthetic_length;
        spec.exponent = cfg.synthetic_exponent;
        spec.seed = cfg.synthetic_seed;
        bundle.vocab = corpus::synthetic_vocab(spec.vocab_size);
        bundle.stream = corpus::synthetic_stream(spec, cfg.context_length);
    } else {
        const std::string text = corpus::read_text_file(cfg.corpus);
        const corpus::TokenizerMode mode = cfg.tokenizer == "word"
                                               ? corpus::TokenizerMode::word
                                               : corpus::TokenizerMode::byte;
        bundle.vocab = corpus::build_vocab(text, mode, cfg.max_vocab);
        bundle.stream = corpus::encode(text, bundle.vocab, mode, cfg.context_length);
    }
    if (bundle.stream.ids.size() < cfg.context_length + 1)
        throw std::invalid_argument("corpus too short for the context length");
    bundle.unigram = corpus::unigram(bundle.stream, bundle.vocab);
    return bundle;
}

Trainer::Trainer(const config::ExperimentConfig& cfg, const CorpusBundle& bundle,
                 std::uint64_t seed)
    : cfg_(cfg),
      bundle_(&bundle),
      seed_(seed),
      kind_(optim::kind_from_string(cfg.optimizer)),
      sampler_(bundle.stream, derive_seed(seed, 1)),
      snapshot_interval_(snapshot_interval_for(cfg.steps)) {
    SplitMix64 init_rng(derive_seed(seed, 0));
    ck_.params = model::init_params(bundle.vocab.size(), cfg.hidden_dim, cfg.has_hidden,
                                    cfg.tie_weights, cfg.head_only_grad, cfg.init_std,
                                    init_rng);
    ck_.kind = kind_;
    ck_.mu0 = current_mu();
    ck_.sampler_state = sampler_.rng_state();
}

Trainer::Trainer(const config::ExperimentConfig& cfg, const CorpusBundle& bundle,
                 std::uint64_t seed, checkpoint::Checkpoint resume_from)
    : cfg_(cfg),
      bundle_(&bundle),
      seed_(seed),
      kind_(optim::kind_from_string(cfg.optimizer)),
      sampler_(bundle.stream, 0),
      snapshot_interval_(snapshot_interval_for(cfg.steps)) {
    ck_ = std::move(resume_from);
    if (ck_.kind != kind_)
        throw std::invalid_argument("checkpoint was written by a different optimizer kind");
    if (ck_.params.vocab_size() != bundle.vocab.size() ||
        ck_.params.hidden_dim() != cfg.hidden_dim ||
        ck_.params.has_hidden != cfg.has_hidden ||
        ck_.params.tie_weights != cfg.tie_weights ||
        ck_.params.head_only_grad != cfg.head_only_grad)
        throw std::invalid_argument("checkpoint does not match the config's model shape");
    if (ck_.step > cfg.steps)
        throw std::invalid_argument("checkpoint is past the configured step count");
    sampler_.set_rng_state(ck_.sampler_state);
}

std::vector<double> Trainer::current_mu() const {
    const Matrix& e = out_matrix();
    std::vector<double> mu(e.cols, 0.0);
    const double inv_v = 1.0 / static_cast<double>(e.rows);
    for (std::size_t i = 0; i < e.rows; ++i) {
        const auto row = e.row(i);
        for (std::size_t d = 0; d < e.cols; ++d) mu[d] += inv_v * row[d];
    }
    return mu;
}

void Trainer::embedding_group_step(Matrix& param, const Matrix& grad, bool is_output,
                                   double lr, optim::UpdateRecord* rec) {
    // Tied setups route everything through the "emb" states; untied setups
    // give the unembedding its own.
    optim::SgdState& sgd = is_output && !cfg_.tie_weights ? ck_.unemb_sgd : ck_.emb_sgd;
    optim::AdamState& adam = is_output && !cfg_.tie_weights ? ck_.unemb_adam : ck_.emb_adam;
    switch (kind_) {
        case optim::Kind::sgd:
            optim::sgd_embedding_step(param, grad, sgd, cfg_.optim, lr, rec);
            break;
        case optim::Kind::adam:
            optim::adam_embedding_step(param, grad, adam, cfg_.optim, lr, rec);
            break;
        case optim::Kind::coupled_adam:
            optim::coupled_adam_step(param, grad, adam, cfg_.optim, lr, rec);
            break;
        case optim::Kind::scaled_coupled_adam:
            optim::scaled_coupled_adam_step(param, grad, adam, cfg_.optim, lr,
                                            cfg_.optim.scale_exponent, rec);
            break;
    }
}

std::uint64_t Trainer::run_to(std::uint64_t until) {
    until = std::min<std::uint64_t>(until, cfg_.steps);
    if (aborted_at_step_) return ck_.step;

    const std::size_t B = cfg_.batch_size;
    const std::size_t w = bundle_->stream.context_length;
    const double inv_b = 1.0 / static_cast<double>(B);
    model::Gradients grads;
    grads.resize_for(ck_.params);

    while (ck_.step < until) {
        const double lr = optim::schedule_lr(cfg_.optim, ck_.step, cfg_.steps);
        grads.zero();
        double loss_sum = 0.0;
        try {
            for (std::size_t b = 0; b < B; ++b) {
                const std::size_t pos = sampler_.next_position();
                const std::span<const std::uint32_t> context(
                    bundle_->stream.ids.data() + pos, w);
                const std::uint32_t target = bundle_->stream.ids[pos + w];
                const model::ForwardTrace trace =
                    model::forward_window(ck_.params, context, target);
                loss_sum += trace.loss;
                model::backward_accumulate(ck_.params, trace, inv_b, grads);
            }
        } catch (const std::runtime_error&) {
            aborted_at_step_ = ck_.step;
            ck_.sampler_state = sampler_.rng_state();
            return ck_.step;
        }

        const bool snap = (ck_.step + 1) % snapshot_interval_ == 0;
        optim::UpdateRecord rec;
        if (!cfg_.tie_weights)
            embedding_group_step(ck_.params.embeddings, grads.d_embeddings, false, lr,
                                 nullptr);
        embedding_group_step(out_matrix_mut(),
                             cfg_.tie_weights ? grads.d_embeddings : grads.d_unembedding,
                             true, lr, snap ? &rec : nullptr);
        if (cfg_.has_hidden && !cfg_.head_only_grad) {
            optim::adam_step(ck_.params.hidden_weight.data, grads.d_hidden_weight.data,
                             ck_.hidden_w, cfg_.optim, lr, cfg_.optim.weight_decay);
            optim::adam_step(ck_.params.hidden_bias, grads.d_hidden_bias, ck_.hidden_b,
                             cfg_.optim, lr, 0.0);
        }

        ++ck_.step;
        ck_.sampler_state = sampler_.rng_state();
        if (snap) {
            manifest::Snapshot s;
            s.step = ck_.step;
            s.loss = loss_sum * inv_b;
            s.mu_drift = l2_distance(current_mu(), ck_.mu0);
            s.update_sum_norm = l2_norm(rec.update_sum);
            ck_.snapshots.push_back(s);
        }
    }
    return ck_.step;
}

std::uint64_t Trainer::run_all() { return run_to(cfg_.steps); }

double Trainer::eval_loss() const {
    corpus::BatchSampler sampler(bundle_->stream, kEvalSeed);
    const std::size_t w = bundle_->stream.context_length;
    double loss_sum = 0.0;
    for (std::size_t k = 0; k < kEvalExamples; ++k) {
        const std::size_t pos = sampler.next_position();
        const std::span<const std::uint32_t> context(bundle_->stream.ids.data() + pos, w);
        const std::uint32_t target = bundle_->stream.ids[pos + w];
        loss_sum += model::forward_window(ck_.params, context, target).loss;
    }
    return loss_sum / static_cast<double>(kEvalExamples);
}

manifest::RunManifest Trainer::finish() const {
    manifest::RunManifest m;
    m.config_hash = config::config_hash(cfg_);
    m.seed = seed_;
    m.snapshots = ck_.snapshots;
    const bool healthy = !aborted_at_step_ && ck_.params.all_finite();
    if (!healthy) {
        m.aborted_at_step = aborted_at_step_ ? *aborted_at_step_ : ck_.step;
        return m;
    }
    m.final_metrics = metrics::compute_report(out_matrix(), bundle_->unigram, bundle_->vocab);
    m.final_loss = eval_loss();
    return m;
}

}  // namespace embedlab::train
