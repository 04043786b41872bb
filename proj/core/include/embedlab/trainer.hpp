#pragma once

#include <cstdint>
#include <optional>

#include "embedlab/checkpoint.hpp"
#include "embedlab/config.hpp"
#include "embedlab/corpus.hpp"
#include "embedlab/manifest.hpp"
#include "embedlab/model.hpp"
#include "embedlab/optim.hpp"

namespace embedlab::train {

// Evaluation draw: fixed seed and size so every run on the same corpus is
// scored on the identical example sequence.
inline constexpr std::uint64_t kEvalSeed = 0x4556414Cull;
inline constexpr std::size_t kEvalExamples = 2048;

// Corpus artifacts shared by all seeds of an experiment.
struct CorpusBundle {
    corpus::Vocabulary vocab;
    corpus::TokenStream stream;
    corpus::UnigramDistribution unigram;
};

// Builds the bundle from the config: the synthetic Zipfian generator when
// corpus == "synthetic", otherwise tokenizes the named text file.
CorpusBundle prepare_corpus(const config::ExperimentConfig& cfg);

// Single deterministic training run. The embedding-type groups (embeddings,
// and the unembedding when untied) step with the configured optimizer kind;
// hidden-layer parameters always use decoupled-decay Adam (decay on the
// weight only), and are left untouched under head_only_grad. Conservation
// diagnostics (mu drift, update sums) and the final metrics are taken over
// the output matrix — the tied embedding table, or the unembedding when
// untied — which is where the head gradients land.
class Trainer {
  public:
    Trainer(const config::ExperimentConfig& cfg, const CorpusBundle& bundle,
            std::uint64_t seed);
    Trainer(const config::ExperimentConfig& cfg, const CorpusBundle& bundle,
            std::uint64_t seed, checkpoint::Checkpoint resume_from);

    // Advances to min(until, cfg.steps); stops early when a loss goes
    // non-finite. Returns the step count actually reached.
    std::uint64_t run_to(std::uint64_t until);
    std::uint64_t run_all();

    bool aborted() const { return aborted_at_step_.has_value(); }
    std::uint64_t step() const { return ck_.step; }
    const checkpoint::Checkpoint& state() const { return ck_; }

    // Mean loss over the fixed evaluation draw.
    double eval_loss() const;

    // Manifest of the run so far (wall_time_s left at zero for the caller).
    manifest::RunManifest finish() const;

  private:
    const Matrix& out_matrix() const { return ck_.params.output_matrix(); }
    Matrix& out_matrix_mut() {
        return ck_.params.tie_weights ? ck_.params.embeddings : ck_.params.unembedding;
    }
    void embedding_group_step(Matrix& param, const Matrix& grad, bool is_output,
                              double lr, optim::UpdateRecord* rec);
    std::vector<double> current_mu() const;

    config::ExperimentConfig cfg_;
    const CorpusBundle* bundle_;
    std::uint64_t seed_;
    optim::Kind kind_;
    checkpoint::Checkpoint ck_;
    corpus::BatchSampler sampler_;
    std::uint64_t snapshot_interval_;
    std::optional<std::uint64_t> aborted_at_step_;
};

}  // namespace embedlab::train
