#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "embedlab/optim.hpp"

namespace embedlab::config {

// One experiment: corpus, model, optimizer, run plan, ablation grids. The
// JSON form is a single flat object whose keys are exactly the field names
// below (OptimConfig and Schedule fields appear inline). Unknown keys are
// rejected; omitted keys take the defaults shown here.
struct ExperimentConfig {
    // corpus: "synthetic" selects the built-in Zipfian generator, anything
    // else is read as a text file
    std::string corpus = "synthetic";
    std::string tokenizer = "word";  // word | byte, file corpora only
    std::size_t max_vocab = 512;
    std::size_t synthetic_vocab = 512;
    std::size_t synthetic_length = 200000;
    double synthetic_exponent = 1.0;
    std::uint64_t synthetic_seed = 42;
    std::size_t context_length = 1;

    // model (V comes from the vocabulary)
    std::size_t hidden_dim = 32;
    bool has_hidden = true;
    bool tie_weights = true;
    bool head_only_grad = false;
    double init_std = 0.02;

    // optimizer
    std::string optimizer = "adam";  // sgd | adam | coupled | scaled-coupled
    optim::OptimConfig optim;

    // run plan
    std::size_t steps = 1000;
    std::size_t batch_size = 32;
    std::vector<std::uint64_t> seeds = {1};
    std::string out_dir = "runs";

    // ablation grids
    std::vector<int> n_grid = {-5, -4, -3, -2, -1, 0, 1, 2, 3, 4, 5};
    std::vector<double> f_grid = {100, 200, 300, 400, 500, 600};

    bool operator==(const ExperimentConfig&) const = default;
};

// Parses and validates; throws std::invalid_argument naming the offending
// key. The echo contains every key with defaults materialized and re-parses
// to an identical config.
ExperimentConfig parse_config(const std::string& json_text);
ExperimentConfig load_config(const std::string& path);
std::string config_json(const ExperimentConfig& cfg);

// FNV-1a of the echoed JSON, as 16 hex digits.
std::string config_hash(const ExperimentConfig& cfg);

}  // namespace embedlab::config
