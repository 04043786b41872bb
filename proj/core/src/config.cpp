#include "embedlab/config.hpp"

#include <fstream>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

#include "embedlab/hash.hpp"

namespace embedlab::config {

namespace {

using nlohmann::json;

[[noreturn]] void bad(const std::string& what) { throw std::invalid_argument(what); }

template <typename T>
void read_into(const json& j, const char* key, T& out) {
    try {
        out = j.get<T>();
    } catch (const json::exception&) {
        bad(std::string("config key '") + key + "' has the wrong type");
    }
}

void validate(const ExperimentConfig& c) {
    if (c.corpus.empty()) bad("config: corpus must not be empty");
    if (c.tokenizer != "word" && c.tokenizer != "byte")
        bad("config: tokenizer must be word or byte");
    if (c.max_vocab < 2) bad("config: max_vocab must be at least 2");
    if (c.synthetic_vocab < 2) bad("config: synthetic_vocab must be at least 2");
    if (c.synthetic_length < c.context_length + 1)
        bad("config: synthetic_length too short for the context length");
    if (c.synthetic_exponent < 0.0) bad("config: synthetic_exponent must be >= 0");
    if (c.context_length < 1) bad("config: context_length must be at least 1");
    if (c.hidden_dim < 1) bad("config: hidden_dim must be at least 1");
    if (c.init_std <= 0.0) bad("config: init_std must be positive");
    optim::kind_from_string(c.optimizer);  // throws on bad name
    if (c.optim.eta <= 0.0) bad("config: eta must be positive");
    if (c.optim.beta1 < 0.0 || c.optim.beta1 >= 1.0) bad("config: beta1 must be in [0,1)");
    if (c.optim.beta2 < 0.0 || c.optim.beta2 >= 1.0) bad("config: beta2 must be in [0,1)");
    if (c.optim.epsilon < 0.0) bad("config: epsilon must be non-negative");
    if (c.optim.momentum < 0.0 || c.optim.momentum >= 1.0)
        bad("config: momentum must be in [0,1)");
    if (c.optim.sgd_lr_factor <= 0.0) bad("config: sgd_lr_factor must be positive");
    if (c.optim.scale_exponent < -5 || c.optim.scale_exponent > 5)
        bad("config: scale_exponent must be in [-5, 5]");
    if (c.optim.weight_decay < 0.0) bad("config: weight_decay must be non-negative");
    if (c.optim.schedule.floor_frac < 0.0 || c.optim.schedule.floor_frac > 1.0)
        bad("config: floor_frac must be in [0, 1]");
    if (c.batch_size < 1) bad("config: batch_size must be at least 1");
    if (c.seeds.empty()) bad("config: seeds must not be empty");
    if (c.out_dir.empty()) bad("config: out_dir must not be empty");
    for (int n : c.n_grid)
        if (n < -5 || n > 5) bad("config: n_grid entries must be in [-5, 5]");
    for (double f : c.f_grid)
        if (f <= 0.0) bad("config: f_grid entries must be positive");
}

}  // namespace

ExperimentConfig parse_config(const std::string& json_text) {
    json j;
    try {
        j = json::parse(json_text);
    } catch (const json::exception& e) {
        bad(std::string("config is not valid JSON: ") + e.what());
    }
    if (!j.is_object()) bad("config must be a JSON object");

    ExperimentConfig c;
    for (const auto& [key, value] : j.items()) {
        if (key == "corpus") read_into(value, "corpus", c.corpus);
        else if (key == "tokenizer") read_into(value, "tokenizer", c.tokenizer);
        else if (key == "max_vocab") read_into(value, "max_vocab", c.max_vocab);
        else if (key == "synthetic_vocab") read_into(value, "synthetic_vocab", c.synthetic_vocab);
        else if (key == "synthetic_length") read_into(value, "synthetic_length", c.synthetic_length);
        else if (key == "synthetic_exponent") read_into(value, "synthetic_exponent", c.synthetic_exponent);
        else if (key == "synthetic_seed") read_into(value, "synthetic_seed", c.synthetic_seed);
        else if (key == "context_length") read_into(value, "context_length", c.context_length);
        else if (key == "hidden_dim") read_into(value, "hidden_dim", c.hidden_dim);
        else if (key == "has_hidden") read_into(value, "has_hidden", c.has_hidden);
        else if (key == "tie_weights") read_into(value, "tie_weights", c.tie_weights);
        else if (key == "head_only_grad") read_into(value, "head_only_grad", c.head_only_grad);
        else if (key == "init_std") read_into(value, "init_std", c.init_std);
        else if (key == "optimizer") read_into(value, "optimizer", c.optimizer);
        else if (key == "eta") read_into(value, "eta", c.optim.eta);
        else if (key == "beta1") read_into(value, "beta1", c.optim.beta1);
        else if (key == "beta2") read_into(value, "beta2", c.optim.beta2);
        else if (key == "epsilon") read_into(value, "epsilon", c.optim.epsilon);
        else if (key == "momentum") read_into(value, "momentum", c.optim.momentum);
        else if (key == "sgd_lr_factor") read_into(value, "sgd_lr_factor", c.optim.sgd_lr_factor);
        else if (key == "scale_exponent") read_into(value, "scale_exponent", c.optim.scale_exponent);
        else if (key == "weight_decay") read_into(value, "weight_decay", c.optim.weight_decay);
        else if (key == "warmup_steps") read_into(value, "warmup_steps", c.optim.schedule.warmup_steps);
        else if (key == "floor_frac") read_into(value, "floor_frac", c.optim.schedule.floor_frac);
        else if (key == "steps") read_into(value, "steps", c.steps);
        else if (key == "batch_size") read_into(value, "batch_size", c.batch_size);
        else if (key == "seeds") read_into(value, "seeds", c.seeds);
        else if (key == "out_dir") read_into(value, "out_dir", c.out_dir);
        else if (key == "n_grid") read_into(value, "n_grid", c.n_grid);
        else if (key == "f_grid") read_into(value, "f_grid", c.f_grid);
        else bad("config: unknown key '" + key + "'");
    }
    validate(c);
    return c;
}

ExperimentConfig load_config(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) bad("cannot open config file: " + path);
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse_config(buf.str());
}

std::string config_json(const ExperimentConfig& c) {
    nlohmann::ordered_json j;
    j["corpus"] = c.corpus;
    j["tokenizer"] = c.tokenizer;
    j["max_vocab"] = c.max_vocab;
    j["synthetic_vocab"] = c.synthetic_vocab;
    j["synthetic_length"] = c.synthetic_length;
    j["synthetic_exponent"] = c.synthetic_exponent;
    j["synthetic_seed"] = c.synthetic_seed;
    j["context_length"] = c.context_length;
    j["hidden_dim"] = c.hidden_dim;
    j["has_hidden"] = c.has_hidden;
    j["tie_weights"] = c.tie_weights;
    j["head_only_grad"] = c.head_only_grad;
    j["init_std"] = c.init_std;
    j["optimizer"] = c.optimizer;
    j["eta"] = c.optim.eta;
    j["beta1"] = c.optim.beta1;
    j["beta2"] = c.optim.beta2;
    j["epsilon"] = c.optim.epsilon;
    j["momentum"] = c.optim.momentum;
    j["sgd_lr_factor"] = c.optim.sgd_lr_factor;
    j["scale_exponent"] = c.optim.scale_exponent;
    j["weight_decay"] = c.optim.weight_decay;
    j["warmup_steps"] = c.optim.schedule.warmup_steps;
    j["floor_frac"] = c.optim.schedule.floor_frac;
    j["steps"] = c.steps;
    j["batch_size"] = c.batch_size;
    j["seeds"] = c.seeds;
    j["out_dir"] = c.out_dir;
    j["n_grid"] = c.n_grid;
    j["f_grid"] = c.f_grid;
    return j.dump(2) + "\n";
}

std::string config_hash(const ExperimentConfig& cfg) {
    return hash::to_hex(hash::fnv1a64(config_json(cfg)));
}

}  // namespace embedlab::config
