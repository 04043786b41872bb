#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "embedlab/manifest.hpp"
#include "embedlab/model.hpp"
#include "embedlab/optim.hpp"

namespace embedlab::checkpoint {

// Everything a run needs to resume bit-exactly: model parameters, every
// optimizer state (unused ones stay empty), the step counter, the batch
// sampler's RNG state, the initial mean embedding mu0 that drift is measured
// against, and the snapshots taken so far (so a resumed run's manifest equals
// the uninterrupted one).
struct Checkpoint {
    model::ModelParams params;
    optim::Kind kind = optim::Kind::adam;
    optim::SgdState emb_sgd;
    optim::SgdState unemb_sgd;
    optim::AdamState emb_adam;
    optim::AdamState unemb_adam;
    optim::AdamState hidden_w;
    optim::AdamState hidden_b;
    std::uint64_t step = 0;
    std::uint64_t sampler_state = 0;
    std::vector<double> mu0;
    std::vector<manifest::Snapshot> snapshots;
};

// Binary container, native endianness, doubles stored verbatim so that a
// save/load round trip is bit-exact. Layout: magic "EMBL", version, flags,
// then fixed-order sections.
void save(const std::string& path, const Checkpoint& ck);
Checkpoint load(const std::string& path);

}  // namespace embedlab::checkpoint
