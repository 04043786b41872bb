#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "embedlab/metrics.hpp"

namespace embedlab::manifest {

// Periodic training diagnostics: batch loss, drift of the mean embedding from
// its initialization, and the norm of the summed embedding updates at that
// step.
struct Snapshot {
    std::uint64_t step = 0;
    double loss = 0.0;
    double mu_drift = 0.0;
    double update_sum_norm = 0.0;

    bool operator==(const Snapshot&) const = default;
};

// Everything a finished (or aborted) run reports. Two runs of the same
// config+seed must serialize identically except for wall_time_s.
struct RunManifest {
    std::string config_hash;
    std::uint64_t seed = 0;
    std::vector<Snapshot> snapshots;
    std::optional<metrics::MetricsReport> final_metrics;  // absent when aborted
    std::optional<double> final_loss;                     // absent when aborted
    std::optional<std::uint64_t> aborted_at_step;
    double wall_time_s = 0.0;
};

std::string manifest_json(const RunManifest& m);
RunManifest parse_manifest(const std::string& text);
RunManifest load_manifest(const std::string& path);

// Bit-equality of two serialized manifests with wall_time_s ignored.
bool equivalent(const std::string& json_a, const std::string& json_b);

}  // namespace embedlab::manifest
