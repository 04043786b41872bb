#include "embedlab/manifest.hpp"

#include <fstream>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

namespace embedlab::manifest {

namespace {

nlohmann::ordered_json metrics_to_json(const metrics::MetricsReport& r) {
    return nlohmann::ordered_json::parse(metrics::report_json(r));
}

}  // namespace

std::string manifest_json(const RunManifest& m) {
    nlohmann::ordered_json j;
    j["config_hash"] = m.config_hash;
    j["seed"] = m.seed;
    j["snapshots"] = nlohmann::ordered_json::array();
    for (const Snapshot& s : m.snapshots) {
        nlohmann::ordered_json sj;
        sj["step"] = s.step;
        sj["loss"] = s.loss;
        sj["mu_drift"] = s.mu_drift;
        sj["update_sum_norm"] = s.update_sum_norm;
        j["snapshots"].push_back(std::move(sj));
    }
    if (m.final_metrics) j["final_metrics"] = metrics_to_json(*m.final_metrics);
    if (m.final_loss) j["final_loss"] = *m.final_loss;
    if (m.aborted_at_step) j["aborted_at_step"] = *m.aborted_at_step;
    j["wall_time_s"] = m.wall_time_s;
    return j.dump(2) + "\n";
}

RunManifest parse_manifest(const std::string& text) {
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(text);
    } catch (const nlohmann::json::exception& e) {
        throw std::invalid_argument(std::string("manifest is not valid JSON: ") + e.what());
    }

    RunManifest m;
    m.config_hash = j.at("config_hash").get<std::string>();
    m.seed = j.at("seed").get<std::uint64_t>();
    for (const auto& sj : j.at("snapshots")) {
        Snapshot s;
        s.step = sj.at("step").get<std::uint64_t>();
        s.loss = sj.at("loss").get<double>();
        s.mu_drift = sj.at("mu_drift").get<double>();
        s.update_sum_norm = sj.at("update_sum_norm").get<double>();
        m.snapshots.push_back(s);
    }
    if (j.contains("final_metrics"))
        m.final_metrics = metrics::parse_report_json(j.at("final_metrics").dump());
    if (j.contains("final_loss")) m.final_loss = j.at("final_loss").get<double>();
    if (j.contains("aborted_at_step"))
        m.aborted_at_step = j.at("aborted_at_step").get<std::uint64_t>();
    m.wall_time_s = j.value("wall_time_s", 0.0);
    return m;
}

RunManifest load_manifest(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open manifest: " + path);
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse_manifest(buf.str());
}

bool equivalent(const std::string& json_a, const std::string& json_b) {
    nlohmann::ordered_json a = nlohmann::ordered_json::parse(json_a);
    nlohmann::ordered_json b = nlohmann::ordered_json::parse(json_b);
    a.erase("wall_time_s");
    b.erase("wall_time_s");
    return a.dump() == b.dump();
}

}  // namespace embedlab::manifest
