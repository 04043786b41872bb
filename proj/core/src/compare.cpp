#include "embedlab/compare.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <stdexcept>

#include "embedlab/csv.hpp"

namespace embedlab::compare {

namespace {

struct MetricSpec {
    const char* name;
    stats::Direction direction;
    double (*get)(const manifest::RunManifest&);
};

const MetricSpec kMetricSpecs[] = {
    {"loss", stats::Direction::lower_better,
     [](const manifest::RunManifest& m) { return *m.final_loss; }},
    {"iso", stats::Direction::higher_better,
     [](const manifest::RunManifest& m) { return m.final_metrics->iso; }},
    {"mu_norm", stats::Direction::lower_better,
     [](const manifest::RunManifest& m) { return m.final_metrics->mu_norm; }},
    {"mu_ratio", stats::Direction::lower_better,
     [](const manifest::RunManifest& m) { return m.final_metrics->mu_ratio; }},
    {"rho", stats::Direction::higher_better,
     [](const manifest::RunManifest& m) { return m.final_metrics->rho; }},
    {"kappa", stats::Direction::higher_better,
     [](const manifest::RunManifest& m) { return m.final_metrics->kappa; }},
};

bool has_rbar(const std::vector<manifest::RunManifest>& runs) {
    return std::all_of(runs.begin(), runs.end(), [](const manifest::RunManifest& m) {
        return m.final_metrics && m.final_metrics->rbar.has_value();
    });
}

void check_variant(const std::vector<manifest::RunManifest>& runs, const char* label) {
    if (runs.empty())
        throw std::invalid_argument(std::string("compare: no manifests for ") + label);
    for (const manifest::RunManifest& m : runs) {
        if (m.aborted_at_step || !m.final_metrics || !m.final_loss)
            throw std::invalid_argument(std::string("compare: aborted run in ") + label);
        if (m.final_metrics->rbar.has_value() !=
            runs.front().final_metrics->rbar.has_value())
            throw std::invalid_argument(
                std::string("compare: mismatched metric sets within ") + label);
    }
}

std::vector<std::uint64_t> sorted_seeds(const std::vector<manifest::RunManifest>& runs) {
    std::vector<std::uint64_t> seeds;
    for (const manifest::RunManifest& m : runs) seeds.push_back(m.seed);
    std::sort(seeds.begin(), seeds.end());
    return seeds;
}

std::string opt_str(const std::optional<double>& v) {
    return v ? csv::format_double(*v) : std::string();
}

}  // namespace

bool MetricRow::winner_is_1() const {
    return direction == stats::Direction::lower_better ? result.mean_diff < 0.0
                                                       : result.mean_diff > 0.0;
}

bool MetricRow::winner_significant() const {
    if (!result.threshold) return false;
    return std::abs(result.mean_diff) > *result.threshold;
}

Comparison compare_manifests(const std::vector<manifest::RunManifest>& variant0,
                             const std::vector<manifest::RunManifest>& variant1) {
    check_variant(variant0, "variant 0");
    check_variant(variant1, "variant 1");
    if (sorted_seeds(variant0) != sorted_seeds(variant1))
        throw std::invalid_argument("compare: seed sets differ between variants");
    const bool rbar0 = has_rbar(variant0);
    if (rbar0 != has_rbar(variant1))
        throw std::invalid_argument("compare: mismatched metric sets between variants");

    Comparison cmp;
    cmp.seed_count = variant0.size();

    std::vector<MetricSpec> specs(std::begin(kMetricSpecs), std::end(kMetricSpecs));
    if (rbar0)
        specs.push_back({"rbar", stats::Direction::higher_better,
                         [](const manifest::RunManifest& m) { return *m.final_metrics->rbar; }});

    for (const MetricSpec& spec : specs) {
        stats::SeedSample s0{spec.name, spec.direction, {}};
        stats::SeedSample s1{spec.name, spec.direction, {}};
        for (const manifest::RunManifest& m : variant0) s0.values.push_back(spec.get(m));
        for (const manifest::RunManifest& m : variant1) s1.values.push_back(spec.get(m));

        MetricRow row;
        row.metric = spec.name;
        row.direction = spec.direction;
        row.mean0 = stats::sample_stats(s0.values).mean;
        row.mean1 = stats::sample_stats(s1.values).mean;
        row.std0 = stats::sample_stats(s0.values).std_dev;
        row.std1 = stats::sample_stats(s1.values).std_dev;
        row.result = stats::significance(s0, s1);
        cmp.rows.push_back(std::move(row));
    }
    return cmp;
}

std::string comparison_csv(const Comparison& cmp) {
    std::string out = "metric,mean0,std0,mean1,std1,diff,threshold,significant\n";
    for (const MetricRow& row : cmp.rows) {
        out += row.metric + ',';
        out += csv::format_double(row.mean0) + ',';
        out += opt_str(row.std0) + ',';
        out += csv::format_double(row.mean1) + ',';
        out += opt_str(row.std1) + ',';
        out += csv::format_double(row.result.mean_diff) + ',';
        out += opt_str(row.result.threshold) + ',';
        out += row.result.threshold ? (row.winner_significant() ? "true" : "false") : "n/a";
        out += '\n';
    }
    return out;
}

std::string comparison_table(const Comparison& cmp, const std::string& label0,
                             const std::string& label1) {
    std::vector<std::array<std::string, 3>> cells;
    cells.push_back({"metric", label0, label1});
    for (const MetricRow& row : cmp.rows) {
        std::string v0 = row.std0 ? stats::format_shorthand(row.mean0, *row.std0)
                                  : csv::format_double(row.mean0);
        std::string v1 = row.std1 ? stats::format_shorthand(row.mean1, *row.std1)
                                  : csv::format_double(row.mean1);
        if (row.winner_significant()) (row.winner_is_1() ? v1 : v0) += " *";
        cells.push_back({row.metric, std::move(v0), std::move(v1)});
    }

    std::size_t width0 = 0, width1 = 0;
    for (const auto& row : cells) {
        width0 = std::max(width0, row[0].size());
        width1 = std::max(width1, row[1].size());
    }
    std::string out;
    for (const auto& row : cells) {
        out += row[0] + std::string(width0 - row[0].size() + 2, ' ');
        out += row[1] + std::string(width1 - row[1].size() + 2, ' ');
        out += row[2] + '\n';
    }
    return out;
}

}  // namespace embedlab::compare
