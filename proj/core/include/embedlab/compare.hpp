#pragma once

#include <string>
#include <vector>

#include "embedlab/manifest.hpp"
#include "embedlab/stats.hpp"

namespace embedlab::compare {

// One metric's comparison between two run sets.
struct MetricRow {
    std::string metric;
    stats::Direction direction = stats::Direction::lower_better;
    double mean0 = 0.0;
    double mean1 = 0.0;
    std::optional<double> std0;
    std::optional<double> std1;
    stats::SignificanceResult result;

    // Table-2-style bolding rule: the better value is marked when the
    // difference clears the one-sided threshold in its favor.
    bool winner_is_1() const;
    bool winner_significant() const;
};

struct Comparison {
    std::size_t seed_count = 0;
    std::vector<MetricRow> rows;
};

// Compares the metric panels of two manifest sets. Requires equal seed sets,
// complete (non-aborted) runs, and identical metric sets (rbar either present
// everywhere or absent everywhere).
Comparison compare_manifests(const std::vector<manifest::RunManifest>& variant0,
                             const std::vector<manifest::RunManifest>& variant1);

// CSV: metric,mean0,std0,mean1,std1,diff,threshold,significant. Std and
// threshold cells are empty and significant reads "n/a" on the S=1 path.
std::string comparison_csv(const Comparison& cmp);

// Human-readable table in mean-(uncertainty) shorthand; the winning value
// carries a trailing '*' when the difference is significant.
std::string comparison_table(const Comparison& cmp, const std::string& label0,
                             const std::string& label1);

}  // namespace embedlab::compare
