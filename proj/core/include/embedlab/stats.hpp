#pragma once

#include <optional>
#include <span>
#include <string>
#include <vector>

namespace embedlab::stats {

// One-sided Student's t quantile for alpha = 95%, nu = S - 1 = 2 degrees of
// freedom. The only entry the three-seed protocol needs; held as a constant,
// no t-distribution integration anywhere.
inline constexpr double kStudentT95Nu2 = 2.92;

enum class Direction { lower_better, higher_better };

// Per-seed results of one metric under one variant.
struct SeedSample {
    std::string metric_name;
    Direction direction = Direction::lower_better;
    std::vector<double> values;
};

struct SampleStats {
    double mean = 0.0;
    std::optional<double> std_dev;  // corrected (1/(S-1)); absent for S = 1
};

// Mean and corrected standard deviation. Rejects empty or non-finite input;
// a single value yields the mean with the deviation marked unavailable.
SampleStats sample_stats(std::span<const double> values);

// Verdict of the one-sided test for "variant 1 improves on variant 0".
// On the S = 3 path: threshold = t * sigma_d / sqrt(S); significant means
// mean_diff < -threshold for lower-better metrics and mean_diff > threshold
// for higher-better ones. On the S = 1 path only mean_diff is available.
struct SignificanceResult {
    double mean_diff = 0.0;  // mean1 - mean0
    std::optional<double> sigma_d;
    std::optional<double> threshold;
    std::optional<bool> significant;
    double t_value_used = 0.0;  // kStudentT95Nu2 on the t path, 0 otherwise
};

// Both samples must share direction and size; sizes other than 3 (t path)
// and 1 (raw difference) are rejected. sigma_d combines the two corrected
// deviations by Gaussian error propagation, sqrt(s0^2 + s1^2).
SignificanceResult significance(const SeedSample& sample0, const SeedSample& sample1);

// Concise uncertainty shorthand: "0.123 (4)" means 0.123 +/- 0.004. The mean is
// rounded so the deviation's leading significant digit lands in the last
// shown place; the parenthetical shows one digit, or two when the leading
// digit is 1 (PDG-style extension). A zero deviation renders the bare mean
// with at least one decimal and no parenthetical.
std::string format_shorthand(double mean, double std_dev);

}  // namespace embedlab::stats
