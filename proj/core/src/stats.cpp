#include "embedlab/stats.hpp"

#include <cmath>
#include <cstdio>
#include <stdexcept>

#include "embedlab/csv.hpp"

namespace embedlab::stats {

SampleStats sample_stats(std::span<const double> values) {
    if (values.empty()) throw std::invalid_argument("sample_stats: empty sample");
    for (double v : values)
        if (!std::isfinite(v))
            throw std::invalid_argument("sample_stats: non-finite value");

    SampleStats stats;
    const double n = static_cast<double>(values.size());
    for (double v : values) stats.mean += v;
    stats.mean /= n;
    if (values.size() >= 2) {
        double ss = 0.0;
        for (double v : values) {
            const double d = v - stats.mean;
            ss += d * d;
        }
        stats.std_dev = std::sqrt(ss / (n - 1.0));
    }
    return stats;
}

SignificanceResult significance(const SeedSample& sample0, const SeedSample& sample1) {
    if (sample0.direction != sample1.direction)
        throw std::invalid_argument("significance: direction mismatch");
    if (sample0.values.size() != sample1.values.size())
        throw std::invalid_argument("significance: sample size mismatch");
    const std::size_t s = sample0.values.size();
    if (s != 1 && s != 3)
        throw std::invalid_argument("significance: only S = 1 and S = 3 are supported");

    const SampleStats stats0 = sample_stats(sample0.values);
    const SampleStats stats1 = sample_stats(sample1.values);

    SignificanceResult result;
    result.mean_diff = stats1.mean - stats0.mean;
    if (s == 1) return result;

    const double sigma_d = std::sqrt(*stats0.std_dev * *stats0.std_dev +
                                     *stats1.std_dev * *stats1.std_dev);
    const double threshold = kStudentT95Nu2 * sigma_d / std::sqrt(static_cast<double>(s));
    result.sigma_d = sigma_d;
    result.threshold = threshold;
    result.t_value_used = kStudentT95Nu2;
    result.significant = sample0.direction == Direction::lower_better
                             ? result.mean_diff < -threshold
                             : result.mean_diff > threshold;
    return result;
}

std::string format_shorthand(double mean, double std_dev) {
    if (std_dev < 0.0 || !std::isfinite(std_dev) || !std::isfinite(mean))
        throw std::invalid_argument("format_shorthand: bad input");

    if (std_dev == 0.0) {
        std::string s = csv::format_double(mean);
        if (s.find('.') == std::string::npos && s.find('e') == std::string::npos)
            s += ".0";
        return s;
    }

    const int lead_exp = static_cast<int>(std::floor(std::log10(std_dev)));
    const int lead_digit = static_cast<int>(std_dev * std::pow(10.0, -lead_exp));
    const int digits = lead_digit == 1 ? 2 : 1;
    const int place = lead_exp - (digits - 1);  // power of 10 of the last shown digit

    const long long paren = std::llround(std_dev * std::pow(10.0, -place));
    char buf[64];
    if (place < 0) {
        std::snprintf(buf, sizeof buf, "%.*f", -place, mean);
        return std::string(buf) + " (" + std::to_string(paren) + ")";
    }
    const double scale = std::pow(10.0, place);
    const long long mean_rounded = std::llround(mean / scale);
    std::snprintf(buf, sizeof buf, "%.0f", static_cast<double>(mean_rounded) * scale);
    return std::string(buf) + " (" +
           std::to_string(static_cast<long long>(static_cast<double>(paren) * scale)) + ")";
}

}  // namespace embedlab::stats
