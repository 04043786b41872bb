#include "embedlab/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>
#include <stdexcept>
#include <unordered_map>

#include <json.hpp>

#include "embedlab/csv.hpp"

namespace embedlab::metrics {

namespace {

bool all_zero(const Matrix& e) {
    for (double x : e.data)
        if (x != 0.0) return false;
    return true;
}

// log sum_i exp(c . e_i), max-shifted.
double log_partition(const Matrix& e, std::span<const double> c, double sign) {
    std::vector<double> dots(e.rows);
    double dmax = -std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < e.rows; ++i) {
        double s = 0.0;
        const auto row = e.row(i);
        for (std::size_t d = 0; d < e.cols; ++d) s += sign * c[d] * row[d];
        dots[i] = s;
        dmax = std::max(dmax, s);
    }
    double sum = 0.0;
    for (double d : dots) sum += std::exp(d - dmax);
    return dmax + std::log(sum);
}

std::vector<double> row_norms(const Matrix& e) {
    std::vector<double> norms(e.rows);
    for (std::size_t i = 0; i < e.rows; ++i) {
        double s = 0.0;
        for (double x : e.row(i)) s += x * x;
        norms[i] = std::sqrt(s);
    }
    return norms;
}

}  // namespace

double isotropy(const Matrix& e, bool* degenerate) {
    if (e.rows < 2 || e.cols < 1)
        throw std::invalid_argument("isotropy: need V >= 2 and H >= 1");
    if (degenerate) *degenerate = false;
    if (all_zero(e)) {
        if (degenerate) *degenerate = true;
        return 1.0;
    }

    const linalg::EigenResult eig = linalg::sym_eigen(linalg::gram_small(e.transposed()));
    double lo = std::numeric_limits<double>::infinity();
    double hi = -std::numeric_limits<double>::infinity();
    std::vector<double> c(e.cols);
    for (std::size_t k = 0; k < e.cols; ++k) {
        for (std::size_t d = 0; d < e.cols; ++d) c[d] = eig.eigenvectors.at(d, k);
        for (double sign : {1.0, -1.0}) {
            const double lz = log_partition(e, c, sign);
            lo = std::min(lo, lz);
            hi = std::max(hi, lz);
        }
    }
    return std::exp(lo - hi);
}

MeanStats mean_embedding_stats(const Matrix& e) {
    if (e.rows < 1) throw std::invalid_argument("mean_embedding_stats: empty matrix");
    MeanStats stats;

    std::vector<double> mu(e.cols, 0.0);
    const double inv_v = 1.0 / static_cast<double>(e.rows);
    for (std::size_t i = 0; i < e.rows; ++i) {
        const auto row = e.row(i);
        for (std::size_t d = 0; d < e.cols; ++d) mu[d] += inv_v * row[d];
    }
    double s = 0.0;
    for (double x : mu) s += x * x;
    stats.mu_norm = std::sqrt(s);

    double norm_sum = 0.0;
    for (double n : row_norms(e)) norm_sum += n;
    stats.mean_row_norm = inv_v * norm_sum;

    stats.mu_ratio = stats.mean_row_norm > 0.0 ? stats.mu_norm / stats.mean_row_norm : 0.0;
    return stats;
}

double rho(const Matrix& e, const corpus::UnigramDistribution& unigram,
           bool* constant_norms) {
    if (unigram.probs.size() != e.rows)
        throw std::invalid_argument("rho: unigram length does not match V");
    const std::vector<double> norms = row_norms(e);
    bool constant = false;
    const double r = linalg::pearson(norms, unigram.probs, &constant);
    if (constant_norms) *constant_norms = constant;
    return 100.0 * r;
}

double kappa(const Matrix& e, bool* degenerate) {
    if (e.rows < 1 || e.cols < 1) throw std::invalid_argument("kappa: empty matrix");
    if (degenerate) *degenerate = false;
    const std::vector<double> sv = linalg::singular_values(e);
    const double smax = sv.front();
    if (smax == 0.0) {
        if (degenerate) *degenerate = true;
        return 0.0;
    }
    return 100.0 * sv.back() / smax;
}

RbarResult rbar(const Matrix& e, const corpus::Vocabulary& vocab,
                const std::vector<SimilarityBenchmark>& benchmarks) {
    if (benchmarks.empty()) throw std::invalid_argument("rbar: no benchmarks");
    if (vocab.size() != e.rows)
        throw std::invalid_argument("rbar: vocabulary size does not match V");

    std::unordered_map<std::string_view, std::size_t> index;
    index.reserve(vocab.tokens.size());
    for (std::size_t i = 0; i < vocab.tokens.size(); ++i)
        index.emplace(vocab.tokens[i], i);

    const std::vector<double> norms = row_norms(e);
    RbarResult result;
    double sum = 0.0;
    for (const SimilarityBenchmark& bench : benchmarks) {
        BenchmarkScore score;
        score.name = bench.name;
        std::vector<double> cosines, golds;
        for (const auto& pair : bench.pairs) {
            const auto ia = index.find(pair.token_a);
            const auto ib = index.find(pair.token_b);
            if (ia == index.end() || ib == index.end() || norms[ia->second] == 0.0 ||
                norms[ib->second] == 0.0) {
                ++score.skipped_pairs;
                continue;
            }
            double dot = 0.0;
            const auto ra = e.row(ia->second);
            const auto rb = e.row(ib->second);
            for (std::size_t d = 0; d < e.cols; ++d) dot += ra[d] * rb[d];
            cosines.push_back(dot / (norms[ia->second] * norms[ib->second]));
            golds.push_back(pair.gold);
        }
        if (cosines.size() < 2)
            throw std::invalid_argument("rbar: benchmark '" + bench.name +
                                        "' has fewer than 2 resolvable pairs");
        score.used_pairs = cosines.size();
        score.correlation = linalg::pearson(cosines, golds);
        sum += score.correlation;
        result.per_benchmark.push_back(std::move(score));
    }
    result.rbar = sum / static_cast<double>(result.per_benchmark.size());
    return result;
}

SimilarityBenchmark load_benchmark_tsv(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open benchmark file: " + path);

    SimilarityBenchmark bench;
    const std::size_t slash = path.find_last_of("/\\");
    std::string stem = slash == std::string::npos ? path : path.substr(slash + 1);
    const std::size_t dot = stem.find_last_of('.');
    if (dot != std::string::npos && dot > 0) stem.resize(dot);
    bench.name = stem;

    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        const std::size_t t1 = line.find('\t');
        const std::size_t t2 = t1 == std::string::npos ? std::string::npos
                                                       : line.find('\t', t1 + 1);
        if (t2 == std::string::npos)
            throw std::runtime_error(path + ":" + std::to_string(lineno) +
                                     ": expected token_a<TAB>token_b<TAB>score");
        SimilarityBenchmark::Pair pair;
        pair.token_a = line.substr(0, t1);
        pair.token_b = line.substr(t1 + 1, t2 - t1 - 1);
        const std::string score_text = line.substr(t2 + 1);
        try {
            std::size_t used = 0;
            pair.gold = std::stod(score_text, &used);
            if (used != score_text.size()) throw std::invalid_argument("trailing junk");
        } catch (const std::exception&) {
            throw std::runtime_error(path + ":" + std::to_string(lineno) +
                                     ": bad score '" + score_text + "'");
        }
        bench.pairs.push_back(std::move(pair));
    }
    return bench;
}

MetricsReport compute_report(const Matrix& e, const corpus::UnigramDistribution& unigram,
                             const corpus::Vocabulary& vocab,
                             const std::vector<SimilarityBenchmark>& benchmarks) {
    MetricsReport report;
    report.iso = isotropy(e);
    const MeanStats stats = mean_embedding_stats(e);
    report.mu_norm = stats.mu_norm;
    report.mean_row_norm = stats.mean_row_norm;
    report.mu_ratio = stats.mu_ratio;
    report.rho = rho(e, unigram);
    report.kappa = kappa(e);
    if (!benchmarks.empty()) report.rbar = rbar(e, vocab, benchmarks).rbar;
    return report;
}

std::string report_json(const MetricsReport& report) {
    nlohmann::ordered_json j;
    j["iso"] = report.iso;
    j["mu_norm"] = report.mu_norm;
    j["mean_row_norm"] = report.mean_row_norm;
    j["mu_ratio"] = report.mu_ratio;
    j["rho"] = report.rho;
    j["kappa"] = report.kappa;
    if (report.rbar) j["rbar"] = *report.rbar;
    return j.dump(2) + "\n";
}

MetricsReport parse_report_json(const std::string& text) {
    const nlohmann::json j = nlohmann::json::parse(text);
    MetricsReport report;
    report.iso = j.at("iso").get<double>();
    report.mu_norm = j.at("mu_norm").get<double>();
    report.mean_row_norm = j.at("mean_row_norm").get<double>();
    report.mu_ratio = j.at("mu_ratio").get<double>();
    report.rho = j.at("rho").get<double>();
    report.kappa = j.at("kappa").get<double>();
    if (j.contains("rbar")) report.rbar = j.at("rbar").get<double>();
    return report;
}

std::string report_csv(const MetricsReport& report) {
    std::string out = "iso,mu_norm,mean_row_norm,mu_ratio,rho,kappa,rbar\n";
    out += csv::format_double(report.iso) + ',';
    out += csv::format_double(report.mu_norm) + ',';
    out += csv::format_double(report.mean_row_norm) + ',';
    out += csv::format_double(report.mu_ratio) + ',';
    out += csv::format_double(report.rho) + ',';
    out += csv::format_double(report.kappa) + ',';
    if (report.rbar) out += csv::format_double(*report.rbar);
    out += '\n';
    return out;
}

}  // namespace embedlab::metrics
