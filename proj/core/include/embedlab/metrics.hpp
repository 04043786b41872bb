#pragma once

#include <optional>
#include <string>
#include <vector>

#include "embedlab/corpus.hpp"
#include "embedlab/linalg.hpp"

namespace embedlab::metrics {

// Embedding-quality panel. All values finite; rbar present only when
// similarity benchmarks were supplied.
struct MetricsReport {
    double iso = 1.0;            // in [0, 1]; 1 is perfectly isotropic
    double mu_norm = 0.0;        // ||mu||, mu = vocabulary-mean embedding
    double mean_row_norm = 0.0;  // (1/V) sum_i ||e_i||
    double mu_ratio = 0.0;       // mu_norm / mean_row_norm (0 when the latter is 0)
    double rho = 0.0;            // 100 * pearson(row norms, unigram probs)
    double kappa = 0.0;          // 100 * sigma_min / sigma_max
    std::optional<double> rbar;  // mean similarity-benchmark correlation
};

// Word-pair similarity benchmark with gold scores.
struct SimilarityBenchmark {
    struct Pair {
        std::string token_a;
        std::string token_b;
        double gold = 0.0;
    };
    std::string name;
    std::vector<Pair> pairs;
};

struct BenchmarkScore {
    std::string name;
    double correlation = 0.0;
    std::size_t used_pairs = 0;
    std::size_t skipped_pairs = 0;
};

struct RbarResult {
    double rbar = 0.0;
    std::vector<BenchmarkScore> per_benchmark;
};

// Isotropy: Z(c) = sum_i exp(c . e_i) evaluated in log space over the 2H set
// {+c, -c} of unit eigenvectors of the H x H Gram matrix E^T E; the measure is
// min Z / max Z. Evaluating both signs makes the value independent of the
// eigensolver's sign convention. Degenerate all-zero input yields 1 and sets
// the flag.
double isotropy(const Matrix& e, bool* degenerate = nullptr);

struct MeanStats {
    double mu_norm = 0.0;
    double mean_row_norm = 0.0;
    double mu_ratio = 0.0;
};
MeanStats mean_embedding_stats(const Matrix& e);

// 100 * pearson correlation between row 2-norms and unigram probabilities.
// Constant norms yield 0 and set the flag.
double rho(const Matrix& e, const corpus::UnigramDistribution& unigram,
           bool* constant_norms = nullptr);

// 100 * smallest/largest singular value. All-zero input yields 0 and sets
// the flag.
double kappa(const Matrix& e, bool* degenerate = nullptr);

// Per benchmark: pearson correlation between embedding cosine similarities
// and gold scores over resolvable pairs; rbar is the unweighted mean across
// benchmarks. Pairs with unknown tokens (or a zero-norm embedding, where
// cosine is undefined) are skipped and counted. A benchmark that retains
// fewer than two resolvable pairs is rejected.
RbarResult rbar(const Matrix& e, const corpus::Vocabulary& vocab,
                const std::vector<SimilarityBenchmark>& benchmarks);

// TSV format: token_a<TAB>token_b<TAB>score, UTF-8, no header, one pair per
// line. The benchmark name is the file's stem.
SimilarityBenchmark load_benchmark_tsv(const std::string& path);

// Full panel. `unigram` drives rho; benchmarks drive rbar when non-empty.
MetricsReport compute_report(const Matrix& e, const corpus::UnigramDistribution& unigram,
                             const corpus::Vocabulary& vocab,
                             const std::vector<SimilarityBenchmark>& benchmarks = {});

// Flat JSON object with exactly the MetricsReport field names; rbar omitted
// when absent. Round-trips through parse_report_json.
std::string report_json(const MetricsReport& report);
MetricsReport parse_report_json(const std::string& text);

// One-row CSV form for harness aggregation: header + single data row, empty
// rbar cell when absent.
std::string report_csv(const MetricsReport& report);

}  // namespace embedlab::metrics
