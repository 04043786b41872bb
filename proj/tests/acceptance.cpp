// Acceptance gate: ten numbered criteria, one [PASS]/[FAIL] line each,
// non-zero exit when any fails. Heavier criteria share a lazily trained
// panel of runs under the system temp directory.

#include <chrono>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iomanip>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "embedlab/checkpoint.hpp"
#include "embedlab/cli.hpp"
#include "embedlab/compare.hpp"
#include "embedlab/config.hpp"
#include "embedlab/manifest.hpp"
#include "embedlab/metrics.hpp"
#include "embedlab/model.hpp"
#include "embedlab/optim.hpp"
#include "embedlab/probe.hpp"
#include "embedlab/rng.hpp"
#include "embedlab/stats.hpp"
#include "embedlab/trainer.hpp"
#include "oracles.hpp"

namespace fs = std::filesystem;
using namespace embedlab;

namespace {

void require(bool cond, const std::string& what) {
    if (!cond) throw std::runtime_error(what);
}

std::string num(double v) {
    std::ostringstream ss;
    ss << std::setprecision(6) << v;
    return ss.str();
}

fs::path work_root() {
    static const fs::path root = [] {
        fs::path p = fs::temp_directory_path() / "embedlab_acceptance";
        fs::remove_all(p);
        fs::create_directories(p);
        return p;
    }();
    return root;
}

std::string read_text(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    require(in.good(), "cannot read " + path.string());
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

void write_text(const fs::path& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    out << text;
}

int run_cli(std::vector<std::string> args, std::string* out_text = nullptr) {
    std::ostringstream out, err;
    int code = cli::run(std::move(args), out, err);
    if (code != 0) throw std::runtime_error("cli failed: " + err.str());
    if (out_text) *out_text = out.str();
    return code;
}

double frob_delta(const Matrix& a, const Matrix& b) {
    double s = 0.0;
    for (std::size_t k = 0; k < a.data.size(); ++k) {
        const double d = a.data[k] - b.data[k];
        s += d * d;
    }
    return std::sqrt(s);
}

Matrix random_matrix(std::size_t rows, std::size_t cols, SplitMix64& rng, double scale) {
    Matrix m(rows, cols);
    for (double& x : m.data) x = scale * rng.next_normal();
    return m;
}

// --- shared panel: three seeds of the 512-token Zipfian model, 5000 steps,
// one directory per optimizer, trained on first use through the CLI so the
// manifests exist on disk.

struct Panel {
    fs::path dir;
    config::ExperimentConfig cfg;
};

std::string panel_config_json(const std::string& optimizer) {
    return std::string("{\n"
                       "  \"synthetic_vocab\": 512,\n"
                       "  \"synthetic_length\": 200000,\n"
                       "  \"hidden_dim\": 32,\n"
                       "  \"optimizer\": \"") +
           optimizer +
           "\",\n"
           "  \"steps\": 5000,\n"
           "  \"batch_size\": 32,\n"
           "  \"seeds\": [1, 2, 3]\n"
           "}\n";
}

const Panel& panel(const std::string& optimizer) {
    static std::map<std::string, Panel> cache;
    auto it = cache.find(optimizer);
    if (it != cache.end()) return it->second;

    Panel p;
    p.dir = work_root() / ("panel_" + optimizer);
    const fs::path cfg_path = work_root() / ("panel_" + optimizer + ".json");
    write_text(cfg_path, panel_config_json(optimizer));
    p.cfg = config::load_config(cfg_path.string());
    run_cli({"train", "--config", cfg_path.string(), "--out", p.dir.string(), "--quiet"});
    return cache.emplace(optimizer, std::move(p)).first->second;
}

std::vector<manifest::RunManifest> panel_manifests(const Panel& p) {
    std::vector<manifest::RunManifest> runs;
    for (int seed : {1, 2, 3})
        runs.push_back(manifest::load_manifest(
            (p.dir / ("seed" + std::to_string(seed)) / "manifest.json").string()));
    return runs;
}

// --- criteria -------------------------------------------------------------

void analytic_gradients_match_finite_differences() {
    SplitMix64 rng(101);
    double worst = 0.0;
    for (int k = 0; k < 100; ++k) {
        const std::size_t v = 2 + rng.next_below(15);  // [2, 16]
        const std::size_t h = 1 + rng.next_below(8);   // [1, 8]
        const bool hidden = rng.next_below(2) == 0;
        const bool tied = rng.next_below(2) == 0;
        model::ModelParams params =
            model::init_params(v, h, hidden, tied, false, 0.3, rng);
        const auto ctx = static_cast<std::uint32_t>(rng.next_below(v));
        const auto tgt = static_cast<std::uint32_t>(rng.next_below(v));
        worst = std::max(worst, model::grad_check(params, ctx, tgt, 1e-5));
    }
    require(worst < 1e-6, "max relative gradient error " + num(worst) + " >= 1e-6");
}

void head_gradients_sum_to_zero() {
    SplitMix64 rng(202);
    for (int k = 0; k < 1000; ++k) {
        const std::size_t v = 2 + rng.next_below(31);
        const std::size_t h = 1 + rng.next_below(16);
        const bool hidden = rng.next_below(2) == 0;
        const bool tied = k % 2 == 0;
        model::ModelParams params =
            model::init_params(v, h, hidden, tied, /*head_only_grad=*/true, 0.4, rng);
        model::ForwardTrace trace =
            model::forward(params, static_cast<std::uint32_t>(rng.next_below(v)),
                           static_cast<std::uint32_t>(rng.next_below(v)));
        model::Gradients grads = model::backward(params, trace);
        const Matrix& g = tied ? grads.d_embeddings : grads.d_unembedding;

        double max_inf = 0.0;
        for (double x : g.data) max_inf = std::max(max_inf, std::abs(x));
        for (std::size_t d = 0; d < g.cols; ++d) {
            double col = 0.0;
            for (std::size_t r = 0; r < g.rows; ++r) col += g.at(r, d);
            require(std::abs(col) <= 1e-10 * max_inf,
                    "pass " + std::to_string(k) + ": column sum " + num(col) +
                        " exceeds 1e-10 * " + num(max_inf));
        }
    }
}

void mean_embedding_stays_fixed_for_zero_sum_optimizers() {
    config::ExperimentConfig base = config::parse_config(
        "{\"synthetic_vocab\": 512, \"synthetic_length\": 200000,"
        " \"hidden_dim\": 32, \"has_hidden\": false, \"head_only_grad\": true,"
        " \"steps\": 1000, \"batch_size\": 32, \"seeds\": [1]}");
    train::CorpusBundle bundle = train::prepare_corpus(base);

    auto drift_of = [&](const std::string& optimizer, double momentum,
                        double* avg_norm) {
        config::ExperimentConfig cfg = base;
        cfg.optimizer = optimizer;
        cfg.optim.momentum = momentum;
        train::Trainer tr(cfg, bundle, 1);
        tr.run_all();
        require(!tr.aborted(), optimizer + " run aborted");
        const Matrix& e = tr.state().params.output_matrix();
        const std::vector<double>& mu0 = tr.state().mu0;
        double drift = 0.0, norm_sum = 0.0;
        for (std::size_t d = 0; d < e.cols; ++d) {
            double m = 0.0;
            for (std::size_t r = 0; r < e.rows; ++r) m += e.at(r, d);
            m /= static_cast<double>(e.rows);
            drift += (m - mu0[d]) * (m - mu0[d]);
        }
        for (std::size_t r = 0; r < e.rows; ++r) {
            double s = 0.0;
            for (std::size_t d = 0; d < e.cols; ++d) s += e.at(r, d) * e.at(r, d);
            norm_sum += std::sqrt(s);
        }
        *avg_norm = norm_sum / static_cast<double>(e.rows);
        return std::sqrt(drift);
    };

    double norm_sgd0 = 0, norm_sgd9 = 0, norm_coupled = 0, norm_adam = 0;
    const double d_sgd0 = drift_of("sgd", 0.0, &norm_sgd0);
    const double d_sgd9 = drift_of("sgd", 0.9, &norm_sgd9);
    const double d_coupled = drift_of("coupled", 0.9, &norm_coupled);
    const double d_adam = drift_of("adam", 0.9, &norm_adam);

    require(d_sgd0 <= 1e-8 * norm_sgd0,
            "sgd(momentum 0) drift " + num(d_sgd0) + " > 1e-8 * " + num(norm_sgd0));
    require(d_sgd9 <= 1e-8 * norm_sgd9,
            "sgd(momentum 0.9) drift " + num(d_sgd9) + " > 1e-8 * " + num(norm_sgd9));
    require(d_coupled <= 1e-8 * norm_coupled,
            "coupled drift " + num(d_coupled) + " > 1e-8 * " + num(norm_coupled));
    require(d_adam >= 100.0 * d_coupled, "adam drift " + num(d_adam) +
                                             " not >= 100x coupled drift " +
                                             num(d_coupled));
}

void coupled_rates_are_rowwise_uniform() {
    optim::OptimConfig ocfg;
    SplitMix64 rng(404);
    Matrix e = random_matrix(32, 8, rng, 0.1);
    optim::AdamState st;
    for (int step = 0; step < 200; ++step) {
        Matrix g = random_matrix(32, 8, rng, 1.0);
        optim::coupled_adam_step(e, g, st, ocfg, 1e-3);
        Matrix rates = optim::effective_lr_rows(st, ocfg, 1e-3, optim::Kind::coupled_adam);
        for (std::size_t r = 1; r < rates.rows; ++r)
            for (std::size_t d = 0; d < rates.cols; ++d)
                require(rates.at(r, d) == rates.at(0, d),
                        "step " + std::to_string(step) + ": rate of row " +
                            std::to_string(r) + " differs from row 0");
    }

    Matrix e1 = random_matrix(16, 4, rng, 0.1);
    Matrix e2 = e1;
    optim::AdamState s1, s2;
    for (int step = 0; step < 500; ++step) {
        Matrix g = random_matrix(16, 4, rng, 1.0);
        optim::coupled_adam_step(e1, g, s1, ocfg, 1e-3);
        optim::scaled_coupled_adam_step(e2, g, s2, ocfg, 1e-3, 0);
        require(e1.data == e2.data && s1.m.data == s2.m.data && s1.v.data == s2.v.data,
                "exponent 0 diverged from the unscaled rule at step " +
                    std::to_string(step));
    }
}

void update_norms_scale_as_half_powers_of_two() {
    optim::OptimConfig ocfg;
    ocfg.epsilon = 0.0;
    SplitMix64 rng(505);
    const Matrix e0 = random_matrix(16, 4, rng, 0.2);
    const Matrix g = random_matrix(16, 4, rng, 1.0);

    Matrix ref = e0;
    optim::AdamState st0;
    optim::coupled_adam_step(ref, g, st0, ocfg, 1e-3);
    const double base_norm = frob_delta(ref, e0);
    require(base_norm > 0.0, "baseline update vanished");

    for (int n = -5; n <= 5; ++n) {
        Matrix e = e0;
        optim::AdamState st;
        optim::scaled_coupled_adam_step(e, g, st, ocfg, 1e-3, n);
        const double ratio = frob_delta(e, e0) / base_norm;
        const double expected = std::pow(2.0, 0.5 * n);
        require(std::abs(ratio - expected) <= 1e-9 * expected,
                "n=" + std::to_string(n) + ": norm ratio " + num(ratio) +
                    " vs expected " + num(expected));
    }
}

void second_moments_track_unigram_probabilities() {
    const Panel& p = panel("adam");
    train::CorpusBundle bundle = train::prepare_corpus(p.cfg);
    checkpoint::Checkpoint ck =
        checkpoint::load((p.dir / "seed1" / "checkpoint.bin").string());

    probe::ProbeReport report =
        probe::measure_conditionals(ck.params, bundle.stream, 400, 32, 0xACCE55ull);
    const optim::AdamState& st = ck.params.tie_weights ? ck.emb_adam : ck.unemb_adam;
    report.vhat_mean = probe::second_moment_snapshot(st, p.cfg.optim);
    probe::fit_probe(report, bundle.unigram);

    require(report.fit_v.r_squared >= 0.6, "second-moment fit R^2 " +
                                               num(report.fit_v.r_squared) + " < 0.6");
    require(report.A > 0.0, "fitted proportionality constant not positive");
    require(report.fit_true.r_squared <= 0.3,
            "conditional-true fit R^2 " + num(report.fit_true.r_squared) + " > 0.3");
}

void geometry_metrics_match_oracles() {
    SplitMix64 rng(707);
    auto close = [](double a, double b, double tol) {
        return std::abs(a - b) <= tol * std::max(1.0, std::abs(b));
    };
    for (int k = 0; k < 50; ++k) {
        const std::size_t h = 2 + rng.next_below(15);       // [2, 16]
        const std::size_t v = h + 1 + rng.next_below(64 - h);  // (h, 64]
        Matrix m = random_matrix(v, h, rng, 0.8);
        std::vector<double> probs(v);
        double total = 0.0;
        for (double& x : probs) {
            x = rng.next_double();
            total += x;
        }
        for (double& x : probs) x /= total;
        corpus::UnigramDistribution uni;
        uni.probs = probs;
        uni.counts.assign(v, 1);

        require(close(metrics::isotropy(m), oracle::isotropy(m), 1e-8),
                "isotropy mismatch on case " + std::to_string(k));
        require(close(metrics::kappa(m), oracle::kappa(m), 1e-8),
                "kappa mismatch on case " + std::to_string(k));
        require(close(metrics::rho(m, uni), oracle::rho(m, probs), 1e-8),
                "rho mismatch on case " + std::to_string(k));
        metrics::MeanStats ms = metrics::mean_embedding_stats(m);
        oracle::MuStats os = oracle::mu_stats(m);
        require(close(ms.mu_norm, os.mu_norm, 1e-8) &&
                    close(ms.mu_ratio, os.mu_ratio, 1e-8),
                "mean-embedding mismatch on case " + std::to_string(k));
    }

    Matrix equal_rows(12, 3);
    for (std::size_t r = 0; r < 12; ++r) equal_rows.at(r, 0) = 1.0;
    require(std::abs(metrics::isotropy(equal_rows) - std::exp(-2.0)) < 1e-10,
            "identical unit rows should score exp(-2)");
}

void significance_arithmetic_is_exact() {
    stats::SeedSample s0{"loss", stats::Direction::lower_better, {1.0, 2.0, 3.0}};
    stats::SeedSample s1{"loss", stats::Direction::lower_better, {0.0, 1.0, 2.0}};
    stats::SignificanceResult r = stats::significance(s0, s1);

    require(r.mean_diff == -1.0, "mean difference " + num(r.mean_diff) + " != -1");
    require(r.sigma_d && std::abs(*r.sigma_d - std::sqrt(2.0)) <= 1e-12,
            "propagated deviation is not sqrt(2)");
    const double want = 2.92 * std::sqrt(2.0) / std::sqrt(3.0);
    require(r.threshold && std::abs(*r.threshold - want) <= 1e-12,
            "threshold differs from 2.92*sqrt(2)/sqrt(3)");
    require(r.t_value_used == 2.92 && stats::kStudentT95Nu2 == 2.92,
            "t quantile constant is not exactly 2.92");
    require(stats::format_shorthand(0.123, 0.004) == "0.123 (4)",
            "shorthand for (0.123, 0.004) is not \"0.123 (4)\"");
}

void coupled_adam_wins_the_geometry_panel() {
    const Panel& pa = panel("adam");
    const Panel& pc = panel("coupled");
    std::vector<manifest::RunManifest> adam = panel_manifests(pa);
    std::vector<manifest::RunManifest> coupled = panel_manifests(pc);

    for (const manifest::RunManifest& mc : coupled)
        for (const manifest::RunManifest& ma : adam) {
            const metrics::MetricsReport& c = *mc.final_metrics;
            const metrics::MetricsReport& a = *ma.final_metrics;
            const std::string pair = " (coupled seed " + std::to_string(mc.seed) +
                                     " vs adam seed " + std::to_string(ma.seed) + ")";
            require(c.iso > a.iso, "isotropy not higher" + pair);
            require(c.mu_ratio < a.mu_ratio, "relative mean norm not lower" + pair);
            require(c.kappa > a.kappa, "condition score not higher" + pair);
        }

    const fs::path cmp_dir = work_root() / "panel_compare";
    run_cli({"compare", pa.dir.string(), pc.dir.string(), "--out", cmp_dir.string(),
             "--quiet"});
    std::istringstream csv(read_text(cmp_dir / "compare.csv"));
    std::string line;
    std::getline(csv, line);  // header
    bool iso_ok = false, mu_ok = false;
    while (std::getline(csv, line)) {
        const std::string name = line.substr(0, line.find(','));
        const bool significant = line.substr(line.rfind(',') + 1) == "true";
        std::size_t pos = 0;
        for (int c = 0; c < 5; ++c) pos = line.find(',', pos) + 1;
        const double diff = std::stod(line.substr(pos, line.find(',', pos) - pos));
        if (name == "iso") iso_ok = significant && diff > 0.0;
        if (name == "mu_ratio") mu_ok = significant && diff < 0.0;
    }
    require(iso_ok, "isotropy gain not marked significant in compare.csv");
    require(mu_ok, "relative mean norm drop not marked significant in compare.csv");
}

void reruns_and_resumes_reproduce_manifests() {
    for (const std::string kind : {"sgd", "adam", "coupled", "scaled-coupled"}) {
        const fs::path dir = work_root() / ("repro_" + kind);
        const fs::path cfg_path = work_root() / ("repro_" + kind + ".json");
        std::string extra = kind == "scaled-coupled" ? ",\n \"scale_exponent\": 2" : "";
        write_text(cfg_path,
                   "{\"synthetic_vocab\": 16, \"synthetic_length\": 4000,"
                   " \"hidden_dim\": 4, \"has_hidden\": false, \"steps\": 200,"
                   " \"batch_size\": 8, \"seeds\": [1], \"optimizer\": \"" +
                       kind + "\"" + extra + "}");

        run_cli({"train", "--config", cfg_path.string(), "--out", dir.string(),
                 "--quiet"});
        const fs::path manifest_path = dir / "seed1" / "manifest.json";
        const fs::path ck_path = dir / "seed1" / "checkpoint.bin";
        const std::string reference = read_text(manifest_path);
        const std::string reference_ck = read_text(ck_path);

        run_cli({"train", "--config", cfg_path.string(), "--out", dir.string(),
                 "--quiet"});
        require(manifest::equivalent(reference, read_text(manifest_path)),
                kind + ": rerun manifest differs");
        require(read_text(ck_path) == reference_ck, kind + ": rerun checkpoint differs");

        fs::remove_all(dir);
        run_cli({"train", "--config", cfg_path.string(), "--out", dir.string(),
                 "--stop-after", "100", "--quiet"});
        require(!fs::exists(manifest_path), kind + ": paused run wrote a manifest");
        run_cli({"train", "--config", cfg_path.string(), "--out", dir.string(),
                 "--resume", "--quiet"});
        require(manifest::equivalent(reference, read_text(manifest_path)),
                kind + ": resumed manifest differs from the uninterrupted run");
        require(read_text(ck_path) == reference_ck,
                kind + ": resumed checkpoint differs from the uninterrupted run");
    }
}

struct Criterion {
    int id;
    std::string title;
    double limit_s;  // 0 = no limit
    std::function<void()> body;
};

}  // namespace

int main() {
    const std::vector<Criterion> criteria = {
        {1, "analytic gradients match central finite differences", 5.0,
         analytic_gradients_match_finite_differences},
        {2, "head gradients sum to zero over the vocabulary", 5.0,
         head_gradients_sum_to_zero},
        {3, "mean embedding stays fixed for zero-sum optimizers", 30.0,
         mean_embedding_stays_fixed_for_zero_sum_optimizers},
        {4, "coupled rates are row-uniform and exponent 0 is the identity", 0.0,
         coupled_rates_are_rowwise_uniform},
        {5, "update norms scale as 2^(n/2) at zero epsilon", 0.0,
         update_norms_scale_as_half_powers_of_two},
        {6, "trained second moments track unigram probabilities", 120.0,
         second_moments_track_unigram_probabilities},
        {7, "geometry metrics match brute-force oracles", 0.0,
         geometry_metrics_match_oracles},
        {8, "three-seed significance arithmetic is exact", 0.0,
         significance_arithmetic_is_exact},
        {9, "coupled adam wins the geometry panel significantly", 600.0,
         coupled_adam_wins_the_geometry_panel},
        {10, "reruns and stop/resume runs reproduce manifests", 0.0,
         reruns_and_resumes_reproduce_manifests},
    };

    int failures = 0;
    for (const Criterion& c : criteria) {
        const auto t0 = std::chrono::steady_clock::now();
        std::string error;
        try {
            c.body();
        } catch (const std::exception& e) {
            error = e.what();
        }
        const double dt =
            std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        if (error.empty() && c.limit_s > 0.0 && dt > c.limit_s) {
            std::ostringstream ss;
            ss << "runtime " << std::fixed << std::setprecision(1) << dt
               << " s exceeds the " << c.limit_s << " s budget";
            error = ss.str();
        }
        std::cout << (error.empty() ? "[PASS] " : "[FAIL] ") << c.id << ". " << c.title
                  << " (" << std::fixed << std::setprecision(1) << dt << " s)\n";
        if (!error.empty()) {
            std::cout << "       " << error << "\n";
            ++failures;
        }
        std::cout.flush();
    }
    return failures == 0 ? 0 : 1;
}
