#include "embedlab/cli.hpp"

#include <algorithm>
#include <chrono>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <ostream>
#include <stdexcept>

#include <CLI11.hpp>

#include "embedlab/checkpoint.hpp"
#include "embedlab/compare.hpp"
#include "embedlab/config.hpp"
#include "embedlab/corpus.hpp"
#include "embedlab/csv.hpp"
#include "embedlab/manifest.hpp"
#include "embedlab/metrics.hpp"
#include "embedlab/probe.hpp"
#include "embedlab/rng.hpp"
#include "embedlab/trainer.hpp"

namespace fs = std::filesystem;

namespace embedlab::cli {
namespace {

void write_file(const fs::path& path, const std::string& text) {
    std::ofstream f(path, std::ios::binary);
    if (!f) throw std::runtime_error("cannot open for writing: " + path.string());
    f << text;
    f.flush();
    if (!f) throw std::runtime_error("write failed: " + path.string());
}

std::string dir_label(std::string s) {
    while (s.size() > 1 && s.back() == '/') s.pop_back();
    std::string stem = fs::path(s).filename().string();
    return stem.empty() ? s : stem;
}

fs::path seed_dir(const fs::path& root, std::uint64_t seed) {
    return root / ("seed" + std::to_string(seed));
}

// Trains one seed to `until` (0 = full run). A partial stop writes only the
// checkpoint; finished and aborted runs also write the manifest. Returns the
// manifest when one was written.
std::optional<manifest::RunManifest> train_one_seed(
    const config::ExperimentConfig& cfg, const train::CorpusBundle& bundle,
    std::uint64_t seed, const fs::path& dir, std::uint64_t until, bool resume) {
    fs::create_directories(dir);
    const fs::path ck_path = dir / "checkpoint.bin";
    if (resume && !fs::exists(ck_path))
        throw std::invalid_argument("resume requested but no checkpoint at " +
                                    ck_path.string());

    const auto t0 = std::chrono::steady_clock::now();
    std::optional<train::Trainer> tr;
    if (resume)
        tr.emplace(cfg, bundle, seed, checkpoint::load(ck_path.string()));
    else
        tr.emplace(cfg, bundle, seed);

    tr->run_to(until == 0 ? cfg.steps : until);
    checkpoint::save(ck_path.string(), tr->state());

    if (!tr->aborted() && tr->step() < cfg.steps) return std::nullopt;

    manifest::RunManifest m = tr->finish();
    m.wall_time_s =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    write_file(dir / "manifest.json", manifest::manifest_json(m));
    return m;
}

int cmd_unigram(const config::ExperimentConfig& cfg, bool quiet, std::ostream& out) {
    train::CorpusBundle bundle = train::prepare_corpus(cfg);
    fs::path root(cfg.out_dir);
    fs::create_directories(root);
    corpus::save_unigram_csv(bundle.unigram, bundle.vocab, (root / "unigram.csv").string());
    corpus::save_vocab(bundle.vocab, (root / "vocab.txt").string());
    if (!quiet)
        out << "vocab " << bundle.vocab.size() << " tokens, stream "
            << bundle.stream.ids.size() << " ids -> " << (root / "unigram.csv").string()
            << "\n";
    return 0;
}

int cmd_train(const config::ExperimentConfig& cfg, std::uint64_t stop_after,
              bool resume, bool quiet, std::ostream& out) {
    train::CorpusBundle bundle = train::prepare_corpus(cfg);
    fs::path root(cfg.out_dir);
    fs::create_directories(root);
    write_file(root / "config.json", config::config_json(cfg));

    bool any_aborted = false;
    for (std::uint64_t seed : cfg.seeds) {
        fs::path dir = seed_dir(root, seed);
        std::optional<manifest::RunManifest> m =
            train_one_seed(cfg, bundle, seed, dir, stop_after, resume);
        if (!m) {
            if (!quiet)
                out << "seed " << seed << ": stopped at step " << stop_after
                    << ", checkpoint written\n";
            continue;
        }
        if (m->aborted_at_step) {
            any_aborted = true;
            if (!quiet)
                out << "seed " << seed << ": aborted at step " << *m->aborted_at_step
                    << "\n";
        } else if (!quiet) {
            out << "seed " << seed << ": eval loss " << csv::format_double(*m->final_loss)
                << " (" << csv::format_double(m->wall_time_s) << " s)\n";
        }
    }
    return any_aborted ? 1 : 0;
}

checkpoint::Checkpoint load_matching_checkpoint(const std::string& path,
                                                const train::CorpusBundle& bundle) {
    checkpoint::Checkpoint ck = checkpoint::load(path);
    if (ck.params.vocab_size() != bundle.vocab.size())
        throw std::invalid_argument(
            "checkpoint vocabulary size " + std::to_string(ck.params.vocab_size()) +
            " does not match corpus vocabulary size " +
            std::to_string(bundle.vocab.size()));
    return ck;
}

int cmd_metrics(const config::ExperimentConfig& cfg, const std::string& ck_path,
                const std::vector<std::string>& bench_paths, bool quiet,
                std::ostream& out) {
    train::CorpusBundle bundle = train::prepare_corpus(cfg);
    checkpoint::Checkpoint ck = load_matching_checkpoint(ck_path, bundle);

    std::vector<metrics::SimilarityBenchmark> benchmarks;
    for (const std::string& p : bench_paths)
        benchmarks.push_back(metrics::load_benchmark_tsv(p));

    metrics::MetricsReport report = metrics::compute_report(
        ck.params.output_matrix(), bundle.unigram, bundle.vocab, benchmarks);

    fs::path root(cfg.out_dir);
    fs::create_directories(root);
    write_file(root / "metrics.json", metrics::report_json(report));
    write_file(root / "metrics.csv", metrics::report_csv(report));
    if (!quiet) out << metrics::report_json(report);
    return 0;
}

int cmd_probe(const config::ExperimentConfig& cfg, const std::string& ck_path,
              std::size_t batches, std::size_t batch_size, bool quiet,
              std::ostream& out) {
    if (batches == 0) throw std::invalid_argument("probe: --batches must be positive");
    std::size_t bs = batch_size == 0 ? cfg.batch_size : batch_size;
    if (bs == 0) throw std::invalid_argument("probe: batch size must be positive");

    train::CorpusBundle bundle = train::prepare_corpus(cfg);
    checkpoint::Checkpoint ck = load_matching_checkpoint(ck_path, bundle);

    probe::ProbeReport report = probe::measure_conditionals(
        ck.params, bundle.stream, batches, bs, derive_seed(cfg.seeds.front(), 2));

    // Attach the bias-corrected second moments of the output-matrix group
    // when the checkpoint's optimizer kept any.
    const optim::AdamState& st = ck.params.tie_weights ? ck.emb_adam : ck.unemb_adam;
    if (ck.kind != optim::Kind::sgd && st.tau >= 1)
        report.vhat_mean = probe::second_moment_snapshot(st, cfg.optim);

    probe::fit_probe(report, bundle.unigram);

    fs::path root(cfg.out_dir);
    fs::create_directories(root);
    write_file(root / "probe.csv", probe::probe_csv(report, bundle.unigram));
    write_file(root / "fits.json", probe::fits_json(report));
    if (!quiet) out << probe::fits_json(report);
    return 0;
}

std::vector<manifest::RunManifest> load_run_dir(const fs::path& dir) {
    std::vector<fs::path> files;
    for (const fs::directory_entry& e : fs::directory_iterator(dir)) {
        if (!e.is_directory()) continue;
        if (e.path().filename().string().rfind("seed", 0) != 0) continue;
        fs::path mf = e.path() / "manifest.json";
        if (fs::exists(mf)) files.push_back(mf);
    }
    std::sort(files.begin(), files.end());
    if (files.empty())
        throw std::invalid_argument("no seed*/manifest.json under " + dir.string());
    std::vector<manifest::RunManifest> runs;
    for (const fs::path& p : files) runs.push_back(manifest::load_manifest(p.string()));
    return runs;
}

int cmd_compare(const config::ExperimentConfig& cfg, const std::string& dir0,
                const std::string& dir1, bool quiet, std::ostream& out) {
    compare::Comparison cmp =
        compare::compare_manifests(load_run_dir(dir0), load_run_dir(dir1));
    out << compare::comparison_table(cmp, dir_label(dir0), dir_label(dir1));

    fs::path root(cfg.out_dir);
    fs::create_directories(root);
    fs::path csv_path = root / "compare.csv";
    write_file(csv_path, compare::comparison_csv(cmp));
    if (!quiet) out << "wrote " << csv_path.string() << "\n";
    return 0;
}

// One grid point: a full train-style run set under `dir`. Returns the mean
// final eval loss over seeds, or nullopt when every seed aborted.
std::optional<double> run_grid_point(const config::ExperimentConfig& point_cfg,
                                     const train::CorpusBundle& bundle,
                                     const fs::path& dir, bool* any_aborted) {
    fs::create_directories(dir);
    write_file(dir / "config.json", config::config_json(point_cfg));
    double sum = 0.0;
    std::size_t finished = 0;
    for (std::uint64_t seed : point_cfg.seeds) {
        std::optional<manifest::RunManifest> m = train_one_seed(
            point_cfg, bundle, seed, seed_dir(dir, seed), 0, /*resume=*/false);
        if (m->final_loss) {
            sum += *m->final_loss;
            ++finished;
        } else {
            *any_aborted = true;
        }
    }
    if (finished == 0) return std::nullopt;
    return sum / static_cast<double>(finished);
}

int cmd_ablate(const config::ExperimentConfig& cfg, const std::string& mode, bool quiet,
               std::ostream& out) {
    train::CorpusBundle bundle = train::prepare_corpus(cfg);
    fs::path root(cfg.out_dir);
    fs::create_directories(root);
    bool any_aborted = false;
    std::string summary;

    if (mode == "scale") {
        std::vector<int> grid = cfg.n_grid;
        grid.push_back(0);  // the delta baseline is always part of the grid
        std::sort(grid.begin(), grid.end());
        grid.erase(std::unique(grid.begin(), grid.end()), grid.end());

        std::map<int, std::optional<double>> loss;
        for (int n : grid) {
            config::ExperimentConfig pc = cfg;
            pc.optimizer = "scaled-coupled";
            pc.optim.scale_exponent = n;
            fs::path dir = root / ("n" + std::to_string(n));
            pc.out_dir = dir.string();
            loss[n] = run_grid_point(pc, bundle, dir, &any_aborted);
            if (!quiet)
                out << "n=" << n << ": "
                    << (loss[n] ? csv::format_double(*loss[n]) : std::string("aborted"))
                    << "\n";
        }
        summary = "n,final_loss,delta\n";
        for (int n : grid) {
            summary += std::to_string(n) + ',';
            if (loss[n]) summary += csv::format_double(*loss[n]);
            summary += ',';
            if (loss[n] && loss[0]) summary += csv::format_double(*loss[n] - *loss[0]);
            summary += '\n';
        }
    } else {  // sgd: embedding-only SGD over the f grid, against a coupled baseline
        config::ExperimentConfig bc = cfg;
        bc.optimizer = "coupled";
        fs::path bdir = root / "baseline";
        bc.out_dir = bdir.string();
        std::optional<double> base = run_grid_point(bc, bundle, bdir, &any_aborted);
        if (!quiet)
            out << "baseline (coupled): "
                << (base ? csv::format_double(*base) : std::string("aborted")) << "\n";

        summary = "f,final_loss,delta\n";
        for (double f : cfg.f_grid) {
            config::ExperimentConfig pc = cfg;
            pc.optimizer = "sgd";
            pc.optim.sgd_lr_factor = f;
            fs::path dir = root / ("f" + csv::format_double(f));
            pc.out_dir = dir.string();
            std::optional<double> l = run_grid_point(pc, bundle, dir, &any_aborted);
            if (!quiet)
                out << "f=" << csv::format_double(f) << ": "
                    << (l ? csv::format_double(*l) : std::string("aborted")) << "\n";
            summary += csv::format_double(f) + ',';
            if (l) summary += csv::format_double(*l);
            summary += ',';
            if (l && base) summary += csv::format_double(*l - *base);
            summary += '\n';
        }
    }

    write_file(root / "summary.csv", summary);
    if (!quiet) out << "wrote " << (root / "summary.csv").string() << "\n";
    return any_aborted ? 1 : 0;
}

}  // namespace

int run(std::vector<std::string> args, std::ostream& out, std::ostream& err) {
    CLI::App app{"desk-scale laboratory for LM-head embedding training"};
    app.name("embedlab");
    app.require_subcommand(1);

    std::string config_path;
    std::string out_override;
    std::uint64_t seed_value = 0;
    bool quiet = false;
    app.add_option("--config", config_path, "experiment config (flat JSON)")
        ->check(CLI::ExistingFile);
    app.add_option("--out", out_override, "output directory (overrides the config)");
    CLI::Option* seed_opt =
        app.add_option("--seed", seed_value, "replace the config's seed list with one seed");
    app.add_flag("--quiet,-q", quiet, "suppress progress output");

    CLI::App* sc_unigram =
        app.add_subcommand("unigram", "tokenize the corpus; write unigram.csv and vocab.txt");

    CLI::App* sc_train =
        app.add_subcommand("train", "run one training job per configured seed");
    std::uint64_t stop_after = 0;
    bool resume = false;
    sc_train->add_option("--stop-after", stop_after,
                         "pause after this step (checkpoint only, no manifest)");
    sc_train->add_flag("--resume", resume, "continue each seed from its checkpoint");

    CLI::App* sc_metrics =
        app.add_subcommand("metrics", "embedding-geometry panel for a checkpoint");
    std::string metrics_ck;
    std::vector<std::string> bench_paths;
    sc_metrics->add_option("--checkpoint", metrics_ck, "checkpoint file")
        ->required()
        ->check(CLI::ExistingFile);
    sc_metrics->add_option("--bench", bench_paths, "similarity benchmark TSV (repeatable)")
        ->check(CLI::ExistingFile);

    CLI::App* sc_probe =
        app.add_subcommand("probe", "second-moment probe for a checkpoint");
    std::string probe_ck;
    std::size_t batches = 200;
    std::size_t probe_bs = 0;
    sc_probe->add_option("--checkpoint", probe_ck, "checkpoint file")
        ->required()
        ->check(CLI::ExistingFile);
    sc_probe->add_option("--batches", batches, "number of probe batches");
    sc_probe->add_option("--batch-size", probe_bs,
                         "examples per probe batch (default: config batch size)");

    CLI::App* sc_compare =
        app.add_subcommand("compare", "significance table for two run directories");
    std::string dir0, dir1;
    sc_compare->add_option("dir0", dir0, "variant-0 run directory")
        ->required()
        ->check(CLI::ExistingDirectory);
    sc_compare->add_option("dir1", dir1, "variant-1 run directory")
        ->required()
        ->check(CLI::ExistingDirectory);

    CLI::App* sc_ablate = app.add_subcommand(
        "ablate", "grid runs: scale (exponent grid) or sgd (lr-factor grid)");
    std::string mode;
    sc_ablate->add_option("--mode", mode, "scale | sgd")
        ->required()
        ->check(CLI::IsMember({"scale", "sgd"}));

    for (CLI::App* sc : {sc_unigram, sc_train, sc_metrics, sc_probe, sc_compare, sc_ablate})
        sc->fallthrough();

    try {
        std::reverse(args.begin(), args.end());
        app.parse(args);
    } catch (const CLI::CallForHelp&) {
        const CLI::App* target = &app;
        std::vector<CLI::App*> subs = app.get_subcommands();
        if (!subs.empty()) target = subs.front();
        out << target->help();
        return 0;
    } catch (const CLI::CallForAllHelp&) {
        out << app.help("", CLI::AppFormatMode::All);
        return 0;
    } catch (const CLI::ParseError& e) {
        err << "error: " << e.what() << "\n";
        return 2;
    }

    try {
        config::ExperimentConfig cfg;
        if (!config_path.empty()) cfg = config::load_config(config_path);
        if (!out_override.empty()) cfg.out_dir = out_override;
        if (seed_opt->count() > 0) cfg.seeds = {seed_value};

        if (sc_unigram->parsed()) return cmd_unigram(cfg, quiet, out);
        if (sc_train->parsed()) return cmd_train(cfg, stop_after, resume, quiet, out);
        if (sc_metrics->parsed())
            return cmd_metrics(cfg, metrics_ck, bench_paths, quiet, out);
        if (sc_probe->parsed()) return cmd_probe(cfg, probe_ck, batches, probe_bs, quiet, out);
        if (sc_compare->parsed()) return cmd_compare(cfg, dir0, dir1, quiet, out);
        if (sc_ablate->parsed()) return cmd_ablate(cfg, mode, quiet, out);
        err << "error: no subcommand\n";
        return 2;
    } catch (const std::invalid_argument& e) {
        err << "error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << "\n";
        return 1;
    }
}

}  // namespace embedlab::cli
