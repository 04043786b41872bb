#include "embedlab/probe.hpp"

#include <cmath>
#include <stdexcept>

#include <json.hpp>

#include "embedlab/csv.hpp"
#include "embedlab/hash.hpp"

namespace embedlab::probe {

namespace {

std::uint64_t params_checksum(const model::ModelParams& params) {
    std::uint64_t h = hash::fnv1a64(params.embeddings.data);
    h = hash::fnv1a64(params.hidden_weight.data, h);
    h = hash::fnv1a64(params.hidden_bias, h);
    h = hash::fnv1a64(params.unembedding.data, h);
    return h;
}

}  // namespace

ProbeReport measure_conditionals(const model::ModelParams& params,
                                 const corpus::TokenStream& stream,
                                 std::size_t num_batches, std::size_t batch_size,
                                 std::uint64_t seed) {
    if (num_batches < 1 || batch_size < 1)
        throw std::invalid_argument("measure_conditionals: need at least one example");

    const std::size_t V = params.vocab_size();
    const std::size_t H = params.hidden_dim();
    const std::size_t w = stream.context_length;
    const std::uint64_t checksum_before = params_checksum(params);

    ProbeReport report;
    report.x_true.assign(V, 0.0);
    report.x_false.assign(V, 0.0);
    report.g_sq.assign(V, 0.0);
    report.target_count.assign(V, 0);
    report.s_vector.assign(H, 0.0);

    corpus::BatchSampler sampler(stream, seed);
    const std::size_t examples = num_batches * batch_size;
    for (std::size_t k = 0; k < examples; ++k) {
        const std::size_t pos = sampler.next_position();
        const std::span<const std::uint32_t> context(stream.ids.data() + pos, w);
        const std::uint32_t target = stream.ids[pos + w];
        const model::ForwardTrace trace = model::forward_window(params, context, target);

        double h_sq_mean = 0.0;
        for (std::size_t d = 0; d < H; ++d) {
            const double hs = trace.h[d] * trace.h[d];
            report.s_vector[d] += hs;
            h_sq_mean += hs;
        }
        h_sq_mean /= static_cast<double>(H);

        for (std::size_t i = 0; i < V; ++i) {
            const double delta = i == target ? 1.0 : 0.0;
            const double coeff = delta - trace.probs[i];
            report.g_sq[i] += coeff * coeff * h_sq_mean;
            if (i == target) {
                const double q = 1.0 - trace.probs[i];
                report.x_true[i] += q * q;
            } else {
                report.x_false[i] += trace.probs[i] * trace.probs[i];
            }
        }
        ++report.target_count[target];
    }
    report.example_count = examples;

    const double inv_n = 1.0 / static_cast<double>(examples);
    for (double& s : report.s_vector) s *= inv_n;
    for (std::size_t i = 0; i < V; ++i) {
        if (report.target_count[i] > 0)
            report.x_true[i] /= static_cast<double>(report.target_count[i]);
        const std::uint64_t false_count = examples - report.target_count[i];
        if (false_count > 0) report.x_false[i] /= static_cast<double>(false_count);
        report.g_sq[i] *= inv_n;
    }

    if (params_checksum(params) != checksum_before)
        throw std::runtime_error("measure_conditionals: model parameters changed");
    return report;
}

std::vector<double> second_moment_snapshot(const optim::AdamState& state,
                                           const optim::OptimConfig& cfg) {
    if (state.tau < 1)
        throw std::invalid_argument("second_moment_snapshot: state has not stepped");
    const double c2 = 1.0 - std::pow(cfg.beta2, static_cast<double>(state.tau));
    std::vector<double> vhat_mean(state.v.rows, 0.0);
    for (std::size_t i = 0; i < state.v.rows; ++i) {
        double sum = 0.0;
        for (double v : state.v.row(i)) sum += v / c2;
        vhat_mean[i] = sum / static_cast<double>(state.v.cols);
    }
    return vhat_mean;
}

void fit_probe(ProbeReport& report, const corpus::UnigramDistribution& unigram) {
    const std::size_t V = report.x_true.size();
    if (unigram.probs.size() != V)
        throw std::invalid_argument("fit_probe: unigram length does not match V");

    std::vector<double> p_observed, x_observed;
    for (std::size_t i = 0; i < V; ++i) {
        if (report.target_count[i] == 0) continue;
        p_observed.push_back(unigram.probs[i]);
        x_observed.push_back(report.x_true[i]);
    }
    if (p_observed.size() < 8)
        throw std::invalid_argument("fit_probe: fewer than 8 tokens observed as targets");

    report.fit_true = linalg::fit_through_origin(p_observed, x_observed);
    report.fit_true.mutual_information = linalg::mutual_information(p_observed, x_observed);
    report.fit_false = linalg::fit_through_origin(unigram.probs, report.x_false);
    report.fit_false.mutual_information =
        linalg::mutual_information(unigram.probs, report.x_false);

    if (report.vhat_mean.empty()) return;  // no snapshot attached: skip fit_v
    if (report.vhat_mean.size() != V)
        throw std::invalid_argument("fit_probe: vhat_mean length does not match V");
    report.fit_v = linalg::fit_through_origin(unigram.probs, report.vhat_mean);
    report.fit_v.mutual_information =
        linalg::mutual_information(unigram.probs, report.vhat_mean);
    report.A = report.fit_v.slope_A;
}

std::string probe_csv(const ProbeReport& report,
                      const corpus::UnigramDistribution& unigram) {
    const std::size_t V = report.x_true.size();
    if (unigram.probs.size() != V)
        throw std::invalid_argument("probe_csv: unigram length does not match V");

    std::string out = "index,prob,x_true,x_false,vhat_mean,target_count\n";
    for (std::size_t i = 0; i < V; ++i) {
        out += std::to_string(i) + ',';
        out += csv::format_double(unigram.probs[i]) + ',';
        if (report.target_count[i] > 0) out += csv::format_double(report.x_true[i]);
        out += ',';
        out += csv::format_double(report.x_false[i]) + ',';
        if (!report.vhat_mean.empty()) out += csv::format_double(report.vhat_mean[i]);
        out += ',';
        out += std::to_string(report.target_count[i]) + '\n';
    }
    return out;
}

std::string fits_json(const ProbeReport& report) {
    nlohmann::ordered_json j;
    for (const auto& [name, fit] :
         {std::pair{"fit_true", &report.fit_true}, {"fit_false", &report.fit_false},
          {"fit_v", &report.fit_v}}) {
        j[name]["slope_A"] = fit->slope_A;
        j[name]["r_squared"] = fit->r_squared;
        j[name]["mutual_information"] = fit->mutual_information;
    }
    j["A"] = report.A;
    return j.dump(2) + "\n";
}

}  // namespace embedlab::probe
