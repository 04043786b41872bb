#include "embedlab/corpus.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <fstream>
#include <map>
#include <sstream>
#include <stdexcept>
#include <unordered_map>

#include "embedlab/csv.hpp"

namespace embedlab::corpus {

namespace {

constexpr std::string_view kUnkToken = "<unk>";

bool is_space(unsigned char c) {
    return c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\f' || c == '\v';
}

std::vector<std::string_view> split_words(std::string_view text) {
    std::vector<std::string_view> words;
    std::size_t i = 0;
    while (i < text.size()) {
        while (i < text.size() && is_space(text[i])) ++i;
        std::size_t start = i;
        while (i < text.size() && !is_space(text[i])) ++i;
        if (i > start) words.push_back(text.substr(start, i - start));
    }
    return words;
}

std::string byte_token_name(unsigned byte) {
    static const char* hex = "0123456789abcdef";
    std::string s = "0x";
    s += hex[(byte >> 4) & 0xF];
    s += hex[byte & 0xF];
    return s;
}

}  // namespace

std::optional<std::size_t> Vocabulary::index_of(std::string_view token) const {
    for (std::size_t i = 0; i < tokens.size(); ++i)
        if (tokens[i] == token) return i;
    return std::nullopt;
}

std::uint64_t UnigramDistribution::total() const {
    std::uint64_t t = 0;
    for (std::uint64_t c : counts) t += c;
    return t;
}

Vocabulary build_vocab(std::string_view text, TokenizerMode mode, std::size_t max_vocab) {
    if (text.empty()) throw std::invalid_argument("build_vocab: empty text");

    Vocabulary vocab;
    if (mode == TokenizerMode::byte) {
        vocab.tokens.reserve(257);
        for (unsigned b = 0; b < 256; ++b) vocab.tokens.push_back(byte_token_name(b));
        vocab.tokens.emplace_back(kUnkToken);
        vocab.unk_index = 256;
        return vocab;
    }

    if (max_vocab < 2) throw std::invalid_argument("build_vocab: max_vocab must be >= 2");
    std::map<std::string_view, std::uint64_t> counts;
    for (std::string_view w : split_words(text)) ++counts[w];
    if (counts.empty()) throw std::invalid_argument("build_vocab: no tokens in text");

    std::vector<std::pair<std::string_view, std::uint64_t>> ranked(counts.begin(),
                                                                   counts.end());
    std::sort(ranked.begin(), ranked.end(), [](const auto& a, const auto& b) {
        if (a.second != b.second) return a.second > b.second;
        return a.first < b.first;
    });
    if (ranked.size() > max_vocab - 1) ranked.resize(max_vocab - 1);

    for (const auto& [tok, count] : ranked) vocab.tokens.emplace_back(tok);
    vocab.tokens.emplace_back(kUnkToken);
    vocab.unk_index = vocab.tokens.size() - 1;
    return vocab;
}

TokenStream encode(std::string_view text, const Vocabulary& vocab, TokenizerMode mode,
                   std::size_t context_length) {
    TokenStream stream;
    stream.context_length = context_length;
    if (mode == TokenizerMode::byte) {
        stream.ids.reserve(text.size());
        for (unsigned char c : text) stream.ids.push_back(c);
    } else {
        std::unordered_map<std::string_view, std::uint32_t> index;
        index.reserve(vocab.tokens.size());
        for (std::size_t i = 0; i < vocab.tokens.size(); ++i)
            index.emplace(vocab.tokens[i], static_cast<std::uint32_t>(i));
        const std::uint32_t unk =
            static_cast<std::uint32_t>(vocab.unk_index.value_or(vocab.size() - 1));
        for (std::string_view w : split_words(text)) {
            auto it = index.find(w);
            stream.ids.push_back(it == index.end() ? unk : it->second);
        }
    }
    if (stream.ids.size() < context_length + 1)
        throw std::invalid_argument("encode: stream shorter than context_length + 1");
    return stream;
}

UnigramDistribution unigram(const TokenStream& stream, const Vocabulary& vocab) {
    if (stream.ids.empty()) throw std::invalid_argument("unigram: empty stream");
    UnigramDistribution uni;
    uni.counts.assign(vocab.size(), 0);
    for (std::uint32_t id : stream.ids) {
        if (id >= vocab.size())
            throw std::invalid_argument("unigram: token id out of range");
        ++uni.counts[id];
    }
    const double total = static_cast<double>(stream.ids.size());
    uni.probs.resize(vocab.size());
    for (std::size_t i = 0; i < vocab.size(); ++i)
        uni.probs[i] = static_cast<double>(uni.counts[i]) / total;
    return uni;
}

BatchSampler::BatchSampler(const TokenStream& stream, std::uint64_t seed)
    : stream_(&stream), rng_(seed) {
    if (stream.ids.size() < stream.context_length + 1)
        throw std::invalid_argument("BatchSampler: stream too short");
    num_positions_ = stream.ids.size() - stream.context_length;
}

std::size_t BatchSampler::next_position() { return rng_.next_below(num_positions_); }

std::vector<std::pair<std::uint32_t, std::uint32_t>> BatchSampler::next_pairs(
    std::size_t batch_size) {
    if (batch_size < 1) throw std::invalid_argument("next_pairs: batch_size must be >= 1");
    if (stream_->context_length != 1)
        throw std::invalid_argument("next_pairs: requires context_length == 1");
    std::vector<std::pair<std::uint32_t, std::uint32_t>> pairs;
    pairs.reserve(batch_size);
    for (std::size_t b = 0; b < batch_size; ++b) {
        const std::size_t k = next_position();
        pairs.emplace_back(stream_->ids[k], stream_->ids[k + 1]);
    }
    return pairs;
}

Vocabulary synthetic_vocab(std::size_t vocab_size) {
    if (vocab_size < 2) throw std::invalid_argument("synthetic_vocab: need V >= 2");
    Vocabulary vocab;
    vocab.tokens.reserve(vocab_size);
    int digits = 1;
    for (std::size_t v = vocab_size; v >= 10; v /= 10) ++digits;
    for (std::size_t i = 0; i < vocab_size; ++i) {
        std::string name = std::to_string(i);
        vocab.tokens.push_back("w" + std::string(digits - name.size(), '0') + name);
    }
    return vocab;
}

TokenStream synthetic_stream(const SyntheticSpec& spec, std::size_t context_length) {
    if (spec.vocab_size < 2) throw std::invalid_argument("synthetic_stream: need V >= 2");
    if (spec.length < context_length + 1)
        throw std::invalid_argument("synthetic_stream: length too small");

    // cumulative Zipf weights over ranks 1..V
    std::vector<double> cdf(spec.vocab_size);
    double total = 0.0;
    for (std::size_t i = 0; i < spec.vocab_size; ++i) {
        total += 1.0 / std::pow(static_cast<double>(i + 1), spec.exponent);
        cdf[i] = total;
    }
    for (double& c : cdf) c /= total;

    SplitMix64 rng(spec.seed);
    TokenStream stream;
    stream.context_length = context_length;
    stream.ids.reserve(spec.length);
    for (std::size_t k = 0; k < spec.length; ++k) {
        const double u = rng.next_double();
        const auto it = std::lower_bound(cdf.begin(), cdf.end(), u);
        std::size_t idx = static_cast<std::size_t>(it - cdf.begin());
        if (idx >= spec.vocab_size) idx = spec.vocab_size - 1;
        stream.ids.push_back(static_cast<std::uint32_t>(idx));
    }
    return stream;
}

void save_vocab(const Vocabulary& vocab, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("save_vocab: cannot open " + path);
    for (const std::string& tok : vocab.tokens) out << tok << '\n';
}

Vocabulary load_vocab(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("load_vocab: cannot open " + path);
    Vocabulary vocab;
    std::string line;
    while (std::getline(in, line)) vocab.tokens.push_back(line);
    if (vocab.tokens.size() < 2)
        throw std::invalid_argument("load_vocab: vocabulary needs at least 2 tokens");
    vocab.unk_index = vocab.index_of(kUnkToken);
    return vocab;
}

void save_unigram_csv(const UnigramDistribution& uni, const Vocabulary& vocab,
                      const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("save_unigram_csv: cannot open " + path);
    csv::Writer w(out);
    w.row({"index", "token", "count", "prob"});
    for (std::size_t i = 0; i < vocab.size(); ++i)
        w.row({std::to_string(i), vocab.tokens[i], std::to_string(uni.counts[i]),
               csv::format_double(uni.probs[i])});
}

std::string read_text_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("read_text_file: cannot open " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

}  // namespace embedlab::corpus
