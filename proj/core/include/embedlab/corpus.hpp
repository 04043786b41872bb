#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "embedlab/rng.hpp"

namespace embedlab::corpus {

enum class TokenizerMode { word, byte };

// Ordered token inventory. Indices are dense in [0, V); tokens are unique.
// `unk_index` is present for word/byte vocabularies and absent for synthetic
// ones, which cover their whole id space by construction.
struct Vocabulary {
    std::vector<std::string> tokens;
    std::optional<std::size_t> unk_index;

    std::size_t size() const { return tokens.size(); }
    std::optional<std::size_t> index_of(std::string_view token) const;
};

// Token counts n_i and probabilities p_i = n_i / sum_j n_j over a vocabulary.
// Tokens that never occur keep probability exactly 0.
struct UnigramDistribution {
    std::vector<std::uint64_t> counts;
    std::vector<double> probs;

    std::uint64_t total() const;
};

struct TokenStream {
    std::vector<std::uint32_t> ids;
    std::size_t context_length = 1;
};

// Frequency-ranked vocabulary from raw text. Word mode splits on ASCII
// whitespace and keeps the max_vocab-1 most frequent tokens (ties broken
// lexicographically) plus "<unk>". Byte mode enumerates all 256 byte values
// (named "0x00".."0xff" so the vocabulary file stays line-oriented) plus
// "<unk>", which is never produced by encoding.
Vocabulary build_vocab(std::string_view text, TokenizerMode mode, std::size_t max_vocab);

TokenStream encode(std::string_view text, const Vocabulary& vocab, TokenizerMode mode,
                   std::size_t context_length = 1);

UnigramDistribution unigram(const TokenStream& stream, const Vocabulary& vocab);

// Deterministic (context, target) pair source: positions drawn from SplitMix64,
// identical seed gives the identical sequence. With context_length w, a draw at
// position k yields context ids[k..k+w) and target ids[k+w].
class BatchSampler {
  public:
    BatchSampler(const TokenStream& stream, std::uint64_t seed);

    std::size_t next_position();
    // context_length == 1 convenience: (context, target) pairs.
    std::vector<std::pair<std::uint32_t, std::uint32_t>> next_pairs(std::size_t batch_size);

    std::uint64_t rng_state() const { return rng_.state(); }
    void set_rng_state(std::uint64_t s) { rng_.set_state(s); }

  private:
    const TokenStream* stream_;
    std::size_t num_positions_;
    SplitMix64 rng_;
};

// Synthetic corpus: iid draws from a Zipf law p(rank) ~ 1/rank^exponent over
// `vocab_size` ranks. Token i is named "w" + zero-padded rank.
struct SyntheticSpec {
    std::size_t vocab_size = 512;
    std::size_t length = 200000;
    double exponent = 1.0;
    std::uint64_t seed = 42;
};

Vocabulary synthetic_vocab(std::size_t vocab_size);
TokenStream synthetic_stream(const SyntheticSpec& spec, std::size_t context_length = 1);

// Line-oriented vocabulary file: one token per line, line number = index.
void save_vocab(const Vocabulary& vocab, const std::string& path);
Vocabulary load_vocab(const std::string& path);

// CSV export with header "index,token,count,prob".
void save_unigram_csv(const UnigramDistribution& uni, const Vocabulary& vocab,
                      const std::string& path);

std::string read_text_file(const std::string& path);

}  // namespace embedlab::corpus
