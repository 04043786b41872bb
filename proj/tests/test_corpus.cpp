#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <stdexcept>
#include <vector>

#include <doctest.h>

#include "embedlab/corpus.hpp"
#include "embedlab/rng.hpp"

using namespace embedlab::corpus;

namespace {

std::filesystem::path temp_file(const char* name) {
    return std::filesystem::temp_directory_path() / name;
}

}  // namespace

TEST_CASE("build_vocab word mode basics") {
    Vocabulary v = build_vocab("a b a", TokenizerMode::word, 8);
    CHECK(v.size() == 3);
    CHECK(v.tokens == std::vector<std::string>{"a", "b", "<unk>"});
    CHECK(v.unk_index == 2);
    CHECK(v.index_of("a") == 0);
    CHECK(v.index_of("nope") == std::nullopt);
}

TEST_CASE("build_vocab byte mode always yields 257 tokens") {
    Vocabulary v = build_vocab("anything", TokenizerMode::byte, 4);
    CHECK(v.size() == 257);
    CHECK(v.tokens[0x61] == "0x61");  // 'a'
    CHECK(v.unk_index == 256);
}

TEST_CASE("build_vocab ranks by count then lexicographically") {
    // distinct counts order by frequency alone
    Vocabulary v = build_vocab("c c c b b a", TokenizerMode::word, 8);
    CHECK(v.tokens == std::vector<std::string>{"c", "b", "a", "<unk>"});
    // tied counts fall back to lexicographic order
    v = build_vocab("c c b b a", TokenizerMode::word, 8);
    CHECK(v.tokens == std::vector<std::string>{"b", "c", "a", "<unk>"});
    // truncation keeps the top max_vocab - 1 tokens
    v = build_vocab("c c c b b a", TokenizerMode::word, 3);
    CHECK(v.tokens == std::vector<std::string>{"c", "b", "<unk>"});
}

TEST_CASE("build_vocab rejects empty text") {
    CHECK_THROWS_AS(build_vocab("", TokenizerMode::word, 8), std::invalid_argument);
}

TEST_CASE("encode maps unknown words to unk") {
    Vocabulary v = build_vocab("a b a", TokenizerMode::word, 8);
    TokenStream s = encode("a z b", v, TokenizerMode::word);
    CHECK(s.ids == std::vector<std::uint32_t>{0, 2, 1});
}

TEST_CASE("unigram counts and probabilities") {
    Vocabulary v;
    v.tokens = {"x", "y"};
    TokenStream s;
    s.ids = {0, 0, 1};
    UnigramDistribution u = unigram(s, v);
    CHECK(u.counts == std::vector<std::uint64_t>{2, 1});
    CHECK(u.probs[0] == doctest::Approx(2.0 / 3.0).epsilon(1e-15));
    CHECK(u.probs[1] == doctest::Approx(1.0 / 3.0).epsilon(1e-15));
    CHECK(u.total() == 3);
}

TEST_CASE("unigram of a single repeated token is one-hot") {
    Vocabulary v;
    v.tokens = {"x", "y"};
    TokenStream s;
    s.ids = {1, 1, 1, 1};
    UnigramDistribution u = unigram(s, v);
    CHECK(u.probs == std::vector<double>{0.0, 1.0});
}

TEST_CASE("unigram is permutation invariant and zero-count tokens stay 0") {
    Vocabulary v;
    v.tokens = {"x", "y", "z"};
    TokenStream a, b;
    a.ids = {0, 1, 0, 1, 1};
    b.ids = {1, 1, 0, 0, 1};
    CHECK(unigram(a, v).probs == unigram(b, v).probs);
    CHECK(unigram(a, v).probs[2] == 0.0);
}

TEST_CASE("synthetic stream matches an independent counting oracle") {
    SyntheticSpec spec;
    spec.vocab_size = 200;
    spec.length = 50000;
    TokenStream s = synthetic_stream(spec);
    Vocabulary v = synthetic_vocab(spec.vocab_size);
    UnigramDistribution u = unigram(s, v);

    std::vector<std::uint64_t> hand(spec.vocab_size, 0);
    for (std::uint32_t id : s.ids) {
        REQUIRE(id < spec.vocab_size);
        ++hand[id];
    }
    CHECK(u.counts == hand);
    const std::size_t argmax =
        std::max_element(u.probs.begin(), u.probs.end()) - u.probs.begin();
    CHECK(u.probs[argmax] ==
          doctest::Approx(static_cast<double>(hand[argmax]) / spec.length)
              .epsilon(1e-15));

    double total = 0.0;
    for (double p : u.probs) total += p;
    CHECK(total == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("synthetic stream is deterministic in the seed") {
    SyntheticSpec spec;
    spec.vocab_size = 64;
    spec.length = 5000;
    TokenStream a = synthetic_stream(spec);
    TokenStream b = synthetic_stream(spec);
    CHECK(a.ids == b.ids);
    spec.seed = 43;
    CHECK(synthetic_stream(spec).ids != a.ids);
}

TEST_CASE("zipf ranks decay with index") {
    SyntheticSpec spec;
    spec.vocab_size = 32;
    spec.length = 100000;
    Vocabulary v = synthetic_vocab(spec.vocab_size);
    UnigramDistribution u = unigram(synthetic_stream(spec), v);
    CHECK(u.counts[0] > u.counts[5]);
    CHECK(u.counts[5] > u.counts[31]);
    // rank-1 over rank-2 ratio is near 2 for exponent 1
    CHECK(static_cast<double>(u.counts[0]) / u.counts[1] ==
          doctest::Approx(2.0).epsilon(0.1));
}

TEST_CASE("sampler on a length-2 stream only produces the single pair") {
    TokenStream s;
    s.ids = {7, 9};
    Vocabulary v = synthetic_vocab(16);
    BatchSampler sampler(s, 123);
    for (int i = 0; i < 100; ++i) {
        auto pairs = sampler.next_pairs(1);
        CHECK(pairs[0] == std::pair<std::uint32_t, std::uint32_t>{7, 9});
    }
}

TEST_CASE("sampler determinism in the seed") {
    SyntheticSpec spec;
    spec.vocab_size = 64;
    spec.length = 4000;
    TokenStream s = synthetic_stream(spec);
    BatchSampler a(s, 99), b(s, 99);
    CHECK(a.next_pairs(1000) == b.next_pairs(1000));
    BatchSampler c(s, 100);
    CHECK(a.next_pairs(1000) != c.next_pairs(1000));
}

TEST_CASE("sampler state round-trips") {
    SyntheticSpec spec;
    spec.vocab_size = 64;
    spec.length = 4000;
    TokenStream s = synthetic_stream(spec);
    BatchSampler a(s, 7);
    a.next_pairs(17);
    const std::uint64_t saved = a.rng_state();
    auto expected = a.next_pairs(50);

    BatchSampler b(s, 0);
    b.set_rng_state(saved);
    CHECK(b.next_pairs(50) == expected);
}

TEST_CASE("sampler target frequency tracks the bigram-target distribution") {
    SyntheticSpec spec;
    spec.vocab_size = 16;
    spec.length = 3000;
    TokenStream s = synthetic_stream(spec);

    // bigram-target frequency = distribution of ids[k+1] over valid positions
    const std::size_t positions = s.ids.size() - 1;
    std::vector<double> target_freq(spec.vocab_size, 0.0);
    for (std::size_t k = 0; k < positions; ++k) target_freq[s.ids[k + 1]] += 1.0;
    for (double& f : target_freq) f /= static_cast<double>(positions);

    const std::size_t draws = 100000;
    BatchSampler sampler(s, 2024);
    std::vector<double> observed(spec.vocab_size, 0.0);
    for (auto& [ctx, tgt] : sampler.next_pairs(draws)) observed[tgt] += 1.0;
    for (double& f : observed) f /= static_cast<double>(draws);

    for (std::size_t i = 0; i < spec.vocab_size; ++i) {
        const double sigma =
            std::sqrt(target_freq[i] * (1.0 - target_freq[i]) / draws);
        CHECK(std::abs(observed[i] - target_freq[i]) <= 3.0 * sigma + 1e-12);
    }
}

TEST_CASE("vocabulary file round-trip is exact") {
    Vocabulary v = build_vocab("gamma beta alpha alpha beta beta", TokenizerMode::word, 8);
    const auto path = temp_file("embedlab_vocab_test.txt");
    save_vocab(v, path.string());
    Vocabulary back = load_vocab(path.string());
    CHECK(back.tokens == v.tokens);
    CHECK(back.unk_index == v.unk_index);
    std::filesystem::remove(path);
}

TEST_CASE("unigram csv export carries exact counts") {
    Vocabulary v = build_vocab("a b a", TokenizerMode::word, 8);
    TokenStream s = encode("a b a", v, TokenizerMode::word);
    UnigramDistribution u = unigram(s, v);
    const auto path = temp_file("embedlab_unigram_test.csv");
    save_unigram_csv(u, v, path.string());
    const std::string text = read_text_file(path.string());
    CHECK(text ==
          "index,token,count,prob\n"
          "0,a,2,0.6666666666666666\n"
          "1,b,1,0.3333333333333333\n"
          "2,<unk>,0,0\n");
    std::filesystem::remove(path);
}

TEST_CASE("encode rejects streams shorter than the context window") {
    Vocabulary v = build_vocab("a b", TokenizerMode::word, 8);
    CHECK_THROWS_AS(encode("a", v, TokenizerMode::word, 1), std::invalid_argument);
    CHECK_NOTHROW(encode("a b", v, TokenizerMode::word, 1));
}
