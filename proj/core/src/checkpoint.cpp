#include "embedlab/checkpoint.hpp"

#include <cstring>
#include <fstream>
#include <stdexcept>

namespace embedlab::checkpoint {

namespace {

constexpr char kMagic[4] = {'E', 'M', 'B', 'L'};
constexpr std::uint32_t kVersion = 1;

class Writer {
  public:
    explicit Writer(std::ostream& out) : out_(out) {}

    void bytes(const void* p, std::size_t n) {
        out_.write(static_cast<const char*>(p), static_cast<std::streamsize>(n));
    }
    void u32(std::uint32_t v) { bytes(&v, sizeof v); }
    void u64(std::uint64_t v) { bytes(&v, sizeof v); }
    void flag(bool v) { u32(v ? 1 : 0); }
    void doubles(const std::vector<double>& v) {
        u64(v.size());
        bytes(v.data(), v.size() * sizeof(double));
    }
    void matrix(const Matrix& m) {
        u64(m.rows);
        u64(m.cols);
        bytes(m.data.data(), m.data.size() * sizeof(double));
    }
    void adam(const optim::AdamState& s) {
        matrix(s.m);
        matrix(s.v);
        u64(s.tau);
    }

  private:
    std::ostream& out_;
};

class Reader {
  public:
    explicit Reader(std::istream& in, const std::string& path) : in_(in), path_(path) {}

    void bytes(void* p, std::size_t n) {
        in_.read(static_cast<char*>(p), static_cast<std::streamsize>(n));
        if (in_.gcount() != static_cast<std::streamsize>(n))
            throw std::runtime_error("checkpoint truncated: " + path_);
    }
    std::uint32_t u32() {
        std::uint32_t v;
        bytes(&v, sizeof v);
        return v;
    }
    std::uint64_t u64() {
        std::uint64_t v;
        bytes(&v, sizeof v);
        return v;
    }
    bool flag() {
        const std::uint32_t v = u32();
        if (v > 1) throw std::runtime_error("checkpoint corrupt flag: " + path_);
        return v == 1;
    }
    std::vector<double> doubles() {
        const std::uint64_t n = u64();
        check_count(n);
        std::vector<double> v(n);
        bytes(v.data(), n * sizeof(double));
        return v;
    }
    Matrix matrix() {
        const std::uint64_t rows = u64();
        const std::uint64_t cols = u64();
        check_count(rows == 0 ? cols : rows * cols);
        Matrix m(rows, cols);
        bytes(m.data.data(), m.data.size() * sizeof(double));
        return m;
    }
    optim::AdamState adam() {
        optim::AdamState s;
        s.m = matrix();
        s.v = matrix();
        s.tau = u64();
        return s;
    }

  private:
    void check_count(std::uint64_t n) {
        // crude sanity bound so corrupt headers fail loudly, not by bad_alloc
        if (n > (1ull << 32))
            throw std::runtime_error("checkpoint corrupt size field: " + path_);
    }

    std::istream& in_;
    const std::string& path_;
};

}  // namespace

void save(const std::string& path, const Checkpoint& ck) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot write checkpoint: " + path);

    Writer w(out);
    w.bytes(kMagic, sizeof kMagic);
    w.u32(kVersion);
    w.u32(static_cast<std::uint32_t>(ck.kind));
    w.flag(ck.params.has_hidden);
    w.flag(ck.params.tie_weights);
    w.flag(ck.params.head_only_grad);
    w.matrix(ck.params.embeddings);
    w.matrix(ck.params.hidden_weight);
    w.doubles(ck.params.hidden_bias);
    w.matrix(ck.params.unembedding);
    w.matrix(ck.emb_sgd.velocity);
    w.matrix(ck.unemb_sgd.velocity);
    w.adam(ck.emb_adam);
    w.adam(ck.unemb_adam);
    w.adam(ck.hidden_w);
    w.adam(ck.hidden_b);
    w.u64(ck.step);
    w.u64(ck.sampler_state);
    w.doubles(ck.mu0);
    w.u64(ck.snapshots.size());
    for (const manifest::Snapshot& s : ck.snapshots) {
        w.u64(s.step);
        w.bytes(&s.loss, sizeof s.loss);
        w.bytes(&s.mu_drift, sizeof s.mu_drift);
        w.bytes(&s.update_sum_norm, sizeof s.update_sum_norm);
    }
    out.flush();
    if (!out) throw std::runtime_error("checkpoint write failed: " + path);
}

Checkpoint load(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open checkpoint: " + path);

    Reader r(in, path);
    char magic[4];
    r.bytes(magic, sizeof magic);
    if (std::memcmp(magic, kMagic, sizeof kMagic) != 0)
        throw std::runtime_error("not a checkpoint file: " + path);
    const std::uint32_t version = r.u32();
    if (version != kVersion)
        throw std::runtime_error("unsupported checkpoint version " +
                                 std::to_string(version) + ": " + path);

    Checkpoint ck;
    const std::uint32_t kind = r.u32();
    if (kind > static_cast<std::uint32_t>(optim::Kind::scaled_coupled_adam))
        throw std::runtime_error("checkpoint corrupt optimizer kind: " + path);
    ck.kind = static_cast<optim::Kind>(kind);
    ck.params.has_hidden = r.flag();
    ck.params.tie_weights = r.flag();
    ck.params.head_only_grad = r.flag();
    ck.params.embeddings = r.matrix();
    ck.params.hidden_weight = r.matrix();
    ck.params.hidden_bias = r.doubles();
    ck.params.unembedding = r.matrix();
    ck.emb_sgd.velocity = r.matrix();
    ck.unemb_sgd.velocity = r.matrix();
    ck.emb_adam = r.adam();
    ck.unemb_adam = r.adam();
    ck.hidden_w = r.adam();
    ck.hidden_b = r.adam();
    ck.step = r.u64();
    ck.sampler_state = r.u64();
    ck.mu0 = r.doubles();
    const std::uint64_t snapshot_count = r.u64();
    if (snapshot_count > (1ull << 32))
        throw std::runtime_error("checkpoint corrupt size field: " + path);
    ck.snapshots.resize(snapshot_count);
    for (manifest::Snapshot& s : ck.snapshots) {
        s.step = r.u64();
        r.bytes(&s.loss, sizeof s.loss);
        r.bytes(&s.mu_drift, sizeof s.mu_drift);
        r.bytes(&s.update_sum_norm, sizeof s.update_sum_norm);
    }
    return ck;
}

}  // namespace embedlab::checkpoint
