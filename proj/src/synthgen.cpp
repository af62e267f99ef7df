#include "lmrl/synthgen.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <numbers>
#include <sstream>

#include <json.hpp>

#include "lmrl/errors.hpp"
#include "lmrl/rng.hpp"

namespace fs = std::filesystem;
using json = nlohmann::json;

namespace lmrl {

namespace {

void check_range(std::pair<int, int> r, int lo_floor, const char* what) {
    if (r.first < lo_floor || r.second < r.first)
        throw ConfigError(std::string(what) + " range (" + std::to_string(r.first) + ", " +
                          std::to_string(r.second) + ") is malformed");
}

constexpr int kHarmonics = 3;

// Smooth closed curve over phase [0,1): per-channel DC offset plus a few
// random sinusoids with integer frequencies, so eval(0) == eval(1).
struct ActionTemplate {
    std::vector<double> dc;                  // [C]
    std::vector<double> amp, phase;          // [C * kHarmonics]

    double eval(int channel, double u) const {
        double v = dc[channel];
        for (int h = 0; h < kHarmonics; ++h) {
            const double a = amp[channel * kHarmonics + h];
            const double p = phase[channel * kHarmonics + h];
            v += a * std::sin(2.0 * std::numbers::pi * (h + 1) * u + p);
        }
        return v;
    }
};

ActionTemplate draw_template(int c, Rng& rng) {
    ActionTemplate t;
    t.dc.resize(c);
    t.amp.resize(static_cast<size_t>(c) * kHarmonics);
    t.phase.resize(static_cast<size_t>(c) * kHarmonics);
    for (int ch = 0; ch < c; ++ch) {
        t.dc[ch] = rng.uniform(0.5, 1.5);
        for (int h = 0; h < kHarmonics; ++h) {
            t.amp[ch * kHarmonics + h] = rng.uniform(0.2, 0.6) / (h + 1);
            t.phase[ch * kHarmonics + h] = rng.uniform(0.0, 2.0 * std::numbers::pi);
        }
    }
    return t;
}

// Stationary background: negative per-channel DC plus an AR(1) chain that
// advances one step per background frame (shared across lead, interruptions
// and tail).
struct BackgroundProcess {
    std::vector<double> dc;     // [C]
    std::vector<double> state;  // [C]
    double rho = 0.8;
    double innovation = 0.3;

    void emit(double* row, int c, Rng& rng) {
        for (int ch = 0; ch < c; ++ch) {
            state[ch] = rho * state[ch] + rng.normal(0.0, innovation);
            row[ch] = dc[ch] + state[ch];
        }
    }
};

BackgroundProcess draw_background(int c, Rng& rng) {
    BackgroundProcess b;
    b.dc.resize(c);
    b.state.assign(c, 0.0);
    for (int ch = 0; ch < c; ++ch) b.dc[ch] = rng.uniform(-1.5, -0.5);
    return b;
}

std::string hex_id(uint64_t seed) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "seq-%016llx", static_cast<unsigned long long>(seed));
    return buf;
}

}  // namespace

void GenConfig::validate() const {
    if (seq_len < 1) throw ConfigError("seq_len must be positive");
    if (embed_dim < 1) throw ConfigError("embed_dim must be positive");
    check_range(cycle_len_range, 1, "cycle_len");
    check_range(n_cycles_range, 1, "n_cycles");
    check_range(interruption_len_range, 1, "interruption_len");
    check_range(lead_tail_range, 0, "lead_tail");
    if (interruption_prob < 0.0 || interruption_prob > 1.0)
        throw ConfigError("interruption_prob must lie in [0, 1]");
    if (noise_sigma < 0.0) throw ConfigError("noise_sigma must be nonnegative");
}

LabeledSequence generate_sequence(const GenConfig& cfg, uint64_t seed) {
    cfg.validate();
    const int n_frames = cfg.seq_len;
    const int c = cfg.embed_dim;
    const auto [d_min, d_max] = cfg.cycle_len_range;
    const auto [lead_min, lead_max] = cfg.lead_tail_range;
    const auto [int_min, int_max] = cfg.interruption_len_range;

    // Worst-case layout must fit: erroring up front keeps generation a total
    // function of the seed instead of failing on unlucky draws.
    const long worst = static_cast<long>(lead_min) + lead_min +
                       static_cast<long>(cfg.n_cycles_range.second) * d_min;
    if (worst > n_frames)
        throw GenerationError("requested cycles cannot fit: up to " +
                              std::to_string(cfg.n_cycles_range.second) + " cycles of >= " +
                              std::to_string(d_min) + " frames plus margins need " +
                              std::to_string(worst) + " > seq_len " + std::to_string(n_frames));

    Rng rng(seed);
    ActionTemplate tmpl = draw_template(c, rng);
    BackgroundProcess bg = draw_background(c, rng);

    const int n_cycles = rng.uniform_int(cfg.n_cycles_range.first, cfg.n_cycles_range.second);
    const int tail_min = lead_min;
    const int lead_cap = std::min<long>(lead_max, n_frames - tail_min -
                                                      static_cast<long>(n_cycles) * d_min);
    const int lead = rng.uniform_int(lead_min, lead_cap);

    // Layout: background lead, then cycles with optional interruptions in the
    // gaps, background tail takes whatever remains.
    struct Segment {
        int len;
        bool foreground;
    };
    std::vector<Segment> segments;
    segments.push_back({lead, false});
    int used = lead;
    for (int i = 0; i < n_cycles; ++i) {
        const long later_min = static_cast<long>(n_cycles - 1 - i) * d_min + tail_min;
        const int d_cap = static_cast<int>(std::min<long>(d_max, n_frames - used - later_min));
        const int d = rng.uniform_int(d_min, d_cap);
        segments.push_back({d, true});
        used += d;
        if (i + 1 < n_cycles) {
            const bool want = rng.uniform() < cfg.interruption_prob;
            const long free_frames =
                n_frames - used - (static_cast<long>(n_cycles - 1 - i) * d_min + tail_min);
            if (want && free_frames >= int_min) {
                const int ilen =
                    rng.uniform_int(int_min, static_cast<int>(std::min<long>(int_max, free_frames)));
                segments.push_back({ilen, false});
                used += ilen;
            }
        }
    }
    segments.push_back({n_frames - used, false});

    LabeledSequence out;
    out.id = hex_id(seed);
    out.embeddings = Tensor::zeros({n_frames, c});
    auto& data = out.embeddings.data();

    int pos = 0;
    for (const Segment& seg : segments) {
        if (seg.foreground) {
            out.annotations.cycles.emplace_back(pos, pos + seg.len);
            for (int j = 0; j < seg.len; ++j) {
                const double u = static_cast<double>(j) / seg.len;
                double* row = data.data() + static_cast<long>(pos + j) * c;
                for (int ch = 0; ch < c; ++ch) row[ch] = tmpl.eval(ch, u);
            }
        } else {
            for (int j = 0; j < seg.len; ++j)
                bg.emit(data.data() + static_cast<long>(pos + j) * c, c, rng);
        }
        pos += seg.len;
    }
    out.annotations.count = static_cast<int>(out.annotations.cycles.size());

    if (cfg.noise_sigma > 0.0)
        for (auto& v : data) v += rng.normal(0.0, cfg.noise_sigma);
    return out;
}

void write_embeddings(const std::string& path, const Tensor& x) {
    if (!x.defined() || x.ndim() != 2)
        throw DataError("embedding tensor must be 2-d to serialize");
    std::ofstream f(path, std::ios::binary);
    if (!f) throw DataError("cannot open '" + path + "' for writing");
    const uint32_t n = static_cast<uint32_t>(x.rows());
    const uint32_t c = static_cast<uint32_t>(x.cols());
    char header[12];
    std::memcpy(header, "LMRL", 4);
    for (int b = 0; b < 4; ++b) header[4 + b] = static_cast<char>((n >> (8 * b)) & 0xff);
    for (int b = 0; b < 4; ++b) header[8 + b] = static_cast<char>((c >> (8 * b)) & 0xff);
    f.write(header, sizeof(header));
    std::vector<float> row(c);
    static_assert(sizeof(float) == 4);
    for (uint32_t i = 0; i < n; ++i) {
        for (uint32_t j = 0; j < c; ++j)
            row[j] = static_cast<float>(x.data()[static_cast<long>(i) * c + j]);
        f.write(reinterpret_cast<const char*>(row.data()), static_cast<long>(c) * 4);
    }
    if (!f) throw DataError("short write to '" + path + "'");
}

Tensor read_embeddings(const std::string& path) {
    std::ifstream f(path, std::ios::binary);
    if (!f) throw DataError("cannot open '" + path + "'");
    char header[12];
    f.read(header, sizeof(header));
    if (!f || std::memcmp(header, "LMRL", 4) != 0)
        throw DataError("'" + path + "' is not an embedding file (bad magic)");
    uint32_t n = 0, c = 0;
    for (int b = 3; b >= 0; --b) n = (n << 8) | static_cast<unsigned char>(header[4 + b]);
    for (int b = 3; b >= 0; --b) c = (c << 8) | static_cast<unsigned char>(header[8 + b]);
    if (n == 0 || c == 0 || static_cast<uint64_t>(n) * c > (1u << 28))
        throw DataError("'" + path + "' header claims implausible shape " + std::to_string(n) +
                        "x" + std::to_string(c));
    std::vector<float> buf(static_cast<size_t>(n) * c);
    f.read(reinterpret_cast<char*>(buf.data()), static_cast<long>(buf.size()) * 4);
    if (!f) throw DataError("'" + path + "' truncated: expected " + std::to_string(n) + "x" +
                            std::to_string(c) + " floats");
    Tensor t = Tensor::zeros({static_cast<int>(n), static_cast<int>(c)});
    for (size_t i = 0; i < buf.size(); ++i) t.data()[i] = buf[i];
    return t;
}

void write_annotations(const std::string& path, const std::string& id,
                       const CycleAnnotations& ann) {
    json j;
    j["id"] = id;
    j["count"] = ann.count;
    json cycles = json::array();
    for (const auto& [s, e] : ann.cycles) cycles.push_back(json::array({s, e}));
    j["cycles"] = cycles;
    std::ofstream f(path);
    if (!f) throw DataError("cannot open '" + path + "' for writing");
    f << j.dump(2) << "\n";
    if (!f) throw DataError("short write to '" + path + "'");
}

std::pair<std::string, CycleAnnotations> read_annotations(const std::string& path) {
    std::ifstream f(path);
    if (!f) throw DataError("cannot open '" + path + "'");
    json j;
    try {
        f >> j;
    } catch (const json::exception& e) {
        throw DataError("'" + path + "' is not valid JSON: " + e.what());
    }
    CycleAnnotations ann;
    try {
        ann.count = j.at("count").get<int>();
        for (const auto& cyc : j.at("cycles")) {
            if (!cyc.is_array() || cyc.size() != 2)
                throw DataError("'" + path + "' cycle entries must be [start, end] pairs");
            ann.cycles.emplace_back(cyc[0].get<int>(), cyc[1].get<int>());
        }
        if (ann.count != static_cast<int>(ann.cycles.size()))
            throw DataError("'" + path + "' count field disagrees with cycle list");
        return {j.at("id").get<std::string>(), ann};
    } catch (const json::exception& e) {
        throw DataError("'" + path + "' missing annotation fields: " + e.what());
    }
}

const std::vector<ManifestEntry>& Manifest::split(const std::string& name) const {
    if (name == "train") return train;
    if (name == "val") return val;
    if (name == "test") return test;
    throw UsageError("unknown split '" + name + "' (expected train, val or test)");
}

namespace {

json split_to_json(const std::vector<ManifestEntry>& entries) {
    json arr = json::array();
    for (const auto& e : entries)
        arr.push_back({{"embeddings", e.embeddings_path},
                       {"annotations", e.annotations_path},
                       {"count", e.count}});
    return arr;
}

std::vector<ManifestEntry> split_from_json(const json& arr) {
    std::vector<ManifestEntry> out;
    for (const auto& e : arr)
        out.push_back({e.at("embeddings").get<std::string>(),
                       e.at("annotations").get<std::string>(), e.at("count").get<int>()});
    return out;
}

}  // namespace

void write_manifest(const std::string& path, const Manifest& m) {
    json j;
    j["seed"] = m.seed;
    j["splits"]["train"] = split_to_json(m.train);
    j["splits"]["val"] = split_to_json(m.val);
    j["splits"]["test"] = split_to_json(m.test);
    std::ofstream f(path);
    if (!f) throw DataError("cannot open '" + path + "' for writing");
    f << j.dump(2) << "\n";
    if (!f) throw DataError("short write to '" + path + "'");
}

Manifest read_manifest(const std::string& path) {
    std::ifstream f(path);
    if (!f) throw DataError("cannot open '" + path + "'");
    json j;
    try {
        f >> j;
        Manifest m;
        m.seed = j.at("seed").get<uint64_t>();
        m.train = split_from_json(j.at("splits").at("train"));
        m.val = split_from_json(j.at("splits").at("val"));
        m.test = split_from_json(j.at("splits").at("test"));
        return m;
    } catch (const json::exception& e) {
        throw DataError("'" + path + "' is not a valid manifest: " + e.what());
    }
}

Manifest generate_dataset(const GenConfig& cfg, int n_train, int n_val, int n_test,
                          const std::string& out_dir) {
    cfg.validate();
    if (n_train < 0 || n_val < 0 || n_test < 0)
        throw ConfigError("split sizes must be nonnegative");
    Manifest m;
    m.seed = cfg.seed;
    const struct {
        const char* name;
        int n;
        std::vector<ManifestEntry>* out;
    } splits[] = {{"train", n_train, &m.train}, {"val", n_val, &m.val}, {"test", n_test, &m.test}};

    std::error_code ec;
    fs::create_directories(out_dir, ec);
    for (const auto& sp : splits) {
        const fs::path dir = fs::path(out_dir) / sp.name;
        fs::create_directories(dir, ec);
        if (ec) throw DataError("cannot create '" + dir.string() + "': " + ec.message());
        for (int i = 0; i < sp.n; ++i) {
            const uint64_t seed = Rng::derive(cfg.seed, std::string("data/") + sp.name, i);
            LabeledSequence seq = generate_sequence(cfg, seed);
            char stem[16];
            std::snprintf(stem, sizeof(stem), "%06d", i);
            const std::string rel_emb = std::string(sp.name) + "/" + stem + ".emb";
            const std::string rel_ann = std::string(sp.name) + "/" + stem + ".json";
            write_embeddings((fs::path(out_dir) / rel_emb).string(), seq.embeddings);
            write_annotations((fs::path(out_dir) / rel_ann).string(), seq.id, seq.annotations);
            sp.out->push_back({rel_emb, rel_ann, seq.annotations.count});
        }
    }
    write_manifest((fs::path(out_dir) / "manifest.json").string(), m);
    return m;
}

std::vector<LabeledSequence> load_split(const std::string& dataset_dir, const Manifest& m,
                                        const std::string& split) {
    std::vector<LabeledSequence> out;
    for (const auto& entry : m.split(split)) {
        LabeledSequence seq;
        seq.embeddings = read_embeddings((fs::path(dataset_dir) / entry.embeddings_path).string());
        auto [id, ann] = read_annotations((fs::path(dataset_dir) / entry.annotations_path).string());
        seq.id = id;
        seq.annotations = std::move(ann);
        if (entry.count != seq.annotations.count)
            throw DataError("manifest count " + std::to_string(entry.count) + " disagrees with '" +
                            entry.annotations_path + "'");
        for (const auto& [s, e] : seq.annotations.cycles)
            if (s < 0 || e <= s || e > seq.embeddings.rows())
                throw DataError("cycle [" + std::to_string(s) + ", " + std::to_string(e) +
                                ") out of range in '" + entry.annotations_path + "'");
        out.push_back(std::move(seq));
    }
    return out;
}

}  // namespace lmrl
