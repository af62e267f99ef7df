#include "lmrl/harness.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <limits>
#include <numeric>
#include <sstream>

#include <json.hpp>

#include "lmrl/errors.hpp"
#include "lmrl/fusion.hpp"
#include "lmrl/rng.hpp"

namespace fs = std::filesystem;
using json = nlohmann::json;

namespace lmrl {

void OptimConfig::validate() const {
    if (lr <= 0) throw ConfigError("lr must be positive");
    if (beta1 < 0 || beta1 >= 1 || beta2 < 0 || beta2 >= 1)
        throw ConfigError("betas must lie in [0, 1)");
    if (epochs < 1) throw ConfigError("epochs must be positive");
    if (batch_size < 1) throw ConfigError("batch_size must be positive");
}

ModelConfig RunConfig::model_config() const {
    ModelConfig mc;
    mc.seq_len = gen.seq_len;
    mc.embed_dim = gen.embed_dim;
    mc.similarity = similarity;
    mc.mpr = mpr;
    mc.rfl = rfl;
    mc.fusion = fusion;
    return mc;
}

void RunConfig::validate() const {
    gen.validate();
    loss.validate();
    optim.validate();
    if (splits.n_train < 0 || splits.n_val < 0 || splits.n_test < 0)
        throw ConfigError("split sizes must be nonnegative");
    model_config().validate();
}

namespace {

std::pair<int, int> pair_from(const json& j, const char* key, std::pair<int, int> def) {
    if (!j.contains(key)) return def;
    const auto& a = j.at(key);
    if (!a.is_array() || a.size() != 2)
        throw ConfigError(std::string("config field '") + key + "' must be a [min, max] pair");
    return {a[0].get<int>(), a[1].get<int>()};
}

json pair_to(std::pair<int, int> p) { return json::array({p.first, p.second}); }

template <typename T>
T field(const json& j, const char* key, T def) {
    return j.contains(key) ? j.at(key).get<T>() : def;
}

json section(const json& j, const char* key) {
    if (!j.contains(key)) return json::object();
    if (!j.at(key).is_object())
        throw ConfigError(std::string("config section '") + key + "' must be an object");
    return j.at(key);
}

json run_config_to_json(const RunConfig& c) {
    json j;
    j["data_dir"] = c.data_dir;
    j["out_dir"] = c.out_dir;
    j["seed"] = c.seed;
    j["similarity"] = to_string(c.similarity);
    j["gen"] = {{"seq_len", c.gen.seq_len},
                {"embed_dim", c.gen.embed_dim},
                {"cycle_len", pair_to(c.gen.cycle_len_range)},
                {"n_cycles", pair_to(c.gen.n_cycles_range)},
                {"interruption_prob", c.gen.interruption_prob},
                {"interruption_len", pair_to(c.gen.interruption_len_range)},
                {"noise_sigma", c.gen.noise_sigma},
                {"lead_tail", pair_to(c.gen.lead_tail_range)},
                {"n_train", c.splits.n_train},
                {"n_val", c.splits.n_val},
                {"n_test", c.splits.n_test}};
    j["mpr"] = {{"scales", c.mpr.scales},
                {"scale_orders", c.mpr.scale_orders},
                {"dilation_rates", c.mpr.dilation_rates},
                {"attention_heads", c.mpr.attention_heads},
                {"out_channels", c.mpr.out_channels}};
    j["rfl"] = {{"n_blocks", c.rfl.n_blocks},
                {"channels", c.rfl.channels},
                {"kernel_size", c.rfl.kernel_size},
                {"dilation_base", c.rfl.dilation_base}};
    j["fusion"] = {{"mode", to_string(c.fusion.mode)},
                   {"fused_dim", c.fusion.fused_dim},
                   {"predictor_layers", c.fusion.predictor_layers},
                   {"predictor_heads", c.fusion.predictor_heads}};
    j["loss"] = {{"alpha", c.loss.alpha},   {"margin", c.loss.margin},
                 {"l_den", c.loss.l_den},   {"l_loc", c.loss.l_loc},
                 {"l_tri", c.loss.l_tri},   {"max_triplets", c.loss.max_triplets}};
    j["optimizer"] = {{"lr", c.optim.lr},
                      {"betas", json::array({c.optim.beta1, c.optim.beta2})},
                      {"epochs", c.optim.epochs},
                      {"batch_size", c.optim.batch_size}};
    return j;
}

RunConfig run_config_from_json(const json& j) {
    RunConfig c;
    c.data_dir = field<std::string>(j, "data_dir", c.data_dir);
    c.out_dir = field<std::string>(j, "out_dir", c.out_dir);
    c.seed = field<uint64_t>(j, "seed", c.seed);
    c.similarity = similarity_from_string(field<std::string>(j, "similarity", "lmrl"));

    const json g = section(j, "gen");
    c.gen.seq_len = field(g, "seq_len", c.gen.seq_len);
    c.gen.embed_dim = field(g, "embed_dim", c.gen.embed_dim);
    c.gen.cycle_len_range = pair_from(g, "cycle_len", c.gen.cycle_len_range);
    c.gen.n_cycles_range = pair_from(g, "n_cycles", c.gen.n_cycles_range);
    c.gen.interruption_prob = field(g, "interruption_prob", c.gen.interruption_prob);
    c.gen.interruption_len_range = pair_from(g, "interruption_len", c.gen.interruption_len_range);
    c.gen.noise_sigma = field(g, "noise_sigma", c.gen.noise_sigma);
    c.gen.lead_tail_range = pair_from(g, "lead_tail", c.gen.lead_tail_range);
    c.splits.n_train = field(g, "n_train", c.splits.n_train);
    c.splits.n_val = field(g, "n_val", c.splits.n_val);
    c.splits.n_test = field(g, "n_test", c.splits.n_test);

    const json mp = section(j, "mpr");
    c.mpr.scales = field(mp, "scales", c.mpr.scales);
    c.mpr.scale_orders = field(mp, "scale_orders", c.mpr.scale_orders);
    c.mpr.dilation_rates = field(mp, "dilation_rates", c.mpr.dilation_rates);
    c.mpr.attention_heads = field(mp, "attention_heads", c.mpr.attention_heads);
    c.mpr.out_channels = field(mp, "out_channels", c.mpr.out_channels);

    const json rf = section(j, "rfl");
    c.rfl.n_blocks = field(rf, "n_blocks", c.rfl.n_blocks);
    c.rfl.channels = field(rf, "channels", c.rfl.channels);
    c.rfl.kernel_size = field(rf, "kernel_size", c.rfl.kernel_size);
    c.rfl.dilation_base = field(rf, "dilation_base", c.rfl.dilation_base);

    const json fu = section(j, "fusion");
    c.fusion.mode = fusion_mode_from_string(field<std::string>(fu, "mode", "weighted_avg"));
    c.fusion.fused_dim = field(fu, "fused_dim", c.fusion.fused_dim);
    c.fusion.predictor_layers = field(fu, "predictor_layers", c.fusion.predictor_layers);
    c.fusion.predictor_heads = field(fu, "predictor_heads", c.fusion.predictor_heads);

    const json lo = section(j, "loss");
    c.loss.alpha = field(lo, "alpha", c.loss.alpha);
    c.loss.margin = field(lo, "margin", c.loss.margin);
    c.loss.l_den = field(lo, "l_den", c.loss.l_den);
    c.loss.l_loc = field(lo, "l_loc", c.loss.l_loc);
    c.loss.l_tri = field(lo, "l_tri", c.loss.l_tri);
    c.loss.max_triplets = field(lo, "max_triplets", c.loss.max_triplets);

    const json op = section(j, "optimizer");
    c.optim.lr = field(op, "lr", c.optim.lr);
    if (op.contains("betas")) {
        const auto& b = op.at("betas");
        if (!b.is_array() || b.size() != 2)
            throw ConfigError("optimizer betas must be a [beta1, beta2] pair");
        c.optim.beta1 = b[0].get<double>();
        c.optim.beta2 = b[1].get<double>();
    }
    c.optim.epochs = field(op, "epochs", c.optim.epochs);
    c.optim.batch_size = field(op, "batch_size", c.optim.batch_size);
    return c;
}

}  // namespace

std::string RunConfig::to_json_string() const { return run_config_to_json(*this).dump(2) + "\n"; }

RunConfig RunConfig::from_json_string(const std::string& text) {
    json j;
    try {
        j = json::parse(text);
    } catch (const json::exception& e) {
        throw ConfigError(std::string("config is not valid JSON: ") + e.what());
    }
    try {
        return run_config_from_json(j);
    } catch (const json::exception& e) {
        throw ConfigError(std::string("config field has wrong type: ") + e.what());
    }
}

RunConfig RunConfig::load(const std::string& path) {
    std::ifstream f(path);
    if (!f) throw ConfigError("cannot open config '" + path + "'");
    std::stringstream ss;
    ss << f.rdbuf();
    try {
        return from_json_string(ss.str());
    } catch (const ConfigError& e) {
        throw ConfigError("'" + path + "': " + e.what());
    }
}

void RunConfig::save(const std::string& path) const {
    std::ofstream f(path);
    if (!f) throw DataError("cannot open '" + path + "' for writing");
    f << to_json_string();
    if (!f) throw DataError("short write to '" + path + "'");
}

uint64_t config_hash(const RunConfig& cfg) {
    json j = run_config_to_json(cfg);
    j.erase("data_dir");
    j.erase("out_dir");
    const std::string s = j.dump();
    uint64_t h = 0xcbf29ce484222325ULL;
    for (const unsigned char ch : s) {
        h ^= ch;
        h *= 0x100000001b3ULL;
    }
    return h;
}

namespace {

void put_u32(std::ostream& f, uint32_t v) {
    char b[4];
    for (int i = 0; i < 4; ++i) b[i] = static_cast<char>((v >> (8 * i)) & 0xff);
    f.write(b, 4);
}

void put_u64(std::ostream& f, uint64_t v) {
    char b[8];
    for (int i = 0; i < 8; ++i) b[i] = static_cast<char>((v >> (8 * i)) & 0xff);
    f.write(b, 8);
}

void put_f64(std::ostream& f, double v) {
    uint64_t bits;
    std::memcpy(&bits, &v, 8);
    put_u64(f, bits);
}

uint32_t take_u32(std::istream& f, const std::string& path) {
    char b[4];
    f.read(b, 4);
    if (!f) throw DataError("'" + path + "' truncated");
    uint32_t v = 0;
    for (int i = 3; i >= 0; --i) v = (v << 8) | static_cast<unsigned char>(b[i]);
    return v;
}

uint64_t take_u64(std::istream& f, const std::string& path) {
    char b[8];
    f.read(b, 8);
    if (!f) throw DataError("'" + path + "' truncated");
    uint64_t v = 0;
    for (int i = 7; i >= 0; --i) v = (v << 8) | static_cast<unsigned char>(b[i]);
    return v;
}

double take_f64(std::istream& f, const std::string& path) {
    const uint64_t bits = take_u64(f, path);
    double v;
    std::memcpy(&v, &bits, 8);
    return v;
}

constexpr char kCkptMagic[8] = {'L', 'M', 'R', 'L', 'C', 'K', 'P', 'T'};
constexpr uint32_t kCkptVersion = 1;

}  // namespace

Checkpoint snapshot(const ParamStore& params, uint64_t cfg_hash, int epoch, double val_mae,
                    double val_obo) {
    Checkpoint ck;
    ck.version = kCkptVersion;
    ck.cfg_hash = cfg_hash;
    ck.epoch = epoch;
    ck.val_mae = val_mae;
    ck.val_obo = val_obo;
    for (const auto& name : params.names()) {
        const Tensor& p = params.get(name);
        ck.params.emplace_back(name, Tensor::from(p.shape(), p.data()));
    }
    return ck;
}

void save_checkpoint(const std::string& path, const Checkpoint& ck) {
    std::ofstream f(path, std::ios::binary);
    if (!f) throw DataError("cannot open '" + path + "' for writing");
    f.write(kCkptMagic, 8);
    put_u32(f, ck.version);
    put_u64(f, ck.cfg_hash);
    put_u32(f, static_cast<uint32_t>(ck.epoch));
    put_f64(f, ck.val_mae);
    put_f64(f, ck.val_obo);
    put_u32(f, static_cast<uint32_t>(ck.params.size()));
    for (const auto& [name, t] : ck.params) {
        put_u32(f, static_cast<uint32_t>(name.size()));
        f.write(name.data(), static_cast<long>(name.size()));
        put_u32(f, static_cast<uint32_t>(t.ndim()));
        for (int i = 0; i < t.ndim(); ++i) put_u32(f, static_cast<uint32_t>(t.dim(i)));
        for (const double v : t.data()) put_f64(f, v);
    }
    if (!f) throw DataError("short write to '" + path + "'");
}

Checkpoint load_checkpoint(const std::string& path) {
    std::ifstream f(path, std::ios::binary);
    if (!f) throw DataError("cannot open checkpoint '" + path + "'");
    char magic[8];
    f.read(magic, 8);
    if (!f || std::memcmp(magic, kCkptMagic, 8) != 0)
        throw DataError("'" + path + "' is not a checkpoint (bad magic)");
    Checkpoint ck;
    ck.version = take_u32(f, path);
    if (ck.version != kCkptVersion)
        throw DataError("'" + path + "' has unsupported checkpoint version " +
                        std::to_string(ck.version));
    ck.cfg_hash = take_u64(f, path);
    ck.epoch = static_cast<int>(take_u32(f, path));
    ck.val_mae = take_f64(f, path);
    ck.val_obo = take_f64(f, path);
    const uint32_t n = take_u32(f, path);
    for (uint32_t i = 0; i < n; ++i) {
        const uint32_t name_len = take_u32(f, path);
        if (name_len > 4096) throw DataError("'" + path + "' has an implausible parameter name");
        std::string name(name_len, '\0');
        f.read(name.data(), name_len);
        if (!f) throw DataError("'" + path + "' truncated");
        const uint32_t ndim = take_u32(f, path);
        if (ndim > 8) throw DataError("'" + path + "' has an implausible tensor rank");
        std::vector<int> shape;
        long total = 1;
        for (uint32_t d = 0; d < ndim; ++d) {
            shape.push_back(static_cast<int>(take_u32(f, path)));
            total *= shape.back();
        }
        if (total < 0 || total > (1 << 28))
            throw DataError("'" + path + "' has an implausible tensor size");
        std::vector<double> data(static_cast<size_t>(total));
        for (auto& v : data) v = take_f64(f, path);
        ck.params.emplace_back(std::move(name), Tensor::from(std::move(shape), std::move(data)));
    }
    return ck;
}

void apply_checkpoint(const Checkpoint& ck, ParamStore& params) {
    if (ck.params.size() != params.names().size())
        throw DataError("checkpoint holds " + std::to_string(ck.params.size()) +
                        " parameters, model expects " + std::to_string(params.names().size()));
    for (const auto& [name, t] : ck.params) {
        if (!params.has(name)) throw DataError("checkpoint parameter '" + name + "' is unknown");
        Tensor& dst = params.get(name);
        if (dst.shape() != t.shape())
            throw DataError("checkpoint parameter '" + name + "' has shape " + t.shape_str() +
                            ", model expects " + dst.shape_str());
        dst.data() = t.data();
    }
}

Manifest cmd_generate(const RunConfig& cfg) {
    cfg.validate();
    GenConfig g = cfg.gen;
    g.seed = cfg.seed;
    return generate_dataset(g, cfg.splits.n_train, cfg.splits.n_val, cfg.splits.n_test,
                            cfg.data_dir);
}

namespace {

std::string fmt_double(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

struct SequenceGt {
    std::vector<int> mask;
    DensityMap density;
};

std::vector<SequenceGt> build_gt(const std::vector<LabeledSequence>& seqs) {
    std::vector<SequenceGt> out;
    out.reserve(seqs.size());
    for (const auto& s : seqs) {
        const int n = s.embeddings.rows();
        out.push_back({foreground_mask(s.annotations, n), density_gt(s.annotations, n)});
    }
    return out;
}

std::pair<double, double> count_metrics(const ModelConfig& mc, ParamStore& params,
                                        const std::vector<LabeledSequence>& seqs) {
    NoGradGuard guard;
    std::vector<std::pair<double, double>> pairs;
    pairs.reserve(seqs.size());
    for (const auto& s : seqs) {
        ModelOutputs outs = model_forward(s.embeddings, mc, params);
        pairs.emplace_back(static_cast<double>(s.annotations.count),
                           count_from_density(outs.density));
    }
    return mae_obo(pairs);
}

}  // namespace

TrainResult cmd_train(const RunConfig& cfg) {
    cfg.validate();
    std::error_code ec;
    fs::create_directories(cfg.out_dir, ec);
    if (ec) throw DataError("cannot create '" + cfg.out_dir + "': " + ec.message());

    const Manifest m = read_manifest((fs::path(cfg.data_dir) / "manifest.json").string());
    const auto train_seqs = load_split(cfg.data_dir, m, "train");
    const auto val_seqs = load_split(cfg.data_dir, m, "val");
    if (train_seqs.empty()) throw DataError("train split of '" + cfg.data_dir + "' is empty");
    const auto gt = build_gt(train_seqs);

    const ModelConfig mc = cfg.model_config();
    ParamStore params(Rng::derive(cfg.seed, "init", 0));
    init_model_params(params, mc);
    AdamOptimizer opt(params, cfg.optim.lr, cfg.optim.beta1, cfg.optim.beta2);
    const uint64_t hash = config_hash(cfg);

    RunConfig resolved = cfg;
    resolved.save((fs::path(cfg.out_dir) / "run_config.json").string());

    TrainResult result;
    result.log_path = (fs::path(cfg.out_dir) / "train_log.csv").string();
    result.best_checkpoint = (fs::path(cfg.out_dir) / "checkpoint_best.ckpt").string();
    result.last_checkpoint = (fs::path(cfg.out_dir) / "checkpoint_last.ckpt").string();
    std::ofstream log(result.log_path);
    if (!log) throw DataError("cannot open '" + result.log_path + "' for writing");
    log << "epoch,train_loss,val_mae,val_obo\n";

    const int n = static_cast<int>(train_seqs.size());
    double best_mae = std::numeric_limits<double>::infinity();
    for (int epoch = 0; epoch < cfg.optim.epochs; ++epoch) {
        std::vector<int> order(n);
        std::iota(order.begin(), order.end(), 0);
        Rng shuffle_rng(Rng::derive(cfg.seed, "batch", epoch));
        for (int i = n - 1; i > 0; --i)
            std::swap(order[i], order[shuffle_rng.uniform_int(0, i)]);
        Rng trip_rng(Rng::derive(cfg.seed, "triplets", epoch));

        double loss_sum = 0.0;
        for (int b0 = 0; b0 < n; b0 += cfg.optim.batch_size) {
            const int b1 = std::min(n, b0 + cfg.optim.batch_size);
            for (int s = b0; s < b1; ++s) {
                const int idx = order[s];
                ModelOutputs outs = model_forward(train_seqs[idx].embeddings, mc, params);
                const auto triplets =
                    sample_triplets(gt[idx].mask, trip_rng, cfg.loss.max_triplets);
                Tensor seq_loss = total_loss(outs.density, gt[idx].density, outs.fg.probs,
                                             gt[idx].mask, outs.branch_out, triplets, cfg.loss);
                const double lv = seq_loss.scalar_value();
                if (!std::isfinite(lv))
                    throw TrainingError("loss is not finite at epoch " + std::to_string(epoch) +
                                        ", step " + std::to_string(s) + " (sequence " +
                                        train_seqs[idx].id + ")");
                loss_sum += lv;
                backward(scale(seq_loss, 1.0 / (b1 - b0)));
            }
            opt.step();
        }
        const double train_loss = loss_sum / n;
        result.epoch_train_loss.push_back(train_loss);
        result.final_train_loss = train_loss;

        double val_mae = 0.0, val_obo = 0.0;
        if (!val_seqs.empty()) std::tie(val_mae, val_obo) = count_metrics(mc, params, val_seqs);
        log << epoch << ',' << fmt_double(train_loss) << ',' << fmt_double(val_mae) << ','
            << fmt_double(val_obo) << '\n';

        const Checkpoint ck = snapshot(params, hash, epoch, val_mae, val_obo);
        save_checkpoint(result.last_checkpoint, ck);
        const bool improved = val_seqs.empty() || val_mae < best_mae;
        if (improved) {
            best_mae = val_mae;
            result.best_epoch = epoch;
            result.best_val_mae = val_mae;
            result.best_val_obo = val_obo;
            save_checkpoint(result.best_checkpoint, ck);
        }
    }
    if (!log) throw DataError("short write to '" + result.log_path + "'");
    return result;
}

EvalReport evaluate_model(const ModelConfig& mc, ParamStore& params,
                          const std::vector<LabeledSequence>& seqs) {
    if (seqs.empty()) throw DataError("evaluation split is empty");
    NoGradGuard guard;
    EvalReport report;
    std::vector<std::pair<double, double>> pairs;
    double acc_sum = 0.0, edit_sum = 0.0;
    std::map<int, double> f1_sum{{10, 0.0}, {25, 0.0}, {50, 0.0}};
    for (const auto& s : seqs) {
        const ModelOutputs outs = model_forward(s.embeddings, mc, params);
        const double pred = count_from_density(outs.density);
        const auto gt_mask = foreground_mask(s.annotations, s.embeddings.rows());
        pairs.emplace_back(static_cast<double>(s.annotations.count), pred);
        acc_sum += frame_accuracy(outs.fg.hard_mask, gt_mask);
        edit_sum += edit_score(outs.fg.hard_mask, gt_mask);
        for (auto& [tau, sum] : f1_sum) sum += f1_at(outs.fg.hard_mask, gt_mask, tau);
        report.per_video.push_back(
            {s.id, static_cast<double>(s.annotations.count), pred});
    }
    const double nv = static_cast<double>(seqs.size());
    std::tie(report.mae, report.obo) = mae_obo(pairs);
    report.frame_acc = acc_sum / nv;
    report.edit = edit_sum / nv;
    for (const auto& [tau, sum] : f1_sum) report.f1[tau] = sum / nv;
    return report;
}

namespace {

json report_to_json(const EvalReport& r, const std::string& split) {
    json j;
    j["split"] = split;
    j["n_videos"] = r.per_video.size();
    j["mae"] = r.mae;
    j["obo"] = r.obo;
    j["frame_acc"] = r.frame_acc;
    j["edit"] = r.edit;
    for (const auto& [tau, v] : r.f1) j["f1"][std::to_string(tau)] = v;
    return j;
}

void write_per_video_csv(const std::string& path, const EvalReport& r) {
    std::ofstream f(path);
    if (!f) throw DataError("cannot open '" + path + "' for writing");
    f << "id,gt_count,pred_count\n";
    for (const auto& v : r.per_video)
        f << v.id << ',' << fmt_double(v.gt_count) << ',' << fmt_double(v.pred_count) << '\n';
    if (!f) throw DataError("short write to '" + path + "'");
}

}  // namespace

EvalReport cmd_eval(const RunConfig& cfg, const std::string& checkpoint_path,
                    const std::string& split, bool dump_density) {
    cfg.validate();
    const Checkpoint ck = load_checkpoint(checkpoint_path);
    const uint64_t hash = config_hash(cfg);
    if (ck.cfg_hash != hash)
        throw DataError("checkpoint '" + checkpoint_path +
                        "' was trained under a different config (hash mismatch)");
    const ModelConfig mc = cfg.model_config();
    ParamStore params(Rng::derive(cfg.seed, "init", 0));
    init_model_params(params, mc);
    apply_checkpoint(ck, params);

    const Manifest m = read_manifest((fs::path(cfg.data_dir) / "manifest.json").string());
    const auto seqs = load_split(cfg.data_dir, m, split);
    EvalReport report = evaluate_model(mc, params, seqs);

    std::error_code ec;
    fs::create_directories(cfg.out_dir, ec);
    if (ec) throw DataError("cannot create '" + cfg.out_dir + "': " + ec.message());
    const std::string report_path = (fs::path(cfg.out_dir) / "report.json").string();
    std::ofstream rf(report_path);
    if (!rf) throw DataError("cannot open '" + report_path + "' for writing");
    rf << report_to_json(report, split).dump(2) << "\n";
    if (!rf) throw DataError("short write to '" + report_path + "'");
    write_per_video_csv((fs::path(cfg.out_dir) / "per_video.csv").string(), report);

    if (dump_density) {
        const fs::path dir = fs::path(cfg.out_dir) / "density";
        fs::create_directories(dir, ec);
        if (ec) throw DataError("cannot create '" + dir.string() + "': " + ec.message());
        NoGradGuard guard;
        for (const auto& s : seqs) {
            const ModelOutputs outs = model_forward(s.embeddings, mc, params);
            const DensityMap gt = density_gt(s.annotations, s.embeddings.rows());
            const std::string path = (dir / (s.id + ".csv")).string();
            std::ofstream f(path);
            if (!f) throw DataError("cannot open '" + path + "' for writing");
            f << "frame,density,gt_density\n";
            for (int t = 0; t < s.embeddings.rows(); ++t)
                f << t << ',' << fmt_double(outs.density.values.at(t, 0)) << ','
                  << fmt_double(gt.values.at(t, 0)) << '\n';
        }
    }
    return report;
}

std::vector<std::pair<std::string, EvalReport>> cmd_ablate(const RunConfig& cfg,
                                                           const std::string& suite) {
    cfg.validate();
    struct Row {
        std::string label;
        RunConfig rc;
    };
    std::vector<Row> rows;
    if (suite == "integration") {
        for (const FusionMode mode : {FusionMode::rfl_only, FusionMode::mpr_only,
                                      FusionMode::weighted_avg, FusionMode::concat}) {
            RunConfig rc = cfg;
            rc.fusion.mode = mode;
            rows.push_back({to_string(mode), rc});
        }
    } else if (suite == "losses") {
        const struct {
            bool loc, tri, den;
            const char* label;
        } switches[] = {{false, false, true, "den"},
                        {false, true, true, "tri+den"},
                        {true, false, true, "loc+den"},
                        {true, true, false, "loc+tri"},
                        {true, true, true, "loc+tri+den"}};
        for (const auto& sw : switches) {
            RunConfig rc = cfg;
            rc.loss.l_loc = sw.loc;
            rc.loss.l_tri = sw.tri;
            rc.loss.l_den = sw.den;
            rows.push_back({sw.label, rc});
        }
    } else if (suite == "similarity") {
        for (const SimilarityVariant v : {SimilarityVariant::tsm, SimilarityVariant::sa,
                                          SimilarityVariant::mpr_tsm, SimilarityVariant::lmrl}) {
            RunConfig rc = cfg;
            rc.similarity = v;
            rows.push_back({to_string(v), rc});
        }
    } else {
        throw UsageError("unknown ablation suite '" + suite +
                         "' (expected integration, losses or similarity)");
    }

    std::vector<std::pair<std::string, EvalReport>> results;
    for (auto& row : rows) {
        row.rc.out_dir =
            (fs::path(cfg.out_dir) / ("ablate_" + suite) / row.label).string();
        const TrainResult tr = cmd_train(row.rc);
        const EvalReport rep = cmd_eval(row.rc, tr.best_checkpoint, "test");
        results.emplace_back(row.label, rep);
    }

    std::error_code ec;
    fs::create_directories(cfg.out_dir, ec);
    const std::string csv_path =
        (fs::path(cfg.out_dir) / ("ablation_" + suite + ".csv")).string();
    std::ofstream f(csv_path);
    if (!f) throw DataError("cannot open '" + csv_path + "' for writing");
    f << "variant,mae,obo,frame_acc,edit,f1_10,f1_25,f1_50\n";
    for (const auto& [label, r] : results) {
        f << label << ',' << fmt_double(r.mae) << ',' << fmt_double(r.obo) << ','
          << fmt_double(r.frame_acc) << ',' << fmt_double(r.edit) << ','
          << fmt_double(r.f1.at(10)) << ',' << fmt_double(r.f1.at(25)) << ','
          << fmt_double(r.f1.at(50)) << '\n';
    }
    if (!f) throw DataError("short write to '" + csv_path + "'");
    return results;
}

}  // namespace lmrl
