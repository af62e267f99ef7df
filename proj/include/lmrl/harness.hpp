#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "lmrl/metrics.hpp"
#include "lmrl/model.hpp"
#include "lmrl/param_store.hpp"
#include "lmrl/supervision.hpp"
#include "lmrl/synthgen.hpp"

namespace lmrl {

struct OptimConfig {
    double lr = 1e-3;
    double beta1 = 0.9;
    double beta2 = 0.999;
    int epochs = 30;
    int batch_size = 4;

    void validate() const;
};

struct SplitSizes {
    int n_train = 200;
    int n_val = 50;
    int n_test = 50;
};

struct RunConfig {
    std::string data_dir = "data";
    std::string out_dir = "out";
    uint64_t seed = 7;
    SimilarityVariant similarity = SimilarityVariant::lmrl;
    GenConfig gen;
    SplitSizes splits;
    MprConfig mpr;
    RflConfig rfl;
    FusionConfig fusion;
    LossConfig loss;
    OptimConfig optim;

    ModelConfig model_config() const;
    void validate() const;

    static RunConfig load(const std::string& path);
    void save(const std::string& path) const;
    std::string to_json_string() const;
    static RunConfig from_json_string(const std::string& text);
};

// FNV-1a over the canonical JSON form, excluding filesystem paths so moving
// outputs around does not invalidate checkpoints.
uint64_t config_hash(const RunConfig& cfg);

struct Checkpoint {
    uint32_t version = 1;
    uint64_t cfg_hash = 0;
    int epoch = 0;
    double val_mae = 0.0;
    double val_obo = 0.0;
    std::vector<std::pair<std::string, Tensor>> params;  // insertion order
};

Checkpoint snapshot(const ParamStore& params, uint64_t cfg_hash, int epoch, double val_mae,
                    double val_obo);
void save_checkpoint(const std::string& path, const Checkpoint& ck);
Checkpoint load_checkpoint(const std::string& path);
// Strict: every stored parameter must exist with the same shape, and cover the
// store completely.
void apply_checkpoint(const Checkpoint& ck, ParamStore& params);

Manifest cmd_generate(const RunConfig& cfg);

struct TrainResult {
    std::string best_checkpoint;
    std::string last_checkpoint;
    std::string log_path;
    int best_epoch = -1;
    double best_val_mae = 0.0;
    double best_val_obo = 0.0;
    double final_train_loss = 0.0;
    std::vector<double> epoch_train_loss;
};

TrainResult cmd_train(const RunConfig& cfg);

EvalReport cmd_eval(const RunConfig& cfg, const std::string& checkpoint_path,
                    const std::string& split, bool dump_density = false);

// Writes ablation_<suite>.csv under cfg.out_dir; returns (row label, report).
std::vector<std::pair<std::string, EvalReport>> cmd_ablate(const RunConfig& cfg,
                                                           const std::string& suite);

// Pure evaluation used by cmd_eval and the ablation rows.
EvalReport evaluate_model(const ModelConfig& mc, ParamStore& params,
                          const std::vector<LabeledSequence>& seqs);

}  // namespace lmrl
