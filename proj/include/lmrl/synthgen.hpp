#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "lmrl/tensor.hpp"

namespace lmrl {

struct GenConfig {
    int seq_len = 64;
    int embed_dim = 16;
    std::pair<int, int> cycle_len_range{8, 24};
    std::pair<int, int> n_cycles_range{2, 6};
    double interruption_prob = 0.5;
    std::pair<int, int> interruption_len_range{4, 16};
    double noise_sigma = 0.1;
    std::pair<int, int> lead_tail_range{2, 8};
    uint64_t seed = 0;

    // Throws ConfigError on malformed ranges.
    void validate() const;
};

// Half-open [start, end) intervals, sorted and non-overlapping.
struct CycleAnnotations {
    std::vector<std::pair<int, int>> cycles;
    int count = 0;
};

struct LabeledSequence {
    Tensor embeddings;  // [N x C]
    CycleAnnotations annotations;
    std::string id;
};

// One synthetic sequence: a fixed C-dim closed action curve traversed once per
// cycle (duration change = traversal speed change), background frames from a
// separate stationary process, optional interruptions between cycles, plus
// i.i.d. Gaussian noise.  Throws GenerationError when the requested cycle
// ranges cannot be guaranteed to fit in seq_len.
LabeledSequence generate_sequence(const GenConfig& cfg, uint64_t seed);

struct ManifestEntry {
    std::string embeddings_path;  // relative to the dataset root
    std::string annotations_path;
    int count = 0;
};

struct Manifest {
    uint64_t seed = 0;
    std::vector<ManifestEntry> train, val, test;

    const std::vector<ManifestEntry>& split(const std::string& name) const;
};

Manifest generate_dataset(const GenConfig& cfg, int n_train, int n_val, int n_test,
                          const std::string& out_dir);

// Binary embedding file: "LMRL" magic, u32 rows, u32 cols (little-endian),
// then rows*cols little-endian f32 values, row-major.
void write_embeddings(const std::string& path, const Tensor& x);
Tensor read_embeddings(const std::string& path);

void write_annotations(const std::string& path, const std::string& id,
                       const CycleAnnotations& ann);
std::pair<std::string, CycleAnnotations> read_annotations(const std::string& path);

void write_manifest(const std::string& path, const Manifest& m);
Manifest read_manifest(const std::string& path);

// Loads every sequence of one split, in manifest order.
std::vector<LabeledSequence> load_split(const std::string& dataset_dir, const Manifest& m,
                                        const std::string& split);

}  // namespace lmrl
