#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "faml/config.hpp"
#include "faml/data.hpp"
#include "faml/evidential_net.hpp"
#include "faml/metrics.hpp"
#include "faml/sl_core.hpp"
#include "faml/trajectory_prior.hpp"

namespace faml {

struct EpochStats {
    int epoch = 0;
    double total = 0.0;
    double ace_fused = 0.0;
    double ace_views = 0.0;
    double fairness_fused = 0.0;
    double fairness_views = 0.0; // mean over views
    double consistency = 0.0;
    double lambda_t = 0.0;
    double prior_weight = 0.0; // W of the prior active during the epoch
    double train_acc = 0.0;
    double test_acc = -1.0; // negative = not evaluated this epoch
};

struct TrainArtifacts {
    std::vector<EpochStats> history;
    EvalReport report;
    PriorVector final_prior;
    RegionPartition partition;
    std::string kernel_backend;
    std::vector<EvidentialNet> nets;
    NormStats norm_stats;
};

// Stratified split plus optional long-tail subsampling of the train side,
// both driven by cfg (test_fraction, imbalance_ratio, seed).
struct PreparedData {
    MultiViewDataset train;
    MultiViewDataset test;
};

PreparedData prepare_splits(const MultiViewDataset& full, const TrainConfig& cfg);

// Full training loop. When out_dir is non-null, writes config.toml,
// manifest.json, history.csv, per-view checkpoints, report.json and the
// plot-data CSVs there.
TrainArtifacts train(const MultiViewDataset& train_raw, const MultiViewDataset& test_raw,
                     const TrainConfig& cfg,
                     const std::filesystem::path* out_dir = nullptr);

// Forward-only evaluation of trained view networks on a normalized test set.
EvalReport evaluate(const std::vector<EvidentialNet>& nets,
                    const MultiViewDataset& test_normalized, const PriorVector& prior,
                    const RegionPartition& partition, bool pin_base_rates = false);

// Re-runs evaluation from persisted artifacts: checkpoints, normalization and
// the final prior are read from run_dir; data is re-prepared from the
// manifest's recorded config.
EvalReport evaluate_run_dir(const std::filesystem::path& run_dir,
                            const MultiViewDataset& full);

struct AblationRow {
    std::string name;
    bool adaptive_prior = false;
    bool fairness = false;
    bool consistency = false;
    std::vector<EvalReport> per_seed;
    double mean_acc_all = 0.0;
    double std_acc_all = 0.0;
    double mean_acc_tail = 0.0;
    double std_acc_tail = 0.0;
    double mean_fused_fd = 0.0;
};

// The five flag combinations (all-off, prior only, prior+fairness,
// prior+consistency, all-on), each trained over `num_seeds` seeds derived
// from base.seed.
std::vector<AblationRow> ablation_matrix(const MultiViewDataset& full,
                                         const TrainConfig& base, std::size_t num_seeds,
                                         const std::filesystem::path* out_dir = nullptr);

void write_ablation_csv(const std::filesystem::path& path,
                        const std::vector<AblationRow>& rows);

} // namespace faml
