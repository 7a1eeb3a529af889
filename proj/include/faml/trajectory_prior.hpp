#pragma once

#include <cstddef>
#include <filesystem>
#include <optional>
#include <vector>

#include "faml/sl_core.hpp"

namespace faml {

// Fused-argmax predictions for every training sample in one epoch.
struct TrajectoryRecord {
    int epoch = -1;
    std::vector<std::size_t> predicted;
};

// Warm-up / refresh cadence for the adaptive class prior.
struct PriorSchedule {
    int warmup_epochs = 20;
    int refresh_interval = 5;
    double gamma = 1.0;

    void validate() const;
};

// Per-class prior: beta_k = gamma * N_k / max(1, C_k) where C_k counts the
// correctly predicted samples of class k in the record. Low recall on a class
// inflates its prior (up to gamma * N_k when nothing was right).
PriorVector compute_prior(const TrajectoryRecord& record,
                          const std::vector<std::size_t>& labels,
                          const std::vector<std::size_t>& class_counts, double gamma);

// True exactly at epochs where a fresh prior must be computed from that
// epoch's record: epoch >= warmup and (epoch - warmup) % interval == 0.
bool should_refresh(int epoch, const PriorSchedule& schedule);

// Prior in effect for an epoch: all-ones until warm-up has passed and a
// computed prior exists, the latest computed prior afterwards.
PriorVector active_prior(int epoch, const PriorSchedule& schedule,
                         const std::optional<PriorVector>& latest_computed,
                         std::size_t num_classes);

// Audit log: one row per (epoch, sample) with predicted and true class.
void write_trajectory_log(const std::filesystem::path& path,
                          const std::vector<TrajectoryRecord>& records,
                          const std::vector<std::size_t>& labels);

} // namespace faml
