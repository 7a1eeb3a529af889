#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <utility>
#include <vector>

#include "faml/matrix.hpp"

namespace faml {

// Row-aligned multi-view dataset: views[v] is N x d_v, labels has N entries.
// source_indices track each row back to the originally loaded dataset so
// split/subsample provenance (and train/test disjointness) can be asserted.
struct MultiViewDataset {
    std::vector<Matrix> views;
    std::vector<std::size_t> labels;
    std::size_t num_classes = 0;
    std::vector<std::size_t> source_indices;

    std::size_t num_views() const { return views.size(); }
    std::size_t size() const { return labels.size(); }
    std::vector<std::size_t> class_counts() const;
    void validate() const;
};

// Classes grouped into descending-count thirds.
struct RegionPartition {
    std::vector<std::size_t> head;
    std::vector<std::size_t> medium;
    std::vector<std::size_t> tail;

    // 0 = head, 1 = medium, 2 = tail
    int region_of(std::size_t cls) const;
};

// Per-view z-score statistics plus a checksum of the rows they were fit on,
// so callers can assert the stats really came from the training subset.
struct NormStats {
    std::vector<Vec> mean;
    std::vector<Vec> stddev;
    std::uint64_t source_checksum = 0;
};

std::uint64_t dataset_checksum(const MultiViewDataset& ds);

MultiViewDataset load_multiview(const std::filesystem::path& dir);
void save_multiview(const MultiViewDataset& ds, const std::filesystem::path& dir);

NormStats fit_normalization(const MultiViewDataset& train);
void apply_normalization(MultiViewDataset& ds, const NormStats& stats);

std::pair<MultiViewDataset, MultiViewDataset>
stratified_split(const MultiViewDataset& ds, double test_fraction, std::uint64_t seed);

// Long-tail construction: classes get a seeded random rank r and keep
// round(N_max * rho^(-r/(K-1))) samples, clipped to availability.
MultiViewDataset pareto_subsample(const MultiViewDataset& train, double rho,
                                  std::uint64_t seed);

RegionPartition region_partition(const std::vector<std::size_t>& class_counts);

struct SynthSpec {
    std::size_t num_classes = 3;
    std::size_t num_views = 2;
    std::vector<std::size_t> dims; // one entry per view
    std::size_t samples_per_class = 100;
    double separation = 3.0;
    std::uint64_t seed = 1;
};

// Gaussian clusters: per (class, view) a random unit direction scaled by
// `separation` is the cluster mean; features add unit isotropic noise.
MultiViewDataset synth_generate(const SynthSpec& spec);

} // namespace faml
