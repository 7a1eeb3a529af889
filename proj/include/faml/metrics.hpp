#pragma once

#include <cstddef>
#include <filesystem>
#include <string>
#include <vector>

#include "faml/data.hpp"
#include "faml/matrix.hpp"
#include "faml/sl_core.hpp"

namespace faml {

// Per-region values use NaN for "undefined" (empty region); the JSON
// serialization turns NaN into null so it can never be mistaken for 0.
struct EvalReport {
    double acc_all = 0.0;
    double acc_head = 0.0;
    double acc_med = 0.0;
    double acc_tail = 0.0;
    double ece_all = 0.0;
    double ece_head = 0.0;
    double ece_med = 0.0;
    double ece_tail = 0.0;
    Vec fairness_degree_per_view;
    double fused_fairness_degree = 0.0;
    Vec mean_evidence_per_class;    // mean total evidence, grouped by true class
    Vec mean_uncertainty_per_class; // mean fused uncertainty, grouped by true class

    std::string to_json() const;
    static EvalReport from_json(const std::string& text);
};

struct RegionAccuracy {
    double all = 0.0;
    double head = 0.0; // NaN when the region has no samples
    double medium = 0.0;
    double tail = 0.0;
};

RegionAccuracy accuracy(const std::vector<std::size_t>& predictions,
                        const std::vector<std::size_t>& labels,
                        const RegionPartition& partition);

// Equal-width binning; a confidence on a bin edge falls to the lower bin,
// except 1.0 which lands in the top bin.
double ece(const Vec& confidences, const std::vector<bool>& correct,
           std::size_t num_bins = 15);

// Mean total evidence per true class.
Vec evidence_strength_report(const std::vector<Vec>& fused_evidence,
                             const std::vector<std::size_t>& labels,
                             std::size_t num_classes);

// pin_base_rates swaps the prior-derived projection rates for uniform 1/K
// (the Dirichlet itself still uses the prior).
EvalReport build_eval_report(const std::vector<Vec>& fused_evidence,
                             const std::vector<std::vector<Vec>>& per_view_evidence,
                             const std::vector<std::size_t>& labels,
                             const PriorVector& prior, const RegionPartition& partition,
                             bool pin_base_rates = false);

void write_evidence_strength_csv(const std::filesystem::path& path,
                                 const Vec& mean_evidence_per_class);

void write_uncertainty_histogram_csv(const std::filesystem::path& path,
                                     const Vec& uncertainties,
                                     const std::vector<std::size_t>& labels,
                                     const RegionPartition& partition,
                                     std::size_t num_bins = 20);

} // namespace faml
