#pragma once

#include <cstddef>
#include <vector>

#include "faml/matrix.hpp"
#include "faml/sl_core.hpp"

namespace faml {

struct ValueGrad {
    double value = 0.0;
    Vec grad;
};

// Expected cross-entropy psi(S) - psi(alpha_y); gradient is with respect to
// the evidence (d alpha_k / d e_k = 1).
ValueGrad ace_loss(const DirichletParams& d, std::size_t label);

// Minibatch fairness-degree estimator. ebar_k is the mean true-class evidence
// over the batch samples of class k; classes absent from the batch are
// excluded from the variance.
struct FairnessBatch {
    double value = 0.0;
    Vec class_mean;                   // ebar_k, only meaningful where counts[k] > 0
    std::vector<std::size_t> counts;  // B_k
    double grand_mean = 0.0;
    std::size_t present = 0;          // number of classes with B_k > 0

    // d FD / d e_{n,k} for a sample with y_n = k: (2 / (K' B_k)) (ebar_k - ebar)
    double grad_coeff(std::size_t k) const;
};

FairnessBatch fairness_batch(const std::vector<EvidenceVector>& evidences,
                             const std::vector<std::size_t>& labels, std::size_t num_classes);

// L_acc = L_ace + lambda * FD
double acc_loss_value(const DirichletParams& d, std::size_t label, const FairnessBatch& fd,
                      double lambda_t);

// Sum of dissonance over ordered view pairs (each unordered pair counted
// twice). grads[v] is with respect to view v's evidence.
struct ConsistencyResult {
    double value = 0.0;
    std::vector<Vec> grads;
};

ConsistencyResult consistency_loss(const std::vector<DirichletParams>& views);

// Linear ramp epoch / total_epochs, clamped to [0, 1].
double lambda_schedule(std::size_t epoch, std::size_t total_epochs);

// w_k = (1/N_k) / mean_j(1/N_j); unit mean across classes.
Vec class_balance_weights(const std::vector<std::size_t>& class_counts);

// Per-sample composition of the total objective.
struct LossBreakdown {
    Vec ace_per_view;
    double ace_fused = 0.0;
    Vec fairness_per_view;
    double fairness_fused = 0.0;
    double consistency = 0.0;
    double total = 0.0;
    double lambda_t = 0.0;
    double beta_con = 0.0;
};

// total = w_y [ (ace_f + lambda FD_f) + sum_v (ace_v + lambda FD_v) ]
//         + beta_con * consistency
LossBreakdown total_loss_breakdown(const DirichletParams& fused,
                                   const std::vector<DirichletParams>& per_view,
                                   std::size_t label, double class_weight, double lambda_t,
                                   double beta_con, const Vec& fairness_view_values,
                                   double fairness_fused_value);

// ---- batch objective -------------------------------------------------------

// views[v][n] is the evidence of view v for batch sample n.
struct BatchEvidence {
    std::vector<std::vector<EvidenceVector>> views;
    std::vector<std::size_t> labels;
    std::size_t num_classes = 0;

    std::size_t num_views() const { return views.size(); }
    std::size_t batch_size() const { return labels.size(); }
};

struct BatchLossOptions {
    double lambda_t = 0.0;
    double beta_con = 0.0;
    // When false the fusion confidences c_v = 1 - u_v are held constant in the
    // backward pass; when true the full derivative through c_v is taken.
    bool exact_fusion_grad = false;
    Vec class_weights; // size K; empty means all ones
};

struct BatchLossResult {
    double total = 0.0; // mean over the batch of the per-sample totals
    double mean_ace_fused = 0.0;
    double mean_ace_views = 0.0; // averaged over views and samples
    double mean_consistency = 0.0;
    double fairness_fused = 0.0;
    Vec fairness_views;
    std::vector<EvidenceVector> fused;     // [B]
    std::vector<std::vector<Vec>> grads;   // [V][B] d total / d e_{v,n}
};

// Differentiable batch objective. frozen_confidences (tests only) pins the
// fusion weights per sample so finite differences can probe the
// straight-through path; layout [B][V].
double batch_loss_value(const BatchEvidence& batch, const PriorVector& prior,
                        const BatchLossOptions& opts,
                        const std::vector<Vec>* frozen_confidences = nullptr);

BatchLossResult batch_loss(const BatchEvidence& batch, const PriorVector& prior,
                           const BatchLossOptions& opts);

} // namespace faml
