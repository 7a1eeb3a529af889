#pragma once

#include <cstddef>
#include <utility>
#include <vector>

#include "faml/matrix.hpp"

namespace faml {

// Non-negative per-class evidence mass produced by a view network.
struct EvidenceVector {
    Vec values;

    EvidenceVector() = default;
    explicit EvidenceVector(Vec v) : values(std::move(v)) {}

    std::size_t size() const { return values.size(); }
    // throws on K < 2, negative or non-finite entries
    static EvidenceVector checked(Vec v);
};

// Strictly positive Dirichlet prior weights beta_k with cached total W.
struct PriorVector {
    Vec values;
    double weight_total = 0.0;

    std::size_t size() const { return values.size(); }
    static PriorVector checked(Vec v);
    static PriorVector uniform(std::size_t k); // all-ones, W = K
};

// Concentration parameters alpha_k = e_k + beta_k with cached strength.
struct DirichletParams {
    Vec alpha;
    double strength = 0.0;

    std::size_t size() const { return alpha.size(); }
};

// Belief masses, uncertainty mass and base rates of a multinomial opinion.
struct Opinion {
    Vec belief;
    double uncertainty = 1.0;
    Vec base_rates;

    std::size_t size() const { return belief.size(); }
};

struct ProbabilityVector {
    Vec probs;

    std::size_t size() const { return probs.size(); }
    static ProbabilityVector checked(Vec v);
    static ProbabilityVector uniform(std::size_t k);
};

// Base rates implied by a prior: a_k = beta_k / W.
ProbabilityVector base_rates_from_prior(const PriorVector& prior);

// alpha_k = e_k + beta_k
DirichletParams dirichlet_from_evidence(const EvidenceVector& e, const PriorVector& prior);

// b_k = (alpha_k - beta_k) / S, u = W / S. With the unit prior this is the
// classic b = e/S, u = K/S form.
Opinion opinion_from_dirichlet(const DirichletParams& d, const PriorVector& prior,
                               const ProbabilityVector& base_rates);

// P_k = b_k + a_k * u
ProbabilityVector project(const Opinion& o);

// Confidence-weighted evidence mean with c_v = 1 - u_v. Permutation-invariant
// V-way form; equals the pairwise definition at V = 2. All-vacuous input
// (every c_v = 0) yields the zero vector.
EvidenceVector aggregate_weighted(const std::vector<std::pair<EvidenceVector, double>>& views);

// Uncertainty mass of (e, prior) without building the full opinion.
double uncertainty_mass(const EvidenceVector& e, const PriorVector& prior);

// Var_k = alpha_k (S - alpha_k) / (S^2 (S + 1))
Vec dirichlet_variance(const DirichletParams& d);

// d Var_k / d alpha_j, K x K row-major (row k, column j).
Matrix dirichlet_variance_jacobian(const DirichletParams& d);

// sum_k |Var_k(a) - Var_k(b)|
double dissonance(const DirichletParams& a, const DirichletParams& b);
double dissonance(const Opinion& a, const Opinion& b, const PriorVector& prior_a,
                  const PriorVector& prior_b);

// Variance of the class-wise mean evidence over a set of evidence vectors:
// (1/K) sum_k (ebar_k - ebar)^2 with ebar_k the mean of component k.
double fairness_degree(const std::vector<EvidenceVector>& evidences);

// Label-grouped variant: ebar_k is the mean of e_{n,k} over samples with
// y_n = k; classes absent from the set are excluded.
double fairness_degree_grouped(const std::vector<EvidenceVector>& evidences,
                               const std::vector<std::size_t>& labels, std::size_t num_classes);

} // namespace faml
