#include "faml/sl_core.hpp"

#include <cmath>
#include <string>

#include "faml/errors.hpp"

namespace faml {

namespace {

void require_finite(const Vec& v, const char* what) {
    for (double x : v)
        if (!std::isfinite(x))
            throw NumericError(std::string(what) + ": non-finite entry");
}

} // namespace

EvidenceVector EvidenceVector::checked(Vec v) {
    if (v.size() < 2)
        throw DimensionError("EvidenceVector: need at least 2 classes, got " +
                             std::to_string(v.size()));
    require_finite(v, "EvidenceVector");
    for (double x : v)
        if (x < 0.0)
            throw NumericError("EvidenceVector: negative evidence " + std::to_string(x));
    return EvidenceVector(std::move(v));
}

PriorVector PriorVector::checked(Vec v) {
    if (v.size() < 2)
        throw DimensionError("PriorVector: need at least 2 classes");
    require_finite(v, "PriorVector");
    double total = 0.0;
    for (double x : v) {
        if (!(x > 0.0))
            throw NumericError("PriorVector: entries must be strictly positive");
        total += x;
    }
    PriorVector p;
    p.values = std::move(v);
    p.weight_total = total;
    return p;
}

PriorVector PriorVector::uniform(std::size_t k) {
    PriorVector p;
    p.values.assign(k, 1.0);
    p.weight_total = static_cast<double>(k);
    return p;
}

ProbabilityVector ProbabilityVector::checked(Vec v) {
    require_finite(v, "ProbabilityVector");
    double total = 0.0;
    for (double x : v) {
        if (x < 0.0)
            throw NumericError("ProbabilityVector: negative entry");
        total += x;
    }
    if (std::fabs(total - 1.0) > 1e-9)
        throw NumericError("ProbabilityVector: entries sum to " + std::to_string(total));
    return ProbabilityVector{std::move(v)};
}

ProbabilityVector ProbabilityVector::uniform(std::size_t k) {
    return ProbabilityVector{Vec(k, 1.0 / static_cast<double>(k))};
}

ProbabilityVector base_rates_from_prior(const PriorVector& prior) {
    Vec a(prior.size());
    for (std::size_t k = 0; k < prior.size(); ++k)
        a[k] = prior.values[k] / prior.weight_total;
    return ProbabilityVector{std::move(a)};
}

DirichletParams dirichlet_from_evidence(const EvidenceVector& e, const PriorVector& prior) {
    require_same_length(e.size(), prior.size(), "dirichlet_from_evidence");
    require_finite(e.values, "dirichlet_from_evidence");
    DirichletParams d;
    d.alpha.resize(e.size());
    for (std::size_t k = 0; k < e.size(); ++k) {
        d.alpha[k] = e.values[k] + prior.values[k];
        d.strength += d.alpha[k];
    }
    return d;
}

Opinion opinion_from_dirichlet(const DirichletParams& d, const PriorVector& prior,
                               const ProbabilityVector& base_rates) {
    require_same_length(d.size(), prior.size(), "opinion_from_dirichlet");
    require_same_length(d.size(), base_rates.size(), "opinion_from_dirichlet base rates");
    Opinion o;
    o.belief.resize(d.size());
    for (std::size_t k = 0; k < d.size(); ++k) {
        const double evidence = d.alpha[k] - prior.values[k];
        if (evidence < -1e-9 * std::max(1.0, prior.values[k]))
            throw NumericError("opinion_from_dirichlet: alpha below its prior component");
        o.belief[k] = std::max(evidence, 0.0) / d.strength;
    }
    o.uncertainty = prior.weight_total / d.strength;
    o.base_rates = base_rates.probs;
    return o;
}

ProbabilityVector project(const Opinion& o) {
    require_same_length(o.belief.size(), o.base_rates.size(), "project");
    Vec p(o.size());
    for (std::size_t k = 0; k < o.size(); ++k)
        p[k] = o.belief[k] + o.base_rates[k] * o.uncertainty;
    return ProbabilityVector{std::move(p)};
}

EvidenceVector aggregate_weighted(const std::vector<std::pair<EvidenceVector, double>>& views) {
    if (views.empty())
        throw std::invalid_argument("aggregate_weighted: no views");
    const std::size_t k = views.front().first.size();
    double conf_total = 0.0;
    for (const auto& [e, u] : views) {
        require_same_length(e.size(), k, "aggregate_weighted");
        conf_total += 1.0 - u;
    }
    Vec out(k, 0.0);
    if (conf_total <= 0.0) {
        // every view vacuous; all evidence is zero by construction of u = 1
        return EvidenceVector(std::move(out));
    }
    for (const auto& [e, u] : views) {
        const double w = (1.0 - u) / conf_total;
        for (std::size_t i = 0; i < k; ++i)
            out[i] += w * e.values[i];
    }
    return EvidenceVector(std::move(out));
}

double uncertainty_mass(const EvidenceVector& e, const PriorVector& prior) {
    require_same_length(e.size(), prior.size(), "uncertainty_mass");
    double strength = prior.weight_total;
    for (double x : e.values)
        strength += x;
    return prior.weight_total / strength;
}

Vec dirichlet_variance(const DirichletParams& d) {
    const double s = d.strength;
    Vec var(d.size());
    for (std::size_t k = 0; k < d.size(); ++k)
        var[k] = d.alpha[k] * (s - d.alpha[k]) / (s * s * (s + 1.0));
    return var;
}

Matrix dirichlet_variance_jacobian(const DirichletParams& d) {
    // Var_k = (alpha_k S - alpha_k^2) / (S^2 (S + 1)); every alpha_j moves S.
    const double s = d.strength;
    const double denom = s * s * (s + 1.0);
    const double ddenom = 3.0 * s * s + 2.0 * s; // d denom / d S
    const std::size_t k = d.size();
    Matrix jac(k, k);
    for (std::size_t row = 0; row < k; ++row) {
        const double ak = d.alpha[row];
        const double numer = ak * (s - ak);
        for (std::size_t col = 0; col < k; ++col) {
            double dnumer = ak; // through S
            if (col == row)
                dnumer += s - 2.0 * ak;
            jac.at(row, col) = (dnumer * denom - numer * ddenom) / (denom * denom);
        }
    }
    return jac;
}

double dissonance(const DirichletParams& a, const DirichletParams& b) {
    require_same_length(a.size(), b.size(), "dissonance");
    const Vec va = dirichlet_variance(a);
    const Vec vb = dirichlet_variance(b);
    double total = 0.0;
    for (std::size_t k = 0; k < va.size(); ++k)
        total += std::fabs(va[k] - vb[k]);
    return total;
}

double dissonance(const Opinion& a, const Opinion& b, const PriorVector& prior_a,
                  const PriorVector& prior_b) {
    require_same_length(a.size(), b.size(), "dissonance");
    DirichletParams da, db;
    da.alpha.resize(a.size());
    db.alpha.resize(b.size());
    // invert b = e/S, u = W/S back to alpha = e + beta
    const double sa = prior_a.weight_total / a.uncertainty;
    const double sb = prior_b.weight_total / b.uncertainty;
    for (std::size_t k = 0; k < a.size(); ++k) {
        da.alpha[k] = a.belief[k] * sa + prior_a.values[k];
        db.alpha[k] = b.belief[k] * sb + prior_b.values[k];
        da.strength += da.alpha[k];
        db.strength += db.alpha[k];
    }
    return dissonance(da, db);
}

double fairness_degree(const std::vector<EvidenceVector>& evidences) {
    if (evidences.empty())
        throw std::invalid_argument("fairness_degree: empty evidence list");
    const std::size_t k = evidences.front().size();
    Vec class_mean(k, 0.0);
    for (const auto& e : evidences) {
        require_same_length(e.size(), k, "fairness_degree");
        for (std::size_t i = 0; i < k; ++i)
            class_mean[i] += e.values[i];
    }
    const double inv_n = 1.0 / static_cast<double>(evidences.size());
    double grand = 0.0;
    for (std::size_t i = 0; i < k; ++i) {
        class_mean[i] *= inv_n;
        grand += class_mean[i];
    }
    grand /= static_cast<double>(k);
    double fd = 0.0;
    for (std::size_t i = 0; i < k; ++i) {
        const double dev = class_mean[i] - grand;
        fd += dev * dev;
    }
    return fd / static_cast<double>(k);
}

double fairness_degree_grouped(const std::vector<EvidenceVector>& evidences,
                               const std::vector<std::size_t>& labels, std::size_t num_classes) {
    require_same_length(evidences.size(), labels.size(), "fairness_degree_grouped");
    if (evidences.empty())
        throw std::invalid_argument("fairness_degree_grouped: empty evidence list");
    Vec mean(num_classes, 0.0);
    std::vector<std::size_t> count(num_classes, 0);
    for (std::size_t n = 0; n < evidences.size(); ++n) {
        const std::size_t y = labels[n];
        if (y >= num_classes)
            throw DimensionError("fairness_degree_grouped: label out of range");
        mean[y] += evidences[n].values[y];
        ++count[y];
    }
    std::size_t present = 0;
    double grand = 0.0;
    for (std::size_t k = 0; k < num_classes; ++k) {
        if (count[k] == 0)
            continue;
        mean[k] /= static_cast<double>(count[k]);
        grand += mean[k];
        ++present;
    }
    if (present == 0)
        return 0.0;
    grand /= static_cast<double>(present);
    double fd = 0.0;
    for (std::size_t k = 0; k < num_classes; ++k) {
        if (count[k] == 0)
            continue;
        const double dev = mean[k] - grand;
        fd += dev * dev;
    }
    return fd / static_cast<double>(present);
}

} // namespace faml
