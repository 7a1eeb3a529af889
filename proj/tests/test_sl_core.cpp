#include <doctest.h>

#include <cmath>
#include <numeric>
#include <utility>
#include <vector>

#include "faml/errors.hpp"
#include "faml/rng.hpp"
#include "faml/sl_core.hpp"

using namespace faml;

namespace {

EvidenceVector ev(std::initializer_list<double> v) { return EvidenceVector::checked(Vec(v)); }
PriorVector pv(std::initializer_list<double> v) { return PriorVector::checked(Vec(v)); }

EvidenceVector random_evidence(Rng& rng, std::size_t k, double hi = 10.0) {
    Vec v(k);
    for (double& x : v)
        x = rng.uniform(0.0, hi);
    return EvidenceVector::checked(std::move(v));
}

PriorVector random_prior(Rng& rng, std::size_t k, double hi = 5.0) {
    Vec v(k);
    for (double& x : v)
        x = rng.uniform(0.05, hi);
    return PriorVector::checked(std::move(v));
}

Opinion make_opinion(const EvidenceVector& e, const PriorVector& prior) {
    const auto d = dirichlet_from_evidence(e, prior);
    return opinion_from_dirichlet(d, prior, base_rates_from_prior(prior));
}

} // namespace

TEST_SUITE("sl_core") {

TEST_CASE("checked constructors enforce their contracts") {
    CHECK_THROWS_AS(EvidenceVector::checked({5.0}), DimensionError);
    CHECK_THROWS_AS(EvidenceVector::checked({1.0, -0.1}), NumericError);
    CHECK_THROWS_AS(EvidenceVector::checked({1.0, std::nan("")}), NumericError);
    CHECK_NOTHROW(EvidenceVector::checked({0.0, 0.0}));

    CHECK_THROWS_AS(PriorVector::checked({1.0}), DimensionError);
    CHECK_THROWS_AS(PriorVector::checked({1.0, 0.0}), NumericError);
    CHECK(PriorVector::uniform(3).weight_total == doctest::Approx(3.0));
    CHECK(pv({0.5, 1.5}).weight_total == doctest::Approx(2.0));

    CHECK_THROWS_AS(ProbabilityVector::checked({0.5, 0.4}), NumericError);
    CHECK_THROWS_AS(ProbabilityVector::checked({1.2, -0.2}), NumericError);
    CHECK_NOTHROW(ProbabilityVector::checked({0.25, 0.75}));
}

TEST_CASE("unit-prior opinion: b = e/S, u = K/S") {
    const auto prior = PriorVector::uniform(2);
    const auto d = dirichlet_from_evidence(ev({2.0, 3.0}), prior);
    CHECK(d.alpha[0] == doctest::Approx(3.0));
    CHECK(d.alpha[1] == doctest::Approx(4.0));
    CHECK(d.strength == doctest::Approx(7.0));

    const auto o = opinion_from_dirichlet(d, prior, base_rates_from_prior(prior));
    CHECK(o.belief[0] == doctest::Approx(2.0 / 7.0));
    CHECK(o.belief[1] == doctest::Approx(3.0 / 7.0));
    CHECK(o.uncertainty == doctest::Approx(2.0 / 7.0));

    const auto p = project(o);
    CHECK(p.probs[0] == doctest::Approx(3.0 / 7.0)); // 2/7 + 0.5 * 2/7
    CHECK(p.probs[1] == doctest::Approx(4.0 / 7.0));

    CHECK(uncertainty_mass(ev({2.0, 3.0}), prior) == doctest::Approx(2.0 / 7.0));
}

TEST_CASE("prior-derived base rates make the projection alpha/S") {
    const auto prior = pv({0.5, 1.5});
    const auto rates = base_rates_from_prior(prior);
    CHECK(rates.probs[0] == doctest::Approx(0.25));
    CHECK(rates.probs[1] == doctest::Approx(0.75));

    const auto d = dirichlet_from_evidence(ev({2.0, 3.0}), prior);
    CHECK(d.strength == doctest::Approx(7.0));
    const auto o = opinion_from_dirichlet(d, prior, rates);
    CHECK(o.belief[0] == doctest::Approx(2.0 / 7.0));
    CHECK(o.uncertainty == doctest::Approx(2.0 / 7.0));

    const auto p = project(o);
    CHECK(p.probs[0] == doctest::Approx(2.5 / 7.0)); // alpha_0 / S
    CHECK(p.probs[1] == doctest::Approx(4.5 / 7.0));
}

TEST_CASE("vacuous opinion projects to the base rates") {
    const auto prior = pv({1.0, 2.0, 1.0});
    const auto o = make_opinion(ev({0.0, 0.0, 0.0}), prior);
    CHECK(o.uncertainty == doctest::Approx(1.0));
    const auto p = project(o);
    CHECK(p.probs[0] == doctest::Approx(0.25));
    CHECK(p.probs[1] == doctest::Approx(0.50));
    CHECK(p.probs[2] == doctest::Approx(0.25));
}

TEST_CASE("opinion invariants over randomized cases") {
    Rng rng(101);
    for (int i = 0; i < 5000; ++i) {
        const std::size_t k = 2 + rng.below(5);
        const auto prior = random_prior(rng, k);
        const auto e = random_evidence(rng, k);
        const auto d = dirichlet_from_evidence(e, prior);
        const auto o = opinion_from_dirichlet(d, prior, base_rates_from_prior(prior));

        double bsum = std::accumulate(o.belief.begin(), o.belief.end(), 0.0);
        CHECK(std::fabs(bsum + o.uncertainty - 1.0) < 1e-9);
        CHECK(o.uncertainty >= 0.0);
        for (double b : o.belief)
            CHECK(b >= 0.0);

        const auto p = project(o);
        double psum = std::accumulate(p.probs.begin(), p.probs.end(), 0.0);
        CHECK(std::fabs(psum - 1.0) < 1e-9);
        for (std::size_t j = 0; j < k; ++j)
            CHECK(std::fabs(p.probs[j] - d.alpha[j] / d.strength) < 1e-9);
    }
}

TEST_CASE("weighted aggregation: equal uncertainties reduce to the plain mean") {
    std::vector<std::pair<EvidenceVector, double>> views;
    views.emplace_back(ev({12.0, 2.0}), 0.5);
    views.emplace_back(ev({4.0, 2.0}), 0.5);
    const auto agg = aggregate_weighted(views);
    CHECK(agg.values[0] == doctest::Approx(8.0));
    CHECK(agg.values[1] == doctest::Approx(2.0));
}

TEST_CASE("weighted aggregation hand case and degenerate inputs") {
    // pairs carry (evidence, uncertainty mass); weights are c = 1 - u
    std::vector<std::pair<EvidenceVector, double>> views;
    views.emplace_back(ev({10.0, 0.0}), 0.4);
    views.emplace_back(ev({0.0, 10.0}), 0.8);
    const auto agg = aggregate_weighted(views);
    CHECK(agg.values[0] == doctest::Approx(7.5)); // 0.6 * 10 / 0.8
    CHECK(agg.values[1] == doctest::Approx(2.5)); // 0.2 * 10 / 0.8

    std::vector<std::pair<EvidenceVector, double>> vacuous;
    vacuous.emplace_back(ev({0.0, 0.0}), 1.0);
    vacuous.emplace_back(ev({0.0, 0.0}), 1.0);
    const auto zero = aggregate_weighted(vacuous);
    CHECK(zero.values[0] == 0.0);
    CHECK(zero.values[1] == 0.0);

    CHECK_THROWS_AS(aggregate_weighted({}), std::invalid_argument);
}

TEST_CASE("aggregation convexity and permutation invariance") {
    Rng rng(55);
    for (int i = 0; i < 2000; ++i) {
        const std::size_t k = 2 + rng.below(4);
        const std::size_t nv = 2 + rng.below(3);
        std::vector<std::pair<EvidenceVector, double>> views;
        for (std::size_t v = 0; v < nv; ++v)
            views.emplace_back(random_evidence(rng, k), rng.uniform(0.01, 1.0));
        const auto agg = aggregate_weighted(views);
        for (std::size_t j = 0; j < k; ++j) {
            double lo = views[0].first.values[j], hi = lo;
            for (const auto& [e, c] : views) {
                lo = std::min(lo, e.values[j]);
                hi = std::max(hi, e.values[j]);
            }
            CHECK(agg.values[j] >= lo - 1e-9);
            CHECK(agg.values[j] <= hi + 1e-9);
        }
        auto shuffled = views;
        rng.shuffle(shuffled);
        const auto agg2 = aggregate_weighted(shuffled);
        for (std::size_t j = 0; j < k; ++j)
            CHECK(std::fabs(agg.values[j] - agg2.values[j]) < 1e-9);
    }
}

TEST_CASE("dirichlet variance hand values and jacobian") {
    {
        DirichletParams d{{1.0, 2.0}, 3.0};
        const auto var = dirichlet_variance(d);
        CHECK(var[0] == doctest::Approx(1.0 / 18.0));
        CHECK(var[1] == doctest::Approx(1.0 / 18.0));
    }
    {
        DirichletParams d{{2.0, 4.0}, 6.0};
        const auto var = dirichlet_variance(d);
        CHECK(var[0] == doctest::Approx(2.0 / 63.0));
        CHECK(var[1] == doctest::Approx(2.0 / 63.0));
    }

    // jacobian against central differences
    Rng rng(3);
    for (int trial = 0; trial < 50; ++trial) {
        const std::size_t k = 2 + rng.below(4);
        Vec alpha(k);
        double s = 0.0;
        for (double& a : alpha) {
            a = rng.uniform(0.2, 6.0);
            s += a;
        }
        DirichletParams d{alpha, s};
        const auto jac = dirichlet_variance_jacobian(d);
        const double h = 1e-6;
        for (std::size_t j = 0; j < k; ++j) {
            Vec ap = alpha, am = alpha;
            ap[j] += h;
            am[j] -= h;
            DirichletParams dp{ap, s + h}, dm{am, s - h};
            const auto vp = dirichlet_variance(dp);
            const auto vm = dirichlet_variance(dm);
            for (std::size_t row = 0; row < k; ++row) {
                const double num = (vp[row] - vm[row]) / (2.0 * h);
                CHECK(std::fabs(jac.at(row, j) - num) < 1e-6);
            }
        }
    }
}

TEST_CASE("dissonance hand value, symmetry, identity") {
    DirichletParams a{{1.0, 2.0}, 3.0};
    DirichletParams b{{2.0, 4.0}, 6.0};
    // per-class |1/18 - 2/63| = 1/42, summed over two classes
    CHECK(dissonance(a, b) == doctest::Approx(1.0 / 21.0));
    CHECK(dissonance(b, a) == doctest::Approx(dissonance(a, b)));
    CHECK(dissonance(a, a) == doctest::Approx(0.0));

    const auto prior = PriorVector::uniform(2);
    const auto oa = make_opinion(ev({0.0, 1.0}), prior);
    const auto ob = make_opinion(ev({1.0, 3.0}), prior);
    CHECK(dissonance(oa, ob, prior, prior) ==
          doctest::Approx(dissonance(dirichlet_from_evidence(ev({0.0, 1.0}), prior),
                                     dirichlet_from_evidence(ev({1.0, 3.0}), prior))));
}

TEST_CASE("fairness degree hand value and scaling law") {
    std::vector<EvidenceVector> evidences;
    evidences.push_back(ev({1.0, 3.0}));
    evidences.push_back(ev({3.0, 5.0}));
    // class means [2, 4], grand mean 3 -> variance (1 + 1)/2 = 1
    CHECK(fairness_degree(evidences) == doctest::Approx(1.0));

    // identical components -> 0
    std::vector<EvidenceVector> flat{ev({2.0, 2.0}), ev({5.0, 5.0})};
    CHECK(fairness_degree(flat) == doctest::Approx(0.0));

    CHECK_THROWS_AS(fairness_degree({}), std::invalid_argument);

    Rng rng(77);
    for (int i = 0; i < 1000; ++i) {
        const std::size_t k = 2 + rng.below(4);
        std::vector<EvidenceVector> set;
        for (int n = 0; n < 5; ++n)
            set.push_back(random_evidence(rng, k));
        const double s = rng.uniform(0.1, 4.0);
        auto scaled = set;
        for (auto& e : scaled)
            for (double& x : e.values)
                x *= s;
        CHECK(std::fabs(fairness_degree(scaled) - s * s * fairness_degree(set)) <
              1e-9 * std::max(1.0, fairness_degree(set) * s * s));
    }
}

TEST_CASE("grouped fairness degree uses only same-class samples") {
    std::vector<EvidenceVector> evidences{ev({1.0, 9.0}), ev({0.0, 2.0}), ev({3.0, 9.0})};
    const std::vector<std::size_t> labels{0, 1, 0};
    // class 0 mean of component 0: (1+3)/2 = 2; class 1 mean of component 1: 2
    // grand mean 2 -> variance 0
    CHECK(fairness_degree_grouped(evidences, labels, 2) == doctest::Approx(0.0));

    const std::vector<std::size_t> labels2{0, 1, 1};
    // class 0: e0[0] = 1; class 1: mean(e1[1], e2[1]) = 5.5; grand 3.25
    const double expect = ((1.0 - 3.25) * (1.0 - 3.25) + (5.5 - 3.25) * (5.5 - 3.25)) / 2.0;
    CHECK(fairness_degree_grouped(evidences, labels2, 2) == doctest::Approx(expect));

    // a class absent from the set is excluded, not treated as zero
    std::vector<EvidenceVector> one{ev({4.0, 0.0, 0.0})};
    CHECK(fairness_degree_grouped(one, {0}, 3) == doctest::Approx(0.0));

    CHECK_THROWS_AS(fairness_degree_grouped(evidences, {0, 1, 5}, 2), DimensionError);
}

TEST_CASE("base rate monotonicity in the prior component") {
    // raising beta_j at fixed evidence raises P_j
    Rng rng(31);
    for (int i = 0; i < 1000; ++i) {
        const std::size_t k = 2 + rng.below(4);
        const auto e = random_evidence(rng, k);
        auto beta = random_prior(rng, k).values;
        const std::size_t j = rng.below(k);

        auto project_with = [&](const Vec& b) {
            const auto prior = PriorVector::checked(b);
            const auto d = dirichlet_from_evidence(e, prior);
            return project(opinion_from_dirichlet(d, prior, base_rates_from_prior(prior)))
                .probs[j];
        };
        const double before = project_with(beta);
        beta[j] += rng.uniform(0.1, 3.0);
        CHECK(project_with(beta) > before);
    }
}

} // TEST_SUITE
