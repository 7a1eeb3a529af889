#include "faml/metrics.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <fstream>
#include <limits>

#include <json.hpp>

#include "faml/errors.hpp"

namespace faml {

namespace {

constexpr double kUndefined = std::numeric_limits<double>::quiet_NaN();

nlohmann::ordered_json number_or_null(double x) {
    if (std::isnan(x))
        return nullptr;
    return x;
}

double null_or_number(const nlohmann::ordered_json& j) {
    if (j.is_null())
        return kUndefined;
    return j.get<double>();
}

} // namespace

std::string EvalReport::to_json() const {
    nlohmann::ordered_json j;
    j["acc"]["all"] = number_or_null(acc_all);
    j["acc"]["head"] = number_or_null(acc_head);
    j["acc"]["med"] = number_or_null(acc_med);
    j["acc"]["tail"] = number_or_null(acc_tail);
    j["ece"]["all"] = number_or_null(ece_all);
    j["ece"]["head"] = number_or_null(ece_head);
    j["ece"]["med"] = number_or_null(ece_med);
    j["ece"]["tail"] = number_or_null(ece_tail);
    j["fairness_degree_per_view"] = fairness_degree_per_view;
    j["fused_fairness_degree"] = fused_fairness_degree;
    j["mean_evidence_per_class"] = mean_evidence_per_class;
    j["mean_uncertainty_per_class"] = mean_uncertainty_per_class;
    return j.dump(2) + "\n";
}

EvalReport EvalReport::from_json(const std::string& text) {
    nlohmann::ordered_json j = nlohmann::ordered_json::parse(text);
    EvalReport r;
    r.acc_all = null_or_number(j.at("acc").at("all"));
    r.acc_head = null_or_number(j.at("acc").at("head"));
    r.acc_med = null_or_number(j.at("acc").at("med"));
    r.acc_tail = null_or_number(j.at("acc").at("tail"));
    r.ece_all = null_or_number(j.at("ece").at("all"));
    r.ece_head = null_or_number(j.at("ece").at("head"));
    r.ece_med = null_or_number(j.at("ece").at("med"));
    r.ece_tail = null_or_number(j.at("ece").at("tail"));
    auto vec_of = [](const nlohmann::ordered_json& arr) {
        Vec v;
        v.reserve(arr.size());
        for (const auto& x : arr)
            v.push_back(null_or_number(x));
        return v;
    };
    r.fairness_degree_per_view = vec_of(j.at("fairness_degree_per_view"));
    r.fused_fairness_degree = null_or_number(j.at("fused_fairness_degree"));
    r.mean_evidence_per_class = vec_of(j.at("mean_evidence_per_class"));
    r.mean_uncertainty_per_class = vec_of(j.at("mean_uncertainty_per_class"));
    return r;
}

RegionAccuracy accuracy(const std::vector<std::size_t>& predictions,
                        const std::vector<std::size_t>& labels,
                        const RegionPartition& partition) {
    if (predictions.size() != labels.size())
        throw DimensionError("predictions and labels have different lengths");
    if (labels.empty())
        throw DataError("accuracy over an empty sample set is undefined");

    std::size_t hit[4] = {0, 0, 0, 0};
    std::size_t seen[4] = {0, 0, 0, 0};
    for (std::size_t n = 0; n < labels.size(); ++n) {
        int region = partition.region_of(labels[n]);
        bool ok = predictions[n] == labels[n];
        ++seen[0];
        hit[0] += ok;
        ++seen[region + 1];
        hit[region + 1] += ok;
    }

    auto frac = [&](int i) {
        return seen[i] == 0 ? kUndefined
                            : static_cast<double>(hit[i]) / static_cast<double>(seen[i]);
    };
    RegionAccuracy acc;
    acc.all = frac(0);
    acc.head = frac(1);
    acc.medium = frac(2);
    acc.tail = frac(3);
    return acc;
}

double ece(const Vec& confidences, const std::vector<bool>& correct,
           std::size_t num_bins) {
    if (confidences.size() != correct.size())
        throw DimensionError("confidences and correctness flags have different lengths");
    if (confidences.empty())
        throw DataError("ECE over an empty sample set is undefined");
    if (num_bins == 0)
        throw ConfigError("ECE needs at least one bin");

    std::vector<std::size_t> count(num_bins, 0);
    Vec conf_sum(num_bins, 0.0);
    Vec acc_sum(num_bins, 0.0);
    for (std::size_t n = 0; n < confidences.size(); ++n) {
        double c = confidences[n];
        if (!(c >= 0.0 && c <= 1.0))
            throw DataError("confidence outside [0, 1]");
        std::size_t bin;
        if (c <= 0.0) {
            bin = 0;
        } else {
            bin = static_cast<std::size_t>(
                      std::ceil(c * static_cast<double>(num_bins))) - 1;
            if (bin >= num_bins)
                bin = num_bins - 1;
        }
        ++count[bin];
        conf_sum[bin] += c;
        acc_sum[bin] += correct[n] ? 1.0 : 0.0;
    }

    double total = static_cast<double>(confidences.size());
    double out = 0.0;
    for (std::size_t b = 0; b < num_bins; ++b) {
        if (count[b] == 0)
            continue;
        double nb = static_cast<double>(count[b]);
        out += (nb / total) * std::fabs(acc_sum[b] / nb - conf_sum[b] / nb);
    }
    return out;
}

Vec evidence_strength_report(const std::vector<Vec>& fused_evidence,
                             const std::vector<std::size_t>& labels,
                             std::size_t num_classes) {
    if (fused_evidence.size() != labels.size())
        throw DimensionError("evidence list and labels have different lengths");
    if (labels.empty())
        throw DataError("evidence strength over an empty sample set is undefined");

    Vec sum(num_classes, 0.0);
    std::vector<std::size_t> count(num_classes, 0);
    for (std::size_t n = 0; n < labels.size(); ++n) {
        if (labels[n] >= num_classes)
            throw DataError("label out of range in evidence strength report");
        double total = 0.0;
        for (double e : fused_evidence[n])
            total += e;
        sum[labels[n]] += total;
        ++count[labels[n]];
    }
    for (std::size_t c = 0; c < num_classes; ++c)
        sum[c] = count[c] == 0 ? kUndefined : sum[c] / static_cast<double>(count[c]);
    return sum;
}

EvalReport build_eval_report(const std::vector<Vec>& fused_evidence,
                             const std::vector<std::vector<Vec>>& per_view_evidence,
                             const std::vector<std::size_t>& labels,
                             const PriorVector& prior, const RegionPartition& partition,
                             bool pin_base_rates) {
    std::size_t n_samples = labels.size();
    if (fused_evidence.size() != n_samples)
        throw DimensionError("fused evidence list and labels have different lengths");
    for (const auto& view : per_view_evidence)
        if (view.size() != n_samples)
            throw DimensionError("per-view evidence list and labels have different lengths");
    if (n_samples == 0)
        throw DataError("cannot evaluate an empty sample set");

    std::size_t k = prior.values.size();
    ProbabilityVector rates =
        pin_base_rates ? ProbabilityVector::uniform(k) : base_rates_from_prior(prior);
    std::vector<std::size_t> predictions(n_samples);
    Vec confidences(n_samples);
    Vec uncertainties(n_samples);
    std::vector<bool> correct(n_samples);
    for (std::size_t n = 0; n < n_samples; ++n) {
        DirichletParams d = dirichlet_from_evidence(EvidenceVector{fused_evidence[n]}, prior);
        Opinion op = opinion_from_dirichlet(d, prior, rates);
        ProbabilityVector p = project(op);
        std::size_t best = 0;
        for (std::size_t j = 1; j < k; ++j)
            if (p.probs[j] > p.probs[best])
                best = j;
        predictions[n] = best;
        confidences[n] = std::min(1.0, p.probs[best]);
        uncertainties[n] = op.uncertainty;
        correct[n] = best == labels[n];
    }

    EvalReport report;
    RegionAccuracy acc = accuracy(predictions, labels, partition);
    report.acc_all = acc.all;
    report.acc_head = acc.head;
    report.acc_med = acc.medium;
    report.acc_tail = acc.tail;

    auto region_ece = [&](int region) {
        Vec conf;
        std::vector<bool> ok;
        for (std::size_t n = 0; n < n_samples; ++n) {
            if (region >= 0 && partition.region_of(labels[n]) != region)
                continue;
            conf.push_back(confidences[n]);
            ok.push_back(correct[n]);
        }
        if (conf.empty())
            return kUndefined;
        return ece(conf, ok);
    };
    report.ece_all = region_ece(-1);
    report.ece_head = region_ece(0);
    report.ece_med = region_ece(1);
    report.ece_tail = region_ece(2);

    auto grouped_fd = [&](const std::vector<Vec>& evidences) {
        std::vector<EvidenceVector> wrapped;
        wrapped.reserve(evidences.size());
        for (const Vec& e : evidences)
            wrapped.push_back(EvidenceVector{e});
        return fairness_degree_grouped(wrapped, labels, k);
    };
    report.fused_fairness_degree = grouped_fd(fused_evidence);
    for (const auto& view : per_view_evidence)
        report.fairness_degree_per_view.push_back(grouped_fd(view));

    report.mean_evidence_per_class = evidence_strength_report(fused_evidence, labels, k);

    Vec usum(k, 0.0);
    std::vector<std::size_t> ucount(k, 0);
    for (std::size_t n = 0; n < n_samples; ++n) {
        usum[labels[n]] += uncertainties[n];
        ++ucount[labels[n]];
    }
    report.mean_uncertainty_per_class.resize(k);
    for (std::size_t c = 0; c < k; ++c)
        report.mean_uncertainty_per_class[c] =
            ucount[c] == 0 ? kUndefined : usum[c] / static_cast<double>(ucount[c]);
    return report;
}

void write_evidence_strength_csv(const std::filesystem::path& path,
                                 const Vec& mean_evidence_per_class) {
    std::ofstream out(path);
    if (!out)
        throw DataError("cannot write evidence strength csv: " + path.string());
    out << "class,mean_total_evidence\n";
    for (std::size_t c = 0; c < mean_evidence_per_class.size(); ++c)
        out << c << ',' << mean_evidence_per_class[c] << '\n';
}

void write_uncertainty_histogram_csv(const std::filesystem::path& path,
                                     const Vec& uncertainties,
                                     const std::vector<std::size_t>& labels,
                                     const RegionPartition& partition,
                                     std::size_t num_bins) {
    if (uncertainties.size() != labels.size())
        throw DimensionError("uncertainties and labels have different lengths");
    if (num_bins == 0)
        throw ConfigError("histogram needs at least one bin");

    std::vector<std::array<std::size_t, 3>> bins(num_bins, {0, 0, 0});
    for (std::size_t n = 0; n < uncertainties.size(); ++n) {
        double u = std::clamp(uncertainties[n], 0.0, 1.0);
        std::size_t b = u <= 0.0 ? 0
                                 : static_cast<std::size_t>(
                                       std::ceil(u * static_cast<double>(num_bins))) - 1;
        if (b >= num_bins)
            b = num_bins - 1;
        ++bins[b][static_cast<std::size_t>(partition.region_of(labels[n]))];
    }

    std::ofstream out(path);
    if (!out)
        throw DataError("cannot write uncertainty histogram csv: " + path.string());
    out << "bin_low,bin_high,head_count,medium_count,tail_count\n";
    for (std::size_t b = 0; b < num_bins; ++b)
        out << static_cast<double>(b) / static_cast<double>(num_bins) << ','
            << static_cast<double>(b + 1) / static_cast<double>(num_bins) << ','
            << bins[b][0] << ',' << bins[b][1] << ',' << bins[b][2] << '\n';
}

} // namespace faml
