#include "faml/losses.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "faml/errors.hpp"
#include "faml/numerics.hpp"

namespace faml {

ValueGrad ace_loss(const DirichletParams& d, std::size_t label) {
    if (label >= d.size())
        throw DimensionError("ace_loss: label " + std::to_string(label) + " out of range for K=" +
                             std::to_string(d.size()));
    ValueGrad out;
    out.value = digamma(d.strength) - digamma(d.alpha[label]);
    const double trig_s = trigamma(d.strength);
    const double trig_y = trigamma(d.alpha[label]);
    out.grad.assign(d.size(), trig_s);
    out.grad[label] -= trig_y;
    return out;
}

double FairnessBatch::grad_coeff(std::size_t k) const {
    if (k >= counts.size() || counts[k] == 0 || present == 0)
        return 0.0;
    return 2.0 * (class_mean[k] - grand_mean) /
           (static_cast<double>(present) * static_cast<double>(counts[k]));
}

FairnessBatch fairness_batch(const std::vector<EvidenceVector>& evidences,
                             const std::vector<std::size_t>& labels, std::size_t num_classes) {
    require_same_length(evidences.size(), labels.size(), "fairness_batch");
    if (evidences.empty())
        throw std::invalid_argument("fairness_batch: empty batch");
    FairnessBatch fb;
    fb.class_mean.assign(num_classes, 0.0);
    fb.counts.assign(num_classes, 0);
    for (std::size_t n = 0; n < evidences.size(); ++n) {
        const std::size_t y = labels[n];
        if (y >= num_classes)
            throw DimensionError("fairness_batch: label out of range");
        fb.class_mean[y] += evidences[n].values[y];
        ++fb.counts[y];
    }
    for (std::size_t k = 0; k < num_classes; ++k) {
        if (fb.counts[k] == 0)
            continue;
        fb.class_mean[k] /= static_cast<double>(fb.counts[k]);
        fb.grand_mean += fb.class_mean[k];
        ++fb.present;
    }
    if (fb.present == 0)
        return fb;
    fb.grand_mean /= static_cast<double>(fb.present);
    for (std::size_t k = 0; k < num_classes; ++k) {
        if (fb.counts[k] == 0)
            continue;
        const double dev = fb.class_mean[k] - fb.grand_mean;
        fb.value += dev * dev;
    }
    fb.value /= static_cast<double>(fb.present);
    return fb;
}

double acc_loss_value(const DirichletParams& d, std::size_t label, const FairnessBatch& fd,
                      double lambda_t) {
    return ace_loss(d, label).value + lambda_t * fd.value;
}

ConsistencyResult consistency_loss(const std::vector<DirichletParams>& views) {
    ConsistencyResult out;
    const std::size_t v_count = views.size();
    out.grads.resize(v_count);
    if (v_count == 0)
        return out;
    const std::size_t k_count = views.front().size();
    for (const auto& d : views)
        require_same_length(d.size(), k_count, "consistency_loss");
    for (auto& g : out.grads)
        g.assign(k_count, 0.0);
    if (v_count < 2)
        return out;

    std::vector<Vec> var(v_count);
    std::vector<Matrix> jac(v_count);
    for (std::size_t v = 0; v < v_count; ++v) {
        var[v] = dirichlet_variance(views[v]);
        jac[v] = dirichlet_variance_jacobian(views[v]);
    }
    // ordered pairs; each unordered pair contributes twice
    for (std::size_t p = 0; p < v_count; ++p) {
        for (std::size_t q = 0; q < v_count; ++q) {
            if (p == q)
                continue;
            for (std::size_t k = 0; k < k_count; ++k) {
                const double diff = var[p][k] - var[q][k];
                out.value += std::fabs(diff);
                if (diff == 0.0)
                    continue; // subgradient 0 at the tie point
                const double s = diff > 0.0 ? 1.0 : -1.0;
                const double* jp = jac[p].row(k);
                const double* jq = jac[q].row(k);
                for (std::size_t j = 0; j < k_count; ++j) {
                    out.grads[p][j] += s * jp[j];
                    out.grads[q][j] -= s * jq[j];
                }
            }
        }
    }
    return out;
}

double lambda_schedule(std::size_t epoch, std::size_t total_epochs) {
    if (total_epochs == 0)
        throw std::invalid_argument("lambda_schedule: total_epochs must be >= 1");
    const double t = static_cast<double>(epoch) / static_cast<double>(total_epochs);
    return std::clamp(t, 0.0, 1.0);
}

Vec class_balance_weights(const std::vector<std::size_t>& class_counts) {
    if (class_counts.empty())
        throw std::invalid_argument("class_balance_weights: no classes");
    Vec w(class_counts.size());
    double mean_inv = 0.0;
    for (std::size_t k = 0; k < class_counts.size(); ++k) {
        if (class_counts[k] == 0)
            throw std::invalid_argument("class_balance_weights: class " + std::to_string(k) +
                                        " has no samples");
        w[k] = 1.0 / static_cast<double>(class_counts[k]);
        mean_inv += w[k];
    }
    mean_inv /= static_cast<double>(class_counts.size());
    for (double& x : w)
        x /= mean_inv;
    return w;
}

LossBreakdown total_loss_breakdown(const DirichletParams& fused,
                                   const std::vector<DirichletParams>& per_view,
                                   std::size_t label, double class_weight, double lambda_t,
                                   double beta_con, const Vec& fairness_view_values,
                                   double fairness_fused_value) {
    require_same_length(per_view.size(), fairness_view_values.size(),
                        "total_loss_breakdown fairness values");
    LossBreakdown b;
    b.lambda_t = lambda_t;
    b.beta_con = beta_con;
    b.ace_fused = ace_loss(fused, label).value;
    b.fairness_fused = fairness_fused_value;
    b.fairness_per_view = fairness_view_values;
    b.ace_per_view.resize(per_view.size());
    double supervised = b.ace_fused + lambda_t * fairness_fused_value;
    for (std::size_t v = 0; v < per_view.size(); ++v) {
        b.ace_per_view[v] = ace_loss(per_view[v], label).value;
        supervised += b.ace_per_view[v] + lambda_t * fairness_view_values[v];
    }
    b.consistency = consistency_loss(per_view).value;
    b.total = class_weight * supervised + beta_con * b.consistency;
    return b;
}

namespace {

struct SampleView {
    double strength = 0.0;
    double confidence = 0.0; // c_v = 1 - u_v
};

EvidenceVector fuse_sample(const BatchEvidence& batch, std::size_t n, const Vec& confidences) {
    const std::size_t k_count = batch.num_classes;
    double conf_total = 0.0;
    for (double c : confidences)
        conf_total += c;
    Vec fused(k_count, 0.0);
    if (conf_total > 0.0) {
        for (std::size_t v = 0; v < batch.num_views(); ++v) {
            const double w = confidences[v] / conf_total;
            const Vec& e = batch.views[v][n].values;
            for (std::size_t j = 0; j < k_count; ++j)
                fused[j] += w * e[j];
        }
    }
    return EvidenceVector(std::move(fused));
}

void validate_batch(const BatchEvidence& batch, const PriorVector& prior,
                    const BatchLossOptions& opts) {
    if (batch.num_views() == 0 || batch.batch_size() == 0)
        throw std::invalid_argument("batch_loss: empty batch");
    require_same_length(batch.num_classes, prior.size(), "batch_loss prior");
    if (!opts.class_weights.empty())
        require_same_length(opts.class_weights.size(), batch.num_classes,
                            "batch_loss class weights");
    for (const auto& view : batch.views) {
        require_same_length(view.size(), batch.batch_size(), "batch_loss view batch");
        for (const auto& e : view)
            require_same_length(e.size(), batch.num_classes, "batch_loss evidence length");
    }
}

} // namespace

double batch_loss_value(const BatchEvidence& batch, const PriorVector& prior,
                        const BatchLossOptions& opts,
                        const std::vector<Vec>* frozen_confidences) {
    validate_batch(batch, prior, opts);
    const std::size_t v_count = batch.num_views();
    const std::size_t b_count = batch.batch_size();
    const double inv_b = 1.0 / static_cast<double>(b_count);

    std::vector<EvidenceVector> fused;
    fused.reserve(b_count);
    double supervised = 0.0;
    double consistency = 0.0;
    double weight_mean = 0.0;
    for (std::size_t n = 0; n < b_count; ++n) {
        Vec conf(v_count);
        std::vector<DirichletParams> view_params(v_count);
        for (std::size_t v = 0; v < v_count; ++v) {
            view_params[v] = dirichlet_from_evidence(batch.views[v][n], prior);
            conf[v] = frozen_confidences != nullptr
                          ? (*frozen_confidences)[n][v]
                          : 1.0 - prior.weight_total / view_params[v].strength;
        }
        fused.push_back(fuse_sample(batch, n, conf));
        const DirichletParams fused_params = dirichlet_from_evidence(fused.back(), prior);

        const std::size_t y = batch.labels[n];
        const double w = opts.class_weights.empty() ? 1.0 : opts.class_weights[y];
        weight_mean += w;
        double sample_ace = ace_loss(fused_params, y).value;
        for (std::size_t v = 0; v < v_count; ++v)
            sample_ace += ace_loss(view_params[v], y).value;
        supervised += w * sample_ace;
        if (opts.beta_con != 0.0)
            consistency += consistency_loss(view_params).value;
    }
    weight_mean *= inv_b;

    double fairness = fairness_batch(fused, batch.labels, batch.num_classes).value;
    for (std::size_t v = 0; v < v_count; ++v)
        fairness += fairness_batch(batch.views[v], batch.labels, batch.num_classes).value;

    return inv_b * supervised + opts.lambda_t * weight_mean * fairness +
           opts.beta_con * inv_b * consistency;
}

BatchLossResult batch_loss(const BatchEvidence& batch, const PriorVector& prior,
                           const BatchLossOptions& opts) {
    validate_batch(batch, prior, opts);
    const std::size_t v_count = batch.num_views();
    const std::size_t b_count = batch.batch_size();
    const std::size_t k_count = batch.num_classes;
    const double w_prior = prior.weight_total;
    const double inv_b = 1.0 / static_cast<double>(b_count);

    BatchLossResult out;
    out.grads.assign(v_count, std::vector<Vec>(b_count, Vec(k_count, 0.0)));
    out.fused.reserve(b_count);

    // forward quantities kept for the batch-level fairness gradient
    std::vector<std::vector<SampleView>> sv(b_count, std::vector<SampleView>(v_count));
    std::vector<double> conf_total(b_count, 0.0);
    double weight_mean = 0.0;
    double supervised = 0.0;

    for (std::size_t n = 0; n < b_count; ++n) {
        const std::size_t y = batch.labels[n];
        if (y >= k_count)
            throw DimensionError("batch_loss: label out of range");
        const double w = opts.class_weights.empty() ? 1.0 : opts.class_weights[y];
        weight_mean += w;

        Vec conf(v_count);
        std::vector<DirichletParams> view_params(v_count);
        for (std::size_t v = 0; v < v_count; ++v) {
            view_params[v] = dirichlet_from_evidence(batch.views[v][n], prior);
            sv[n][v].strength = view_params[v].strength;
            conf[v] = 1.0 - w_prior / view_params[v].strength;
            sv[n][v].confidence = conf[v];
            conf_total[n] += conf[v];
        }
        out.fused.push_back(fuse_sample(batch, n, conf));
        const DirichletParams fused_params = dirichlet_from_evidence(out.fused.back(), prior);

        // supervised terms
        const double trig_sf = trigamma(fused_params.strength);
        const double trig_yf = trigamma(fused_params.alpha[y]);
        const double ace_fused = digamma(fused_params.strength) - digamma(fused_params.alpha[y]);
        out.mean_ace_fused += ace_fused;
        double sample_ace = ace_fused;

        for (std::size_t v = 0; v < v_count; ++v) {
            const double trig_sv = trigamma(view_params[v].strength);
            const double trig_yv = trigamma(view_params[v].alpha[y]);
            const double ace_view =
                digamma(view_params[v].strength) - digamma(view_params[v].alpha[y]);
            out.mean_ace_views += ace_view;
            sample_ace += ace_view;
            Vec& g = out.grads[v][n];
            const double wv = w * inv_b;
            // own-view ace
            for (std::size_t j = 0; j < k_count; ++j)
                g[j] += wv * trig_sv;
            g[y] -= wv * trig_yv;
            // fused ace through the aggregation weights
            if (conf_total[n] > 0.0) {
                const double share = conf[v] / conf_total[n];
                for (std::size_t j = 0; j < k_count; ++j)
                    g[j] += wv * share * trig_sf;
                g[y] -= wv * share * trig_yf;
                if (opts.exact_fusion_grad) {
                    // d c_v / d e_{v,j} = W / S_v^2, uniform over j
                    const double dconf = w_prior / (sv[n][v].strength * sv[n][v].strength);
                    double dot = 0.0; // sum_k dAce_f/df_k * (e_{v,k} - f_k)
                    double diff_sum = 0.0;
                    const Vec& ev = batch.views[v][n].values;
                    const Vec& fv = out.fused[n].values;
                    for (std::size_t j = 0; j < k_count; ++j)
                        diff_sum += ev[j] - fv[j];
                    dot = trig_sf * diff_sum - trig_yf * (ev[y] - fv[y]);
                    const double coeff = wv * dconf / conf_total[n] * dot;
                    for (std::size_t j = 0; j < k_count; ++j)
                        g[j] += coeff;
                }
            }
        }

        supervised += w * sample_ace;

        if (opts.beta_con != 0.0) {
            const ConsistencyResult con = consistency_loss(view_params);
            out.mean_consistency += con.value;
            for (std::size_t v = 0; v < v_count; ++v) {
                Vec& g = out.grads[v][n];
                for (std::size_t j = 0; j < k_count; ++j)
                    g[j] += opts.beta_con * inv_b * con.grads[v][j];
            }
        }
    }
    weight_mean *= inv_b;

    // batch-level fairness terms
    const FairnessBatch fd_fused = fairness_batch(out.fused, batch.labels, k_count);
    out.fairness_fused = fd_fused.value;
    out.fairness_views.resize(v_count);
    std::vector<FairnessBatch> fd_views(v_count);
    for (std::size_t v = 0; v < v_count; ++v) {
        fd_views[v] = fairness_batch(batch.views[v], batch.labels, k_count);
        out.fairness_views[v] = fd_views[v].value;
    }

    if (opts.lambda_t != 0.0) {
        const double lw = opts.lambda_t * weight_mean;
        for (std::size_t n = 0; n < b_count; ++n) {
            const std::size_t y = batch.labels[n];
            const double coeff_fused = lw * fd_fused.grad_coeff(y);
            for (std::size_t v = 0; v < v_count; ++v) {
                Vec& g = out.grads[v][n];
                g[y] += lw * fd_views[v].grad_coeff(y);
                if (conf_total[n] > 0.0) {
                    g[y] += coeff_fused * sv[n][v].confidence / conf_total[n];
                    if (opts.exact_fusion_grad) {
                        const double dconf =
                            w_prior / (sv[n][v].strength * sv[n][v].strength);
                        const double delta =
                            batch.views[v][n].values[y] - out.fused[n].values[y];
                        const double extra = coeff_fused * dconf / conf_total[n] * delta;
                        for (std::size_t j = 0; j < k_count; ++j)
                            g[j] += extra;
                    }
                }
            }
        }
    }

    out.mean_ace_fused *= inv_b;
    out.mean_ace_views *= inv_b / static_cast<double>(v_count);
    out.mean_consistency *= inv_b;

    double fairness_total = out.fairness_fused;
    for (double f : out.fairness_views)
        fairness_total += f;
    out.total = inv_b * supervised + opts.lambda_t * weight_mean * fairness_total +
                opts.beta_con * out.mean_consistency;
    return out;
}

} // namespace faml
