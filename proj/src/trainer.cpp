#include "faml/trainer.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <numeric>
#include <sstream>

#include <json.hpp>

#include "faml/errors.hpp"
#include "faml/kernels.hpp"
#include "faml/losses.hpp"
#include "faml/rng.hpp"

namespace faml {

namespace {

Vec row_vec(const Matrix& m, std::size_t r) {
    return Vec(m.row(r), m.row(r) + m.cols);
}

std::string fmt17(double x) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", x);
    return buf;
}

RegionPartition partition_for(const std::vector<std::size_t>& class_counts) {
    if (class_counts.size() >= 3)
        return region_partition(class_counts);
    // Regions are meaningless below 3 classes; park everything in head so the
    // report's overall numbers still work.
    RegionPartition part;
    for (std::size_t c = 0; c < class_counts.size(); ++c)
        part.head.push_back(c);
    return part;
}

Vec fuse_batch_sample(const std::vector<Vec>& view_evidence, const PriorVector& prior) {
    std::vector<std::pair<EvidenceVector, double>> weighted;
    weighted.reserve(view_evidence.size());
    for (const Vec& e : view_evidence) {
        EvidenceVector ev{e};
        weighted.emplace_back(ev, 1.0 - uncertainty_mass(ev, prior));
    }
    return aggregate_weighted(weighted).values;
}

std::size_t argmax_projected(const Vec& fused, const PriorVector& prior,
                             const ProbabilityVector& rates) {
    DirichletParams d = dirichlet_from_evidence(EvidenceVector{fused}, prior);
    Opinion op = opinion_from_dirichlet(d, prior, rates);
    ProbabilityVector p = project(op);
    return static_cast<std::size_t>(
        std::max_element(p.probs.begin(), p.probs.end()) - p.probs.begin());
}

nlohmann::ordered_json config_json(const TrainConfig& cfg) {
    nlohmann::ordered_json j;
    j["data_dir"] = cfg.data_dir;
    j["test_fraction"] = cfg.test_fraction;
    j["imbalance_ratio"] = cfg.imbalance_ratio;
    j["apply_imbalance"] = cfg.apply_imbalance;
    j["hidden_dims"] = cfg.hidden_dims;
    j["activation"] = cfg.activation;
    j["epochs"] = cfg.epochs;
    j["batch_size"] = cfg.batch_size;
    j["learning_rate"] = cfg.learning_rate;
    j["weight_decay"] = cfg.weight_decay;
    j["gamma"] = cfg.gamma;
    j["beta_con"] = cfg.beta_con;
    j["warmup_epochs"] = cfg.warmup_epochs;
    j["refresh_interval"] = cfg.refresh_interval;
    j["adaptive_prior"] = cfg.adaptive_prior;
    j["fairness"] = cfg.fairness;
    j["consistency"] = cfg.consistency;
    j["exact_fusion_grad"] = cfg.exact_fusion_grad;
    j["fresh_eval_prior"] = cfg.fresh_eval_prior;
    j["pin_base_rates"] = cfg.pin_base_rates;
    j["seed"] = cfg.seed;
    j["eval_every"] = cfg.eval_every;
    return j;
}

std::string hex64(std::uint64_t x) {
    char buf[20];
    std::snprintf(buf, sizeof(buf), "0x%016llx", static_cast<unsigned long long>(x));
    return buf;
}

void write_history_csv(const std::filesystem::path& path,
                       const std::vector<EpochStats>& history) {
    std::ofstream out(path);
    if (!out)
        throw DataError("cannot write history: " + path.string());
    out << "epoch,total,ace_fused,ace_views,fairness_fused,fairness_views,"
           "consistency,lambda_t,prior_weight,train_acc,test_acc\n";
    for (const EpochStats& s : history) {
        out << s.epoch << ',' << fmt17(s.total) << ',' << fmt17(s.ace_fused) << ','
            << fmt17(s.ace_views) << ',' << fmt17(s.fairness_fused) << ','
            << fmt17(s.fairness_views) << ',' << fmt17(s.consistency) << ','
            << fmt17(s.lambda_t) << ',' << fmt17(s.prior_weight) << ','
            << fmt17(s.train_acc) << ',';
        if (s.test_acc >= 0.0)
            out << fmt17(s.test_acc);
        out << '\n';
    }
}

struct EvidencePass {
    std::vector<Vec> fused;                 // [N]
    std::vector<std::vector<Vec>> per_view; // [V][N]
};

EvidencePass infer_all(const std::vector<EvidentialNet>& nets, const MultiViewDataset& ds,
                       const PriorVector& prior) {
    EvidencePass pass;
    pass.per_view.resize(nets.size());
    pass.fused.resize(ds.size());
    std::vector<Vec> sample(nets.size());
    for (std::size_t n = 0; n < ds.size(); ++n) {
        for (std::size_t v = 0; v < nets.size(); ++v) {
            sample[v] = nets[v].infer(row_vec(ds.views[v], n)).values;
            pass.per_view[v].push_back(sample[v]);
        }
        pass.fused[n] = fuse_batch_sample(sample, prior);
    }
    return pass;
}

} // namespace

PreparedData prepare_splits(const MultiViewDataset& full, const TrainConfig& cfg) {
    auto [train, test] = stratified_split(full, cfg.test_fraction, cfg.seed);
    if (cfg.apply_imbalance)
        train = pareto_subsample(train, cfg.imbalance_ratio, cfg.seed);
    return PreparedData{std::move(train), std::move(test)};
}

EvalReport evaluate(const std::vector<EvidentialNet>& nets,
                    const MultiViewDataset& test_normalized, const PriorVector& prior,
                    const RegionPartition& partition, bool pin_base_rates) {
    EvidencePass pass = infer_all(nets, test_normalized, prior);
    return build_eval_report(pass.fused, pass.per_view, test_normalized.labels, prior,
                             partition, pin_base_rates);
}

TrainArtifacts train(const MultiViewDataset& train_raw, const MultiViewDataset& test_raw,
                     const TrainConfig& cfg, const std::filesystem::path* out_dir) {
    cfg.validate();
    train_raw.validate();
    test_raw.validate();

    std::size_t num_views = train_raw.num_views();
    if (test_raw.num_views() != num_views)
        throw DataError("train and test have different view counts");
    std::size_t k = train_raw.num_classes;
    if (k < 2)
        throw DataError("training needs at least two classes");
    for (std::size_t y : test_raw.labels)
        if (y >= k)
            throw DataError("test label outside the training class range");
    for (std::size_t v = 0; v < num_views; ++v)
        if (train_raw.views[v].cols != test_raw.views[v].cols)
            throw DataError("view " + std::to_string(v) +
                            " has different widths in train and test");

    // Leakage guard: a source row must not appear on both sides of the split.
    if (!train_raw.source_indices.empty() && !test_raw.source_indices.empty()) {
        std::vector<std::size_t> a = train_raw.source_indices;
        std::vector<std::size_t> b = test_raw.source_indices;
        std::sort(a.begin(), a.end());
        std::sort(b.begin(), b.end());
        std::vector<std::size_t> overlap;
        std::set_intersection(a.begin(), a.end(), b.begin(), b.end(),
                              std::back_inserter(overlap));
        if (!overlap.empty())
            throw DataError("train/test leak: source row " +
                            std::to_string(overlap.front()) + " appears in both splits");
    }

    std::vector<std::size_t> class_counts = train_raw.class_counts();
    for (std::size_t c = 0; c < k; ++c)
        if (class_counts[c] == 0)
            throw DataError("class " + std::to_string(c) + " has no training samples");

    NormStats stats = fit_normalization(train_raw);
    if (stats.source_checksum != dataset_checksum(train_raw))
        throw StateError("normalization statistics were not fit on the training rows");
    MultiViewDataset tr = train_raw;
    MultiViewDataset te = test_raw;
    apply_normalization(tr, stats);
    apply_normalization(te, stats);

    RegionPartition partition = partition_for(class_counts);
    Vec class_weights = class_balance_weights(class_counts);
    PriorSchedule schedule = cfg.schedule();

    std::vector<EvidentialNet> nets;
    std::vector<AdamState> adams;
    for (std::size_t v = 0; v < num_views; ++v) {
        NetConfig nc;
        nc.input_dim = tr.views[v].cols;
        nc.hidden_dims = cfg.hidden_dims.empty()
                             ? std::vector<std::size_t>{std::max<std::size_t>(64, nc.input_dim / 2)}
                             : cfg.hidden_dims;
        nc.num_classes = k;
        nc.seed = mix_seed(cfg.seed, 0x76696577u + v);
        nc.activation = activation_from_string(cfg.activation);
        nets.push_back(EvidentialNet::init(nc));
        adams.emplace_back(nets.back().num_params(),
                           AdamConfig{cfg.learning_rate, cfg.weight_decay, 0.9, 0.999, 1e-8});
    }

    std::size_t n_train = tr.size();
    std::optional<PriorVector> computed;
    std::vector<TrajectoryRecord> records;
    std::vector<EpochStats> history;
    ProbabilityVector pinned_rates = ProbabilityVector::uniform(k);

    std::vector<std::size_t> perm(n_train);
    std::vector<Vec> grad_buffers(num_views);

    for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
        PriorVector prior = cfg.adaptive_prior
                                ? active_prior(epoch, schedule, computed, k)
                                : PriorVector::uniform(k);
        ProbabilityVector rates =
            cfg.pin_base_rates ? pinned_rates : base_rates_from_prior(prior);
        double lambda_t = cfg.fairness
                              ? lambda_schedule(static_cast<std::size_t>(epoch),
                                                static_cast<std::size_t>(cfg.epochs))
                              : 0.0;
        double beta_con = cfg.consistency ? cfg.beta_con : 0.0;

        std::iota(perm.begin(), perm.end(), 0);
        Rng shuffle_rng(mix_seed(cfg.seed, 0x65706f0000u + static_cast<std::uint64_t>(epoch)));
        shuffle_rng.shuffle(perm);

        TrajectoryRecord record;
        record.epoch = epoch;
        record.predicted.resize(n_train);

        EpochStats stats_row;
        stats_row.epoch = epoch;
        stats_row.lambda_t = lambda_t;
        stats_row.prior_weight = prior.weight_total;
        std::size_t correct = 0;
        double inv_n = 1.0 / static_cast<double>(n_train);

        for (std::size_t start = 0; start < n_train; start += cfg.batch_size) {
            std::size_t b = std::min(cfg.batch_size, n_train - start);

            BatchEvidence batch;
            batch.num_classes = k;
            batch.views.resize(num_views);
            batch.labels.reserve(b);
            for (std::size_t v = 0; v < num_views; ++v)
                batch.views[v].reserve(b);
            for (std::size_t i = 0; i < b; ++i) {
                std::size_t n = perm[start + i];
                batch.labels.push_back(tr.labels[n]);
                for (std::size_t v = 0; v < num_views; ++v)
                    batch.views[v].push_back(nets[v].infer(row_vec(tr.views[v], n)));
            }

            BatchLossOptions opts;
            opts.lambda_t = lambda_t;
            opts.beta_con = beta_con;
            opts.exact_fusion_grad = cfg.exact_fusion_grad;
            opts.class_weights = class_weights;
            BatchLossResult res = batch_loss(batch, prior, opts);

            if (!std::isfinite(res.total)) {
                std::ostringstream msg;
                msg << "non-finite loss at epoch " << epoch << ", batch " << start / cfg.batch_size
                    << ": ace_fused=" << res.mean_ace_fused
                    << " ace_views=" << res.mean_ace_views
                    << " fairness_fused=" << res.fairness_fused
                    << " consistency=" << res.mean_consistency;
                throw NumericError(msg.str());
            }

            for (std::size_t v = 0; v < num_views; ++v) {
                grad_buffers[v].assign(nets[v].num_params(), 0.0);
                for (std::size_t i = 0; i < b; ++i) {
                    std::size_t n = perm[start + i];
                    nets[v].forward(row_vec(tr.views[v], n));
                    nets[v].backward(res.grads[v][i], grad_buffers[v]);
                }
                adams[v].step(nets[v].params(), grad_buffers[v]);
            }

            for (std::size_t i = 0; i < b; ++i) {
                std::size_t n = perm[start + i];
                std::size_t pred = argmax_projected(res.fused[i].values, prior, rates);
                record.predicted[n] = pred;
                correct += pred == tr.labels[n];
            }

            double share = static_cast<double>(b) * inv_n;
            stats_row.total += share * res.total;
            stats_row.ace_fused += share * res.mean_ace_fused;
            stats_row.ace_views += share * res.mean_ace_views;
            stats_row.fairness_fused += share * res.fairness_fused;
            double fv = 0.0;
            for (double f : res.fairness_views)
                fv += f;
            stats_row.fairness_views += share * (fv / static_cast<double>(num_views));
            stats_row.consistency += share * res.mean_consistency;
        }

        if (cfg.adaptive_prior && should_refresh(epoch, schedule)) {
            TrajectoryRecord source = record;
            if (cfg.fresh_eval_prior) {
                EvidencePass pass = infer_all(nets, tr, prior);
                for (std::size_t n = 0; n < n_train; ++n)
                    source.predicted[n] = argmax_projected(pass.fused[n], prior, rates);
            }
            computed = compute_prior(source, tr.labels, class_counts, cfg.gamma);
        }

        stats_row.train_acc = static_cast<double>(correct) * inv_n;
        if ((epoch + 1) % cfg.eval_every == 0 || epoch + 1 == cfg.epochs) {
            PriorVector next = cfg.adaptive_prior
                                   ? active_prior(epoch + 1, schedule, computed, k)
                                   : PriorVector::uniform(k);
            EvalReport probe = evaluate(nets, te, next, partition, cfg.pin_base_rates);
            stats_row.test_acc = probe.acc_all;
        }
        records.push_back(std::move(record));
        history.push_back(stats_row);
    }

    TrainArtifacts artifacts;
    artifacts.history = std::move(history);
    artifacts.final_prior = cfg.adaptive_prior
                                ? active_prior(cfg.epochs, schedule, computed, k)
                                : PriorVector::uniform(k);
    artifacts.partition = partition;
    artifacts.kernel_backend = kernels::active_name();
    artifacts.norm_stats = stats;
    artifacts.report =
        evaluate(nets, te, artifacts.final_prior, partition, cfg.pin_base_rates);
    artifacts.nets = std::move(nets);

    if (out_dir) {
        std::filesystem::create_directories(*out_dir);
        {
            std::ofstream out(*out_dir / "config.toml");
            out << to_toml(cfg);
        }
        write_history_csv(*out_dir / "history.csv", artifacts.history);
        {
            std::ofstream out(*out_dir / "report.json");
            out << artifacts.report.to_json();
        }
        for (std::size_t v = 0; v < artifacts.nets.size(); ++v)
            artifacts.nets[v].save(*out_dir / ("view_" + std::to_string(v) + ".ckpt"));
        write_trajectory_log(*out_dir / "trajectory.csv", records, tr.labels);
        write_evidence_strength_csv(*out_dir / "evidence_strength.csv",
                                    artifacts.report.mean_evidence_per_class);
        {
            // Per-sample fused uncertainties on the test set for the histogram.
            EvidencePass pass = infer_all(artifacts.nets, te, artifacts.final_prior);
            Vec uncertainties(te.size());
            for (std::size_t n = 0; n < te.size(); ++n)
                uncertainties[n] = uncertainty_mass(EvidenceVector{pass.fused[n]},
                                                    artifacts.final_prior);
            write_uncertainty_histogram_csv(*out_dir / "uncertainty_histogram.csv",
                                            uncertainties, te.labels, partition);
        }

        nlohmann::ordered_json manifest;
        manifest["version"] = 1;
        manifest["reconstructed"] = true;
        manifest["kernel_backend"] = artifacts.kernel_backend;
        manifest["config"] = config_json(cfg);
        nlohmann::ordered_json data;
        data["num_views"] = num_views;
        nlohmann::ordered_json dims = nlohmann::ordered_json::array();
        for (std::size_t v = 0; v < num_views; ++v)
            dims.push_back(train_raw.views[v].cols);
        data["view_dims"] = dims;
        data["num_classes"] = k;
        data["train_samples"] = train_raw.size();
        data["test_samples"] = test_raw.size();
        data["train_class_counts"] = class_counts;
        data["train_checksum"] = hex64(dataset_checksum(train_raw));
        data["test_checksum"] = hex64(dataset_checksum(test_raw));
        data["train_source_indices"] = train_raw.source_indices;
        data["test_source_indices"] = test_raw.source_indices;
        manifest["data"] = data;
        nlohmann::ordered_json norm;
        norm["mean"] = stats.mean;
        norm["stddev"] = stats.stddev;
        norm["source_checksum"] = hex64(stats.source_checksum);
        manifest["normalization"] = norm;
        nlohmann::ordered_json part;
        part["head"] = partition.head;
        part["medium"] = partition.medium;
        part["tail"] = partition.tail;
        manifest["region_partition"] = part;
        manifest["final_prior"] = artifacts.final_prior.values;
        std::ofstream out(*out_dir / "manifest.json");
        if (!out)
            throw DataError("cannot write manifest in " + out_dir->string());
        out << manifest.dump(2) << "\n";
    }
    return artifacts;
}

EvalReport evaluate_run_dir(const std::filesystem::path& run_dir,
                            const MultiViewDataset& full) {
    std::ifstream mf(run_dir / "manifest.json");
    if (!mf)
        throw DataError("missing manifest.json in " + run_dir.string());
    nlohmann::ordered_json manifest = nlohmann::ordered_json::parse(mf);

    TrainConfig cfg = parse_config_file(run_dir / "config.toml");
    PreparedData prepared = prepare_splits(full, cfg);

    auto recorded = manifest.at("data").at("test_checksum").get<std::string>();
    if (hex64(dataset_checksum(prepared.test)) != recorded)
        throw DataError("re-prepared test split does not match the manifest checksum");

    NormStats stats;
    stats.mean = manifest.at("normalization").at("mean").get<std::vector<Vec>>();
    stats.stddev = manifest.at("normalization").at("stddev").get<std::vector<Vec>>();
    MultiViewDataset te = prepared.test;
    apply_normalization(te, stats);

    RegionPartition partition;
    partition.head =
        manifest.at("region_partition").at("head").get<std::vector<std::size_t>>();
    partition.medium =
        manifest.at("region_partition").at("medium").get<std::vector<std::size_t>>();
    partition.tail =
        manifest.at("region_partition").at("tail").get<std::vector<std::size_t>>();

    PriorVector prior = PriorVector::checked(manifest.at("final_prior").get<Vec>());

    std::size_t num_views = manifest.at("data").at("num_views").get<std::size_t>();
    std::vector<EvidentialNet> nets;
    for (std::size_t v = 0; v < num_views; ++v)
        nets.push_back(
            EvidentialNet::load(run_dir / ("view_" + std::to_string(v) + ".ckpt")));

    return evaluate(nets, te, prior, partition, cfg.pin_base_rates);
}

std::vector<AblationRow> ablation_matrix(const MultiViewDataset& full,
                                         const TrainConfig& base, std::size_t num_seeds,
                                         const std::filesystem::path* out_dir) {
    if (num_seeds == 0)
        throw ConfigError("ablation needs at least one seed");

    struct RowSpec {
        const char* name;
        bool prior, fairness, consistency;
    };
    const RowSpec specs[] = {
        {"baseline", false, false, false},
        {"prior", true, false, false},
        {"prior+fairness", true, true, false},
        {"prior+consistency", true, false, true},
        {"full", true, true, true},
    };

    std::vector<AblationRow> rows;
    for (const RowSpec& spec : specs) {
        AblationRow row;
        row.name = spec.name;
        row.adaptive_prior = spec.prior;
        row.fairness = spec.fairness;
        row.consistency = spec.consistency;

        Vec accs, tails, fds;
        for (std::size_t s = 0; s < num_seeds; ++s) {
            TrainConfig cfg = base;
            cfg.adaptive_prior = spec.prior;
            cfg.fairness = spec.fairness;
            cfg.consistency = spec.consistency;
            cfg.seed = mix_seed(base.seed, 0x61626c8u + s);

            PreparedData prepared = prepare_splits(full, cfg);
            std::filesystem::path run_dir;
            const std::filesystem::path* run_ptr = nullptr;
            if (out_dir) {
                run_dir = *out_dir / (std::string(spec.name) + "_seed" + std::to_string(s));
                run_ptr = &run_dir;
            }
            TrainArtifacts art = train(prepared.train, prepared.test, cfg, run_ptr);
            row.per_seed.push_back(art.report);
            accs.push_back(art.report.acc_all);
            tails.push_back(art.report.acc_tail);
            fds.push_back(art.report.fused_fairness_degree);
        }

        auto mean_of = [](const Vec& xs) {
            double m = 0.0;
            for (double x : xs)
                m += x;
            return m / static_cast<double>(xs.size());
        };
        auto std_of = [&](const Vec& xs, double m) {
            double s = 0.0;
            for (double x : xs)
                s += (x - m) * (x - m);
            return std::sqrt(s / static_cast<double>(xs.size()));
        };
        row.mean_acc_all = mean_of(accs);
        row.std_acc_all = std_of(accs, row.mean_acc_all);
        row.mean_acc_tail = mean_of(tails);
        row.std_acc_tail = std_of(tails, row.mean_acc_tail);
        row.mean_fused_fd = mean_of(fds);
        rows.push_back(std::move(row));
    }

    if (out_dir)
        write_ablation_csv(*out_dir / "ablation.csv", rows);
    return rows;
}

void write_ablation_csv(const std::filesystem::path& path,
                        const std::vector<AblationRow>& rows) {
    std::ofstream out(path);
    if (!out)
        throw DataError("cannot write ablation table: " + path.string());
    out << "name,adaptive_prior,fairness,consistency,"
           "mean_acc_all,std_acc_all,mean_acc_tail,std_acc_tail,mean_fused_fd\n";
    for (const AblationRow& r : rows)
        out << r.name << ',' << r.adaptive_prior << ',' << r.fairness << ','
            << r.consistency << ',' << fmt17(r.mean_acc_all) << ','
            << fmt17(r.std_acc_all) << ',' << fmt17(r.mean_acc_tail) << ','
            << fmt17(r.std_acc_tail) << ',' << fmt17(r.mean_fused_fd) << '\n';
}

} // namespace faml
