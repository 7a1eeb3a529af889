#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "faml/config.hpp"
#include "faml/data.hpp"
#include "faml/errors.hpp"
#include "faml/rng.hpp"
#include "faml/trainer.hpp"

namespace {

namespace fs = std::filesystem;

// Exit codes: 0 ok, 2 bad config/flags, 3 data problem, 4 numeric abort,
// 1 anything else. Mirrored in the README.
constexpr int kOk = 0;
constexpr int kOtherError = 1;
constexpr int kConfigError = 2;
constexpr int kDataError = 3;
constexpr int kNumericError = 4;

fs::path default_out(const std::string& leaf) {
    const char* root = std::getenv("FAML_OUT_ROOT");
    return fs::path(root ? root : "runs") / leaf;
}

faml::TrainConfig resolve_config(const std::string& config_path,
                                 const std::vector<std::string>& overrides,
                                 const std::string& data_dir) {
    faml::TrainConfig cfg;
    if (!config_path.empty())
        cfg = faml::parse_config_file(config_path);
    for (const std::string& assignment : overrides)
        faml::apply_override(cfg, assignment);
    if (!data_dir.empty())
        cfg.data_dir = data_dir;
    if (cfg.data_dir.empty())
        throw faml::ConfigError("no dataset directory: pass --data or set data_dir");
    return cfg;
}

void log_overrides(const fs::path& run_dir, const std::vector<std::string>& overrides) {
    fs::path manifest_path = run_dir / "manifest.json";
    std::ifstream in(manifest_path);
    if (!in)
        return;
    nlohmann::ordered_json manifest = nlohmann::ordered_json::parse(in);
    in.close();
    manifest["overrides"] = overrides;
    std::ofstream out(manifest_path);
    out << manifest.dump(2) << "\n";
}

int cmd_synth(const faml::SynthSpec& spec, const fs::path& out_dir) {
    faml::MultiViewDataset ds = faml::synth_generate(spec);
    faml::save_multiview(ds, out_dir);

    nlohmann::ordered_json manifest;
    manifest["kind"] = "synth";
    manifest["num_classes"] = spec.num_classes;
    manifest["num_views"] = spec.num_views;
    manifest["dims"] = spec.dims;
    manifest["samples_per_class"] = spec.samples_per_class;
    manifest["separation"] = spec.separation;
    manifest["seed"] = spec.seed;
    std::ofstream out(out_dir / "manifest.json");
    out << manifest.dump(2) << "\n";

    std::cout << "wrote " << ds.size() << " samples, " << ds.num_views() << " views to "
              << out_dir.string() << "\n";
    return kOk;
}

int cmd_train(const faml::TrainConfig& cfg, const fs::path& out_dir,
              const std::vector<std::string>& overrides) {
    faml::MultiViewDataset full = faml::load_multiview(cfg.data_dir);
    faml::PreparedData prepared = faml::prepare_splits(full, cfg);
    faml::TrainArtifacts art = faml::train(prepared.train, prepared.test, cfg, &out_dir);
    log_overrides(out_dir, overrides);
    std::cout << art.report.to_json();
    std::cerr << "run artifacts in " << out_dir.string() << " (kernels: "
              << art.kernel_backend << ")\n";
    return kOk;
}

int cmd_eval(const fs::path& run_dir, const std::string& data_dir) {
    std::string source = data_dir;
    if (source.empty()) {
        faml::TrainConfig cfg = faml::parse_config_file(run_dir / "config.toml");
        source = cfg.data_dir;
    }
    if (source.empty())
        throw faml::ConfigError("run config has no data_dir; pass --data");
    faml::MultiViewDataset full = faml::load_multiview(source);
    faml::EvalReport report = faml::evaluate_run_dir(run_dir, full);
    std::cout << report.to_json();
    return kOk;
}

int cmd_sweep_gamma(const faml::TrainConfig& base, const std::vector<double>& values,
                    std::size_t num_seeds, const fs::path& out_dir) {
    if (values.empty())
        throw faml::ConfigError("sweep-gamma needs at least one value");
    faml::MultiViewDataset full = faml::load_multiview(base.data_dir);
    fs::create_directories(out_dir);
    std::ofstream csv(out_dir / "gamma_sweep.csv");
    if (!csv)
        throw faml::DataError("cannot write gamma_sweep.csv in " + out_dir.string());
    csv << "gamma,seed,acc_all,acc_head,acc_med,acc_tail,ece_all\n";

    for (double gamma : values) {
        for (std::size_t s = 0; s < num_seeds; ++s) {
            faml::TrainConfig cfg = base;
            cfg.gamma = gamma;
            cfg.seed = faml::mix_seed(base.seed, 0x67616d00u + s);
            cfg.validate();
            faml::PreparedData prepared = faml::prepare_splits(full, cfg);
            faml::TrainArtifacts art = faml::train(prepared.train, prepared.test, cfg);
            const faml::EvalReport& r = art.report;
            csv << gamma << ',' << s << ',' << r.acc_all << ',' << r.acc_head << ','
                << r.acc_med << ',' << r.acc_tail << ',' << r.ece_all << '\n';
            std::cerr << "gamma " << gamma << " seed " << s << ": acc " << r.acc_all
                      << "\n";
        }
    }
    std::cout << "sweep written to " << (out_dir / "gamma_sweep.csv").string() << "\n";
    return kOk;
}

int cmd_ablate(const faml::TrainConfig& base, std::size_t num_seeds,
               const fs::path& out_dir) {
    faml::MultiViewDataset full = faml::load_multiview(base.data_dir);
    fs::create_directories(out_dir);
    auto rows = faml::ablation_matrix(full, base, num_seeds, &out_dir);
    for (const faml::AblationRow& r : rows)
        std::cout << r.name << ": acc " << 100.0 * r.mean_acc_all << " +- "
                  << 100.0 * r.std_acc_all << ", tail " << 100.0 * r.mean_acc_tail
                  << " +- " << 100.0 * r.std_acc_tail << ", fd " << r.mean_fused_fd
                  << "\n";
    return kOk;
}

int cmd_report(const fs::path& run_dir) {
    std::ifstream rep(run_dir / "report.json");
    if (!rep)
        throw faml::DataError("missing report.json in " + run_dir.string());
    std::cout << rep.rdbuf();

    std::ifstream hist(run_dir / "history.csv");
    if (!hist)
        throw faml::DataError("missing history.csv in " + run_dir.string());
    std::string line, last;
    std::getline(hist, line); // header
    while (std::getline(hist, line))
        if (!line.empty())
            last = line;
    if (!last.empty())
        std::cerr << "final epoch: " << last << "\n";
    return kOk;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Fairness-aware multi-view evidential training"};
    app.require_subcommand(1);

    // synth
    auto* synth = app.add_subcommand("synth", "generate a synthetic multi-view dataset");
    faml::SynthSpec spec;
    spec.dims = {8, 8};
    std::string synth_out;
    synth->add_option("--k", spec.num_classes, "number of classes")->capture_default_str();
    synth->add_option("--views", spec.num_views, "number of views")->capture_default_str();
    synth->add_option("--dims", spec.dims, "per-view feature widths")
        ->delimiter(',')
        ->capture_default_str();
    synth->add_option("--samples-per-class", spec.samples_per_class, "rows per class")
        ->capture_default_str();
    synth->add_option("--separation", spec.separation, "cluster mean distance from origin")
        ->capture_default_str();
    synth->add_option("--seed", spec.seed, "generator seed")->capture_default_str();
    synth->add_option("-o,--out", synth_out, "output directory");

    // shared train-ish options
    std::string config_path, data_dir, run_out;
    std::vector<std::string> overrides;
    auto add_common = [&](CLI::App* cmd) {
        cmd->add_option("-c,--config", config_path, "config file (flat TOML)");
        cmd->add_option("--data", data_dir, "dataset directory");
        cmd->add_option("--set", overrides, "config override key=value")->take_all();
        cmd->add_option("-o,--out", run_out, "output directory");
    };

    auto* train_cmd = app.add_subcommand("train", "train on a dataset directory");
    add_common(train_cmd);

    auto* eval_cmd = app.add_subcommand("eval", "evaluate a finished run directory");
    std::string eval_run, eval_data;
    eval_cmd->add_option("--run", eval_run, "run directory")->required();
    eval_cmd->add_option("--data", eval_data, "dataset directory override");

    auto* sweep = app.add_subcommand("sweep-gamma", "accuracy across prior strengths");
    add_common(sweep);
    std::vector<double> gamma_values = {0.1, 0.5, 1.0, 5.0, 10.0};
    std::size_t sweep_seeds = 5;
    sweep->add_option("--values", gamma_values, "gamma grid")
        ->delimiter(',')
        ->capture_default_str();
    sweep->add_option("--seeds", sweep_seeds, "seeds per value")->capture_default_str();

    auto* ablate = app.add_subcommand("ablate", "run the component on/off matrix");
    add_common(ablate);
    std::size_t ablate_seeds = 5;
    ablate->add_option("--seeds", ablate_seeds, "seeds per row")->capture_default_str();

    auto* report = app.add_subcommand("report", "print a finished run's report");
    std::string report_run;
    report->add_option("--run", report_run, "run directory")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return kConfigError;
    }

    try {
        if (synth->parsed())
            return cmd_synth(spec, synth_out.empty() ? default_out("synth") : fs::path(synth_out));
        if (train_cmd->parsed())
            return cmd_train(resolve_config(config_path, overrides, data_dir),
                             run_out.empty() ? default_out("train") : fs::path(run_out),
                             overrides);
        if (eval_cmd->parsed())
            return cmd_eval(eval_run, eval_data);
        if (sweep->parsed())
            return cmd_sweep_gamma(resolve_config(config_path, overrides, data_dir),
                                   gamma_values, sweep_seeds,
                                   run_out.empty() ? default_out("sweep") : fs::path(run_out));
        if (ablate->parsed())
            return cmd_ablate(resolve_config(config_path, overrides, data_dir),
                              ablate_seeds,
                              run_out.empty() ? default_out("ablate") : fs::path(run_out));
        if (report->parsed())
            return cmd_report(report_run);
        std::cerr << "no subcommand\n";
        return kConfigError;
    } catch (const faml::ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return kConfigError;
    } catch (const faml::DataError& e) {
        std::cerr << "data error: " << e.what() << "\n";
        return kDataError;
    } catch (const faml::NumericError& e) {
        std::cerr << "numeric abort: " << e.what() << "\n";
        return kNumericError;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kOtherError;
    }
}
