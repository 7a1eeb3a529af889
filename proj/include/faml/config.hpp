#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "faml/trajectory_prior.hpp"

namespace faml {

// Resolved training configuration. Defaults are the full method; the three
// ablation flags switch its components off independently.
struct TrainConfig {
    std::string data_dir;

    double test_fraction = 0.2;
    double imbalance_ratio = 10.0;
    bool apply_imbalance = true;

    std::vector<std::size_t> hidden_dims; // empty = one layer of max(64, d/2)
    std::string activation = "softplus";

    int epochs = 200;
    std::size_t batch_size = 64;
    double learning_rate = 1e-3;
    double weight_decay = 1e-5;

    double gamma = 1.0;
    double beta_con = 1.0;
    int warmup_epochs = 20;
    int refresh_interval = 5;

    bool adaptive_prior = true;
    bool fairness = true;
    bool consistency = true;

    bool exact_fusion_grad = false;
    bool fresh_eval_prior = false;
    bool pin_base_rates = false;

    std::uint64_t seed = 1;
    int eval_every = 10;

    PriorSchedule schedule() const {
        return PriorSchedule{warmup_epochs, refresh_interval, gamma};
    }
    void validate() const;
};

// Flat key = value file with TOML syntax for scalars, strings, booleans and
// integer arrays; '#' starts a comment. Unknown keys are rejected.
TrainConfig parse_config_text(const std::string& text);
TrainConfig parse_config_file(const std::filesystem::path& path);

// key=value override, same key set and value syntax as the file.
void apply_override(TrainConfig& cfg, const std::string& assignment);

std::string to_toml(const TrainConfig& cfg);

} // namespace faml
