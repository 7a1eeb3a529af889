#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "faml/matrix.hpp"
#include "faml/sl_core.hpp"

namespace faml {

// Head nonlinearity producing non-negative evidence. Softplus is the default;
// exp and relu are kept for comparison runs.
enum class EvidenceActivation { Softplus, Exp, Relu };

EvidenceActivation activation_from_string(const std::string& name);
std::string to_string(EvidenceActivation a);

struct NetConfig {
    std::size_t input_dim = 0;
    std::vector<std::size_t> hidden_dims; // empty = linear model
    std::size_t num_classes = 0;
    std::uint64_t seed = 0;
    EvidenceActivation activation = EvidenceActivation::Softplus;
};

// Fully connected evidence network: ReLU hidden layers, non-negative head.
// Parameters live in one flat vector (per-layer weight block then bias block)
// so the optimizer can update them in a single pass.
//
// forward() caches activations for backward(); the pair must be called in
// order on one thread. infer() is const and touches no shared state.
class EvidentialNet {
public:
    static EvidentialNet init(const NetConfig& cfg);

    EvidenceVector forward(const Vec& x);
    EvidenceVector infer(const Vec& x) const;

    // Accumulates d loss / d params into grad_buffer (same layout as params)
    // given d loss / d evidence from the most recent forward().
    void backward(const Vec& evidence_grad, Vec& grad_buffer) const;

    const Vec& params() const { return params_; }
    Vec& params() { return params_; }
    std::size_t num_params() const { return params_.size(); }
    const NetConfig& config() const { return cfg_; }

    void save(const std::filesystem::path& path) const;
    static EvidentialNet load(const std::filesystem::path& path);

private:
    struct Layer {
        std::size_t in = 0;
        std::size_t out = 0;
        std::size_t w_offset = 0; // weights: out x in, row-major
        std::size_t b_offset = 0;
    };

    struct Cache {
        Vec input;
        std::vector<Vec> pre;  // z per layer
        std::vector<Vec> post; // activation per layer (post.back() = evidence)
    };

    EvidentialNet() = default;
    void run_forward(const Vec& x, Cache& cache) const;

    NetConfig cfg_;
    std::vector<Layer> layers_;
    Vec params_;
    mutable std::optional<Cache> cache_;
};

struct AdamConfig {
    double learning_rate = 1e-3;
    double weight_decay = 1e-5; // classic L2, added to the gradient
    double beta1 = 0.9;
    double beta2 = 0.999;
    double epsilon = 1e-8;
};

class AdamState {
public:
    AdamState(std::size_t num_params, AdamConfig cfg);

    void step(Vec& params, const Vec& grads);
    std::int64_t step_count() const { return step_; }
    const AdamConfig& config() const { return cfg_; }

private:
    AdamConfig cfg_;
    Vec m_, v_;
    std::int64_t step_ = 0;
};

} // namespace faml
