#include "faml/evidential_net.hpp"

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>

#include "faml/errors.hpp"
#include "faml/kernels.hpp"
#include "faml/rng.hpp"

namespace faml {

EvidenceActivation activation_from_string(const std::string& name) {
    if (name == "softplus")
        return EvidenceActivation::Softplus;
    if (name == "exp")
        return EvidenceActivation::Exp;
    if (name == "relu")
        return EvidenceActivation::Relu;
    throw ConfigError("unknown evidence activation: " + name);
}

std::string to_string(EvidenceActivation a) {
    switch (a) {
    case EvidenceActivation::Softplus: return "softplus";
    case EvidenceActivation::Exp: return "exp";
    case EvidenceActivation::Relu: return "relu";
    }
    throw ConfigError("bad activation enum");
}

namespace {

double softplus(double z) {
    // For large z, log1p(exp(z)) overflows before the identity does.
    if (z > 30.0)
        return z;
    if (z < -30.0)
        return std::exp(z);
    return std::log1p(std::exp(z));
}

double sigmoid(double z) {
    if (z >= 0.0)
        return 1.0 / (1.0 + std::exp(-z));
    double e = std::exp(z);
    return e / (1.0 + e);
}

double head_value(EvidenceActivation a, double z) {
    switch (a) {
    case EvidenceActivation::Softplus: return softplus(z);
    case EvidenceActivation::Exp: return std::exp(std::min(z, 30.0));
    case EvidenceActivation::Relu: return z > 0.0 ? z : 0.0;
    }
    return 0.0;
}

double head_derivative(EvidenceActivation a, double z) {
    switch (a) {
    case EvidenceActivation::Softplus: return sigmoid(z);
    case EvidenceActivation::Exp: return z < 30.0 ? std::exp(z) : 0.0;
    case EvidenceActivation::Relu: return z > 0.0 ? 1.0 : 0.0;
    }
    return 0.0;
}

} // namespace

EvidentialNet EvidentialNet::init(const NetConfig& cfg) {
    if (cfg.input_dim == 0)
        throw ConfigError("net input_dim must be positive");
    if (cfg.num_classes < 2)
        throw ConfigError("net needs at least two classes");

    EvidentialNet net;
    net.cfg_ = cfg;

    std::vector<std::size_t> dims;
    dims.push_back(cfg.input_dim);
    for (std::size_t h : cfg.hidden_dims) {
        if (h == 0)
            throw ConfigError("hidden layer width must be positive");
        dims.push_back(h);
    }
    dims.push_back(cfg.num_classes);

    std::size_t offset = 0;
    for (std::size_t l = 0; l + 1 < dims.size(); ++l) {
        Layer layer;
        layer.in = dims[l];
        layer.out = dims[l + 1];
        layer.w_offset = offset;
        offset += layer.in * layer.out;
        layer.b_offset = offset;
        offset += layer.out;
        net.layers_.push_back(layer);
    }

    net.params_.assign(offset, 0.0);
    for (std::size_t l = 0; l < net.layers_.size(); ++l) {
        const Layer& layer = net.layers_[l];
        Rng rng(mix_seed(cfg.seed, 0x6e657400u + static_cast<std::uint64_t>(l)));
        double bound = 1.0 / std::sqrt(static_cast<double>(layer.in));
        for (std::size_t i = 0; i < layer.in * layer.out; ++i)
            net.params_[layer.w_offset + i] = rng.uniform(-bound, bound);
        // biases stay zero
    }
    return net;
}

void EvidentialNet::run_forward(const Vec& x, Cache& cache) const {
    if (x.size() != cfg_.input_dim)
        throw DimensionError("net input has wrong dimension");

    const kernels::Ops& ops = kernels::active();
    cache.input = x;
    cache.pre.resize(layers_.size());
    cache.post.resize(layers_.size());

    const Vec* current = &cache.input;
    for (std::size_t l = 0; l < layers_.size(); ++l) {
        const Layer& layer = layers_[l];
        Vec& z = cache.pre[l];
        z.assign(layer.out, 0.0);
        ops.matvec(params_.data() + layer.w_offset, current->data(), z.data(),
                   layer.out, layer.in);
        ops.axpy(1.0, params_.data() + layer.b_offset, z.data(), layer.out);

        Vec& a = cache.post[l];
        a.resize(layer.out);
        if (l + 1 < layers_.size()) {
            ops.relu(z.data(), a.data(), layer.out);
        } else {
            for (std::size_t k = 0; k < layer.out; ++k)
                a[k] = head_value(cfg_.activation, z[k]);
        }
        current = &a;
    }
}

EvidenceVector EvidentialNet::forward(const Vec& x) {
    Cache cache;
    run_forward(x, cache);
    EvidenceVector out{cache.post.back()};
    cache_ = std::move(cache);
    return out;
}

EvidenceVector EvidentialNet::infer(const Vec& x) const {
    Cache cache;
    run_forward(x, cache);
    return EvidenceVector{std::move(cache.post.back())};
}

void EvidentialNet::backward(const Vec& evidence_grad, Vec& grad_buffer) const {
    if (!cache_)
        throw StateError("backward called without a cached forward pass");
    if (evidence_grad.size() != cfg_.num_classes)
        throw DimensionError("evidence gradient has wrong dimension");
    if (grad_buffer.size() != params_.size())
        throw DimensionError("gradient buffer does not match parameter count");

    const kernels::Ops& ops = kernels::active();
    const Cache& cache = *cache_;

    std::size_t last = layers_.size() - 1;
    Vec dz(layers_[last].out);
    for (std::size_t k = 0; k < dz.size(); ++k)
        dz[k] = evidence_grad[k] * head_derivative(cfg_.activation, cache.pre[last][k]);

    for (std::size_t li = layers_.size(); li-- > 0;) {
        const Layer& layer = layers_[li];
        const Vec& inputs = li == 0 ? cache.input : cache.post[li - 1];

        ops.outer_acc(grad_buffer.data() + layer.w_offset, dz.data(), inputs.data(),
                      layer.out, layer.in);
        ops.axpy(1.0, dz.data(), grad_buffer.data() + layer.b_offset, layer.out);

        if (li == 0)
            break;
        Vec da(layer.in, 0.0);
        ops.matvec_t(params_.data() + layer.w_offset, dz.data(), da.data(),
                     layer.out, layer.in);
        Vec next_dz(layer.in);
        ops.relu_backward(cache.pre[li - 1].data(), da.data(), next_dz.data(), layer.in);
        dz = std::move(next_dz);
    }
}

void EvidentialNet::save(const std::filesystem::path& path) const {
    std::ofstream out(path);
    if (!out)
        throw DataError("cannot open checkpoint for writing: " + path.string());
    out << "faml-net 1\n";
    out << "activation " << to_string(cfg_.activation) << "\n";
    out << "input_dim " << cfg_.input_dim << "\n";
    out << "hidden";
    for (std::size_t h : cfg_.hidden_dims)
        out << ' ' << h;
    out << "\n";
    out << "num_classes " << cfg_.num_classes << "\n";
    out << "seed " << cfg_.seed << "\n";
    out << "params " << params_.size() << "\n";
    char buf[48];
    for (double p : params_) {
        std::snprintf(buf, sizeof(buf), "%a", p); // hex floats round-trip exactly
        out << buf << '\n';
    }
    if (!out)
        throw DataError("write failed for checkpoint: " + path.string());
}

EvidentialNet EvidentialNet::load(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in)
        throw DataError("cannot open checkpoint: " + path.string());

    std::string line;
    if (!std::getline(in, line) || line != "faml-net 1")
        throw DataError("bad checkpoint header in " + path.string());

    NetConfig cfg;
    std::size_t count = 0;
    auto expect_key = [&](const std::string& key) -> std::istringstream {
        if (!std::getline(in, line))
            throw DataError("truncated checkpoint: " + path.string());
        std::istringstream ss(line);
        std::string got;
        ss >> got;
        if (got != key)
            throw DataError("expected '" + key + "' in checkpoint, got '" + got + "'");
        return ss;
    };

    {
        auto ss = expect_key("activation");
        std::string name;
        ss >> name;
        cfg.activation = activation_from_string(name);
    }
    {
        auto ss = expect_key("input_dim");
        ss >> cfg.input_dim;
    }
    {
        auto ss = expect_key("hidden");
        std::size_t h;
        while (ss >> h)
            cfg.hidden_dims.push_back(h);
    }
    {
        auto ss = expect_key("num_classes");
        ss >> cfg.num_classes;
    }
    {
        auto ss = expect_key("seed");
        ss >> cfg.seed;
    }
    {
        auto ss = expect_key("params");
        ss >> count;
    }

    EvidentialNet net = init(cfg);
    if (net.params_.size() != count)
        throw DataError("checkpoint parameter count does not match architecture");
    for (std::size_t i = 0; i < count; ++i) {
        if (!std::getline(in, line))
            throw DataError("checkpoint ends early at parameter " + std::to_string(i));
        char* end = nullptr;
        net.params_[i] = std::strtod(line.c_str(), &end);
        if (end == line.c_str())
            throw DataError("unparseable parameter in checkpoint: " + line);
    }
    return net;
}

AdamState::AdamState(std::size_t num_params, AdamConfig cfg)
    : cfg_(cfg), m_(num_params, 0.0), v_(num_params, 0.0) {}

void AdamState::step(Vec& params, const Vec& grads) {
    if (params.size() != m_.size() || grads.size() != m_.size())
        throw DimensionError("optimizer state does not match parameter count");
    ++step_;
    double c1 = 1.0 - std::pow(cfg_.beta1, static_cast<double>(step_));
    double c2 = 1.0 - std::pow(cfg_.beta2, static_cast<double>(step_));
    kernels::active().adam_step(params.data(), grads.data(), m_.data(), v_.data(), params.size(),
                       cfg_.learning_rate, cfg_.beta1, cfg_.beta2, cfg_.epsilon,
                       cfg_.weight_decay, c1, c2);
}

} // namespace faml
