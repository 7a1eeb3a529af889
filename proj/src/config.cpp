#include "faml/config.hpp"

#include <cctype>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <functional>
#include <sstream>

#include "faml/errors.hpp"
#include "faml/evidential_net.hpp"

namespace faml {

void TrainConfig::validate() const {
    if (epochs < 1)
        throw ConfigError("epochs must be >= 1");
    if (batch_size == 0)
        throw ConfigError("batch_size must be positive");
    if (!(learning_rate > 0.0))
        throw ConfigError("learning_rate must be positive");
    if (weight_decay < 0.0)
        throw ConfigError("weight_decay must be >= 0");
    if (!(gamma > 0.0) || !std::isfinite(gamma))
        throw ConfigError("gamma must be finite and positive");
    if (beta_con < 0.0)
        throw ConfigError("beta_con must be >= 0");
    if (!(test_fraction > 0.0 && test_fraction < 1.0))
        throw ConfigError("test_fraction must lie in (0, 1)");
    if (!(imbalance_ratio >= 1.0))
        throw ConfigError("imbalance_ratio must be >= 1");
    if (eval_every < 1)
        throw ConfigError("eval_every must be >= 1");
    schedule().validate();
    (void)activation_from_string(activation); // throws on unknown names
}

namespace {

std::string trim(const std::string& s) {
    std::size_t a = s.find_first_not_of(" \t\r");
    if (a == std::string::npos)
        return "";
    std::size_t b = s.find_last_not_of(" \t\r");
    return s.substr(a, b - a + 1);
}

std::string strip_comment(const std::string& line) {
    bool in_string = false;
    for (std::size_t i = 0; i < line.size(); ++i) {
        if (line[i] == '"')
            in_string = !in_string;
        else if (line[i] == '#' && !in_string)
            return line.substr(0, i);
    }
    return line;
}

bool parse_bool(const std::string& v, const std::string& key) {
    if (v == "true")
        return true;
    if (v == "false")
        return false;
    throw ConfigError("expected true/false for '" + key + "', got '" + v + "'");
}

double parse_double(const std::string& v, const std::string& key) {
    char* end = nullptr;
    double x = std::strtod(v.c_str(), &end);
    if (end == v.c_str() || *end != '\0')
        throw ConfigError("expected a number for '" + key + "', got '" + v + "'");
    return x;
}

long long parse_int(const std::string& v, const std::string& key) {
    char* end = nullptr;
    long long x = std::strtoll(v.c_str(), &end, 10);
    if (end == v.c_str() || *end != '\0')
        throw ConfigError("expected an integer for '" + key + "', got '" + v + "'");
    return x;
}

std::string parse_string(const std::string& v, const std::string& key) {
    if (v.size() < 2 || v.front() != '"' || v.back() != '"')
        throw ConfigError("expected a quoted string for '" + key + "', got '" + v + "'");
    return v.substr(1, v.size() - 2);
}

std::vector<std::size_t> parse_size_array(const std::string& v, const std::string& key) {
    if (v.size() < 2 || v.front() != '[' || v.back() != ']')
        throw ConfigError("expected an array for '" + key + "', got '" + v + "'");
    std::vector<std::size_t> out;
    std::string body = v.substr(1, v.size() - 2);
    std::stringstream ss(body);
    std::string item;
    while (std::getline(ss, item, ',')) {
        item = trim(item);
        if (item.empty())
            continue;
        long long x = parse_int(item, key);
        if (x < 0)
            throw ConfigError("array entries for '" + key + "' must be non-negative");
        out.push_back(static_cast<std::size_t>(x));
    }
    return out;
}

void assign(TrainConfig& cfg, const std::string& key, const std::string& value) {
    if (key == "data_dir")
        cfg.data_dir = parse_string(value, key);
    else if (key == "test_fraction")
        cfg.test_fraction = parse_double(value, key);
    else if (key == "imbalance_ratio")
        cfg.imbalance_ratio = parse_double(value, key);
    else if (key == "apply_imbalance")
        cfg.apply_imbalance = parse_bool(value, key);
    else if (key == "hidden_dims")
        cfg.hidden_dims = parse_size_array(value, key);
    else if (key == "activation")
        cfg.activation = parse_string(value, key);
    else if (key == "epochs")
        cfg.epochs = static_cast<int>(parse_int(value, key));
    else if (key == "batch_size")
        cfg.batch_size = static_cast<std::size_t>(parse_int(value, key));
    else if (key == "learning_rate")
        cfg.learning_rate = parse_double(value, key);
    else if (key == "weight_decay")
        cfg.weight_decay = parse_double(value, key);
    else if (key == "gamma")
        cfg.gamma = parse_double(value, key);
    else if (key == "beta_con")
        cfg.beta_con = parse_double(value, key);
    else if (key == "warmup_epochs")
        cfg.warmup_epochs = static_cast<int>(parse_int(value, key));
    else if (key == "refresh_interval")
        cfg.refresh_interval = static_cast<int>(parse_int(value, key));
    else if (key == "adaptive_prior")
        cfg.adaptive_prior = parse_bool(value, key);
    else if (key == "fairness")
        cfg.fairness = parse_bool(value, key);
    else if (key == "consistency")
        cfg.consistency = parse_bool(value, key);
    else if (key == "exact_fusion_grad")
        cfg.exact_fusion_grad = parse_bool(value, key);
    else if (key == "fresh_eval_prior")
        cfg.fresh_eval_prior = parse_bool(value, key);
    else if (key == "pin_base_rates")
        cfg.pin_base_rates = parse_bool(value, key);
    else if (key == "seed")
        cfg.seed = static_cast<std::uint64_t>(parse_int(value, key));
    else if (key == "eval_every")
        cfg.eval_every = static_cast<int>(parse_int(value, key));
    else
        throw ConfigError("unknown config key: '" + key + "'");
}

} // namespace

TrainConfig parse_config_text(const std::string& text) {
    TrainConfig cfg;
    std::istringstream in(text);
    std::string raw;
    std::size_t line_no = 0;
    while (std::getline(in, raw)) {
        ++line_no;
        std::string line = trim(strip_comment(raw));
        if (line.empty())
            continue;
        std::size_t eq = line.find('=');
        if (eq == std::string::npos)
            throw ConfigError("config line " + std::to_string(line_no) +
                              " is not a key = value pair: '" + line + "'");
        std::string key = trim(line.substr(0, eq));
        std::string value = trim(line.substr(eq + 1));
        if (key.empty() || value.empty())
            throw ConfigError("config line " + std::to_string(line_no) +
                              " has an empty key or value");
        assign(cfg, key, value);
    }
    cfg.validate();
    return cfg;
}

TrainConfig parse_config_file(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in)
        throw ConfigError("cannot open config file: " + path.string());
    std::stringstream buffer;
    buffer << in.rdbuf();
    return parse_config_text(buffer.str());
}

void apply_override(TrainConfig& cfg, const std::string& assignment) {
    std::size_t eq = assignment.find('=');
    if (eq == std::string::npos)
        throw ConfigError("override must be key=value, got '" + assignment + "'");
    std::string key = trim(assignment.substr(0, eq));
    std::string value = trim(assignment.substr(eq + 1));
    if (key.empty() || value.empty())
        throw ConfigError("override has an empty key or value: '" + assignment + "'");
    assign(cfg, key, value);
    cfg.validate();
}

std::string to_toml(const TrainConfig& cfg) {
    std::ostringstream out;
    char buf[40];
    auto num = [&buf](double x) {
        std::snprintf(buf, sizeof(buf), "%.17g", x);
        return std::string(buf);
    };
    out << "data_dir = \"" << cfg.data_dir << "\"\n";
    out << "test_fraction = " << num(cfg.test_fraction) << "\n";
    out << "imbalance_ratio = " << num(cfg.imbalance_ratio) << "\n";
    out << "apply_imbalance = " << (cfg.apply_imbalance ? "true" : "false") << "\n";
    out << "hidden_dims = [";
    for (std::size_t i = 0; i < cfg.hidden_dims.size(); ++i)
        out << (i ? ", " : "") << cfg.hidden_dims[i];
    out << "]\n";
    out << "activation = \"" << cfg.activation << "\"\n";
    out << "epochs = " << cfg.epochs << "\n";
    out << "batch_size = " << cfg.batch_size << "\n";
    out << "learning_rate = " << num(cfg.learning_rate) << "\n";
    out << "weight_decay = " << num(cfg.weight_decay) << "\n";
    out << "gamma = " << num(cfg.gamma) << "\n";
    out << "beta_con = " << num(cfg.beta_con) << "\n";
    out << "warmup_epochs = " << cfg.warmup_epochs << "\n";
    out << "refresh_interval = " << cfg.refresh_interval << "\n";
    out << "adaptive_prior = " << (cfg.adaptive_prior ? "true" : "false") << "\n";
    out << "fairness = " << (cfg.fairness ? "true" : "false") << "\n";
    out << "consistency = " << (cfg.consistency ? "true" : "false") << "\n";
    out << "exact_fusion_grad = " << (cfg.exact_fusion_grad ? "true" : "false") << "\n";
    out << "fresh_eval_prior = " << (cfg.fresh_eval_prior ? "true" : "false") << "\n";
    out << "pin_base_rates = " << (cfg.pin_base_rates ? "true" : "false") << "\n";
    out << "seed = " << cfg.seed << "\n";
    out << "eval_every = " << cfg.eval_every << "\n";
    return out.str();
}

} // namespace faml
