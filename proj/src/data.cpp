#include "faml/data.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <cstring>
#include <fstream>
#include <iostream>
#include <numeric>
#include <sstream>

#include "faml/errors.hpp"
#include "faml/rng.hpp"

namespace faml {

std::vector<std::size_t> MultiViewDataset::class_counts() const {
    std::vector<std::size_t> counts(num_classes, 0);
    for (std::size_t y : labels) {
        if (y >= num_classes)
            throw DataError("label out of range for declared class count");
        ++counts[y];
    }
    return counts;
}

void MultiViewDataset::validate() const {
    if (views.empty())
        throw DataError("dataset has no views");
    for (std::size_t v = 0; v < views.size(); ++v)
        if (views[v].rows != labels.size())
            throw DataError("view " + std::to_string(v) + " has " +
                            std::to_string(views[v].rows) + " rows but there are " +
                            std::to_string(labels.size()) + " labels");
    if (!source_indices.empty() && source_indices.size() != labels.size())
        throw DataError("source index list does not match sample count");
    (void)class_counts();
}

int RegionPartition::region_of(std::size_t cls) const {
    auto has = [cls](const std::vector<std::size_t>& set) {
        return std::find(set.begin(), set.end(), cls) != set.end();
    };
    if (has(head))
        return 0;
    if (has(medium))
        return 1;
    if (has(tail))
        return 2;
    throw DataError("class " + std::to_string(cls) + " missing from region partition");
}

std::uint64_t dataset_checksum(const MultiViewDataset& ds) {
    // FNV-1a over label values and the bit patterns of every feature.
    std::uint64_t h = 1469598103934665603ull;
    auto mix = [&h](std::uint64_t x) {
        for (int i = 0; i < 8; ++i) {
            h ^= (x >> (8 * i)) & 0xffu;
            h *= 1099511628211ull;
        }
    };
    for (std::size_t y : ds.labels)
        mix(static_cast<std::uint64_t>(y));
    for (const Matrix& view : ds.views)
        for (double x : view.data) {
            std::uint64_t bits;
            std::memcpy(&bits, &x, sizeof bits);
            mix(bits);
        }
    return h;
}

namespace {

Matrix read_csv_matrix(const std::filesystem::path& file) {
    std::ifstream in(file);
    if (!in)
        throw DataError("missing view file: " + file.string());

    Matrix m;
    std::string line;
    std::size_t row = 0;
    while (std::getline(in, line)) {
        if (line.empty())
            continue;
        std::vector<double> values;
        const char* p = line.c_str();
        std::size_t col = 0;
        while (true) {
            char* end = nullptr;
            double x = std::strtod(p, &end);
            if (end == p)
                throw DataError("non-numeric cell in " + file.string() + " at row " +
                                std::to_string(row) + ", column " + std::to_string(col));
            values.push_back(x);
            ++col;
            while (*end == ' ' || *end == '\t')
                ++end;
            if (*end == '\0' || *end == '\r')
                break;
            if (*end != ',')
                throw DataError("non-numeric cell in " + file.string() + " at row " +
                                std::to_string(row) + ", column " + std::to_string(col));
            p = end + 1;
        }
        if (m.cols == 0)
            m.cols = values.size();
        else if (values.size() != m.cols)
            throw DataError("ragged row " + std::to_string(row) + " in " + file.string() +
                            ": expected " + std::to_string(m.cols) + " columns, got " +
                            std::to_string(values.size()));
        m.data.insert(m.data.end(), values.begin(), values.end());
        ++row;
    }
    m.rows = row;
    return m;
}

} // namespace

MultiViewDataset load_multiview(const std::filesystem::path& dir) {
    MultiViewDataset ds;
    for (std::size_t v = 0;; ++v) {
        std::filesystem::path file = dir / ("view_" + std::to_string(v) + ".csv");
        if (!std::filesystem::exists(file)) {
            if (v == 0)
                throw DataError("missing view file: " + file.string());
            break;
        }
        ds.views.push_back(read_csv_matrix(file));
    }

    std::filesystem::path label_file = dir / "labels.csv";
    std::ifstream in(label_file);
    if (!in)
        throw DataError("missing label file: " + label_file.string());
    std::string line;
    std::size_t row = 0;
    while (std::getline(in, line)) {
        if (line.empty())
            continue;
        char* end = nullptr;
        long y = std::strtol(line.c_str(), &end, 10);
        if (end == line.c_str() || y < 0)
            throw DataError("bad label at line " + std::to_string(row) + " in " +
                            label_file.string());
        ds.labels.push_back(static_cast<std::size_t>(y));
        ++row;
    }
    if (ds.labels.empty())
        throw DataError("label file is empty: " + label_file.string());

    for (std::size_t v = 0; v < ds.views.size(); ++v)
        if (ds.views[v].rows != ds.labels.size())
            throw DataError("row count mismatch: view_" + std::to_string(v) + ".csv has " +
                            std::to_string(ds.views[v].rows) + " rows, labels.csv has " +
                            std::to_string(ds.labels.size()));

    ds.num_classes = *std::max_element(ds.labels.begin(), ds.labels.end()) + 1;
    ds.source_indices.resize(ds.labels.size());
    std::iota(ds.source_indices.begin(), ds.source_indices.end(), 0);
    ds.validate();
    return ds;
}

void save_multiview(const MultiViewDataset& ds, const std::filesystem::path& dir) {
    ds.validate();
    std::filesystem::create_directories(dir);
    char buf[40];
    for (std::size_t v = 0; v < ds.views.size(); ++v) {
        std::ofstream out(dir / ("view_" + std::to_string(v) + ".csv"));
        if (!out)
            throw DataError("cannot write view file in " + dir.string());
        const Matrix& m = ds.views[v];
        for (std::size_t r = 0; r < m.rows; ++r) {
            for (std::size_t c = 0; c < m.cols; ++c) {
                std::snprintf(buf, sizeof(buf), "%.17g", m.at(r, c));
                out << (c ? "," : "") << buf;
            }
            out << '\n';
        }
    }
    std::ofstream out(dir / "labels.csv");
    if (!out)
        throw DataError("cannot write label file in " + dir.string());
    for (std::size_t y : ds.labels)
        out << y << '\n';
}

NormStats fit_normalization(const MultiViewDataset& train) {
    train.validate();
    if (train.size() == 0)
        throw DataError("cannot fit normalization on an empty dataset");

    NormStats stats;
    stats.mean.resize(train.num_views());
    stats.stddev.resize(train.num_views());
    double inv_n = 1.0 / static_cast<double>(train.size());
    for (std::size_t v = 0; v < train.num_views(); ++v) {
        const Matrix& m = train.views[v];
        Vec& mu = stats.mean[v];
        Vec& sd = stats.stddev[v];
        mu.assign(m.cols, 0.0);
        sd.assign(m.cols, 0.0);
        for (std::size_t r = 0; r < m.rows; ++r)
            for (std::size_t c = 0; c < m.cols; ++c)
                mu[c] += m.at(r, c);
        for (double& x : mu)
            x *= inv_n;
        for (std::size_t r = 0; r < m.rows; ++r)
            for (std::size_t c = 0; c < m.cols; ++c) {
                double d = m.at(r, c) - mu[c];
                sd[c] += d * d;
            }
        for (double& x : sd) {
            x = std::sqrt(x * inv_n);
            if (x < 1e-12)
                x = 1.0; // constant column: leave it centered, not exploded
        }
    }
    stats.source_checksum = dataset_checksum(train);
    return stats;
}

void apply_normalization(MultiViewDataset& ds, const NormStats& stats) {
    if (stats.mean.size() != ds.num_views())
        throw DimensionError("normalization stats cover a different view count");
    for (std::size_t v = 0; v < ds.num_views(); ++v) {
        Matrix& m = ds.views[v];
        if (stats.mean[v].size() != m.cols)
            throw DimensionError("normalization stats for view " + std::to_string(v) +
                                 " have wrong width");
        for (std::size_t r = 0; r < m.rows; ++r)
            for (std::size_t c = 0; c < m.cols; ++c)
                m.at(r, c) = (m.at(r, c) - stats.mean[v][c]) / stats.stddev[v][c];
    }
}

namespace {

MultiViewDataset take_rows(const MultiViewDataset& ds, const std::vector<std::size_t>& rows) {
    MultiViewDataset out;
    out.num_classes = ds.num_classes;
    out.views.reserve(ds.num_views());
    for (const Matrix& m : ds.views) {
        Matrix sub;
        sub.rows = rows.size();
        sub.cols = m.cols;
        sub.data.reserve(rows.size() * m.cols);
        for (std::size_t r : rows)
            sub.data.insert(sub.data.end(), m.row(r), m.row(r) + m.cols);
        out.views.push_back(std::move(sub));
    }
    out.labels.reserve(rows.size());
    out.source_indices.reserve(rows.size());
    bool have_sources = !ds.source_indices.empty();
    for (std::size_t r : rows) {
        out.labels.push_back(ds.labels[r]);
        out.source_indices.push_back(have_sources ? ds.source_indices[r] : r);
    }
    return out;
}

std::vector<std::vector<std::size_t>> rows_by_class(const MultiViewDataset& ds) {
    std::vector<std::vector<std::size_t>> by_class(ds.num_classes);
    for (std::size_t n = 0; n < ds.size(); ++n)
        by_class[ds.labels[n]].push_back(n);
    return by_class;
}

} // namespace

std::pair<MultiViewDataset, MultiViewDataset>
stratified_split(const MultiViewDataset& ds, double test_fraction, std::uint64_t seed) {
    ds.validate();
    if (!(test_fraction >= 0.0 && test_fraction < 1.0))
        throw ConfigError("test_fraction must lie in [0, 1)");

    auto by_class = rows_by_class(ds);
    std::vector<bool> is_test(ds.size(), false);
    for (std::size_t c = 0; c < by_class.size(); ++c) {
        auto& rows = by_class[c];
        if (rows.size() < 2)
            throw DataError("class " + std::to_string(c) +
                            " has fewer than 2 samples; cannot split");
        Rng rng(mix_seed(seed, 0x73706c6974u + c));
        rng.shuffle(rows);
        std::size_t want =
            static_cast<std::size_t>(std::llround(test_fraction * static_cast<double>(rows.size())));
        if (test_fraction > 0.0 && want == 0)
            want = 1;
        if (want >= rows.size())
            want = rows.size() - 1;
        for (std::size_t i = 0; i < want; ++i)
            is_test[rows[i]] = true;
    }

    std::vector<std::size_t> train_rows, test_rows;
    for (std::size_t n = 0; n < ds.size(); ++n)
        (is_test[n] ? test_rows : train_rows).push_back(n);
    return {take_rows(ds, train_rows), take_rows(ds, test_rows)};
}

MultiViewDataset pareto_subsample(const MultiViewDataset& train, double rho,
                                  std::uint64_t seed) {
    train.validate();
    if (!(rho >= 1.0))
        throw ConfigError("imbalance ratio must be >= 1");

    auto by_class = rows_by_class(train);
    std::size_t k = by_class.size();
    std::size_t n_max = 0;
    for (const auto& rows : by_class)
        n_max = std::max(n_max, rows.size());

    std::vector<std::size_t> rank(k);
    std::iota(rank.begin(), rank.end(), 0);
    Rng rank_rng(mix_seed(seed, 0x706172u));
    rank_rng.shuffle(rank); // rank[r] = class holding rank r

    std::vector<std::size_t> keep_rows;
    for (std::size_t r = 0; r < k; ++r) {
        std::size_t cls = rank[r];
        double expo = k > 1 ? -static_cast<double>(r) / static_cast<double>(k - 1) : 0.0;
        auto target = static_cast<std::size_t>(
            std::llround(static_cast<double>(n_max) * std::pow(rho, expo)));
        if (target < 1)
            target = 1;
        auto& rows = by_class[cls];
        if (target > rows.size()) {
            std::cerr << "pareto_subsample: class " << cls << " has only " << rows.size()
                      << " samples, clipping target " << target << "\n";
            target = rows.size();
        }
        Rng rng(mix_seed(seed, 0x70636c73u + cls));
        rng.shuffle(rows);
        keep_rows.insert(keep_rows.end(), rows.begin(), rows.begin() + target);
    }
    std::sort(keep_rows.begin(), keep_rows.end());
    return take_rows(train, keep_rows);
}

RegionPartition region_partition(const std::vector<std::size_t>& class_counts) {
    std::size_t k = class_counts.size();
    if (k < 3)
        throw DataError("region partition needs at least 3 classes, got " +
                        std::to_string(k));

    std::vector<std::size_t> order(k);
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        if (class_counts[a] != class_counts[b])
            return class_counts[a] > class_counts[b];
        return a < b;
    });

    std::size_t head_n = (k + 2) / 3;
    std::size_t med_n = (k - head_n + 1) / 2;

    RegionPartition part;
    for (std::size_t i = 0; i < k; ++i) {
        if (i < head_n)
            part.head.push_back(order[i]);
        else if (i < head_n + med_n)
            part.medium.push_back(order[i]);
        else
            part.tail.push_back(order[i]);
    }
    return part;
}

MultiViewDataset synth_generate(const SynthSpec& spec) {
    if (spec.num_classes < 2 || spec.num_views == 0 || spec.samples_per_class == 0)
        throw ConfigError("synth spec needs >= 2 classes, >= 1 view, >= 1 sample per class");
    if (spec.dims.size() != spec.num_views)
        throw ConfigError("synth spec needs one dim per view");
    for (std::size_t d : spec.dims)
        if (d == 0)
            throw ConfigError("synth view dims must be positive");
    if (spec.separation < 0.0)
        throw ConfigError("synth separation must be >= 0");

    std::size_t n = spec.num_classes * spec.samples_per_class;
    MultiViewDataset ds;
    ds.num_classes = spec.num_classes;
    ds.labels.resize(n);
    ds.source_indices.resize(n);
    std::iota(ds.source_indices.begin(), ds.source_indices.end(), 0);
    for (std::size_t i = 0; i < n; ++i)
        ds.labels[i] = i / spec.samples_per_class;

    for (std::size_t v = 0; v < spec.num_views; ++v) {
        std::size_t d = spec.dims[v];
        Matrix m;
        m.rows = n;
        m.cols = d;
        m.data.assign(n * d, 0.0);

        for (std::size_t c = 0; c < spec.num_classes; ++c) {
            Rng mean_rng(mix_seed(spec.seed, 0x6d65616eu + v * 1000 + c));
            Vec center(d);
            double norm = 0.0;
            for (double& x : center) {
                x = mean_rng.normal();
                norm += x * x;
            }
            norm = std::sqrt(norm);
            if (norm < 1e-12)
                norm = 1.0;
            for (double& x : center)
                x = x / norm * spec.separation;

            Rng noise_rng(mix_seed(spec.seed, 0x6e6f6973u + v * 1000 + c));
            for (std::size_t s = 0; s < spec.samples_per_class; ++s) {
                std::size_t row = c * spec.samples_per_class + s;
                for (std::size_t j = 0; j < d; ++j)
                    m.at(row, j) = center[j] + noise_rng.normal();
            }
        }
        ds.views.push_back(std::move(m));
    }
    ds.validate();
    return ds;
}

} // namespace faml
