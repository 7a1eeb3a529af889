#include "faml/trajectory_prior.hpp"

#include <cmath>
#include <fstream>

#include "faml/errors.hpp"

namespace faml {

void PriorSchedule::validate() const {
    if (warmup_epochs < 0)
        throw ConfigError("prior warmup_epochs must be >= 0");
    if (refresh_interval < 1)
        throw ConfigError("prior refresh_interval must be >= 1");
    if (!(gamma > 0.0) || !std::isfinite(gamma))
        throw ConfigError("prior gamma must be finite and positive");
}

PriorVector compute_prior(const TrajectoryRecord& record,
                          const std::vector<std::size_t>& labels,
                          const std::vector<std::size_t>& class_counts, double gamma) {
    if (record.predicted.size() != labels.size())
        throw DimensionError("trajectory record and labels have different lengths");
    if (!(gamma > 0.0) || !std::isfinite(gamma))
        throw ConfigError("prior gamma must be finite and positive");

    std::size_t k = class_counts.size();
    for (std::size_t count : class_counts)
        if (count == 0)
            throw DataError("every class needs at least one training sample for the prior");

    std::vector<std::size_t> correct(k, 0);
    for (std::size_t n = 0; n < labels.size(); ++n) {
        if (labels[n] >= k)
            throw DataError("label out of range in trajectory record");
        if (record.predicted[n] >= k)
            throw DataError("prediction out of range in trajectory record");
        if (record.predicted[n] == labels[n])
            ++correct[labels[n]];
    }

    Vec values(k);
    for (std::size_t c = 0; c < k; ++c) {
        std::size_t denom = correct[c] > 0 ? correct[c] : 1;
        // ratio first: perfect recall gives N/C = 1 and beta = gamma exactly
        values[c] = gamma * (static_cast<double>(class_counts[c]) /
                             static_cast<double>(denom));
    }
    return PriorVector::checked(std::move(values));
}

bool should_refresh(int epoch, const PriorSchedule& schedule) {
    schedule.validate();
    if (epoch < schedule.warmup_epochs)
        return false;
    return (epoch - schedule.warmup_epochs) % schedule.refresh_interval == 0;
}

PriorVector active_prior(int epoch, const PriorSchedule& schedule,
                         const std::optional<PriorVector>& latest_computed,
                         std::size_t num_classes) {
    schedule.validate();
    if (epoch < schedule.warmup_epochs || !latest_computed)
        return PriorVector::uniform(num_classes);
    if (latest_computed->values.size() != num_classes)
        throw DimensionError("computed prior has wrong class count");
    return *latest_computed;
}

void write_trajectory_log(const std::filesystem::path& path,
                          const std::vector<TrajectoryRecord>& records,
                          const std::vector<std::size_t>& labels) {
    std::ofstream out(path);
    if (!out)
        throw DataError("cannot open trajectory log for writing: " + path.string());
    out << "epoch,sample_index,predicted,label\n";
    for (const TrajectoryRecord& rec : records) {
        if (rec.predicted.size() != labels.size())
            throw DimensionError("trajectory record and labels have different lengths");
        for (std::size_t n = 0; n < rec.predicted.size(); ++n)
            out << rec.epoch << ',' << n << ',' << rec.predicted[n] << ',' << labels[n]
                << '\n';
    }
}

} // namespace faml
