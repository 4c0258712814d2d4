#include "ellipsis/analytics.hpp"

#include <cmath>
#include <numeric>

namespace ellipsis {

void TaskParams::validate() const {
    if (lengths.size() != probabilities.size()) {
        throw InvariantViolation("task " + name + ": len and p have different sizes");
    }
    if (selected > lengths.size()) throw InvariantViolation("task " + name + ": n exceeds N");
    if (!lengths.empty()) {
        const double sum = std::accumulate(probabilities.begin(), probabilities.end(), 0.0);
        if (std::abs(sum - 1.0) > 1e-9) throw InvariantViolation("task " + name + ": probabilities do not sum to 1");
    }
    if (iterations < 0 || init_events < 0) throw InvariantViolation("task " + name + ": negative I or f");
}

namespace {

// sum over [begin, end) of p_i * len_i
double weighted_length(const TaskParams& tp, std::size_t begin, std::size_t end) {
    double s = 0;
    for (std::size_t i = begin; i < end; ++i) s += tp.probabilities[i] * tp.lengths[i];
    return s;
}

double probability_mass(const TaskParams& tp, std::size_t begin, std::size_t end) {
    double s = 0;
    for (std::size_t i = begin; i < end; ++i) s += tp.probabilities[i];
    return s;
}

}  // namespace

double events_audit(const TaskParams& tp) {
    return tp.iterations * weighted_length(tp, 0, tp.sequences()) + tp.init_events;
}

double events_ellipsis(const TaskParams& tp) {
    const auto n = tp.selected;
    return tp.iterations * (probability_mass(tp, 0, n) + weighted_length(tp, n, tp.sequences())) + tp.init_events;
}

double event_reduction(const TaskParams& tp) {
    const auto n = tp.selected;
    return tp.iterations * (weighted_length(tp, 0, n) - probability_mass(tp, 0, n));
}

double log_size_audit(const TaskParams& tp) {
    return tp.iterations * (tp.raw_record_bytes * weighted_length(tp, 0, tp.sequences())) +
           tp.init_events * tp.raw_record_bytes;
}

double log_size_ellipsis(const TaskParams& tp) {
    const auto n = tp.selected;
    return tp.iterations * (tp.template_record_bytes * probability_mass(tp, 0, n) +
                            tp.raw_record_bytes * weighted_length(tp, n, tp.sequences())) +
           tp.init_events * tp.raw_record_bytes;
}

double size_reduction(const TaskParams& tp) {
    const auto n = tp.selected;
    return tp.iterations *
           (tp.raw_record_bytes * weighted_length(tp, 0, n) - tp.template_record_bytes * probability_mass(tp, 0, n));
}

double events_hp_best(const TaskParams& tp) {
    const auto n = tp.selected;
    return static_cast<double>(n) + tp.iterations * weighted_length(tp, n, tp.sequences()) + tp.init_events;
}

double log_size_hp_best(const TaskParams& tp) {
    const auto n = tp.selected;
    return static_cast<double>(n) * tp.template_record_bytes +
           tp.iterations * tp.raw_record_bytes * weighted_length(tp, n, tp.sequences()) +
           tp.init_events * tp.raw_record_bytes;
}

bool ComparisonReport::ok() const noexcept {
    for (const auto& r : rows) {
        if (!r.within_tolerance) return false;
    }
    return true;
}

ComparisonReport compare(const TaskParams& tp, const ReduceCounters& measured, ReduceMode mode, double tolerance,
                         bool compare_bytes) {
    tp.validate();
    ComparisonReport report;
    report.mode = mode;
    report.tolerance = tolerance;
    auto row = [&](std::string quantity, double predicted, double actual) {
        Comparison c{std::move(quantity), predicted, actual, 0.0, true};
        const double denom = std::max(std::abs(predicted), 1.0);
        c.relative_error = std::abs(actual - predicted) / denom;
        c.within_tolerance = c.relative_error <= tolerance;
        report.rows.push_back(std::move(c));
    };
    row("events_in", events_audit(tp), static_cast<double>(measured.events_in));
    const bool hp = mode == ReduceMode::EllipsisHP;
    row(hp ? "events_out (HP best case)" : "events_out", hp ? events_hp_best(tp) : events_ellipsis(tp),
        static_cast<double>(measured.events_out));
    if (compare_bytes) {
        row("bytes_in", log_size_audit(tp), static_cast<double>(measured.bytes_in));
        row(hp ? "bytes_out (HP best case)" : "bytes_out", hp ? log_size_hp_best(tp) : log_size_ellipsis(tp),
            static_cast<double>(measured.bytes_out));
    }
    return report;
}

}  // namespace ellipsis
