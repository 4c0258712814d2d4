#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "ellipsis/reducer.hpp"

namespace ellipsis {

/// Workload parameters of one task. Sequences 0..n-1 are the ones reduced
/// by templates.
struct TaskParams {
    std::string name;
    double iterations = 0;           // I
    std::vector<double> lengths;     // len(s_i)
    std::vector<double> probabilities;  // p_i
    double init_events = 0;          // f
    std::size_t selected = 0;        // n
    double raw_record_bytes = 527;   // B_A
    double template_record_bytes = 343;  // B_E

    std::size_t sequences() const noexcept { return lengths.size(); }  // N
    /// Throws InvariantViolation when sizes disagree, p does not sum to 1,
    /// or n > N.
    void validate() const;
};

// Closed forms. All take validated parameters.
double events_audit(const TaskParams& tp);       // I*sum(p*len) + f
double events_ellipsis(const TaskParams& tp);    // I*(sum_{i<n} p + sum_{i>=n} p*len) + f
double event_reduction(const TaskParams& tp);    // I*(sum_{i<n} p*len - sum_{i<n} p)
double log_size_audit(const TaskParams& tp);
double log_size_ellipsis(const TaskParams& tp);
double size_reduction(const TaskParams& tp);
double events_hp_best(const TaskParams& tp);     // n + I*sum_{i>=n} p*len + f
double log_size_hp_best(const TaskParams& tp);

struct Comparison {
    std::string quantity;
    double predicted = 0;
    double measured = 0;
    double relative_error = 0;
    bool within_tolerance = true;
};

struct ComparisonReport {
    ReduceMode mode = ReduceMode::Ellipsis;
    double tolerance = 0.03;
    std::vector<Comparison> rows;

    bool ok() const noexcept;
};

/// Predicted against measured event counts and bytes. Predictions use
/// E_E/L_E for Ellipsis and the best-case HP forms for HP. Bytes are
/// compared only when `compare_bytes` is set, since B_A and B_E are
/// averages the caller supplies.
ComparisonReport compare(const TaskParams& tp, const ReduceCounters& measured, ReduceMode mode,
                         double tolerance = 0.03, bool compare_bytes = false);

}  // namespace ellipsis
