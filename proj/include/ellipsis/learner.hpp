#pragma once

#include <cstdint>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "ellipsis/audit_record.hpp"
#include "ellipsis/template.hpp"

namespace ellipsis {

using BoundarySet = std::set<std::uint64_t>;

/// nanosleep, sched_yield, select and epoll_wait for the given audit arch
/// word. ARM EABI (40000028) and x86_64 (c000003e) are known; anything else
/// falls back to the ARM numbers.
BoundarySet default_boundaries(std::uint64_t arch = 0x40000028);

/// One loop iteration of a task, delimited by boundary syscalls. Points into
/// the record span handed to segment_trace.
struct LoopInstance {
    std::vector<const AuditRecord*> records;
    bool partial = false;  // not closed by a boundary record
    bool leading = false;  // precedes the task's first boundary record

    std::uint64_t start_ns() const { return records.front()->time_ns(); }
    std::uint64_t end_ns() const { return records.back()->time_ns(); }
    std::size_t length() const noexcept { return records.size(); }
};

struct TaskTrace {
    std::uint64_t pid = 0;
    std::uint64_t tid = 0;
    std::string comm;  // unquoted
    std::vector<LoopInstance> instances;
};

/// Splits each (pid, tid) stream into runs closed by boundary records. The
/// boundary record itself belongs to no run; empty runs are dropped; an
/// unterminated tail is returned with `partial` set. Tasks are returned in
/// order of first appearance. SYSCALL records without pid/tid are ignored.
std::vector<TaskTrace> segment_trace(std::span<const AuditRecord> records, const BoundarySet& boundaries);

/// Keeps an argument constant when every instance agrees on it, otherwise
/// marks it as a wildcard. All instances must share one syscall shape.
std::vector<TemplateEntry> induce_arguments(std::span<const LoopInstance> instances);

/// True iff the instance has the template's length and every entry matches.
bool instance_matches(const LoopInstance& instance, const Template& tpl);

struct SequenceStats {
    std::vector<TemplateEntry> sequence;
    std::uint64_t count = 0;
    double probability = 0.0;
    bool low_support = false;  // count < 2
    std::vector<std::uint64_t> durations_ns;
    std::vector<std::uint64_t> interarrivals_ns;

    std::size_t length() const noexcept { return sequence.size(); }
    /// Events saved per iteration when this sequence is reduced.
    double score() const noexcept { return probability * static_cast<double>(length()) - probability; }
};

/// Per-task sequence statistics; instances of every thread sharing `comm`
/// are pooled. Sequences are sorted by selection order.
struct TaskStatistics {
    std::string comm;
    std::uint64_t iterations = 0;     // I: closed, non-leading instances
    std::uint64_t init_records = 0;   // f: records before the first boundary
    std::vector<SequenceStats> sequences;

    std::size_t distinct() const noexcept { return sequences.size(); }  // N
};

std::vector<TaskStatistics> sequence_statistics(std::span<const AuditRecord> records, const BoundarySet& boundaries);

/// The `n` sequences with the largest p*len - p, ties broken by longer length
/// then lexicographic order. Low-support sequences are skipped unless
/// `include_low_support` is set.
std::vector<SequenceStats> select_top_n(const TaskStatistics& stats, std::size_t n, bool include_low_support = false);

class TemporalPolicy {
public:
    enum class Kind { None, Max, MeanPlusSigma };

    static TemporalPolicy none() { return TemporalPolicy(Kind::None, 0.0); }
    static TemporalPolicy max() { return TemporalPolicy(Kind::Max, 0.0); }
    static TemporalPolicy mean_plus_sigma(double k);
    /// "none", "max" or "musigma:K".
    static TemporalPolicy parse(std::string_view text);

    Kind kind() const noexcept { return kind_; }
    double k() const noexcept { return k_; }
    std::string str() const;

    /// Bound derived from the samples; 0 (disabled) for None or no samples.
    /// Mean plus sigma uses the population deviation, rounded up.
    std::uint64_t apply(std::span<const std::uint64_t> samples) const;

private:
    TemporalPolicy(Kind kind, double k) : kind_(kind), k_(k) {}
    Kind kind_;
    double k_;
};

/// Samples the duration and inter-arrival of each template from a profiling
/// trace and fills in its temporal constraints under `policy`.
/// Throws NoMatchingInstances for a template never seen in the trace.
TemplateSet temporal_profile(std::span<const AuditRecord> records, const TemplateSet& intermediate,
                             const BoundarySet& boundaries, const TemporalPolicy& policy);

struct LearnOptions {
    BoundarySet boundaries = default_boundaries();
    std::size_t top_n = 1;
    TemporalPolicy policy = TemporalPolicy::max();
    bool include_low_support = false;
};

struct LearnResult {
    TemplateSet templates;
    std::vector<TaskStatistics> stats;
};

/// Both template creation steps over one trace: sequence statistics and
/// selection, then temporal profiling of the selected templates. Templates
/// bind by comm; the first per task is named after the comm, later ones get
/// a `.2`, `.3` suffix.
LearnResult learn(std::span<const AuditRecord> records, const LearnOptions& options);

/// Same, with a separate trace for the temporal profiling step.
LearnResult learn(std::span<const AuditRecord> records, std::span<const AuditRecord> profiling,
                  const LearnOptions& options);

}  // namespace ellipsis
