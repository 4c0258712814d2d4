#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "ellipsis/audit_record.hpp"
#include "ellipsis/template.hpp"

namespace ellipsis {

/// One loop path of a task. Entry arguments of -1 are drawn at random for
/// every instance; the rest are emitted as given.
struct SequenceSpec {
    std::vector<TemplateEntry> entries;
    double probability = 1.0;
    std::uint64_t duration_ns = 0;         // first-to-last record of an instance
    std::uint64_t duration_jitter_ns = 0;  // + U[0, jitter]
    double outlier_probability = 0.0;
    std::uint64_t outlier_extra_ns = 0;    // added to the duration of outliers
};

struct TaskSpec {
    std::string comm;
    std::string exe;
    std::uint64_t pid = 0;
    std::uint64_t tid = 0;
    std::uint64_t ppid = 1;
    std::uint64_t init_records = 0;  // f
    std::vector<SequenceSpec> sequences;
    std::uint64_t period_ns = 0;
    std::uint64_t jitter_ns = 0;  // instance start + U[0, jitter]
    std::uint64_t iterations = 0;  // I
    std::uint64_t boundary_syscall = 162;
    std::uint64_t start_offset_ns = 0;
};

struct WorkloadSpec {
    std::uint64_t seed = 1;
    std::uint64_t epoch_ns = 0;
    /// Learning traces carry the boundary syscall after the init phase and
    /// after every instance; runtime streams audited with the usual ruleset
    /// do not.
    bool emit_boundaries = true;
    std::uint64_t arch = 0x40000028;
    std::uint64_t per = 0x800000;
    std::uint64_t first_serial = 1;
    /// Lengthens each task's exe path so a typical record serializes to
    /// about this many bytes (newline included).
    std::optional<std::uint64_t> pad_records_to_bytes;
    std::vector<TaskSpec> tasks;

    /// Throws SpecInvalid.
    void validate() const;
};

struct Workload {
    std::vector<AuditRecord> records;
    /// Sequence index drawn for every instance, per task.
    std::vector<std::vector<std::size_t>> choices;
};

/// Deterministic for a given spec: f init records, then I instances per
/// task, all tasks merged by timestamp (ties keep task order). Serials are
/// assigned in output order from `first_serial`.
Workload generate_workload(const WorkloadSpec& spec);
std::vector<AuditRecord> generate(const WorkloadSpec& spec);

struct AnomalySpec {
    std::vector<TemplateEntry> records;  // -1 args render as 0
    std::uint64_t at_ns = 0;             // absolute time of the first record
    std::uint64_t spacing_ns = 1000;
    /// Target task by comm; when absent, or not found in the stream, the
    /// identity below is used.
    std::optional<std::string> target_comm;
    std::uint64_t pid = 0;
    std::uint64_t tid = 0;
    std::string comm = "intruder";
    std::string exe = "/tmp/intruder";

    void validate() const;
};

/// Merges the anomaly records into the stream in timestamp order, after any
/// original record with the same timestamp. Original records are untouched;
/// injected ones get serials above the stream's maximum.
std::vector<AuditRecord> inject(const std::vector<AuditRecord>& stream, const AnomalySpec& anomaly);

/// openat, write, close: the file-write triple an exfiltrating task adds.
std::vector<TemplateEntry> exfiltration_triple();

}  // namespace ellipsis
