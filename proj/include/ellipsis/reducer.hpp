#pragma once

#include <cstdint>
#include <map>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "ellipsis/audit_record.hpp"
#include "ellipsis/template.hpp"

namespace ellipsis {

/// Shared-prefix tree over the templates of one task. Each state is labelled
/// by the number of syscalls matched and the set of templates still
/// reachable from it; accepting states carry the completed template.
class Automaton {
public:
    using StateId = std::size_t;
    static constexpr StateId kRoot = 0;

    struct State {
        std::size_t depth = 0;
        std::vector<std::size_t> reachable;  // template indices
        std::optional<std::size_t> accepts;  // template index
        std::vector<std::pair<TemplateEntry, StateId>> children;
    };

    /// Throws DuplicateName, PrefixConflict, or InvariantViolation for an
    /// empty template list or an empty template.
    static Automaton build(std::span<const Template> templates);

    /// First child of `from` (in template insertion order) whose entry
    /// matches `record`. Every entry test adds one to `comparisons`.
    std::optional<StateId> advance(StateId from, const AuditRecord& record, std::uint64_t& comparisons) const;

    const State& state(StateId id) const { return states_.at(id); }
    std::size_t state_count() const noexcept { return states_.size(); }
    const Template& template_at(std::size_t index) const { return templates_.at(index); }
    const std::vector<Template>& templates() const noexcept { return templates_; }
    std::vector<std::string> reachable_names(StateId id) const;

private:
    std::vector<Template> templates_;
    std::vector<State> states_;
};

enum class ReduceMode { Ellipsis, EllipsisHP };

struct ReducerOptions {
    ReduceMode mode = ReduceMode::Ellipsis;
    bool enforce_runtime = true;
    bool enforce_interarrival = true;
};

enum class EmissionKind { Raw, TemplateRecord };

struct Emission {
    EmissionKind kind = EmissionKind::Raw;
    AuditRecord record;
    /// Input events this emission stands for (1 for Raw, rep * length for a
    /// template record).
    std::uint64_t covered = 1;
};

/// Monotone serial source for emitted template records.
class SerialCounter {
public:
    void observe(std::uint64_t serial) noexcept {
        if (serial >= next_) next_ = serial + 1;
    }
    std::uint64_t take() noexcept { return next_++; }

private:
    std::uint64_t next_ = 1;
};

struct TaskStats {
    std::uint64_t events = 0;
    std::uint64_t matches = 0;
    std::uint64_t failures = 0;
    std::uint64_t temporal_failures = 0;
    std::uint64_t max_comparisons_per_step = 0;
    std::uint64_t total_comparisons = 0;
};

/// Runtime matcher for one (pid, tid).
class TaskReducer {
public:
    TaskReducer(std::shared_ptr<const Automaton> automaton, ReducerOptions options,
                std::shared_ptr<SerialCounter> serials = nullptr);

    /// Feeds one SYSCALL record and appends whatever it releases to `out`.
    /// Throws OutOfOrderTimestamp if the record is older than the previous one.
    void step(const AuditRecord& record, std::vector<Emission>& out);
    std::vector<Emission> step(const AuditRecord& record);

    /// End of stream: releases the open HP aggregate and any partial match.
    void finish(std::vector<Emission>& out);
    std::vector<Emission> finish();

    Automaton::StateId current_state() const noexcept { return state_; }
    std::size_t pending_size() const noexcept { return pending_.size(); }
    std::optional<std::uint64_t> open_rep() const noexcept;
    const TaskStats& stats() const noexcept { return stats_; }
    std::uint64_t last_step_comparisons() const noexcept { return last_comparisons_; }

private:
    struct Aggregate {
        std::size_t template_index;
        AuditRecord first;
        std::uint64_t rep;
        std::uint64_t stime;
        std::uint64_t etime;
        std::uint64_t last_instance_start;
    };

    void accept(std::vector<Emission>& out);
    void flush_aggregate(std::vector<Emission>& out);
    void flush_pending(std::vector<Emission>& out);
    void start_or_raw(const AuditRecord& record, std::uint64_t& comparisons, std::vector<Emission>& out);
    Emission template_emission(std::size_t template_index, const AuditRecord& first, std::uint64_t rep,
                               std::uint64_t stime, std::uint64_t etime);

    std::shared_ptr<const Automaton> automaton_;
    ReducerOptions options_;
    std::shared_ptr<SerialCounter> serials_;

    Automaton::StateId state_ = Automaton::kRoot;
    std::vector<AuditRecord> pending_;
    std::uint64_t instance_start_ns_ = 0;
    std::optional<std::uint64_t> last_event_ns_;
    EventTime last_time_;
    std::optional<Aggregate> aggregate_;
    TaskStats stats_;
    std::uint64_t last_comparisons_ = 0;
};

/// True when two records come from the same credentials and program, which
/// is what a template record copies from the first record of its span.
bool same_identity(const AuditRecord& a, const AuditRecord& b);

struct ReduceCounters {
    std::uint64_t events_in = 0;
    std::uint64_t events_out = 0;
    std::uint64_t bytes_in = 0;
    std::uint64_t bytes_out = 0;
    std::uint64_t raw_out = 0;
    std::uint64_t template_records = 0;
    std::uint64_t covered_events = 0;
    std::uint64_t passthrough = 0;
    std::uint64_t matches = 0;
    std::uint64_t failures = 0;
    std::uint64_t temporal_failures = 0;
    std::uint64_t max_comparisons_per_step = 0;
    std::uint64_t total_comparisons = 0;
};

/// Demultiplexes an ordered record stream by (pid, tid) and drives one
/// TaskReducer per task that has templates. Output preserves input order.
class StreamReducer {
public:
    StreamReducer(const TemplateSet& templates, ReducerOptions options);

    void push(const AuditRecord& record, std::vector<AuditRecord>& out);
    void finish(std::vector<AuditRecord>& out);

    const ReduceCounters& counters() const noexcept { return counters_; }

private:
    using TaskKey = std::pair<std::uint64_t, std::uint64_t>;

    void emit(std::vector<Emission>& emissions, std::vector<AuditRecord>& out);
    TaskReducer* reducer_for(const AuditRecord& record);

    const TemplateSet& templates_;
    ReducerOptions options_;
    std::shared_ptr<SerialCounter> serials_ = std::make_shared<SerialCounter>();
    std::map<const TaskTemplates*, std::shared_ptr<const Automaton>> automata_;
    std::map<TaskKey, std::size_t> task_index_;
    std::vector<std::unique_ptr<TaskReducer>> reducers_;  // in order of first appearance
    std::map<TaskKey, std::uint64_t> last_ns_;
    std::vector<Emission> scratch_;
    std::uint64_t index_ = 0;
    ReduceCounters counters_;
};

struct ReduceResult {
    std::vector<AuditRecord> records;
    ReduceCounters counters;
};

/// Reduces a whole stream. Throws OutOfOrderTimestamp carrying the input
/// index of the offending record.
ReduceResult reduce_stream(std::span<const AuditRecord> records, const TemplateSet& templates,
                           ReducerOptions options = {});

}  // namespace ellipsis
