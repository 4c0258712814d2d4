#include "ellipsis/reducer.hpp"

#include <algorithm>

namespace ellipsis {

bool same_identity(const AuditRecord& a, const AuditRecord& b) {
    return a.arch == b.arch && a.per == b.per && a.ids == b.ids;
}

TaskReducer::TaskReducer(std::shared_ptr<const Automaton> automaton, ReducerOptions options,
                         std::shared_ptr<SerialCounter> serials)
    : automaton_(std::move(automaton)),
      options_(options),
      serials_(serials ? std::move(serials) : std::make_shared<SerialCounter>()) {
    if (!automaton_) throw InvariantViolation("task reducer needs an automaton");
}

std::optional<std::uint64_t> TaskReducer::open_rep() const noexcept {
    if (!aggregate_) return std::nullopt;
    return aggregate_->rep;
}

void TaskReducer::step(const AuditRecord& record, std::vector<Emission>& out) {
    if (record.kind() != RecordKind::Syscall || !record.syscall.known()) {
        throw InvariantViolation("task reducer only accepts SYSCALL records");
    }
    const auto now = record.time_ns();
    if (last_event_ns_ && now < *last_event_ns_) {
        throw OutOfOrderTimestamp("timestamp goes backwards within task", stats_.events);
    }
    last_event_ns_ = now;
    last_time_ = record.time;
    if (record.serial.known()) serials_->observe(*record.serial);
    ++stats_.events;

    std::uint64_t comparisons = 0;
    if (state_ == Automaton::kRoot) {
        start_or_raw(record, comparisons, out);
    } else {
        std::optional<Automaton::StateId> next;
        if (same_identity(pending_.front(), record)) next = automaton_->advance(state_, record, comparisons);
        if (next) {
            pending_.push_back(record);
            state_ = *next;
            if (automaton_->state(state_).accepts) accept(out);
        } else {
            ++stats_.failures;
            flush_aggregate(out);
            flush_pending(out);
            state_ = Automaton::kRoot;
            start_or_raw(record, comparisons, out);
        }
    }
    last_comparisons_ = comparisons;
    stats_.total_comparisons += comparisons;
    stats_.max_comparisons_per_step = std::max(stats_.max_comparisons_per_step, comparisons);
}

std::vector<Emission> TaskReducer::step(const AuditRecord& record) {
    std::vector<Emission> out;
    step(record, out);
    return out;
}

void TaskReducer::start_or_raw(const AuditRecord& record, std::uint64_t& comparisons, std::vector<Emission>& out) {
    if (auto next = automaton_->advance(Automaton::kRoot, record, comparisons)) {
        instance_start_ns_ = record.time_ns();
        pending_.push_back(record);
        state_ = *next;
        if (automaton_->state(state_).accepts) accept(out);
        return;
    }
    flush_aggregate(out);
    out.push_back({EmissionKind::Raw, record, 1});
}

void TaskReducer::accept(std::vector<Emission>& out) {
    const auto ti = *automaton_->state(state_).accepts;
    const auto& tpl = automaton_->template_at(ti);
    const auto stime = pending_.front().time_ns();
    const auto etime = pending_.back().time_ns();

    if (options_.enforce_runtime && tpl.expected_runtime_ns != 0 && etime - stime > tpl.expected_runtime_ns) {
        ++stats_.temporal_failures;
        ++stats_.failures;
        flush_aggregate(out);
        flush_pending(out);
        state_ = Automaton::kRoot;
        return;
    }
    ++stats_.matches;

    if (options_.mode == ReduceMode::Ellipsis) {
        out.push_back(template_emission(ti, pending_.front(), 1, stime, etime));
    } else {
        bool extend = aggregate_ && aggregate_->template_index == ti && same_identity(aggregate_->first, pending_.front());
        if (extend && options_.enforce_interarrival && tpl.expected_interarrival_ns != 0) {
            extend = instance_start_ns_ - aggregate_->last_instance_start <= tpl.expected_interarrival_ns;
        }
        if (extend) {
            ++aggregate_->rep;
            aggregate_->etime = etime;
            aggregate_->last_instance_start = instance_start_ns_;
        } else {
            flush_aggregate(out);
            aggregate_ = Aggregate{ti, pending_.front(), 1, stime, etime, instance_start_ns_};
        }
    }
    pending_.clear();
    state_ = Automaton::kRoot;
}

Emission TaskReducer::template_emission(std::size_t template_index, const AuditRecord& first, std::uint64_t rep,
                                        std::uint64_t stime, std::uint64_t etime) {
    const auto& tpl = automaton_->template_at(template_index);
    AuditRecord r;
    r.type = "SYSCALL";
    r.time = last_time_;
    r.time.hi.reset();
    r.serial = serials_->take();
    r.arch = first.arch;
    r.per = first.per;
    r.template_name = tpl.name;
    r.rep = rep;
    r.stime = stime;
    r.etime = etime;
    r.ids = first.ids;
    return {EmissionKind::TemplateRecord, std::move(r), rep * tpl.length()};
}

void TaskReducer::flush_aggregate(std::vector<Emission>& out) {
    if (!aggregate_) return;
    auto& a = *aggregate_;
    out.push_back(template_emission(a.template_index, a.first, a.rep, a.stime, a.etime));
    aggregate_.reset();
}

void TaskReducer::flush_pending(std::vector<Emission>& out) {
    for (auto& r : pending_) out.push_back({EmissionKind::Raw, std::move(r), 1});
    pending_.clear();
}

void TaskReducer::finish(std::vector<Emission>& out) {
    flush_aggregate(out);
    flush_pending(out);
    state_ = Automaton::kRoot;
}

std::vector<Emission> TaskReducer::finish() {
    std::vector<Emission> out;
    finish(out);
    return out;
}

StreamReducer::StreamReducer(const TemplateSet& templates, ReducerOptions options)
    : templates_(templates), options_(options) {}

TaskReducer* StreamReducer::reducer_for(const AuditRecord& record) {
    if (!record.ids.pid.known() || !record.ids.tid.known()) return nullptr;
    TaskKey key{*record.ids.pid, *record.ids.tid};
    if (auto it = task_index_.find(key); it != task_index_.end()) return reducers_[it->second].get();

    const auto* tt = templates_.find(record);
    if (!tt || tt->templates.empty()) return nullptr;
    auto& automaton = automata_[tt];
    if (!automaton) {
        automaton = std::make_shared<const Automaton>(Automaton::build(tt->templates));
    }
    task_index_[key] = reducers_.size();
    reducers_.push_back(std::make_unique<TaskReducer>(automaton, options_, serials_));
    return reducers_.back().get();
}

void StreamReducer::emit(std::vector<Emission>& emissions, std::vector<AuditRecord>& out) {
    for (auto& e : emissions) {
        ++counters_.events_out;
        counters_.bytes_out += record_size_bytes(e.record);
        if (e.kind == EmissionKind::Raw) {
            ++counters_.raw_out;
        } else {
            ++counters_.template_records;
            counters_.covered_events += e.covered;
        }
        out.push_back(std::move(e.record));
    }
    emissions.clear();
}

void StreamReducer::push(const AuditRecord& record, std::vector<AuditRecord>& out) {
    const auto index = index_++;
    ++counters_.events_in;
    counters_.bytes_in += record_size_bytes(record);
    if (record.serial.known()) serials_->observe(*record.serial);

    const bool reducible = record.kind() == RecordKind::Syscall && record.syscall.known();
    if (reducible && record.ids.pid.known() && record.ids.tid.known()) {
        TaskKey key{*record.ids.pid, *record.ids.tid};
        auto [it, fresh] = last_ns_.try_emplace(key, record.time_ns());
        if (!fresh) {
            if (record.time_ns() < it->second) {
                throw OutOfOrderTimestamp("timestamp goes backwards for pid " + std::to_string(key.first) + " tid " +
                                              std::to_string(key.second) + " at record " + std::to_string(index),
                                          index);
            }
            it->second = record.time_ns();
        }
    }

    TaskReducer* reducer = reducible ? reducer_for(record) : nullptr;
    if (!reducer) {
        ++counters_.passthrough;
        scratch_.push_back({EmissionKind::Raw, record, 1});
        emit(scratch_, out);
        return;
    }
    const auto before = reducer->stats();
    reducer->step(record, scratch_);
    const auto& after = reducer->stats();
    counters_.matches += after.matches - before.matches;
    counters_.failures += after.failures - before.failures;
    counters_.temporal_failures += after.temporal_failures - before.temporal_failures;
    counters_.total_comparisons += reducer->last_step_comparisons();
    counters_.max_comparisons_per_step = std::max(counters_.max_comparisons_per_step, reducer->last_step_comparisons());
    emit(scratch_, out);
}

void StreamReducer::finish(std::vector<AuditRecord>& out) {
    for (auto& r : reducers_) {
        r->finish(scratch_);
        emit(scratch_, out);
    }
}

ReduceResult reduce_stream(std::span<const AuditRecord> records, const TemplateSet& templates, ReducerOptions options) {
    ReduceResult result;
    StreamReducer reducer(templates, options);
    result.records.reserve(records.size() / 4 + 16);
    for (const auto& r : records) reducer.push(r, result.records);
    reducer.finish(result.records);
    result.counters = reducer.counters();
    return result;
}

}  // namespace ellipsis
