#include "ellipsis/learner.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <map>
#include <numeric>

namespace ellipsis {

BoundarySet default_boundaries(std::uint64_t arch) {
    if (arch == 0xc000003e) return {35, 24, 23, 232};
    return {162, 158, 142, 252};
}

std::vector<TaskTrace> segment_trace(std::span<const AuditRecord> records, const BoundarySet& boundaries) {
    std::vector<TaskTrace> tasks;
    std::map<std::pair<std::uint64_t, std::uint64_t>, std::size_t> index;
    // Open run per task, plus whether a boundary has been seen yet.
    std::vector<LoopInstance> open;
    std::vector<bool> seen_boundary;

    for (const auto& r : records) {
        if (r.kind() != RecordKind::Syscall || !r.syscall.known()) continue;
        if (!r.ids.pid.known() || !r.ids.tid.known()) continue;
        auto key = std::make_pair(*r.ids.pid, *r.ids.tid);
        auto [it, fresh] = index.try_emplace(key, tasks.size());
        if (fresh) {
            TaskTrace t;
            t.pid = key.first;
            t.tid = key.second;
            if (r.ids.comm) t.comm = std::string(unquote(*r.ids.comm));
            tasks.push_back(std::move(t));
            open.emplace_back();
            seen_boundary.push_back(false);
        }
        const auto ti = it->second;
        if (boundaries.contains(*r.syscall)) {
            if (!open[ti].records.empty()) {
                open[ti].leading = !seen_boundary[ti];
                tasks[ti].instances.push_back(std::move(open[ti]));
                open[ti] = LoopInstance{};
            }
            seen_boundary[ti] = true;
        } else {
            open[ti].records.push_back(&r);
        }
    }
    for (std::size_t ti = 0; ti < tasks.size(); ++ti) {
        if (!open[ti].records.empty()) {
            open[ti].partial = true;
            open[ti].leading = !seen_boundary[ti];
            tasks[ti].instances.push_back(std::move(open[ti]));
        }
    }
    return tasks;
}

std::vector<TemplateEntry> induce_arguments(std::span<const LoopInstance> instances) {
    if (instances.empty()) return {};
    const auto& first = instances.front();
    std::vector<TemplateEntry> entries(first.length());
    for (std::size_t pos = 0; pos < first.length(); ++pos) {
        const auto& r0 = *first.records[pos];
        entries[pos].syscall = *r0.syscall;
        for (std::size_t k = 0; k < 4; ++k) {
            const auto& a0 = r0.args[k];
            bool constant = a0.known() && *a0 <= static_cast<std::uint64_t>(INT64_MAX);
            for (std::size_t i = 1; constant && i < instances.size(); ++i) {
                const auto& inst = instances[i];
                if (inst.length() != first.length() || *inst.records[pos]->syscall != entries[pos].syscall) {
                    throw InvariantViolation("induce_arguments: instances differ in syscall shape");
                }
                constant = inst.records[pos]->args[k] == a0;
            }
            entries[pos].args[k] = constant ? static_cast<std::int64_t>(*a0) : kWildcard;
        }
    }
    return entries;
}

bool instance_matches(const LoopInstance& instance, const Template& tpl) {
    if (instance.length() != tpl.length()) return false;
    for (std::size_t i = 0; i < tpl.length(); ++i) {
        if (!entry_matches(tpl.entries[i], *instance.records[i])) return false;
    }
    return true;
}

namespace {

using Shape = std::vector<std::uint64_t>;

Shape shape_of(const LoopInstance& inst) {
    Shape s;
    s.reserve(inst.length());
    for (const auto* r : inst.records) s.push_back(*r->syscall);
    return s;
}

bool selection_before(const SequenceStats& a, const SequenceStats& b) {
    if (a.score() != b.score()) return a.score() > b.score();
    if (a.length() != b.length()) return a.length() > b.length();
    return a.sequence < b.sequence;
}

}  // namespace

std::vector<TaskStatistics> sequence_statistics(std::span<const AuditRecord> records, const BoundarySet& boundaries) {
    auto traces = segment_trace(records, boundaries);

    struct Group {
        std::vector<LoopInstance> instances;
        // (trace position, instance position) to find adjacent instances
        std::vector<std::pair<std::size_t, std::size_t>> where;
    };
    struct Pool {
        TaskStatistics stats;
        std::map<Shape, Group> groups;
    };
    std::vector<Pool> pools;
    std::map<std::string, std::size_t> by_comm;

    for (std::size_t tr = 0; tr < traces.size(); ++tr) {
        auto& trace = traces[tr];
        auto [it, fresh] = by_comm.try_emplace(trace.comm, pools.size());
        if (fresh) {
            pools.emplace_back();
            pools.back().stats.comm = trace.comm;
        }
        auto& pool = pools[it->second];
        for (std::size_t i = 0; i < trace.instances.size(); ++i) {
            auto& inst = trace.instances[i];
            if (inst.leading) {
                pool.stats.init_records += inst.length();
                continue;
            }
            if (inst.partial) continue;
            ++pool.stats.iterations;
            auto& g = pool.groups[shape_of(inst)];
            g.instances.push_back(inst);
            g.where.emplace_back(tr, i);
        }
    }

    std::vector<TaskStatistics> out;
    for (auto& pool : pools) {
        for (auto& [shape, g] : pool.groups) {
            SequenceStats s;
            s.sequence = induce_arguments(g.instances);
            s.count = g.instances.size();
            s.probability = static_cast<double>(s.count) / static_cast<double>(pool.stats.iterations);
            s.low_support = s.count < 2;
            for (std::size_t j = 0; j < g.instances.size(); ++j) {
                s.durations_ns.push_back(g.instances[j].end_ns() - g.instances[j].start_ns());
                if (j > 0 && g.where[j].first == g.where[j - 1].first && g.where[j].second == g.where[j - 1].second + 1) {
                    s.interarrivals_ns.push_back(g.instances[j].start_ns() - g.instances[j - 1].start_ns());
                }
            }
            pool.stats.sequences.push_back(std::move(s));
        }
        std::sort(pool.stats.sequences.begin(), pool.stats.sequences.end(), selection_before);
        out.push_back(std::move(pool.stats));
    }
    return out;
}

std::vector<SequenceStats> select_top_n(const TaskStatistics& stats, std::size_t n, bool include_low_support) {
    std::vector<SequenceStats> candidates;
    for (const auto& s : stats.sequences) {
        if (include_low_support || !s.low_support) candidates.push_back(s);
    }
    std::sort(candidates.begin(), candidates.end(), selection_before);
    if (candidates.size() > n) candidates.resize(n);
    return candidates;
}

TemporalPolicy TemporalPolicy::mean_plus_sigma(double k) {
    if (!std::isfinite(k) || k < 0) throw InvariantViolation("mean+k*sigma policy needs a finite k >= 0");
    return TemporalPolicy(Kind::MeanPlusSigma, k);
}

TemporalPolicy TemporalPolicy::parse(std::string_view text) {
    if (text == "none") return none();
    if (text == "max") return max();
    constexpr std::string_view prefix = "musigma:";
    if (text.starts_with(prefix)) {
        auto num = std::string(text.substr(prefix.size()));
        std::size_t used = 0;
        double k = 0;
        try {
            k = std::stod(num, &used);
        } catch (const std::exception&) {
            used = 0;
        }
        if (used == num.size() && used > 0) return mean_plus_sigma(k);
    }
    throw InvariantViolation("unknown temporal policy '" + std::string(text) + "' (none, max, musigma:K)");
}

std::string TemporalPolicy::str() const {
    switch (kind_) {
        case Kind::None: return "none";
        case Kind::Max: return "max";
        case Kind::MeanPlusSigma: {
            char buf[32];
            std::snprintf(buf, sizeof buf, "musigma:%g", k_);
            return buf;
        }
    }
    return "none";
}

std::uint64_t TemporalPolicy::apply(std::span<const std::uint64_t> samples) const {
    if (kind_ == Kind::None || samples.empty()) return 0;
    if (kind_ == Kind::Max) return *std::max_element(samples.begin(), samples.end());
    const double n = static_cast<double>(samples.size());
    double mean = 0;
    for (auto s : samples) mean += static_cast<double>(s);
    mean /= n;
    double var = 0;
    for (auto s : samples) {
        const double d = static_cast<double>(s) - mean;
        var += d * d;
    }
    const double bound = mean + k_ * std::sqrt(var / n);
    // Guard against mean + 0*sigma landing a hair above an integer.
    const double rounded = std::ceil(bound - 1e-9);
    return static_cast<std::uint64_t>(std::max(rounded, 0.0));
}

TemplateSet temporal_profile(std::span<const AuditRecord> records, const TemplateSet& intermediate,
                             const BoundarySet& boundaries, const TemporalPolicy& policy) {
    auto traces = segment_trace(records, boundaries);
    TemplateSet out;
    for (const auto& task : intermediate.tasks()) {
        for (const auto& tpl : task.templates) {
            std::vector<std::uint64_t> durations;
            std::vector<std::uint64_t> gaps;
            for (const auto& trace : traces) {
                AuditRecord probe;
                probe.ids.pid = trace.pid;
                probe.ids.tid = trace.tid;
                probe.ids.comm = quote(trace.comm);
                if (!task.binding.matches(probe)) continue;
                bool have_prev = false;
                std::uint64_t prev_start = 0;
                for (const auto& inst : trace.instances) {
                    if (inst.leading || inst.partial || !instance_matches(inst, tpl)) {
                        have_prev = false;
                        continue;
                    }
                    durations.push_back(inst.end_ns() - inst.start_ns());
                    if (have_prev) gaps.push_back(inst.start_ns() - prev_start);
                    prev_start = inst.start_ns();
                    have_prev = true;
                }
            }
            if (durations.empty()) {
                throw NoMatchingInstances("template '" + tpl.name + "' never occurs in the profiling trace");
            }
            Template final_tpl = tpl;
            final_tpl.expected_runtime_ns = policy.apply(durations);
            final_tpl.expected_interarrival_ns = policy.apply(gaps);
            out.add(task.binding, std::move(final_tpl));
        }
    }
    return out;
}

LearnResult learn(std::span<const AuditRecord> records, const LearnOptions& options) {
    return learn(records, records, options);
}

LearnResult learn(std::span<const AuditRecord> records, std::span<const AuditRecord> profiling,
                  const LearnOptions& options) {
    LearnResult result;
    result.stats = sequence_statistics(records, options.boundaries);
    TemplateSet intermediate;
    for (const auto& task : result.stats) {
        // Candidates in selection order; one that is a prefix of an already
        // chosen sequence (or has one as its prefix) is skipped.
        std::vector<std::vector<TemplateEntry>> chosen;
        for (const auto& cand : select_top_n(task, task.distinct(), options.include_low_support)) {
            if (chosen.size() == options.top_n) break;
            const bool conflicts = std::any_of(chosen.begin(), chosen.end(), [&](const auto& c) {
                const auto n = std::min(c.size(), cand.sequence.size());
                return std::equal(c.begin(), c.begin() + n, cand.sequence.begin());
            });
            if (!conflicts) chosen.push_back(cand.sequence);
        }
        for (std::size_t i = 0; i < chosen.size(); ++i) {
            Template t;
            t.name = i == 0 ? task.comm : task.comm + "." + std::to_string(i + 1);
            t.entries = std::move(chosen[i]);
            intermediate.add(TaskBinding{task.comm, std::nullopt, std::nullopt}, std::move(t));
        }
    }
    result.templates = temporal_profile(profiling, intermediate, options.boundaries, options.policy);
    return result;
}

}  // namespace ellipsis
