#include "ellipsis/reconstruct.hpp"

#include <algorithm>
#include <map>
#include <optional>

namespace ellipsis {

namespace {

// Canonical slot of `key=`; synthetic serial tags go after it.
constexpr std::size_t kAfterKeySlot = 31;

using TaskKey = std::optional<std::pair<std::uint64_t, std::uint64_t>>;

TaskKey task_of(const AuditRecord& r) {
    if (!r.ids.pid.known() || !r.ids.tid.known()) return std::nullopt;
    return std::make_pair(*r.ids.pid, *r.ids.tid);
}

}  // namespace

std::vector<ExpandedRecord> expand(std::span<const AuditRecord> reduced, const TemplateSet& templates,
                                   const ReconstructOptions& options) {
    std::uint64_t next_serial = 1;
    if (options.synthesize_serials) {
        for (const auto& r : reduced) {
            if (r.serial.known()) next_serial = std::max(next_serial, *r.serial + 1);
        }
    }

    std::vector<ExpandedRecord> out;
    out.reserve(reduced.size());
    for (std::size_t idx = 0; idx < reduced.size(); ++idx) {
        const auto& r = reduced[idx];
        if (r.kind() != RecordKind::TemplateMatch) {
            out.push_back({r, false, idx});
            continue;
        }
        const auto* tpl = templates.by_name(*r.template_name);
        if (!tpl) throw UnknownTemplate("record " + std::to_string(idx) + " names unknown template '" + *r.template_name + "'");
        if (!r.rep.known() || *r.rep < 1) throw RepInvalid("record " + std::to_string(idx) + " has rep < 1");
        if (!r.stime.known() || !r.etime.known() || *r.stime > *r.etime) {
            throw InvariantViolation("record " + std::to_string(idx) + " has no valid stime/etime");
        }
        const auto stime = *r.stime;
        const auto etime = *r.etime;
        const auto total = *r.rep * tpl->length();
        for (std::uint64_t j = 0; j < total; ++j) {
            const auto& entry = tpl->entries[j % tpl->length()];
            AuditRecord e;
            e.type = "SYSCALL";
            if (j == 0) e.time = EventTime::exact(stime);
            else if (j + 1 == total) e.time = EventTime::exact(etime);
            else e.time = EventTime::range(stime, etime);
            if (options.synthesize_serials) {
                e.serial = next_serial++;
                e.extras.push_back({kAfterKeySlot, "synthetic", "yes"});
            } else {
                e.serial = Field<std::uint64_t>::unknown();
            }
            e.arch = r.arch;
            e.syscall = entry.syscall;
            e.per = r.per;
            e.success = Field<bool>::unknown();
            e.exit = Field<std::int64_t>::unknown();
            for (std::size_t k = 0; k < 4; ++k) {
                if (entry.args[k] == kWildcard) e.args[k] = Field<std::uint64_t>::unknown();
                else e.args[k] = static_cast<std::uint64_t>(entry.args[k]);
            }
            e.items = Field<std::uint64_t>::unknown();
            e.ids = r.ids;
            out.push_back({std::move(e), true, idx});
        }
    }
    return out;
}

std::vector<AuditRecord> reconstruct(std::span<const AuditRecord> reduced, const TemplateSet& templates,
                                     const ReconstructOptions& options) {
    auto expanded = expand(reduced, templates, options);
    std::vector<AuditRecord> out;
    out.reserve(expanded.size());
    for (auto& e : expanded) out.push_back(std::move(e.record));
    return out;
}

RetentionReport verify_retention(std::span<const AuditRecord> original, std::span<const AuditRecord> reduced,
                                 const TemplateSet& templates) {
    const auto expanded = expand(reduced, templates);
    RetentionReport report;
    report.original_events = original.size();
    report.reconstructed_events = expanded.size();

    std::map<TaskKey, std::vector<std::size_t>> orig_by_task;
    std::map<TaskKey, std::vector<std::size_t>> exp_by_task;
    std::vector<TaskKey> orig_order;
    std::vector<TaskKey> exp_order;
    for (std::size_t i = 0; i < original.size(); ++i) {
        auto key = task_of(original[i]);
        orig_by_task[key].push_back(i);
        orig_order.push_back(key);
    }
    for (std::size_t i = 0; i < expanded.size(); ++i) {
        auto key = task_of(expanded[i].record);
        exp_by_task[key].push_back(i);
        exp_order.push_back(key);
    }
    report.interleaving_lost = orig_order != exp_order;

    std::optional<std::pair<std::size_t, std::string>> first;
    auto violation = [&](std::size_t index, std::string why) {
        if (!first || index < first->first) first = {index, std::move(why)};
    };

    for (const auto& [key, exp_idx] : exp_by_task) {
        if (!orig_by_task.contains(key)) violation(original.size(), "reconstructed events for a task absent from the original");
    }

    for (const auto& [key, orig_idx] : orig_by_task) {
        static const std::vector<std::size_t> kNone;
        auto it = exp_by_task.find(key);
        const auto& exp_idx = it == exp_by_task.end() ? kNone : it->second;
        const auto n = std::min(orig_idx.size(), exp_idx.size());
        for (std::size_t j = 0; j < n; ++j) {
            const auto oi = orig_idx[j];
            const auto& o = original[oi];
            const auto& x = expanded[exp_idx[j]];
            const auto& e = x.record;
            if (!x.synthesized) {
                if (serialize_record(o) != serialize_record(e)) {
                    violation(oi, "raw record differs from the original");
                    break;
                }
                ++report.raw_exact;
                ++report.exact_timestamps;
                continue;
            }
            ++report.synthesized;
            if (o.kind() != RecordKind::Syscall || !o.syscall.known() || *o.syscall != *e.syscall) {
                violation(oi, "syscall differs from the template entry");
                break;
            }
            bool args_ok = true;
            for (std::size_t k = 0; k < 4; ++k) {
                if (e.args[k].known()) {
                    args_ok = args_ok && o.args[k] == e.args[k];
                } else if (o.args[k].present()) {
                    ++report.lost_arguments;
                }
            }
            if (!args_ok) {
                violation(oi, "constrained argument differs");
                break;
            }
            const auto t = o.time_ns();
            if (e.time.is_range()) {
                ++report.ranged_timestamps;
                if (t < e.time.lo_ns() || t > e.time.hi_ns()) {
                    violation(oi, "timestamp outside its reconstructed range");
                    break;
                }
            } else {
                ++report.exact_timestamps;
                if (t != e.time.lo_ns()) {
                    violation(oi, "exact timestamp differs");
                    break;
                }
            }
            if (o.arch != e.arch || o.per != e.per || o.ids != e.ids) {
                violation(oi, "identity fields differ");
                break;
            }
            if (o.serial.present()) ++report.lost_serials;
            if (o.success.present()) ++report.lost_success;
            if (o.exit.present()) ++report.lost_exit;
            if (o.items.present()) ++report.lost_items;
            if (!o.extras.empty()) ++report.lost_extras;
        }
        if (orig_idx.size() > exp_idx.size()) {
            violation(orig_idx[n], "event missing after reconstruction");
        } else if (exp_idx.size() > orig_idx.size()) {
            violation(orig_idx.empty() ? original.size() : orig_idx.back() + 1, "reconstruction has extra events");
        }
    }

    if (first) throw RetentionViolation(first->second, first->first);
    return report;
}

}  // namespace ellipsis
