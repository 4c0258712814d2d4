#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "ellipsis/audit_record.hpp"

namespace ellipsis {

/// Argument value meaning "not constrained".
inline constexpr std::int64_t kWildcard = -1;

/// One syscall position of a template, `sys:a0:a1:a2:a3` on disk.
struct TemplateEntry {
    std::uint64_t syscall = 0;
    std::array<std::int64_t, 4> args{kWildcard, kWildcard, kWildcard, kWildcard};

    static TemplateEntry parse(std::string_view text);
    std::string str() const;

    friend bool operator==(const TemplateEntry&, const TemplateEntry&) = default;
    friend auto operator<=>(const TemplateEntry&, const TemplateEntry&) = default;
};

struct Template {
    std::string name;
    std::uint64_t expected_runtime_ns = 0;       // 0 disables the check
    std::uint64_t expected_interarrival_ns = 0;  // 0 disables the check
    std::vector<TemplateEntry> entries;

    std::size_t length() const noexcept { return entries.size(); }

    friend bool operator==(const Template&, const Template&) = default;
};

/// Parses the template file format: name, entry count, expected runtime,
/// expected inter-arrival, then one entry per line.
/// Throws CountMismatch or MalformedEntry.
Template parse_template_file(std::string_view text);
std::string serialize_template(const Template& t);

/// True iff the syscall numbers agree and every constrained argument equals
/// the record's argument.
bool entry_matches(const TemplateEntry& entry, const AuditRecord& record) noexcept;

/// How a set of templates attaches to a task. Binding is by comm unless
/// pid/tid are given, in which case those take precedence.
struct TaskBinding {
    std::string comm;
    std::optional<std::uint64_t> pid;
    std::optional<std::uint64_t> tid;

    bool explicit_ids() const noexcept { return pid.has_value() || tid.has_value(); }
    bool matches(const AuditRecord& record) const;
    std::string label() const;

    friend bool operator==(const TaskBinding&, const TaskBinding&) = default;
};

struct TaskTemplates {
    TaskBinding binding;
    std::vector<Template> templates;
};

/// Templates keyed by task. Names are unique across the whole set.
class TemplateSet {
public:
    /// Throws DuplicateName if a template of that name is already loaded.
    void add(const TaskBinding& binding, Template t);

    /// Templates for the task that produced `record`: explicit pid/tid
    /// bindings first, then comm. nullptr if none apply.
    const TaskTemplates* find(const AuditRecord& record) const;
    const TaskTemplates* find(const TaskBinding& binding) const;
    const Template* by_name(std::string_view name) const;

    const std::vector<TaskTemplates>& tasks() const noexcept { return tasks_; }
    std::size_t template_count() const noexcept;
    bool empty() const noexcept { return tasks_.empty(); }

private:
    std::vector<TaskTemplates> tasks_;
};

struct MemoryCostModel {
    std::uint64_t fixed_per_template = 116;
    std::uint64_t per_syscall = 56;
};

/// Kernel memory held by the given templates: fixed cost per template plus a
/// per-entry cost.
std::uint64_t memory_cost(std::span<const Template> templates, const MemoryCostModel& model = {});
std::uint64_t memory_cost(const TemplateSet& set, const TaskBinding& task, const MemoryCostModel& model = {});

/// Loads `*.tpl` files from a directory. When `manifest.json` is present it
/// decides the task bindings; otherwise each template binds to the comm equal
/// to its name.
TemplateSet load_template_dir(const std::filesystem::path& dir);

/// Writes templates plus a manifest.json describing their bindings.
void write_template_dir(const TemplateSet& set, const std::filesystem::path& dir);

}  // namespace ellipsis
