#include "ellipsis/template.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <sstream>

#include <json.hpp>

namespace ellipsis {

namespace {

template <typename T>
bool parse_int(std::string_view s, T& out) {
    if (s.empty()) return false;
    auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), out);
    return ec == std::errc{} && ptr == s.data() + s.size();
}

std::string_view trim(std::string_view s) {
    while (!s.empty() && (s.back() == '\r' || s.back() == ' ' || s.back() == '\t')) s.remove_suffix(1);
    while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
    return s;
}

std::string read_file(const std::filesystem::path& p) {
    std::ifstream in(p, std::ios::binary);
    if (!in) throw Error("cannot read " + p.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

}  // namespace

TemplateEntry TemplateEntry::parse(std::string_view text) {
    text = trim(text);
    TemplateEntry e;
    std::array<std::string_view, 5> parts;
    std::size_t n = 0;
    std::size_t pos = 0;
    while (true) {
        auto colon = text.find(':', pos);
        if (n == parts.size()) throw MalformedEntry("too many fields in entry '" + std::string(text) + "'");
        parts[n++] = text.substr(pos, colon == std::string_view::npos ? std::string_view::npos : colon - pos);
        if (colon == std::string_view::npos) break;
        pos = colon + 1;
    }
    if (n != parts.size()) throw MalformedEntry("entry '" + std::string(text) + "' needs sys:a0:a1:a2:a3");
    if (!parse_int(parts[0], e.syscall)) throw MalformedEntry("bad syscall number in '" + std::string(text) + "'");
    for (std::size_t k = 0; k < 4; ++k) {
        if (!parse_int(parts[k + 1], e.args[k]) || e.args[k] < kWildcard) {
            throw MalformedEntry("bad argument a" + std::to_string(k) + " in '" + std::string(text) + "'");
        }
    }
    return e;
}

std::string TemplateEntry::str() const {
    std::string out = std::to_string(syscall);
    for (auto a : args) out += ":" + std::to_string(a);
    return out;
}

Template parse_template_file(std::string_view text) {
    std::vector<std::string_view> lines;
    std::size_t pos = 0;
    while (pos <= text.size()) {
        auto nl = text.find('\n', pos);
        if (nl == std::string_view::npos) nl = text.size();
        lines.push_back(trim(text.substr(pos, nl - pos)));
        pos = nl + 1;
    }
    while (!lines.empty() && lines.back().empty()) lines.pop_back();
    if (lines.size() < 4) throw MalformedEntry("template file needs name, count, runtime and inter-arrival lines");

    Template t;
    t.name = std::string(lines[0]);
    if (t.name.empty()) throw MalformedEntry("template name is empty");
    std::size_t count = 0;
    if (!parse_int(lines[1], count)) throw MalformedEntry("bad syscall count '" + std::string(lines[1]) + "'");
    if (!parse_int(lines[2], t.expected_runtime_ns)) throw MalformedEntry("bad expected runtime");
    if (!parse_int(lines[3], t.expected_interarrival_ns)) throw MalformedEntry("bad expected inter-arrival");
    for (std::size_t i = 4; i < lines.size(); ++i) {
        t.entries.push_back(TemplateEntry::parse(lines[i]));
    }
    if (t.entries.size() != count) {
        throw CountMismatch("template " + t.name + " declares " + std::to_string(count) + " syscalls but lists " +
                            std::to_string(t.entries.size()));
    }
    if (t.entries.empty()) throw CountMismatch("template " + t.name + " has no entries");
    return t;
}

std::string serialize_template(const Template& t) {
    std::string out;
    out += t.name + "\n";
    out += std::to_string(t.entries.size()) + "\n";
    out += std::to_string(t.expected_runtime_ns) + "\n";
    out += std::to_string(t.expected_interarrival_ns) + "\n";
    for (const auto& e : t.entries) out += e.str() + "\n";
    return out;
}

bool entry_matches(const TemplateEntry& entry, const AuditRecord& record) noexcept {
    if (!record.syscall.known() || *record.syscall != entry.syscall) return false;
    for (std::size_t k = 0; k < 4; ++k) {
        if (entry.args[k] == kWildcard) continue;
        const auto& a = record.args[k];
        if (!a.known() || *a != static_cast<std::uint64_t>(entry.args[k])) return false;
    }
    return true;
}

bool TaskBinding::matches(const AuditRecord& record) const {
    if (explicit_ids()) {
        if (pid && (!record.ids.pid.known() || *record.ids.pid != *pid)) return false;
        if (tid && (!record.ids.tid.known() || *record.ids.tid != *tid)) return false;
        return true;
    }
    return record.ids.comm && unquote(*record.ids.comm) == comm;
}

std::string TaskBinding::label() const {
    std::string out = comm;
    if (pid) out += " pid=" + std::to_string(*pid);
    if (tid) out += " tid=" + std::to_string(*tid);
    return out;
}

void TemplateSet::add(const TaskBinding& binding, Template t) {
    if (by_name(t.name)) throw DuplicateName("template name '" + t.name + "' loaded twice");
    auto it = std::find_if(tasks_.begin(), tasks_.end(), [&](const TaskTemplates& tt) { return tt.binding == binding; });
    if (it == tasks_.end()) {
        tasks_.push_back({binding, {}});
        it = std::prev(tasks_.end());
    }
    it->templates.push_back(std::move(t));
}

const TaskTemplates* TemplateSet::find(const AuditRecord& record) const {
    for (const auto& tt : tasks_) {
        if (tt.binding.explicit_ids() && tt.binding.matches(record)) return &tt;
    }
    for (const auto& tt : tasks_) {
        if (!tt.binding.explicit_ids() && tt.binding.matches(record)) return &tt;
    }
    return nullptr;
}

const TaskTemplates* TemplateSet::find(const TaskBinding& binding) const {
    for (const auto& tt : tasks_) {
        if (tt.binding == binding) return &tt;
    }
    return nullptr;
}

const Template* TemplateSet::by_name(std::string_view name) const {
    for (const auto& tt : tasks_) {
        for (const auto& t : tt.templates) {
            if (t.name == name) return &t;
        }
    }
    return nullptr;
}

std::size_t TemplateSet::template_count() const noexcept {
    std::size_t n = 0;
    for (const auto& tt : tasks_) n += tt.templates.size();
    return n;
}

std::uint64_t memory_cost(std::span<const Template> templates, const MemoryCostModel& model) {
    std::uint64_t entries = 0;
    for (const auto& t : templates) entries += t.length();
    return model.fixed_per_template * templates.size() + model.per_syscall * entries;
}

std::uint64_t memory_cost(const TemplateSet& set, const TaskBinding& task, const MemoryCostModel& model) {
    const auto* tt = set.find(task);
    if (!tt) return 0;
    return memory_cost(std::span<const Template>(tt->templates), model);
}

TemplateSet load_template_dir(const std::filesystem::path& dir) {
    namespace fs = std::filesystem;
    if (!fs::is_directory(dir)) throw Error("template directory " + dir.string() + " does not exist");
    TemplateSet set;
    auto manifest = dir / "manifest.json";
    if (fs::exists(manifest)) {
        try {
            const auto j = nlohmann::json::parse(read_file(manifest));
            for (const auto& task : j.at("tasks")) {
                TaskBinding b;
                b.comm = task.value("comm", "");
                if (task.contains("pid")) b.pid = task.at("pid").get<std::uint64_t>();
                if (task.contains("tid")) b.tid = task.at("tid").get<std::uint64_t>();
                for (const auto& file : task.at("templates")) {
                    set.add(b, parse_template_file(read_file(dir / file.get<std::string>())));
                }
            }
        } catch (const nlohmann::json::exception& e) {
            throw Error("manifest.json: " + std::string(e.what()));
        }
        return set;
    }
    std::vector<fs::path> files;
    for (const auto& entry : fs::directory_iterator(dir)) {
        if (entry.is_regular_file() && entry.path().extension() == ".tpl") files.push_back(entry.path());
    }
    std::sort(files.begin(), files.end());
    for (const auto& f : files) {
        auto t = parse_template_file(read_file(f));
        TaskBinding b{t.name, std::nullopt, std::nullopt};
        set.add(b, std::move(t));
    }
    return set;
}

void write_template_dir(const TemplateSet& set, const std::filesystem::path& dir) {
    std::filesystem::create_directories(dir);
    nlohmann::json manifest;
    manifest["schema_version"] = 1;
    manifest["tasks"] = nlohmann::json::array();
    for (const auto& tt : set.tasks()) {
        nlohmann::json task;
        task["comm"] = tt.binding.comm;
        if (tt.binding.pid) task["pid"] = *tt.binding.pid;
        if (tt.binding.tid) task["tid"] = *tt.binding.tid;
        task["templates"] = nlohmann::json::array();
        for (const auto& t : tt.templates) {
            auto file = t.name + ".tpl";
            std::ofstream out(dir / file, std::ios::binary);
            if (!out) throw Error("cannot write " + (dir / file).string());
            out << serialize_template(t);
            task["templates"].push_back(file);
        }
        manifest["tasks"].push_back(task);
    }
    std::ofstream out(dir / "manifest.json", std::ios::binary);
    if (!out) throw Error("cannot write manifest.json");
    out << manifest.dump(2) << "\n";
}

}  // namespace ellipsis
