#include "ellipsis/json_io.hpp"

#include <fstream>
#include <sstream>

namespace ellipsis {

namespace {

std::uint64_t get_u64(const json& v) {
    if (v.is_string()) {
        const auto s = v.get<std::string>();
        std::size_t used = 0;
        const auto value = std::stoull(s, &used, 16);
        if (used != s.size()) throw SpecInvalid("bad hex value '" + s + "'");
        return value;
    }
    if (!v.is_number_unsigned() && !(v.is_number_integer() && v.get<std::int64_t>() >= 0)) {
        throw SpecInvalid("expected a non-negative integer, got " + v.dump());
    }
    return v.get<std::uint64_t>();
}

std::uint64_t opt_u64(const json& j, const char* key, std::uint64_t fallback) {
    return j.contains(key) ? get_u64(j.at(key)) : fallback;
}

std::vector<TemplateEntry> entries_from_json(const json& j) {
    std::vector<TemplateEntry> out;
    for (const auto& e : j) {
        try {
            out.push_back(TemplateEntry::parse(e.get<std::string>()));
        } catch (const MalformedEntry& ex) {
            throw SpecInvalid(ex.what());
        }
    }
    return out;
}

template <typename F>
auto guarded(const char* what, F&& f) {
    try {
        return f();
    } catch (const json::exception& e) {
        throw SpecInvalid(std::string(what) + ": " + e.what());
    } catch (const std::invalid_argument&) {
        throw SpecInvalid(std::string(what) + ": bad number");
    } catch (const std::out_of_range&) {
        throw SpecInvalid(std::string(what) + ": number out of range");
    }
}

json entries_to_json(const std::vector<TemplateEntry>& entries) {
    json a = json::array();
    for (const auto& e : entries) a.push_back(e.str());
    return a;
}

const char* mode_name(ReduceMode m) { return m == ReduceMode::EllipsisHP ? "hp" : "ellipsis"; }

}  // namespace

json read_json_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error("cannot read " + path.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    try {
        return json::parse(ss.str());
    } catch (const json::exception& e) {
        throw Error(path.string() + ": " + e.what());
    }
}

void write_json_file(const std::filesystem::path& path, const json& value) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error("cannot write " + path.string());
    out << value.dump(2) << "\n";
}

WorkloadSpec workload_spec_from_json(const json& j) {
    return guarded("workload spec", [&] {
        WorkloadSpec s;
        s.seed = opt_u64(j, "seed", s.seed);
        s.epoch_ns = opt_u64(j, "epoch_ns", s.epoch_ns);
        s.emit_boundaries = j.value("emit_boundaries", s.emit_boundaries);
        s.arch = opt_u64(j, "arch", s.arch);
        s.per = opt_u64(j, "per", s.per);
        s.first_serial = opt_u64(j, "first_serial", s.first_serial);
        if (j.contains("pad_records_to_bytes") && !j.at("pad_records_to_bytes").is_null()) {
            s.pad_records_to_bytes = get_u64(j.at("pad_records_to_bytes"));
        }
        for (const auto& tj : j.at("tasks")) {
            TaskSpec t;
            t.comm = tj.at("comm").get<std::string>();
            t.exe = tj.value("exe", "/usr/bin/" + t.comm);
            t.pid = get_u64(tj.at("pid"));
            t.tid = opt_u64(tj, "tid", t.pid);
            t.ppid = opt_u64(tj, "ppid", t.ppid);
            t.init_records = opt_u64(tj, "init_records", 0);
            t.period_ns = get_u64(tj.at("period_ns"));
            t.jitter_ns = opt_u64(tj, "jitter_ns", 0);
            t.iterations = get_u64(tj.at("iterations"));
            t.boundary_syscall = opt_u64(tj, "boundary_syscall", t.boundary_syscall);
            t.start_offset_ns = opt_u64(tj, "start_offset_ns", 0);
            for (const auto& qj : tj.at("sequences")) {
                SequenceSpec q;
                q.entries = entries_from_json(qj.at("entries"));
                q.probability = qj.value("probability", 1.0);
                q.duration_ns = get_u64(qj.at("duration_ns"));
                q.duration_jitter_ns = opt_u64(qj, "duration_jitter_ns", 0);
                q.outlier_probability = qj.value("outlier_probability", 0.0);
                q.outlier_extra_ns = opt_u64(qj, "outlier_extra_ns", 0);
                t.sequences.push_back(std::move(q));
            }
            s.tasks.push_back(std::move(t));
        }
        s.validate();
        return s;
    });
}

json workload_spec_to_json(const WorkloadSpec& s) {
    json j;
    j["schema_version"] = kSchemaVersion;
    j["seed"] = s.seed;
    j["epoch_ns"] = s.epoch_ns;
    j["emit_boundaries"] = s.emit_boundaries;
    j["arch"] = s.arch;
    j["per"] = s.per;
    j["first_serial"] = s.first_serial;
    if (s.pad_records_to_bytes) j["pad_records_to_bytes"] = *s.pad_records_to_bytes;
    j["tasks"] = json::array();
    for (const auto& t : s.tasks) {
        json tj{{"comm", t.comm},           {"exe", t.exe},
                {"pid", t.pid},             {"tid", t.tid},
                {"ppid", t.ppid},           {"init_records", t.init_records},
                {"period_ns", t.period_ns}, {"jitter_ns", t.jitter_ns},
                {"iterations", t.iterations}, {"boundary_syscall", t.boundary_syscall},
                {"start_offset_ns", t.start_offset_ns}};
        tj["sequences"] = json::array();
        for (const auto& q : t.sequences) {
            tj["sequences"].push_back({{"entries", entries_to_json(q.entries)},
                                       {"probability", q.probability},
                                       {"duration_ns", q.duration_ns},
                                       {"duration_jitter_ns", q.duration_jitter_ns},
                                       {"outlier_probability", q.outlier_probability},
                                       {"outlier_extra_ns", q.outlier_extra_ns}});
        }
        j["tasks"].push_back(std::move(tj));
    }
    return j;
}

AnomalySpec anomaly_spec_from_json(const json& j) {
    return guarded("anomaly spec", [&] {
        AnomalySpec a;
        a.records = entries_from_json(j.at("records"));
        a.at_ns = get_u64(j.at("at_ns"));
        a.spacing_ns = opt_u64(j, "spacing_ns", a.spacing_ns);
        if (j.contains("target_comm")) a.target_comm = j.at("target_comm").get<std::string>();
        a.pid = opt_u64(j, "pid", a.pid);
        a.tid = opt_u64(j, "tid", a.pid);
        a.comm = j.value("comm", a.comm);
        a.exe = j.value("exe", a.exe);
        a.validate();
        return a;
    });
}

std::vector<TaskParams> task_params_from_json(const json& j) {
    return guarded("task params", [&] {
        std::vector<TaskParams> out;
        auto one = [&](const json& tj) {
            TaskParams tp;
            tp.name = tj.value("name", "");
            tp.iterations = tj.at("I").get<double>();
            tp.lengths = tj.at("len").get<std::vector<double>>();
            tp.probabilities = tj.at("p").get<std::vector<double>>();
            tp.init_events = tj.value("f", 0.0);
            tp.selected = tj.value("n", std::size_t{1});
            tp.raw_record_bytes = tj.value("B_A", tp.raw_record_bytes);
            tp.template_record_bytes = tj.value("B_E", tp.template_record_bytes);
            try {
                tp.validate();
            } catch (const InvariantViolation& e) {
                throw SpecInvalid(e.what());
            }
            out.push_back(std::move(tp));
        };
        if (j.contains("tasks")) {
            for (const auto& tj : j.at("tasks")) one(tj);
        } else {
            one(j);
        }
        return out;
    });
}

BufferConfig buffer_config_from_json(const json& j) {
    return guarded("buffer config", [&] {
        BufferConfig c;
        c.capacity = opt_u64(j, "capacity", c.capacity);
        c.drain_period_ns = opt_u64(j, "drain_period_ns", c.drain_period_ns);
        c.drain_burst = opt_u64(j, "drain_burst", c.drain_burst);
        c.drain_jitter_ns = opt_u64(j, "drain_jitter_ns", c.drain_jitter_ns);
        c.seed = opt_u64(j, "seed", c.seed);
        try {
            c.validate();
        } catch (const InvariantViolation& e) {
            throw SpecInvalid(e.what());
        }
        return c;
    });
}

json to_json(const ReduceCounters& c) {
    return {{"schema_version", kSchemaVersion},
            {"events_in", c.events_in},
            {"events_out", c.events_out},
            {"bytes_in", c.bytes_in},
            {"bytes_out", c.bytes_out},
            {"raw_out", c.raw_out},
            {"template_records", c.template_records},
            {"covered_events", c.covered_events},
            {"passthrough", c.passthrough},
            {"matches", c.matches},
            {"failures", c.failures},
            {"temporal_failures", c.temporal_failures},
            {"max_comparisons_per_step", c.max_comparisons_per_step},
            {"total_comparisons", c.total_comparisons}};
}

ReduceCounters counters_from_json(const json& j) {
    return guarded("counters", [&] {
        ReduceCounters c;
        c.events_in = opt_u64(j, "events_in", 0);
        c.events_out = opt_u64(j, "events_out", 0);
        c.bytes_in = opt_u64(j, "bytes_in", 0);
        c.bytes_out = opt_u64(j, "bytes_out", 0);
        c.raw_out = opt_u64(j, "raw_out", 0);
        c.template_records = opt_u64(j, "template_records", 0);
        c.covered_events = opt_u64(j, "covered_events", 0);
        c.passthrough = opt_u64(j, "passthrough", 0);
        c.matches = opt_u64(j, "matches", 0);
        c.failures = opt_u64(j, "failures", 0);
        c.temporal_failures = opt_u64(j, "temporal_failures", 0);
        c.max_comparisons_per_step = opt_u64(j, "max_comparisons_per_step", 0);
        c.total_comparisons = opt_u64(j, "total_comparisons", 0);
        return c;
    });
}

json to_json(const std::vector<TaskStatistics>& stats) {
    json tasks = json::array();
    for (const auto& t : stats) {
        json seqs = json::array();
        for (const auto& q : t.sequences) {
            seqs.push_back({{"len", q.length()},
                            {"p", q.probability},
                            {"count", q.count},
                            {"low_support", q.low_support},
                            {"entries", entries_to_json(q.sequence)}});
        }
        tasks.push_back({{"comm", t.comm},
                         {"N", t.distinct()},
                         {"I", t.iterations},
                         {"f", t.init_records},
                         {"sequences", std::move(seqs)}});
    }
    return {{"schema_version", kSchemaVersion}, {"tasks", std::move(tasks)}};
}

json to_json(const SimResult& r) {
    return {{"schema_version", kSchemaVersion},
            {"offered", r.offered},
            {"delivered", r.delivered},
            {"lost_events", r.lost_events},
            {"max_occupancy", r.max_occupancy}};
}

json to_json(const RetentionReport& r) {
    return {{"schema_version", kSchemaVersion},
            {"ok", true},
            {"original_events", r.original_events},
            {"reconstructed_events", r.reconstructed_events},
            {"raw_exact", r.raw_exact},
            {"synthesized", r.synthesized},
            {"exact_timestamps", r.exact_timestamps},
            {"ranged_timestamps", r.ranged_timestamps},
            {"lost_serials", r.lost_serials},
            {"lost_arguments", r.lost_arguments},
            {"lost_success", r.lost_success},
            {"lost_exit", r.lost_exit},
            {"lost_items", r.lost_items},
            {"lost_extras", r.lost_extras},
            {"interleaving_lost", r.interleaving_lost}};
}

json to_json(const ComparisonReport& r) {
    json rows = json::array();
    for (const auto& c : r.rows) {
        rows.push_back({{"quantity", c.quantity},
                        {"predicted", c.predicted},
                        {"measured", c.measured},
                        {"relative_error", c.relative_error},
                        {"within_tolerance", c.within_tolerance}});
    }
    return {{"schema_version", kSchemaVersion},
            {"mode", mode_name(r.mode)},
            {"tolerance", r.tolerance},
            {"ok", r.ok()},
            {"rows", std::move(rows)}};
}

}  // namespace ellipsis
