#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include <CLI11.hpp>

#include "ellipsis/analytics.hpp"
#include "ellipsis/audit_record.hpp"
#include "ellipsis/buffer_sim.hpp"
#include "ellipsis/errors.hpp"
#include "ellipsis/json_io.hpp"
#include "ellipsis/learner.hpp"
#include "ellipsis/reconstruct.hpp"
#include "ellipsis/reducer.hpp"
#include "ellipsis/template.hpp"
#include "ellipsis/workload_gen.hpp"

namespace fs = std::filesystem;
using namespace ellipsis;

namespace {

enum Exit { kOk = 0, kConfig = 2, kInput = 3, kVerify = 4 };

// Thrown for problems with flags or config files rather than input data.
struct ConfigError : Error {
    using Error::Error;
};

int log_level() {
    static const int level = [] {
        const char* v = std::getenv("ELLIPSIS_LOG");
        if (!v) return 1;
        const std::string_view s(v);
        if (s == "quiet" || s == "0") return 0;
        if (s == "debug" || s == "2") return 2;
        return 1;
    }();
    return level;
}

void info(const std::string& msg) {
    if (log_level() >= 1) std::cerr << "ellipsis: " << msg << "\n";
}

void debug(const std::string& msg) {
    if (log_level() >= 2) std::cerr << "ellipsis: " << msg << "\n";
}

std::string read_text(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    if (!in) throw Error("cannot read " + p.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void write_text(const fs::path& p, const std::string& text) {
    std::ofstream out(p, std::ios::binary);
    if (!out) throw Error("cannot write " + p.string());
    out << text;
}

std::vector<AuditRecord> read_log(const fs::path& p) {
    auto records = parse_log(read_text(p));
    debug("read " + std::to_string(records.size()) + " records from " + p.string());
    return records;
}

json read_config(const fs::path& p) {
    try {
        return read_json_file(p);
    } catch (const Error& e) {
        throw ConfigError(e.what());
    }
}

ReduceMode parse_mode(const std::string& s) {
    if (s == "ellipsis") return ReduceMode::Ellipsis;
    if (s == "hp") return ReduceMode::EllipsisHP;
    throw ConfigError("unknown mode '" + s + "'");
}

BoundarySet parse_boundaries(const std::string& list) {
    BoundarySet out;
    std::stringstream ss(list);
    std::string item;
    while (std::getline(ss, item, ',')) {
        if (item.empty()) continue;
        std::size_t used = 0;
        try {
            out.insert(std::stoull(item, &used, 10));
        } catch (const std::exception&) {
            used = 0;
        }
        if (used != item.size()) throw ConfigError("bad boundary syscall '" + item + "'");
    }
    if (out.empty()) throw ConfigError("empty boundary list");
    return out;
}

// ---- generate --------------------------------------------------------------

struct GenerateArgs {
    std::string spec;
    std::string out;
    std::optional<std::uint64_t> seed;
    std::optional<std::uint64_t> iterations;
    std::optional<std::uint64_t> pad;
    std::optional<bool> boundaries;
    std::vector<std::string> anomalies;
};

int run_generate(const GenerateArgs& a) {
    WorkloadSpec spec;
    try {
        spec = workload_spec_from_json(read_config(a.spec));
        if (a.seed) spec.seed = *a.seed;
        if (a.iterations) {
            for (auto& t : spec.tasks) t.iterations = *a.iterations;
        }
        if (a.pad) spec.pad_records_to_bytes = *a.pad;
        if (a.boundaries) spec.emit_boundaries = *a.boundaries;
        spec.validate();
    } catch (const SpecInvalid& e) {
        throw ConfigError(e.what());
    }
    auto records = generate(spec);
    for (const auto& path : a.anomalies) {
        AnomalySpec anomaly;
        try {
            anomaly = anomaly_spec_from_json(read_config(path));
        } catch (const SpecInvalid& e) {
            throw ConfigError(e.what());
        }
        records = inject(records, anomaly);
    }
    write_text(a.out, serialize_log(records));
    info("generated " + std::to_string(records.size()) + " records");
    return kOk;
}

// ---- learn -----------------------------------------------------------------

struct LearnArgs {
    std::string trace;
    std::string profile;
    std::string out_dir;
    std::size_t top_n = 1;
    std::string policy = "max";
    std::string boundaries;
    bool include_low_support = false;
};

int run_learn(const LearnArgs& a) {
    LearnOptions opts;
    try {
        opts.policy = TemporalPolicy::parse(a.policy);
    } catch (const Error& e) {
        throw ConfigError(e.what());
    }
    opts.top_n = a.top_n;
    opts.include_low_support = a.include_low_support;
    const auto records = read_log(a.trace);
    if (!a.boundaries.empty()) {
        opts.boundaries = parse_boundaries(a.boundaries);
    } else {
        std::uint64_t arch = 0x40000028;
        for (const auto& r : records) {
            if (r.arch.known()) {
                arch = *r.arch;
                break;
            }
        }
        opts.boundaries = default_boundaries(arch);
    }
    LearnResult result;
    if (a.profile.empty()) {
        result = learn(records, opts);
    } else {
        const auto profiling = read_log(a.profile);
        result = learn(records, profiling, opts);
    }
    write_template_dir(result.templates, a.out_dir);
    write_json_file(fs::path(a.out_dir) / "stats.json", to_json(result.stats));
    info("learned " + std::to_string(result.templates.template_count()) + " templates for " +
         std::to_string(result.stats.size()) + " tasks");
    return kOk;
}

// ---- reduce ----------------------------------------------------------------

struct ReduceArgs {
    std::string in;
    std::string templates;
    std::string mode = "ellipsis";
    std::string out;
    std::string counters;
    bool no_runtime = false;
    bool no_interarrival = false;
};

int run_reduce(const ReduceArgs& a) {
    ReducerOptions opts;
    opts.mode = parse_mode(a.mode);
    opts.enforce_runtime = !a.no_runtime;
    opts.enforce_interarrival = !a.no_interarrival;
    const auto set = load_template_dir(a.templates);
    const auto records = read_log(a.in);
    const auto result = reduce_stream(records, set, opts);
    write_text(a.out, serialize_log(result.records));
    if (!a.counters.empty()) write_json_file(a.counters, to_json(result.counters));
    const auto& c = result.counters;
    info("reduced " + std::to_string(c.events_in) + " events to " + std::to_string(c.events_out) + " (" +
         std::to_string(c.bytes_in) + " -> " + std::to_string(c.bytes_out) + " bytes)");
    return kOk;
}

// ---- reconstruct -----------------------------------------------------------

struct ReconstructArgs {
    std::string in;
    std::string templates;
    std::string out;
    std::string verify_against;
    std::string report;
    bool synthesize_serials = false;
};

int run_reconstruct(const ReconstructArgs& a) {
    const auto set = load_template_dir(a.templates);
    const auto reduced = read_log(a.in);
    ReconstructOptions opts;
    opts.synthesize_serials = a.synthesize_serials;
    write_text(a.out, serialize_log(reconstruct(reduced, set, opts)));
    if (a.verify_against.empty()) return kOk;

    const auto original = read_log(a.verify_against);
    json report;
    int code = kOk;
    try {
        report = to_json(verify_retention(original, reduced, set));
        info("retention verified");
    } catch (const RetentionViolation& e) {
        report = {{"schema_version", kSchemaVersion}, {"ok", false}, {"index", e.index()}, {"error", e.what()}};
        std::cerr << "ellipsis: retention violation: " << e.what() << "\n";
        code = kVerify;
    }
    if (a.report.empty()) std::cout << report.dump(2) << "\n";
    else write_json_file(a.report, report);
    return code;
}

// ---- simulate --------------------------------------------------------------

struct SimulateArgs {
    std::string arrivals;
    std::string from_log;
    std::string config;
    std::optional<std::uint64_t> capacity;
    std::optional<std::uint64_t> drain_period;
    std::optional<std::uint64_t> drain_burst;
    std::optional<std::uint64_t> drain_jitter;
    std::optional<std::uint64_t> seed;
    std::string samples;
    std::uint64_t sample_period = 1'000'000;
    std::string out;
    bool min_capacity = false;
};

int run_simulate(const SimulateArgs& a) {
    BufferConfig cfg;
    try {
        if (!a.config.empty()) cfg = buffer_config_from_json(read_config(a.config));
    } catch (const SpecInvalid& e) {
        throw ConfigError(e.what());
    }
    if (a.capacity) cfg.capacity = *a.capacity;
    if (a.drain_period) cfg.drain_period_ns = *a.drain_period;
    if (a.drain_burst) cfg.drain_burst = *a.drain_burst;
    if (a.drain_jitter) cfg.drain_jitter_ns = *a.drain_jitter;
    if (a.seed) cfg.seed = *a.seed;
    try {
        cfg.validate();
    } catch (const InvariantViolation& e) {
        throw ConfigError(e.what());
    }

    std::vector<std::uint64_t> arrivals;
    if (!a.from_log.empty()) {
        for (const auto& r : read_log(a.from_log)) arrivals.push_back(r.time_ns());
    } else {
        std::istringstream in(read_text(a.arrivals));
        std::string line;
        std::size_t n = 0;
        while (std::getline(in, line)) {
            ++n;
            if (line.empty() || line[0] == '#') continue;
            std::size_t used = 0;
            try {
                arrivals.push_back(std::stoull(line, &used));
            } catch (const std::exception&) {
                used = 0;
            }
            if (used != line.size()) throw Error("arrivals line " + std::to_string(n) + ": not an integer");
        }
    }
    if (!std::is_sorted(arrivals.begin(), arrivals.end())) throw Error("arrival times are not sorted");

    const auto result = simulate(arrivals, cfg, a.samples.empty() ? 0 : a.sample_period);
    auto j = to_json(result);
    j["capacity"] = cfg.capacity;
    if (a.min_capacity) j["min_capacity_for_lossless"] = min_capacity_for_lossless(arrivals, cfg);
    if (a.out.empty()) std::cout << j.dump(2) << "\n";
    else write_json_file(a.out, j);
    if (!a.samples.empty()) {
        std::string csv = "t_ns,occupancy\n";
        for (const auto& [t, occ] : result.occupancy_samples) csv += std::to_string(t) + "," + std::to_string(occ) + "\n";
        write_text(a.samples, csv);
    }
    return kOk;
}

// ---- analyze ---------------------------------------------------------------

struct AnalyzeArgs {
    std::string params;
    std::string counters;
    std::string mode = "ellipsis";
    std::string task;
    std::string out;
    double tolerance = 0.03;
    bool compare_bytes = false;
};

int run_analyze(const AnalyzeArgs& a) {
    std::vector<TaskParams> tasks;
    try {
        tasks = task_params_from_json(read_config(a.params));
    } catch (const SpecInvalid& e) {
        throw ConfigError(e.what());
    }
    const auto mode = parse_mode(a.mode);

    json out;
    out["schema_version"] = kSchemaVersion;
    out["tasks"] = json::array();
    bool identities_ok = true;
    std::printf("%-16s %12s %12s %12s %12s %16s %16s %16s\n", "task", "E_A", "E_E", "reduction", "E_HP_best", "L_A",
                "L_E", "L_HP_best");
    for (const auto& tp : tasks) {
        const double ea = events_audit(tp), ee = events_ellipsis(tp), red = event_reduction(tp);
        const double la = log_size_audit(tp), le = log_size_ellipsis(tp), sred = size_reduction(tp);
        const double ehp = events_hp_best(tp), lhp = log_size_hp_best(tp);
        auto close = [](double x, double y) { return std::abs(x - y) <= 1e-6 * std::max({std::abs(x), std::abs(y), 1.0}); };
        const bool ids = close(red, ea - ee) && close(sred, la - le);
        identities_ok = identities_ok && ids;
        std::printf("%-16s %12.2f %12.2f %12.2f %12.2f %16.0f %16.0f %16.0f\n", tp.name.c_str(), ea, ee, red, ehp, la,
                    le, lhp);
        out["tasks"].push_back({{"name", tp.name},
                                {"E_A", ea},
                                {"E_E", ee},
                                {"event_reduction", red},
                                {"L_A", la},
                                {"L_E", le},
                                {"size_reduction", sred},
                                {"E_HP_best", ehp},
                                {"L_HP_best", lhp},
                                {"identities_ok", ids}});
    }
    out["identities_ok"] = identities_ok;
    int code = identities_ok ? kOk : kVerify;

    if (!a.counters.empty()) {
        const TaskParams* chosen = nullptr;
        if (!a.task.empty()) {
            for (const auto& tp : tasks) {
                if (tp.name == a.task) chosen = &tp;
            }
            if (!chosen) throw ConfigError("no task named '" + a.task + "' in " + a.params);
        } else if (tasks.size() == 1) {
            chosen = &tasks.front();
        } else {
            throw ConfigError("--task is required when the params file has several tasks");
        }
        ReduceCounters measured;
        try {
            measured = counters_from_json(read_config(a.counters));
        } catch (const SpecInvalid& e) {
            throw ConfigError(e.what());
        }
        const auto report = compare(*chosen, measured, mode, a.tolerance, a.compare_bytes);
        for (const auto& row : report.rows) {
            std::printf("%-28s predicted %14.2f measured %14.2f rel.err %.4f %s\n", row.quantity.c_str(),
                        row.predicted, row.measured, row.relative_error, row.within_tolerance ? "ok" : "MISMATCH");
        }
        out["comparison"] = to_json(report);
        if (!report.ok()) code = kVerify;
    }
    if (!a.out.empty()) write_json_file(a.out, out);
    return code;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Syscall audit log reduction with learned task templates"};
    app.require_subcommand(1);

    GenerateArgs gen;
    auto* g = app.add_subcommand("generate", "Generate a synthetic audit log from a workload spec");
    g->add_option("--spec", gen.spec, "Workload spec (JSON)")->required();
    g->add_option("--out", gen.out, "Output audit log")->required();
    g->add_option("--seed", gen.seed, "Override the spec seed");
    g->add_option("--iterations", gen.iterations, "Override every task's iteration count");
    g->add_option("--pad", gen.pad, "Pad records to about this many bytes");
    g->add_option("--boundaries", gen.boundaries, "Emit boundary syscalls (true/false)");
    g->add_option("--anomaly", gen.anomalies, "Anomaly spec (JSON) to inject; repeatable");

    LearnArgs lrn;
    auto* l = app.add_subcommand("learn", "Learn templates from a profiling trace");
    l->add_option("--trace", lrn.trace, "Profiling trace")->required();
    l->add_option("--profile", lrn.profile, "Separate trace for temporal profiling");
    l->add_option("--out-dir", lrn.out_dir, "Directory for templates and stats.json")->required();
    l->add_option("--top-n", lrn.top_n, "Templates per task")->capture_default_str();
    l->add_option("--policy", lrn.policy, "none, max or musigma:K")->capture_default_str();
    l->add_option("--boundaries", lrn.boundaries, "Comma-separated boundary syscall numbers");
    l->add_flag("--include-low-support", lrn.include_low_support, "Allow sequences seen only once");

    ReduceArgs red;
    auto* r = app.add_subcommand("reduce", "Reduce an audit log with templates");
    r->add_option("--in", red.in, "Input audit log")->required();
    r->add_option("--templates", red.templates, "Template directory")->required();
    r->add_option("--mode", red.mode, "ellipsis or hp")->capture_default_str();
    r->add_option("--out", red.out, "Reduced log")->required();
    r->add_option("--counters", red.counters, "Counters JSON");
    r->add_flag("--no-runtime", red.no_runtime, "Ignore runtime bounds");
    r->add_flag("--no-interarrival", red.no_interarrival, "Ignore inter-arrival bounds");

    ReconstructArgs rec;
    auto* c = app.add_subcommand("reconstruct", "Expand template records back into syscall records");
    c->add_option("--in", rec.in, "Reduced log")->required();
    c->add_option("--templates", rec.templates, "Template directory")->required();
    c->add_option("--out", rec.out, "Expanded log")->required();
    c->add_option("--verify-against", rec.verify_against, "Original log to verify retention against");
    c->add_option("--report", rec.report, "Retention report JSON (default: stdout)");
    c->add_flag("--synthesize-serials", rec.synthesize_serials, "Number reconstructed records");

    SimulateArgs sim;
    auto* s = app.add_subcommand("simulate", "Simulate the kernel audit backlog");
    auto* arr = s->add_option("--arrivals", sim.arrivals, "Arrival times, one ns value per line");
    auto* fl = s->add_option("--from-log", sim.from_log, "Use the record times of an audit log");
    arr->excludes(fl);
    s->add_option("--config", sim.config, "Buffer config (JSON)");
    s->add_option("--capacity", sim.capacity, "Buffer capacity in events");
    s->add_option("--drain-period", sim.drain_period, "Drain period (ns)");
    s->add_option("--drain-burst", sim.drain_burst, "Events drained per tick");
    s->add_option("--drain-jitter", sim.drain_jitter, "Drain tick jitter (ns)");
    s->add_option("--seed", sim.seed, "Jitter seed");
    s->add_option("--samples", sim.samples, "Occupancy CSV");
    s->add_option("--sample-period", sim.sample_period, "Sampling period (ns)")->capture_default_str();
    s->add_option("--out", sim.out, "SimResult JSON (default: stdout)");
    s->add_flag("--min-capacity", sim.min_capacity, "Also report the smallest lossless capacity");

    AnalyzeArgs ana;
    auto* an = app.add_subcommand("analyze", "Evaluate the closed-form event and size models");
    an->add_option("--params", ana.params, "Task parameters (JSON)")->required();
    an->add_option("--counters", ana.counters, "Measured counters JSON from reduce");
    an->add_option("--mode", ana.mode, "ellipsis or hp")->capture_default_str();
    an->add_option("--task", ana.task, "Task to compare against the counters");
    an->add_option("--tolerance", ana.tolerance, "Relative tolerance")->capture_default_str();
    an->add_flag("--compare-bytes", ana.compare_bytes, "Also compare log sizes");
    an->add_option("--out", ana.out, "Analysis JSON");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? kOk : kConfig;
    }
    if (*s && sim.arrivals.empty() && sim.from_log.empty()) {
        std::cerr << "ellipsis: simulate needs --arrivals or --from-log\n";
        return kConfig;
    }

    try {
        if (*g) return run_generate(gen);
        if (*l) return run_learn(lrn);
        if (*r) return run_reduce(red);
        if (*c) return run_reconstruct(rec);
        if (*s) return run_simulate(sim);
        if (*an) return run_analyze(ana);
    } catch (const ConfigError& e) {
        std::cerr << "ellipsis: " << e.what() << "\n";
        return kConfig;
    } catch (const SpecInvalid& e) {
        std::cerr << "ellipsis: " << e.what() << "\n";
        return kConfig;
    } catch (const RetentionViolation& e) {
        std::cerr << "ellipsis: " << e.what() << "\n";
        return kVerify;
    } catch (const std::exception& e) {
        std::cerr << "ellipsis: " << e.what() << "\n";
        return kInput;
    }
    return kOk;
}
