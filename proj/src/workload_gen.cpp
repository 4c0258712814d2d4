#include "ellipsis/workload_gen.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

namespace ellipsis {

namespace {

constexpr std::uint64_t kInitSpacingNs = 1000;
constexpr std::uint64_t kInitSyscalls[] = {5, 192, 54, 6, 322};  // open, mmap2, ioctl, close, openat

struct TaskGenerator {
    const WorkloadSpec& spec;
    const TaskSpec& task;
    std::mt19937_64 rng;
    std::string exe;

    TaskGenerator(const WorkloadSpec& s, const TaskSpec& t, std::size_t index)
        : spec(s), task(t), rng(s.seed ^ (0x9E3779B97F4A7C15ULL * (index + 1))), exe(t.exe) {}

    std::uint64_t uniform(std::uint64_t lo, std::uint64_t hi) {
        return std::uniform_int_distribution<std::uint64_t>(lo, hi)(rng);
    }

    AuditRecord make(std::uint64_t syscall, const std::array<std::int64_t, 4>& args, std::uint64_t t_ns) {
        AuditRecord r;
        r.time = EventTime::exact(spec.epoch_ns + t_ns);
        r.serial = 0;
        r.arch = spec.arch;
        r.syscall = syscall;
        r.per = spec.per;
        r.success = true;
        for (std::size_t k = 0; k < 4; ++k) {
            if (args[k] >= 0) r.args[k] = static_cast<std::uint64_t>(args[k]);
            else if (k == 1) r.args[k] = uniform(0x100000, 0x1fffff);  // buffer address
            else r.args[k] = uniform(0, 15);
        }
        r.exit = static_cast<std::int64_t>(args[2] >= 0 ? args[2] : static_cast<std::int64_t>(uniform(0, 64)));
        r.items = 0;
        auto& id = r.ids;
        id.ppid = task.ppid;
        id.pid = task.pid;
        id.tid = task.tid;
        id.auid = 1000;
        id.uid = 0;
        id.gid = 0;
        id.euid = 0;
        id.suid = 0;
        id.fsuid = 0;
        id.egid = 0;
        id.sgid = 0;
        id.fsgid = 0;
        id.tty = "pts0";
        id.ses = "1";
        id.comm = quote(task.comm);
        id.exe = quote(exe);
        id.key = "(null)";
        return r;
    }

    void pad_exe(std::uint64_t target) {
        const auto& seq = *std::max_element(task.sequences.begin(), task.sequences.end(),
                                            [](const auto& a, const auto& b) { return a.probability < b.probability; });
        std::mt19937_64 saved = rng;
        const auto sample = record_size_bytes(make(seq.entries.front().syscall, seq.entries.front().args, 0));
        rng = saved;
        if (target <= sample) return;
        const auto pad = target - sample;
        // "/p...p" directory in front of the real path
        exe = "/" + std::string(pad - 1, 'p') + exe;
    }

    std::vector<AuditRecord> run(std::vector<std::size_t>& choices) {
        if (spec.pad_records_to_bytes) pad_exe(*spec.pad_records_to_bytes);
        std::vector<AuditRecord> out;
        std::uint64_t t = task.start_offset_ns;
        for (std::uint64_t i = 0; i < task.init_records; ++i) {
            const auto sc = kInitSyscalls[i % std::size(kInitSyscalls)];
            out.push_back(make(sc, {-1, -1, -1, -1}, t));
            t += kInitSpacingNs;
        }
        if (spec.emit_boundaries) {
            out.push_back(make(task.boundary_syscall, {0, -1, -1, -1}, t));
        }
        const std::uint64_t loop_base = t + kInitSpacingNs;

        std::vector<double> weights;
        for (const auto& s : task.sequences) weights.push_back(s.probability);
        std::discrete_distribution<std::size_t> pick(weights.begin(), weights.end());
        std::uniform_real_distribution<double> unit(0.0, 1.0);

        choices.reserve(task.iterations);
        for (std::uint64_t k = 0; k < task.iterations; ++k) {
            const auto start = loop_base + k * task.period_ns + (task.jitter_ns ? uniform(0, task.jitter_ns) : 0);
            const auto si = pick(rng);
            choices.push_back(si);
            const auto& seq = task.sequences[si];
            auto duration = seq.duration_ns + (seq.duration_jitter_ns ? uniform(0, seq.duration_jitter_ns) : 0);
            if (seq.outlier_probability > 0 && unit(rng) < seq.outlier_probability) duration += seq.outlier_extra_ns;
            const auto len = seq.entries.size();
            for (std::size_t j = 0; j < len; ++j) {
                const auto offset = len == 1 ? 0 : duration * j / (len - 1);
                out.push_back(make(seq.entries[j].syscall, seq.entries[j].args, start + offset));
            }
            if (spec.emit_boundaries) {
                out.push_back(make(task.boundary_syscall, {0, -1, -1, -1}, start + duration + 1));
            }
        }
        return out;
    }
};

}  // namespace

void WorkloadSpec::validate() const {
    if (tasks.empty()) throw SpecInvalid("workload has no tasks");
    for (const auto& t : tasks) {
        const auto where = "task '" + t.comm + "': ";
        if (t.comm.empty()) throw SpecInvalid("task without comm");
        if (t.sequences.empty()) throw SpecInvalid(where + "no sequences");
        double sum = 0;
        for (const auto& s : t.sequences) {
            if (s.entries.empty()) throw SpecInvalid(where + "empty sequence");
            if (!(s.probability >= 0)) throw SpecInvalid(where + "negative probability");
            if (s.outlier_probability < 0 || s.outlier_probability > 1) throw SpecInvalid(where + "bad outlier probability");
            sum += s.probability;
            const auto longest = s.duration_ns + s.duration_jitter_ns + s.outlier_extra_ns;
            if (t.iterations > 0 && longest + t.jitter_ns + 1 >= t.period_ns) {
                throw SpecInvalid(where + "instance duration plus jitter does not fit in the period");
            }
        }
        if (std::abs(sum - 1.0) > 1e-9) throw SpecInvalid(where + "probabilities do not sum to 1");
    }
}

Workload generate_workload(const WorkloadSpec& spec) {
    spec.validate();
    Workload w;
    std::vector<std::vector<AuditRecord>> per_task;
    for (std::size_t i = 0; i < spec.tasks.size(); ++i) {
        w.choices.emplace_back();
        per_task.push_back(TaskGenerator(spec, spec.tasks[i], i).run(w.choices.back()));
    }
    std::size_t total = 0;
    for (const auto& v : per_task) total += v.size();
    w.records.reserve(total);
    // k-way merge; ties go to the lower task index.
    std::vector<std::size_t> cursor(per_task.size(), 0);
    for (std::size_t n = 0; n < total; ++n) {
        std::size_t best = per_task.size();
        for (std::size_t i = 0; i < per_task.size(); ++i) {
            if (cursor[i] == per_task[i].size()) continue;
            if (best == per_task.size() ||
                per_task[i][cursor[i]].time_ns() < per_task[best][cursor[best]].time_ns()) {
                best = i;
            }
        }
        auto r = std::move(per_task[best][cursor[best]++]);
        r.serial = spec.first_serial + n;
        w.records.push_back(std::move(r));
    }
    return w;
}

std::vector<AuditRecord> generate(const WorkloadSpec& spec) { return generate_workload(spec).records; }

void AnomalySpec::validate() const {
    if (records.empty()) throw SpecInvalid("anomaly without records");
}

std::vector<AuditRecord> inject(const std::vector<AuditRecord>& stream, const AnomalySpec& anomaly) {
    anomaly.validate();
    const AuditRecord* model = nullptr;
    if (anomaly.target_comm) {
        for (const auto& r : stream) {
            if (r.kind() == RecordKind::Syscall && r.ids.comm && unquote(*r.ids.comm) == *anomaly.target_comm) {
                model = &r;
                break;
            }
        }
    }
    std::uint64_t next_serial = 1;
    for (const auto& r : stream) {
        if (r.serial.known()) next_serial = std::max(next_serial, *r.serial + 1);
    }

    std::vector<AuditRecord> injected;
    for (std::size_t i = 0; i < anomaly.records.size(); ++i) {
        const auto& e = anomaly.records[i];
        AuditRecord r;
        if (model) {
            r.arch = model->arch;
            r.per = model->per;
            r.ids = model->ids;
        } else {
            r.arch = 0x40000028;
            r.per = 0x800000;
            r.ids.ppid = 1;
            r.ids.pid = anomaly.pid;
            r.ids.tid = anomaly.tid;
            r.ids.auid = 1000;
            r.ids.uid = r.ids.gid = r.ids.euid = r.ids.suid = r.ids.fsuid = 0;
            r.ids.egid = r.ids.sgid = r.ids.fsgid = 0;
            r.ids.tty = "pts0";
            r.ids.ses = "1";
            r.ids.comm = quote(anomaly.comm);
            r.ids.exe = quote(anomaly.exe);
            r.ids.key = "(null)";
        }
        r.time = EventTime::exact(anomaly.at_ns + i * anomaly.spacing_ns);
        r.serial = next_serial++;
        r.syscall = e.syscall;
        r.success = true;
        r.exit = 0;
        for (std::size_t k = 0; k < 4; ++k) r.args[k] = static_cast<std::uint64_t>(std::max<std::int64_t>(e.args[k], 0));
        r.items = 0;
        injected.push_back(std::move(r));
    }

    std::vector<AuditRecord> out;
    out.reserve(stream.size() + injected.size());
    std::size_t j = 0;
    for (const auto& r : stream) {
        while (j < injected.size() && injected[j].time_ns() < r.time_ns()) out.push_back(injected[j++]);
        out.push_back(r);
    }
    while (j < injected.size()) out.push_back(injected[j++]);
    return out;
}

std::vector<TemplateEntry> exfiltration_triple() {
    return {TemplateEntry::parse("322:4294967196:-1:577:-1"), TemplateEntry::parse("4:9:-1:4096:-1"),
            TemplateEntry::parse("6:9:-1:-1:-1")};
}

}  // namespace ellipsis
