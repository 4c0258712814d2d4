#include "ellipsis/audit_record.hpp"

#include <charconv>
#include <cstdio>
#include <limits>

namespace ellipsis {

namespace {

// Canonical field order. Slot numbers are 1-based positions in this table;
// slot 0 is the position right after the msg=audit(...) prefix.
constexpr std::array<std::string_view, 31> kKeys = {
    "arch",  "syscall", "per",   "success", "exit", "template", "rep",  "stime",
    "etime", "a0",      "a1",    "a2",      "a3",   "items",    "ppid", "pid",
    "tid",   "auid",    "uid",   "gid",     "euid", "suid",     "fsuid", "egid",
    "sgid",  "fsgid",   "tty",   "ses",     "comm", "exe",      "key"};

enum Slot : std::size_t {
    kArch = 1, kSyscall, kPer, kSuccess, kExit, kTemplate, kRep, kStime,
    kEtime, kA0, kA1, kA2, kA3, kItems, kPpid, kPid,
    kTid, kAuid, kUid, kGid, kEuid, kSuid, kFsuid, kEgid,
    kSgid, kFsgid, kTty, kSes, kComm, kExe, kKey, kSlotCount
};

static_assert(kSlotCount == kKeys.size() + 1);

std::size_t slot_of(std::string_view key) {
    for (std::size_t i = 0; i < kKeys.size(); ++i) {
        if (kKeys[i] == key) return i + 1;
    }
    return 0;
}

bool is_space(char c) { return c == ' ' || c == '\t' || c == '\r' || c == '\n'; }

Field<std::uint64_t>* u64_slot(AuditRecord& r, std::size_t slot) {
    auto& id = r.ids;
    switch (slot) {
        case kArch: return &r.arch;
        case kSyscall: return &r.syscall;
        case kPer: return &r.per;
        case kRep: return &r.rep;
        case kStime: return &r.stime;
        case kEtime: return &r.etime;
        case kA0: return &r.args[0];
        case kA1: return &r.args[1];
        case kA2: return &r.args[2];
        case kA3: return &r.args[3];
        case kItems: return &r.items;
        case kPpid: return &id.ppid;
        case kPid: return &id.pid;
        case kTid: return &id.tid;
        case kAuid: return &id.auid;
        case kUid: return &id.uid;
        case kGid: return &id.gid;
        case kEuid: return &id.euid;
        case kSuid: return &id.suid;
        case kFsuid: return &id.fsuid;
        case kEgid: return &id.egid;
        case kSgid: return &id.sgid;
        case kFsgid: return &id.fsgid;
        default: return nullptr;
    }
}

const Field<std::uint64_t>* u64_slot(const AuditRecord& r, std::size_t slot) {
    return u64_slot(const_cast<AuditRecord&>(r), slot);
}

std::optional<std::string>* text_slot(AuditRecord& r, std::size_t slot) {
    switch (slot) {
        case kTemplate: return &r.template_name;
        case kTty: return &r.ids.tty;
        case kSes: return &r.ids.ses;
        case kComm: return &r.ids.comm;
        case kExe: return &r.ids.exe;
        case kKey: return &r.ids.key;
        default: return nullptr;
    }
}

const std::optional<std::string>* text_slot(const AuditRecord& r, std::size_t slot) {
    return text_slot(const_cast<AuditRecord&>(r), slot);
}

bool is_hex_slot(std::size_t slot) {
    return slot == kArch || slot == kPer || (slot >= kA0 && slot <= kA3);
}

template <typename T>
bool parse_int(std::string_view s, T& out, int base) {
    if (s.empty()) return false;
    auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), out, base);
    return ec == std::errc{} && ptr == s.data() + s.size();
}

void append_u64(std::string& out, std::uint64_t v, bool hex) {
    char buf[24];
    auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v, hex ? 16 : 10);
    out.append(buf, ptr);
}

Timestamp parse_timestamp(std::string_view s, std::size_t offset) {
    auto dot = s.find('.');
    if (dot == std::string_view::npos) {
        throw MalformedRecord("timestamp without fractional part", offset);
    }
    Timestamp ts;
    if (!parse_int(s.substr(0, dot), ts.seconds, 10)) {
        throw MalformedRecord("bad timestamp seconds", offset);
    }
    auto frac = s.substr(dot + 1);
    if (frac.empty()) throw MalformedRecord("empty timestamp fraction", offset + dot + 1);
    for (std::size_t i = 0; i < frac.size(); ++i) {
        if (frac[i] < '0' || frac[i] > '9') {
            throw MalformedRecord("bad timestamp fraction", offset + dot + 1 + i);
        }
    }
    ts.fraction = std::string(frac);
    return ts;
}

void assign(AuditRecord& r, std::size_t slot, std::string_view value, std::size_t offset) {
    if (auto* f = u64_slot(r, slot)) {
        if (f->present()) throw MalformedRecord("duplicate key " + std::string(kKeys[slot - 1]), offset);
        if (value == kUnknownMarker) {
            *f = Field<std::uint64_t>::unknown();
            return;
        }
        std::uint64_t v = 0;
        if (!parse_int(value, v, is_hex_slot(slot) ? 16 : 10)) {
            throw MalformedRecord("bad numeric value for " + std::string(kKeys[slot - 1]), offset);
        }
        *f = v;
        return;
    }
    if (auto* t = text_slot(r, slot)) {
        if (t->has_value()) throw MalformedRecord("duplicate key " + std::string(kKeys[slot - 1]), offset);
        *t = std::string(value);
        return;
    }
    if (slot == kSuccess) {
        if (r.success.present()) throw MalformedRecord("duplicate key success", offset);
        if (value == "yes") r.success = true;
        else if (value == "no") r.success = false;
        else if (value == kUnknownMarker) r.success = Field<bool>::unknown();
        else throw MalformedRecord("success must be yes or no", offset);
        return;
    }
    if (slot == kExit) {
        if (r.exit.present()) throw MalformedRecord("duplicate key exit", offset);
        if (value == kUnknownMarker) {
            r.exit = Field<std::int64_t>::unknown();
            return;
        }
        std::int64_t v = 0;
        if (!parse_int(value, v, 10)) throw MalformedRecord("bad numeric value for exit", offset);
        r.exit = v;
        return;
    }
}

// Appends " key=value" for a present field; returns false if absent.
bool render_slot(const AuditRecord& r, std::size_t slot, std::string& out) {
    auto key = kKeys[slot - 1];
    auto begin = [&] {
        out.push_back(' ');
        out.append(key);
        out.push_back('=');
    };
    if (const auto* f = u64_slot(r, slot)) {
        if (!f->present()) return false;
        begin();
        if (f->is_unknown()) out.append(kUnknownMarker);
        else append_u64(out, **f, is_hex_slot(slot));
        return true;
    }
    if (const auto* t = text_slot(r, slot)) {
        if (!t->has_value()) return false;
        begin();
        out.append(**t);
        return true;
    }
    if (slot == kSuccess) {
        if (!r.success.present()) return false;
        begin();
        if (r.success.is_unknown()) out.append(kUnknownMarker);
        else out.append(*r.success ? "yes" : "no");
        return true;
    }
    if (slot == kExit) {
        if (!r.exit.present()) return false;
        begin();
        if (r.exit.is_unknown()) out.append(kUnknownMarker);
        else out.append(std::to_string(*r.exit));
        return true;
    }
    return false;
}

}  // namespace

Timestamp Timestamp::from_ns(std::uint64_t ns) {
    Timestamp ts;
    ts.seconds = ns / 1'000'000'000ULL;
    char buf[16];
    std::snprintf(buf, sizeof buf, "%09llu", static_cast<unsigned long long>(ns % 1'000'000'000ULL));
    ts.fraction = buf;
    return ts;
}

std::uint64_t Timestamp::ns() const {
    std::uint64_t frac = 0;
    for (std::size_t i = 0; i < 9; ++i) {
        frac *= 10;
        if (i < fraction.size()) frac += static_cast<std::uint64_t>(fraction[i] - '0');
    }
    return seconds * 1'000'000'000ULL + frac;
}

std::string Timestamp::str() const { return std::to_string(seconds) + "." + fraction; }

std::string_view unquote(std::string_view value) noexcept {
    if (value.size() >= 2 && value.front() == '"' && value.back() == '"') {
        return value.substr(1, value.size() - 2);
    }
    return value;
}

std::string quote(std::string_view value) {
    std::string out;
    out.reserve(value.size() + 2);
    out.push_back('"');
    out.append(value);
    out.push_back('"');
    return out;
}

AuditRecord parse_record(std::string_view line) {
    std::size_t begin = 0;
    std::size_t end = line.size();
    while (begin < end && is_space(line[begin])) ++begin;
    while (end > begin && is_space(line[end - 1])) --end;

    AuditRecord r;
    std::size_t pos = begin;
    auto expect = [&](std::string_view lit, const char* what) {
        if (line.substr(pos, lit.size()) != lit || pos + lit.size() > end) {
            throw MalformedRecord(what, pos);
        }
        pos += lit.size();
    };

    expect("type=", "missing type= prefix");
    std::size_t type_end = pos;
    while (type_end < end && !is_space(line[type_end])) ++type_end;
    if (type_end == pos) throw MalformedRecord("empty record type", pos);
    r.type = std::string(line.substr(pos, type_end - pos));
    pos = type_end;
    while (pos < end && line[pos] == ' ') ++pos;
    expect("msg=audit(", "missing msg=audit( prefix");

    if (pos < end && line[pos] == '[') {
        auto close = line.find(']', pos);
        if (close == std::string_view::npos || close >= end) {
            throw MalformedRecord("unterminated timestamp range", pos);
        }
        auto body = line.substr(pos + 1, close - pos - 1);
        auto comma = body.find(", ");
        if (comma == std::string_view::npos) throw MalformedRecord("timestamp range without ', '", pos);
        r.time.lo = parse_timestamp(body.substr(0, comma), pos + 1);
        r.time.hi = parse_timestamp(body.substr(comma + 2), pos + 3 + comma);
        pos = close + 1;
    } else {
        auto colon = line.find(':', pos);
        if (colon == std::string_view::npos || colon >= end) throw MalformedRecord("missing serial separator", pos);
        r.time.lo = parse_timestamp(line.substr(pos, colon - pos), pos);
        pos = colon;
    }
    expect(":", "missing serial separator");
    auto close = line.find("):", pos);
    if (close == std::string_view::npos || close >= end) throw MalformedRecord("missing ): after serial", pos);
    auto serial = line.substr(pos, close - pos);
    if (serial == kUnknownMarker) {
        r.serial = Field<std::uint64_t>::unknown();
    } else {
        std::uint64_t s = 0;
        if (!parse_int(serial, s, 10)) throw MalformedRecord("bad serial", pos);
        r.serial = s;
    }
    pos = close + 2;

    std::size_t last_slot = 0;
    while (pos < end) {
        if (line[pos] == ' ') {
            ++pos;
            continue;
        }
        std::size_t token_start = pos;
        std::size_t eq = pos;
        while (eq < end && line[eq] != '=' && line[eq] != ' ') ++eq;
        if (eq >= end || line[eq] != '=' || eq == pos) throw MalformedRecord("expected key=value", token_start);
        auto key = line.substr(pos, eq - pos);
        std::size_t vstart = eq + 1;
        std::size_t vend = vstart;
        if (vstart < end && line[vstart] == '"') {
            auto q = line.find('"', vstart + 1);
            if (q == std::string_view::npos || q >= end) throw MalformedRecord("unterminated quote", vstart);
            vend = q + 1;
            if (vend < end && line[vend] != ' ') throw MalformedRecord("junk after quoted value", vend);
        } else {
            while (vend < end && line[vend] != ' ') ++vend;
        }
        auto value = line.substr(vstart, vend - vstart);
        if (auto slot = slot_of(key); slot != 0) {
            assign(r, slot, value, vstart);
            last_slot = slot;
        } else {
            r.extras.push_back({last_slot, std::string(key), std::string(value)});
        }
        pos = vend;
    }
    return r;
}

void validate_record(const AuditRecord& r) {
    if (r.kind() == RecordKind::TemplateMatch) {
        if (r.syscall.present()) throw InvariantViolation("template record carries a syscall number");
        if (!r.rep.known() || *r.rep < 1) throw InvariantViolation("template record needs rep >= 1");
        if (!r.stime.known() || !r.etime.known()) throw InvariantViolation("template record needs stime and etime");
        if (*r.stime > *r.etime) throw InvariantViolation("template record has stime > etime");
    } else {
        if (r.rep.present() || r.stime.present() || r.etime.present()) {
            throw InvariantViolation("syscall record carries template fields");
        }
        if (r.type == "SYSCALL" && !r.syscall.present()) {
            throw InvariantViolation("SYSCALL record without a syscall number");
        }
    }
    if (r.time.is_range() && r.time.hi_ns() < r.time.lo_ns()) {
        throw InvariantViolation("timestamp range with hi < lo");
    }
}

std::string serialize_record(const AuditRecord& r) {
    validate_record(r);
    std::string out;
    out.reserve(384);
    out.append("type=").append(r.type).append(" msg=audit(");
    if (r.time.is_range()) {
        out.append("[").append(r.time.lo.str()).append(", ").append(r.time.hi->str()).append("]");
    } else {
        out.append(r.time.lo.str());
    }
    out.push_back(':');
    if (r.serial.known()) append_u64(out, *r.serial, false);
    else out.append(kUnknownMarker);
    out.append("):");

    const bool template_match = r.kind() == RecordKind::TemplateMatch;
    auto render_extras = [&](std::size_t slot) {
        for (const auto& e : r.extras) {
            if (e.slot == slot) out.append(" ").append(e.key).append("=").append(e.value);
        }
    };
    render_extras(0);
    for (std::size_t slot = 1; slot < kSlotCount; ++slot) {
        if (template_match && slot == kSyscall) {
            // Template lines keep the syscall slot as an empty token.
            out.push_back(' ');
        } else {
            render_slot(r, slot, out);
        }
        render_extras(slot);
    }
    return out;
}

std::size_t record_size_bytes(const AuditRecord& r) { return serialize_record(r).size() + 1; }

std::vector<AuditRecord> parse_log(std::string_view text) {
    std::vector<AuditRecord> out;
    std::size_t line_no = 0;
    std::size_t pos = 0;
    while (pos < text.size()) {
        auto nl = text.find('\n', pos);
        if (nl == std::string_view::npos) nl = text.size();
        ++line_no;
        auto line = text.substr(pos, nl - pos);
        pos = nl + 1;
        bool blank = true;
        for (char c : line) {
            if (!is_space(c)) {
                blank = false;
                break;
            }
        }
        if (blank) continue;
        try {
            out.push_back(parse_record(line));
        } catch (const MalformedRecord& e) {
            throw MalformedRecord("line " + std::to_string(line_no) + ": " + e.detail(), e.offset());
        }
    }
    return out;
}

std::string serialize_log(const std::vector<AuditRecord>& records) {
    std::string out;
    for (const auto& r : records) {
        out.append(serialize_record(r));
        out.push_back('\n');
    }
    return out;
}

}  // namespace ellipsis
