#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "ellipsis/errors.hpp"

namespace ellipsis {

/// UTF-8 rendering of a value that exists but could not be recovered.
inline constexpr std::string_view kUnknownMarker = "\xE2\x88\x85";

/// A record field that is either absent from the line, present but unknown
/// (rendered as the unknown marker), or present with a value.
template <typename T>
class Field {
public:
    enum class State : std::uint8_t { Absent, Unknown, Known };

    Field() = default;
    Field(T value) : state_(State::Known), value_(value) {}  // NOLINT: implicit by design of the record API

    static Field unknown() {
        Field f;
        f.state_ = State::Unknown;
        return f;
    }

    State state() const noexcept { return state_; }
    bool present() const noexcept { return state_ != State::Absent; }
    bool known() const noexcept { return state_ == State::Known; }
    bool is_unknown() const noexcept { return state_ == State::Unknown; }

    const T& operator*() const noexcept { return value_; }
    T value_or(T fallback) const noexcept { return known() ? value_ : fallback; }
    void reset() noexcept { *this = Field{}; }

    friend bool operator==(const Field& a, const Field& b) {
        if (a.state_ != b.state_) return false;
        return a.state_ != State::Known || a.value_ == b.value_;
    }

private:
    State state_ = State::Absent;
    T value_{};
};

/// `SECS.FRACTION` as printed in the msg=audit(...) prefix. The fraction is
/// kept as its digit string so non-nanosecond precision round-trips.
struct Timestamp {
    std::uint64_t seconds = 0;
    std::string fraction = "000000000";

    static Timestamp from_ns(std::uint64_t ns);
    std::uint64_t ns() const;
    std::string str() const;

    friend bool operator==(const Timestamp&, const Timestamp&) = default;
};

/// Exact event time, or a `[lo, hi]` range for reconstructed records.
struct EventTime {
    Timestamp lo;
    std::optional<Timestamp> hi;

    static EventTime exact(std::uint64_t ns) { return {Timestamp::from_ns(ns), std::nullopt}; }
    static EventTime range(std::uint64_t lo_ns, std::uint64_t hi_ns) {
        return {Timestamp::from_ns(lo_ns), Timestamp::from_ns(hi_ns)};
    }
    bool is_range() const noexcept { return hi.has_value(); }
    std::uint64_t lo_ns() const { return lo.ns(); }
    std::uint64_t hi_ns() const { return hi ? hi->ns() : lo.ns(); }

    friend bool operator==(const EventTime&, const EventTime&) = default;
};

enum class RecordKind { Syscall, TemplateMatch };

/// A `key=value` token the record model does not know about. `slot` is the
/// canonical position it follows (0 = directly after the msg prefix).
struct ExtraField {
    std::size_t slot = 0;
    std::string key;
    std::string value;

    friend bool operator==(const ExtraField&, const ExtraField&) = default;
};

/// Identity and credential fields copied verbatim onto template records.
struct ProcessIdentity {
    Field<std::uint64_t> ppid, pid, tid, auid, uid, gid, euid, suid, fsuid, egid, sgid, fsgid;
    std::optional<std::string> tty, ses, comm, exe, key;

    friend bool operator==(const ProcessIdentity&, const ProcessIdentity&) = default;
};

/// One Linux Audit SYSCALL line or one template-match line.
///
/// Text-valued fields (tty, ses, comm, exe, key, template) hold the raw token
/// value, including quotes when the line carried them.
struct AuditRecord {
    std::string type = "SYSCALL";
    EventTime time;
    Field<std::uint64_t> serial;

    Field<std::uint64_t> arch;  // hex
    Field<std::uint64_t> syscall;
    Field<std::uint64_t> per;  // hex
    Field<bool> success;
    Field<std::int64_t> exit;

    std::optional<std::string> template_name;
    Field<std::uint64_t> rep;
    Field<std::uint64_t> stime;
    Field<std::uint64_t> etime;

    std::array<Field<std::uint64_t>, 4> args;  // hex
    Field<std::uint64_t> items;

    ProcessIdentity ids;
    std::vector<ExtraField> extras;

    RecordKind kind() const noexcept {
        return template_name ? RecordKind::TemplateMatch : RecordKind::Syscall;
    }
    /// Lower bound of the event time in nanoseconds.
    std::uint64_t time_ns() const { return time.lo_ns(); }

    friend bool operator==(const AuditRecord&, const AuditRecord&) = default;
};

/// Parses one record line. Leading and trailing whitespace is ignored.
/// Throws MalformedRecord.
AuditRecord parse_record(std::string_view line);

/// Canonical single-line rendering, without a trailing newline.
/// Throws InvariantViolation if the kind invariants do not hold.
std::string serialize_record(const AuditRecord& record);

/// Size of the serialized line including its trailing newline.
std::size_t record_size_bytes(const AuditRecord& record);

/// Throws InvariantViolation when the kind invariants are broken.
void validate_record(const AuditRecord& record);

/// Strips one pair of surrounding double quotes, if present.
std::string_view unquote(std::string_view value) noexcept;
std::string quote(std::string_view value);

/// Reads every non-blank line of a log. Throws MalformedRecord with the
/// message prefixed by the 1-based line number.
std::vector<AuditRecord> parse_log(std::string_view text);
std::string serialize_log(const std::vector<AuditRecord>& records);

}  // namespace ellipsis
