#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "ellipsis/audit_record.hpp"
#include "ellipsis/template.hpp"

namespace fixtures {

// Linux Audit output for three writes of one arducopter loop.
inline const std::string kWrite3 =
    "type=SYSCALL msg=audit(1601405431.612391356:5893330): arch=40000028 syscall=4 per=800000 success=yes exit=8 "
    "a0=3 a1=126aa4 a2=1 a3=3 items=0 ppid=1513 pid=1526 tid=1526 auid=1000 uid=0 gid=0 euid=0 suid=0 fsuid=0 "
    "egid=0 sgid=0 fsgid=0 tty=pts0 ses=1 comm=\"arducopter\" exe=\"/home/pi/ardupilot/build/navio2/bin/arducopter\" "
    "key=(null)";
inline const std::string kWrite4 =
    "type=SYSCALL msg=audit(1601405431.612391366:5893333): arch=40000028 syscall=4 per=800000 success=yes exit=7 "
    "a0=4 a1=126ab0 a2=1 a3=3 items=0 ppid=1513 pid=1526 tid=1526 auid=1000 uid=0 gid=0 euid=0 suid=0 fsuid=0 "
    "egid=0 sgid=0 fsgid=0 tty=pts0 ses=1 comm=\"arducopter\" exe=\"/home/pi/ardupilot/build/navio2/bin/arducopter\" "
    "key=(null)";
inline const std::string kWrite5 =
    "type=SYSCALL msg=audit(1601405431.612391367:5893334): arch=40000028 syscall=4 per=800000 success=yes exit=7 "
    "a0=5 a1=126ab8 a2=1 a3=3 items=0 ppid=1513 pid=1526 tid=1526 auid=1000 uid=0 gid=0 euid=0 suid=0 fsuid=0 "
    "egid=0 sgid=0 fsgid=0 tty=pts0 ses=1 comm=\"arducopter\" exe=\"/home/pi/ardupilot/build/navio2/bin/arducopter\" "
    "key=(null)";

// The same three writes compressed into one template record.
inline const std::string kCompressed =
    "type=SYSCALL msg=audit(1601405431.612391370:5893335): arch=40000028  per=800000 template=arducopter rep=1 "
    "stime=1601405431612391356 etime=1601405431612391367 ppid=1513 pid=1526 tid=1526 auid=1000 uid=0 gid=0 euid=0 "
    "suid=0 fsuid=0 egid=0 sgid=0 fsgid=0 tty=pts0 ses=1 comm=\"arducopter\" "
    "exe=\"/home/pi/ardupilot/build/navio2/bin/arducopter\" key=(null)";

// Ten consecutive matches aggregated in one line.
inline const std::string kRep10 =
    "type=SYSCALL msg=audit(1601405431.612391356:5893330): arch=40000028  per=800000 template=arducopter rep=10 "
    "stime=1601405431589320747 etime=1601405431612287042 ppid=1208 pid=1261 tid=1261 auid=1000 uid=0 gid=0 euid=0 "
    "suid=0 fsuid=0 egid=0 sgid=0 fsgid=0 tty=pts0 ses=3 comm=\"arducopter\" "
    "exe=\"/home/pi/ardupilot/build/navio2/bin/arducopter\" key=(null)";

// A reconstructed middle record with a ranged timestamp and unknown values.
inline const std::string kRanged =
    "type=SYSCALL msg=audit([1601405431.612391356, 1601405431.612391367]:∅): arch=40000028 syscall=4 per=800000 "
    "success=yes exit=7 a0=4 a1=∅ a2=1 a3=∅ items=0 ppid=1513 pid=1526 tid=1526 auid=1000 uid=0 gid=0 "
    "euid=0 suid=0 fsuid=0 egid=0 sgid=0 fsgid=0 tty=pts0 ses=1 comm=\"arducopter\" "
    "exe=\"/home/pi/ardupilot/build/navio2/bin/arducopter\" key=(null)";

inline const std::string kArducopterTpl =
    "arducopter\n3\n1303419\n5012313\n4:3:-1:1:-1\n4:4:-1:1:-1\n4:5:-1:1:-1\n";

inline ellipsis::AuditRecord rec(std::uint64_t syscall, std::array<std::uint64_t, 4> args, std::uint64_t t_ns,
                                 std::uint64_t pid = 100, std::uint64_t tid = 0, const std::string& comm = "task") {
    ellipsis::AuditRecord r;
    r.time = ellipsis::EventTime::exact(t_ns);
    r.serial = 0;
    r.arch = 0x40000028;
    r.syscall = syscall;
    r.per = 0x800000;
    r.success = true;
    r.exit = 0;
    for (std::size_t k = 0; k < 4; ++k) r.args[k] = args[k];
    r.items = 0;
    auto& id = r.ids;
    id.ppid = 1;
    id.pid = pid;
    id.tid = tid ? tid : pid;
    id.auid = 1000;
    id.uid = id.gid = id.euid = id.suid = id.fsuid = id.egid = id.sgid = id.fsgid = 0;
    id.tty = "pts0";
    id.ses = "1";
    id.comm = ellipsis::quote(comm);
    id.exe = ellipsis::quote("/usr/bin/" + comm);
    id.key = "(null)";
    return r;
}

/// Numbers serials 1.. in stream order.
inline void number(std::vector<ellipsis::AuditRecord>& records) {
    std::uint64_t s = 1;
    for (auto& r : records) r.serial = s++;
}

/// Template whose entry k is `syscall:k:-1:-1:-1`.
inline ellipsis::Template chain(const std::string& name, std::size_t length, std::uint64_t syscall = 4) {
    ellipsis::Template t;
    t.name = name;
    for (std::size_t k = 0; k < length; ++k) {
        t.entries.push_back({syscall, {static_cast<std::int64_t>(k), -1, -1, -1}});
    }
    return t;
}

/// `instances` back-to-back matches of `tpl` for one task, records `spacing`
/// apart inside an instance and instance starts `period` apart.
inline std::vector<ellipsis::AuditRecord> instances_of(const ellipsis::Template& tpl, std::size_t instances,
                                                       std::uint64_t period, std::uint64_t spacing = 10,
                                                       std::uint64_t pid = 100, const std::string& comm = "task",
                                                       std::uint64_t t0 = 1'000'000'000) {
    std::vector<ellipsis::AuditRecord> out;
    for (std::size_t i = 0; i < instances; ++i) {
        for (std::size_t j = 0; j < tpl.length(); ++j) {
            const auto& e = tpl.entries[j];
            std::array<std::uint64_t, 4> args{};
            for (std::size_t k = 0; k < 4; ++k) args[k] = e.args[k] >= 0 ? static_cast<std::uint64_t>(e.args[k]) : 7 + i;
            out.push_back(rec(e.syscall, args, t0 + i * period + j * spacing, pid, pid, comm));
        }
    }
    return out;
}

}  // namespace fixtures
