#include <doctest.h>

#include <random>

#include "ellipsis/audit_record.hpp"
#include "fixtures.hpp"

using namespace ellipsis;

TEST_CASE("parse a Linux Audit write record") {
    const auto r = parse_record(fixtures::kWrite3);
    CHECK(r.kind() == RecordKind::Syscall);
    CHECK(*r.syscall == 4);
    CHECK(*r.exit == 8);
    CHECK(*r.args[0] == 3);
    CHECK(*r.args[1] == 0x126aa4);
    CHECK(*r.args[2] == 1);
    CHECK(*r.ids.pid == 1526);
    CHECK(*r.ids.tid == 1526);
    CHECK(unquote(*r.ids.comm) == "arducopter");
    CHECK(*r.serial == 5893330);
    CHECK(r.time_ns() == 1601405431612391356ULL);
    CHECK(*r.arch == 0x40000028);
    CHECK(*r.success);
}

TEST_CASE("parse a template record") {
    const auto r = parse_record(fixtures::kRep10);
    CHECK(r.kind() == RecordKind::TemplateMatch);
    CHECK(*r.template_name == "arducopter");
    CHECK(*r.rep == 10);
    CHECK(*r.stime == 1601405431589320747ULL);
    CHECK(*r.etime == 1601405431612287042ULL);
    CHECK_FALSE(r.syscall.present());
}

TEST_CASE("listing lines round-trip byte for byte") {
    for (const auto* line : {&fixtures::kWrite3, &fixtures::kWrite4, &fixtures::kWrite5, &fixtures::kCompressed,
                             &fixtures::kRep10, &fixtures::kRanged}) {
        CHECK(serialize_record(parse_record(*line)) == *line);
    }
}

TEST_CASE("template record keeps the empty syscall slot") {
    const auto text = serialize_record(parse_record(fixtures::kCompressed));
    CHECK(text.find("arch=40000028  per=800000 template=arducopter rep=1 stime=") != std::string::npos);
}

TEST_CASE("ranged timestamps and unknown values") {
    const auto r = parse_record(fixtures::kRanged);
    CHECK(r.time.is_range());
    CHECK(r.time.lo_ns() == 1601405431612391356ULL);
    CHECK(r.time.hi_ns() == 1601405431612391367ULL);
    CHECK(r.serial.is_unknown());
    CHECK(r.args[1].is_unknown());
    CHECK(r.args[3].is_unknown());
    CHECK(*r.args[0] == 4);
}

TEST_CASE("surrounding whitespace is tolerated") {
    const auto r = parse_record("  \t" + fixtures::kWrite4 + " \r\n");
    CHECK(serialize_record(r) == fixtures::kWrite4);
}

TEST_CASE("unknown keys survive in place") {
    const std::string line =
        "type=SYSCALL msg=audit(1.000000001:7): arch=c000003e syscall=0 success=yes exit=3 a0=3 a1=0 a2=1 a3=0 "
        "items=0 ppid=1 pid=2 auid=4294967295 uid=0 gid=0 euid=0 suid=0 fsuid=0 egid=0 sgid=0 fsgid=0 tty=(none) "
        "ses=4294967295 comm=\"cat\" exe=\"/bin/cat\" subj=unconfined key=(null) extra=\"x y\"";
    const auto r = parse_record(line);
    CHECK_FALSE(r.per.present());
    CHECK_FALSE(r.ids.tid.present());
    REQUIRE(r.extras.size() == 2);
    CHECK(r.extras[0].key == "subj");
    CHECK(r.extras[1].value == "\"x y\"");
    CHECK(serialize_record(r) == line);
}

TEST_CASE("fractions keep their printed precision") {
    const std::string line = "type=SYSCALL msg=audit(1601405431.612:9): arch=40000028 syscall=4 pid=1 comm=\"a\"";
    const auto r = parse_record(line);
    CHECK(r.time_ns() == 1601405431612000000ULL);
    CHECK(serialize_record(r) == line);
}

TEST_CASE("record_size_bytes counts the newline") {
    const auto r = parse_record(fixtures::kWrite3);
    CHECK(record_size_bytes(r) == fixtures::kWrite3.size() + 1);
    CHECK(record_size_bytes(r) == 332);

    auto with_key = r;
    with_key.ids.key = "\"x\"";
    CHECK(record_size_bytes(with_key) - record_size_bytes(r) == std::string("\"x\"").size() - std::string("(null)").size());
}

TEST_CASE("malformed lines are rejected with an offset") {
    CHECK_THROWS_AS(parse_record(""), MalformedRecord);
    CHECK_THROWS_AS(parse_record("msg=audit(1.0:1): syscall=4"), MalformedRecord);
    CHECK_THROWS_AS(parse_record("type=SYSCALL syscall=4"), MalformedRecord);
    CHECK_THROWS_AS(parse_record("type=SYSCALL msg=audit(1.0:1): syscall=zz"), MalformedRecord);
    CHECK_THROWS_AS(parse_record("type=SYSCALL msg=audit(1.0:1): syscall=4 syscall=5"), MalformedRecord);
    CHECK_THROWS_AS(parse_record("type=SYSCALL msg=audit(1.0:1): a1=∅4 syscall=4"), MalformedRecord);
    try {
        parse_record("type=SYSCALL msg=audit(1.0:1): arch=40000028 syscall=x4");
        FAIL("expected MalformedRecord");
    } catch (const MalformedRecord& e) {
        CHECK(e.offset() > 30);
    }
}

TEST_CASE("serialize rejects records that break the kind rules") {
    auto r = parse_record(fixtures::kCompressed);
    r.rep = 0;
    CHECK_THROWS_AS(serialize_record(r), InvariantViolation);
    r = parse_record(fixtures::kCompressed);
    r.stime = *r.etime + 1;
    CHECK_THROWS_AS(serialize_record(r), InvariantViolation);
    r = parse_record(fixtures::kCompressed);
    r.syscall = 4;
    CHECK_THROWS_AS(serialize_record(r), InvariantViolation);
    auto s = parse_record(fixtures::kWrite3);
    s.syscall.reset();
    CHECK_THROWS_AS(serialize_record(s), InvariantViolation);
}

TEST_CASE("parse_log reports the failing line") {
    const std::string text = fixtures::kWrite3 + "\n\n" + fixtures::kWrite4 + "\ngarbage\n";
    try {
        parse_log(text);
        FAIL("expected MalformedRecord");
    } catch (const MalformedRecord& e) {
        CHECK(std::string(e.what()).find("line 4") != std::string::npos);
    }
    const auto two = parse_log(fixtures::kWrite3 + "\n" + fixtures::kWrite4 + "\n");
    CHECK(two.size() == 2);
    CHECK(serialize_log(two) == fixtures::kWrite3 + "\n" + fixtures::kWrite4 + "\n");
}

TEST_CASE("generated records round-trip") {
    std::mt19937_64 rng(42);
    for (int i = 0; i < 500; ++i) {
        auto r = fixtures::rec(rng() % 400, {rng() % 100, rng(), rng() % 5000, rng() % 3}, rng() % (1ULL << 62),
                               1 + rng() % 30000, 1 + rng() % 30000, "t" + std::to_string(rng() % 100));
        r.serial = rng() % 1000000;
        if (rng() % 4 == 0) r.args[rng() % 4] = Field<std::uint64_t>::unknown();
        if (rng() % 5 == 0) r.success = false;
        if (rng() % 3 == 0) r.exit = -static_cast<std::int64_t>(rng() % 200);
        const auto line = serialize_record(r);
        const auto back = parse_record(line);
        CHECK(serialize_record(back) == line);
        CHECK(back.args == r.args);
        CHECK(back.ids == r.ids);
    }
}

TEST_CASE("arbitrary bytes never escape as anything but MalformedRecord") {
    std::mt19937_64 rng(7);
    const std::string alphabet = "type=SYSCALLmsg=audit(0123456789.:)[], \"\\=aex\xE2\x88\x85";
    int parsed = 0;
    for (int i = 0; i < 3000; ++i) {
        std::string s;
        if (rng() % 2) s = fixtures::kWrite3.substr(0, rng() % fixtures::kWrite3.size());
        const auto n = rng() % 40;
        for (std::size_t k = 0; k < n; ++k) s += alphabet[rng() % alphabet.size()];
        try {
            parse_record(s);
            ++parsed;
        } catch (const MalformedRecord&) {
        }
    }
    CHECK(parsed >= 0);
}
