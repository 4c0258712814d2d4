#include <doctest.h>

#include <algorithm>

#include "ellipsis/reducer.hpp"
#include "fixtures.hpp"

using namespace ellipsis;

namespace {

Template tpl_of(const std::string& name, std::initializer_list<const char*> entries) {
    Template t;
    t.name = name;
    for (const auto* e : entries) t.entries.push_back(TemplateEntry::parse(e));
    return t;
}

TemplateSet set_of(std::vector<Template> templates, const std::string& comm = "task") {
    TemplateSet s;
    for (auto& t : templates) s.add({comm, std::nullopt, std::nullopt}, std::move(t));
    return s;
}

std::vector<AuditRecord> init_records(std::size_t f, std::uint64_t t0 = 1000, const std::string& comm = "task") {
    std::vector<AuditRecord> out;
    for (std::size_t i = 0; i < f; ++i) out.push_back(fixtures::rec(5, {i, 0, 0, 0}, t0 + i, 100, 100, comm));
    return out;
}

std::size_t count_templates(const std::vector<AuditRecord>& v) {
    return static_cast<std::size_t>(std::count_if(v.begin(), v.end(), [](const auto& r) {
        return r.kind() == RecordKind::TemplateMatch;
    }));
}

}  // namespace

TEST_CASE("automaton shares prefixes and branches where templates differ") {
    const std::vector<Template> tpls{tpl_of("TPL-1", {"1:1:-1:-1:-1", "2:-1:-1:-1:-1", "1:1:-1:-1:-1"}),
                                     tpl_of("TPL-2", {"1:1:-1:-1:-1", "3:-1:-1:-1:-1", "1:1:-1:-1:-1"})};
    const auto a = Automaton::build(tpls);
    const auto& root = a.state(Automaton::kRoot);
    CHECK(root.reachable.size() == 2);
    REQUIRE(root.children.size() == 1);
    const auto& s1 = a.state(root.children[0].second);
    CHECK(s1.depth == 1);
    CHECK(a.reachable_names(root.children[0].second) == std::vector<std::string>{"TPL-1", "TPL-2"});
    REQUIRE(s1.children.size() == 2);
    const auto& left = a.state(s1.children[0].second);
    CHECK(a.reachable_names(s1.children[0].second) == std::vector<std::string>{"TPL-1"});
    CHECK(left.depth == 2);
    CHECK(a.state_count() == 6);
}

TEST_CASE("a single template is a chain") {
    const std::vector<Template> tpls{fixtures::chain("long", 14)};
    const auto a = Automaton::build(tpls);
    CHECK(a.state_count() == 15);
    Automaton::StateId s = Automaton::kRoot;
    for (std::size_t k = 0; k < 14; ++k) {
        CHECK(a.state(s).children.size() == 1);
        s = a.state(s).children[0].second;
    }
    CHECK(a.state(s).accepts == 0u);
}

TEST_CASE("automaton construction errors") {
    const std::vector<Template> prefix{tpl_of("short", {"1:-1:-1:-1:-1"}), tpl_of("long", {"1:-1:-1:-1:-1", "2:-1:-1:-1:-1"})};
    CHECK_THROWS_AS(Automaton::build(prefix), PrefixConflict);
    const std::vector<Template> prefix_rev{prefix[1], prefix[0]};
    CHECK_THROWS_AS(Automaton::build(prefix_rev), PrefixConflict);
    const std::vector<Template> same{tpl_of("a", {"1:-1:-1:-1:-1"}), tpl_of("b", {"1:-1:-1:-1:-1"})};
    CHECK_THROWS_AS(Automaton::build(same), PrefixConflict);
    const std::vector<Template> dup{tpl_of("a", {"1:-1:-1:-1:-1"}), tpl_of("a", {"2:-1:-1:-1:-1"})};
    CHECK_THROWS_AS(Automaton::build(dup), DuplicateName);
    CHECK_THROWS_AS(Automaton::build(std::vector<Template>{}), InvariantViolation);
    CHECK_THROWS_AS(Automaton::build(std::vector<Template>{Template{"empty", 0, 0, {}}}), InvariantViolation);
}

TEST_CASE("Ellipsis emits one template record per instance") {
    const auto t = fixtures::chain("task", 5);
    auto records = fixtures::instances_of(t, 8, 1000);
    fixtures::number(records);
    const auto res = reduce_stream(records, set_of({t}));
    REQUIRE(res.records.size() == 8);
    for (std::size_t i = 0; i < 8; ++i) {
        const auto& r = res.records[i];
        CHECK(*r.template_name == "task");
        CHECK(*r.rep == 1);
        CHECK(*r.stime == records[i * 5].time_ns());
        CHECK(*r.etime == records[i * 5 + 4].time_ns());
        CHECK(r.ids == records[i * 5].ids);
        CHECK(*r.serial == *records[i * 5 + 4].serial + 1);
    }
    CHECK(res.counters.matches == 8);
    CHECK(res.counters.events_out == 8);
    CHECK(res.counters.template_records == 8);
}

TEST_CASE("HP aggregates consecutive matches") {
    const auto t = fixtures::chain("task", 3);
    auto records = fixtures::instances_of(t, 10, 1000);
    fixtures::number(records);
    const auto res = reduce_stream(records, set_of({t}), {ReduceMode::EllipsisHP, true, true});
    REQUIRE(res.records.size() == 1);
    const auto& r = res.records[0];
    CHECK(*r.rep == 10);
    CHECK(*r.stime == records.front().time_ns());
    CHECK(*r.etime == records.back().time_ns());
    CHECK(res.counters.covered_events == 30);
}

TEST_CASE("NR: failing at the last entry passes everything through") {
    const auto t = fixtures::chain("task", 6);
    auto records = fixtures::instances_of(t, 20, 1000);
    fixtures::number(records);
    auto broken = t;
    broken.entries.back().args[0] = 99;
    for (auto mode : {ReduceMode::Ellipsis, ReduceMode::EllipsisHP}) {
        const auto res = reduce_stream(records, set_of({broken}), {mode, true, true});
        CHECK(res.counters.matches == 0);
        CHECK(res.counters.failures == 20);
        CHECK(serialize_log(res.records) == serialize_log(records));
    }
}

TEST_CASE("finish releases partial matches and open aggregates") {
    const std::vector<Template> tpls{fixtures::chain("task", 3)};
    auto automaton = std::make_shared<const Automaton>(Automaton::build(tpls));

    TaskReducer partial(automaton, {});
    CHECK(partial.step(fixtures::rec(4, {0, 0, 0, 0}, 10)).empty());
    CHECK(partial.step(fixtures::rec(4, {1, 0, 0, 0}, 20)).empty());
    CHECK(partial.pending_size() == 2);
    auto out = partial.finish();
    REQUIRE(out.size() == 2);
    CHECK(out[0].kind == EmissionKind::Raw);
    CHECK(out[1].kind == EmissionKind::Raw);

    TaskReducer hp(automaton, {ReduceMode::EllipsisHP, true, true});
    for (const auto& r : fixtures::instances_of(tpls[0], 7, 1000)) CHECK(hp.step(r).empty());
    CHECK(hp.open_rep() == 7u);
    out = hp.finish();
    REQUIRE(out.size() == 1);
    CHECK(out[0].kind == EmissionKind::TemplateRecord);
    CHECK(*out[0].record.rep == 7);
    CHECK(out[0].covered == 21);

    TaskReducer idle(automaton, {});
    CHECK(idle.finish().empty());
}

TEST_CASE("a mismatch flushes and retries the record from the root once") {
    const std::vector<Template> tpls{fixtures::chain("task", 3)};
    auto automaton = std::make_shared<const Automaton>(Automaton::build(tpls));
    TaskReducer tr(automaton, {});
    tr.step(fixtures::rec(4, {0, 0, 0, 0}, 10));
    tr.step(fixtures::rec(4, {1, 0, 0, 0}, 20));
    // Restarts the template: the two pending records go out raw, this one is kept.
    auto out = tr.step(fixtures::rec(4, {0, 0, 0, 0}, 30));
    CHECK(out.size() == 2);
    CHECK(tr.pending_size() == 1);
    CHECK(tr.last_step_comparisons() == 2);
    out = tr.step(fixtures::rec(9, {0, 0, 0, 0}, 40));
    CHECK(out.size() == 2);
    CHECK(tr.pending_size() == 0);
    // At the root a mismatch is not retried.
    out = tr.step(fixtures::rec(9, {0, 0, 0, 0}, 50));
    CHECK(out.size() == 1);
    CHECK(tr.last_step_comparisons() == 1);
    CHECK(tr.stats().failures == 2);
}

TEST_CASE("runtime bound") {
    auto t = fixtures::chain("task", 4);
    t.expected_runtime_ns = 30;
    auto records = fixtures::instances_of(t, 3, 1000, 10);  // duration 30
    auto slow = fixtures::instances_of(t, 1, 1000, 11, 100, "task", 1'000'003'000);  // duration 33
    records.insert(records.end(), slow.begin(), slow.end());
    fixtures::number(records);
    const auto res = reduce_stream(records, set_of({t}));
    CHECK(res.counters.matches == 3);
    CHECK(res.counters.temporal_failures == 1);
    CHECK(res.records.size() == 3 + 4);

    const auto relaxed = reduce_stream(records, set_of({t}), {ReduceMode::Ellipsis, false, true});
    CHECK(relaxed.counters.matches == 4);
}

TEST_CASE("inter-arrival bound splits HP aggregates but not Ellipsis records") {
    auto t = fixtures::chain("task", 2);
    t.expected_interarrival_ns = 1000;
    auto records = fixtures::instances_of(t, 3, 1000);
    auto late = fixtures::instances_of(t, 3, 1000, 10, 100, "task", 1'000'000'000 + 2000 + 1500);
    records.insert(records.end(), late.begin(), late.end());
    fixtures::number(records);

    const auto hp = reduce_stream(records, set_of({t}), {ReduceMode::EllipsisHP, true, true});
    REQUIRE(hp.records.size() == 2);
    CHECK(*hp.records[0].rep == 3);
    CHECK(*hp.records[1].rep == 3);

    const auto hp_off = reduce_stream(records, set_of({t}), {ReduceMode::EllipsisHP, true, false});
    REQUIRE(hp_off.records.size() == 1);
    CHECK(*hp_off.records[0].rep == 6);

    const auto base = reduce_stream(records, set_of({t}));
    CHECK(base.records.size() == 6);
    CHECK(base.counters.temporal_failures == 0);
}

TEST_CASE("identity change inside a span is a mismatch") {
    const auto t = fixtures::chain("task", 3);
    auto records = fixtures::instances_of(t, 2, 1000);
    records[4].ids.euid = 0;
    records[4].ids.uid = 1234;
    fixtures::number(records);
    const auto res = reduce_stream(records, set_of({t}));
    CHECK(res.counters.matches == 1);
    CHECK(res.records.size() == 1 + 3);
}

TEST_CASE("single-sequence stream: I + f in Ellipsis, 1 + f in HP") {
    const auto t = fixtures::chain("task", 14);
    const std::size_t f = 25, iterations = 1000;
    auto records = init_records(f);
    auto loop = fixtures::instances_of(t, iterations, 2'500'000);
    records.insert(records.end(), loop.begin(), loop.end());
    fixtures::number(records);

    const auto e = reduce_stream(records, set_of({t}));
    CHECK(e.counters.events_out == iterations + f);
    CHECK(e.counters.events_in == iterations * 14 + f);

    const auto hp = reduce_stream(records, set_of({t}), {ReduceMode::EllipsisHP, true, true});
    CHECK(hp.counters.events_out == 1 + f);
    CHECK(count_templates(hp.records) == 1);
    CHECK(hp.counters.raw_out == f);
}

TEST_CASE("anomaly records stay raw and byte-identical") {
    const auto t = fixtures::chain("task", 4);
    auto records = fixtures::instances_of(t, 10, 1000);
    std::vector<AuditRecord> anomaly{fixtures::rec(322, {0xffffff9c, 0x1000, 577, 0}, 1'000'004'500),
                                     fixtures::rec(4, {9, 0x2000, 4096, 0}, 1'000'004'600),
                                     fixtures::rec(6, {9, 0, 0, 0}, 1'000'004'700)};
    records.insert(records.begin() + 20, anomaly.begin(), anomaly.end());
    fixtures::number(records);
    const auto res = reduce_stream(records, set_of({t}));
    std::vector<std::string> lines;
    for (const auto& r : res.records) lines.push_back(serialize_record(r));
    for (std::size_t k = 20; k < 23; ++k) {
        CHECK(std::find(lines.begin(), lines.end(), serialize_record(records[k])) != lines.end());
    }
    CHECK(res.counters.matches == 10);
}

TEST_CASE("tasks are reduced independently and output keeps input order") {
    const auto a = fixtures::chain("alpha", 3, 4);
    const auto b = fixtures::chain("beta", 2, 3);
    TemplateSet set;
    set.add({"alpha", std::nullopt, std::nullopt}, a);
    set.add({"beta", std::nullopt, std::nullopt}, b);
    auto ra = fixtures::instances_of(a, 4, 1000, 10, 100, "alpha");
    auto rb = fixtures::instances_of(b, 4, 1000, 10, 200, "beta", 1'000'000'005);
    std::vector<AuditRecord> merged;
    std::merge(ra.begin(), ra.end(), rb.begin(), rb.end(), std::back_inserter(merged),
               [](const auto& x, const auto& y) { return x.time_ns() < y.time_ns(); });
    fixtures::number(merged);
    const auto res = reduce_stream(merged, set);
    CHECK(res.counters.matches == 8);
    for (std::size_t i = 1; i < res.records.size(); ++i) {
        CHECK(res.records[i - 1].time_ns() <= res.records[i].time_ns());
    }
    CHECK(res.counters.events_in == res.counters.raw_out + res.counters.covered_events);
}

TEST_CASE("out-of-order timestamps are reported with their index") {
    const auto t = fixtures::chain("task", 3);
    auto records = fixtures::instances_of(t, 3, 1000);
    std::swap(records[4], records[5]);
    try {
        reduce_stream(records, set_of({t}));
        FAIL("expected OutOfOrderTimestamp");
    } catch (const OutOfOrderTimestamp& e) {
        CHECK(e.index() == 5);
    }
}

TEST_CASE("records of tasks without templates pass straight through") {
    const auto t = fixtures::chain("task", 3);
    auto records = fixtures::instances_of(t, 3, 1000, 10, 300, "other");
    fixtures::number(records);
    const auto res = reduce_stream(records, set_of({t}));
    CHECK(serialize_log(res.records) == serialize_log(records));
    CHECK(res.counters.passthrough == records.size());
}

TEST_CASE("comparisons per step do not grow with template length") {
    std::vector<std::uint64_t> maxima;
    for (std::size_t len : {10u, 50u, 100u, 300u}) {
        const auto t = fixtures::chain("task", len);
        auto records = fixtures::instances_of(t, 5, 100'000, 10);
        // one mismatch in the middle of an instance
        records[len + len / 2].args[0] = 999999;
        fixtures::number(records);
        maxima.push_back(reduce_stream(records, set_of({t})).counters.max_comparisons_per_step);
    }
    CHECK(std::adjacent_find(maxima.begin(), maxima.end(), std::not_equal_to<>()) == maxima.end());
    CHECK(maxima.front() == 2);
}
