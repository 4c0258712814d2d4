#include "ellipsis/reducer.hpp"

#include <set>

namespace ellipsis {

Automaton Automaton::build(std::span<const Template> templates) {
    if (templates.empty()) throw InvariantViolation("automaton needs at least one template");
    Automaton a;
    a.templates_.assign(templates.begin(), templates.end());
    a.states_.emplace_back();

    std::set<std::string> names;
    for (std::size_t ti = 0; ti < a.templates_.size(); ++ti) {
        const auto& t = a.templates_[ti];
        if (!names.insert(t.name).second) throw DuplicateName("duplicate template name '" + t.name + "'");
        if (t.entries.empty()) throw InvariantViolation("template '" + t.name + "' has no entries");

        StateId cur = kRoot;
        a.states_[cur].reachable.push_back(ti);
        for (const auto& entry : t.entries) {
            if (auto acc = a.states_[cur].accepts) {
                throw PrefixConflict("template '" + a.templates_[*acc].name + "' is a prefix of '" + t.name + "'");
            }
            StateId next = 0;
            for (const auto& [e, child] : a.states_[cur].children) {
                if (e == entry) {
                    next = child;
                    break;
                }
            }
            if (next == 0) {
                next = a.states_.size();
                State s;
                s.depth = a.states_[cur].depth + 1;
                a.states_.push_back(std::move(s));
                a.states_[cur].children.emplace_back(entry, next);
            }
            cur = next;
            a.states_[cur].reachable.push_back(ti);
        }
        auto& end = a.states_[cur];
        if (end.accepts) {
            throw PrefixConflict("templates '" + a.templates_[*end.accepts].name + "' and '" + t.name +
                                 "' have identical entries");
        }
        if (!end.children.empty()) {
            throw PrefixConflict("template '" + t.name + "' is a prefix of another template");
        }
        end.accepts = ti;
    }
    return a;
}

std::optional<Automaton::StateId> Automaton::advance(StateId from, const AuditRecord& record,
                                                     std::uint64_t& comparisons) const {
    for (const auto& [entry, child] : states_[from].children) {
        ++comparisons;
        if (entry_matches(entry, record)) return child;
    }
    return std::nullopt;
}

std::vector<std::string> Automaton::reachable_names(StateId id) const {
    std::vector<std::string> out;
    for (auto ti : states_.at(id).reachable) out.push_back(templates_[ti].name);
    return out;
}

}  // namespace ellipsis
