#pragma once

#include <algorithm>
#include <string>
#include <vector>

#include "xopt/contracts.hpp"
#include "xopt/ledger.hpp"

namespace xopt::test {

// Submits `c` so that it confirms exactly at `tick` and returns that
// tick's events.
inline std::vector<Event> land(World& w, const Party& by, Call c, Tick tick) {
    w.advance(tick - w.params().confirmation_lag);
    w.submit(by, std::move(c));
    return w.advance(tick);
}

inline const Event* find(const std::vector<Event>& events, const std::string& kind) {
    auto it = std::find_if(events.begin(), events.end(), [&](const Event& e) { return e.kind == kind; });
    return it == events.end() ? nullptr : &*it;
}

inline std::string reason(const std::vector<Event>& events) {
    const Event* e = find(events, "rejected");
    return e ? *e->field("reason") : std::string();
}

}  // namespace xopt::test
