#pragma once

#include <chrono>
#include <string>
#include <utility>
#include <vector>

#include "xopt/config.hpp"
#include "xopt/scenario.hpp"

namespace xopt {

std::vector<std::string> builtin_names();
// The nine adversarial scenarios, in suite order.
std::vector<std::string> misbehavior_names();

// Throws std::invalid_argument for an unknown name.
ScenarioConfig builtin(const std::string& name, std::uint64_t seed = 7);

// Phantom bids: `k` unfunded-intent escrows racing one genuine buyer.
ScenarioConfig phantom(int k, std::uint64_t seed = 7);

// A run plus every check its config asks for: conservation, declared
// theorems, declared balance deltas.
struct Verdict {
    std::string scenario;
    RunResult result;
    std::vector<std::pair<std::string, CheckResult>> checks;
    std::chrono::duration<double> elapsed{};

    bool pass() const;
};

Verdict evaluate(const ScenarioConfig& cfg);

}  // namespace xopt
