#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>

namespace dexflow {

// Violated precondition or shape/config contract.
struct ContractViolation : std::logic_error {
    explicit ContractViolation(const std::string& msg) : std::logic_error(msg) {}
};

// NaN/Inf detected at a graph output or during integration; `where` carries
// the offending node id or step index when known.
struct NumericFailure : std::runtime_error {
    explicit NumericFailure(const std::string& msg, long where = -1)
        : std::runtime_error(msg), where(where) {}
    long where;
};

// splitmix64; used to derive independent sub-seeds from (seed, counter) pairs
// so resumed runs and parallel episodes see identical streams.
inline uint64_t mix_seed(uint64_t seed, uint64_t counter) {
    uint64_t z = seed + 0x9e3779b97f4a7c15ULL * (counter + 1);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

}  // namespace dexflow
