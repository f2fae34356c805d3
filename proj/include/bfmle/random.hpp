#pragma once

#include <cstdint>
#include <random>

namespace bfmle {

std::uint64_t splitmix64(std::uint64_t z);
// Stream seed for trial `index` of a run seeded with `seed`.
std::uint64_t sub_seed(std::uint64_t seed, std::uint64_t index);

// Single-threaded deterministic generator; identical seeds give identical streams.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : engine_(seed) {}

    // [0, 1)
    double uniform();
    double uniform(double lo, double hi);
    // Inclusive range.
    long uniform_int(long lo, long hi);
    // Marsaglia polar method.
    double normal();

private:
    std::mt19937_64 engine_;
    double spare_ = 0.0;
    bool has_spare_ = false;
};

} // namespace bfmle
