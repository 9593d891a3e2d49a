#pragma once

#include <array>
#include <cstdint>

namespace mnpiv {

/// Deterministic xoshiro256++ generator with explicit stream derivation.
///
/// Streams are derived from a (seed, stream) pair so that replication r of a
/// Monte Carlo run or bootstrap draw b always sees the same values no matter
/// how work is scheduled across threads. Normal variates use the inverse-CDF
/// so output is identical across platforms.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : Rng(seed, 0) {}
    Rng(std::uint64_t seed, std::uint64_t stream);

    std::uint64_t next();

    /// Uniform draw strictly inside (0,1).
    double uniform01();

    /// Uniform draw on (a,b).
    double uniform(double a, double b);

    /// Standard normal via norm_quantile(uniform01()).
    double normal();

private:
    std::array<std::uint64_t, 4> state_;
};

/// splitmix64 step, exposed for seed mixing elsewhere.
std::uint64_t splitmix64(std::uint64_t& state);

/// Stateless combine of a base seed with a stream index.
std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t stream);

} // namespace mnpiv
