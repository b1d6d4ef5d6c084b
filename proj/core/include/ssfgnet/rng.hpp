#pragma once

#include <cstdint>
#include <random>
#include <string_view>

namespace ssfgnet {

/// Seedable generator with named, independent sub-streams.
///
/// `split(name, index)` derives a child from this generator's *seed*, not its
/// current state, so a stream's contents never depend on how much another
/// stream has been consumed.
class Rng {
public:
    explicit Rng(std::uint64_t seed = 0);

    Rng split(std::string_view name, std::uint64_t index = 0) const;

    std::uint64_t seed() const noexcept { return seed_; }
    /// Number of variates produced so far.
    std::uint64_t draws() const noexcept { return draws_; }

    std::uint64_t next_u64();
    /// Uniform in [0, 1) with 53 random bits.
    double uniform();
    double normal();
    /// Uniform integer in [0, n).
    std::uint64_t below(std::uint64_t n);

    bool operator==(const Rng& other) const;

private:
    std::uint64_t seed_;
    std::uint64_t draws_ = 0;
    std::mt19937_64 engine_;
    std::normal_distribution<double> normal_{0.0, 1.0};
};

std::uint64_t mix_seed(std::uint64_t seed, std::string_view name, std::uint64_t index);

} // namespace ssfgnet
