#include "ssfgnet/rng.hpp"

namespace ssfgnet {

namespace {

std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

std::uint64_t fnv1a(std::string_view s) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : s) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    return h;
}

} // namespace

std::uint64_t mix_seed(std::uint64_t seed, std::string_view name, std::uint64_t index) {
    return splitmix64(splitmix64(seed ^ fnv1a(name)) + index);
}

Rng::Rng(std::uint64_t seed) : seed_(seed), engine_(splitmix64(seed)) {}

Rng Rng::split(std::string_view name, std::uint64_t index) const { return Rng(mix_seed(seed_, name, index)); }

std::uint64_t Rng::next_u64() {
    ++draws_;
    return engine_();
}

double Rng::uniform() {
    ++draws_;
    return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
}

double Rng::normal() {
    ++draws_;
    return normal_(engine_);
}

std::uint64_t Rng::below(std::uint64_t n) {
    ++draws_;
    std::uniform_int_distribution<std::uint64_t> dist(0, n - 1);
    return dist(engine_);
}

bool Rng::operator==(const Rng& other) const {
    return seed_ == other.seed_ && draws_ == other.draws_ && engine_ == other.engine_ && normal_ == other.normal_;
}

} // namespace ssfgnet
