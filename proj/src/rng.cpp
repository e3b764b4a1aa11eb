#include "mobelcov/rng.hpp"

#include <algorithm>

namespace mobelcov {

namespace {

std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

std::uint64_t fnv1a(std::string_view text) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : text) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    return h;
}

}  // namespace

std::uint64_t derive_seed(std::uint64_t master, std::string_view label, std::uint64_t counter) {
    return splitmix64(splitmix64(master ^ fnv1a(label)) + counter);
}

double standard_normal(Rng& rng) {
    std::normal_distribution<double> dist(0.0, 1.0);
    return dist(rng);
}

double uniform01(Rng& rng) {
    std::uniform_real_distribution<double> dist(0.0, 1.0);
    return dist(rng);
}

std::int64_t binomial(Rng& rng, std::int64_t trials, double probability) {
    if (trials <= 0 || probability <= 0.0) return 0;
    if (probability >= 1.0) return trials;
    std::binomial_distribution<std::int64_t> dist(trials, probability);
    return std::min(dist(rng), trials);
}

}  // namespace mobelcov
