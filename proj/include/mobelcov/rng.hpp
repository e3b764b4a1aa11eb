#pragma once

#include <cstdint>
#include <random>
#include <string_view>

namespace mobelcov {

using Rng = std::mt19937_64;

// Every random stream in the project is derived from a master seed through a
// component label and a counter, e.g. ("pcn/episode", 17). No ambient entropy.
std::uint64_t derive_seed(std::uint64_t master, std::string_view label, std::uint64_t counter = 0);

inline Rng make_stream(std::uint64_t master, std::string_view label, std::uint64_t counter = 0) {
    return Rng(derive_seed(master, label, counter));
}

double standard_normal(Rng& rng);
double uniform01(Rng& rng);
std::int64_t binomial(Rng& rng, std::int64_t trials, double probability);

}  // namespace mobelcov
