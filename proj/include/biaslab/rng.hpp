#pragma once

#include <cstdint>
#include <random>
#include <string_view>

namespace biaslab {

/// Splits one root seed into independent named generators so that adding a
/// new consumer of randomness never shifts the draws seen by another.
class SeedStreams {
public:
    explicit SeedStreams(std::uint64_t root) : root_(root) {}

    std::uint64_t root() const noexcept { return root_; }

    std::mt19937_64 stream(std::string_view name) const {
        // FNV-1a over the stream name.
        std::uint64_t h = 0xcbf29ce484222325ULL;
        for (unsigned char ch : name) {
            h ^= ch;
            h *= 0x100000001b3ULL;
        }
        std::seed_seq seq{static_cast<std::uint32_t>(root_), static_cast<std::uint32_t>(root_ >> 32),
                          static_cast<std::uint32_t>(h), static_cast<std::uint32_t>(h >> 32)};
        return std::mt19937_64(seq);
    }

private:
    std::uint64_t root_;
};

}  // namespace biaslab
