#ifndef TCPSIM_RNG_HPP
#define TCPSIM_RNG_HPP

#include <cstdint>

namespace tcpsim {

// SplitMix64. Fixed algorithm (not std::mt19937) so that a seed produces the
// same stream on every platform, which keeps traces byte-identical.
class SplitMix64 {
public:
    explicit SplitMix64(std::uint64_t seed) : state_(seed) {}

    std::uint64_t next() {
        std::uint64_t z = (state_ += 0x9E3779B97F4A7C15ull);
        z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
        z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
        return z ^ (z >> 31);
    }

    // Uniform draw in [0, 1) with 53 random bits.
    double uniform01() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

private:
    std::uint64_t state_;
};

}  // namespace tcpsim

#endif
