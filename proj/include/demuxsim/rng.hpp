#pragma once

#include <cmath>
#include <cstdint>
#include <random>

namespace demuxsim {

// splitmix64 step (Vigna). Bijective on the state, used only for seed derivation.
inline uint64_t splitmix64(uint64_t& state) {
    uint64_t z = (state += 0x9E3779B97F4A7C15ull);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
    return z ^ (z >> 31);
}

// Seed for the substream identified by (stage tag, chunk index). One master
// seed fully determines every draw in a run; distinct (tag, chunk) pairs map
// to distinct engine seeds.
inline uint64_t substream_seed(uint64_t seed, uint64_t tag, uint64_t chunk = 0) {
    uint64_t s = seed;
    (void)splitmix64(s);
    s ^= tag;
    (void)splitmix64(s);
    s ^= chunk;
    return splitmix64(s);
}

// Substream tags for the simulation stages. Loss stages get loss_base + i in
// chain order; detectors get detect_base + channel.
namespace stream_tag {
constexpr uint64_t emission = 0x01;
constexpr uint64_t route = 0x02;
constexpr uint64_t hbt = 0x03;
constexpr uint64_t loss_base = 0x100;
constexpr uint64_t detect_base = 0x200;
}  // namespace stream_tag

// mt19937_64 wrapped with the few samplers the simulator needs. The uniform
// uses the top 53 bits, so draws are exactly representable doubles in [0,1).
class RandomStream {
public:
    explicit RandomStream(uint64_t seed) : eng_(seed) {}

    double uniform() { return static_cast<double>(eng_() >> 11) * 0x1.0p-53; }

    bool bernoulli(double p) { return uniform() < p; }

    // rate in 1/unit, result in unit
    double exponential(double rate) { return -std::log1p(-uniform()) / rate; }

    // Box-Muller pair, one value cached
    double normal(double sigma) {
        if (have_spare_) {
            have_spare_ = false;
            return spare_ * sigma;
        }
        double u1 = 1.0 - uniform();  // (0, 1]
        double u2 = uniform();
        double r = std::sqrt(-2.0 * std::log(u1));
        double a = 6.283185307179586476925286766559 * u2;
        spare_ = r * std::sin(a);
        have_spare_ = true;
        return r * std::cos(a) * sigma;
    }

    uint64_t raw() { return eng_(); }

private:
    std::mt19937_64 eng_;
    bool have_spare_ = false;
    double spare_ = 0.0;
};

}  // namespace demuxsim
