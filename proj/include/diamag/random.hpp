#ifndef DIAMAG_RANDOM_HPP
#define DIAMAG_RANDOM_HPP

#include <cmath>
#include <cstdint>
#include <random>

namespace diamag {

// SplitMix64 step, used to expand one user seed into independent
// sub-stream seeds (one per trial / trace) in a portable way.
inline std::uint64_t splitmix64(std::uint64_t& state) {
    std::uint64_t z = (state += 0x9e3779b97f4a7c15ULL);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

inline std::uint64_t derive_seed(std::uint64_t master, std::uint64_t index) {
    std::uint64_t s = master + 0x632be59bd9b4e019ULL * (index + 1);
    return splitmix64(s);
}

// Deterministic Gaussian/uniform source. The raw stream is std::mt19937_64
// (output sequence fixed by the standard) and the Gaussian transform is an
// explicit Box-Muller, so traces are bit-reproducible across platforms and
// standard libraries. std::normal_distribution is deliberately avoided:
// its algorithm is implementation-defined.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : engine_(seed) {}

    // uniform in (0, 1]; never returns 0 so log() below is safe
    double uniform() {
        const std::uint64_t u = engine_();
        return (static_cast<double>(u >> 11) + 1.0) * 0x1.0p-53;
    }

    double gaussian() {
        if (have_spare_) {
            have_spare_ = false;
            return spare_;
        }
        const double u1 = uniform();
        const double u2 = uniform();
        const double r = std::sqrt(-2.0 * std::log(u1));
        const double a = 2.0 * M_PI * u2;
        spare_ = r * std::sin(a);
        have_spare_ = true;
        return r * std::cos(a);
    }

    std::uint64_t raw() { return engine_(); }

private:
    std::mt19937_64 engine_;
    double spare_ = 0.0;
    bool have_spare_ = false;
};

} // namespace diamag

#endif
