#ifndef OPGRAPH_RNG_HPP
#define OPGRAPH_RNG_HPP

#include <cmath>
#include <complex>
#include <cstdint>
#include <random>
#include <string>

namespace opg {

/// splitmix64 finalizer; used to derive independent child seeds.
inline std::uint64_t mix64(std::uint64_t z) {
    z += 0x9e3779b97f4a7c15ULL;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

inline std::uint64_t hash_label(const std::string& s) {
    std::uint64_t h = 1469598103934665603ULL; // FNV-1a
    for (unsigned char c : s) {
        h ^= c;
        h *= 1099511628211ULL;
    }
    return h;
}

/// Seeded generator. Gaussian draws use Box-Muller over mt19937_64 so the
/// stream does not depend on the standard library's distribution internals.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : eng_(mix64(seed)), seed_(seed) {}

    std::uint64_t seed() const { return seed_; }

    /// Independent child stream for a named sub-task.
    Rng child(const std::string& label) const {
        return Rng(mix64(seed_ ^ hash_label(label)));
    }
    Rng child(std::uint64_t salt) const { return Rng(mix64(seed_ ^ mix64(salt))); }

    /// Uniform in [0, 1).
    double uniform() {
        return static_cast<double>(eng_() >> 11) * 0x1.0p-53;
    }

    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

    std::uint64_t integer(std::uint64_t n) { // in [0, n)
        return eng_() % n;
    }

    double gaussian() {
        if (have_spare_) {
            have_spare_ = false;
            return spare_;
        }
        double u1 = 0.0;
        do {
            u1 = uniform();
        } while (u1 <= 0.0);
        const double u2 = uniform();
        const double r = std::sqrt(-2.0 * std::log(u1));
        const double a = 6.283185307179586476925286766559 * u2;
        spare_ = r * std::sin(a);
        have_spare_ = true;
        return r * std::cos(a);
    }

    /// Standard complex normal, E|z|^2 = 1.
    std::complex<double> cgaussian() {
        const double inv_sqrt2 = 0.70710678118654752440;
        return {gaussian() * inv_sqrt2, gaussian() * inv_sqrt2};
    }

    std::mt19937_64& engine() { return eng_; }

private:
    std::mt19937_64 eng_;
    std::uint64_t seed_;
    double spare_ = 0.0;
    bool have_spare_ = false;
};

} // namespace opg

#endif
