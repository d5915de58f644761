#pragma once

#include <cmath>
#include <cstdint>

namespace girsanov {

// Counter-based splittable generator in the splitmix64 family. A stream is
// keyed by (seed, path index, purpose); draws depend only on the key and the
// position in the stream, never on scheduling, which is what makes ensemble
// construction reproducible under any thread count.
enum class StreamPurpose : std::uint64_t {
    gaussians = 1,
    initial = 2,
    jump_times = 3,
    thinning = 4,
    marks = 5,
    generic = 6,
};

namespace detail {
inline std::uint64_t mix64(std::uint64_t z) {
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
}
}  // namespace detail

class RandomStream {
public:
    RandomStream(std::uint64_t seed, std::uint64_t path_index, StreamPurpose purpose) {
        std::uint64_t k = detail::mix64(seed + 0x9E3779B97F4A7C15ULL);
        k = detail::mix64(k ^ (path_index * 0xD1342543DE82EF95ULL));
        state_ = detail::mix64(k ^ (static_cast<std::uint64_t>(purpose) * 0x2545F4914F6CDD1DULL));
    }

    std::uint64_t next_u64() {
        state_ += 0x9E3779B97F4A7C15ULL;
        return detail::mix64(state_);
    }

    // Uniform on (0,1]: never 0, so logs are safe.
    double u01() {
        return (static_cast<double>(next_u64() >> 11) + 1.0) * 0x1.0p-53;
    }

    double gaussian() {
        if (have_spare_) {
            have_spare_ = false;
            return spare_;
        }
        double u1 = u01();
        double u2 = u01();
        double r = std::sqrt(-2.0 * std::log(u1));
        double a = 6.283185307179586476925286766559 * u2;
        spare_ = r * std::sin(a);
        have_spare_ = true;
        return r * std::cos(a);
    }

    double exponential(double rate = 1.0) { return -std::log(u01()) / rate; }

private:
    std::uint64_t state_ = 0;
    double spare_ = 0.0;
    bool have_spare_ = false;
};

}  // namespace girsanov
