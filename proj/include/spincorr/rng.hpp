// Deterministic per-trial random streams: every trial derives its own
// generator from (seed, trial index), so results are independent of how
// trials are scheduled across threads.
#pragma once

#include <cstdint>

namespace spincorr {

/// splitmix64 step (Vigna); also used to derive stream states.
inline std::uint64_t splitmix64(std::uint64_t& state) {
    std::uint64_t z = (state += 0x9e3779b97f4a7c15ULL);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

/// One independent stream per (seed, stream index).
class TrialRng {
  public:
    TrialRng(std::uint64_t seed, std::uint64_t stream) {
        std::uint64_t s = seed;
        std::uint64_t a = splitmix64(s);
        s = a ^ (stream * 0xd1b54a32d192ed03ULL + 0x2545f4914f6cdd1dULL);
        splitmix64(s);
        state_ = s;
    }

    std::uint64_t next_u64() { return splitmix64(state_); }

    /// Uniform in [0, 1) with 53-bit resolution.
    double next_double() {
        return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
    }

  private:
    std::uint64_t state_ = 0;
};

}  // namespace spincorr
