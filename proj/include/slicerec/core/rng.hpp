#pragma once

#include <cstdint>
#include <random>
#include <sstream>
#include <string>

namespace srec {

// Deterministic RNG used across dataset generation, sampling, and training.
// One engine per logical stream; never share a Rng between threads.
class Rng {
public:
    explicit Rng(uint64_t seed = 0) : engine_(seed) {}

    double uniform(double lo = 0.0, double hi = 1.0) {
        return std::uniform_real_distribution<double>(lo, hi)(engine_);
    }
    double normal(double mean = 0.0, double stddev = 1.0) {
        return std::normal_distribution<double>(mean, stddev)(engine_);
    }
    // Uniform integer in [lo, hi] inclusive.
    int64_t integer(int64_t lo, int64_t hi) {
        return std::uniform_int_distribution<int64_t>(lo, hi)(engine_);
    }
    uint64_t next_u64() { return engine_(); }

    // Derive an independent child stream (e.g. one per dataset record).
    Rng fork(uint64_t stream) {
        std::seed_seq seq{engine_(), static_cast<uint64_t>(0x9e3779b97f4a7c15ULL), stream};
        std::mt19937_64 child(seq);
        Rng r(0);
        r.engine_ = child;
        return r;
    }

    std::string save_state() const {
        std::ostringstream os;
        os << engine_;
        return os.str();
    }
    void load_state(const std::string& s) {
        std::istringstream is(s);
        is >> engine_;
    }

    std::mt19937_64& engine() { return engine_; }

private:
    std::mt19937_64 engine_;
};

}  // namespace srec
