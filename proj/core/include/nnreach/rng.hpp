#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <random>

namespace nnreach {

// Seeded uniform generator. Draws are produced from raw mt19937_64 output
// rather than std::uniform_real_distribution, whose sequence is
// implementation-defined; results files must replay bit-exactly.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : gen_(seed) {}

    double unit() {
        // 53 random bits -> [0, 1)
        return static_cast<double>(gen_() >> 11) * 0x1.0p-53;
    }

    double uniform(double lo, double hi) { return lo + (hi - lo) * unit(); }

    // Uniform point in an axis-aligned box.
    Eigen::VectorXd point(const Eigen::VectorXd& lo, const Eigen::VectorXd& hi) {
        Eigen::VectorXd x(lo.size());
        for (Eigen::Index i = 0; i < lo.size(); ++i) x[i] = uniform(lo[i], hi[i]);
        return x;
    }

    std::uint64_t bits() { return gen_(); }

private:
    std::mt19937_64 gen_;
};

}  // namespace nnreach
