// Shared generators for randomized tests; all randomness flows through
// seeded RngStreams so every run checks the same cases.

#ifndef MACC_TEST_SUPPORT_HPP
#define MACC_TEST_SUPPORT_HPP

#include <cmath>
#include <vector>

#include "macc/prob.hpp"
#include "macc/rng.hpp"
#include "macc/security.hpp"

namespace macc_test {

inline std::vector<double> dirichlet(macc::RngStream& rng, std::size_t k) {
    std::vector<double> v(k);
    double sum = 0.0;
    for (double& x : v) {
        x = -std::log(1.0 - rng.next_unit());
        sum += x;
    }
    for (double& x : v) x /= sum;
    return v;
}

inline macc::Dist random_dist(macc::RngStream& rng, std::size_t k) {
    return macc::Dist(dirichlet(rng, k));
}

inline macc::Channel random_channel(macc::RngStream& rng, std::size_t in, std::size_t out) {
    std::vector<double> rows;
    rows.reserve(in * out);
    for (std::size_t r = 0; r < in; ++r) {
        const auto row = dirichlet(rng, out);
        rows.insert(rows.end(), row.begin(), row.end());
    }
    return macc::Channel(in, out, std::move(rows));
}

inline macc::JointUX random_joint(macc::RngStream& rng, std::size_t nu, std::size_t nx) {
    return macc::JointUX(nu, nx, dirichlet(rng, nu * nx));
}

inline macc::DistortionMatrix random_distortion(macc::RngStream& rng, std::size_t k) {
    std::vector<double> cells(k * k);
    for (double& c : cells) c = 1.9 * rng.next_unit();
    return macc::DistortionMatrix(k, std::move(cells), 2.0);
}

}  // namespace macc_test

#endif
