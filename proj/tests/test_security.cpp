#include <doctest.h>

#include <cmath>

#include "macc/security.hpp"
#include "test_support.hpp"

using namespace macc;

namespace {

const JointUX kDiag(2, 2, {0.5, 0.0, 0.0, 0.5});
const JointUX kSkew(2, 2, {0.4, 0.1, 0.1, 0.4});        // gamma0=beta1=0.4
const JointUX kUniform4(2, 2, {0.25, 0.25, 0.25, 0.25});

}  // namespace

TEST_CASE("DistortionMatrix invariants") {
    const auto h = DistortionMatrix::hamming(2);
    CHECK(h(0, 0) == 0.0);
    CHECK(h(0, 1) == 1.0);
    CHECK(h.bound() == 2.0);
    CHECK(h.is_hamming());
    CHECK_THROWS_AS(DistortionMatrix(2, {0.0, -1.0, 1.0, 0.0}, 2.0), std::invalid_argument);
    CHECK_THROWS_AS(DistortionMatrix(2, {0.0, 2.0, 1.0, 0.0}, 2.0), std::invalid_argument);
}

TEST_CASE("bayes_estimator") {
    const auto d = DistortionMatrix::hamming(2);
    SUBCASE("perfectly revealing joint") {
        const auto e = bayes_estimator(kDiag, d);
        CHECK(e.map[0] == 0);
        CHECK(e.map[1] == 1);
        CHECK(e.per_u_risk[0] == 0.0);
        CHECK(e.per_u_risk[1] == 0.0);
    }
    SUBCASE("posterior comparison per u") {
        const auto e = bayes_estimator(kSkew, d);
        CHECK(e.map[0] == 0);
        CHECK(e.map[1] == 1);
        CHECK(e.per_u_risk[0] == doctest::Approx(0.1).epsilon(1e-15));
        CHECK(e.per_u_risk[1] == doctest::Approx(0.1).epsilon(1e-15));
    }
    SUBCASE("ties break to the lowest index") {
        const auto e = bayes_estimator(kUniform4, d);
        CHECK(e.map[0] == 0);
        CHECK(e.map[1] == 0);
        CHECK(e.per_u_risk[0] == doctest::Approx(0.25).epsilon(1e-15));
        CHECK(e.per_u_risk[1] == doctest::Approx(0.25).epsilon(1e-15));
    }
    SUBCASE("zero-mass u contributes nothing") {
        const JointUX j(2, 2, {0.6, 0.4, 0.0, 0.0});
        const auto e = bayes_estimator(j, DistortionMatrix::hamming(2));
        CHECK(e.map[1] == 0);
        CHECK(e.per_u_risk[1] == 0.0);
    }
}

TEST_CASE("security_level") {
    const auto d = DistortionMatrix::hamming(2);
    CHECK(security_level(kSkew, d).sigma == doctest::Approx(0.2).epsilon(1e-15));
    CHECK(security_level(kDiag, d).sigma == 0.0);
    CHECK(security_level(kUniform4, d).sigma == doctest::Approx(0.5).epsilon(1e-15));
    CHECK(security_level(kSkew, d).feasible_for(0.2));
    CHECK_FALSE(security_level(kSkew, d).feasible_for(0.21));
}

TEST_CASE("nfold_bayes_risk collapses to the single-letter value") {
    const auto d = DistortionMatrix::hamming(2);
    CHECK(nfold_bayes_risk(kSkew, d, 1) == security_level(kSkew, d).sigma);
    CHECK(nfold_bayes_risk(kSkew, d, 5) == doctest::Approx(0.2).epsilon(1e-15));
    CHECK(nfold_bayes_risk(kDiag, d, 3) == 0.0);
}

TEST_CASE("brute_force_nfold_min") {
    const auto d = DistortionMatrix::hamming(2);
    CHECK(brute_force_nfold_min(kSkew, d, 2) == doctest::Approx(0.2).epsilon(1e-12));
    CHECK(brute_force_nfold_min(kDiag, d, 2) == 0.0);
    CHECK(brute_force_nfold_min(kUniform4, d, 2) == doctest::Approx(0.5).epsilon(1e-12));
    CHECK_THROWS_AS(brute_force_nfold_min(kSkew, d, 4), std::invalid_argument);
    CHECK_THROWS_AS(
        brute_force_nfold_min(JointUX(4, 4, std::vector<double>(16, 1.0 / 16)),
                              DistortionMatrix::hamming(4), 2),
        std::invalid_argument);
}

TEST_CASE("brute force against literal enumeration of all 256 maps, binary n=2") {
    RngStream rng(101, 0);
    const auto d = DistortionMatrix::hamming(2);
    for (int it = 0; it < 10; ++it) {
        const auto j = macc_test::random_joint(rng, 2, 2);
        // every function f : U^2 -> X^2 encoded in 8 bits (2 bits per u-pair)
        double best = 1e300;
        for (int code = 0; code < 256; ++code) {
            double e = 0.0;
            for (int u0 = 0; u0 < 2; ++u0)
                for (int u1 = 0; u1 < 2; ++u1) {
                    const int slot = u0 * 2 + u1;
                    const int xh0 = (code >> (2 * slot)) & 1;
                    const int xh1 = (code >> (2 * slot + 1)) & 1;
                    for (int x0 = 0; x0 < 2; ++x0)
                        for (int x1 = 0; x1 < 2; ++x1)
                            e += j(u0, x0) * j(u1, x1) * 0.5 *
                                 (d(xh0, x0) + d(xh1, x1));
                }
            best = std::min(best, e);
        }
        CHECK(brute_force_nfold_min(j, d, 2) == doctest::Approx(best).epsilon(1e-13));
    }
}

TEST_CASE("property: separability of the n-fold estimator") {
    RngStream rng(103, 0);
    for (int it = 0; it < 50; ++it) {
        const auto j = macc_test::random_joint(rng, 2, 2);
        const auto d = DistortionMatrix::hamming(2);
        for (int n : {2, 3})
            CHECK(std::abs(brute_force_nfold_min(j, d, n) - nfold_bayes_risk(j, d, n)) <= 1e-12);
    }
    for (int it = 0; it < 20; ++it) {
        const auto j = macc_test::random_joint(rng, 3, 3);
        const auto d = macc_test::random_distortion(rng, 3);
        for (int n : {2, 3})
            CHECK(std::abs(brute_force_nfold_min(j, d, n) - nfold_bayes_risk(j, d, n)) <= 1e-12);
    }
}

TEST_CASE("property: side information through a Markov chain does not help") {
    // X <-> U <-> V with V a randomized function of U: the minimum
    // over maps (u,v) -> x equals the minimum over maps u -> x.
    RngStream rng(107, 0);
    for (int it = 0; it < 50; ++it) {
        const std::size_t nu = 2 + rng.below(2), nx = 2 + rng.below(2), nv = 1 + rng.below(3);
        const auto j = macc_test::random_joint(rng, nu, nx);
        const auto d = macc_test::random_distortion(rng, nx);
        const auto ch_vu = macc_test::random_channel(rng, nu, nv);

        double with_v = 0.0;
        std::vector<double> w(nx);
        for (std::size_t u = 0; u < nu; ++u)
            for (std::size_t v = 0; v < nv; ++v) {
                for (std::size_t x = 0; x < nx; ++x) w[x] = j(u, x) * ch_vu(u, v);
                with_v += min_weighted_risk(d, w).second;
            }
        CHECK(std::abs(with_v - security_level(j, d).sigma) <= 1e-12);
    }
}

TEST_CASE("max_security") {
    CHECK(max_security(DistortionMatrix::hamming(2)) == 0.5);
    CHECK(max_security(DistortionMatrix::hamming(4)) == 0.75);
    CHECK(max_security(DistortionMatrix(2, {0.0, 0.0, 0.0, 0.0}, 1.0)) == 0.0);

    SUBCASE("k=2 against a golden-section oracle") {
        RngStream rng(109, 0);
        for (int it = 0; it < 20; ++it) {
            const auto d = macc_test::random_distortion(rng, 2);
            // payoff is concave in q0; golden-section to machine width
            const auto payoff = [&](double q0) {
                const double w[2] = {q0, 1.0 - q0};
                return min_weighted_risk(d, w).second;
            };
            const double gr = 0.5 * (std::sqrt(5.0) - 1.0);
            double lo = 0.0, hi = 1.0;
            double m1 = hi - gr * (hi - lo), m2 = lo + gr * (hi - lo);
            double f1 = payoff(m1), f2 = payoff(m2);
            while (hi - lo > 1e-12) {
                if (f1 < f2) {
                    lo = m1; m1 = m2; f1 = f2;
                    m2 = lo + gr * (hi - lo); f2 = payoff(m2);
                } else {
                    hi = m2; m2 = m1; f2 = f1;
                    m1 = hi - gr * (hi - lo); f1 = payoff(m1);
                }
            }
            const double oracle = std::max(payoff(0.5 * (lo + hi)), std::max(payoff(0.0), payoff(1.0)));
            CHECK(max_security(d) == doctest::Approx(oracle).epsilon(1e-6));
        }
    }
}

TEST_CASE("property: security level stays within [0, max_security]") {
    RngStream rng(113, 0);
    for (int it = 0; it < 100; ++it) {
        const std::size_t k = 2 + rng.below(3);
        const auto j = macc_test::random_joint(rng, 2 + rng.below(2), k);
        const auto d = macc_test::random_distortion(rng, k);
        const double sigma = security_level(j, d).sigma;
        CHECK(sigma >= 0.0);
        CHECK(sigma <= max_security(d) + 1e-6);
    }
}

TEST_CASE("property: monotone feasibility of the security predicate") {
    RngStream rng(127, 0);
    for (int it = 0; it < 50; ++it) {
        const auto j = macc_test::random_joint(rng, 2, 2);
        const auto lvl = security_level(j, DistortionMatrix::hamming(2));
        const double a2 = lvl.sigma * rng.next_unit();
        const double a1 = a2 * rng.next_unit();
        CHECK(lvl.feasible_for(a2));
        CHECK(lvl.feasible_for(a1));  // a1 <= a2
    }
}

TEST_CASE("property: the Bayes risk lower-bounds every explicit map") {
    RngStream rng(131, 0);
    for (int it = 0; it < 100; ++it) {
        const std::size_t nu = 2 + rng.below(2), nx = 2 + rng.below(2);
        const auto j = macc_test::random_joint(rng, nu, nx);
        const auto d = macc_test::random_distortion(rng, nx);
        const double sigma = security_level(j, d).sigma;
        std::vector<std::size_t> pi(nu);
        for (auto& p : pi) p = rng.below(nx);
        double risk = 0.0;
        for (std::size_t u = 0; u < nu; ++u)
            for (std::size_t x = 0; x < nx; ++x) risk += d(pi[u], x) * j(u, x);
        CHECK(risk >= sigma - 1e-12);
    }
}
