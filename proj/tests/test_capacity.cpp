#include <doctest.h>

#include <cmath>

#include "macc/capacity.hpp"
#include "test_support.hpp"

using namespace macc;

TEST_CASE("closed form endpoints and values") {
    // full security empties the rate for every crossover
    for (double p1 : {0.0, 0.05, 0.1, 0.2, 0.5})
        CHECK(binary_capacity_closed_form(BinaryParams(p1, 0.5)) == 0.0);

    CHECK(binary_capacity_closed_form(BinaryParams(0.0, 0.0)) == 1.0);
    CHECK(binary_capacity_closed_form(BinaryParams(0.1, 0.1)) ==
          doctest::Approx(0.319922954271720).epsilon(1e-9));
    // alpha above 1/2 leaves no feasible perturbation
    CHECK(binary_capacity_closed_form(BinaryParams(0.1, 0.6)) == 0.0);

    CHECK_THROWS_AS(BinaryParams(0.6, 0.1), std::invalid_argument);
    CHECK_THROWS_AS(BinaryParams(0.1, -0.1), std::invalid_argument);
}

TEST_CASE("achieving joint matches the symmetric-perturbation form") {
    const auto j = binary_achieving_joint(0.1);
    CHECK(j(0, 0) == doctest::Approx(0.45).epsilon(1e-15));
    CHECK(j(0, 1) == doctest::Approx(0.05).epsilon(1e-15));
    CHECK(j(1, 0) == doctest::Approx(0.05).epsilon(1e-15));
    CHECK(j(1, 1) == doctest::Approx(0.45).epsilon(1e-15));
    CHECK(security_level(j, DistortionMatrix::hamming(2)).sigma ==
          doctest::Approx(0.1).epsilon(1e-15));
    // its induced mutual information reaches the closed form
    const auto m = joint_uy_from(j, Channel::bsc(0.1));
    CHECK(mutual_information(m) ==
          doctest::Approx(binary_capacity_closed_form(BinaryParams(0.1, 0.1))).epsilon(1e-12));
    CHECK_THROWS_AS(binary_achieving_joint(0.6), std::invalid_argument);
}

TEST_CASE("feasibility") {
    CHECK(feasibility(DistortionMatrix::hamming(2), 0.4));
    CHECK_FALSE(feasibility(DistortionMatrix::hamming(2), 0.51));
    CHECK(feasibility(DistortionMatrix(2, {0.0, 0.0, 0.0, 0.0}, 1.0), 0.0));
}

TEST_CASE("information_capacity on the binary symmetric case") {
    const auto d = DistortionMatrix::hamming(2);
    SolverConfig cfg;
    cfg.restarts = 16;

    SUBCASE("solves the constrained maximization at (0.1, 0.1)") {
        const ProblemSpec spec(Channel::bsc(0.1), d, 0.1);
        const auto res = information_capacity(spec, cfg);
        REQUIRE(res.feasible);
        REQUIRE(res.argmax_joint.has_value());
        // reference value from the exhaustive feasible grid (step 1/200)
        CHECK(std::abs(res.value - 0.3432075) <= 1e-3);
        const auto& j = *res.argmax_joint;
        CHECK(security_level(j, d).sigma >= 0.1 - 1e-9);
        CHECK(res.diag.constraint_active);
        // reported value is the mutual information of the returned joint
        CHECK(std::abs(res.value - mutual_information(joint_uy_from(j, spec.ch_yx))) <= 1e-9);
    }
    SUBCASE("the symmetric-perturbation closed form is not the maximum") {
        // an asymmetric feasible joint with the same Bayes risk carries
        // strictly more information than the symmetric-family optimum;
        // the closed form covers the symmetric family only
        const JointUX j(2, 2, {0.475, 0.1, 0.0, 0.425});
        CHECK(security_level(j, d).sigma == 0.1);
        const double closed = binary_capacity_closed_form(BinaryParams(0.1, 0.1));
        CHECK(mutual_information(joint_uy_from(j, Channel::bsc(0.1))) > closed + 0.02);
        const auto res = information_capacity(ProblemSpec(Channel::bsc(0.1), d, 0.1), cfg);
        CHECK(res.value > closed + 0.02);
    }
    SUBCASE("infeasible alpha returns zero without a joint") {
        const auto res = information_capacity(ProblemSpec(Channel::bsc(0.1), d, 0.6), cfg);
        CHECK_FALSE(res.feasible);
        CHECK(res.value == 0.0);
        CHECK_FALSE(res.argmax_joint.has_value());
    }
    SUBCASE("unconstrained alpha recovers the classical capacity") {
        const auto res = information_capacity(ProblemSpec(Channel::bsc(0.1), d, 0.0), cfg);
        CHECK(std::abs(res.value - (1.0 - binary_entropy(0.1))) <= 1e-3);
        CHECK(security_level(*res.argmax_joint, d).sigma >= -1e-12);
    }
    SUBCASE("alpha exactly at max security forces zero rate") {
        const auto res = information_capacity(ProblemSpec(Channel::bsc(0.1), d, 0.5), cfg);
        CHECK(res.feasible);
        CHECK(res.value <= 1e-6);
        CHECK(security_level(*res.argmax_joint, d).sigma >= 0.5 - 1e-9);
    }
}

TEST_CASE("dense feasible grid cross-checks solver and closed form") {
    // step-0.005 composition grid on the joint simplex: the solver must
    // track the exhaustive feasible maximum, and the closed form (the
    // symmetric-perturbation family value) can never beat it
    const auto d = DistortionMatrix::hamming(2);
    SolverConfig cfg;
    cfg.restarts = 16;
    for (const auto [p1, alpha] : {std::pair{0.1, 0.1}, std::pair{0.2, 0.3}, std::pair{0.05, 0.45}}) {
        const Channel ch = Channel::bsc(p1);
        const double closed = binary_capacity_closed_form(BinaryParams(p1, alpha));
        const int m = 200;
        double grid_best = 0.0;
        for (int a = 0; a <= m; ++a)
            for (int b = 0; a + b <= m; ++b)
                for (int c = 0; a + b + c <= m; ++c) {
                    const double g0 = double(a) / m, g1 = double(b) / m, b0 = double(c) / m;
                    const double b1 = 1.0 - g0 - g1 - b0;
                    const double sigma = std::min(g0, g1) + std::min(b0, b1 < 0 ? 0.0 : b1);
                    if (b1 < 0 || sigma < alpha) continue;
                    const JointUX j(2, 2, {g0, g1, b0, std::max(b1, 0.0)});
                    grid_best = std::max(grid_best, mutual_information(joint_uy_from(j, ch)));
                }
        CHECK(grid_best >= closed - 1e-12);  // symmetric optimum is on-grid
        const auto res = information_capacity(ProblemSpec(ch, d, alpha), cfg);
        CHECK(res.value >= grid_best - 1e-9);      // never below the enumerated points
        CHECK(std::abs(res.value - grid_best) <= 1e-3);
    }
}

TEST_CASE("capacity_sweep closed form") {
    const auto d = DistortionMatrix::hamming(2);
    SUBCASE("frozen values at p1 = 0.1") {
        const double alphas[] = {0.0, 0.25, 0.5};
        const auto rows = capacity_sweep(Channel::bsc(0.1), d, alphas, SweepMode::closed_form);
        REQUIRE(rows.size() == 3);
        CHECK(rows[0].capacity == doctest::Approx(0.5310044064).epsilon(1e-4));
        CHECK(rows[1].capacity == doctest::Approx(0.1187091008).epsilon(1e-4));
        CHECK(rows[2].capacity == 0.0);
    }
    SUBCASE("empty grid") {
        CHECK(capacity_sweep(Channel::bsc(0.1), d, {}, SweepMode::closed_form).empty());
    }
    SUBCASE("noiseless endpoints") {
        const double alphas[] = {0.0, 0.5};
        const auto rows = capacity_sweep(Channel::bsc(0.0), d, alphas, SweepMode::closed_form);
        CHECK(rows[0].capacity == 1.0);
        CHECK(rows[1].capacity == 0.0);
    }
}

TEST_CASE("property: sweep is nonincreasing in alpha") {
    const auto d = DistortionMatrix::hamming(2);
    std::vector<double> alphas;
    for (int k = 0; k <= 10; ++k) alphas.push_back(0.05 * k);
    for (double p1 : {0.05, 0.1, 0.2}) {
        const auto rows = capacity_sweep(Channel::bsc(p1), d, alphas, SweepMode::closed_form);
        for (std::size_t i = 1; i < rows.size(); ++i)
            CHECK(rows[i].capacity <= rows[i - 1].capacity + 1e-6);
    }
    SolverConfig cfg;
    cfg.restarts = 12;
    const double coarse[] = {0.0, 0.2, 0.4};
    const auto rows = capacity_sweep(Channel::bsc(0.1), d, coarse, SweepMode::generic, cfg);
    for (std::size_t i = 1; i < rows.size(); ++i)
        CHECK(rows[i].capacity <= rows[i - 1].capacity + 1e-6);
}

TEST_CASE("generic solver regression at frozen grid-oracle values") {
    // reference values computed by the exhaustive step-1/200 feasible
    // grid; the closed form agrees at the alpha = 0 endpoint and falls
    // below the maximum at interior alpha
    const auto d = DistortionMatrix::hamming(2);
    SolverConfig cfg;
    cfg.restarts = 16;
    struct Point { double p1, alpha, grid; };
    for (const auto& pt : {Point{0.05, 0.05, 0.5621085}, Point{0.1, 0.25, 0.1835524},
                           Point{0.2, 0.45, 0.0252088}, Point{0.1, 0.0, 0.5310044}}) {
        const auto res = information_capacity(ProblemSpec(Channel::bsc(pt.p1), d, pt.alpha), cfg);
        CHECK(std::abs(res.value - pt.grid) <= 1e-3);
        CHECK(security_level(*res.argmax_joint, d).sigma >= pt.alpha - 1e-9);
        CHECK(std::abs(security_level(*res.argmax_joint, d).sigma - pt.alpha) <= 1e-4);
    }
}

TEST_CASE("bsc_crossover guards the closed-form route") {
    CHECK(bsc_crossover(Channel::bsc(0.3)) == doctest::Approx(0.3));
    CHECK_THROWS_AS(bsc_crossover(Channel::identity(3)), std::invalid_argument);
    CHECK_THROWS_AS(bsc_crossover(Channel(2, 2, {0.9, 0.1, 0.2, 0.8})), std::invalid_argument);
}
