#include "isinglab/ising.hpp"

#include "isinglab/constants.hpp"

#include <doctest.h>

#include <cmath>

using namespace isinglab;

TEST_CASE("interaction_sum fixtures") {
    Box free12 = build_box(2, 1, "free"); // 1x2 line, one interior edge
    SpinConfig pp = SpinConfig::constant(free12.lat, 1);
    CHECK(interaction_sum(free12.lat, free12.bc, pp) == 1);
    SpinConfig pm = pp;
    pm.s[1] = -1;
    CHECK(interaction_sum(free12.lat, free12.bc, pm) == -1);

    Box plus22 = build_box(2, 2, "all:+");
    CHECK(interaction_sum(plus22.lat, plus22.bc, SpinConfig::constant(plus22.lat, 1)) == 12);
}

TEST_CASE("gibbs_exact fixtures at the critical point") {
    const double bc = beta_critical;

    Box line = build_box(2, 1, "free");
    ExactDistribution mu = gibbs_exact(line.lat, line.bc, bc);
    // mu(++) = 1/(2(1+e^{-2 beta_c})) = sqrt(2)/4
    CHECK(mu.p[0b11] == doctest::Approx(std::sqrt(2.0) / 4.0).epsilon(1e-12));
    CHECK(mu.p[0b00] == doctest::Approx(std::sqrt(2.0) / 4.0).epsilon(1e-12));
    CHECK(mu.p[0b01] == doctest::Approx(mu.p[0b10]).epsilon(1e-12));

    ExactDistribution flat = gibbs_exact(line.lat, line.bc, 0.0);
    for (double v : flat.p) CHECK(v == doctest::Approx(0.25).epsilon(1e-12));

    Box one = build_box(1, 1, "all:+");
    ExactDistribution mu1 = gibbs_exact(one.lat, one.bc, bc);
    double expect = 1.0 / (1.0 + std::exp(-8.0 * bc)); // e^{-8 beta_c} = (17+12 sqrt 2)^-1
    CHECK(expect == doctest::Approx(0.9714045).epsilon(1e-6));
    CHECK(mu1.p[1] == doctest::Approx(expect).epsilon(1e-12));
}

TEST_CASE("tv_distance basics") {
    ExactDistribution a{{0.5, 0.5}}, b{{1.0, 0.0}}, c{{0.0, 1.0}};
    CHECK(tv_distance(a, a) == doctest::Approx(0.0));
    CHECK(tv_distance(a, b) == doctest::Approx(0.5));
    CHECK(tv_distance(b, c) == doctest::Approx(1.0));
    ExactDistribution bad{{1.0}};
    CHECK_THROWS(tv_distance(a, bad));
}

TEST_CASE("global flip symmetry under free boundary") {
    Box box = build_box(2, 3, "free");
    ExactDistribution mu = gibbs_exact(box.lat, box.bc, beta_critical);
    const std::uint32_t full = (1u << box.lat.n_interior) - 1;
    for (std::uint32_t m = 0; m < mu.p.size(); ++m)
        CHECK(mu.p[m] == doctest::Approx(mu.p[m ^ full]).epsilon(1e-12));
}

TEST_CASE("flipping the boundary condition flips the measure") {
    Box box = build_box(2, 2, "bottom:-,else:+");
    ExactDistribution mu = gibbs_exact(box.lat, box.bc, beta_critical);
    BoundaryCondition neg = box.bc.flipped();
    ExactDistribution mu_neg = gibbs_exact(box.lat, neg, beta_critical);
    const std::uint32_t full = (1u << box.lat.n_interior) - 1;
    for (std::uint32_t m = 0; m < mu.p.size(); ++m)
        CHECK(mu.p[m] == doctest::Approx(mu_neg.p[m ^ full]).epsilon(1e-12));
}

TEST_CASE("stochastic domination between ordered boundary conditions") {
    // eta = all:+ dominates xi = bottom:-,else:+ sitewise; threshold events
    // {sigma >= sigma_0} are increasing.
    auto check_dominance = [](int r, int rp) {
        Box bxi = build_box(r, rp, "bottom:-,else:+");
        Box beta_box = build_box(r, rp, "all:+");
        ExactDistribution lo = gibbs_exact(bxi.lat, bxi.bc, beta_critical);
        ExactDistribution hi = gibbs_exact(beta_box.lat, beta_box.bc, beta_critical);
        const int states = 1 << bxi.lat.n_interior;
        for (int s0 = 0; s0 < states; ++s0) {
            double plo = 0.0, phi = 0.0;
            for (int m = 0; m < states; ++m) {
                if ((m & s0) == s0) { // sigma >= sigma_0 as +/- sets
                    plo += lo.p[m];
                    phi += hi.p[m];
                }
            }
            CHECK(phi >= plo - 1e-12);
        }
    };
    check_dominance(2, 3);
    check_dominance(3, 3); // nine sites
}

TEST_CASE("enumeration caps raise errors") {
    Box big = build_box(5, 5, "free");
    CHECK_THROWS(gibbs_exact(big.lat, big.bc, beta_critical));
}

TEST_CASE("snapshot round trip, top row first") {
    Box box = build_box(3, 2, "free");
    SpinConfig s = SpinConfig::constant(box.lat, -1);
    s.s[box.lat.interior_id(1, 2)] = 1;
    std::string text = to_snapshot(box.lat, s);
    CHECK(text == "+--\n---\n");
    SpinConfig back = from_snapshot(box.lat, text);
    CHECK(back.s == s.s);
    CHECK_THROWS(from_snapshot(box.lat, "+--\n--\n"));
}

TEST_CASE("row transfer marginal matches brute enumeration") {
    Box box = build_box(3, 4, "bottom:-,top:+,left:free,right:free");
    const double beta = beta_critical;
    ExactDistribution mu = gibbs_exact(box.lat, box.bc, beta);
    for (int y0 : {2, 3}) {
        std::vector<double> marg = row_marginal_exact(box.lat, box.bc, beta, y0);
        // Brute marginal over the low rows.
        int low_bits = box.lat.width * (y0 - 1);
        std::vector<double> brute(marg.size(), 0.0);
        for (std::uint32_t m = 0; m < mu.p.size(); ++m) brute[m >> low_bits] += mu.p[m];
        for (std::size_t i = 0; i < marg.size(); ++i)
            CHECK(marg[i] == doctest::Approx(brute[i]).epsilon(1e-10));
    }
}

TEST_CASE("row transfer marginal handles horizontal wrap") {
    Box box = build_box(3, 3, "left:periodic,right:periodic,bottom:-,top:+");
    ExactDistribution mu = gibbs_exact(box.lat, box.bc, beta_critical);
    std::vector<double> marg = row_marginal_exact(box.lat, box.bc, beta_critical, 2);
    std::vector<double> brute(marg.size(), 0.0);
    for (std::uint32_t m = 0; m < mu.p.size(); ++m) brute[m >> 3] += mu.p[m];
    for (std::size_t i = 0; i < marg.size(); ++i)
        CHECK(marg[i] == doctest::Approx(brute[i]).epsilon(1e-10));
}
