#include "isinglab/es_coupling.hpp"

#include "isinglab/constants.hpp"
#include "oracles.hpp"

#include <doctest.h>

#include <cmath>
#include <stdexcept>

using namespace isinglab;

TEST_CASE("wiring induced by boundary conditions") {
    Box plus = build_box(2, 2, "all:+");
    WiringPartition w1 = wiring_from_bc(plus.lat, plus.bc);
    REQUIRE(w1.classes.size() == 2);
    CHECK(w1.classes[0].size() == 8);
    CHECK(w1.classes[1].empty());

    Box fr = build_box(2, 2, "free");
    CHECK(wiring_from_bc(fr.lat, fr.bc).classes.empty());

    Box mixed = build_box(2, 2, "bottom:-,else:+");
    WiringPartition w2 = wiring_from_bc(mixed.lat, mixed.bc);
    REQUIRE(w2.classes.size() == 2);
    CHECK(w2.classes[0].size() == 6);
    CHECK(w2.classes[1].size() == 2);
}

TEST_CASE("event A fixtures") {
    Box mixed = build_box(2, 2, "bottom:-,else:+");
    WiringPartition w = wiring_from_bc(mixed.lat, mixed.bc);
    BondConfig closed = BondConfig::all_closed(mixed.lat);
    CHECK(event_A(mixed.lat, closed, w));
    BondConfig open = BondConfig::all_open(mixed.lat);
    CHECK(!event_A(mixed.lat, open, w));

    Box plus = build_box(2, 2, "all:+");
    WiringPartition wp = wiring_from_bc(plus.lat, plus.bc);
    CHECK(event_A(plus.lat, BondConfig::all_open(plus.lat), wp)); // M empty: vacuous
}

TEST_CASE("event A is decreasing in the bond configuration") {
    Box mixed = build_box(2, 2, "bottom:-,else:+");
    WiringPartition w = wiring_from_bc(mixed.lat, mixed.bc);
    const int ne = static_cast<int>(mixed.lat.edges.size());
    BondConfig omega = BondConfig::all_closed(mixed.lat);
    for (std::size_t mask = 0; mask < (std::size_t{1} << ne); ++mask) {
        for (int e = 0; e < ne; ++e) omega.open[e] = (mask >> e) & 1u;
        if (event_A(mixed.lat, omega, w)) continue;
        // opening more edges can never restore A
        for (int e = 0; e < ne; ++e) {
            if (omega.open[e]) continue;
            BondConfig bigger = omega;
            bigger.open[e] = 1;
            CHECK(!event_A(mixed.lat, bigger, w));
        }
    }
}

TEST_CASE("all bonds open gives a global constant spin") {
    Box fr = build_box(2, 2, "free");
    BondConfig open = BondConfig::all_open(fr.lat);
    WiringPartition none;
    RandomSource rng(8);
    int plus = 0, runs = 20000;
    for (int rep = 0; rep < runs; ++rep) {
        SpinConfig s = ising_from_fk(fr.lat, open, none, rng, rep);
        for (int i = 1; i < fr.lat.n_interior; ++i) CHECK(s.s[i] == s.s[0]);
        plus += s.s[0] > 0;
    }
    CHECK(std::fabs(plus / double(runs) - 0.5) < 0.02);
}

TEST_CASE("ES pushforward FK->Ising equals the Gibbs law exactly (free)") {
    Box fr = build_box(2, 2, "free");
    WiringPartition none;
    std::vector<double> push = oracles::es_fk_to_ising_brute(fr.lat, none, p_self_dual, false);
    ExactDistribution mu = gibbs_exact(fr.lat, fr.bc, beta_critical);
    double tv = 0.0;
    for (std::size_t m = 0; m < push.size(); ++m) tv += std::fabs(push[m] - mu.p[m]);
    CHECK(tv / 2 < 1e-12);
}

TEST_CASE("conditioned FK->Ising pushforward equals mu^xi (fixed bcs)") {
    for (const char* spec : {"all:+", "bottom:-,else:+"}) {
        Box box = build_box(2, 2, spec);
        WiringPartition wiring = wiring_from_bc(box.lat, box.bc);
        std::vector<double> push = oracles::es_fk_to_ising_brute(box.lat, wiring, p_self_dual, true);
        ExactDistribution mu = gibbs_exact(box.lat, box.bc, beta_critical);
        double tv = 0.0;
        for (std::size_t m = 0; m < push.size(); ++m) tv += std::fabs(push[m] - mu.p[m]);
        CHECK(tv / 2 < 1e-12);
    }
}

TEST_CASE("Ising->FK pushforward equals the conditioned FK law") {
    for (const char* spec : {"free", "all:+", "bottom:-,else:+"}) {
        for (auto dims : {std::pair{2, 1}, std::pair{2, 2}}) {
            Box box = build_box(dims.first, dims.second, spec);
            WiringPartition wiring = wiring_from_bc(box.lat, box.bc);
            std::vector<double> push = oracles::es_ising_to_fk_brute(box.lat, box.bc, beta_critical);
            std::vector<double> want =
                oracles::fk_weights_brute(box.lat, wiring, p_self_dual, 2.0, true);
            double z = 0.0;
            for (double v : want) z += v;
            double tv = 0.0;
            for (std::size_t m = 0; m < push.size(); ++m) tv += std::fabs(push[m] - want[m] / z);
            CHECK(tv / 2 < 1e-12);
        }
    }
}

TEST_CASE("ES marginal identity up to nine sites") {
    struct Case {
        int r, rp;
        const char* spec;
    };
    for (Case c : {Case{3, 2, "free"}, Case{3, 3, "free"}, Case{2, 3, "bottom:-,else:+"}}) {
        Box box = build_box(c.r, c.rp, c.spec);
        WiringPartition wiring = wiring_from_bc(box.lat, box.bc);
        // FK -> Ising
        std::vector<double> push = oracles::es_fk_to_ising_brute(box.lat, wiring, p_self_dual, true);
        ExactDistribution mu = gibbs_exact(box.lat, box.bc, beta_critical);
        double tv1 = 0.0;
        for (std::size_t m = 0; m < push.size(); ++m) tv1 += std::fabs(push[m] - mu.p[m]);
        CHECK(tv1 / 2 < 1e-12);
        // Ising -> FK
        std::vector<double> fwd = oracles::es_ising_to_fk_brute(box.lat, box.bc, beta_critical);
        std::vector<double> want = oracles::fk_weights_brute(box.lat, wiring, p_self_dual, 2.0, true);
        double z = 0.0;
        for (double v : want) z += v;
        double tv2 = 0.0;
        for (std::size_t m = 0; m < fwd.size(); ++m) tv2 += std::fabs(fwd[m] - want[m] / z);
        CHECK(tv2 / 2 < 1e-12);
    }
}

TEST_CASE("wired pair conditions the Ising law on agreement") {
    Box line = build_box(2, 1, "free");
    WiringPartition pair;
    pair.classes.push_back({0, 1});
    std::vector<double> push =
        oracles::es_fk_to_ising_brute(line.lat, pair, p_self_dual, false, /*forced=*/false);
    ExactDistribution mu = gibbs_exact(line.lat, line.bc, beta_critical);
    double z = mu.p[0b00] + mu.p[0b11];
    CHECK(push[0b00] == doctest::Approx(mu.p[0b00] / z).epsilon(1e-12));
    CHECK(push[0b11] == doctest::Approx(mu.p[0b11] / z).epsilon(1e-12));
    CHECK(push[0b01] == doctest::Approx(0.0));
    CHECK(push[0b10] == doctest::Approx(0.0));
}

TEST_CASE("fk_from_ising zeroes disagreeing edges") {
    Box sq = build_box(2, 2, "free");
    SpinConfig checker = SpinConfig::constant(sq.lat, 1);
    for (int i = 0; i < sq.lat.n_interior; ++i) {
        const Coord c = sq.lat.coords[i];
        if ((c.x + c.y) & 1) checker.s[i] = -1;
    }
    RandomSource rng(3);
    BondConfig omega = fk_from_ising(sq.lat, sq.bc, checker, p_self_dual, rng, 0);
    CHECK(omega.open_count() == 0);

    SpinConfig aligned = SpinConfig::constant(sq.lat, 1);
    long open = 0, total = 0;
    for (int rep = 0; rep < 20000; ++rep) {
        BondConfig om = fk_from_ising(sq.lat, sq.bc, aligned, p_self_dual, rng, rep);
        open += om.open_count();
        total += static_cast<long>(om.open.size());
    }
    CHECK(std::fabs(open / double(total) - p_self_dual) < 0.01);
}

TEST_CASE("conditioned sampler: exact table route matches enumerated conditional") {
    Box box = build_box(2, 2, "bottom:-,else:+");
    ConditionedFkSampler sampler(box.lat, box.bc, p_self_dual);
    CHECK(std::string(sampler.strategy()) == "table");
    WiringPartition wiring = wiring_from_bc(box.lat, box.bc);
    std::vector<double> w = oracles::fk_weights_brute(box.lat, wiring, p_self_dual, 2.0, true);
    double z = 0.0;
    for (double v : w) z += v;
    const int ne = static_cast<int>(box.lat.edges.size());
    std::vector<double> edge_marginal(ne, 0.0);
    for (std::size_t mask = 0; mask < w.size(); ++mask)
        for (int e = 0; e < ne; ++e)
            if ((mask >> e) & 1u) edge_marginal[e] += w[mask] / z;

    RandomSource rng(12);
    const long draws = 100000;
    std::vector<long> open_count(ne, 0);
    for (long d = 0; d < draws; ++d) {
        BondConfig om = sampler.sample(rng, d);
        if (d < 2000) CHECK(event_A(box.lat, om, wiring));
        for (int e = 0; e < ne; ++e) open_count[e] += om.open[e];
    }
    for (int e = 0; e < ne; ++e)
        CHECK(std::fabs(open_count[e] / double(draws) - edge_marginal[e]) < 0.01);
}

TEST_CASE("conditioned sampler: engine route agrees with the table route") {
    Box box = build_box(2, 2, "bottom:-,else:+");
    ConditionedFkSampler table(box.lat, box.bc, p_self_dual);
    ConditionedSamplerOptions opt;
    opt.table_max_edges = 4; // force the sequential engine route
    ConditionedFkSampler engine(box.lat, box.bc, p_self_dual, opt);
    CHECK(std::string(engine.strategy()) == "engine");
    WiringPartition wiring = wiring_from_bc(box.lat, box.bc);
    const int ne = static_cast<int>(box.lat.edges.size());
    const long draws = 50000;
    std::vector<long> ct(ne, 0), ce(ne, 0);
    RandomSource r1(5), r2(5);
    for (long d = 0; d < draws; ++d) {
        BondConfig a = table.sample(r1, d);
        BondConfig b = engine.sample(r2, d);
        if (d < 1000) CHECK(event_A(box.lat, b, wiring));
        for (int e = 0; e < ne; ++e) {
            ct[e] += a.open[e];
            ce[e] += b.open[e];
        }
    }
    for (int e = 0; e < ne; ++e)
        CHECK(std::fabs(ct[e] / double(draws) - ce[e] / double(draws)) < 0.015);
}

TEST_CASE("rejection route fails loudly when A^xi is too rare") {
    // Adversarial bc: the boundary ring alternates sign site by site, so
    // A^xi requires every short plus-minus bridge along the whole perimeter
    // to be absent at once.
    const int n = 24;
    std::string spec = "all:+";
    for (int x = 1; x <= n; x += 2)
        spec += ",site:" + std::to_string(x) + ",0:-" + ",site:" + std::to_string(x) + "," +
                std::to_string(n + 1) + ":-";
    for (int y = 1; y <= n; y += 2)
        spec += ",site:0," + std::to_string(y) + ":-" + ",site:" + std::to_string(n + 1) + "," +
                std::to_string(y) + ":-";
    Box box = build_box(n, n, spec);
    ConditionedSamplerOptions opt;
    opt.table_max_edges = 4;
    opt.rejection_trial_budget = 1500;
    opt.min_acceptance = 1e-2;
    ConditionedFkSampler sampler(box.lat, box.bc, p_self_dual, opt);
    CHECK(std::string(sampler.strategy()) == "rejection");
    RandomSource rng(2);
    CHECK_THROWS_AS(sampler.sample(rng, 0), std::runtime_error);
}

TEST_CASE("sample_ising_bc laws match gibbs_exact") {
    struct Case {
        int r, rp;
        const char* spec;
    };
    for (Case c : {Case{2, 1, "all:+"}, Case{2, 2, "bottom:-,else:+"}, Case{2, 2, "free"}}) {
        Box box = build_box(c.r, c.rp, c.spec);
        ConditionedFkSampler sampler(box.lat, box.bc, p_self_dual);
        ExactDistribution mu = gibbs_exact(box.lat, box.bc, beta_critical);
        RandomSource rng(71);
        const long draws = 100000;
        std::vector<double> counts(mu.p.size(), 0.0);
        for (long d = 0; d < draws; ++d) {
            SpinConfig s = sample_ising_bc(box.lat, box.bc, sampler, rng, d);
            counts[mask_of(s)] += 1.0;
        }
        for (double& v : counts) v /= draws;
        CHECK(tv_distance(mu, ExactDistribution{counts}) < 0.01);
    }
}
