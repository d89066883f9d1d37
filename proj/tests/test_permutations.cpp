#include "doctest.h"

#include <algorithm>
#include <cmath>
#include <set>
#include <vector>

#include "mbasis/numeric.hpp"
#include "mbasis/permutations.hpp"
#include "oracles.hpp"

using namespace mbasis;

namespace {

EpsilonSequence const_ones(int n) {
    return EpsilonSequence::from_values(std::vector<double>(static_cast<std::size_t>(n), 1.0));
}

}  // namespace

TEST_CASE("permutations validate bijectivity and expose 1-based images") {
    CHECK_THROWS_AS(Permutation({1, 1, 2}), ValidationError);
    CHECK_THROWS_AS(Permutation({0, 1}), ValidationError);
    CHECK_THROWS_AS(Permutation({2, 3}), ValidationError);

    const Permutation p({3, 1, 2});
    CHECK(p.size() == 3);
    CHECK(p.image(1) == 3);
    CHECK(p.image(3) == 2);
    CHECK_THROWS_AS(p.image(0), ValidationError);
    CHECK_THROWS_AS(p.image(4), ValidationError);
    CHECK(p.to_string() == "3-1-2");
    CHECK(p.to_string(',') == "3,1,2");
    CHECK(Permutation::natural(4).images() == std::vector<int>{1, 2, 3, 4});
    CHECK(p == Permutation({3, 1, 2}));
}

TEST_CASE("crossing index matches the exact-fraction scan at M = 2") {
    const auto table = CoefficientTable::build(const_ones(4), 4);
    const auto g = gammas(table, 2);
    Theorem2Params params;
    params.N = 4;
    params.M = 2;
    params.B = g.B;

    const std::vector<std::pair<long long, long long>> ones(4, {1, 1});
    const std::vector<std::vector<int>> orders{
        {1, 2, 3, 4}, {2, 4, 1, 3}, {1, 3, 4, 2}, {4, 3, 2, 1}, {3, 4, 1, 2}};
    for (const auto& images : orders) {
        CAPTURE(Permutation(images).to_string());
        CHECK(select_t(params, table, Permutation(images)) ==
              oracle::select_t_exact(ones, 2, images));
    }
    CHECK(select_t(params, table, Permutation({1, 2, 3, 4})) == 2);
    CHECK(select_t(params, table, Permutation({2, 4, 1, 3})) == 1);
    CHECK(select_t(params, table, Permutation({1, 3, 4, 2})) == 4);

    CHECK_THROWS_AS(select_t(params, table, Permutation({1, 2, 3})), ValidationError);
}

TEST_CASE("crossing index straddles half the even mass for sampled orders") {
    const auto built = build_theorem2(const_ones(4096), 0.05);
    const auto table = CoefficientTable::build(const_ones(4096), built.params.N);
    const double half_b = built.params.B * 0.5;

    for (const auto& order : sample_orders(built.params.N, 200, 31)) {
        const int t = select_t(built.params, table, order);
        NeumaierSum mass;
        for (int m = 1; m < t; ++m) {
            const int n = order.image(m);
            if (n % 2 == 0) mass.add(table.c(n));
        }
        REQUIRE(mass.value() < half_b);
        const int n_t = order.image(t);
        REQUIRE(n_t % 2 == 0);
        mass.add(table.c(n_t));
        REQUIRE(mass.value() >= half_b);
    }
}

TEST_CASE("witness guarantees hold across stress and sampled orders") {
    const double C = 0.05;
    const auto built = build_theorem2(const_ones(4096), C);
    const auto& sys = built.system;
    const auto& params = built.params;
    const auto table = CoefficientTable::build(const_ones(4096), params.N);

    std::vector<Permutation> orders;
    for (const auto& named : adversarial_orders(params.N)) orders.push_back(named.order);
    for (auto& p : sample_orders(params.N, 50, 42)) orders.push_back(std::move(p));

    for (const auto& order : orders) {
        CAPTURE(order.to_string());
        const auto res = witness(sys, params, table, order);
        REQUIRE(res.t >= 1);
        REQUIRE(res.t <= params.N);
        CHECK(res.z_norm <= 2.0);
        CHECK(res.w_norm >= 2.0 * C);
        CHECK(res.lower_bound >= C);
        CHECK(res.identity_error <= 1e-9);
        CHECK(res.min_odd_margin >= 0.0);
        REQUIRE(static_cast<int>(res.odd_coord_checks.size()) == params.L);
        for (const auto& check : res.odd_coord_checks) {
            CHECK(check.abs_coord >= check.threshold);
            CHECK(check.threshold == table.beta(2 * check.l - 1) * 0.25);
        }
        CHECK(res.w_coords.norm() == doctest::Approx(res.w_norm).epsilon(1e-15));

        // the vector probe maximizes over every prefix, so it can only improve
        const double lb_probe =
            lower_bound_via_vector(sys, order, params.z_coords.dense());
        CHECK(lb_probe >= res.lower_bound - 1e-12);
    }
}

TEST_CASE("witness refuses foreign or inconsistent parameter bundles") {
    const auto built = build_theorem2(const_ones(4096), 0.05);
    const auto table = CoefficientTable::build(const_ones(4096), built.params.N);
    const auto natural = Permutation::natural(built.params.N);

    SUBCASE("tampered B breaks the fingerprint") {
        auto params = built.params;
        params.B += 0.1;
        CHECK_THROWS_WITH_AS(witness(built.system, params, table, natural),
                             doctest::Contains("fingerprint"), ValidationError);
    }
    SUBCASE("tampered bounds break the fingerprint") {
        auto sys = built.system;
        sys.eps_bounds[0] = 1.5;
        CHECK_THROWS_AS(witness(sys, built.params, table, natural), ValidationError);
    }
    SUBCASE("an N that disagrees with the system is rejected") {
        auto params = built.params;
        params.N = built.params.N - 2;
        CHECK_THROWS_WITH_AS(witness(built.system, params, table,
                                     Permutation::natural(params.N)),
                             doctest::Contains("N ="), ValidationError);
    }
    SUBCASE("order length must match N") {
        CHECK_THROWS_AS(witness(built.system, built.params, table,
                                Permutation::natural(built.params.N - 1)),
                        ValidationError);
    }
}

TEST_CASE("exhaustive order search covers every permutation") {
    SUBCASE("orthonormal families are flat across orders") {
        const auto res = exhaustive_min_basis_constant(make_orthonormal(3));
        CHECK(static_cast<int>(res.table.size()) == 6);
        CHECK(res.min_value == doctest::Approx(1.0).epsilon(1e-10));
        for (const auto& row : res.table)
            CHECK(row.value == doctest::Approx(1.0).epsilon(1e-10));
    }

    SUBCASE("a four-vector truncation has a stable known minimum") {
        const auto sys = build_truncated(const_ones(4), 4, DualMode::projected);
        const auto res = exhaustive_min_basis_constant(sys);
        CHECK(static_cast<int>(res.table.size()) == 24);
        CHECK(res.min_value == doctest::Approx(1.2074534878137728).epsilon(1e-9));

        Eigen::VectorXd ones = Eigen::VectorXd::Ones(sys.ambient_dim);
        for (const auto& row : res.table) {
            CAPTURE(row.order.to_string());
            CHECK(row.value >= 1.0 - 1e-12);
            CHECK(lower_bound_via_vector(sys, row.order, ones) <= row.value + 1e-9);
        }
        const auto best = std::min_element(
            res.table.begin(), res.table.end(),
            [](const OrderValue& a, const OrderValue& b) { return a.value < b.value; });
        CHECK(best->order == res.best_order);
    }

    SUBCASE("the factorial guard names the count it refused") {
        CHECK_THROWS_WITH_AS(exhaustive_min_basis_constant(make_orthonormal(12)),
                             doctest::Contains("479001600"), SizeError);
        CHECK_THROWS_WITH_AS(exhaustive_min_basis_constant(make_orthonormal(4), 3),
                             doctest::Contains("24"), SizeError);
    }
}

TEST_CASE("sampled orders are deterministic, valid, and batch independent") {
    const auto batch = sample_orders(6, 40, 9001);
    CHECK(static_cast<int>(batch.size()) == 40);
    CHECK(batch == sample_orders(6, 40, 9001));

    // drawing a shorter batch reproduces the same leading samples
    const auto shorter = sample_orders(6, 10, 9001);
    for (int i = 0; i < 10; ++i)
        CHECK(shorter[static_cast<std::size_t>(i)] == batch[static_cast<std::size_t>(i)]);

    CHECK(sample_orders(6, 0, 1).empty());
    CHECK(sample_orders(1, 3, 1) ==
          std::vector<Permutation>{Permutation({1}), Permutation({1}), Permutation({1})});
    CHECK_THROWS_AS(sample_orders(0, 1, 1), ValidationError);
    CHECK_THROWS_AS(sample_orders(3, -1, 1), ValidationError);

    std::set<std::string> distinct;
    for (const auto& p : sample_orders(4, 200, 1)) distinct.insert(p.to_string());
    CHECK(static_cast<int>(distinct.size()) >= 20);  // of the 24 possible

    // different seeds decorrelate
    CHECK(sample_orders(6, 40, 9001) != sample_orders(6, 40, 9002));
}

TEST_CASE("adversarial order set hits the known hard patterns") {
    const auto set4 = adversarial_orders(4);
    REQUIRE(static_cast<int>(set4.size()) == 5);
    CHECK(set4[0].name == "natural");
    CHECK(set4[0].order == Permutation({1, 2, 3, 4}));
    CHECK(set4[1].name == "reversed");
    CHECK(set4[1].order == Permutation({4, 3, 2, 1}));
    CHECK(set4[2].name == "evens_first");
    CHECK(set4[2].order == Permutation({2, 4, 1, 3}));
    CHECK(set4[3].name == "odds_first");
    CHECK(set4[3].order == Permutation({1, 3, 2, 4}));
    CHECK(set4[4].name == "interleave_reversed");
    CHECK(set4[4].order == Permutation({4, 1, 3, 2}));

    for (const auto& named : adversarial_orders(2)) CHECK(named.order.size() == 2);
    CHECK_THROWS_AS(adversarial_orders(3), ValidationError);
    CHECK_THROWS_AS(adversarial_orders(0), ValidationError);
}
