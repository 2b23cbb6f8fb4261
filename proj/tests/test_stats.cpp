#include <doctest.h>

#include <algorithm>
#include <cmath>

#include "vptt/hash.hpp"
#include "vptt/stats.hpp"

using namespace vptt;
using namespace vptt::stats;

namespace {

// O(n^2) reference ranking: rank = 1 + count(smaller) + (count(equal)-1)/2.
vec rank_oracle(const vec& v) {
    vec out(v.size());
    for (std::size_t i = 0; i < v.size(); ++i) {
        std::size_t smaller = 0, equal = 0;
        for (double x : v) {
            smaller += x < v[i];
            equal += x == v[i];
        }
        out[i] = 1.0 + double(smaller) + (double(equal) - 1.0) / 2.0;
    }
    return out;
}

double pearson(const vec& a, const vec& b) {
    double ma = 0, mb = 0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        ma += a[i];
        mb += b[i];
    }
    ma /= double(a.size());
    mb /= double(a.size());
    double num = 0, da = 0, db = 0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        num += (a[i] - ma) * (b[i] - mb);
        da += (a[i] - ma) * (a[i] - ma);
        db += (b[i] - mb) * (b[i] - mb);
    }
    return num / std::sqrt(da * db);
}

} // namespace

TEST_CASE("rankify averages ties") {
    CHECK(rankify({10, 20, 20, 30}) == vec{1.0, 2.5, 2.5, 4.0});
    CHECK(rankify({5}) == vec{1.0});
    CHECK(rankify({7, 7, 7}) == vec{2.0, 2.0, 2.0});
    CHECK(rankify({3, 1, 2}) == vec{3.0, 1.0, 2.0});
}

TEST_CASE("rankify matches the quadratic oracle on random data") {
    rng gen(611);
    for (int trial = 0; trial < 200; ++trial) {
        std::size_t n = 1 + gen.next_below(30);
        vec v(n);
        for (double& x : v)
            x = double(gen.next_below(8)); // plenty of ties
        CHECK(rankify(v) == rank_oracle(v));
    }
}

TEST_CASE("spearman reproduces the hand example") {
    CHECK(spearman_rho({1, 2, 3, 4}, {1, 3, 2, 4}) == doctest::Approx(0.8).epsilon(1e-12));
    CHECK(spearman_rho({1, 2, 3}, {10, 20, 30}) == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(spearman_rho({1, 2, 3}, {30, 20, 10}) == doctest::Approx(-1.0).epsilon(1e-12));
}

TEST_CASE("spearman equals pearson over oracle ranks, ties included") {
    rng gen(612);
    for (int trial = 0; trial < 100; ++trial) {
        std::size_t n = 3 + gen.next_below(20);
        vec a(n), b(n);
        bool va = false, vb = false;
        for (std::size_t i = 0; i < n; ++i) {
            a[i] = double(gen.next_below(6));
            b[i] = double(gen.next_below(6));
        }
        vec ra = rank_oracle(a), rb = rank_oracle(b);
        for (std::size_t i = 1; i < n; ++i) {
            va = va || ra[i] != ra[0];
            vb = vb || rb[i] != rb[0];
        }
        if (!va || !vb)
            continue;
        CHECK(spearman_rho(a, b) == doctest::Approx(pearson(ra, rb)).epsilon(1e-10));
    }
}

TEST_CASE("spearman guards its inputs") {
    CHECK_THROWS_AS(spearman_rho({1, 2}, {1, 2, 3}), error);
    CHECK_THROWS_AS(spearman_rho({1}, {1}), error);
    try {
        spearman_rho({2, 2, 2}, {1, 2, 3});
        FAIL("expected degenerate_variance");
    } catch (const error& e) {
        CHECK(e.code() == errc::degenerate_variance);
    }
}

TEST_CASE("kendalls w spans disagreement to concordance") {
    CHECK(kendalls_w({{1, 2}, {2, 1}}) == doctest::Approx(0.0).epsilon(1e-12));
    CHECK(kendalls_w({{1, 2, 3}, {1, 2, 3}, {1, 2, 3}}) == doctest::Approx(1.0).epsilon(1e-12));
    // identical tie patterns still agree perfectly under the correction
    CHECK(kendalls_w({{1, 2.5, 2.5}, {1, 2.5, 2.5}}) == doctest::Approx(1.0).epsilon(1e-12));
    // raw scores are re-ranked internally: scale does not matter
    CHECK(kendalls_w({{10, 40, 90}, {1, 2, 3}}) == doctest::Approx(1.0).epsilon(1e-12));
    // a single judge trivially agrees with itself
    CHECK(kendalls_w({{1, 2, 3}}) == doctest::Approx(1.0).epsilon(1e-12));
    CHECK_THROWS_AS(kendalls_w({}), error);
    CHECK_THROWS_AS(kendalls_w({{1, 2}, {1, 2, 3}}), error);
    CHECK_THROWS_AS(kendalls_w({{2, 2}, {2, 2}}), error); // no rank information
}

TEST_CASE("kendalls w matches the textbook formula on random data") {
    rng gen(613);
    for (int trial = 0; trial < 50; ++trial) {
        std::size_t m = 2 + gen.next_below(4), n = 3 + gen.next_below(6);
        std::vector<vec> rows(m, vec(n));
        for (auto& row : rows)
            for (double& x : row)
                x = double(gen.next_below(5));

        // direct evaluation: S over column rank sums, denominator with tie terms
        std::vector<vec> ranks;
        for (const auto& row : rows)
            ranks.push_back(rank_oracle(row));
        vec colsum(n, 0.0);
        for (const auto& r : ranks)
            for (std::size_t j = 0; j < n; ++j)
                colsum[j] += r[j];
        double mean = 0.0;
        for (double c : colsum)
            mean += c / double(n);
        double s = 0.0;
        for (double c : colsum)
            s += (c - mean) * (c - mean);
        double ties = 0.0;
        for (const auto& r : ranks) {
            std::map<double, std::size_t> groups;
            for (double x : r)
                ++groups[x];
            for (const auto& [val, t] : groups)
                ties += double(t) * double(t) * double(t) - double(t);
        }
        double denom = double(m) * double(m) * (double(n) * double(n) * double(n) - double(n)) / 12.0 -
                       double(m) * ties / 12.0;
        if (denom <= 0.0)
            continue; // fully tied rows carry no rank information
        CHECK(kendalls_w(rows) == doctest::Approx(s / denom).epsilon(1e-10));
    }
}

TEST_CASE("cohens d reproduces the hand example") {
    CHECK(cohens_d({2, 4}, {1, 3}) == doctest::Approx(1.0 / std::sqrt(2.0)).epsilon(1e-6));
    CHECK(cohens_d({1, 3}, {2, 4}) == doctest::Approx(1.0 / std::sqrt(2.0)).epsilon(1e-6));
    CHECK(cohens_d({5, 5, 7, 7}, {5, 5, 7, 7}) == doctest::Approx(0.0).epsilon(1e-12));
    CHECK_THROWS_AS(cohens_d({1}, {1, 2}), error);
    try {
        cohens_d({3, 3}, {4, 4});
        FAIL("expected degenerate_variance");
    } catch (const error& e) {
        CHECK(e.code() == errc::degenerate_variance);
    }
}

TEST_CASE("score_table stores cells exactly once") {
    score_table t;
    t.add("u1", "vprag", "gen", 0.8);
    t.add("u1", "brag", "gen", 0.6);
    t.add("u2", "vprag", "gen", 0.7);
    t.add("u2", "brag", "gen", 0.9);
    CHECK(t.size() == 4);
    CHECK(t.value("u1", "vprag", "gen") == 0.8);
    CHECK(t.methods() == std::vector<std::string>{"brag", "vprag"});
    CHECK(t.units().size() == 2);
    CHECK(t.method_mean("vprag") == doctest::Approx(0.75).epsilon(1e-12));
    CHECK(t.find("u9", "vprag", "gen") == nullptr);
    CHECK_THROWS_AS(t.value("u9", "vprag", "gen"), error);
    CHECK_THROWS_AS(t.add("u1", "vprag", "gen", 0.5), error);
}

TEST_CASE("win_rate awards outright wins only") {
    score_table t;
    t.add("u1", "a", "gen", 0.9);
    t.add("u1", "b", "gen", 0.5);
    t.add("u2", "a", "gen", 0.4);
    t.add("u2", "b", "gen", 0.6);
    t.add("u3", "a", "gen", 0.5);
    t.add("u3", "b", "gen", 0.5); // tie: nobody wins
    auto rates = win_rate(t);
    CHECK(rates["a"] == doctest::Approx(1.0 / 3.0).epsilon(1e-12));
    CHECK(rates["b"] == doctest::Approx(1.0 / 3.0).epsilon(1e-12));

    score_table solo;
    solo.add("u1", "only", "gen", 0.2);
    CHECK(win_rate(solo)["only"] == doctest::Approx(1.0).epsilon(1e-12));

    score_table holes;
    holes.add("u1", "a", "gen", 0.9);
    holes.add("u1", "b", "gen", 0.5);
    holes.add("u2", "a", "gen", 0.4);
    CHECK_THROWS_AS(win_rate(holes), error);
}

TEST_CASE("top2_agreement counts shared leaders") {
    score_table a, b;
    for (const char* u : {"u1", "u2"}) {
        a.add(u, "x", "gen", u[1] == '1' ? 0.9 : 0.2);
        a.add(u, "y", "gen", 0.5);
        a.add(u, "z", "gen", u[1] == '1' ? 0.1 : 0.8);
    }
    // b agrees on u1's leader, disagrees on u2
    b.add("u1", "x", "gen", 0.8);
    b.add("u1", "y", "gen", 0.7);
    b.add("u1", "z", "gen", 0.1);
    b.add("u2", "x", "gen", 0.9); // a's leader z is b's third
    b.add("u2", "y", "gen", 0.8);
    b.add("u2", "z", "gen", 0.1);
    CHECK(top2_agreement(a, b) == doctest::Approx(0.5).epsilon(1e-12));
}

TEST_CASE("estimate_pi is the mean judge score") {
    CHECK(estimate_pi({4.0, 5.0, 3.0}) == doctest::Approx(4.0).epsilon(1e-12));
    CHECK_THROWS_AS(estimate_pi({}), error);
}
