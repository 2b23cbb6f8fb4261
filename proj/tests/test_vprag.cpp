#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numeric>

#include "vptt/embedding.hpp"
#include "vptt/hash.hpp"
#include "vptt/vprag.hpp"

using namespace vptt;
using namespace vptt::vprag;

namespace {

// Independent largest-remainder oracle: floors first, then hand out the
// remaining units one at a time to the eligible post with the largest
// residual claim raw_i - q_i (ties: larger weight, then lower index). The
// production code instead cycles a pre-sorted remainder order; the two
// mechanisms must coincide on every instance.
std::vector<std::size_t> quota_oracle(const vec& w, const std::vector<std::size_t>& n,
                                      std::size_t budget) {
    std::size_t count = w.size();
    std::vector<std::size_t> q(count, 0);
    if (budget == 0)
        return q;
    double mass = 0.0;
    std::size_t total = 0;
    for (std::size_t i = 0; i < count; ++i) {
        mass += w[i] * double(n[i]);
        total += n[i];
    }
    std::vector<double> raw(count);
    std::size_t assigned = 0;
    for (std::size_t i = 0; i < count; ++i) {
        raw[i] = w[i] * double(n[i]) / mass * double(budget);
        q[i] = std::min<std::size_t>(std::size_t(std::floor(raw[i])), n[i]);
        assigned += q[i];
    }
    std::size_t target = std::min(budget, total);
    while (assigned < target) {
        std::size_t best = count;
        for (std::size_t i = 0; i < count; ++i) {
            if (q[i] >= n[i])
                continue;
            if (best == count) {
                best = i;
                continue;
            }
            double ci = raw[i] - double(q[i]), cb = raw[best] - double(q[best]);
            if (ci > cb || (ci == cb && w[i] > w[best]))
                best = i;
        }
        if (best == count)
            break;
        ++q[best];
        ++assigned;
    }
    return q;
}

} // namespace

TEST_CASE("attention weights reproduce the derived two-score case") {
    vec w = attention_weights({1.0, 0.5}, 0.1);
    CHECK(w[0] == doctest::Approx(0.99331).epsilon(1e-5));
    CHECK(w[1] == doctest::Approx(0.00669).epsilon(1e-3));
    CHECK(w[0] + w[1] == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(effective_posts(w) == doctest::Approx(1.0410).epsilon(1e-3));
}

TEST_CASE("attention weights flatten as temperature grows") {
    vec w = attention_weights({1.0, 0.5}, 1e6);
    CHECK(w[0] == doctest::Approx(0.5).epsilon(1e-4));
    CHECK(w[1] == doctest::Approx(0.5).epsilon(1e-4));
}

TEST_CASE("attention weights are shift invariant and always normalized") {
    rng gen(501);
    for (int trial = 0; trial < 1000; ++trial) {
        std::size_t n = 1 + gen.next_below(12);
        vec s(n);
        for (double& x : s)
            x = gen.next_double() * 4.0 - 2.0;
        vec w = attention_weights(s, 0.1);
        double sum = std::accumulate(w.begin(), w.end(), 0.0);
        REQUIRE(std::fabs(sum - 1.0) < 1e-9);

        vec shifted = s;
        for (double& x : shifted)
            x += 123.0; // also exercises the max-subtraction overflow guard
        vec w2 = attention_weights(shifted, 0.1);
        for (std::size_t i = 0; i < n; ++i)
            REQUIRE(w[i] == doctest::Approx(w2[i]).epsilon(1e-12));
    }
}

TEST_CASE("attention rejects bad input") {
    CHECK_THROWS_AS(attention_weights({}, 0.1), error);
    CHECK_THROWS_AS(attention_weights({1.0}, 0.0), error);
    CHECK_THROWS_AS(attention_weights({1.0}, -1.0), error);
}

TEST_CASE("attention jacobian matches central differences") {
    rng gen(777);
    const double h = 1e-6;
    for (int trial = 0; trial < 20; ++trial) {
        std::size_t n = 2 + gen.next_below(6);
        // scores span +-0.5: at tau 0.1 the weights already range over e^10,
        // while the finite-difference probe keeps w_j * h / tau above the
        // double noise floor so the oracle itself stays trustworthy
        vec s(n);
        for (double& x : s)
            x = gen.next_double() - 0.5;
        auto jac = attention_weights_jacobian(s, 0.1);
        for (std::size_t j = 0; j < n; ++j) {
            vec up = s, dn = s;
            up[j] += h;
            dn[j] -= h;
            vec wu = attention_weights(up, 0.1);
            vec wd = attention_weights(dn, 0.1);
            for (std::size_t i = 0; i < n; ++i) {
                double fd = (wu[i] - wd[i]) / (2 * h);
                double scale = std::max({std::fabs(fd), std::fabs(jac[i][j]), 1e-8});
                REQUIRE(std::fabs(jac[i][j] - fd) / scale < 1e-4);
            }
        }
    }
}

TEST_CASE("entropy and effective posts track the weight distribution") {
    vec uniform(4, 0.25);
    CHECK(retrieval_entropy(uniform) == doctest::Approx(std::log(4.0)).epsilon(1e-12));
    CHECK(effective_posts(uniform) == doctest::Approx(4.0).epsilon(1e-12));

    vec onehot = {0.0, 1.0, 0.0};
    CHECK(retrieval_entropy(onehot) == 0.0);
    CHECK(effective_posts(onehot) == 1.0);

    CHECK_THROWS_AS(retrieval_entropy({0.5, 0.4}), error);  // sums to 0.9
    CHECK_THROWS_AS(retrieval_entropy({1.5, -0.5}), error); // negative weight
    CHECK_THROWS_AS(retrieval_entropy({}), error);
}

TEST_CASE("post selection caps at floor(n_eff), twice the budget, and N") {
    vec ten(10, 0.1);
    CHECK(select_posts(ten, 7.3, 12).size() == 7);

    vec twelve(12, 1.0 / 12);
    CHECK(select_posts(twelve, 50.0, 3).size() == 6);

    vec three(3, 1.0 / 3);
    CHECK(select_posts(three, 50.0, 9).size() == 3);
    CHECK(select_posts(three, 1.0, 9).size() == 1);
    CHECK_THROWS_AS(select_posts(three, 0.4, 9), error);
}

TEST_CASE("post selection orders by weight with stable ties") {
    vec w = {0.1, 0.3, 0.1, 0.3, 0.2};
    auto sel = select_posts(w, 4.0, 10);
    REQUIRE(sel.size() == 4);
    CHECK(sel[0] == 1);
    CHECK(sel[1] == 3);
    CHECK(sel[2] == 4);
    CHECK(sel[3] == 0); // ties keep ascending index order
}

TEST_CASE("quota apportionment reproduces the worked example") {
    auto q = allocate_quotas({0.5, 0.3, 0.2}, {4, 4, 2}, 5);
    REQUIRE(q.size() == 3);
    CHECK(q[0] == 3);
    CHECK(q[1] == 2);
    CHECK(q[2] == 0);
}

TEST_CASE("quota apportionment matches the unit-greedy oracle") {
    rng gen(9001);
    for (int trial = 0; trial < 1000; ++trial) {
        std::size_t n = 1 + gen.next_below(8);
        vec w(n);
        std::vector<std::size_t> avail(n);
        for (std::size_t i = 0; i < n; ++i) {
            w[i] = gen.next_double();
            avail[i] = gen.next_below(6);
        }
        w[0] = 0.1 + gen.next_double(); // keep the weighted mass positive
        avail[0] = 1 + avail[0];
        std::size_t budget = gen.next_below(13);

        auto got = allocate_quotas(w, avail, budget);
        auto want = quota_oracle(w, avail, budget);
        REQUIRE(got == want);

        std::size_t total_avail = std::accumulate(avail.begin(), avail.end(), std::size_t(0));
        std::size_t sum = std::accumulate(got.begin(), got.end(), std::size_t(0));
        REQUIRE(sum == std::min(budget, total_avail));
        for (std::size_t i = 0; i < n; ++i)
            REQUIRE(got[i] <= avail[i]);
    }
}

TEST_CASE("quota apportionment edge cases") {
    CHECK(allocate_quotas({0.5, 0.5}, {3, 3}, 0) == std::vector<std::size_t>{0, 0});
    CHECK_THROWS_AS(allocate_quotas({0.0, 0.0}, {3, 3}, 2), error);
    CHECK_THROWS_AS(allocate_quotas({0.5}, {3, 3}, 2), error);
    // budget above availability saturates
    CHECK(allocate_quotas({0.9, 0.1}, {2, 1}, 10) == std::vector<std::size_t>{2, 1});
}

TEST_CASE("category ranking sorts by cosine with stable ties") {
    vec q = {1.0, 0.0};
    std::vector<std::pair<std::string, vec>> cats = {
        {"pose", {0.0, 1.0}}, {"lighting", {1.0, 0.0}}, {"materials", {0.8, 0.6}},
        {"objects", {0.0, 1.0}}};
    auto ranked = rank_categories(q, cats);
    REQUIRE(ranked.size() == 4);
    CHECK(ranked[0].first == "lighting");
    CHECK(ranked[1].first == "materials");
    CHECK(ranked[2].first == "pose");   // tie with objects, input order kept
    CHECK(ranked[3].first == "objects");
    CHECK_THROWS_AS(rank_categories(q, {}), error);
}

TEST_CASE("element ranking is deterministic") {
    embed::local_embedder elm(64, 1);
    std::vector<std::string> elements = {"soft light", "harsh light", "soft lamplight"};
    vec q = elm.embed_one("soft light");
    auto order = rank_elements(q, elements, elm);
    REQUIRE(order.size() == 3);
    CHECK(order[0] == 0); // exact phrase wins
    CHECK(order == rank_elements(q, elements, elm));
}

TEST_CASE("prompt composition packs whole elements under the word budget") {
    std::string query = "q1 q2 q3 q4 q5";
    std::vector<std::string> elements = {"e1 a1 b1 c1", "e2 a2 b2 c2", "e3 a3 b3 c3"};

    SUBCASE("no summary") {
        auto out = compose_prompt(query, "", elements, 14);
        CHECK(out.text == "q1 q2 q3 q4 q5, e1 a1 b1 c1, e2 a2 b2 c2");
        REQUIRE(out.included_elements.size() == 2);
        CHECK_FALSE(out.summary_included);
    }
    SUBCASE("summary takes budget ahead of elements") {
        auto out = compose_prompt(query, "s1 s2 s3", elements, 14);
        CHECK(out.text == "q1 q2 q3 q4 q5. s1 s2 s3, e1 a1 b1 c1");
        REQUIRE(out.included_elements.size() == 1);
        CHECK(out.summary_included);
    }
    SUBCASE("oversized summary is dropped, elements still pack") {
        auto out = compose_prompt(query, "s1 s2 s3 s4 s5 s6 s7 s8 s9 s10", elements, 10);
        CHECK(out.text == "q1 q2 q3 q4 q5, e1 a1 b1 c1");
        CHECK_FALSE(out.summary_included);
    }
    SUBCASE("include_summary=false ignores the summary") {
        auto out = compose_prompt(query, "s1 s2 s3", elements, 14, false);
        CHECK(out.text == "q1 q2 q3 q4 q5, e1 a1 b1 c1, e2 a2 b2 c2");
        CHECK_FALSE(out.summary_included);
    }
    SUBCASE("query never truncates") {
        CHECK_THROWS_AS(compose_prompt(query, "", elements, 4), error);
        try {
            compose_prompt(query, "", elements, 4);
        } catch (const error& e) {
            CHECK(e.code() == errc::budget_too_small);
        }
    }
    SUBCASE("whole-element packing skips nothing out of order") {
        // Budget fits query plus exactly one element; the first is taken even
        // though the second would fit equally well.
        auto out = compose_prompt(query, "", elements, 9);
        REQUIRE(out.included_elements.size() == 1);
        CHECK(out.included_elements[0] == "e1 a1 b1 c1");
    }
}

TEST_CASE("retrieval config validation") {
    retrieval_config cfg = retrieval_config::defaults();
    CHECK_NOTHROW(validate_config(cfg));
    SUBCASE("tau") {
        cfg.tau = 0.0;
        CHECK_THROWS_AS(validate_config(cfg), error);
    }
    SUBCASE("budget floor") {
        cfg.word_budget = 5;
        CHECK_THROWS_AS(validate_config(cfg), error);
    }
    SUBCASE("all-zero budgets") {
        for (auto& [name, q] : cfg.budgets)
            q = 0;
        CHECK_THROWS_AS(validate_config(cfg), error);
    }
}

namespace {

persona retrieval_fixture() {
    persona p;
    p.id = "user_fixture";
    p.demographics = {{"country", "Peru"}, {"city", "Cusco"}, {"age", "31"},
                      {"occupation", "weaver"}, {"interests", "textiles; markets"}};
    p.elements["lighting"] = {"low afternoon sun", "woven shade patterns", "cold dawn light"};
    p.elements["materials"] = {"alpaca wool", "dyed cotton", "rough adobe"};
    p.elements["environment"] = {"mountain courtyard", "market alley"};
    const char* captions[] = {
        "Spinning alpaca wool in the mountain courtyard before the tourists arrive.",
        "Low afternoon sun across the loom, dyed cotton drying on the line.",
        "Market alley haul: three shades of dyed cotton and one impossible red.",
        "Rough adobe walls make the best backdrop for finished blankets.",
        "Cold dawn light and coca tea, warping the loom for a big order.",
        "Woven shade patterns on the workshop floor all afternoon.",
        "Teaching my niece to spin alpaca wool, her first uneven skein.",
        "Festival week, the market alley is a river of color.",
        "Dyed cotton experiments: onion skins vs cochineal.",
        "The mountain courtyard smells like rain and wet wool today.",
        "Low afternoon sun again, cannot stop photographing the loom shadows.",
        "Finished the commission, rough adobe wall as witness.",
    };
    const char* cats[][2] = {
        {"materials", "alpaca wool"},   {"lighting", "low afternoon sun"},
        {"materials", "dyed cotton"},   {"materials", "rough adobe"},
        {"lighting", "cold dawn light"}, {"lighting", "woven shade patterns"},
        {"materials", "alpaca wool"},   {"environment", "market alley"},
        {"materials", "dyed cotton"},   {"environment", "mountain courtyard"},
        {"lighting", "low afternoon sun"}, {"materials", "rough adobe"},
    };
    for (int i = 0; i < 12; ++i) {
        post q;
        q.id = "p" + std::to_string(i);
        q.caption = captions[i];
        q.element_refs[cats[i][0]] = {cats[i][1]};
        p.posts.push_back(q);
    }
    return p;
}

} // namespace

TEST_CASE("personalize is deterministic and respects its invariants") {
    persona p = retrieval_fixture();
    embed::local_embedder post_emb(128, 0), elm_emb(128, 1);
    retrieval_config cfg;
    cfg.budgets = {{"lighting", 2}, {"materials", 2}, {"environment", 1}};
    cfg.word_budget = 80;

    auto out = personalize("a weaving workshop at golden hour", p, cfg, post_emb, elm_emb);
    auto rerun = personalize("a weaving workshop at golden hour", p, cfg, post_emb, elm_emb);
    CHECK(out.text == rerun.text);
    CHECK(out.elements == rerun.elements);
    CHECK(out.persona_id == "user_fixture");

    const auto& tr = out.trace;
    REQUIRE(tr.weights.size() == 12);
    double sum = std::accumulate(tr.weights.begin(), tr.weights.end(), 0.0);
    CHECK(std::fabs(sum - 1.0) < 1e-9);
    CHECK(tr.n_eff == doctest::Approx(std::exp(tr.entropy)).epsilon(1e-12));
    REQUIRE(!tr.selected_posts.empty());
    CHECK(tr.selected_posts.size() <= 2 * 5);
    for (std::size_t idx : tr.selected_posts)
        REQUIRE(idx < 12);
    for (const auto& alloc : tr.allocations) {
        REQUIRE(alloc.post_quotas.size() == tr.selected_posts.size());
        for (std::size_t j = 0; j < alloc.post_quotas.size(); ++j) {
            const auto& refs = p.posts[tr.selected_posts[j]].element_refs;
            auto it = refs.find(alloc.category);
            std::size_t avail = it == refs.end() ? 0 : it->second.size();
            REQUIRE(alloc.post_quotas[j] <= avail);
        }
    }
    for (const auto& e : tr.elements) {
        const auto& lib = p.elements.at(e.category);
        CHECK(std::find(lib.begin(), lib.end(), e.text) != lib.end());
    }
    // every composed element string appears verbatim in the prompt
    for (const auto& text : out.elements)
        CHECK(out.text.find(text) != std::string::npos);
    CHECK(out.text.rfind("a weaving workshop at golden hour", 0) == 0);
}

TEST_CASE("personalize requires posts and a client for the llm composer") {
    persona p = retrieval_fixture();
    embed::local_embedder post_emb(64, 0), elm_emb(64, 1);
    retrieval_config cfg = retrieval_config::defaults();

    persona empty = p;
    empty.posts.clear();
    CHECK_THROWS_AS(personalize("q", empty, cfg, post_emb, elm_emb), error);

    cfg.composer = composer_kind::external_llm;
    try {
        personalize("q", p, cfg, post_emb, elm_emb);
        FAIL("expected missing_client");
    } catch (const error& e) {
        CHECK(e.code() == errc::missing_client);
    }
}

TEST_CASE("brag prompt concatenates captions under the budget") {
    auto out = brag_prompt("query words here", {"c1 c2 c3", "d1 d2 d3", "e1 e2 e3"}, 9);
    CHECK(out.text == "query words here. c1 c2 c3. d1 d2 d3");
    REQUIRE(out.included_elements.size() == 2);
    CHECK_THROWS_AS(brag_prompt("one two three", {}, 2), error);
}

TEST_CASE("persona-only prompt appends the summary when it fits") {
    auto out = persona_only_prompt("query words", "a short summary", 10);
    CHECK(out.text == "query words. a short summary");
    CHECK(out.summary_included);
    auto tight = persona_only_prompt("query words", "a very much longer summary text", 4);
    CHECK(tight.text == "query words");
    CHECK_FALSE(tight.summary_included);
}
