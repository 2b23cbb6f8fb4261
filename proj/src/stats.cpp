#include "vptt/stats.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <set>

namespace vptt::stats {

vec rankify(const vec& values) {
    std::vector<std::size_t> order(values.size());
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(),
              [&](std::size_t a, std::size_t b) { return values[a] < values[b]; });
    vec ranks(values.size(), 0.0);
    std::size_t i = 0;
    while (i < order.size()) {
        std::size_t j = i;
        while (j + 1 < order.size() && values[order[j + 1]] == values[order[i]])
            ++j;
        double avg = (double(i + 1) + double(j + 1)) / 2.0; // 1-based, tie-averaged
        for (std::size_t t = i; t <= j; ++t)
            ranks[order[t]] = avg;
        i = j + 1;
    }
    return ranks;
}

double spearman_rho(const vec& a, const vec& b) {
    check_same_dim(a, b);
    if (a.size() < 2)
        throw error(errc::invalid_argument, "need at least two observations");
    vec ra = rankify(a), rb = rankify(b);
    double ma = std::accumulate(ra.begin(), ra.end(), 0.0) / double(ra.size());
    double mb = std::accumulate(rb.begin(), rb.end(), 0.0) / double(rb.size());
    double cov = 0.0, va = 0.0, vb = 0.0;
    for (std::size_t i = 0; i < ra.size(); ++i) {
        double da = ra[i] - ma, db = rb[i] - mb;
        cov += da * db;
        va += da * da;
        vb += db * db;
    }
    if (va <= 0.0 || vb <= 0.0)
        throw error(errc::degenerate_variance, "constant ranks on one side");
    return cov / std::sqrt(va * vb);
}

double kendalls_w(const std::vector<vec>& rankings) {
    if (rankings.empty())
        throw error(errc::invalid_argument, "no judge rankings");
    std::size_t n = rankings[0].size();
    if (n < 2)
        throw error(errc::invalid_argument, "need at least two items");
    for (const vec& row : rankings)
        if (row.size() != n)
            throw error(errc::dimension_mismatch, "judge rows of different lengths");

    double m = double(rankings.size());
    vec rank_sums(n, 0.0);
    double tie_term = 0.0; // sum over judges of sum (t^3 - t) per tie group
    for (const vec& row : rankings) {
        vec ranks = rankify(row);
        for (std::size_t i = 0; i < n; ++i)
            rank_sums[i] += ranks[i];
        std::map<double, std::size_t> groups;
        for (double r : ranks)
            ++groups[r];
        for (const auto& [rank, t] : groups)
            if (t > 1)
                tie_term += double(t) * double(t) * double(t) - double(t);
    }
    double mean = m * double(n + 1) / 2.0;
    double s = 0.0;
    for (double r : rank_sums)
        s += (r - mean) * (r - mean);
    double denom = m * m * (double(n) * double(n) * double(n) - double(n)) / 12.0 -
                   m * tie_term / 12.0;
    if (denom <= 0.0)
        throw error(errc::degenerate_variance, "all items tied by every judge");
    return s / denom;
}

double cohens_d(const vec& x, const vec& y) {
    if (x.size() < 2 || y.size() < 2)
        throw error(errc::invalid_argument, "each sample needs at least two values");
    auto mean = [](const vec& v) {
        return std::accumulate(v.begin(), v.end(), 0.0) / double(v.size());
    };
    auto var = [&](const vec& v, double m) {
        double s = 0.0;
        for (double t : v)
            s += (t - m) * (t - m);
        return s / double(v.size() - 1);
    };
    double mx = mean(x), my = mean(y);
    double pooled = ((double(x.size()) - 1.0) * var(x, mx) + (double(y.size()) - 1.0) * var(y, my)) /
                    (double(x.size()) + double(y.size()) - 2.0);
    if (pooled <= 0.0)
        throw error(errc::degenerate_variance, "pooled variance is zero");
    return std::fabs(mx - my) / std::sqrt(pooled);
}

void score_table::add(const std::string& persona, const std::string& method,
                      const std::string& task, double value) {
    auto [it, inserted] = cells_.emplace(std::make_tuple(persona, method, task), value);
    if (!inserted)
        throw error(errc::data, "duplicate score cell (" + persona + ", " + method + ", " + task +
                                    ")");
}

std::vector<std::string> score_table::methods() const {
    std::set<std::string> m;
    for (const auto& [key, value] : cells_)
        m.insert(std::get<1>(key));
    return {m.begin(), m.end()};
}

std::vector<std::pair<std::string, std::string>> score_table::units() const {
    std::set<std::pair<std::string, std::string>> u;
    for (const auto& [key, value] : cells_)
        u.emplace(std::get<0>(key), std::get<2>(key));
    return {u.begin(), u.end()};
}

const double* score_table::find(const std::string& persona, const std::string& method,
                                const std::string& task) const {
    auto it = cells_.find(std::make_tuple(persona, method, task));
    return it == cells_.end() ? nullptr : &it->second;
}

double score_table::value(const std::string& persona, const std::string& method,
                          const std::string& task) const {
    if (const double* v = find(persona, method, task))
        return *v;
    throw error(errc::missing_cell,
                "no score for (" + persona + ", " + method + ", " + task + ")");
}

double score_table::method_mean(const std::string& method) const {
    double sum = 0.0;
    std::size_t count = 0;
    for (const auto& [key, value] : cells_) {
        if (std::get<1>(key) == method) {
            sum += value;
            ++count;
        }
    }
    if (count == 0)
        throw error(errc::missing_cell, "no scores for method " + method);
    return sum / double(count);
}

std::map<std::string, double> win_rate(const score_table& table) {
    std::vector<std::string> methods = table.methods();
    std::vector<std::pair<std::string, std::string>> units = table.units();
    if (methods.empty() || units.empty())
        throw error(errc::invalid_argument, "empty score table");
    std::map<std::string, double> wins;
    for (const std::string& m : methods)
        wins[m] = 0.0;
    for (const auto& [persona, task] : units) {
        double best = -std::numeric_limits<double>::infinity();
        std::string winner;
        bool tied = false;
        for (const std::string& m : methods) {
            double v = table.value(persona, m, task);
            if (v > best) {
                best = v;
                winner = m;
                tied = false;
            } else if (v == best) {
                tied = true;
            }
        }
        if (!tied)
            wins[winner] += 1.0;
    }
    for (auto& [m, w] : wins)
        w /= double(units.size());
    return wins;
}

namespace {

// Methods of one unit ordered best-first; score ties fall back to name order.
std::vector<std::string> unit_ranking(const score_table& t, const std::string& persona,
                                      const std::string& task,
                                      const std::vector<std::string>& methods) {
    std::vector<std::string> order = methods;
    std::stable_sort(order.begin(), order.end(), [&](const std::string& a, const std::string& b) {
        return t.value(persona, a, task) > t.value(persona, b, task);
    });
    return order;
}

} // namespace

double top2_agreement(const score_table& a, const score_table& b) {
    std::vector<std::string> methods = a.methods();
    if (methods != b.methods())
        throw error(errc::invalid_argument, "tables score different methods");
    std::vector<std::pair<std::string, std::string>> units = a.units();
    if (units != b.units())
        throw error(errc::invalid_argument, "tables cover different units");
    if (units.empty() || methods.size() < 2)
        throw error(errc::invalid_argument, "need units and at least two methods");
    std::size_t hits = 0;
    for (const auto& [persona, task] : units) {
        std::string top_a = unit_ranking(a, persona, task, methods).front();
        std::vector<std::string> order_b = unit_ranking(b, persona, task, methods);
        if (order_b[0] == top_a || order_b[1] == top_a)
            ++hits;
    }
    return double(hits) / double(units.size());
}

double estimate_pi(const std::vector<double>& judge_scores) {
    if (judge_scores.empty())
        throw error(errc::invalid_argument, "no judge scores");
    return std::accumulate(judge_scores.begin(), judge_scores.end(), 0.0) /
           double(judge_scores.size());
}

} // namespace vptt::stats
