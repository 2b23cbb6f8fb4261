#pragma once

#include <map>
#include <string>
#include <tuple>
#include <utility>
#include <vector>

#include "vptt/vec.hpp"

// Rank statistics and aggregation for method comparisons.

namespace vptt::stats {

// 1-based ranks of values ascending, ties averaged (fractional ranks).
vec rankify(const vec& values);

// Spearman's rho: Pearson correlation of the average-tie ranks. Zero rank
// variance on either side is degenerate_variance.
double spearman_rho(const vec& a, const vec& b);

// Kendall's W with tie correction. Each row is one judge's values over the
// same n items (scores or ranks; rows are re-ranked internally, and W is
// invariant to rank direction).
double kendalls_w(const std::vector<vec>& rankings);

// |mean(x) - mean(y)| / pooled sample standard deviation.
double cohens_d(const vec& x, const vec& y);

// Scores indexed by (persona, method, task). Insertion is the only mutation;
// duplicate keys are a data error.
class score_table {
  public:
    void add(const std::string& persona, const std::string& method, const std::string& task,
             double value);

    bool empty() const { return cells_.empty(); }
    std::size_t size() const { return cells_.size(); }

    // Sorted unique method names / (persona, task) units.
    std::vector<std::string> methods() const;
    std::vector<std::pair<std::string, std::string>> units() const;

    // Throws missing_cell when the combination was never added.
    double value(const std::string& persona, const std::string& method,
                 const std::string& task) const;
    const double* find(const std::string& persona, const std::string& method,
                       const std::string& task) const;

    double method_mean(const std::string& method) const;

  private:
    std::map<std::tuple<std::string, std::string, std::string>, double> cells_;
};

// Fraction of (persona, task) units each method wins outright; ties on a unit
// award nobody. Every method must be scored on every unit.
std::map<std::string, double> win_rate(const score_table& table);

// Fraction of units where a's top method lands in b's top two. Both tables
// must cover the same units and methods; ties order by method name.
double top2_agreement(const score_table& a, const score_table& b);

// Mean judge score: the population-quality estimator over every (user, prompt)
// judgement of one method.
double estimate_pi(const std::vector<double>& judge_scores);

} // namespace vptt::stats
