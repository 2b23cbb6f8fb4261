#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "vptt/embedding.hpp"
#include "vptt/persona.hpp"
#include "vptt/remote.hpp"
#include "vptt/vec.hpp"

// Visual-prior retrieval: turn a raw query plus a persona's post history into
// a personalized prompt. Post relevance becomes a Boltzmann distribution over
// captions, its entropy decides how many posts to read, per-category element
// budgets are apportioned across selected posts proportionally to
// weight * availability, and the winning elements are composed under a word
// budget.

namespace vptt::vprag {

enum class composer_kind { concatenate, external_llm };

struct retrieval_config {
    double tau = 0.1;                                        // softmax temperature
    std::vector<std::pair<std::string, std::size_t>> budgets; // category -> per-category budget
    std::size_t word_budget = 150;
    composer_kind composer = composer_kind::concatenate;
    bool include_summary = true;

    // All default categories with the same per-category budget.
    static retrieval_config defaults(std::size_t per_category = 3);
};

void validate_config(const retrieval_config& cfg);

// s_i = q . v_i for unit vectors (cosine without re-scaling).
vec post_similarities(const vec& query, const std::vector<vec>& caption_embeddings);

// w_i = exp(s_i / tau) / sum_j exp(s_j / tau), computed max-subtracted so the
// result is invariant to adding a constant to every similarity.
vec attention_weights(const vec& similarities, double tau);

// d w_i / d s_j = w_i (delta_ij - w_j) / tau, row i, column j.
std::vector<vec> attention_weights_jacobian(const vec& similarities, double tau);

// H = -sum w_i log w_i with 0 log 0 = 0. Input must be a distribution
// (nonnegative, sums to 1 within tol).
double retrieval_entropy(const vec& weights, double tol = 1e-6);

// n_eff = exp(H): the number of posts the weight mass effectively spans.
double effective_posts(const vec& weights, double tol = 1e-6);

// K most relevant post indices, K = max(1, min(floor(n_eff), 2 * total_budget,
// post count)), descending weight, ties to the lower index.
std::vector<std::size_t> select_posts(const vec& weights, double n_eff,
                                      std::size_t total_budget);

// Largest-remainder apportionment of one category budget across posts, quota
// proportional to weight * availability, capped by availability. Remainder
// units go to the largest fractional remainders (ties: higher weight, then
// lower index); capped overflow redistributes by the same rule. The result
// sums to min(budget, total availability). Zero proportional mass with a
// positive budget is an allocation_empty error.
std::vector<std::size_t> allocate_quotas(const vec& weights,
                                         const std::vector<std::size_t>& available,
                                         std::size_t budget);

// Categories sorted by cos(u_k, query_elm) descending; equal scores keep the
// given order.
std::vector<std::pair<std::string, double>>
rank_categories(const vec& query_elm, const std::vector<std::pair<std::string, vec>>& categories);

// Element indices sorted by cos(embed(e), query_elm) descending; equal scores
// keep the given (library) order.
std::vector<std::size_t> rank_elements(const vec& query_elm,
                                       const std::vector<std::string>& elements,
                                       const embed::embedder& element_embedder);

struct composed_prompt {
    std::string text;
    std::vector<std::string> included_elements; // kept after budget truncation
    bool summary_included = false;
};

// Concatenating composer: query, then the summary, then elements as
// comma-separated phrases in priority order. Whole elements drop from the
// lowest-priority end until the word budget holds, then the summary; the query
// is never truncated (budget below the query length is budget_too_small).
composed_prompt compose_prompt(const std::string& query, const std::string& summary,
                               const std::vector<std::string>& elements,
                               std::size_t word_budget, bool include_summary = true);

struct selected_element {
    std::string category;
    std::size_t post_index = 0; // index into persona.posts
    std::string text;
    double score = 0.0; // cosine against the element-level query
};

struct category_allocation {
    std::string category;
    double priority = 0.0;
    std::vector<std::size_t> post_quotas; // parallel to selected_posts
};

struct retrieval_trace {
    vec similarities;
    vec weights; // over all posts
    double entropy = 0.0;
    double n_eff = 0.0;
    std::vector<std::size_t> selected_posts;
    std::vector<category_allocation> allocations; // category-priority order
    std::vector<selected_element> elements;        // composition order
};

struct personalized_prompt {
    std::string text;
    std::string source_query;
    std::string persona_id;
    std::vector<std::string> elements; // elements present in the final text
    bool summary_included = false;
    retrieval_trace trace;
};

// Full pipeline for one query against one persona. Posts missing stored
// embeddings are embedded on demand with the post-level embedder. An
// external-llm composer requires a completion client and re-enforces the word
// cap on the returned text.
personalized_prompt personalize(const std::string& query, const persona& p,
                                const retrieval_config& cfg,
                                const embed::embedder& post_embedder,
                                const embed::embedder& element_embedder,
                                const remote::completion_client* llm = nullptr);

// Reference compositions the evaluation harness compares against.
// Full-caption retrieval: query then whole captions (given order) until the
// word budget holds.
composed_prompt brag_prompt(const std::string& query, const std::vector<std::string>& captions,
                            std::size_t word_budget);
// Summary-only personalization: query plus the persona summary.
composed_prompt persona_only_prompt(const std::string& query, const std::string& summary,
                                    std::size_t word_budget);

} // namespace vptt::vprag
