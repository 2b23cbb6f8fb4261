#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "vptt/embedding.hpp"
#include "vptt/persona.hpp"
#include "vptt/vec.hpp"

// Prompt quality metrics: alignment with the persona summary, fidelity to the
// span and cluster structure of the persona's caption embeddings, and n-gram
// novelty against the captions themselves.

namespace vptt::score {

// cos(prompt, persona reference), clamped to [0, 1].
double persona_alignment(const vec& prompt_emb, const vec& persona_emb);

struct gs_basis {
    std::vector<vec> columns;          // orthonormal, input order
    std::vector<std::size_t> dropped;  // inputs lost to near-dependence
    std::size_t dim = 0;               // ambient dimension
};

// Modified Gram-Schmidt over the inputs in order; residuals with norm below
// drop_tol are recorded as dropped rather than normalized into noise.
gs_basis build_gs_basis(const std::vector<vec>& vectors, double drop_tol = 1e-8);

// B^T v: coordinates of v inside the basis span.
vec gs_coefficients(const gs_basis& basis, const vec& v);

// cos(v, B B^T v), the length of the unit prompt's shadow inside the caption
// span; 0 when the projection vanishes (or the basis is empty).
double gs_reconstruction(const gs_basis& basis, const vec& v);

struct cluster_model {
    std::vector<vec> centroids;            // in coefficient space
    std::vector<std::size_t> assignment;   // point -> centroid
    std::size_t iterations = 0;
    double inertia = 0.0;
};

// Seeded k-means++ then Lloyd iterations (at most max_iter, centroid movement
// tolerance tol). Deterministic for a given seed on every platform.
cluster_model fit_clusters(const std::vector<vec>& points, std::size_t k, std::uint64_t seed,
                           std::size_t max_iter = 50, double tol = 1e-6);

// exp(-min_k ||B^T v - c_k||): proximity of the prompt's coefficient vector to
// the nearest caption cluster.
double cluster_proximity(const gs_basis& basis, const cluster_model& model, const vec& prompt_emb);

// Softmin relaxation: d~ = sum_k softmax(-d/tau)_k d_k, returns exp(-d~).
// Recovers the hard score as tau -> 0 and exp(-mean d) as tau -> inf.
double cluster_proximity_soft(const gs_basis& basis, const cluster_model& model,
                              const vec& prompt_emb, double tau);

// d cluster_proximity_soft / d prompt_emb, for gradient checking.
vec cluster_proximity_soft_gradient(const gs_basis& basis, const cluster_model& model,
                                    const vec& prompt_emb, double tau);

// Distinct lowercase word trigrams in first-occurrence order.
std::vector<std::string> word_trigrams(const std::string& text);

// NV = 1 - max_i |Tri(prompt) ∩ Tri(caption_i)| / |Tri(prompt)|. Prompts with
// fewer than three words have no trigrams and score 1.
double novelty(const std::string& prompt, const std::vector<std::string>& captions);

// Embedded relaxation: per prompt trigram take the best cosine against the
// caption's trigrams, average, and keep the best caption. Clamped to [0, 1].
double novelty_soft(const std::string& prompt, const std::vector<std::string>& captions,
                    const embed::embedder& element_embedder);

struct score_components {
    double pa = 0.0;
    double gs = 0.0;
    double cp = 0.0;
    double nv = 0.0;
    bool nv_applicable = true; // false for methods not conditioned on captions

    // 0.20 PA + 0.30 GS + 0.30 CP + 0.20 NV
    double combined() const { return 0.20 * pa + 0.30 * gs + 0.30 * cp + 0.20 * nv; }
    // Caption-free variant: (PA + GS + CP) / 3
    double constrained() const { return (pa + gs + cp) / 3.0; }
};

struct objective_weights {
    double align = 1.0 / 3.0;
    double fidelity = 1.0 / 3.0;
    double novelty = 1.0 / 3.0;
};

// J = w.align * align + w.fidelity * fidelity + w.novelty * novelty; the
// weights must be nonnegative and sum to 1 within 1e-9.
double objective_j(double align, double fidelity, double novelty, objective_weights w = {});

struct score_options {
    std::size_t cluster_k = 5; // effective k = min(cluster_k, caption count)
    std::uint64_t cluster_seed = 13;
    double soft_tau = 0.1;
    bool use_soft_cp = false;
    bool use_soft_nv = false;
    bool caption_conditioned = true; // false zeroes NV (baseline rule)
    // 0 = score against every post; otherwise the top-N posts by attention
    // weight of the task query (temperature eval_tau) form the reference set.
    std::size_t eval_post_budget = 0;
    double eval_tau = 0.1;
};

// Per-(persona, task) reference data reused across the prompts being compared.
struct score_context {
    vec persona_emb;
    std::vector<std::string> captions;
    std::vector<vec> caption_embs;
    gs_basis basis;
    cluster_model clusters;
};

score_context make_score_context(const persona& p, const std::string& query,
                                 const embed::embedder& post_embedder,
                                 const score_options& options = {});

score_components score_prompt(const std::string& prompt_text, const score_context& ctx,
                              const embed::embedder& post_embedder,
                              const embed::embedder& element_embedder,
                              const score_options& options = {});

} // namespace vptt::score
