#include "vptt/score.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <set>

#include "vptt/hash.hpp"
#include "vptt/vprag.hpp"

namespace vptt::score {

double persona_alignment(const vec& prompt_emb, const vec& persona_emb) {
    return std::clamp(cosine(prompt_emb, persona_emb), 0.0, 1.0);
}

gs_basis build_gs_basis(const std::vector<vec>& vectors, double drop_tol) {
    gs_basis basis;
    if (vectors.empty())
        return basis;
    basis.dim = vectors[0].size();
    for (std::size_t i = 0; i < vectors.size(); ++i) {
        if (vectors[i].size() != basis.dim)
            throw error(errc::dimension_mismatch, "mixed dimensions in basis input");
        vec r = vectors[i];
        for (const vec& b : basis.columns) {
            double c = dot(b, r);
            for (std::size_t d = 0; d < r.size(); ++d)
                r[d] -= c * b[d];
        }
        double n = l2_norm(r);
        if (n < drop_tol) {
            basis.dropped.push_back(i);
            continue;
        }
        for (double& x : r)
            x /= n;
        basis.columns.push_back(std::move(r));
    }
    return basis;
}

vec gs_coefficients(const gs_basis& basis, const vec& v) {
    vec c;
    c.reserve(basis.columns.size());
    for (const vec& b : basis.columns)
        c.push_back(dot(b, v));
    return c;
}

double gs_reconstruction(const gs_basis& basis, const vec& v) {
    if (basis.columns.empty())
        return 0.0;
    vec c = gs_coefficients(basis, v);
    vec proj(v.size(), 0.0);
    for (std::size_t j = 0; j < basis.columns.size(); ++j)
        for (std::size_t d = 0; d < v.size(); ++d)
            proj[d] += c[j] * basis.columns[j][d];
    if (l2_norm(proj) < 1e-12)
        return 0.0;
    return std::clamp(cosine(v, proj), 0.0, 1.0);
}

namespace {

double sq_dist(const vec& a, const vec& b) {
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        double d = a[i] - b[i];
        s += d * d;
    }
    return s;
}

} // namespace

cluster_model fit_clusters(const std::vector<vec>& points, std::size_t k, std::uint64_t seed,
                           std::size_t max_iter, double tol) {
    if (k == 0)
        throw error(errc::invalid_argument, "k must be positive");
    if (points.size() < k)
        throw error(errc::invalid_argument, "fewer points than clusters");

    rng gen(mix64(seed ^ 0x6b6d65616e73ull)); // "kmeans"
    cluster_model model;

    // k-means++ seeding: first centroid uniform, the rest proportional to the
    // squared distance to the nearest chosen centroid.
    model.centroids.push_back(points[gen.next_below(points.size())]);
    vec d2(points.size());
    while (model.centroids.size() < k) {
        double total = 0.0;
        for (std::size_t i = 0; i < points.size(); ++i) {
            double best = sq_dist(points[i], model.centroids[0]);
            for (std::size_t c = 1; c < model.centroids.size(); ++c)
                best = std::min(best, sq_dist(points[i], model.centroids[c]));
            d2[i] = best;
            total += best;
        }
        std::size_t pick;
        if (total <= 0.0) {
            pick = gen.next_below(points.size()); // all mass on duplicates
        } else {
            double target = gen.next_double() * total;
            pick = points.size() - 1;
            double acc = 0.0;
            for (std::size_t i = 0; i < points.size(); ++i) {
                acc += d2[i];
                if (acc >= target) {
                    pick = i;
                    break;
                }
            }
        }
        model.centroids.push_back(points[pick]);
    }

    model.assignment.assign(points.size(), 0);
    for (std::size_t iter = 0; iter < max_iter; ++iter) {
        ++model.iterations;
        for (std::size_t i = 0; i < points.size(); ++i) {
            std::size_t best = 0;
            double best_d = sq_dist(points[i], model.centroids[0]);
            for (std::size_t c = 1; c < k; ++c) {
                double d = sq_dist(points[i], model.centroids[c]);
                if (d < best_d) {
                    best_d = d;
                    best = c;
                }
            }
            model.assignment[i] = best;
        }
        double moved = 0.0;
        for (std::size_t c = 0; c < k; ++c) {
            vec mean(points[0].size(), 0.0);
            std::size_t count = 0;
            for (std::size_t i = 0; i < points.size(); ++i) {
                if (model.assignment[i] != c)
                    continue;
                ++count;
                for (std::size_t d = 0; d < mean.size(); ++d)
                    mean[d] += points[i][d];
            }
            if (count == 0)
                continue; // empty cluster keeps its centroid
            for (double& x : mean)
                x /= double(count);
            moved = std::max(moved, std::sqrt(sq_dist(mean, model.centroids[c])));
            model.centroids[c] = std::move(mean);
        }
        if (moved < tol)
            break;
    }

    model.inertia = 0.0;
    for (std::size_t i = 0; i < points.size(); ++i)
        model.inertia += sq_dist(points[i], model.centroids[model.assignment[i]]);
    return model;
}

namespace {

vec centroid_distances(const gs_basis& basis, const cluster_model& model, const vec& prompt_emb,
                       vec& coeffs_out) {
    if (model.centroids.empty())
        throw error(errc::invalid_argument, "cluster model has no centroids");
    coeffs_out = gs_coefficients(basis, prompt_emb);
    vec d(model.centroids.size());
    for (std::size_t k = 0; k < model.centroids.size(); ++k) {
        if (model.centroids[k].size() != coeffs_out.size())
            throw error(errc::dimension_mismatch, "centroid vs coefficient dimensions");
        d[k] = std::sqrt(sq_dist(coeffs_out, model.centroids[k]));
    }
    return d;
}

vec softmin_weights(const vec& d, double tau) {
    double lo = *std::min_element(d.begin(), d.end());
    vec a(d.size());
    double z = 0.0;
    for (std::size_t k = 0; k < d.size(); ++k) {
        a[k] = std::exp(-(d[k] - lo) / tau);
        z += a[k];
    }
    for (double& x : a)
        x /= z;
    return a;
}

} // namespace

double cluster_proximity(const gs_basis& basis, const cluster_model& model,
                         const vec& prompt_emb) {
    vec coeffs;
    vec d = centroid_distances(basis, model, prompt_emb, coeffs);
    return std::exp(-*std::min_element(d.begin(), d.end()));
}

double cluster_proximity_soft(const gs_basis& basis, const cluster_model& model,
                              const vec& prompt_emb, double tau) {
    if (!(tau > 0.0))
        throw error(errc::invalid_argument, "tau must be positive");
    vec coeffs;
    vec d = centroid_distances(basis, model, prompt_emb, coeffs);
    vec a = softmin_weights(d, tau);
    double d_soft = 0.0;
    for (std::size_t k = 0; k < d.size(); ++k)
        d_soft += a[k] * d[k];
    return std::exp(-d_soft);
}

vec cluster_proximity_soft_gradient(const gs_basis& basis, const cluster_model& model,
                                    const vec& prompt_emb, double tau) {
    if (!(tau > 0.0))
        throw error(errc::invalid_argument, "tau must be positive");
    vec z;
    vec d = centroid_distances(basis, model, prompt_emb, z);
    vec a = softmin_weights(d, tau);
    double d_soft = 0.0;
    for (std::size_t k = 0; k < d.size(); ++k)
        d_soft += a[k] * d[k];
    double value = std::exp(-d_soft);

    // d d_soft / d d_k = a_k (1 - (d_k - d_soft) / tau); chain through
    // d d_k / d z = (z - c_k) / d_k and z = B^T v.
    vec grad_z(z.size(), 0.0);
    for (std::size_t k = 0; k < d.size(); ++k) {
        if (d[k] < 1e-12)
            continue; // norm kink; measure-zero in the checked fixtures
        double dk_weight = a[k] * (1.0 - (d[k] - d_soft) / tau);
        for (std::size_t j = 0; j < z.size(); ++j)
            grad_z[j] += dk_weight * (z[j] - model.centroids[k][j]) / d[k];
    }
    vec grad(prompt_emb.size(), 0.0);
    for (std::size_t j = 0; j < z.size(); ++j)
        for (std::size_t dim = 0; dim < prompt_emb.size(); ++dim)
            grad[dim] += -value * grad_z[j] * basis.columns[j][dim];
    return grad;
}

std::vector<std::string> word_trigrams(const std::string& text) {
    std::vector<std::string> tokens = embed::tokenize_words(text);
    std::vector<std::string> out;
    std::set<std::string> seen;
    for (std::size_t i = 0; i + 2 < tokens.size(); ++i) {
        std::string tri = tokens[i] + " " + tokens[i + 1] + " " + tokens[i + 2];
        if (seen.insert(tri).second)
            out.push_back(std::move(tri));
    }
    return out;
}

double novelty(const std::string& prompt, const std::vector<std::string>& captions) {
    std::vector<std::string> tris = word_trigrams(prompt);
    if (tris.empty())
        return 1.0;
    std::set<std::string> prompt_set(tris.begin(), tris.end());
    double best = 0.0;
    for (const std::string& caption : captions) {
        std::vector<std::string> cap = word_trigrams(caption);
        std::size_t shared = 0;
        for (const std::string& t : cap)
            shared += prompt_set.count(t);
        best = std::max(best, double(shared) / double(prompt_set.size()));
    }
    return 1.0 - best;
}

double novelty_soft(const std::string& prompt, const std::vector<std::string>& captions,
                    const embed::embedder& element_embedder) {
    std::vector<std::string> tris = word_trigrams(prompt);
    if (tris.empty())
        return 1.0;
    std::vector<vec> tri_embs = element_embedder.embed(tris);
    double best = 0.0;
    for (const std::string& caption : captions) {
        std::vector<std::string> cap = word_trigrams(caption);
        if (cap.empty())
            continue;
        std::vector<vec> cap_embs = element_embedder.embed(cap);
        double sum = 0.0;
        for (const vec& t : tri_embs) {
            double m = -1.0;
            for (const vec& g : cap_embs)
                m = std::max(m, cosine(t, g));
            sum += m;
        }
        best = std::max(best, sum / double(tris.size()));
    }
    return std::clamp(1.0 - best, 0.0, 1.0);
}

double objective_j(double align, double fidelity, double novelty, objective_weights w) {
    if (w.align < 0.0 || w.fidelity < 0.0 || w.novelty < 0.0)
        throw error(errc::invalid_argument, "objective weights must be nonnegative");
    if (std::fabs(w.align + w.fidelity + w.novelty - 1.0) > 1e-9)
        throw error(errc::invalid_argument, "objective weights must sum to 1");
    return w.align * align + w.fidelity * fidelity + w.novelty * novelty;
}

score_context make_score_context(const persona& p, const std::string& query,
                                 const embed::embedder& post_embedder,
                                 const score_options& options) {
    if (p.posts.empty())
        throw error(errc::invalid_argument, "persona '" + p.id + "' has no posts");
    score_context ctx;
    ctx.persona_emb = post_embedder.embed_one(persona_summary(p));

    std::vector<std::string> captions;
    std::vector<vec> embs;
    captions.reserve(p.posts.size());
    for (const post& q : p.posts)
        captions.push_back(q.caption);
    {
        std::vector<std::string> missing;
        for (const post& q : p.posts)
            if (q.embedding.empty())
                missing.push_back(q.caption);
        std::vector<vec> computed =
            missing.empty() ? std::vector<vec>{} : post_embedder.embed(missing);
        std::size_t next = 0;
        for (const post& q : p.posts)
            embs.push_back(q.embedding.empty() ? std::move(computed[next++]) : q.embedding);
    }

    if (options.eval_post_budget > 0 && options.eval_post_budget < captions.size()) {
        vec qe = post_embedder.embed_one(query);
        vec w = vprag::attention_weights(vprag::post_similarities(qe, embs), options.eval_tau);
        std::vector<std::size_t> keep(captions.size());
        std::iota(keep.begin(), keep.end(), 0);
        std::stable_sort(keep.begin(), keep.end(),
                         [&](std::size_t a, std::size_t b) { return w[a] > w[b]; });
        keep.resize(options.eval_post_budget);
        std::sort(keep.begin(), keep.end()); // keep original post order
        std::vector<std::string> c2;
        std::vector<vec> e2;
        for (std::size_t i : keep) {
            c2.push_back(captions[i]);
            e2.push_back(embs[i]);
        }
        captions = std::move(c2);
        embs = std::move(e2);
    }

    ctx.basis = build_gs_basis(embs);
    std::vector<vec> points;
    points.reserve(embs.size());
    for (const vec& v : embs)
        points.push_back(gs_coefficients(ctx.basis, v));
    std::size_t k = std::min(options.cluster_k, points.size());
    ctx.clusters = fit_clusters(points, std::max<std::size_t>(k, 1), options.cluster_seed);
    ctx.captions = std::move(captions);
    ctx.caption_embs = std::move(embs);
    return ctx;
}

score_components score_prompt(const std::string& prompt_text, const score_context& ctx,
                              const embed::embedder& post_embedder,
                              const embed::embedder& element_embedder,
                              const score_options& options) {
    vec prompt_emb = post_embedder.embed_one(prompt_text);
    score_components out;
    out.pa = persona_alignment(prompt_emb, ctx.persona_emb);
    out.gs = gs_reconstruction(ctx.basis, prompt_emb);
    out.cp = options.use_soft_cp
                 ? cluster_proximity_soft(ctx.basis, ctx.clusters, prompt_emb, options.soft_tau)
                 : cluster_proximity(ctx.basis, ctx.clusters, prompt_emb);
    if (options.caption_conditioned) {
        out.nv = options.use_soft_nv ? novelty_soft(prompt_text, ctx.captions, element_embedder)
                                     : novelty(prompt_text, ctx.captions);
        out.nv_applicable = true;
    } else {
        out.nv = 0.0;
        out.nv_applicable = false;
    }
    return out;
}

} // namespace vptt::score
