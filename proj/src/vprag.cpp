#include "vptt/vprag.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "vptt/textutil.hpp"

namespace vptt::vprag {

retrieval_config retrieval_config::defaults(std::size_t per_category) {
    retrieval_config cfg;
    for (const std::string& c : default_categories())
        cfg.budgets.emplace_back(c, per_category);
    return cfg;
}

void validate_config(const retrieval_config& cfg) {
    if (!(cfg.tau > 0.0))
        throw error(errc::invalid_argument, "tau must be positive");
    if (cfg.word_budget < 10)
        throw error(errc::invalid_argument, "word budget must be at least 10");
    bool any = std::any_of(cfg.budgets.begin(), cfg.budgets.end(),
                           [](const auto& b) { return b.second > 0; });
    if (!any)
        throw error(errc::invalid_argument, "at least one category budget must be positive");
}

vec post_similarities(const vec& query, const std::vector<vec>& caption_embeddings) {
    vec s;
    s.reserve(caption_embeddings.size());
    for (const vec& v : caption_embeddings)
        s.push_back(dot(query, v));
    return s;
}

vec attention_weights(const vec& similarities, double tau) {
    if (similarities.empty())
        throw error(errc::invalid_argument, "no similarities to weight");
    if (!(tau > 0.0))
        throw error(errc::invalid_argument, "tau must be positive");
    double top = *std::max_element(similarities.begin(), similarities.end());
    vec w(similarities.size());
    double z = 0.0;
    for (std::size_t i = 0; i < similarities.size(); ++i) {
        w[i] = std::exp((similarities[i] - top) / tau);
        z += w[i];
    }
    for (double& x : w)
        x /= z;
    return w;
}

std::vector<vec> attention_weights_jacobian(const vec& similarities, double tau) {
    vec w = attention_weights(similarities, tau);
    std::vector<vec> jac(w.size(), vec(w.size()));
    for (std::size_t i = 0; i < w.size(); ++i)
        for (std::size_t j = 0; j < w.size(); ++j)
            jac[i][j] = w[i] * ((i == j ? 1.0 : 0.0) - w[j]) / tau;
    return jac;
}

double retrieval_entropy(const vec& weights, double tol) {
    if (weights.empty())
        throw error(errc::invalid_argument, "no weights");
    double sum = 0.0;
    for (double w : weights) {
        if (w < -tol)
            throw error(errc::invalid_argument, "negative weight");
        sum += w;
    }
    if (std::fabs(sum - 1.0) > tol)
        throw error(errc::invalid_argument,
                    "weights sum to " + std::to_string(sum) + ", expected 1");
    double h = 0.0;
    for (double w : weights)
        if (w > 0.0)
            h -= w * std::log(w);
    return h;
}

double effective_posts(const vec& weights, double tol) {
    return std::exp(retrieval_entropy(weights, tol));
}

std::vector<std::size_t> select_posts(const vec& weights, double n_eff,
                                      std::size_t total_budget) {
    if (weights.empty())
        throw error(errc::invalid_argument, "no posts to select from");
    if (!(n_eff >= 1.0 - 1e-9))
        throw error(errc::invalid_argument, "n_eff below 1");
    std::size_t k = std::size_t(std::floor(n_eff));
    k = std::min(k, 2 * total_budget);
    k = std::max<std::size_t>(k, 1);
    k = std::min(k, weights.size());

    std::vector<std::size_t> order(weights.size());
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return weights[a] > weights[b]; });
    order.resize(k);
    return order;
}

std::vector<std::size_t> allocate_quotas(const vec& weights,
                                         const std::vector<std::size_t>& available,
                                         std::size_t budget) {
    if (weights.size() != available.size())
        throw error(errc::dimension_mismatch, "weights vs availability size");
    std::size_t n = weights.size();
    std::vector<std::size_t> quotas(n, 0);
    if (budget == 0)
        return quotas;

    double mass = 0.0;
    std::size_t total_available = 0;
    for (std::size_t i = 0; i < n; ++i) {
        if (weights[i] < 0.0)
            throw error(errc::invalid_argument, "negative weight");
        mass += weights[i] * double(available[i]);
        total_available += available[i];
    }
    if (mass <= 0.0)
        throw error(errc::allocation_empty, "no weighted availability for a positive budget");

    std::size_t target = std::min(budget, total_available);
    vec raw(n), frac(n);
    std::size_t assigned = 0;
    for (std::size_t i = 0; i < n; ++i) {
        raw[i] = weights[i] * double(available[i]) / mass * double(budget);
        double floor_i = std::floor(raw[i]);
        frac[i] = raw[i] - floor_i;
        quotas[i] = std::min(std::size_t(floor_i), available[i]);
        assigned += quotas[i];
    }

    // Remainder order: larger fraction, then larger weight, then lower index.
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        if (frac[a] != frac[b])
            return frac[a] > frac[b];
        if (weights[a] != weights[b])
            return weights[a] > weights[b];
        return a < b;
    });
    // Cycle passes over that fixed order until the target is met; capped posts
    // just stop absorbing units.
    while (assigned < target) {
        bool progressed = false;
        for (std::size_t i : order) {
            if (assigned == target)
                break;
            if (quotas[i] < available[i]) {
                ++quotas[i];
                ++assigned;
                progressed = true;
            }
        }
        if (!progressed)
            break;
    }
    return quotas;
}

std::vector<std::pair<std::string, double>>
rank_categories(const vec& query_elm, const std::vector<std::pair<std::string, vec>>& categories) {
    if (categories.empty())
        throw error(errc::invalid_argument, "no categories to rank");
    std::vector<std::pair<std::string, double>> scored;
    scored.reserve(categories.size());
    for (const auto& [name, u] : categories)
        scored.emplace_back(name, cosine(u, query_elm));
    std::stable_sort(scored.begin(), scored.end(),
                     [](const auto& a, const auto& b) { return a.second > b.second; });
    return scored;
}

std::vector<std::size_t> rank_elements(const vec& query_elm,
                                       const std::vector<std::string>& elements,
                                       const embed::embedder& element_embedder) {
    std::vector<vec> embs = element_embedder.embed(elements);
    std::vector<std::size_t> order(elements.size());
    std::iota(order.begin(), order.end(), 0);
    vec scores(elements.size());
    for (std::size_t i = 0; i < elements.size(); ++i)
        scores[i] = cosine(embs[i], query_elm);
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return scores[a] > scores[b]; });
    return order;
}

composed_prompt compose_prompt(const std::string& query, const std::string& summary,
                               const std::vector<std::string>& elements,
                               std::size_t word_budget, bool include_summary) {
    std::size_t used = count_words(query);
    if (used > word_budget)
        throw error(errc::budget_too_small,
                    "query alone is " + std::to_string(used) + " words, budget " +
                        std::to_string(word_budget));
    composed_prompt out;
    out.text = query;
    if (include_summary && !summary.empty()) {
        std::size_t s_words = count_words(summary);
        if (used + s_words <= word_budget) {
            out.text += ". " + summary;
            out.summary_included = true;
            used += s_words;
        }
    }
    for (const std::string& e : elements) {
        std::size_t e_words = count_words(e);
        if (used + e_words > word_budget)
            break; // whole-element truncation from the low-priority end
        out.text += ", " + e;
        out.included_elements.push_back(e);
        used += e_words;
    }
    return out;
}

namespace {

const char* llm_composer_instruction =
    "Rewrite the user's image request into a single fluent generation prompt. "
    "Weave in the supplied persona summary and visual elements without inventing "
    "new ones, and keep every given element phrase recognizable.";

} // namespace

personalized_prompt personalize(const std::string& query, const persona& p,
                                const retrieval_config& cfg,
                                const embed::embedder& post_embedder,
                                const embed::embedder& element_embedder,
                                const remote::completion_client* llm) {
    validate_config(cfg);
    if (p.posts.empty())
        throw error(errc::invalid_argument, "persona '" + p.id + "' has no posts");
    if (cfg.composer == composer_kind::external_llm && llm == nullptr)
        throw error(errc::missing_client, "external-llm composer needs a completion client");

    personalized_prompt out;
    out.source_query = query;
    out.persona_id = p.id;
    retrieval_trace& trace = out.trace;

    std::vector<vec> caption_embs;
    caption_embs.reserve(p.posts.size());
    {
        std::vector<std::string> missing;
        for (const post& q : p.posts)
            if (q.embedding.empty())
                missing.push_back(q.caption);
        std::vector<vec> computed =
            missing.empty() ? std::vector<vec>{} : post_embedder.embed(missing);
        std::size_t next = 0;
        for (const post& q : p.posts)
            caption_embs.push_back(q.embedding.empty() ? std::move(computed[next++])
                                                       : q.embedding);
    }

    vec query_emb = post_embedder.embed_one(query);
    trace.similarities = post_similarities(query_emb, caption_embs);
    trace.weights = attention_weights(trace.similarities, cfg.tau);
    trace.entropy = retrieval_entropy(trace.weights);
    trace.n_eff = std::exp(trace.entropy);

    std::size_t total_budget = 0;
    for (const auto& [name, q] : cfg.budgets)
        total_budget += q;
    trace.selected_posts = select_posts(trace.weights, trace.n_eff, total_budget);

    // Re-normalized weights over the selected posts drive the apportionment.
    vec w_sel;
    w_sel.reserve(trace.selected_posts.size());
    double w_mass = 0.0;
    for (std::size_t i : trace.selected_posts)
        w_mass += trace.weights[i];
    for (std::size_t i : trace.selected_posts)
        w_sel.push_back(trace.weights[i] / w_mass);

    vec query_elm = element_embedder.embed_one(query);
    std::vector<std::pair<std::string, vec>> category_embs;
    {
        std::vector<std::string> names;
        for (const auto& [name, q] : cfg.budgets)
            names.push_back(name);
        std::vector<vec> embs = element_embedder.embed(names);
        for (std::size_t i = 0; i < names.size(); ++i)
            category_embs.emplace_back(names[i], std::move(embs[i]));
    }
    auto ranked = rank_categories(query_elm, category_embs);

    auto budget_of = [&](const std::string& name) {
        for (const auto& [n, q] : cfg.budgets)
            if (n == name)
                return q;
        return std::size_t(0);
    };
    auto refs_of = [&](std::size_t post_index, const std::string& category)
        -> const std::vector<std::string>* {
        auto it = p.posts[post_index].element_refs.find(category);
        return it == p.posts[post_index].element_refs.end() ? nullptr : &it->second;
    };

    std::vector<std::string> element_texts;
    for (const auto& [category, priority] : ranked) {
        category_allocation alloc;
        alloc.category = category;
        alloc.priority = priority;
        alloc.post_quotas.assign(trace.selected_posts.size(), 0);

        std::size_t budget = budget_of(category);
        std::vector<std::size_t> available(trace.selected_posts.size(), 0);
        std::size_t total_available = 0;
        for (std::size_t j = 0; j < trace.selected_posts.size(); ++j) {
            if (const auto* refs = refs_of(trace.selected_posts[j], category))
                available[j] = refs->size();
            total_available += available[j];
        }
        if (budget > 0 && total_available > 0)
            alloc.post_quotas = allocate_quotas(w_sel, available, budget);

        for (std::size_t j = 0; j < trace.selected_posts.size(); ++j) {
            std::size_t quota = alloc.post_quotas[j];
            if (quota == 0)
                continue;
            const auto* refs = refs_of(trace.selected_posts[j], category);
            std::vector<vec> embs = element_embedder.embed(*refs);
            vec scores(refs->size());
            for (std::size_t e = 0; e < refs->size(); ++e)
                scores[e] = cosine(embs[e], query_elm);
            std::vector<std::size_t> order(refs->size());
            std::iota(order.begin(), order.end(), 0);
            std::stable_sort(order.begin(), order.end(),
                             [&](std::size_t a, std::size_t b) { return scores[a] > scores[b]; });
            for (std::size_t r = 0; r < quota && r < order.size(); ++r) {
                selected_element chosen;
                chosen.category = category;
                chosen.post_index = trace.selected_posts[j];
                chosen.text = (*refs)[order[r]];
                chosen.score = scores[order[r]];
                element_texts.push_back(chosen.text);
                trace.elements.push_back(std::move(chosen));
            }
        }
        trace.allocations.push_back(std::move(alloc));
    }

    std::string summary = persona_summary(p);
    if (cfg.composer == composer_kind::concatenate) {
        composed_prompt composed = compose_prompt(query, summary, element_texts,
                                                  cfg.word_budget, cfg.include_summary);
        out.text = std::move(composed.text);
        out.elements = std::move(composed.included_elements);
        out.summary_included = composed.summary_included;
    } else {
        std::string user = "Request: " + query + "\n";
        if (cfg.include_summary && !summary.empty()) {
            user += "Persona: " + summary + "\n";
            out.summary_included = true;
        }
        user += "Visual elements:";
        for (const std::string& e : element_texts)
            user += "\n- " + e;
        out.text = truncate_words(llm->complete(llm_composer_instruction, user), cfg.word_budget);
        out.elements = element_texts;
    }
    return out;
}

composed_prompt brag_prompt(const std::string& query, const std::vector<std::string>& captions,
                            std::size_t word_budget) {
    std::size_t used = count_words(query);
    if (used > word_budget)
        throw error(errc::budget_too_small, "query alone exceeds the word budget");
    composed_prompt out;
    out.text = query;
    for (const std::string& c : captions) {
        std::size_t c_words = count_words(c);
        if (used + c_words > word_budget)
            break;
        out.text += ". " + c;
        out.included_elements.push_back(c);
        used += c_words;
    }
    return out;
}

composed_prompt persona_only_prompt(const std::string& query, const std::string& summary,
                                    std::size_t word_budget) {
    std::size_t used = count_words(query);
    if (used > word_budget)
        throw error(errc::budget_too_small, "query alone exceeds the word budget");
    composed_prompt out;
    out.text = query;
    if (!summary.empty() && used + count_words(summary) <= word_budget) {
        out.text += ". " + summary;
        out.summary_included = true;
    }
    return out;
}

} // namespace vptt::vprag
