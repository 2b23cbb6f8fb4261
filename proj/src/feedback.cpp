#include "vptt/feedback.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <map>
#include <numeric>
#include <sstream>

#include "vptt/common.hpp"

namespace vptt::feedback {

namespace {

constexpr double ln_eps = 1e-5;

struct offsets {
    std::size_t in_q_w, in_q_b, in_kv_w, in_kv_b;
    std::size_t attn_q_w, attn_q_b, attn_k_w, attn_k_b;
    std::size_t attn_v_w, attn_v_b, attn_o_w, attn_o_b;
    std::size_t ln_g, ln_b;
    std::size_t ffn_w1, ffn_b1, ffn_w2, ffn_b2;
    std::size_t head_w1, head_b1, head_w2, head_b2, head_w3, head_b3;
};

offsets resolve(const std::vector<tensor_info>& layout) {
    std::map<std::string, std::size_t> by_name;
    for (const auto& t : layout) by_name[t.name] = t.offset;
    auto at = [&by_name](const char* name) {
        auto it = by_name.find(name);
        if (it == by_name.end()) throw error(errc::data, std::string("missing tensor ") + name);
        return it->second;
    };
    offsets o{};
    o.in_q_w = at("in_q_w");
    o.in_q_b = at("in_q_b");
    o.in_kv_w = at("in_kv_w");
    o.in_kv_b = at("in_kv_b");
    o.attn_q_w = at("attn_q_w");
    o.attn_q_b = at("attn_q_b");
    o.attn_k_w = at("attn_k_w");
    o.attn_k_b = at("attn_k_b");
    o.attn_v_w = at("attn_v_w");
    o.attn_v_b = at("attn_v_b");
    o.attn_o_w = at("attn_o_w");
    o.attn_o_b = at("attn_o_b");
    o.ln_g = at("ln_g");
    o.ln_b = at("ln_b");
    o.ffn_w1 = at("ffn_w1");
    o.ffn_b1 = at("ffn_b1");
    o.ffn_w2 = at("ffn_w2");
    o.ffn_b2 = at("ffn_b2");
    o.head_w1 = at("head_w1");
    o.head_b1 = at("head_b1");
    o.head_w2 = at("head_w2");
    o.head_b2 = at("head_b2");
    o.head_w3 = at("head_w3");
    o.head_b3 = at("head_b3");
    return o;
}

// y = W x + b, row-major W
void affine(const double* W, const double* b, const double* x, double* y, std::size_t rows,
            std::size_t cols) {
    for (std::size_t i = 0; i < rows; ++i) {
        double acc = b[i];
        const double* row = W + i * cols;
        for (std::size_t j = 0; j < cols; ++j) acc += row[j] * x[j];
        y[i] = acc;
    }
}

// dW += dy x^T, db += dy, dx += W^T dy (dx nullable)
void affine_back(const double* W, const double* x, const double* dy, double* dW, double* db,
                 double* dx, std::size_t rows, std::size_t cols) {
    for (std::size_t i = 0; i < rows; ++i) {
        double c = dy[i];
        db[i] += c;
        const double* row = W + i * cols;
        double* drow = dW + i * cols;
        if (dx != nullptr) {
            for (std::size_t j = 0; j < cols; ++j) {
                drow[j] += c * x[j];
                dx[j] += row[j] * c;
            }
        } else {
            for (std::size_t j = 0; j < cols; ++j) drow[j] += c * x[j];
        }
    }
}

double sigmoid(double z) { return 1.0 / (1.0 + std::exp(-z)); }

// per-example intermediates kept for the backward pass
struct cache {
    vec zq, zkv, V, attn, m1, x1;
    vec xhat, ln_out;
    double ln_inv = 0.0;
    vec f1, f2, m2, x2;
    vec hcat, h1, h2;
    double logit = 0.0, y = 0.0;
};

} // namespace

feedback_model::feedback_model(model_config cfg, std::uint64_t seed) : cfg_(cfg) {
    if (cfg_.input_dim == 0) throw error(errc::invalid_argument, "input_dim must be positive");
    if (cfg_.d_model == 0 || cfg_.ffn_dim == 0 || cfg_.head_hidden1 == 0 ||
        cfg_.head_hidden2 == 0)
        throw error(errc::invalid_argument, "model dimensions must be positive");
    if (cfg_.heads == 0 || cfg_.d_model % cfg_.heads != 0)
        throw error(errc::invalid_argument, "heads must divide d_model");

    const std::size_t D = cfg_.input_dim, d = cfg_.d_model, f = cfg_.ffn_dim;
    const std::size_t h1 = cfg_.head_hidden1, h2 = cfg_.head_hidden2;
    std::size_t off = 0;
    auto add = [this, &off](const char* name, std::size_t rows, std::size_t cols) {
        layout_.push_back({name, off, rows, cols});
        off += layout_.back().size();
    };
    add("in_q_w", d, D);
    add("in_q_b", d, 0);
    add("in_kv_w", d, D);
    add("in_kv_b", d, 0);
    add("attn_q_w", d, d);
    add("attn_q_b", d, 0);
    add("attn_k_w", d, d);
    add("attn_k_b", d, 0);
    add("attn_v_w", d, d);
    add("attn_v_b", d, 0);
    add("attn_o_w", d, d);
    add("attn_o_b", d, 0);
    add("ln_g", d, 0);
    add("ln_b", d, 0);
    add("ffn_w1", f, d);
    add("ffn_b1", f, 0);
    add("ffn_w2", d, f);
    add("ffn_b2", d, 0);
    add("head_w1", h1, 2 * d);
    add("head_b1", h1, 0);
    add("head_w2", h2, h1);
    add("head_b2", h2, 0);
    add("head_w3", 1, h2);
    add("head_b3", 1, 0);
    params_.assign(off, 0.0);

    rng r(mix64(seed ^ fnv1a64("feedback-init")));
    for (const auto& t : layout_) {
        double* w = params_.data() + t.offset;
        if (t.cols == 0) {
            double fill = t.name == "ln_g" ? 1.0 : 0.0;
            std::fill(w, w + t.size(), fill);
        } else {
            double limit = std::sqrt(6.0 / static_cast<double>(t.rows + t.cols));
            for (std::size_t k = 0; k < t.size(); ++k)
                w[k] = (2.0 * r.next_double() - 1.0) * limit;
        }
    }
}

namespace {

// Full forward pass. The attention block has one query token (persona) and
// one key/value token (prompt): softmax over a single key is identically 1,
// so the context is exactly the value vector and attn_q_w / attn_k_w carry no
// gradient. They stay in the parameterization; the strength of the network is
// in the residual sum of the two streams, not the collapsed attention scores.
void forward_one(const model_config& cfg, const std::vector<double>& params, const offsets& o,
                 const vec& persona, const vec& prompt, cache& c, rng* drop, double rate) {
    const std::size_t D = cfg.input_dim, d = cfg.d_model, f = cfg.ffn_dim;
    const std::size_t h1 = cfg.head_hidden1, h2 = cfg.head_hidden2;
    if (persona.size() != D || prompt.size() != D)
        throw error(errc::dimension_mismatch, "feedback input dimension mismatch");
    const double* P = params.data();

    c.zq.assign(d, 0.0);
    c.zkv.assign(d, 0.0);
    affine(P + o.in_q_w, P + o.in_q_b, persona.data(), c.zq.data(), d, D);
    affine(P + o.in_kv_w, P + o.in_kv_b, prompt.data(), c.zkv.data(), d, D);

    c.V.assign(d, 0.0);
    affine(P + o.attn_v_w, P + o.attn_v_b, c.zkv.data(), c.V.data(), d, d);

    c.attn.assign(d, 0.0);
    affine(P + o.attn_o_w, P + o.attn_o_b, c.V.data(), c.attn.data(), d, d);

    c.m1.assign(d, 1.0);
    if (drop != nullptr && rate > 0.0) {
        double keep = 1.0 - rate;
        for (std::size_t i = 0; i < d; ++i)
            c.m1[i] = drop->next_double() < rate ? 0.0 : 1.0 / keep;
    }
    c.x1.resize(d);
    for (std::size_t i = 0; i < d; ++i) c.x1[i] = c.zq[i] + c.attn[i] * c.m1[i];

    double mean = 0.0;
    for (double x : c.x1) mean += x;
    mean /= static_cast<double>(d);
    double var = 0.0;
    for (double x : c.x1) var += (x - mean) * (x - mean);
    var /= static_cast<double>(d);
    c.ln_inv = 1.0 / std::sqrt(var + ln_eps);
    c.xhat.resize(d);
    c.ln_out.resize(d);
    for (std::size_t i = 0; i < d; ++i) {
        c.xhat[i] = (c.x1[i] - mean) * c.ln_inv;
        c.ln_out[i] = P[o.ln_g + i] * c.xhat[i] + P[o.ln_b + i];
    }

    c.f1.assign(f, 0.0);
    affine(P + o.ffn_w1, P + o.ffn_b1, c.ln_out.data(), c.f1.data(), f, d);
    for (auto& x : c.f1) x = std::max(0.0, x);
    c.f2.assign(d, 0.0);
    affine(P + o.ffn_w2, P + o.ffn_b2, c.f1.data(), c.f2.data(), d, f);

    c.m2.assign(d, 1.0);
    if (drop != nullptr && rate > 0.0) {
        double keep = 1.0 - rate;
        for (std::size_t i = 0; i < d; ++i)
            c.m2[i] = drop->next_double() < rate ? 0.0 : 1.0 / keep;
    }
    c.x2.resize(d);
    for (std::size_t i = 0; i < d; ++i) c.x2[i] = c.x1[i] + c.f2[i] * c.m2[i];

    c.hcat.resize(2 * d);
    std::copy(c.x2.begin(), c.x2.end(), c.hcat.begin());
    std::copy(c.V.begin(), c.V.end(), c.hcat.begin() + static_cast<std::ptrdiff_t>(d));

    c.h1.assign(h1, 0.0);
    affine(P + o.head_w1, P + o.head_b1, c.hcat.data(), c.h1.data(), h1, 2 * d);
    for (auto& x : c.h1) x = std::max(0.0, x);
    c.h2.assign(h2, 0.0);
    affine(P + o.head_w2, P + o.head_b2, c.h1.data(), c.h2.data(), h2, h1);
    for (auto& x : c.h2) x = std::max(0.0, x);

    double logit = params[o.head_b3];
    for (std::size_t j = 0; j < h2; ++j) logit += params[o.head_w3 + j] * c.h2[j];
    c.logit = logit;
    c.y = sigmoid(logit);
}

void backward_one(const model_config& cfg, const std::vector<double>& params, const offsets& o,
                  const vec& persona, const vec& prompt, const cache& c, double dy,
                  std::vector<double>& grad) {
    const std::size_t D = cfg.input_dim, d = cfg.d_model, f = cfg.ffn_dim;
    const std::size_t h1 = cfg.head_hidden1, h2 = cfg.head_hidden2;
    const double* P = params.data();
    double* G = grad.data();

    double dlogit = dy * c.y * (1.0 - c.y);

    vec dh2(h2, 0.0);
    G[o.head_b3] += dlogit;
    for (std::size_t j = 0; j < h2; ++j) {
        G[o.head_w3 + j] += dlogit * c.h2[j];
        dh2[j] = P[o.head_w3 + j] * dlogit;
    }
    for (std::size_t j = 0; j < h2; ++j)
        if (c.h2[j] <= 0.0) dh2[j] = 0.0;

    vec dh1(h1, 0.0);
    affine_back(P + o.head_w2, c.h1.data(), dh2.data(), G + o.head_w2, G + o.head_b2, dh1.data(),
                h2, h1);
    for (std::size_t j = 0; j < h1; ++j)
        if (c.h1[j] <= 0.0) dh1[j] = 0.0;

    vec dhcat(2 * d, 0.0);
    affine_back(P + o.head_w1, c.hcat.data(), dh1.data(), G + o.head_w1, G + o.head_b1,
                dhcat.data(), h1, 2 * d);

    vec dx2(dhcat.begin(), dhcat.begin() + static_cast<std::ptrdiff_t>(d));
    vec dV(dhcat.begin() + static_cast<std::ptrdiff_t>(d), dhcat.end());

    // x2 = x1 + m2 .* f2
    vec df2(d);
    for (std::size_t i = 0; i < d; ++i) df2[i] = dx2[i] * c.m2[i];
    vec dx1 = dx2;

    vec df1(f, 0.0);
    affine_back(P + o.ffn_w2, c.f1.data(), df2.data(), G + o.ffn_w2, G + o.ffn_b2, df1.data(), d,
                f);
    for (std::size_t j = 0; j < f; ++j)
        if (c.f1[j] <= 0.0) df1[j] = 0.0;
    vec dln_out(d, 0.0);
    affine_back(P + o.ffn_w1, c.ln_out.data(), df1.data(), G + o.ffn_w1, G + o.ffn_b1,
                dln_out.data(), f, d);

    // layer norm backward
    vec dxhat(d);
    double mean_dxhat = 0.0, mean_dxhat_xhat = 0.0;
    for (std::size_t i = 0; i < d; ++i) {
        G[o.ln_g + i] += dln_out[i] * c.xhat[i];
        G[o.ln_b + i] += dln_out[i];
        dxhat[i] = dln_out[i] * P[o.ln_g + i];
        mean_dxhat += dxhat[i];
        mean_dxhat_xhat += dxhat[i] * c.xhat[i];
    }
    mean_dxhat /= static_cast<double>(d);
    mean_dxhat_xhat /= static_cast<double>(d);
    for (std::size_t i = 0; i < d; ++i)
        dx1[i] += c.ln_inv * (dxhat[i] - mean_dxhat - c.xhat[i] * mean_dxhat_xhat);

    // x1 = zq + m1 .* attn
    vec dattn(d);
    for (std::size_t i = 0; i < d; ++i) dattn[i] = dx1[i] * c.m1[i];
    vec dzq = dx1;

    vec dV_from_o(d, 0.0);
    affine_back(P + o.attn_o_w, c.V.data(), dattn.data(), G + o.attn_o_w, G + o.attn_o_b,
                dV_from_o.data(), d, d);
    for (std::size_t i = 0; i < d; ++i) dV[i] += dV_from_o[i];

    vec dzkv(d, 0.0);
    affine_back(P + o.attn_v_w, c.zkv.data(), dV.data(), G + o.attn_v_w, G + o.attn_v_b,
                dzkv.data(), d, d);

    affine_back(P + o.in_q_w, persona.data(), dzq.data(), G + o.in_q_w, G + o.in_q_b, nullptr, d,
                D);
    affine_back(P + o.in_kv_w, prompt.data(), dzkv.data(), G + o.in_kv_w, G + o.in_kv_b, nullptr,
                d, D);
}

} // namespace

double feedback_model::predict(const vec& persona, const vec& prompt) const {
    offsets o = resolve(layout_);
    cache c;
    forward_one(cfg_, params_, o, persona, prompt, c, nullptr, 0.0);
    return c.y;
}

double feedback_model::batch_loss(const std::vector<const preference_example*>& batch,
                                  std::vector<double>* grad, rng* dropout_stream,
                                  double dropout) const {
    if (batch.empty()) throw error(errc::invalid_argument, "empty batch");
    if (grad != nullptr && grad->size() != params_.size())
        throw error(errc::invalid_argument, "gradient buffer size mismatch");
    offsets o = resolve(layout_);
    cache c;
    double loss = 0.0;
    double inv_n = 1.0 / static_cast<double>(batch.size());
    for (const auto* ex : batch) {
        forward_one(cfg_, params_, o, ex->persona, ex->prompt, c, dropout_stream, dropout);
        double diff = c.y - ex->label;
        loss += diff * diff * inv_n;
        if (grad != nullptr)
            backward_one(cfg_, params_, o, ex->persona, ex->prompt, c, 2.0 * diff * inv_n, *grad);
    }
    return loss;
}

split_metrics evaluate(const feedback_model& model,
                       const std::vector<preference_example>& examples, double neutral_band) {
    split_metrics m;
    std::size_t correct = 0;
    for (const auto& ex : examples) {
        double y = model.predict(ex.persona, ex.prompt);
        double diff = y - ex.label;
        m.mse += diff * diff;
        m.mae += std::abs(diff);
        ++m.count;
        if (std::abs(ex.label - 0.5) > neutral_band) {
            ++m.scored;
            if ((y >= 0.5) == (ex.label > 0.5)) ++correct;
        }
    }
    if (m.count > 0) {
        m.mse /= static_cast<double>(m.count);
        m.mae /= static_cast<double>(m.count);
    }
    m.accuracy = m.scored > 0 ? static_cast<double>(correct) / static_cast<double>(m.scored) : 0.0;
    return m;
}

train_result train(feedback_model& model, const std::vector<preference_example>& examples,
                   const train_config& cfg) {
    if (examples.empty()) throw error(errc::invalid_argument, "no training examples");
    if (cfg.batch_size == 0 || cfg.max_epochs == 0 || cfg.patience == 0)
        throw error(errc::invalid_argument, "batch size, epochs and patience must be positive");
    if (!(cfg.train_ratio > 0.0) || !(cfg.val_ratio > 0.0) ||
        !(cfg.train_ratio + cfg.val_ratio < 1.0))
        throw error(errc::invalid_argument, "split ratios must be positive and leave a test share");

    // profile-level split: a profile's examples never straddle splits
    std::vector<std::string> profiles;
    std::map<std::string, std::vector<std::size_t>> by_profile;
    for (std::size_t i = 0; i < examples.size(); ++i) {
        auto [it, inserted] = by_profile.try_emplace(examples[i].profile_id);
        if (inserted) profiles.push_back(examples[i].profile_id);
        it->second.push_back(i);
    }
    if (profiles.size() < 3)
        throw error(errc::invalid_argument, "need at least 3 profiles to split");

    rng split_rng(mix64(cfg.seed ^ fnv1a64("profile-split")));
    for (std::size_t i = profiles.size(); i > 1; --i)
        std::swap(profiles[i - 1], profiles[split_rng.next_below(i)]);

    auto n = profiles.size();
    std::size_t n_val = std::max<std::size_t>(
        1, static_cast<std::size_t>(std::llround(cfg.val_ratio * static_cast<double>(n))));
    std::size_t n_test = std::max<std::size_t>(
        1, static_cast<std::size_t>(std::llround(
               (1.0 - cfg.train_ratio - cfg.val_ratio) * static_cast<double>(n))));
    if (n_val + n_test >= n)
        throw error(errc::invalid_argument, "not enough profiles for the requested split");
    std::size_t n_train = n - n_val - n_test;

    std::vector<preference_example> train_set, val_set, test_set;
    for (std::size_t p = 0; p < n; ++p) {
        auto& dst = p < n_train ? train_set : p < n_train + n_val ? val_set : test_set;
        for (auto idx : by_profile[profiles[p]]) dst.push_back(examples[idx]);
    }

    train_result result;
    std::vector<double> grad(model.params().size(), 0.0);
    std::vector<double> m_state(model.params().size(), 0.0);
    std::vector<double> v_state(model.params().size(), 0.0);
    std::vector<double> best_params = model.params();
    double best_val = std::numeric_limits<double>::infinity();
    std::size_t since_best = 0, adam_t = 0;

    rng order_rng(mix64(cfg.seed ^ fnv1a64("batch-order")));
    rng dropout_rng(mix64(cfg.seed ^ fnv1a64("dropout")));

    std::vector<std::size_t> order(train_set.size());
    std::iota(order.begin(), order.end(), std::size_t{0});

    for (std::size_t epoch = 1; epoch <= cfg.max_epochs; ++epoch) {
        for (std::size_t i = order.size(); i > 1; --i)
            std::swap(order[i - 1], order[order_rng.next_below(i)]);

        double epoch_loss = 0.0;
        std::size_t seen = 0;
        for (std::size_t start = 0; start < order.size(); start += cfg.batch_size) {
            std::size_t end = std::min(order.size(), start + cfg.batch_size);
            std::vector<const preference_example*> batch;
            batch.reserve(end - start);
            for (std::size_t k = start; k < end; ++k) batch.push_back(&train_set[order[k]]);

            std::fill(grad.begin(), grad.end(), 0.0);
            double loss = model.batch_loss(batch, &grad, &dropout_rng, cfg.dropout);
            epoch_loss += loss * static_cast<double>(batch.size());
            seen += batch.size();

            ++adam_t;
            double bc1 = 1.0 - std::pow(cfg.beta1, static_cast<double>(adam_t));
            double bc2 = 1.0 - std::pow(cfg.beta2, static_cast<double>(adam_t));
            auto& params = model.params();
            for (std::size_t k = 0; k < params.size(); ++k) {
                m_state[k] = cfg.beta1 * m_state[k] + (1.0 - cfg.beta1) * grad[k];
                v_state[k] = cfg.beta2 * v_state[k] + (1.0 - cfg.beta2) * grad[k] * grad[k];
                double mhat = m_state[k] / bc1;
                double vhat = v_state[k] / bc2;
                params[k] -= cfg.lr * (mhat / (std::sqrt(vhat) + cfg.eps) +
                                       cfg.weight_decay * params[k]);
            }
        }

        double val_mse = evaluate(model, val_set, cfg.neutral_band).mse;
        result.history.push_back(
            {epoch, seen > 0 ? epoch_loss / static_cast<double>(seen) : 0.0, val_mse});

        if (val_mse < best_val - 1e-12) {
            best_val = val_mse;
            best_params = model.params();
            result.best_epoch = epoch;
            since_best = 0;
        } else if (++since_best >= cfg.patience) {
            break;
        }
    }

    model.params() = best_params;
    result.train = evaluate(model, train_set, cfg.neutral_band);
    result.val = evaluate(model, val_set, cfg.neutral_band);
    result.test = evaluate(model, test_set, cfg.neutral_band);
    return result;
}

gradient_check_result gradient_check(const feedback_model& model,
                                     const std::vector<preference_example>& examples,
                                     const gradient_check_config& cfg) {
    if (examples.empty()) throw error(errc::invalid_argument, "no examples for gradient check");
    std::vector<const preference_example*> batch;
    for (std::size_t i = 0; i < std::min(cfg.batch_limit, examples.size()); ++i)
        batch.push_back(&examples[i]);

    std::vector<double> grad(model.params().size(), 0.0);
    model.batch_loss(batch, &grad);

    // finite differences on a mutable copy
    feedback_model probe = model;
    auto& params = probe.params();
    rng r(mix64(cfg.seed ^ fnv1a64("grad-check")));
    gradient_check_result out;
    for (std::size_t s = 0; s < cfg.samples; ++s) {
        std::size_t k = static_cast<std::size_t>(r.next_below(params.size()));
        double save = params[k];
        params[k] = save + cfg.fd_step;
        double up = probe.batch_loss(batch);
        params[k] = save - cfg.fd_step;
        double down = probe.batch_loss(batch);
        params[k] = save;
        double fd = (up - down) / (2.0 * cfg.fd_step);
        double ga = grad[k];
        if (std::abs(fd) < 1e-12 && std::abs(ga) < 1e-12) {
            ++out.skipped; // dead attention score paths land here
            continue;
        }
        double rel = std::abs(ga - fd) / std::max(std::abs(ga), std::abs(fd));
        out.max_rel_err = std::max(out.max_rel_err, rel);
        ++out.checked;
    }
    return out;
}

rerank_result rerank(const feedback_model& model, const vec& persona,
                     const std::vector<vec>& prompts) {
    if (prompts.empty()) throw error(errc::invalid_argument, "no candidates to rerank");
    rerank_result out;
    out.scores.reserve(prompts.size());
    for (const auto& p : prompts) out.scores.push_back(model.predict(persona, p));
    for (std::size_t i = 1; i < out.scores.size(); ++i)
        if (out.scores[i] > out.scores[out.selected]) out.selected = i;
    return out;
}

std::vector<preference_example> build_synthetic_set(std::size_t profiles, std::size_t dim,
                                                    std::uint64_t seed) {
    if (profiles == 0 || dim == 0)
        throw error(errc::invalid_argument, "profiles and dim must be positive");
    std::vector<preference_example> out;
    out.reserve(profiles * 50);
    for (std::size_t p = 0; p < profiles; ++p) {
        char idbuf[32];
        std::snprintf(idbuf, sizeof(idbuf), "profile_%04zu", p);
        std::string pid = idbuf;
        rng r(mix64(stable_hash(pid, seed) ^ fnv1a64("synthetic-profile")));

        auto random_unit = [&r, dim]() {
            vec v(dim);
            for (auto& x : v) x = r.next_normal();
            return normalize(v);
        };
        vec u = random_unit();

        auto blend = [&u, dim](const vec& g, double spread) {
            vec v(dim);
            for (std::size_t i = 0; i < dim; ++i) v[i] = u[i] + spread * g[i];
            return normalize(v);
        };

        for (int k = 0; k < 20; ++k)
            out.push_back({pid, u, blend(random_unit(), 0.3), 0.9});
        for (int k = 0; k < 20; ++k)
            out.push_back({pid, u, random_unit(), 0.1});
        for (int k = 0; k < 10; ++k)
            out.push_back({pid, u, blend(random_unit(), 1.2), 0.5});
    }
    return out;
}

void save_model(const feedback_model& model, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw error(errc::data, "cannot write model file: " + path);
    const auto& cfg = model.config();
    out << "vptt-feedback-model v1\n";
    out << "dims " << cfg.input_dim << ' ' << cfg.d_model << ' ' << cfg.ffn_dim << ' '
        << cfg.heads << ' ' << cfg.head_hidden1 << ' ' << cfg.head_hidden2 << '\n';
    char buf[64];
    for (const auto& t : model.layout()) {
        out << t.name << ' ' << t.rows << ' ' << t.cols;
        const double* w = model.params().data() + t.offset;
        for (std::size_t k = 0; k < t.size(); ++k) {
            std::snprintf(buf, sizeof(buf), "%.17g", w[k]);
            out << ' ' << buf;
        }
        out << '\n';
    }
    if (!out) throw error(errc::data, "failed writing model file: " + path);
}

feedback_model load_model(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw error(errc::data, "cannot read model file: " + path);
    std::string line;
    if (!std::getline(in, line) || line != "vptt-feedback-model v1")
        throw error(errc::data, "unrecognized model header");
    if (!std::getline(in, line)) throw error(errc::data, "truncated model file");
    std::istringstream dims(line);
    std::string tag;
    model_config cfg;
    if (!(dims >> tag >> cfg.input_dim >> cfg.d_model >> cfg.ffn_dim >> cfg.heads >>
          cfg.head_hidden1 >> cfg.head_hidden2) ||
        tag != "dims")
        throw error(errc::data, "malformed dims line");

    feedback_model model(cfg, 0);
    for (const auto& t : model.layout()) {
        if (!std::getline(in, line)) throw error(errc::data, "truncated model file");
        std::istringstream row(line);
        std::string name;
        std::size_t rows = 0, cols = 0;
        if (!(row >> name >> rows >> cols) || name != t.name || rows != t.rows || cols != t.cols)
            throw error(errc::data, "unexpected tensor record: " + line.substr(0, 40));
        double* w = model.params().data() + t.offset;
        for (std::size_t k = 0; k < t.size(); ++k)
            if (!(row >> w[k])) throw error(errc::data, "short tensor data for " + name);
    }
    return model;
}

} // namespace vptt::feedback
