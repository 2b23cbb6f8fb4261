#include "vptt/embedding.hpp"

#include <cctype>

#include "vptt/hash.hpp"

namespace vptt::embed {

std::vector<std::string> tokenize_words(const std::string& text) {
    std::vector<std::string> tokens;
    std::string cur;
    for (unsigned char c : text) {
        if (std::isalnum(c)) {
            cur.push_back(char(std::tolower(c)));
        } else if (!cur.empty()) {
            tokens.push_back(std::move(cur));
            cur.clear();
        }
    }
    if (!cur.empty())
        tokens.push_back(std::move(cur));
    return tokens;
}

local_embedder::local_embedder(std::size_t dim, std::uint64_t seed) : dim_(dim), seed_(seed) {
    if (dim_ == 0)
        throw error(errc::invalid_argument, "embedder dimension must be positive");
}

std::vector<vec> local_embedder::embed(const std::vector<std::string>& texts) const {
    std::vector<vec> out;
    out.reserve(texts.size());
    for (const std::string& text : texts) {
        if (text.empty())
            throw error(errc::empty_text, "cannot embed an empty string");
        vec v(dim_, 0.0);
        auto add_feature = [&](std::string_view f) {
            std::uint64_t h = stable_hash(f, seed_);
            std::size_t bucket = std::size_t((h >> 1) % dim_);
            v[bucket] += (h & 1) ? 1.0 : -1.0;
        };
        std::vector<std::string> tokens = tokenize_words(text);
        if (tokens.empty()) {
            add_feature(text);
        } else {
            for (const std::string& t : tokens)
                add_feature(t);
            for (std::size_t i = 0; i + 1 < tokens.size(); ++i)
                add_feature(tokens[i] + " " + tokens[i + 1]);
        }
        if (l2_norm(v) < 1e-12) {
            // All signs cancelled (vanishingly rare); pin one deterministic bucket.
            v[std::size_t(stable_hash(text, seed_ ^ 0x5a5a5a5a) % dim_)] = 1.0;
        }
        out.push_back(normalize(v));
    }
    return out;
}

std::vector<vec> memo_embedder::embed(const std::vector<std::string>& texts) const {
    std::vector<vec> out(texts.size());
    std::vector<std::size_t> misses;
    {
        std::lock_guard<std::mutex> lock(mu_);
        for (std::size_t i = 0; i < texts.size(); ++i) {
            auto it = cache_.find(texts[i]);
            if (it != cache_.end())
                out[i] = it->second;
            else
                misses.push_back(i);
        }
    }
    if (misses.empty())
        return out;
    std::vector<std::string> pending;
    pending.reserve(misses.size());
    for (std::size_t i : misses)
        pending.push_back(texts[i]);
    std::vector<vec> fresh = inner_->embed(pending);
    std::lock_guard<std::mutex> lock(mu_);
    for (std::size_t j = 0; j < misses.size(); ++j) {
        cache_[pending[j]] = fresh[j];
        out[misses[j]] = std::move(fresh[j]);
    }
    return out;
}

} // namespace vptt::embed
