#pragma once

#include <memory>
#include <mutex>
#include <string>
#include <unordered_map>
#include <vector>

#include "vptt/vec.hpp"

namespace vptt::embed {

// Text -> unit vector. Implementations are immutable and safe to share across
// threads. Two roles exist by convention: a post-level embedder for captions,
// prompts and summaries, and an element-level embedder for short phrases
// (elements, category names, trigrams). Roles differ only in configuration
// (dimension, seed or remote model), not in interface.
class embedder {
  public:
    virtual ~embedder() = default;

    virtual std::size_t dim() const = 0;

    // One unit vector per text, same order. Throws empty_text on "".
    virtual std::vector<vec> embed(const std::vector<std::string>& texts) const = 0;

    vec embed_one(const std::string& text) const { return embed({text})[0]; }
};

// Deterministic feature-hashing embedder: lowercase, strip punctuation, word
// unigrams + bigrams, each feature hashed with a seeded 64-bit hash into one of
// dim buckets with a +/-1 sign, then L2-normalized. Identical output on every
// platform. Texts with no word tokens fall back to hashing the raw bytes as a
// single feature so any non-empty input embeds.
class local_embedder : public embedder {
  public:
    explicit local_embedder(std::size_t dim = 256, std::uint64_t seed = 0);

    std::size_t dim() const override { return dim_; }
    std::uint64_t seed() const { return seed_; }
    std::vector<vec> embed(const std::vector<std::string>& texts) const override;

  private:
    std::size_t dim_;
    std::uint64_t seed_;
};

// Optional in-memory memo keyed by text (the wrapped embedder fixes the role).
class memo_embedder : public embedder {
  public:
    explicit memo_embedder(std::shared_ptr<const embedder> inner) : inner_(std::move(inner)) {}

    std::size_t dim() const override { return inner_->dim(); }
    std::vector<vec> embed(const std::vector<std::string>& texts) const override;

  private:
    std::shared_ptr<const embedder> inner_;
    mutable std::mutex mu_;
    mutable std::unordered_map<std::string, vec> cache_;
};

// Lowercased alphanumeric word tokens, punctuation stripped.
std::vector<std::string> tokenize_words(const std::string& text);

} // namespace vptt::embed
