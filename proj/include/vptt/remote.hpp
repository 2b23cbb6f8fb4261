#pragma once

#include <cstdint>
#include <memory>
#include <string>
#include <vector>

#include "vptt/embedding.hpp"

namespace vptt::remote {

struct retry_policy {
    int attempts = 3;             // total tries, not extra retries
    int backoff_initial_ms = 500; // doubles after each failed try
    int max_in_flight = 4;        // bounded concurrent requests per client
};

// POSTs a JSON body to a fixed endpoint URL with Bearer auth, retrying
// transport errors, 429 and 5xx with exponential backoff. Other statuses fail
// immediately. All failures surface as vptt::error{errc::remote}.
class json_http_client {
  public:
    json_http_client(std::string url, std::string api_key, retry_policy policy = {});
    ~json_http_client();

    // Returns the raw response body of a 2xx reply.
    std::string post(const std::string& json_body) const;

    const std::string& url() const { return url_; }

  private:
    struct impl;
    std::string url_;
    std::unique_ptr<impl> impl_;
};

// Embedding service client. Request {"model": ..., "input": [texts]}, response
// {"data": [{"index": i, "embedding": [...]}]}. Batches of at most
// max_batch texts per request; vectors are re-ordered by index and unit-scaled.
class remote_embedder : public embed::embedder {
  public:
    remote_embedder(std::string url, std::string api_key, std::string model, std::size_t dim,
                    retry_policy policy = {}, std::size_t max_batch = 64);

    std::size_t dim() const override { return dim_; }
    std::vector<vec> embed(const std::vector<std::string>& texts) const override;

  private:
    json_http_client client_;
    std::string model_;
    std::size_t dim_;
    std::size_t max_batch_;
};

// Text completion client used by the optional external-llm composer.
class completion_client {
  public:
    virtual ~completion_client() = default;
    virtual std::string complete(const std::string& system, const std::string& user) const = 0;
};

// Request {"system": ..., "user": ...}; the response body is the completion.
class http_completion_client : public completion_client {
  public:
    http_completion_client(std::string url, std::string api_key, retry_policy policy = {})
        : client_(std::move(url), std::move(api_key), policy) {}

    std::string complete(const std::string& system, const std::string& user) const override;

  private:
    json_http_client client_;
};

} // namespace vptt::remote
