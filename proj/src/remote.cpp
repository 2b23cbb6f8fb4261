#include "vptt/remote.hpp"

#include <chrono>
#include <semaphore>
#include <thread>

#include <httplib.h>
#include <json.hpp>

namespace vptt::remote {

using nlohmann::json;

namespace {

struct parsed_url {
    std::string base; // scheme://host[:port]
    std::string path; // leading slash, "/" when absent
};

parsed_url split_url(const std::string& url) {
    auto scheme_end = url.find("://");
    if (scheme_end == std::string::npos)
        throw error(errc::invalid_argument, "endpoint URL needs a scheme: " + url);
    auto path_start = url.find('/', scheme_end + 3);
    if (path_start == std::string::npos)
        return {url, "/"};
    return {url.substr(0, path_start), url.substr(path_start)};
}

bool retriable(int status) { return status == 429 || (status >= 500 && status < 600); }

} // namespace

struct json_http_client::impl {
    impl(const std::string& url, std::string key, retry_policy pol)
        : parsed(split_url(url)), api_key(std::move(key)), policy(pol),
          slots(std::max(1, pol.max_in_flight)) {}

    parsed_url parsed;
    std::string api_key;
    retry_policy policy;
    mutable std::counting_semaphore<> slots;
};

json_http_client::json_http_client(std::string url, std::string api_key, retry_policy policy)
    : url_(std::move(url)), impl_(std::make_unique<impl>(url_, std::move(api_key), policy)) {}

json_http_client::~json_http_client() = default;

std::string json_http_client::post(const std::string& json_body) const {
    impl_->slots.acquire();
    struct releaser {
        std::counting_semaphore<>& s;
        ~releaser() { s.release(); }
    } release_on_exit{impl_->slots};

    std::string last_failure;
    int backoff_ms = impl_->policy.backoff_initial_ms;
    for (int attempt = 0; attempt < impl_->policy.attempts; ++attempt) {
        if (attempt > 0) {
            std::this_thread::sleep_for(std::chrono::milliseconds(backoff_ms));
            backoff_ms *= 2;
        }
        httplib::Client cli(impl_->parsed.base);
        cli.set_connection_timeout(10);
        cli.set_read_timeout(60);
        httplib::Headers headers;
        if (!impl_->api_key.empty())
            headers.emplace("Authorization", "Bearer " + impl_->api_key);
        auto res = cli.Post(impl_->parsed.path, headers, json_body, "application/json");
        if (!res) {
            last_failure = "transport error (" + httplib::to_string(res.error()) + ")";
            continue;
        }
        if (res->status >= 200 && res->status < 300)
            return res->body;
        last_failure = "status " + std::to_string(res->status);
        if (!retriable(res->status))
            break;
    }
    throw error(errc::remote, "POST " + url_ + " failed: " + last_failure);
}

remote_embedder::remote_embedder(std::string url, std::string api_key, std::string model,
                                 std::size_t dim, retry_policy policy, std::size_t max_batch)
    : client_(std::move(url), std::move(api_key), policy), model_(std::move(model)), dim_(dim),
      max_batch_(max_batch) {
    if (dim_ == 0 || max_batch_ == 0)
        throw error(errc::invalid_argument, "remote embedder needs dim > 0 and batch > 0");
}

std::vector<vec> remote_embedder::embed(const std::vector<std::string>& texts) const {
    for (const std::string& t : texts)
        if (t.empty())
            throw error(errc::empty_text, "cannot embed an empty string");
    std::vector<vec> out(texts.size());
    for (std::size_t start = 0; start < texts.size(); start += max_batch_) {
        std::size_t count = std::min(max_batch_, texts.size() - start);
        json request = {{"model", model_},
                        {"input", std::vector<std::string>(texts.begin() + long(start),
                                                           texts.begin() + long(start + count))}};
        json response;
        try {
            response = json::parse(client_.post(request.dump()));
        } catch (const json::exception& e) {
            throw error(errc::remote, std::string("embedding response is not JSON: ") + e.what());
        }
        if (!response.contains("data") || !response["data"].is_array() ||
            response["data"].size() != count)
            throw error(errc::remote, "embedding response data size mismatch");
        for (const json& item : response["data"]) {
            std::size_t index = item.at("index").get<std::size_t>();
            if (index >= count)
                throw error(errc::remote, "embedding response index out of range");
            vec v = item.at("embedding").get<vec>();
            if (v.size() != dim_)
                throw error(errc::remote, "embedding dimension mismatch from service");
            out[start + index] = normalize(v);
        }
        for (std::size_t i = 0; i < count; ++i)
            if (out[start + i].empty())
                throw error(errc::remote, "embedding response missing an index");
    }
    return out;
}

std::string http_completion_client::complete(const std::string& system,
                                             const std::string& user) const {
    json request = {{"system", system}, {"user", user}};
    return client_.post(request.dump());
}

} // namespace vptt::remote
