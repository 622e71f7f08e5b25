#include "safedrive/wire.hpp"

#include <cstdlib>

#include <httplib.h>
#include <json.hpp>

#include "safedrive/errors.hpp"

namespace safedrive {

namespace {

struct Endpoint {
    std::string host;  // scheme://host[:port]
    std::string path_prefix;
};

Endpoint split_base_url(const std::string& base_url) {
    const std::size_t scheme = base_url.find("://");
    if (scheme == std::string::npos) throw ConfigError("base_url must include a scheme: " + base_url);
    const std::size_t path = base_url.find('/', scheme + 3);
    if (path == std::string::npos) return {base_url, ""};
    std::string prefix = base_url.substr(path);
    while (!prefix.empty() && prefix.back() == '/') prefix.pop_back();
    return {base_url.substr(0, path), prefix};
}

nlohmann::json post_json(const WireOptions& options, const std::string& endpoint,
                         const nlohmann::json& body) {
    if (options.base_url.empty()) throw ConfigError("wire backend requires base_url in the config");
    const Endpoint ep = split_base_url(options.base_url);

    httplib::Client client(ep.host);
    client.set_connection_timeout(static_cast<time_t>(options.timeout_s),
                                  static_cast<time_t>((options.timeout_s - static_cast<time_t>(options.timeout_s)) * 1e6));
    client.set_read_timeout(static_cast<time_t>(options.timeout_s), 0);

    httplib::Headers headers;
    if (!options.api_key_env.empty()) {
        if (const char* key = std::getenv(options.api_key_env.c_str())) {
            headers.emplace("Authorization", std::string("Bearer ") + key);
        }
    }

    std::string last_error;
    for (int attempt = 0; attempt <= options.max_retries; ++attempt) {
        auto res = client.Post(ep.path_prefix + endpoint, headers, body.dump(), "application/json");
        if (!res) {
            last_error = "transport error: " + httplib::to_string(res.error());
            continue;
        }
        if (res->status != 200) {
            last_error = "HTTP " + std::to_string(res->status) + ": " + res->body;
            continue;
        }
        try {
            return nlohmann::json::parse(res->body);
        } catch (const nlohmann::json::parse_error& e) {
            last_error = std::string("invalid JSON response: ") + e.what();
        }
    }
    throw BackendUnavailable(endpoint + " failed after " + std::to_string(options.max_retries + 1) +
                             " attempts; last error: " + last_error);
}

}  // namespace

WireClient::WireClient(WireOptions options) : options_(std::move(options)) {}

std::string WireClient::complete(const std::vector<ChatMessage>& messages, double temperature) {
    nlohmann::json body;
    body["model"] = options_.model;
    body["temperature"] = temperature;
    body["messages"] = nlohmann::json::array();
    for (const ChatMessage& m : messages) {
        body["messages"].push_back({{"role", to_string(m.role)}, {"content", m.content}});
    }
    const nlohmann::json response = post_json(options_, "/chat/completions", body);
    try {
        return response.at("choices").at(0).at("message").at("content").get<std::string>();
    } catch (const nlohmann::json::exception& e) {
        throw BackendUnavailable(std::string("malformed chat completion response: ") + e.what());
    }
}

WireEmbedder::WireEmbedder(WireOptions options, std::size_t dimension)
    : options_(std::move(options)), dimension_(dimension) {}

std::vector<double> WireEmbedder::embed(const std::string& text) const {
    if (text.empty()) throw EmptyText("cannot embed empty text");
    const nlohmann::json body = {{"model", options_.model}, {"input", {text}}};
    const nlohmann::json response = post_json(options_, "/embeddings", body);
    std::vector<double> v;
    try {
        v = response.at("data").at(0).at("embedding").get<std::vector<double>>();
    } catch (const nlohmann::json::exception& e) {
        throw BackendUnavailable(std::string("malformed embeddings response: ") + e.what());
    }
    if (v.size() != dimension_)
        throw DimensionMismatch("embedding backend returned dimension " + std::to_string(v.size()) +
                                ", configured " + std::to_string(dimension_));
    return v;
}

}  // namespace safedrive
