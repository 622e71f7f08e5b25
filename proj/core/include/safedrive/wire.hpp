#pragma once

#include <string>

#include "safedrive/llm.hpp"
#include "safedrive/memory.hpp"

namespace safedrive {

struct WireOptions {
    std::string base_url;          // e.g. "http://127.0.0.1:8090/v1"
    std::string model = "gpt-4";
    std::string api_key_env = "OPENAI_API_KEY";
    double timeout_s = 30.0;
    int max_retries = 2;  // transport retries
};

// POST {base_url}/chat/completions with the OpenAI-style JSON body.
class WireClient : public LlmClient {
public:
    explicit WireClient(WireOptions options);
    std::string complete(const std::vector<ChatMessage>& messages, double temperature) override;
    std::string backend_tag() const override { return "wire:" + options_.model; }
    bool timed() const override { return true; }

private:
    WireOptions options_;
};

// POST {base_url}/embeddings with {"model", "input": [text]}.
class WireEmbedder : public Embedder {
public:
    WireEmbedder(WireOptions options, std::size_t dimension);
    std::vector<double> embed(const std::string& text) const override;
    std::size_t dimension() const override { return dimension_; }
    std::string tag() const override { return "wire:" + options_.model; }

private:
    WireOptions options_;
    std::size_t dimension_;
};

}  // namespace safedrive
