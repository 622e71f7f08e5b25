#pragma once

#include <string>

#include <json.hpp>

#include "safedrive/agent.hpp"
#include "safedrive/wire.hpp"

namespace safedrive {

struct BackendConfig {
    std::string llm = "scripted";       // scripted | replay | wire
    std::string embedding = "hashing";  // hashing | wire
    std::size_t embedding_dimension = 256;
    WireOptions llm_wire{.base_url = "", .model = "gpt-4", .api_key_env = "OPENAI_API_KEY"};
    WireOptions embedding_wire{
        .base_url = "", .model = "text-embedding-3-small", .api_key_env = "OPENAI_API_KEY"};
    std::string rules_path;   // scripted rule table override
    std::string replay_path;  // replay responses (JSON lines)
};

// The whole engine configuration as one schema-versioned JSON document.
// Every field has a default; a config file only needs the fields it
// changes.
struct SafeDriveConfig {
    DrfParams drf;
    CostTable costs;
    GridSpec grid;
    QprConvention convention = QprConvention::AreaIntegral;
    std::string thresholds_path;
    LabelerParams labeler;
    SceneParams scene;
    NotificationTemplates templates;
    PromptConfig prompt;
    AgentOptions agent;
    OracleParams oracle;
    IdmParams idm;
    BackendConfig backend;
    // Acceptance bound for the arc-to-straight handover, max absolute
    // cell difference at steering = 2 * delta_straight.
    double arc_continuity_tolerance = 0.05;

    nlohmann::json to_json() const;
    static SafeDriveConfig from_json(const nlohmann::json& j);

    void save(const std::string& path) const;
    static SafeDriveConfig load(const std::string& path);

    AgentSetup agent_setup(const RiskThresholds& thresholds) const;
};

}  // namespace safedrive
