#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "safedrive/idm.hpp"
#include "safedrive/llm.hpp"
#include "safedrive/memory.hpp"
#include "safedrive/risk_assessor.hpp"
#include "safedrive/safety.hpp"

namespace safedrive {

// System-message building blocks; kept in the config so the exact prompt
// is auditable. The action vocabulary is generated, never hand-written,
// so every canonical token appears exactly once.
struct PromptConfig {
    std::string role_statement =
        "You are the driving decision agent of an autonomous vehicle. Read the scene description, "
        "any risk notes, and the navigation goal, then pick the next maneuver.";
    std::string format_instruction =
        "Reply with your reasoning first, then end with exactly one line of the form "
        "'Final decision: <action>' using one action from the list.";
    std::string safety_paragraph =
        "Safety outranks the navigation goal: when a maneuver would conflict with surrounding "
        "traffic, prefer keeping your lane or reducing speed.";
    std::string risk_emphasis_paragraph =
        "Treat every participant marked HIGH as a hard constraint: do not move toward it and give "
        "way until its risk subsides.";
    std::string risk_emphasis = "normal";  // "normal" | "high"
};

struct ModuleFlags {
    bool risk = true;
    bool memory = true;
};

struct AgentOptions {
    std::map<std::string, std::size_t> few_shots_by_tag = {
        {"highway", 3}, {"intersection", 3}, {"roundabout", 2}};
    std::size_t few_shots_default = 3;
    int max_retries = 2;       // re-asks after undecodable replies
    double temperature = 0.0;
    bool safety_gate = false;  // substitute Decelerate for oracle-unsafe actions
    std::string memory_query = "scene";  // "scene" | "scene_risk"
};

// Everything the agent needs besides the store and the client.
struct AgentSetup {
    DrfParams drf;
    CostTable costs;
    GridSpec grid;
    QprConvention convention = QprConvention::AreaIntegral;
    RiskThresholds thresholds;
    NotificationTemplates templates;
    PromptConfig prompt;
    AgentOptions options;
    OracleParams oracle;
    IdmParams idm;
};

enum class MatchedTruth { Matched, Mismatched, NoLabel };

const char* to_string(MatchedTruth m);

struct DecisionRecord {
    std::size_t scene_index = 0;
    long frame = 0;
    std::string dataset_tag;
    std::string scenario_tag;
    std::string scene_text;
    std::string risk_text;  // empty when the risk module is off
    std::vector<std::uint64_t> few_shot_ids;
    std::string reasoning;
    std::optional<Action> action;  // present iff decoding succeeded
    MatchedTruth matched_truth = MatchedTruth::NoLabel;
    std::optional<Action> true_label;
    std::optional<std::string> reflection;
    bool safety_gated = false;
    double latency_s = 0.0;  // 0 for untimed (offline) backends
    std::size_t token_estimate = 0;
};

struct ReflectionRecord {
    Action wrong_action = Action::Idle;
    Action true_label = Action::Idle;
    std::string analysis;
    std::string corrected_reasoning;
};

struct EpisodeLog {
    std::vector<LabeledScene> scenes;  // parallel to records
    std::vector<DecisionRecord> records;
    std::string condition;
    std::uint64_t seed = 0;
};

void write_episode_jsonl(const EpisodeLog& log, const std::string& path);
std::string decision_record_jsonl(const DecisionRecord& record);

struct AgentCounters {
    std::size_t qpr_evaluations = 0;
    std::size_t retrievals = 0;
    std::size_t completions = 0;
    std::size_t parse_retries = 0;
    std::size_t reflections = 0;
    std::size_t aborted_scenes = 0;
};

// ---- pure prompt machinery ----

ChatMessage build_system_message(const PromptConfig& config);

// Message layout: system, then one user/assistant pair per few-shot
// (scene[+risk] as user, reasoning + decision line as assistant), then
// the current scene (+ risk text when present) as the final user message.
std::vector<ChatMessage> assemble_prompt(const ChatMessage& system, const std::string& scene_text,
                                         const std::optional<std::string>& risk_text,
                                         const std::vector<const MemoryRecord*>& few_shots);

struct DecodedAction {
    std::string reasoning;
    Action action;
};

// Grammar: the last line matching "Final decision:" (case-insensitive)
// followed by one canonical token or a listed synonym. Throws ParseError
// otherwise; never guesses.
DecodedAction decode_action(const std::string& llm_output);

std::size_t whitespace_token_count(const std::vector<ChatMessage>& messages);

// ---- the loop ----

class DecisionAgent {
public:
    DecisionAgent(AgentSetup setup, ModuleFlags flags, VectorStore& store, LlmClient& client);

    // One pass of the pipeline: risk -> retrieve -> prompt -> complete ->
    // decode, with the configured retry policy. Does not touch memory.
    DecisionRecord reason(const Scene& scene);

    // Correction pass for a mismatched decision; the caller persists the
    // result to memory.
    ReflectionRecord reflect(const Scene& scene, const DecisionRecord& record, Action true_label);

    // Full closed loop over labeled scenes: decide, compare, reflect on
    // mismatches, and append one memory record per completed scene.
    EpisodeLog run_episode(const std::vector<LabeledScene>& scenes);

    const AgentCounters& counters() const { return counters_; }
    const AgentSetup& setup() const { return setup_; }

private:
    std::size_t few_shots_for(const Scene& scene) const;

    AgentSetup setup_;
    ModuleFlags flags_;
    VectorStore& store_;
    LlmClient& client_;
    ChatMessage system_;
    AgentCounters counters_;
};

}  // namespace safedrive
