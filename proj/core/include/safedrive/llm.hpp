#pragma once

#include <cstddef>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

#include "safedrive/scene.hpp"

namespace safedrive {

enum class Role { System, User, Assistant };

const char* to_string(Role r);

struct ChatMessage {
    Role role = Role::User;
    std::string content;
};

// Chat-style completion backend. Implementations must be callable from
// multiple episodes concurrently.
class LlmClient {
public:
    virtual ~LlmClient() = default;
    virtual std::string complete(const std::vector<ChatMessage>& messages, double temperature) = 0;
    virtual std::string backend_tag() const = 0;
    // True when wall-clock latency of complete() is meaningful to record.
    virtual bool timed() const { return false; }
};

// One condition -> response entry of the scripted backend. All listed
// conditions must hold; absent ones are ignored. Conditions are matched
// against the final user message (scene text plus optional risk block).
struct ScriptedRule {
    std::vector<std::string> contains;
    std::vector<std::string> not_contains;
    std::vector<std::string> instruction_contains;  // matched inside the Navigation line
    std::optional<double> front_gap_below;          // nearest in-lane leader closer than this, m
    Action action = Action::Idle;
    std::string reasoning;
};

// Deterministic offline driver: a first-match rule table keyed on the
// presence of risk markers, the navigation instruction, and gap features
// parsed back out of the rendered scene text. Reflection prompts are
// answered from the ground-truth line they embed.
class RuleScriptedClient : public LlmClient {
public:
    RuleScriptedClient();  // built-in default rules
    explicit RuleScriptedClient(std::vector<ScriptedRule> rules);

    static RuleScriptedClient from_json_file(const std::string& path);
    static std::vector<ScriptedRule> default_rules();

    std::string complete(const std::vector<ChatMessage>& messages, double temperature) override;
    std::string backend_tag() const override { return "scripted"; }

private:
    std::vector<ScriptedRule> rules_;
};

// Replays verbatim responses in order; used for record/replay runs and
// for feeding ground-truth decisions. Exhaustion raises BackendUnavailable.
class ReplayClient : public LlmClient {
public:
    explicit ReplayClient(std::vector<std::string> responses);
    static std::vector<std::string> load_jsonl(const std::string& path);

    std::string complete(const std::vector<ChatMessage>& messages, double temperature) override;
    std::string backend_tag() const override { return "replay"; }
    std::size_t remaining() const;

private:
    std::vector<std::string> responses_;
    std::size_t next_ = 0;
    mutable std::mutex mutex_;
};

// Extracts the nearest same-corridor leader distance from a rendered
// scene text; exposed for tests of the scripted gap condition.
std::optional<double> front_gap_from_scene_text(const std::string& scene_text, double lateral_tolerance = 1.75);

}  // namespace safedrive
