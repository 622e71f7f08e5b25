#include "safedrive/agent.hpp"

#include <algorithm>
#include <cctype>
#include <chrono>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "safedrive/errors.hpp"

namespace safedrive {

const char* to_string(MatchedTruth m) {
    switch (m) {
        case MatchedTruth::Matched: return "matched";
        case MatchedTruth::Mismatched: return "mismatched";
        case MatchedTruth::NoLabel: return "no_label";
    }
    return "no_label";
}

ChatMessage build_system_message(const PromptConfig& config) {
    std::ostringstream out;
    out << config.role_statement << '\n';
    out << "Available actions: ";
    bool first = true;
    for (Action a : kAllActions) {
        if (!first) out << ", ";
        out << action_token(a);
        first = false;
    }
    out << ".\n";
    out << config.format_instruction << '\n';
    out << config.safety_paragraph;
    if (config.risk_emphasis == "high") {
        out << '\n' << config.risk_emphasis_paragraph;
    }
    return {Role::System, out.str()};
}

std::vector<ChatMessage> assemble_prompt(const ChatMessage& system, const std::string& scene_text,
                                         const std::optional<std::string>& risk_text,
                                         const std::vector<const MemoryRecord*>& few_shots) {
    std::vector<ChatMessage> messages;
    messages.reserve(2 + 2 * few_shots.size());
    messages.push_back(system);
    for (const MemoryRecord* shot : few_shots) {
        std::string user = shot->scene_text;
        if (risk_text && !shot->risk_text.empty()) {
            user += '\n';
            user += shot->risk_text;
        }
        messages.push_back({Role::User, std::move(user)});
        messages.push_back(
            {Role::Assistant, shot->reasoning + "\nFinal decision: " + action_token(shot->action)});
    }
    std::string current = scene_text;
    if (risk_text) {
        current += '\n';
        current += *risk_text;
    }
    messages.push_back({Role::User, std::move(current)});
    return messages;
}

namespace {

std::string lower(std::string s) {
    for (char& c : s) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    return s;
}

// Collapses whitespace runs and strips surrounding punctuation.
std::string normalize_token_phrase(const std::string& raw) {
    std::string out;
    bool in_space = false;
    for (char raw_c : raw) {
        const auto c = static_cast<unsigned char>(raw_c);
        if (std::isspace(c)) {
            in_space = !out.empty();
            continue;
        }
        if (in_space) {
            out.push_back(' ');
            in_space = false;
        }
        out.push_back(static_cast<char>(std::tolower(c)));
    }
    while (!out.empty() && (out.back() == '.' || out.back() == '!' || out.back() == '"' ||
                            out.back() == '\'' || out.back() == ','))
        out.pop_back();
    return out;
}

std::optional<Action> action_from_phrase(const std::string& phrase) {
    if (auto a = action_from_token(phrase)) return a;
    static const std::map<std::string, Action> synonyms = {
        {"speed up", Action::Accelerate},
        {"brake", Action::Decelerate},
        {"slow down", Action::Decelerate},
        {"keep", Action::Idle},
        {"maintain", Action::Idle},
        {"change lane left", Action::LaneChangeLeft},
        {"change lanes left", Action::LaneChangeLeft},
        {"lane change left", Action::LaneChangeLeft},
        {"change_lane_left", Action::LaneChangeLeft},
        {"change lane right", Action::LaneChangeRight},
        {"change lanes right", Action::LaneChangeRight},
        {"lane change right", Action::LaneChangeRight},
        {"change_lane_right", Action::LaneChangeRight},
        {"turn left", Action::TurnLeft},
        {"turn right", Action::TurnRight},
    };
    auto it = synonyms.find(phrase);
    if (it != synonyms.end()) return it->second;
    return std::nullopt;
}

}  // namespace

DecodedAction decode_action(const std::string& llm_output) {
    static const std::string marker = "final decision:";
    const std::string haystack = lower(llm_output);
    std::size_t pos = std::string::npos;
    for (std::size_t at = haystack.find(marker); at != std::string::npos;
         at = haystack.find(marker, at + 1)) {
        pos = at;
    }
    if (pos == std::string::npos) throw ParseError(llm_output);

    std::size_t line_end = llm_output.find('\n', pos);
    if (line_end == std::string::npos) line_end = llm_output.size();
    const std::string phrase =
        normalize_token_phrase(llm_output.substr(pos + marker.size(), line_end - pos - marker.size()));
    const auto action = action_from_phrase(phrase);
    if (!action) throw ParseError(llm_output);

    // Reasoning is everything before the decision line.
    std::size_t reasoning_end = llm_output.rfind('\n', pos);
    if (reasoning_end == std::string::npos) reasoning_end = 0;
    std::string reasoning = llm_output.substr(0, reasoning_end);
    while (!reasoning.empty() && std::isspace(static_cast<unsigned char>(reasoning.back())))
        reasoning.pop_back();
    return {std::move(reasoning), *action};
}

std::size_t whitespace_token_count(const std::vector<ChatMessage>& messages) {
    std::size_t count = 0;
    for (const ChatMessage& m : messages) {
        bool in_token = false;
        for (char raw : m.content) {
            const bool space = std::isspace(static_cast<unsigned char>(raw)) != 0;
            if (!space && !in_token) ++count;
            in_token = !space;
        }
    }
    return count;
}

DecisionAgent::DecisionAgent(AgentSetup setup, ModuleFlags flags, VectorStore& store, LlmClient& client)
    : setup_(std::move(setup)), flags_(flags), store_(store), client_(client),
      system_(build_system_message(setup_.prompt)) {}

std::size_t DecisionAgent::few_shots_for(const Scene& scene) const {
    const auto it = setup_.options.few_shots_by_tag.find(to_string(scene.dataset_tag));
    return it != setup_.options.few_shots_by_tag.end() ? it->second : setup_.options.few_shots_default;
}

DecisionRecord DecisionAgent::reason(const Scene& scene) {
    DecisionRecord record;
    record.frame = scene.frame;
    record.dataset_tag = to_string(scene.dataset_tag);
    record.scene_text = render_scene_text(scene);

    std::optional<std::string> risk_text;
    if (flags_.risk) {
        const QprReport report = assess_scene(scene, setup_.drf, setup_.costs, setup_.grid, setup_.convention);
        ++counters_.qpr_evaluations;
        const RiskNotification notification = risk_notification(report, setup_.thresholds, setup_.templates);
        risk_text = notification.to_text(setup_.templates);
        record.risk_text = *risk_text;
    }

    std::vector<const MemoryRecord*> few_shots;
    if (flags_.memory) {
        const std::string query = setup_.options.memory_query == "scene_risk" && risk_text
                                      ? record.scene_text + '\n' + *risk_text
                                      : record.scene_text;
        const auto hits = store_.retrieve(query, few_shots_for(scene));
        ++counters_.retrievals;
        for (const auto& [rec, similarity] : hits) {
            few_shots.push_back(rec);
            record.few_shot_ids.push_back(rec->record_id);
        }
    }

    std::vector<ChatMessage> messages = assemble_prompt(system_, record.scene_text, risk_text, few_shots);

    for (int attempt = 0;; ++attempt) {
        const auto started = std::chrono::steady_clock::now();
        const std::string reply = client_.complete(messages, setup_.options.temperature);
        ++counters_.completions;
        if (client_.timed()) {
            record.latency_s +=
                std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();
        }
        try {
            DecodedAction decoded = decode_action(reply);
            record.reasoning = std::move(decoded.reasoning);
            record.action = decoded.action;
            break;
        } catch (const ParseError&) {
            if (attempt >= setup_.options.max_retries) throw;
            ++counters_.parse_retries;
            messages.push_back({Role::Assistant, reply});
            messages.push_back({Role::User, "Answer with 'Final decision: <token>'."});
        }
    }
    record.token_estimate = whitespace_token_count(messages);

    if (setup_.options.safety_gate && record.action) {
        const SafetyVerdict verdict = safety_oracle(scene, *record.action, setup_.oracle, setup_.idm);
        if (!verdict.safe) {
            record.action = Action::Decelerate;
            record.safety_gated = true;
        }
    }
    return record;
}

ReflectionRecord DecisionAgent::reflect(const Scene&, const DecisionRecord& record, Action true_label) {
    if (record.matched_truth != MatchedTruth::Mismatched)
        throw Error("reflect requires a mismatched decision record");
    if (!record.action) throw Error("reflect requires a decoded action");

    std::ostringstream prompt;
    prompt << "The decision below was judged incorrect against the recorded human action.\n"
           << "Scene:\n" << record.scene_text << '\n'
           << "Risk assessment:\n" << (record.risk_text.empty() ? "(none)" : record.risk_text) << '\n'
           << "Chosen action: " << action_token(*record.action) << '\n'
           << "Ground-truth action: " << action_token(true_label) << '\n'
           << "Explain briefly why the choice was wrong ('Analysis:'), give corrected reasoning "
              "('Corrected reasoning:'), and end with 'Final decision: <action>'.";

    const std::vector<ChatMessage> messages = {system_, {Role::User, prompt.str()}};
    const std::string reply = client_.complete(messages, setup_.options.temperature);
    ++counters_.completions;
    ++counters_.reflections;

    const DecodedAction decoded = decode_action(reply);  // ParseError propagates

    ReflectionRecord out;
    out.wrong_action = *record.action;
    out.true_label = true_label;
    const std::string& body = decoded.reasoning;
    const std::size_t split = body.find("Corrected reasoning:");
    if (split != std::string::npos) {
        std::string analysis = body.substr(0, split);
        if (analysis.rfind("Analysis:", 0) == 0) analysis = analysis.substr(9);
        while (!analysis.empty() && std::isspace(static_cast<unsigned char>(analysis.back())))
            analysis.pop_back();
        std::size_t start = 0;
        while (start < analysis.size() && std::isspace(static_cast<unsigned char>(analysis[start])))
            ++start;
        out.analysis = analysis.substr(start);
        out.corrected_reasoning = body.substr(split + 20);
        std::size_t cstart = 0;
        while (cstart < out.corrected_reasoning.size() &&
               std::isspace(static_cast<unsigned char>(out.corrected_reasoning[cstart])))
            ++cstart;
        out.corrected_reasoning = out.corrected_reasoning.substr(cstart);
    } else {
        out.analysis = body;
        out.corrected_reasoning = body;
    }
    if (out.analysis.empty()) out.analysis = body;
    if (out.corrected_reasoning.empty()) out.corrected_reasoning = body;
    return out;
}

EpisodeLog DecisionAgent::run_episode(const std::vector<LabeledScene>& scenes) {
    EpisodeLog log;
    log.scenes = scenes;
    log.records.reserve(scenes.size());
    for (std::size_t i = 0; i < scenes.size(); ++i) {
        const LabeledScene& labeled = scenes[i];
        DecisionRecord record;
        bool aborted = false;
        try {
            record = reason(labeled.scene);
        } catch (const ParseError&) {
            // Out of retries: log a no-decision and move on.
            record.scene_text = render_scene_text(labeled.scene);
            record.frame = labeled.scene.frame;
            record.dataset_tag = to_string(labeled.scene.dataset_tag);
            aborted = true;
            ++counters_.aborted_scenes;
        }
        record.scene_index = i;
        record.scenario_tag = labeled.scenario_tag;
        record.true_label = labeled.true_label;
        if (!aborted && record.action) {
            record.matched_truth =
                *record.action == labeled.true_label ? MatchedTruth::Matched : MatchedTruth::Mismatched;
        } else {
            record.matched_truth = MatchedTruth::Mismatched;
        }

        if (!aborted && record.action) {
            MemoryRecord memory;
            memory.scene_text = record.scene_text;
            memory.risk_text = record.risk_text;
            memory.action = labeled.true_label;  // the stored action is always the label
            memory.created_at = static_cast<std::int64_t>(i);
            if (record.matched_truth == MatchedTruth::Matched) {
                memory.reasoning = record.reasoning;
                memory.outcome = Outcome::Correct;
            } else {
                const ReflectionRecord reflection = reflect(labeled.scene, record, labeled.true_label);
                record.reflection = reflection.analysis;
                memory.reasoning = reflection.corrected_reasoning;
                memory.outcome = Outcome::Corrected;
                memory.reflection = reflection.analysis;
            }
            store_.update(std::move(memory));
        }
        log.records.push_back(std::move(record));
    }
    return log;
}

namespace {

nlohmann::json record_to_json(const DecisionRecord& r) {
    nlohmann::json j = {
        {"scene_index", r.scene_index},
        {"frame", r.frame},
        {"dataset_tag", r.dataset_tag},
        {"scenario_tag", r.scenario_tag},
        {"risk_text", r.risk_text},
        {"few_shot_ids", r.few_shot_ids},
        {"reasoning", r.reasoning},
        {"matched_truth", to_string(r.matched_truth)},
        {"safety_gated", r.safety_gated},
        {"latency_s", r.latency_s},
        {"token_estimate", r.token_estimate},
    };
    j["action"] = r.action ? nlohmann::json(action_token(*r.action)) : nlohmann::json(nullptr);
    j["true_label"] = r.true_label ? nlohmann::json(action_token(*r.true_label)) : nlohmann::json(nullptr);
    j["reflection"] = r.reflection ? nlohmann::json(*r.reflection) : nlohmann::json(nullptr);
    return j;
}

}  // namespace

std::string decision_record_jsonl(const DecisionRecord& record) { return record_to_json(record).dump(); }

void write_episode_jsonl(const EpisodeLog& log, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw Error("cannot open for writing: " + path);
    for (const DecisionRecord& r : log.records) out << decision_record_jsonl(r) << '\n';
}

}  // namespace safedrive
