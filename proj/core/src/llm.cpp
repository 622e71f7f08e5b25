#include "safedrive/llm.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "safedrive/errors.hpp"

namespace safedrive {

const char* to_string(Role r) {
    switch (r) {
        case Role::System: return "system";
        case Role::User: return "user";
        case Role::Assistant: return "assistant";
    }
    return "user";
}

namespace {

bool contains(const std::string& haystack, const std::string& needle) {
    return haystack.find(needle) != std::string::npos;
}

std::string navigation_line(const std::string& text) {
    const std::size_t pos = text.find("Navigation:");
    if (pos == std::string::npos) return {};
    const std::size_t end = text.find('\n', pos);
    return text.substr(pos, end == std::string::npos ? std::string::npos : end - pos);
}

std::string reflection_response(const std::string& user_text) {
    // The reflection prompt embeds the label as "Ground-truth action: <token>".
    const std::string marker = "Ground-truth action:";
    const std::size_t pos = user_text.find(marker);
    std::string token = "idle";
    if (pos != std::string::npos) {
        std::istringstream rest(user_text.substr(pos + marker.size()));
        rest >> token;
    }
    std::ostringstream out;
    out << "Analysis: the chosen action conflicted with what the situation required; the risk cues in "
           "the scene were weighted incorrectly.\n"
        << "Corrected reasoning: considering the surrounding traffic and the stated risk levels, the "
           "appropriate response here is to " << token << ".\n"
        << "Final decision: " << token;
    return out.str();
}

}  // namespace

std::optional<double> front_gap_from_scene_text(const std::string& scene_text, double lateral_tolerance) {
    // Neighbor lines look like:
    //   Vehicle 7 (Sedan) at relative (12.5, -3.5) m, speed 25.0 m/s, ...
    std::optional<double> best;
    std::istringstream lines(scene_text);
    std::string line;
    while (std::getline(lines, line)) {
        if (line.rfind("Vehicle ", 0) != 0) continue;
        const std::size_t open = line.find("at relative (");
        if (open == std::string::npos) continue;
        const std::size_t comma = line.find(',', open);
        const std::size_t close = line.find(')', open);
        if (comma == std::string::npos || close == std::string::npos || comma > close) continue;
        try {
            const double dx = std::stod(line.substr(open + 13, comma - open - 13));
            const double dy = std::stod(line.substr(comma + 1, close - comma - 1));
            if (dx > 0.0 && std::abs(dy) <= lateral_tolerance) {
                if (!best || dx < *best) best = dx;
            }
        } catch (const std::exception&) {
            continue;
        }
    }
    return best;
}

RuleScriptedClient::RuleScriptedClient() : rules_(default_rules()) {}

RuleScriptedClient::RuleScriptedClient(std::vector<ScriptedRule> rules) : rules_(std::move(rules)) {}

std::vector<ScriptedRule> RuleScriptedClient::default_rules() {
    std::vector<ScriptedRule> rules;

    ScriptedRule defer_left;
    defer_left.contains = {"HIGH"};
    defer_left.instruction_contains = {"left lane"};
    defer_left.action = Action::Idle;
    defer_left.reasoning =
        "The navigation goal asks for the left lane, but a participant there or nearby is flagged HIGH "
        "risk; moving now would cut into its path, so the lane change is deferred and the current lane "
        "is kept at steady speed.";
    rules.push_back(defer_left);

    ScriptedRule defer_right = defer_left;
    defer_right.instruction_contains = {"right lane"};
    defer_right.reasoning =
        "The navigation goal asks for the right lane, but a HIGH-risk participant makes the move unsafe "
        "right now; the current lane is kept at steady speed.";
    rules.push_back(defer_right);

    ScriptedRule brake_front;
    brake_front.contains = {"ahead: HIGH"};
    brake_front.action = Action::Decelerate;
    brake_front.reasoning =
        "A participant ahead carries HIGH risk, meaning the gap is closing into the danger zone; "
        "easing off opens the gap and lowers the risk.";
    rules.push_back(brake_front);

    ScriptedRule rear_pressure;
    rear_pressure.contains = {"behind: HIGH"};
    rear_pressure.action = Action::Idle;
    rear_pressure.reasoning =
        "The dominant risk comes from a fast vehicle behind; braking would aggravate it, so speed and "
        "lane are held steady while it passes.";
    rules.push_back(rear_pressure);

    ScriptedRule yield_roundabout;
    yield_roundabout.instruction_contains = {"roundabout"};
    yield_roundabout.contains = {"Vehicle"};
    yield_roundabout.action = Action::Decelerate;
    yield_roundabout.reasoning =
        "The entry to the roundabout is ahead and circulating traffic has priority; braking before "
        "the yield line keeps the merge safe.";
    rules.push_back(yield_roundabout);

    ScriptedRule go_left;
    go_left.instruction_contains = {"left lane"};
    go_left.action = Action::LaneChangeLeft;
    go_left.reasoning = "The navigation goal requests the left lane and no high-risk participant is "
                        "reported, so the lane change is executed.";
    rules.push_back(go_left);

    ScriptedRule go_right;
    go_right.instruction_contains = {"right lane"};
    go_right.action = Action::LaneChangeRight;
    go_right.reasoning = "The navigation goal requests the right lane and no high-risk participant is "
                         "reported, so the lane change is executed.";
    rules.push_back(go_right);

    ScriptedRule tight_gap;
    tight_gap.front_gap_below = 12.0;
    tight_gap.action = Action::Decelerate;
    tight_gap.reasoning = "The leader in the current lane is very close, so slowing down restores a "
                          "safe following distance.";
    rules.push_back(tight_gap);

    ScriptedRule fallback;
    fallback.action = Action::Idle;
    fallback.reasoning = "No risk flag or navigation request calls for a maneuver, so the current "
                         "speed and lane are maintained.";
    rules.push_back(fallback);
    return rules;
}

RuleScriptedClient RuleScriptedClient::from_json_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw Error("cannot open rules file: " + path);
    nlohmann::json j;
    try {
        in >> j;
    } catch (const nlohmann::json::parse_error& e) {
        throw ConfigError(std::string("invalid rules JSON: ") + e.what());
    }
    std::vector<ScriptedRule> rules;
    for (const auto& item : j.at("rules")) {
        ScriptedRule r;
        if (item.contains("contains")) r.contains = item.at("contains").get<std::vector<std::string>>();
        if (item.contains("not_contains"))
            r.not_contains = item.at("not_contains").get<std::vector<std::string>>();
        if (item.contains("instruction_contains"))
            r.instruction_contains = item.at("instruction_contains").get<std::vector<std::string>>();
        if (item.contains("front_gap_below")) r.front_gap_below = item.at("front_gap_below").get<double>();
        const auto action = action_from_token(item.at("action").get<std::string>());
        if (!action) throw ConfigError("unknown action token in rules file");
        r.action = *action;
        r.reasoning = item.at("reasoning").get<std::string>();
        rules.push_back(std::move(r));
    }
    return RuleScriptedClient(std::move(rules));
}

std::string RuleScriptedClient::complete(const std::vector<ChatMessage>& messages, double) {
    const ChatMessage* last_user = nullptr;
    for (const ChatMessage& msg : messages) {
        if (msg.role == Role::User) last_user = &msg;
    }
    if (!last_user) throw BackendUnavailable("scripted backend needs a user message");
    const std::string& text = last_user->content;

    if (contains(text, "Ground-truth action:")) return reflection_response(text);

    const std::string nav = navigation_line(text);
    for (const ScriptedRule& rule : rules_) {
        bool ok = true;
        for (const std::string& s : rule.contains) ok = ok && contains(text, s);
        for (const std::string& s : rule.not_contains) ok = ok && !contains(text, s);
        for (const std::string& s : rule.instruction_contains) ok = ok && contains(nav, s);
        if (ok && rule.front_gap_below) {
            const auto gap = front_gap_from_scene_text(text);
            ok = gap && *gap < *rule.front_gap_below;
        }
        if (!ok) continue;
        return rule.reasoning + "\nFinal decision: " + action_token(rule.action);
    }
    throw BackendUnavailable("no scripted rule matched and no fallback rule is present");
}

ReplayClient::ReplayClient(std::vector<std::string> responses) : responses_(std::move(responses)) {}

std::vector<std::string> ReplayClient::load_jsonl(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw Error("cannot open replay file: " + path);
    std::vector<std::string> responses;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        try {
            const nlohmann::json j = nlohmann::json::parse(line);
            if (j.is_string()) {
                responses.push_back(j.get<std::string>());
            } else if (j.is_object() && j.contains("content")) {
                responses.push_back(j.at("content").get<std::string>());
            } else {
                throw ConfigError("replay line " + std::to_string(line_no) +
                                  " must be a JSON string or {\"content\": ...}");
            }
        } catch (const nlohmann::json::parse_error& e) {
            throw ConfigError("replay line " + std::to_string(line_no) + ": " + e.what());
        }
    }
    return responses;
}

std::string ReplayClient::complete(const std::vector<ChatMessage>&, double) {
    std::lock_guard<std::mutex> lock(mutex_);
    if (next_ >= responses_.size()) throw BackendUnavailable("replay responses exhausted");
    return responses_[next_++];
}

std::size_t ReplayClient::remaining() const {
    std::lock_guard<std::mutex> lock(mutex_);
    return responses_.size() - next_;
}

}  // namespace safedrive
