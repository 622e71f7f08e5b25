#include "safedrive/config.hpp"

#include <fstream>

#include "safedrive/errors.hpp"

namespace safedrive {

namespace {

constexpr int kConfigSchemaVersion = 1;

nlohmann::json optional_number(const std::optional<double>& v) {
    return v ? nlohmann::json(*v) : nlohmann::json(nullptr);
}

std::optional<double> read_optional_number(const nlohmann::json& j, const char* key,
                                           const std::optional<double>& fallback) {
    if (!j.contains(key)) return fallback;
    if (j.at(key).is_null()) return std::nullopt;
    return j.at(key).get<double>();
}

template <typename T>
T value_or(const nlohmann::json& j, const char* key, const T& fallback) {
    if (!j.contains(key)) return fallback;
    return j.at(key).get<T>();
}

}  // namespace

nlohmann::json SafeDriveConfig::to_json() const {
    nlohmann::json j;
    j["schema_version"] = kConfigSchemaVersion;

    j["drf"] = {
        {"p", drf.p},
        {"t_la", drf.t_la},
        {"m", drf.m},
        {"k_inner", drf.k_inner},
        {"k_outer", drf.k_outer},
        {"c", optional_number(drf.c)},
        {"delta_straight", drf.delta_straight},
        {"s_max", optional_number(drf.s_max)},
    };

    nlohmann::json cost_values;
    for (const auto& [klass, cost] : costs.costs) cost_values[to_string(klass)] = cost;
    j["costs"] = {{"values", cost_values}, {"default", costs.default_cost}};

    j["grid"] = {{"width", grid.width}, {"height", grid.height}, {"resolution", grid.resolution}};
    j["qpr_convention"] = to_string(convention);
    j["thresholds_path"] = thresholds_path;

    j["labeler"] = {
        {"horizon_frames", labeler.horizon},
        {"turn_threshold", labeler.turn_threshold},
        {"accel_threshold", labeler.accel_threshold},
    };

    j["scene"] = {
        {"neighbor_radius", scene.neighbor_radius},
        {"neighbor_cap", scene.neighbor_cap},
        {"wheelbase_ratio", scene.estimation.wheelbase_ratio},
        {"default_instruction", scene.default_instruction},
    };

    j["notification_templates"] = {{"participant", templates.participant}, {"scene", templates.scene}};

    j["prompt"] = {
        {"role_statement", prompt.role_statement},
        {"format_instruction", prompt.format_instruction},
        {"safety_paragraph", prompt.safety_paragraph},
        {"risk_emphasis_paragraph", prompt.risk_emphasis_paragraph},
        {"risk_emphasis", prompt.risk_emphasis},
    };

    j["agent"] = {
        {"few_shots_by_tag", agent.few_shots_by_tag},
        {"few_shots_default", agent.few_shots_default},
        {"max_retries", agent.max_retries},
        {"temperature", agent.temperature},
        {"safety_gate", agent.safety_gate},
        {"memory_query", agent.memory_query},
    };

    j["oracle"] = {
        {"ttc_threshold", oracle.ttc_threshold},
        {"decel_threshold", oracle.decel_threshold},
        {"horizon", oracle.horizon},
        {"dt", oracle.dt},
        {"action_accel", oracle.action_accel},
        {"action_decel", oracle.action_decel},
        {"lane_change_duration", oracle.lane_change_duration},
        {"lane_width", oracle.lane_width},
        {"turn_radius", oracle.turn_radius},
        {"projection_horizon", oracle.projection_horizon},
        {"projection_dt", oracle.projection_dt},
        {"follower_lateral_tolerance", oracle.follower_lateral_tolerance},
    };

    j["idm"] = {
        {"desired_speed", idm.desired_speed},
        {"time_headway", idm.time_headway},
        {"max_accel", idm.max_accel},
        {"comfortable_decel", idm.comfortable_decel},
        {"min_gap", idm.min_gap},
        {"accel_exponent", idm.accel_exponent},
        {"emergency_decel", idm.emergency_decel},
    };

    const auto wire_json = [](const WireOptions& w) {
        return nlohmann::json{
            {"base_url", w.base_url},       {"model", w.model},
            {"api_key_env", w.api_key_env}, {"timeout_s", w.timeout_s},
            {"max_retries", w.max_retries},
        };
    };
    j["backend"] = {
        {"llm", backend.llm},
        {"embedding", backend.embedding},
        {"embedding_dimension", backend.embedding_dimension},
        {"llm_wire", wire_json(backend.llm_wire)},
        {"embedding_wire", wire_json(backend.embedding_wire)},
        {"rules_path", backend.rules_path},
        {"replay_path", backend.replay_path},
    };

    j["arc_continuity_tolerance"] = arc_continuity_tolerance;
    return j;
}

SafeDriveConfig SafeDriveConfig::from_json(const nlohmann::json& j) {
    SafeDriveConfig c;
    const int version = value_or(j, "schema_version", kConfigSchemaVersion);
    if (version != kConfigSchemaVersion)
        throw SchemaVersionMismatch("config schema_version " + std::to_string(version) + ", expected " +
                                    std::to_string(kConfigSchemaVersion));

    if (j.contains("drf")) {
        const auto& d = j.at("drf");
        c.drf.p = value_or(d, "p", c.drf.p);
        c.drf.t_la = value_or(d, "t_la", c.drf.t_la);
        c.drf.m = value_or(d, "m", c.drf.m);
        c.drf.k_inner = value_or(d, "k_inner", c.drf.k_inner);
        c.drf.k_outer = value_or(d, "k_outer", c.drf.k_outer);
        c.drf.c = read_optional_number(d, "c", c.drf.c);
        c.drf.delta_straight = value_or(d, "delta_straight", c.drf.delta_straight);
        c.drf.s_max = read_optional_number(d, "s_max", c.drf.s_max);
        if (!(c.drf.p > 0.0) || !(c.drf.t_la > 0.0)) throw ConfigError("drf.p and drf.t_la must be > 0");
        if (c.drf.m < 0.0 || c.drf.k_inner < 0.0 || c.drf.k_outer < 0.0)
            throw ConfigError("drf width gains must be >= 0");
        if (c.drf.c && !(*c.drf.c > 0.0)) throw ConfigError("drf.c must be > 0 when set");
        if (!(c.drf.delta_straight > 0.0)) throw ConfigError("drf.delta_straight must be > 0");
    }

    if (j.contains("costs")) {
        const auto& k = j.at("costs");
        if (k.contains("values")) {
            for (const auto& [name, cost] : k.at("values").items()) {
                const double value = cost.get<double>();
                if (value < 0.0) throw ConfigError("costs must be >= 0");
                c.costs.costs[vehicle_class_from_string(name)] = value;
            }
        }
        c.costs.default_cost = value_or(k, "default", c.costs.default_cost);
        if (c.costs.default_cost < 0.0) throw ConfigError("default cost must be >= 0");
    }

    if (j.contains("grid")) {
        const auto& g = j.at("grid");
        c.grid.width = value_or(g, "width", c.grid.width);
        c.grid.height = value_or(g, "height", c.grid.height);
        c.grid.resolution = value_or(g, "resolution", c.grid.resolution);
        if (!(c.grid.resolution > 0.0)) throw ConfigError("grid.resolution must be > 0");
    }

    if (j.contains("qpr_convention"))
        c.convention = qpr_convention_from_string(j.at("qpr_convention").get<std::string>());
    c.thresholds_path = value_or(j, "thresholds_path", c.thresholds_path);

    if (j.contains("labeler")) {
        const auto& l = j.at("labeler");
        c.labeler.horizon = value_or(l, "horizon_frames", c.labeler.horizon);
        c.labeler.turn_threshold = value_or(l, "turn_threshold", c.labeler.turn_threshold);
        c.labeler.accel_threshold = value_or(l, "accel_threshold", c.labeler.accel_threshold);
    }

    if (j.contains("scene")) {
        const auto& s = j.at("scene");
        c.scene.neighbor_radius = value_or(s, "neighbor_radius", c.scene.neighbor_radius);
        c.scene.neighbor_cap = value_or(s, "neighbor_cap", c.scene.neighbor_cap);
        c.scene.estimation.wheelbase_ratio = value_or(s, "wheelbase_ratio", c.scene.estimation.wheelbase_ratio);
        c.scene.default_instruction = value_or(s, "default_instruction", c.scene.default_instruction);
    }

    if (j.contains("notification_templates")) {
        const auto& t = j.at("notification_templates");
        if (t.contains("participant"))
            for (const auto& [key, text] : t.at("participant").items())
                c.templates.participant[key] = text.get<std::string>();
        c.templates.scene = value_or(t, "scene", c.templates.scene);
    }

    if (j.contains("prompt")) {
        const auto& p = j.at("prompt");
        c.prompt.role_statement = value_or(p, "role_statement", c.prompt.role_statement);
        c.prompt.format_instruction = value_or(p, "format_instruction", c.prompt.format_instruction);
        c.prompt.safety_paragraph = value_or(p, "safety_paragraph", c.prompt.safety_paragraph);
        c.prompt.risk_emphasis_paragraph =
            value_or(p, "risk_emphasis_paragraph", c.prompt.risk_emphasis_paragraph);
        c.prompt.risk_emphasis = value_or(p, "risk_emphasis", c.prompt.risk_emphasis);
    }

    if (j.contains("agent")) {
        const auto& a = j.at("agent");
        if (a.contains("few_shots_by_tag"))
            c.agent.few_shots_by_tag =
                a.at("few_shots_by_tag").get<std::map<std::string, std::size_t>>();
        c.agent.few_shots_default = value_or(a, "few_shots_default", c.agent.few_shots_default);
        c.agent.max_retries = value_or(a, "max_retries", c.agent.max_retries);
        c.agent.temperature = value_or(a, "temperature", c.agent.temperature);
        c.agent.safety_gate = value_or(a, "safety_gate", c.agent.safety_gate);
        c.agent.memory_query = value_or(a, "memory_query", c.agent.memory_query);
    }

    if (j.contains("oracle")) {
        const auto& o = j.at("oracle");
        c.oracle.ttc_threshold = value_or(o, "ttc_threshold", c.oracle.ttc_threshold);
        c.oracle.decel_threshold = value_or(o, "decel_threshold", c.oracle.decel_threshold);
        c.oracle.horizon = value_or(o, "horizon", c.oracle.horizon);
        c.oracle.dt = value_or(o, "dt", c.oracle.dt);
        c.oracle.action_accel = value_or(o, "action_accel", c.oracle.action_accel);
        c.oracle.action_decel = value_or(o, "action_decel", c.oracle.action_decel);
        c.oracle.lane_change_duration = value_or(o, "lane_change_duration", c.oracle.lane_change_duration);
        c.oracle.lane_width = value_or(o, "lane_width", c.oracle.lane_width);
        c.oracle.turn_radius = value_or(o, "turn_radius", c.oracle.turn_radius);
        c.oracle.projection_horizon = value_or(o, "projection_horizon", c.oracle.projection_horizon);
        c.oracle.projection_dt = value_or(o, "projection_dt", c.oracle.projection_dt);
        c.oracle.follower_lateral_tolerance =
            value_or(o, "follower_lateral_tolerance", c.oracle.follower_lateral_tolerance);
    }

    if (j.contains("idm")) {
        const auto& i = j.at("idm");
        c.idm.desired_speed = value_or(i, "desired_speed", c.idm.desired_speed);
        c.idm.time_headway = value_or(i, "time_headway", c.idm.time_headway);
        c.idm.max_accel = value_or(i, "max_accel", c.idm.max_accel);
        c.idm.comfortable_decel = value_or(i, "comfortable_decel", c.idm.comfortable_decel);
        c.idm.min_gap = value_or(i, "min_gap", c.idm.min_gap);
        c.idm.accel_exponent = value_or(i, "accel_exponent", c.idm.accel_exponent);
        c.idm.emergency_decel = value_or(i, "emergency_decel", c.idm.emergency_decel);
        if (!(c.idm.desired_speed > 0.0) || !(c.idm.time_headway > 0.0) || !(c.idm.max_accel > 0.0) ||
            !(c.idm.comfortable_decel > 0.0) || !(c.idm.min_gap > 0.0))
            throw ConfigError("idm parameters must be positive");
    }

    if (j.contains("backend")) {
        const auto& b = j.at("backend");
        c.backend.llm = value_or(b, "llm", c.backend.llm);
        c.backend.embedding = value_or(b, "embedding", c.backend.embedding);
        c.backend.embedding_dimension = value_or(b, "embedding_dimension", c.backend.embedding_dimension);
        const auto read_wire = [](const nlohmann::json& w, WireOptions base) {
            base.base_url = value_or(w, "base_url", base.base_url);
            base.model = value_or(w, "model", base.model);
            base.api_key_env = value_or(w, "api_key_env", base.api_key_env);
            base.timeout_s = value_or(w, "timeout_s", base.timeout_s);
            base.max_retries = value_or(w, "max_retries", base.max_retries);
            return base;
        };
        if (b.contains("llm_wire")) c.backend.llm_wire = read_wire(b.at("llm_wire"), c.backend.llm_wire);
        if (b.contains("embedding_wire"))
            c.backend.embedding_wire = read_wire(b.at("embedding_wire"), c.backend.embedding_wire);
        c.backend.rules_path = value_or(b, "rules_path", c.backend.rules_path);
        c.backend.replay_path = value_or(b, "replay_path", c.backend.replay_path);
    }

    c.arc_continuity_tolerance = value_or(j, "arc_continuity_tolerance", c.arc_continuity_tolerance);
    return c;
}

void SafeDriveConfig::save(const std::string& path) const {
    std::ofstream out(path);
    if (!out) throw Error("cannot open for writing: " + path);
    out << to_json().dump(2) << '\n';
}

SafeDriveConfig SafeDriveConfig::load(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw Error("cannot open config file: " + path);
    nlohmann::json j;
    try {
        in >> j;
    } catch (const nlohmann::json::parse_error& e) {
        throw ConfigError(std::string("invalid config JSON: ") + e.what());
    }
    return from_json(j);
}

AgentSetup SafeDriveConfig::agent_setup(const RiskThresholds& thresholds) const {
    AgentSetup setup;
    setup.drf = drf;
    setup.costs = costs;
    setup.grid = grid;
    setup.convention = convention;
    setup.thresholds = thresholds;
    setup.templates = templates;
    setup.prompt = prompt;
    setup.options = agent;
    setup.oracle = oracle;
    setup.idm = idm;
    return setup;
}

}  // namespace safedrive
