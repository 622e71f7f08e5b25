#include "safedrive/risk_assessor.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <random>

#include <json.hpp>

#include "safedrive/errors.hpp"

namespace safedrive {

const char* to_string(RiskLevel level) {
    switch (level) {
        case RiskLevel::Low: return "LOW";
        case RiskLevel::Medium: return "MEDIUM";
        case RiskLevel::High: return "HIGH";
    }
    return "LOW";
}

void RiskThresholds::save(const std::string& path) const {
    nlohmann::json j = {
        {"t_low", t_low},
        {"t_high", t_high},
        {"sample_count", sample_count},
        {"convention", to_string(convention)},
        {"source_tag", source_tag},
    };
    j["seed"] = seed ? nlohmann::json(*seed) : nlohmann::json(nullptr);
    std::ofstream out(path);
    if (!out) throw Error("cannot open for writing: " + path);
    out << j.dump(2) << '\n';
}

RiskThresholds RiskThresholds::load(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw Error("cannot open thresholds file: " + path);
    nlohmann::json j;
    try {
        in >> j;
    } catch (const nlohmann::json::parse_error& e) {
        throw ConfigError(std::string("invalid thresholds JSON: ") + e.what());
    }
    RiskThresholds t;
    t.t_low = j.at("t_low").get<double>();
    t.t_high = j.at("t_high").get<double>();
    t.sample_count = j.at("sample_count").get<std::size_t>();
    t.convention = qpr_convention_from_string(j.at("convention").get<std::string>());
    if (j.contains("source_tag")) t.source_tag = j.at("source_tag").get<std::string>();
    if (j.contains("seed") && !j.at("seed").is_null()) t.seed = j.at("seed").get<std::uint64_t>();
    if (t.t_low > t.t_high) throw ConfigError("thresholds file violates t_low <= t_high");
    return t;
}

std::vector<double> sample_qpr_distribution(const TrajectoryTable& trajectories, std::size_t n,
                                            std::uint64_t seed, const DrfParams& params,
                                            const CostTable& costs, const GridSpec& grid_spec,
                                            QprConvention convention, double radius,
                                            const StateEstimation& estimation) {
    if (n == 0) throw BadParameter("sample count must be >= 1");
    if (trajectories.empty()) throw EmptyDataset("trajectory table is empty");

    // Enumerate valid (ego, frame, neighbor) triples: ordered pairs of
    // distinct vehicles sharing a frame within the radius.
    struct Pair {
        const TrajectoryRow* ego;
        const TrajectoryRow* neighbor;
    };
    std::vector<Pair> triples;
    for (long frame : trajectories.frames()) {
        const auto present = trajectories.at_frame(frame);
        for (const TrajectoryRow* a : present) {
            for (const TrajectoryRow* b : present) {
                if (a == b) continue;
                if (std::hypot(a->x - b->x, a->y - b->y) <= radius) triples.push_back({a, b});
            }
        }
    }
    if (triples.empty()) throw EmptyDataset("no (ego, frame, neighbor) triples within the radius");

    std::mt19937_64 rng(seed);
    std::uniform_int_distribution<std::size_t> pick(0, triples.size() - 1);
    std::vector<double> samples;
    samples.reserve(n);
    for (std::size_t i = 0; i < n; ++i) {
        const Pair& t = triples[pick(rng)];
        const VehicleState ego = row_to_state(*t.ego, estimation);
        const VehicleState neighbor = row_to_state(*t.neighbor, estimation);
        const Grid grid = grid_spec.centered_at(ego.x, ego.y);
        const QprReport report = qpr_total(ego, {neighbor}, params, costs, grid, convention);
        samples.push_back(report.total);
    }
    return samples;
}

RiskThresholds calibrate_thresholds(std::vector<double> samples, QprConvention convention,
                                    std::string source_tag) {
    if (samples.size() < 10)
        throw InsufficientSamples("threshold calibration needs at least 10 samples, got " +
                                  std::to_string(samples.size()));
    std::sort(samples.begin(), samples.end());
    const auto n = static_cast<double>(samples.size());
    const auto rank = [&](double q) {
        const auto r = static_cast<std::size_t>(std::ceil(q * n));
        return samples[std::max<std::size_t>(r, 1) - 1];
    };
    RiskThresholds t;
    t.t_low = rank(0.30);
    t.t_high = rank(0.70);
    t.sample_count = samples.size();
    t.convention = convention;
    t.source_tag = std::move(source_tag);
    return t;
}

RiskLevel classify_risk(double qpr, const RiskThresholds& thresholds) {
    if (qpr < thresholds.t_low) return RiskLevel::Low;
    if (qpr > thresholds.t_high) return RiskLevel::High;
    return RiskLevel::Medium;
}

namespace {

std::string fixed4(double v) {
    char buf[64];
    auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v, std::chars_format::fixed, 4);
    return std::string(buf, ptr);
}

std::string fill(std::string text, const std::string& key, const std::string& value) {
    std::size_t pos = 0;
    while ((pos = text.find(key, pos)) != std::string::npos) {
        text.replace(pos, key.size(), value);
        pos += value.size();
    }
    return text;
}

std::string template_key(RiskLevel level, Relation relation) {
    std::string key = level == RiskLevel::Low ? "low" : level == RiskLevel::Medium ? "medium" : "high";
    key += relation == Relation::Front ? "_front" : "_rear";
    return key;
}

}  // namespace

std::string RiskNotification::to_text(const NotificationTemplates& templates) const {
    std::string out;
    for (const ParticipantNotice& p : participants) {
        out += p.sentence;
        out += '\n';
    }
    std::string scene_line = fill(templates.scene, "{level}", to_string(scene_level));
    scene_line = fill(scene_line, "{qpr}", fixed4(total));
    out += scene_line;
    return out;
}

RiskNotification risk_notification(const QprReport& report, const RiskThresholds& thresholds,
                                   const NotificationTemplates& templates) {
    if (report.convention != thresholds.convention)
        throw ConventionMismatch("report uses " + std::string(to_string(report.convention)) +
                                 " but thresholds were calibrated under " +
                                 to_string(thresholds.convention));

    RiskNotification out;
    out.total = report.total;
    out.scene_level = classify_risk(report.total, thresholds);
    for (const auto& [id, share] : report.per_vehicle) {
        ParticipantNotice notice;
        notice.id = id;
        notice.qpr_share = share.total();
        notice.level = classify_risk(notice.qpr_share, thresholds);
        notice.relation = share.relation;
        auto it = templates.participant.find(template_key(notice.level, notice.relation));
        std::string sentence = it != templates.participant.end()
                                   ? it->second
                                   : std::string("Vehicle {id}: {level} risk (QPR {qpr}).");
        sentence = fill(sentence, "{id}", std::to_string(id));
        sentence = fill(sentence, "{level}", to_string(notice.level));
        sentence = fill(sentence, "{qpr}", fixed4(notice.qpr_share));
        notice.sentence = std::move(sentence);
        out.participants.push_back(std::move(notice));
    }
    std::sort(out.participants.begin(), out.participants.end(),
              [](const ParticipantNotice& a, const ParticipantNotice& b) {
                  if (a.qpr_share != b.qpr_share) return a.qpr_share > b.qpr_share;
                  return a.id < b.id;
              });
    return out;
}

QprReport assess_scene(const Scene& scene, const DrfParams& params, const CostTable& costs,
                       const GridSpec& grid_spec, QprConvention convention) {
    // Neighbors are already in the ego frame; evaluate there with the ego
    // at the origin. QPR is invariant under that rigid motion.
    VehicleState ego = scene.ego;
    ego.x = 0.0;
    ego.y = 0.0;
    ego.heading = 0.0;
    const Grid grid = grid_spec.centered_at(0.0, 0.0);
    return qpr_total(ego, scene.neighbors, params, costs, grid, convention);
}

}  // namespace safedrive
