#include "safedrive/memory.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <fstream>

#include <json.hpp>

#include "safedrive/errors.hpp"

namespace safedrive {

namespace {

constexpr int kStoreSchemaVersion = 1;

std::uint64_t fnv1a64(const std::string& s) {
    std::uint64_t h = 1469598103934665603ull;
    for (unsigned char c : s) {
        h ^= c;
        h *= 1099511628211ull;
    }
    return h;
}

std::vector<std::string> tokenize(const std::string& text) {
    std::vector<std::string> tokens;
    std::string current;
    for (char raw : text) {
        const auto c = static_cast<unsigned char>(raw);
        if (std::isalnum(c)) {
            current.push_back(static_cast<char>(std::tolower(c)));
        } else if (!current.empty()) {
            tokens.push_back(std::move(current));
            current.clear();
        }
    }
    if (!current.empty()) tokens.push_back(std::move(current));
    return tokens;
}

}  // namespace

const char* to_string(Outcome o) { return o == Outcome::Correct ? "correct" : "corrected"; }

Outcome outcome_from_string(const std::string& s) {
    if (s == "correct") return Outcome::Correct;
    if (s == "corrected") return Outcome::Corrected;
    throw CorruptStore("unknown outcome: " + s);
}

std::uint64_t HashingEmbedder::token_bucket(const std::string& token, std::size_t dimension) {
    return fnv1a64(token) % dimension;
}

std::vector<double> HashingEmbedder::embed(const std::string& text) const {
    if (text.empty()) throw EmptyText("cannot embed empty text");
    const std::vector<std::string> tokens = tokenize(text);
    if (tokens.empty()) throw EmptyText("text has no word tokens");
    std::vector<double> v(dimension_, 0.0);
    for (const std::string& t : tokens) v[token_bucket(t, dimension_)] += 1.0;
    double norm = 0.0;
    for (double x : v) norm += x * x;
    norm = std::sqrt(norm);
    for (double& x : v) x /= norm;
    return v;
}

double cosine_similarity(const std::vector<double>& a, const std::vector<double>& b) {
    if (a.size() != b.size()) throw DimensionMismatch("vector dimensions differ");
    double dot = 0.0, na = 0.0, nb = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        dot += a[i] * b[i];
        na += a[i] * a[i];
        nb += b[i] * b[i];
    }
    if (na <= 0.0 || nb <= 0.0) return 0.0;
    return dot / (std::sqrt(na) * std::sqrt(nb));
}

VectorStore::VectorStore(std::shared_ptr<const Embedder> embedder)
    : embedder_(std::move(embedder)), dimension_(embedder_->dimension()), embedder_tag_(embedder_->tag()) {}

VectorStore::VectorStore(std::size_t dimension, std::string embedder_tag)
    : dimension_(dimension), embedder_tag_(std::move(embedder_tag)) {}

std::uint64_t VectorStore::update(MemoryRecord record) {
    if (record.embedding.empty()) {
        if (!embedder_) throw BackendUnavailable("store has no embedder to vectorize the record");
        record.embedding = embedder_->embed(record.scene_text);
    }
    if (record.embedding.size() != dimension_)
        throw DimensionMismatch("record embedding has dimension " + std::to_string(record.embedding.size()) +
                                ", store expects " + std::to_string(dimension_));
    double norm = 0.0;
    for (double x : record.embedding) norm += x * x;
    if (!(norm > 0.0)) throw InvalidState("record embedding has zero norm");
    record.record_id = next_id_++;
    records_.push_back(std::move(record));
    return records_.back().record_id;
}

std::vector<std::pair<const MemoryRecord*, double>> VectorStore::retrieve(const std::string& query_text,
                                                                          std::size_t n) const {
    std::vector<std::pair<const MemoryRecord*, double>> out;
    if (n == 0 || records_.empty()) return out;
    if (!embedder_) throw BackendUnavailable("store has no embedder to vectorize the query");
    const std::vector<double> q = embedder_->embed(query_text);
    if (q.size() != dimension_) throw DimensionMismatch("query embedding dimension mismatch");
    out.reserve(records_.size());
    for (const MemoryRecord& r : records_) out.emplace_back(&r, cosine_similarity(q, r.embedding));
    std::sort(out.begin(), out.end(), [](const auto& a, const auto& b) {
        if (a.second != b.second) return a.second > b.second;
        return a.first->record_id < b.first->record_id;
    });
    if (out.size() > n) out.resize(n);
    return out;
}

std::size_t VectorStore::seed(const std::vector<MemoryRecord>& exemplars) {
    std::size_t count = 0;
    for (MemoryRecord r : exemplars) {
        r.outcome = Outcome::Correct;
        update(std::move(r));
        ++count;
    }
    return count;
}

namespace {

nlohmann::json record_to_json(const MemoryRecord& r) {
    nlohmann::json j = {
        {"record_id", r.record_id},
        {"scene_text", r.scene_text},
        {"embedding", r.embedding},
        {"risk_text", r.risk_text},
        {"reasoning", r.reasoning},
        {"action", action_token(r.action)},
        {"outcome", to_string(r.outcome)},
        {"created_at", r.created_at},
    };
    j["reflection"] = r.reflection ? nlohmann::json(*r.reflection) : nlohmann::json(nullptr);
    return j;
}

MemoryRecord record_from_json(const nlohmann::json& j) {
    MemoryRecord r;
    r.record_id = j.at("record_id").get<std::uint64_t>();
    r.scene_text = j.at("scene_text").get<std::string>();
    r.embedding = j.at("embedding").get<std::vector<double>>();
    r.risk_text = j.at("risk_text").get<std::string>();
    r.reasoning = j.at("reasoning").get<std::string>();
    const auto action = action_from_token(j.at("action").get<std::string>());
    if (!action) throw CorruptStore("unknown action token in record");
    r.action = *action;
    r.outcome = outcome_from_string(j.at("outcome").get<std::string>());
    if (!j.at("reflection").is_null()) r.reflection = j.at("reflection").get<std::string>();
    r.created_at = j.at("created_at").get<std::int64_t>();
    return r;
}

}  // namespace

void VectorStore::save(const std::string& path) const {
    std::ofstream out(path);
    if (!out) throw Error("cannot open for writing: " + path);
    nlohmann::json header = {
        {"schema_version", kStoreSchemaVersion},
        {"dimension", dimension_},
        {"embedder_tag", embedder_tag_},
    };
    out << header.dump() << '\n';
    for (const MemoryRecord& r : records_) out << record_to_json(r).dump() << '\n';
}

VectorStore VectorStore::load(const std::string& path, std::shared_ptr<const Embedder> embedder) {
    std::ifstream in(path);
    if (!in) throw Error("cannot open store file: " + path);
    std::string line;
    if (!std::getline(in, line)) throw CorruptStore("empty store file");
    nlohmann::json header;
    try {
        header = nlohmann::json::parse(line);
    } catch (const nlohmann::json::parse_error& e) {
        throw CorruptStore(std::string("bad header line: ") + e.what());
    }
    if (!header.contains("schema_version") || !header.contains("dimension") ||
        !header.contains("embedder_tag"))
        throw CorruptStore("header missing required fields");
    const int version = header.at("schema_version").get<int>();
    if (version != kStoreSchemaVersion)
        throw SchemaVersionMismatch("store schema_version " + std::to_string(version) + ", expected " +
                                    std::to_string(kStoreSchemaVersion));

    VectorStore store(header.at("dimension").get<std::size_t>(),
                      header.at("embedder_tag").get<std::string>());
    if (embedder) {
        if (embedder->dimension() != store.dimension_)
            throw DimensionMismatch("embedder dimension does not match the stored dimension");
        store.embedder_ = std::move(embedder);
    }
    std::size_t line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        nlohmann::json j;
        try {
            j = nlohmann::json::parse(line);
            store.records_.push_back(record_from_json(j));
        } catch (const nlohmann::json::exception& e) {
            throw CorruptStore("record at line " + std::to_string(line_no) + ": " + e.what());
        }
        const MemoryRecord& r = store.records_.back();
        if (r.embedding.size() != store.dimension_)
            throw CorruptStore("record at line " + std::to_string(line_no) + " has wrong dimension");
        store.next_id_ = std::max(store.next_id_, r.record_id + 1);
    }
    return store;
}

namespace {

MemoryRecord exemplar(const std::string& scene_text, const std::string& risk_text,
                      const std::string& reasoning, Action action) {
    MemoryRecord r;
    r.scene_text = scene_text;
    r.risk_text = risk_text;
    r.reasoning = reasoning;
    r.action = action;
    r.outcome = Outcome::Correct;
    return r;
}

}  // namespace

std::vector<MemoryRecord> default_exemplars(DatasetTag tag) {
    switch (tag) {
        case DatasetTag::Highway:
            return {
                exemplar("Ego vehicle 1 in lane 2 (1 lanes to the left, 0 to the right) at (120.0, 8.2) m, "
                         "speed 31.0 m/s, heading 0.00 rad.\n"
                         "Vehicle 4 (Sedan) at relative (22.0, 0.0) m, speed 24.5 m/s, heading 0.00 rad.\n"
                         "Navigation: Follow the current road and keep a safe distance.",
                         "Vehicle 4 ahead: HIGH risk (QPR 41.2031).\nOverall scene risk: HIGH (total QPR 41.2031).",
                         "The leader is much slower and the gap is shrinking fast; the high risk on vehicle 4 "
                         "means closing further would be dangerous, so the right response is to slow down.",
                         Action::Decelerate),
                exemplar("Ego vehicle 1 in lane 3 (0 lanes to the left, 2 to the right) at (310.5, 12.0) m, "
                         "speed 28.0 m/s, heading 0.00 rad.\n"
                         "Vehicle 7 (Truck) at relative (60.0, 0.0) m, speed 27.5 m/s, heading 0.00 rad.\n"
                         "Navigation: Follow the current road and keep a safe distance.",
                         "Vehicle 7 ahead: LOW risk (QPR 0.8140).\nOverall scene risk: LOW (total QPR 0.8140).",
                         "The truck ahead is far and nearly matching speed; all participants are low risk, so "
                         "holding the current speed and lane is appropriate.",
                         Action::Idle),
                exemplar("Ego vehicle 1 in lane 2 (1 lanes to the left, 0 to the right) at (88.0, 8.2) m, "
                         "speed 25.0 m/s, heading 0.00 rad.\n"
                         "Vehicle 9 (Sedan) at relative (-14.0, 3.5) m, speed 33.0 m/s, heading 0.00 rad.\n"
                         "Navigation: Move to the left lane when it is safe.\n",
                         "Vehicle 9 behind: HIGH risk (QPR 55.0204).\nOverall scene risk: HIGH (total QPR 55.0204).",
                         "A much faster vehicle is closing in the target lane from behind and is flagged high "
                         "risk; moving into its path now would force it to brake hard, so the lane change is "
                         "postponed and the lane is kept.",
                         Action::Idle),
            };
        case DatasetTag::Intersection:
            return {
                exemplar("Ego vehicle 1 in unstructured area (no lane markings) at (-28.0, 0.0) m, speed "
                         "10.0 m/s, heading 0.00 rad.\n"
                         "Vehicle 2 (Sedan) at relative (26.5, 3.8) m, speed 0.0 m/s, heading -1.57 rad.\n"
                         "Navigation: Cross the intersection and continue straight.",
                         "Vehicle 2 ahead: MEDIUM risk (QPR 1.0921).\nOverall scene risk: MEDIUM (total QPR 1.0921).",
                         "A vehicle is waiting at the crossing ahead; the risk is moderate and rising as the "
                         "gap closes, so approaching more slowly keeps the situation controllable.",
                         Action::Decelerate),
                exemplar("Ego vehicle 1 in unstructured area (no lane markings) at (-6.0, 0.0) m, speed "
                         "6.0 m/s, heading 0.00 rad.\n"
                         "Vehicle 3 (VRU) at relative (9.0, 2.0) m, speed 1.2 m/s, heading -1.57 rad.\n"
                         "Navigation: Cross the intersection and continue straight.",
                         "Vehicle 3 ahead: HIGH risk (QPR 7.3310).\nOverall scene risk: HIGH (total QPR 7.3310).",
                         "A vulnerable road user is about to enter the conflict area and carries high risk; "
                         "braking protects them and keeps the crossing safe.",
                         Action::Decelerate),
                exemplar("Ego vehicle 1 in unstructured area (no lane markings) at (18.0, 0.0) m, speed "
                         "9.0 m/s, heading 0.00 rad.\n"
                         "Vehicle 2 (Sedan) at relative (-22.0, -3.8) m, speed 0.0 m/s, heading -1.57 rad.\n"
                         "Navigation: Cross the intersection and continue straight.",
                         "Vehicle 2 behind: LOW risk (QPR 0.0000).\nOverall scene risk: LOW (total QPR 0.0000).",
                         "The intersection is already cleared and the waiting vehicle is behind with no risk; "
                         "returning to normal speed is appropriate.",
                         Action::Accelerate),
            };
        case DatasetTag::Roundabout:
            return {
                exemplar("Ego vehicle 1 in unstructured area (no lane markings) at (0.0, -20.0) m, speed "
                         "7.5 m/s, heading 1.57 rad.\n"
                         "Vehicle 2 (Sedan) at relative (16.0, -5.0) m, speed 8.0 m/s, heading -0.90 rad.\n"
                         "Navigation: Enter the roundabout and take the second exit.",
                         "Vehicle 2 ahead: HIGH risk (QPR 12.4402).\nOverall scene risk: HIGH (total QPR 12.4402).",
                         "A circulating vehicle is approaching the entry with priority and high risk; yielding "
                         "by braking before the entry line is required.",
                         Action::Decelerate),
                exemplar("Ego vehicle 1 in unstructured area (no lane markings) at (0.0, -8.0) m, speed "
                         "2.0 m/s, heading 1.57 rad.\n"
                         "Vehicle 2 (Sedan) at relative (24.0, 14.0) m, speed 8.0 m/s, heading 0.85 rad.\n"
                         "Navigation: Enter the roundabout and take the second exit.",
                         "Vehicle 2 ahead: LOW risk (QPR 0.1124).\nOverall scene risk: LOW (total QPR 0.1124).",
                         "The circulating vehicle has passed the entry and is moving away; the gap is "
                         "sufficient to enter, so speeding up to merge is the right move.",
                         Action::Accelerate),
            };
    }
    return {};
}

}  // namespace safedrive
