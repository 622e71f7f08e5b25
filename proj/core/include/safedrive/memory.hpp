#pragma once

#include <cstdint>
#include <memory>
#include <string>
#include <vector>

#include "safedrive/scene.hpp"

namespace safedrive {

enum class Outcome { Correct, Corrected };

const char* to_string(Outcome o);
Outcome outcome_from_string(const std::string& s);

struct MemoryRecord {
    std::uint64_t record_id = 0;  // assigned by the store
    std::string scene_text;
    std::vector<double> embedding;  // filled by the store when empty
    std::string risk_text;
    std::string reasoning;
    Action action = Action::Idle;
    Outcome outcome = Outcome::Correct;
    std::optional<std::string> reflection;
    std::int64_t created_at = 0;  // logical timestamp

    bool operator==(const MemoryRecord&) const = default;
};

class Embedder {
public:
    virtual ~Embedder() = default;
    virtual std::vector<double> embed(const std::string& text) const = 0;
    virtual std::size_t dimension() const = 0;
    virtual std::string tag() const = 0;
};

// Offline default: lowercase word tokens hashed (FNV-1a 64) into a
// fixed-dimension term-frequency vector, L2-normalized. Deterministic
// across platforms, so the whole agent loop runs without a network.
class HashingEmbedder : public Embedder {
public:
    explicit HashingEmbedder(std::size_t dimension = 256) : dimension_(dimension) {}
    std::vector<double> embed(const std::string& text) const override;
    std::size_t dimension() const override { return dimension_; }
    std::string tag() const override { return "hashing-tf-" + std::to_string(dimension_); }

    static std::uint64_t token_bucket(const std::string& token, std::size_t dimension);

private:
    std::size_t dimension_;
};

// Append-only store of embedded driving experiences.
class VectorStore {
public:
    explicit VectorStore(std::shared_ptr<const Embedder> embedder);
    VectorStore(std::size_t dimension, std::string embedder_tag);  // for loading

    std::size_t size() const { return records_.size(); }
    std::size_t dimension() const { return dimension_; }
    const std::string& embedder_tag() const { return embedder_tag_; }
    const std::vector<MemoryRecord>& records() const { return records_; }

    // Appends a record (embedding it if needed) and returns its id.
    std::uint64_t update(MemoryRecord record);

    // Cosine-similarity top-n over all records; ties broken by ascending
    // record id. n = 0 or an empty store yields an empty list.
    std::vector<std::pair<const MemoryRecord*, double>> retrieve(const std::string& query_text,
                                                                 std::size_t n) const;

    std::size_t seed(const std::vector<MemoryRecord>& exemplars);

    void save(const std::string& path) const;
    static VectorStore load(const std::string& path, std::shared_ptr<const Embedder> embedder = nullptr);

private:
    std::shared_ptr<const Embedder> embedder_;
    std::size_t dimension_;
    std::string embedder_tag_;
    std::vector<MemoryRecord> records_;
    std::uint64_t next_id_ = 1;
};

double cosine_similarity(const std::vector<double>& a, const std::vector<double>& b);

// Hand-written starter experiences per scenario family (3 highway,
// 3 intersection, 2 roundabout).
std::vector<MemoryRecord> default_exemplars(DatasetTag tag);

}  // namespace safedrive
