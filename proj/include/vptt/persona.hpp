#pragma once

#include <map>
#include <string>
#include <vector>

#include "vptt/vec.hpp"

namespace vptt {

inline constexpr const char* persona_schema_version = "1";
inline constexpr std::size_t min_valid_posts = 10;

// The nine element categories the pipeline partitions visual vocabulary into.
// Configuration may swap in a different set; personas validate against it.
std::vector<std::string> default_categories();

struct post {
    std::string id;
    std::string caption;
    vec embedding; // unit caption embedding; empty when not yet computed
    // category -> element strings this caption actually uses, each drawn from
    // the persona's element library for that category
    std::map<std::string, std::vector<std::string>> element_refs;
};

// P = (demographics, element library, post history).
struct persona {
    std::string id;
    std::map<std::string, std::string> demographics;
    std::map<std::string, std::vector<std::string>> elements; // category -> library
    std::vector<post> posts;
    std::vector<std::string> preferences;
};

struct persona_set {
    std::vector<persona> personas;
    std::string source_path;
    std::string schema_version = persona_schema_version;
};

struct validation_issue {
    std::string code;   // EMBEDDING_NOT_UNIT, INSUFFICIENT_POSTS, ...
    std::string detail;
};

struct validation_report {
    std::vector<validation_issue> issues;
    std::size_t valid_posts = 0;

    bool ok() const { return issues.empty(); }
    bool has(const std::string& code) const;
};

// Structural checks: non-empty id, library categories drawn from the given
// set, non-empty elements, unique post ids, non-empty captions, unit
// embeddings (within unit_tol) where present, element_refs contained in the
// library, and at least min_posts valid posts.
validation_report validate_persona(const persona& p,
                                   const std::vector<std::string>& categories = default_categories(),
                                   std::size_t min_posts = min_valid_posts,
                                   double unit_tol = 1e-6);

struct load_options {
    std::vector<std::string> categories = default_categories();
    std::size_t min_posts = min_valid_posts;
    // Unit-scale nonzero post embeddings before validating (defensive
    // ingestion; float serialization drifts norms).
    bool normalize_embeddings = false;
};

struct load_reject {
    std::size_t line = 0; // 1-based line number in the source file
    std::string persona_id;
    std::string message;
    std::vector<validation_issue> issues;
};

struct load_result {
    persona_set set;
    std::vector<load_reject> rejects;
};

// Line-delimited JSON, one persona per line, schema_version "1". Records that
// fail to parse or validate are reported with their line number, never
// silently dropped. An unreadable file throws; an empty file loads cleanly.
load_result load_personas(const std::string& path, const load_options& options = {});

// One persona serialized as a single JSONL line (no trailing newline).
std::string persona_record(const persona& p);

void save_personas(const persona_set& set, const std::string& path);

// Deterministic demographics rendering in fixed attribute order (country,
// city, age, occupation, interests), capped at max_words.
std::string persona_summary(const persona& p, std::size_t max_words = 40);

} // namespace vptt
