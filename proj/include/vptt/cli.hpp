#pragma once

#include <cstdint>
#include <iosfwd>
#include <memory>
#include <string>
#include <utility>
#include <vector>

#include "vptt/common.hpp"
#include "vptt/embedding.hpp"
#include "vptt/feedback.hpp"
#include "vptt/score.hpp"
#include "vptt/vprag.hpp"

// Command layer: one structured run config (JSON file), environment variables
// only for service secrets, line-delimited record outputs whose first line is
// a header carrying the config hash. Every command is deterministic given
// config + seeds, remote backends aside.

namespace vptt::cli {

struct run_config {
    vprag::retrieval_config retrieval = vprag::retrieval_config::defaults();
    score::score_options scoring;
    std::vector<std::string> categories = default_categories();

    std::string embedder_backend = "local"; // local | remote
    std::size_t embed_dim = 256;
    std::uint64_t embed_seed = 0;
    std::uint64_t element_embed_seed = 1;
    std::string remote_embed_model = "vptt-embed-1";

    std::size_t jobs = 1;

    std::uint64_t scaffold_seed = 42;
    std::size_t scaffold_posts = 30;
    std::uint64_t seed_universe = 200000;
    std::vector<std::pair<std::string, double>> scaffold_override_rates; // empty -> shipped defaults
    std::uint64_t rerank_seed = 101;

    // secrets: environment only (EMBED_API_URL, EMBED_API_KEY, LLM_API_URL,
    // LLM_API_KEY, JUDGE_API_URL, JUDGE_API_KEY); never serialized or hashed
    std::string embed_api_url, embed_api_key;
    std::string llm_api_url, llm_api_key;
    std::string judge_api_url, judge_api_key;
};

// Empty path loads pure defaults. Unknown keys are data errors; secrets are
// then overlaid from the environment.
run_config load_run_config(const std::string& path);

// Canonical JSON of every non-secret setting (sorted keys, defaults filled).
std::string canonical_config_json(const run_config& cfg);

// 16 hex digits over the canonical JSON; stamped into output headers.
std::string config_hash(const run_config& cfg);

struct embedder_pair {
    std::shared_ptr<const embed::embedder> post;
    std::shared_ptr<const embed::embedder> element;
};

// Post- and element-level embedders per the config, both memoized. The remote
// backend requires EMBED_API_URL.
embedder_pair make_embedders(const run_config& cfg);

struct ingest_summary {
    std::size_t accepted = 0;
    std::size_t rejected = 0;
};

ingest_summary cmd_ingest(const run_config& cfg, const std::string& input,
                          const std::string& output, std::ostream& out);

struct personalize_options {
    std::string personas_path;
    std::string output_path;
    std::string query;
    std::string persona_id;       // one persona, or
    bool all = false;             // every valid persona in the file
    std::string method = "vprag"; // vprag | brag | persona_only | baseline
    std::size_t rerank = 0;       // candidate prompts per persona; 0 disables
    std::string model_path;       // trained feedback model, required for rerank
    std::size_t jobs = 0;         // 0 -> cfg.jobs
};

// Returns the number of prompt records written.
std::size_t cmd_personalize(const run_config& cfg, const personalize_options& opt,
                            std::ostream& out);

struct score_cmd_options {
    std::string prompts_path;
    std::string personas_path;
    std::string output_path;
    bool baseline_novelty_zero = false; // force NV = 0 on every record
};

std::size_t cmd_score(const run_config& cfg, const score_cmd_options& opt, std::ostream& out);

struct evaluate_options {
    std::vector<std::string> score_files;
    std::string report_path; // optional JSONL report
};

void cmd_evaluate(const run_config& cfg, const evaluate_options& opt, std::ostream& out);

struct benchgen_options {
    long long count = 0;
    std::string output_path;
};

void cmd_benchgen(const run_config& cfg, const benchgen_options& opt, std::ostream& out);

struct train_feedback_options {
    std::string examples_path; // JSONL; empty trains on the synthetic set
    std::size_t synthetic_profiles = 40;
    std::size_t synthetic_dim = 32;
    std::uint64_t synthetic_seed = 11;
    std::uint64_t model_seed = 7;
    feedback::model_config model; // input_dim 0 -> inferred from the data
    feedback::train_config train;
    std::string model_out; // optional save path
};

feedback::train_result cmd_train_feedback(const run_config& cfg,
                                          const train_feedback_options& opt, std::ostream& out);

// 0 success, 1 usage, 2 data, 3 remote.
int exit_code_for(const error& e);

} // namespace vptt::cli
