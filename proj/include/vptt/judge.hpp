#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

// Blind VLM judging: deterministic per-user label shuffles, fixed prompt
// templates, and a strict parser for the judge's line-oriented replies. The
// gateway only assembles text and ordered image references; transport belongs
// to the caller.

namespace vptt::judge {

enum class task_kind { generation, editing };

// Upper-case labels A.. assigned to methods by a per-user deterministic
// Fisher-Yates shuffle seeded from (seed, user_id).
struct blind_assignment {
    std::vector<std::string> labels;  // "A", "B", ... in order
    std::vector<std::string> methods; // methods[i] hides behind labels[i]

    const std::string& method_for(const std::string& label) const;
    const std::string& label_for(const std::string& method) const;
};

blind_assignment blind_shuffle(const std::vector<std::string>& methods,
                               const std::string& user_id, std::uint64_t seed);

// The fixed system instruction, verbatim.
std::string judge_system_prompt();

// The task-specific user instruction with {base_prompt} substituted and the
// label list sized to n_labels (1..26). n_labels = 5 reproduces the canonical
// template byte-for-byte.
std::string build_judge_prompt(task_kind task, const std::string& base_prompt,
                               std::size_t n_labels);

struct judge_request {
    std::string system;
    std::string user;
    std::vector<std::string> image_refs; // transport order
};

// Editing tasks lead with the original input image, then the profile canvas,
// then the methods canvas; generation tasks drop the input image.
judge_request build_judge_request(task_kind task, const std::string& base_prompt,
                                  std::size_t n_labels, const std::string& profile_canvas,
                                  const std::string& methods_canvas,
                                  const std::string& input_image = "");

struct judge_verdict {
    std::map<std::string, double> scores;       // label -> 0..5 on the 0.5 grid
    std::map<std::string, std::string> explanations;
};

struct parse_result {
    bool ok = false;
    judge_verdict verdict;
    std::string error_code; // MISSING_LABEL, DUPLICATE_LABEL, SCORE_OUT_OF_RANGE, SCORE_OFF_GRID
    std::string detail;
};

struct parse_options {
    double grid_tol = 1e-9;    // snap distance to the 0.5 grid
    bool round_to_grid = false; // round to the nearest 0.5 instead of failing
};

// Scans for lines of the form "<LABEL>: Score=<number> - <explanation>",
// tolerating surrounding whitespace and unrelated lines. Never throws.
parse_result parse_judge_response(const std::string& text, std::size_t n_labels,
                                  const parse_options& options = {});

// Map a parsed verdict back through the blind assignment: method -> score.
std::map<std::string, double> unblind(const judge_verdict& verdict, const blind_assignment& a);

// Likert 0..5 -> [0, 1].
double normalize_likert(double score);

} // namespace vptt::judge
