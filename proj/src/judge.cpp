#include "vptt/judge.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "vptt/common.hpp"
#include "vptt/hash.hpp"

namespace vptt::judge {

const std::string& blind_assignment::method_for(const std::string& label) const {
    for (std::size_t i = 0; i < labels.size(); ++i)
        if (labels[i] == label)
            return methods[i];
    throw error(errc::missing_label, "no method behind label " + label);
}

const std::string& blind_assignment::label_for(const std::string& method) const {
    for (std::size_t i = 0; i < methods.size(); ++i)
        if (methods[i] == method)
            return labels[i];
    throw error(errc::invalid_argument, "method not in assignment: " + method);
}

blind_assignment blind_shuffle(const std::vector<std::string>& methods,
                               const std::string& user_id, std::uint64_t seed) {
    if (methods.empty() || methods.size() > 26)
        throw error(errc::invalid_argument, "need 1..26 methods to blind");
    std::vector<std::size_t> perm(methods.size());
    for (std::size_t i = 0; i < perm.size(); ++i)
        perm[i] = i;
    rng gen(stable_hash(user_id, stable_hash(seed, 0x626c696e64ull))); // "blind"
    for (std::size_t i = perm.size(); i > 1; --i)
        std::swap(perm[i - 1], perm[gen.next_below(i)]);

    blind_assignment out;
    for (std::size_t i = 0; i < methods.size(); ++i) {
        out.labels.push_back(std::string(1, char('A' + i)));
        out.methods.push_back(methods[perm[i]]);
    }
    return out;
}

std::string judge_system_prompt() {
    return "You are an expert visual judge evaluating AI-generated images for visual similarity "
           "to a user's persona.\n"
           "\n"
           "Evaluate how well each generated image captures the VISUAL ELEMENTS from the "
           "persona's posts.\n"
           "\n"
           "**EVALUATION CRITERIA (Visual Similarity):**\n"
           "\n"
           "1. **Objects & Materials**: Same objects, materials, textures visible in posts?\n"
           "2. **Environment & Setting**: Similar locations, backgrounds, environments?\n"
           "3. **Appearance Patterns**: Similar clothing styles, colors, expressions?\n"
           "4. **Lighting & Atmosphere**: Similar lighting, mood, atmosphere?\n"
           "5. **Colors & Composition**: Similar color palettes and visual composition?\n"
           "6. **Cultural/Style Markers**: Similar cultural elements, aesthetic style?\n"
           "\n"
           "**SCORING (0-5 scale, use 0.5 increments):**\n"
           "- **5.0**: Excellent visual similarity - Captures most key visual elements from posts\n"
           "- **4.0-4.5**: Good visual similarity - Several key visual elements present\n"
           "- **3.0-3.5**: Moderate visual similarity - Some visual elements recognizable\n"
           "- **2.0-2.5**: Weak visual similarity - Few visual elements match\n"
           "- **1.0-1.5**: Minimal visual similarity - Barely any visual connection\n"
           "- **0.0-0.5**: No visual similarity - Completely different visual style\n"
           "\n"
           "**IMPORTANT**: Focus on VISUAL similarity, not just conceptual alignment.";
}

namespace {

// Placeholder letters in the response-format section: X, Y, Z, then W
// descending, matching the canonical five-label template X Y Z W V.
char placeholder_letter(std::size_t i) {
    return i < 3 ? char('X' + i) : char('W' - (i - 3));
}

std::string label_list(std::size_t n) {
    std::string out;
    for (std::size_t i = 0; i < n; ++i) {
        if (i)
            out += ", ";
        out += char('A' + i);
    }
    return out;
}

} // namespace

std::string build_judge_prompt(task_kind task, const std::string& base_prompt,
                               std::size_t n_labels) {
    if (n_labels < 1 || n_labels > 26)
        throw error(errc::invalid_argument, "n_labels must be in 1..26");
    const bool gen = task == task_kind::generation;
    const std::string kind = gen ? "generated" : "edited";
    const std::string count = std::to_string(n_labels);
    const std::string last(1, char('A' + n_labels - 1));

    std::ostringstream out;
    out << "TASK: Evaluate these " << count << " " << kind
        << " images for visual similarity to the persona's posts\n\n";
    out << (gen ? "**GENERATION PROMPT:**" : "**EDITING PROMPT:**") << " \"" << base_prompt
        << "\"\n\n";
    if (!gen)
        out << "**IMAGE 1 (Input Image):**\n"
               "The original input image that was edited.\n\n";
    out << "**IMAGE " << (gen ? "1" : "2") << " (Reference - Profile Context):**\n"
        << "Grid of selected posts from the persona's gallery (numbered).\n\n";
    out << "**IMAGE " << (gen ? "2" : "3") << " ("
        << (gen ? "Generated Images to Evaluate" : "Edited Images to Evaluate") << "):**\n"
        << count << " " << kind << " images labeled A through " << last << " (left to right).\n"
        << "Each was " << kind
        << " using a different approach (you don't know which approach was used for which "
           "image).\n\n";
    out << "**YOUR TASK:**\n"
        << "For EACH image (" << label_list(n_labels) << "), score 0-5 based on:\n"
        << "- How similar are the VISUAL ELEMENTS (objects, environment, appearance, lighting, "
           "colors)?\n";
    if (gen)
        out << "\n"; // the canonical generation template splits the bullet list here
    out << "- Do the " << kind << " images look like they could belong to the same persona's "
        << "gallery?\n"
        << "- Are there recognizable visual patterns from the posts?\n\n"
        << "Respond in this EXACT format (one line per image):";
    for (std::size_t i = 0; i < n_labels; ++i) {
        char p = placeholder_letter(i);
        out << "\n" << char('A' + i) << ": Score=" << p << "." << p
            << " - [1-2 sentence explanation of why this score, focusing on specific visual "
               "elements]";
    }
    return out.str();
}

judge_request build_judge_request(task_kind task, const std::string& base_prompt,
                                  std::size_t n_labels, const std::string& profile_canvas,
                                  const std::string& methods_canvas,
                                  const std::string& input_image) {
    judge_request req;
    req.system = judge_system_prompt();
    req.user = build_judge_prompt(task, base_prompt, n_labels);
    if (task == task_kind::editing) {
        if (input_image.empty())
            throw error(errc::invalid_argument, "editing tasks need the input image");
        req.image_refs.push_back(input_image);
    }
    req.image_refs.push_back(profile_canvas);
    req.image_refs.push_back(methods_canvas);
    return req;
}

namespace {

std::string trim(const std::string& s) {
    std::size_t b = s.find_first_not_of(" \t\r\n");
    if (b == std::string::npos)
        return "";
    std::size_t e = s.find_last_not_of(" \t\r\n");
    return s.substr(b, e - b + 1);
}

parse_result fail(std::string code, std::string detail) {
    parse_result r;
    r.error_code = std::move(code);
    r.detail = std::move(detail);
    return r;
}

} // namespace

parse_result parse_judge_response(const std::string& text, std::size_t n_labels,
                                  const parse_options& options) {
    if (n_labels < 1 || n_labels > 26)
        return fail("INVALID_ARGUMENT", "n_labels must be in 1..26");
    parse_result result;
    std::istringstream in(text);
    std::string raw;
    while (std::getline(in, raw)) {
        std::string line = trim(raw);
        if (line.size() < 2 || line[0] < 'A' || line[0] > 'Z' || line[1] != ':')
            continue;
        std::string label(1, line[0]);
        if (line[0] >= char('A' + n_labels))
            continue; // a letter outside the expected label set
        std::string rest = trim(line.substr(2));
        const std::string score_tag = "Score=";
        if (rest.rfind(score_tag, 0) != 0)
            continue;
        rest = rest.substr(score_tag.size());
        std::size_t pos = 0;
        double value;
        try {
            value = std::stod(rest, &pos);
        } catch (const std::exception&) {
            continue;
        }
        std::string tail = rest.substr(pos);
        // Require the " - " separator before the explanation.
        std::size_t dash = tail.find('-');
        if (dash == std::string::npos || trim(tail.substr(0, dash)) != "")
            continue;
        std::string explanation = trim(tail.substr(dash + 1));

        if (result.verdict.scores.count(label))
            return fail("DUPLICATE_LABEL", "label " + label + " scored twice");
        if (!(value >= 0.0 && value <= 5.0))
            return fail("SCORE_OUT_OF_RANGE", "label " + label + " score " + std::to_string(value));
        double snapped = std::round(value * 2.0) / 2.0;
        if (std::fabs(snapped - value) > options.grid_tol) {
            if (!options.round_to_grid)
                return fail("SCORE_OFF_GRID",
                            "label " + label + " score " + std::to_string(value));
            value = snapped;
        } else {
            value = snapped;
        }
        result.verdict.scores[label] = value;
        result.verdict.explanations[label] = explanation;
    }
    for (std::size_t i = 0; i < n_labels; ++i) {
        std::string label(1, char('A' + i));
        if (!result.verdict.scores.count(label))
            return fail("MISSING_LABEL", "no line for label " + label);
    }
    result.ok = true;
    return result;
}

std::map<std::string, double> unblind(const judge_verdict& verdict, const blind_assignment& a) {
    std::map<std::string, double> out;
    for (const auto& [label, score] : verdict.scores)
        out[a.method_for(label)] = score;
    return out;
}

double normalize_likert(double score) {
    if (!(score >= 0.0 && score <= 5.0))
        throw error(errc::score_out_of_range, "likert score " + std::to_string(score));
    return score / 5.0;
}

} // namespace vptt::judge
