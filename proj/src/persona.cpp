#include "vptt/persona.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include <json.hpp>

#include "vptt/textutil.hpp"

namespace vptt {

using nlohmann::json;

std::vector<std::string> default_categories() {
    return {"foreground", "background", "lighting",   "pose",       "actions",
            "materials",  "environment", "appearance", "objects"};
}

bool validation_report::has(const std::string& code) const {
    return std::any_of(issues.begin(), issues.end(),
                       [&](const validation_issue& i) { return i.code == code; });
}

validation_report validate_persona(const persona& p, const std::vector<std::string>& categories,
                                   std::size_t min_posts, double unit_tol) {
    validation_report report;
    auto flag = [&](std::string code, std::string detail) {
        report.issues.push_back({std::move(code), std::move(detail)});
    };

    if (p.id.empty())
        flag("EMPTY_ID", "persona id is empty");

    std::set<std::string> known(categories.begin(), categories.end());
    for (const auto& [category, library] : p.elements) {
        if (!known.count(category))
            flag("UNKNOWN_CATEGORY", "element library category '" + category + "'");
        for (const std::string& e : library)
            if (e.empty())
                flag("EMPTY_ELEMENT", "empty element in category '" + category + "'");
    }

    std::set<std::string> post_ids;
    for (const post& q : p.posts) {
        bool valid = true;
        if (!q.id.empty() && !post_ids.insert(q.id).second) {
            flag("DUPLICATE_POST_ID", "post id '" + q.id + "'");
            valid = false;
        }
        if (q.caption.empty()) {
            flag("EMPTY_CAPTION", "post '" + q.id + "' has no caption");
            valid = false;
        }
        if (!q.embedding.empty() && std::fabs(l2_norm(q.embedding) - 1.0) > unit_tol) {
            flag("EMBEDDING_NOT_UNIT", "post '" + q.id + "' embedding norm " +
                                           std::to_string(l2_norm(q.embedding)));
            valid = false;
        }
        for (const auto& [category, refs] : q.element_refs) {
            auto lib = p.elements.find(category);
            for (const std::string& e : refs) {
                if (lib == p.elements.end() ||
                    std::find(lib->second.begin(), lib->second.end(), e) == lib->second.end()) {
                    flag("ELEMENT_NOT_IN_LIBRARY",
                         "post '" + q.id + "' references '" + e + "' (" + category + ")");
                    valid = false;
                }
            }
        }
        if (valid)
            ++report.valid_posts;
    }

    if (report.valid_posts < min_posts)
        flag("INSUFFICIENT_POSTS", "insufficient posts: " + std::to_string(report.valid_posts) +
                                       " valid, need " + std::to_string(min_posts));
    return report;
}

namespace {

json elements_to_json(const std::map<std::string, std::vector<std::string>>& m) {
    json out = json::object();
    for (const auto& [k, v] : m)
        out[k] = v;
    return out;
}

std::map<std::string, std::vector<std::string>> elements_from_json(const json& j) {
    std::map<std::string, std::vector<std::string>> out;
    for (auto it = j.begin(); it != j.end(); ++it)
        out[it.key()] = it.value().get<std::vector<std::string>>();
    return out;
}

json persona_to_json(const persona& p) {
    json posts = json::array();
    for (const post& q : p.posts) {
        json pj = {{"id", q.id}, {"caption", q.caption}};
        if (!q.embedding.empty())
            pj["embedding"] = q.embedding;
        if (!q.element_refs.empty())
            pj["element_refs"] = elements_to_json(q.element_refs);
        posts.push_back(std::move(pj));
    }
    return json{{"schema_version", persona_schema_version},
                {"id", p.id},
                {"demographics", p.demographics},
                {"elements", elements_to_json(p.elements)},
                {"posts", std::move(posts)},
                {"preferences", p.preferences}};
}

persona persona_from_json(const json& j) {
    persona p;
    p.id = j.at("id").get<std::string>();
    if (j.contains("demographics"))
        p.demographics = j["demographics"].get<std::map<std::string, std::string>>();
    if (j.contains("elements"))
        p.elements = elements_from_json(j["elements"]);
    if (j.contains("preferences"))
        p.preferences = j["preferences"].get<std::vector<std::string>>();
    if (j.contains("posts")) {
        for (const json& pj : j["posts"]) {
            post q;
            q.id = pj.value("id", "");
            q.caption = pj.value("caption", "");
            if (pj.contains("embedding"))
                q.embedding = pj["embedding"].get<vec>();
            if (pj.contains("element_refs"))
                q.element_refs = elements_from_json(pj["element_refs"]);
            p.posts.push_back(std::move(q));
        }
    }
    return p;
}

} // namespace

load_result load_personas(const std::string& path, const load_options& options) {
    std::ifstream in(path);
    if (!in)
        throw error(errc::data, "cannot open persona file: " + path);

    load_result result;
    result.set.source_path = path;
    std::set<std::string> seen_ids;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.find_first_not_of(" \t\r") == std::string::npos)
            continue;
        json j;
        try {
            j = json::parse(line);
        } catch (const json::exception& e) {
            result.rejects.push_back({line_no, "", std::string("malformed JSON: ") + e.what(), {}});
            continue;
        }
        if (j.is_object() && j.value("record", "") == "header")
            continue; // tool-emitted stream header, not a persona
        std::string version = j.value("schema_version", "");
        if (version != persona_schema_version) {
            result.rejects.push_back(
                {line_no, j.value("id", ""), "unsupported schema_version '" + version + "'", {}});
            continue;
        }
        persona p;
        try {
            p = persona_from_json(j);
        } catch (const json::exception& e) {
            result.rejects.push_back(
                {line_no, j.value("id", ""), std::string("bad record shape: ") + e.what(), {}});
            continue;
        }
        if (options.normalize_embeddings) {
            for (post& q : p.posts)
                if (!q.embedding.empty() && l2_norm(q.embedding) > 1e-12)
                    q.embedding = normalize(q.embedding);
        }
        if (!seen_ids.insert(p.id).second) {
            result.rejects.push_back({line_no, p.id, "duplicate persona id", {}});
            continue;
        }
        validation_report report = validate_persona(p, options.categories, options.min_posts);
        if (!report.ok()) {
            std::string summary = report.issues.front().code;
            if (report.has("INSUFFICIENT_POSTS"))
                summary = "insufficient posts";
            result.rejects.push_back({line_no, p.id, summary, report.issues});
            continue;
        }
        result.set.personas.push_back(std::move(p));
    }
    return result;
}

std::string persona_record(const persona& p) {
    return persona_to_json(p).dump();
}

void save_personas(const persona_set& set, const std::string& path) {
    std::ofstream out(path, std::ios::trunc);
    if (!out)
        throw error(errc::data, "cannot write persona file: " + path);
    for (const persona& p : set.personas)
        out << persona_record(p) << '\n';
    if (!out)
        throw error(errc::data, "short write to persona file: " + path);
}

std::string persona_summary(const persona& p, std::size_t max_words) {
    auto field = [&](const char* k) -> const std::string* {
        auto it = p.demographics.find(k);
        return (it == p.demographics.end() || it->second.empty()) ? nullptr : &it->second;
    };
    const std::string* country = field("country");
    const std::string* city = field("city");
    const std::string* age = field("age");
    const std::string* occupation = field("occupation");
    const std::string* interests = field("interests");

    std::ostringstream out;
    if (country || city) {
        out << "From ";
        if (country)
            out << *country;
        if (country && city)
            out << ", ";
        if (city)
            out << *city;
        out << ".";
    }
    if (age)
        out << (out.tellp() > 0 ? " " : "") << "Age " << *age << ".";
    if (occupation)
        out << (out.tellp() > 0 ? " " : "") << "Works as " << *occupation << ".";
    if (interests)
        out << (out.tellp() > 0 ? " " : "") << "Interests: " << *interests << ".";
    return truncate_words(out.str(), max_words);
}

} // namespace vptt
