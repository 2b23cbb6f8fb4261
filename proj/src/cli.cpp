#include "vptt/cli.hpp"

#include <algorithm>
#include <atomic>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <map>
#include <mutex>
#include <ostream>
#include <sstream>
#include <thread>

#include <json.hpp>

#include "vptt/benchgen.hpp"
#include "vptt/hash.hpp"
#include "vptt/stats.hpp"
#include "vptt/textutil.hpp"

namespace vptt::cli {

using nlohmann::json;

namespace {

std::string getenv_or(const char* name, const std::string& fallback) {
    const char* v = std::getenv(name);
    return v != nullptr ? std::string(v) : fallback;
}

template <typename T>
void read_key(const json& j, const char* key, T& into) {
    if (j.contains(key)) into = j.at(key).get<T>();
}

std::vector<std::pair<std::string, std::size_t>> parse_budgets(const json& j) {
    std::vector<std::pair<std::string, std::size_t>> out;
    for (const auto& entry : j) {
        if (!entry.is_array() || entry.size() != 2)
            throw error(errc::data, "budgets entries must be [category, count] pairs");
        out.emplace_back(entry[0].get<std::string>(), entry[1].get<std::size_t>());
    }
    return out;
}

std::vector<std::pair<std::string, double>> parse_rates(const json& j) {
    std::vector<std::pair<std::string, double>> out;
    for (const auto& entry : j) {
        if (!entry.is_array() || entry.size() != 2)
            throw error(errc::data, "override rate entries must be [key, rate] pairs");
        out.emplace_back(entry[0].get<std::string>(), entry[1].get<double>());
    }
    return out;
}

const std::vector<std::string>& known_config_keys() {
    static const std::vector<std::string> keys = {
        "tau",          "budgets",        "word_budget",      "include_summary",
        "composer",     "categories",     "embedder",         "embed_dim",
        "embed_seed",   "element_embed_seed", "remote_embed_model", "cluster_k",
        "cluster_seed", "soft_tau",       "use_soft_cp",      "use_soft_nv",
        "eval_post_budget", "eval_tau",   "jobs",             "scaffold_seed",
        "scaffold_posts", "seed_universe", "scaffold_override_rates", "rerank_seed"};
    return keys;
}

} // namespace

run_config load_run_config(const std::string& path) {
    run_config cfg;
    if (!path.empty()) {
        std::ifstream in(path);
        if (!in) throw error(errc::data, "cannot read config file: " + path);
        json j;
        try {
            in >> j;
        } catch (const json::exception& e) {
            throw error(errc::data, std::string("config parse error: ") + e.what());
        }
        if (!j.is_object()) throw error(errc::data, "config root must be an object");
        const auto& known = known_config_keys();
        for (const auto& [key, value] : j.items()) {
            (void)value;
            if (std::find(known.begin(), known.end(), key) == known.end())
                throw error(errc::data, "unknown config key: " + key);
        }
        try {
            read_key(j, "tau", cfg.retrieval.tau);
            if (j.contains("budgets")) cfg.retrieval.budgets = parse_budgets(j.at("budgets"));
            read_key(j, "word_budget", cfg.retrieval.word_budget);
            read_key(j, "include_summary", cfg.retrieval.include_summary);
            if (j.contains("composer")) {
                auto name = j.at("composer").get<std::string>();
                if (name == "concatenate")
                    cfg.retrieval.composer = vprag::composer_kind::concatenate;
                else if (name == "external_llm")
                    cfg.retrieval.composer = vprag::composer_kind::external_llm;
                else
                    throw error(errc::data, "unknown composer: " + name);
            }
            read_key(j, "categories", cfg.categories);
            read_key(j, "embedder", cfg.embedder_backend);
            read_key(j, "embed_dim", cfg.embed_dim);
            read_key(j, "embed_seed", cfg.embed_seed);
            read_key(j, "element_embed_seed", cfg.element_embed_seed);
            read_key(j, "remote_embed_model", cfg.remote_embed_model);
            read_key(j, "cluster_k", cfg.scoring.cluster_k);
            read_key(j, "cluster_seed", cfg.scoring.cluster_seed);
            read_key(j, "soft_tau", cfg.scoring.soft_tau);
            read_key(j, "use_soft_cp", cfg.scoring.use_soft_cp);
            read_key(j, "use_soft_nv", cfg.scoring.use_soft_nv);
            read_key(j, "eval_post_budget", cfg.scoring.eval_post_budget);
            read_key(j, "eval_tau", cfg.scoring.eval_tau);
            read_key(j, "jobs", cfg.jobs);
            read_key(j, "scaffold_seed", cfg.scaffold_seed);
            read_key(j, "scaffold_posts", cfg.scaffold_posts);
            read_key(j, "seed_universe", cfg.seed_universe);
            if (j.contains("scaffold_override_rates"))
                cfg.scaffold_override_rates = parse_rates(j.at("scaffold_override_rates"));
            read_key(j, "rerank_seed", cfg.rerank_seed);
        } catch (const json::exception& e) {
            throw error(errc::data, std::string("config value error: ") + e.what());
        }
    }
    if (cfg.embedder_backend != "local" && cfg.embedder_backend != "remote")
        throw error(errc::data, "embedder must be 'local' or 'remote'");
    vprag::validate_config(cfg.retrieval);

    cfg.embed_api_url = getenv_or("EMBED_API_URL", cfg.embed_api_url);
    cfg.embed_api_key = getenv_or("EMBED_API_KEY", cfg.embed_api_key);
    cfg.llm_api_url = getenv_or("LLM_API_URL", cfg.llm_api_url);
    cfg.llm_api_key = getenv_or("LLM_API_KEY", cfg.llm_api_key);
    cfg.judge_api_url = getenv_or("JUDGE_API_URL", cfg.judge_api_url);
    cfg.judge_api_key = getenv_or("JUDGE_API_KEY", cfg.judge_api_key);
    return cfg;
}

std::string canonical_config_json(const run_config& cfg) {
    json j;
    j["tau"] = cfg.retrieval.tau;
    json budgets = json::array();
    for (const auto& [cat, n] : cfg.retrieval.budgets) budgets.push_back(json::array({cat, n}));
    j["budgets"] = budgets;
    j["word_budget"] = cfg.retrieval.word_budget;
    j["include_summary"] = cfg.retrieval.include_summary;
    j["composer"] = cfg.retrieval.composer == vprag::composer_kind::concatenate
                        ? "concatenate"
                        : "external_llm";
    j["categories"] = cfg.categories;
    j["embedder"] = cfg.embedder_backend;
    j["embed_dim"] = cfg.embed_dim;
    j["embed_seed"] = cfg.embed_seed;
    j["element_embed_seed"] = cfg.element_embed_seed;
    j["remote_embed_model"] = cfg.remote_embed_model;
    j["cluster_k"] = cfg.scoring.cluster_k;
    j["cluster_seed"] = cfg.scoring.cluster_seed;
    j["soft_tau"] = cfg.scoring.soft_tau;
    j["use_soft_cp"] = cfg.scoring.use_soft_cp;
    j["use_soft_nv"] = cfg.scoring.use_soft_nv;
    j["eval_post_budget"] = cfg.scoring.eval_post_budget;
    j["eval_tau"] = cfg.scoring.eval_tau;
    j["jobs"] = cfg.jobs;
    j["scaffold_seed"] = cfg.scaffold_seed;
    j["scaffold_posts"] = cfg.scaffold_posts;
    j["seed_universe"] = cfg.seed_universe;
    json rates = json::array();
    for (const auto& [key, rate] : cfg.scaffold_override_rates)
        rates.push_back(json::array({key, rate}));
    j["scaffold_override_rates"] = rates;
    j["rerank_seed"] = cfg.rerank_seed;
    return j.dump();
}

std::string config_hash(const run_config& cfg) {
    char buf[17];
    std::snprintf(buf, sizeof(buf), "%016llx",
                  static_cast<unsigned long long>(stable_hash(canonical_config_json(cfg))));
    return buf;
}

embedder_pair make_embedders(const run_config& cfg) {
    embedder_pair pair;
    if (cfg.embedder_backend == "remote") {
        if (cfg.embed_api_url.empty())
            throw error(errc::missing_client, "remote embedder needs EMBED_API_URL");
        pair.post = std::make_shared<remote::remote_embedder>(
            cfg.embed_api_url, cfg.embed_api_key, cfg.remote_embed_model, cfg.embed_dim);
        pair.element = std::make_shared<remote::remote_embedder>(
            cfg.embed_api_url, cfg.embed_api_key, cfg.remote_embed_model + "-element",
            cfg.embed_dim);
    } else {
        pair.post = std::make_shared<embed::local_embedder>(cfg.embed_dim, cfg.embed_seed);
        pair.element =
            std::make_shared<embed::local_embedder>(cfg.embed_dim, cfg.element_embed_seed);
    }
    pair.post = std::make_shared<embed::memo_embedder>(pair.post);
    pair.element = std::make_shared<embed::memo_embedder>(pair.element);
    return pair;
}

namespace {

json header_record(const run_config& cfg, const std::string& command) {
    json j;
    j["record"] = "header";
    j["tool"] = "vptt";
    j["schema"] = "1";
    j["command"] = command;
    j["config_hash"] = config_hash(cfg);
    return j;
}

std::ofstream open_out(const std::string& path) {
    std::ofstream out(path);
    if (!out) throw error(errc::data, "cannot write output file: " + path);
    return out;
}

// Every non-header JSONL record in the file.
std::vector<json> read_records(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw error(errc::data, "cannot read records file: " + path);
    std::vector<json> records;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty()) continue;
        json j;
        try {
            j = json::parse(line);
        } catch (const json::exception& e) {
            throw error(errc::data, path + ":" + std::to_string(lineno) +
                                        ": record parse error: " + e.what());
        }
        if (!j.is_object() || !j.contains("record"))
            throw error(errc::data,
                        path + ":" + std::to_string(lineno) + ": not a record object");
        if (j["record"] == "header") continue;
        records.push_back(std::move(j));
    }
    return records;
}

const persona& find_persona(const persona_set& set, const std::string& id) {
    for (const auto& p : set.personas)
        if (p.id == id) return p;
    throw error(errc::data, "unknown persona id: " + id);
}

} // namespace

ingest_summary cmd_ingest(const run_config& cfg, const std::string& input,
                          const std::string& output, std::ostream& out) {
    load_options opts;
    opts.categories = cfg.categories;
    opts.normalize_embeddings = true;
    auto result = load_personas(input, opts);
    if (!output.empty()) {
        auto sink = open_out(output);
        sink << header_record(cfg, "ingest").dump() << "\n";
        for (const persona& p : result.set.personas)
            sink << persona_record(p) << "\n";
        if (!sink) throw error(errc::data, "short write to " + output);
    }

    ingest_summary summary{result.set.personas.size(), result.rejects.size()};
    out << "accepted " << summary.accepted << "\n";
    out << "rejected " << summary.rejected << "\n";
    for (const auto& reject : result.rejects) {
        out << "  line " << reject.line;
        if (!reject.persona_id.empty()) out << " persona " << reject.persona_id;
        out << ": " << reject.message << "\n";
    }
    return summary;
}

namespace {

json prompt_record(const std::string& query, const std::string& method, const persona& p,
                   const vprag::personalized_prompt& result, std::size_t rerank_candidates,
                   std::size_t rerank_selected) {
    json j;
    j["record"] = "prompt";
    j["persona"] = p.id;
    j["method"] = method;
    j["query"] = query;
    j["text"] = result.text;
    j["summary_included"] = result.summary_included;
    j["elements"] = result.elements;
    j["entropy"] = result.trace.entropy;
    j["n_eff"] = result.trace.n_eff;
    j["selected_posts"] = result.trace.selected_posts;
    json allocations = json::object();
    for (const auto& alloc : result.trace.allocations)
        allocations[alloc.category] = alloc.post_quotas;
    j["allocations"] = allocations;
    if (rerank_candidates > 0) {
        j["rerank_candidates"] = rerank_candidates;
        j["rerank_selected"] = rerank_selected;
    }
    return j;
}

json simple_prompt_record(const std::string& query, const std::string& method, const persona& p,
                          const std::string& text, bool summary_included) {
    json j;
    j["record"] = "prompt";
    j["persona"] = p.id;
    j["method"] = method;
    j["query"] = query;
    j["text"] = text;
    j["summary_included"] = summary_included;
    return j;
}

} // namespace

std::size_t cmd_personalize(const run_config& cfg, const personalize_options& opt,
                            std::ostream& out) {
    if (opt.query.empty()) throw error(errc::invalid_argument, "query must be non-empty");
    if (!opt.all && opt.persona_id.empty())
        throw error(errc::invalid_argument, "need a persona id or --all");
    static const std::vector<std::string> methods = {"vprag", "brag", "persona_only",
                                                     "baseline"};
    if (std::find(methods.begin(), methods.end(), opt.method) == methods.end())
        throw error(errc::invalid_argument, "unknown method: " + opt.method);
    if (opt.rerank > 0 && opt.method != "vprag")
        throw error(errc::invalid_argument, "--rerank applies to the vprag method");
    if (opt.rerank > 0 && opt.model_path.empty())
        throw error(errc::invalid_argument, "--rerank needs a trained model (--model)");

    load_options lopts;
    lopts.categories = cfg.categories;
    lopts.normalize_embeddings = true;
    auto loaded = load_personas(opt.personas_path, lopts);

    std::vector<const persona*> targets;
    if (opt.all) {
        for (const auto& p : loaded.set.personas) targets.push_back(&p);
    } else {
        targets.push_back(&find_persona(loaded.set, opt.persona_id));
    }
    if (targets.empty()) throw error(errc::data, "no valid personas to personalize");

    auto embedders = make_embedders(cfg);

    std::unique_ptr<remote::completion_client> llm;
    if (cfg.retrieval.composer == vprag::composer_kind::external_llm) {
        if (cfg.llm_api_url.empty())
            throw error(errc::missing_client, "external_llm composer needs LLM_API_URL");
        llm = std::make_unique<remote::http_completion_client>(cfg.llm_api_url, cfg.llm_api_key);
    }

    std::unique_ptr<feedback::feedback_model> model;
    if (opt.rerank > 0) {
        model = std::make_unique<feedback::feedback_model>(feedback::load_model(opt.model_path));
        if (model->config().input_dim != embedders.post->dim())
            throw error(errc::dimension_mismatch,
                        "feedback model input dimension does not match the embedder");
    }

    auto run_one = [&](const persona& p) -> json {
        if (opt.method == "baseline")
            return simple_prompt_record(opt.query, opt.method, p, opt.query, false);
        if (opt.method == "persona_only") {
            auto composed = vprag::persona_only_prompt(opt.query, persona_summary(p),
                                                       cfg.retrieval.word_budget);
            return simple_prompt_record(opt.query, opt.method, p, composed.text,
                                        composed.summary_included);
        }
        if (opt.method == "brag") {
            std::vector<std::string> captions;
            for (const auto& ps : p.posts) captions.push_back(ps.caption);
            auto composed =
                vprag::brag_prompt(opt.query, captions, cfg.retrieval.word_budget);
            return simple_prompt_record(opt.query, opt.method, p, composed.text, false);
        }

        auto result = vprag::personalize(opt.query, p, cfg.retrieval, *embedders.post,
                                         *embedders.element, llm.get());
        if (opt.rerank == 0) return prompt_record(opt.query, opt.method, p, result, 0, 0);

        // candidate prompts: canonical composition order first, then seeded
        // shuffles of the selected elements; the model picks the argmax
        std::vector<std::string> base_order;
        for (const auto& el : result.trace.elements) base_order.push_back(el.text);
        std::string summary = persona_summary(p);

        std::vector<std::string> candidates;
        candidates.push_back(result.text);
        for (std::size_t m = 1; m < opt.rerank; ++m) {
            auto order = base_order;
            rng shuffle(mix64(stable_hash(p.id, stable_hash(m, cfg.rerank_seed))));
            for (std::size_t i = order.size(); i > 1; --i)
                std::swap(order[i - 1], order[shuffle.next_below(i)]);
            auto composed = vprag::compose_prompt(opt.query, summary, order,
                                                  cfg.retrieval.word_budget,
                                                  cfg.retrieval.include_summary);
            candidates.push_back(composed.text);
        }

        vec persona_emb = embedders.post->embed_one(summary);
        auto prompt_embs = embedders.post->embed(candidates);
        auto ranked = feedback::rerank(*model, persona_emb, prompt_embs);

        json j = prompt_record(opt.query, opt.method, p, result, candidates.size(),
                               ranked.selected);
        j["text"] = candidates[ranked.selected];
        return j;
    };

    // parallel across personas; records collected and emitted sorted by
    // persona id so thread timing never reaches the output
    std::size_t jobs = opt.jobs > 0 ? opt.jobs : cfg.jobs;
    if (jobs == 0) jobs = 1;
    jobs = std::min(jobs, targets.size());

    std::vector<std::pair<std::string, std::string>> rows(targets.size());
    if (jobs <= 1) {
        for (std::size_t i = 0; i < targets.size(); ++i)
            rows[i] = {targets[i]->id, run_one(*targets[i]).dump()};
    } else {
        std::atomic<std::size_t> next{0};
        std::mutex err_mu;
        std::exception_ptr first_error;
        auto worker = [&]() {
            for (;;) {
                std::size_t i = next.fetch_add(1);
                if (i >= targets.size()) return;
                try {
                    rows[i] = {targets[i]->id, run_one(*targets[i]).dump()};
                } catch (...) {
                    std::lock_guard<std::mutex> lock(err_mu);
                    if (!first_error) first_error = std::current_exception();
                    return;
                }
            }
        };
        std::vector<std::thread> pool;
        for (std::size_t t = 0; t < jobs; ++t) pool.emplace_back(worker);
        for (auto& t : pool) t.join();
        if (first_error) std::rethrow_exception(first_error);
    }
    std::stable_sort(rows.begin(), rows.end(),
                     [](const auto& a, const auto& b) { return a.first < b.first; });

    auto sink = open_out(opt.output_path);
    sink << header_record(cfg, "personalize").dump() << "\n";
    for (const auto& [id, line] : rows) sink << line << "\n";
    if (!sink) throw error(errc::data, "failed writing " + opt.output_path);

    out << "wrote " << rows.size() << " prompt records to " << opt.output_path << "\n";
    return rows.size();
}

std::size_t cmd_score(const run_config& cfg, const score_cmd_options& opt, std::ostream& out) {
    auto prompts = read_records(opt.prompts_path);

    load_options lopts;
    lopts.categories = cfg.categories;
    lopts.normalize_embeddings = true;
    auto loaded = load_personas(opt.personas_path, lopts);

    auto embedders = make_embedders(cfg);
    score::score_options sopts = cfg.scoring;
    if (opt.baseline_novelty_zero) sopts.caption_conditioned = false;

    // contexts are per (persona, query): the reference post set may be
    // query-conditioned under a budgeted evaluation
    std::map<std::string, score::score_context> contexts;

    auto sink = open_out(opt.output_path);
    sink << header_record(cfg, "score").dump() << "\n";

    std::size_t written = 0;
    for (const auto& rec : prompts) {
        if (rec.at("record") != "prompt")
            throw error(errc::data, "score input must contain prompt records");
        std::string persona_id = rec.at("persona").get<std::string>();
        std::string query = rec.value("query", std::string{});
        std::string text = rec.at("text").get<std::string>();
        std::string method = rec.value("method", std::string{"unknown"});

        const persona& p = find_persona(loaded.set, persona_id);
        std::string ctx_key = persona_id + '\x1f' + query;
        auto it = contexts.find(ctx_key);
        if (it == contexts.end())
            it = contexts
                     .emplace(ctx_key,
                              score::make_score_context(p, query, *embedders.post, sopts))
                     .first;

        auto components =
            score::score_prompt(text, it->second, *embedders.post, *embedders.element, sopts);

        json j;
        j["record"] = "score";
        j["persona"] = persona_id;
        j["method"] = method;
        j["task"] = query;
        j["pa"] = components.pa;
        j["gs"] = components.gs;
        j["cp"] = components.cp;
        j["nv"] = components.nv;
        j["nv_applicable"] = components.nv_applicable;
        j["combined"] = components.combined();
        j["constrained"] = components.constrained();
        sink << j.dump() << "\n";
        ++written;
    }
    if (!sink) throw error(errc::data, "failed writing " + opt.output_path);
    out << "wrote " << written << " score records to " << opt.output_path << "\n";
    return written;
}

void cmd_evaluate(const run_config& cfg, const evaluate_options& opt, std::ostream& out) {
    if (opt.score_files.empty())
        throw error(errc::invalid_argument, "evaluate needs at least one score file");

    auto load_table = [](const std::string& path) {
        stats::score_table table;
        for (const auto& rec : read_records(path)) {
            if (rec.at("record") != "score") continue;
            table.add(rec.at("persona").get<std::string>(),
                      rec.at("method").get<std::string>(),
                      rec.value("task", std::string{}), rec.at("combined").get<double>());
        }
        return table;
    };

    // comparison table: duplicates within a file are data errors, while a
    // cell repeated across files is the same pipeline re-scored (the two-file
    // correlation case) and the first file's value stands
    stats::score_table merged;
    for (const auto& path : opt.score_files) {
        stats::score_table table = load_table(path);
        for (const auto& [persona, task] : table.units())
            for (const auto& m : table.methods())
                if (const double* v = table.find(persona, m, task))
                    if (merged.find(persona, m, task) == nullptr)
                        merged.add(persona, m, task, *v);
    }
    if (merged.empty()) throw error(errc::data, "no score records found");

    auto methods = merged.methods();
    auto wins = stats::win_rate(merged);
    auto units = merged.units();

    std::string best;
    double best_mean = 0.0;
    for (const auto& m : methods) {
        double mean = merged.method_mean(m);
        if (best.empty() || mean > best_mean) {
            best = m;
            best_mean = mean;
        }
    }

    vec best_values;
    for (const auto& [persona, task] : units)
        best_values.push_back(merged.value(persona, best, task));

    json report = json::array();
    for (const auto& m : methods) {
        double mean = merged.method_mean(m);
        std::string d_text = "NA";
        if (m != best) {
            vec values;
            for (const auto& [persona, task] : units)
                values.push_back(merged.value(persona, m, task));
            try {
                char buf[32];
                std::snprintf(buf, sizeof(buf), "%.6f", stats::cohens_d(best_values, values));
                d_text = buf;
            } catch (const error& e) {
                if (e.code() != errc::degenerate_variance) throw;
            }
        }
        out << "method " << m << " mean " << mean << " win_rate " << wins.at(m) << " cohens_d "
            << d_text << "\n";
        json j;
        j["record"] = "method_summary";
        j["method"] = m;
        j["mean"] = mean;
        j["win_rate"] = wins.at(m);
        j["cohens_d"] = d_text;
        j["best"] = m == best;
        report.push_back(j);
    }

    if (opt.score_files.size() == 2) {
        auto ta = load_table(opt.score_files[0]);
        auto tb = load_table(opt.score_files[1]);
        if (ta.units() != tb.units() || ta.methods() != tb.methods())
            throw error(errc::data, "score files cover different keys; cannot correlate");
        vec a, b;
        for (const auto& [persona, task] : ta.units())
            for (const auto& m : ta.methods()) {
                a.push_back(ta.value(persona, m, task));
                b.push_back(tb.value(persona, m, task));
            }
        double rho = stats::spearman_rho(a, b);
        out << "spearman " << rho << "\n";
        json j;
        j["record"] = "correlation";
        j["spearman"] = rho;
        report.push_back(j);
    }

    if (!opt.report_path.empty()) {
        auto sink = open_out(opt.report_path);
        sink << header_record(cfg, "evaluate").dump() << "\n";
        for (const auto& j : report) sink << j.dump() << "\n";
        if (!sink) throw error(errc::data, "failed writing " + opt.report_path);
    }
}

void cmd_benchgen(const run_config& cfg, const benchgen_options& opt, std::ostream& out) {
    if (opt.count <= 0) throw error(errc::invalid_argument, "count must be positive");
    if (opt.output_path.empty()) throw error(errc::invalid_argument, "benchgen needs an output path");

    benchgen::scaffold_config scfg;
    scfg.seed_universe = cfg.seed_universe;
    scfg.rng_seed = cfg.scaffold_seed;
    scfg.post_count = cfg.scaffold_posts;
    scfg.categories = cfg.categories;
    if (!cfg.scaffold_override_rates.empty())
        scfg.override_rates = cfg.scaffold_override_rates;

    auto sink = open_out(opt.output_path);
    sink << header_record(cfg, "benchgen").dump() << "\n";
    std::size_t made = 0;
    for (long long i = 0; i < opt.count; ++i, ++made)
        sink << persona_record(benchgen::scaffold_persona(static_cast<std::uint64_t>(i), scfg))
             << "\n";
    if (!sink) throw error(errc::data, "short write to " + opt.output_path);
    out << "scaffolded " << made << " personas to " << opt.output_path << "\n";
}

feedback::train_result cmd_train_feedback(const run_config& cfg,
                                          const train_feedback_options& opt, std::ostream& out) {
    (void)cfg;
    std::vector<feedback::preference_example> examples;
    if (opt.examples_path.empty()) {
        examples = feedback::build_synthetic_set(opt.synthetic_profiles, opt.synthetic_dim,
                                                 opt.synthetic_seed);
    } else {
        std::ifstream in(opt.examples_path);
        if (!in) throw error(errc::data, "cannot read examples file: " + opt.examples_path);
        std::string line;
        std::size_t lineno = 0;
        while (std::getline(in, line)) {
            ++lineno;
            if (line.empty()) continue;
            json j;
            try {
                j = json::parse(line);
                feedback::preference_example ex;
                ex.profile_id = j.at("profile_id").get<std::string>();
                ex.persona = j.at("persona").get<vec>();
                ex.prompt = j.at("prompt").get<vec>();
                ex.label = j.at("label").get<double>();
                examples.push_back(std::move(ex));
            } catch (const json::exception& e) {
                throw error(errc::data, opt.examples_path + ":" + std::to_string(lineno) +
                                            ": bad example: " + e.what());
            }
        }
        if (examples.empty()) throw error(errc::data, "no examples in " + opt.examples_path);
    }

    feedback::model_config mcfg = opt.model;
    if (mcfg.input_dim == 0) mcfg.input_dim = examples.front().persona.size();

    feedback::feedback_model model(mcfg, opt.model_seed);
    auto result = feedback::train(model, examples, opt.train);

    auto emit = [&out](const char* name, const feedback::split_metrics& m) {
        out << name << " mse " << m.mse << " mae " << m.mae << " accuracy " << m.accuracy
            << " examples " << m.count << "\n";
    };
    emit("train", result.train);
    emit("val", result.val);
    emit("test", result.test);
    out << "best_epoch " << result.best_epoch << " epochs_run " << result.history.size() << "\n";

    if (!opt.model_out.empty()) {
        feedback::save_model(model, opt.model_out);
        out << "saved model to " << opt.model_out << "\n";
    }
    return result;
}

int exit_code_for(const error& e) {
    switch (e.code()) {
    case errc::invalid_argument:
        return 1;
    case errc::remote:
        return 3;
    default:
        return 2;
    }
}

} // namespace vptt::cli
