#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "vptt/cli.hpp"
#include "vptt/hash.hpp"
#include "vptt/persona.hpp"

using namespace vptt;
using namespace vptt::cli;
using nlohmann::json;

namespace {

std::filesystem::path temp_path(const std::string& name) {
    static int counter = 0;
    return std::filesystem::temp_directory_path() /
           ("vptt_cli_" + std::to_string(++counter) + "_" + name);
}

std::string write_file(const std::string& name, const std::string& content) {
    auto p = temp_path(name);
    std::ofstream out(p);
    out << content;
    return p.string();
}

std::vector<json> read_jsonl(const std::string& path) {
    std::ifstream in(path);
    REQUIRE(bool(in));
    std::vector<json> out;
    std::string line;
    while (std::getline(in, line))
        if (!line.empty())
            out.push_back(json::parse(line));
    return out;
}

std::string slurp(const std::string& path) {
    std::ifstream in(path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

std::string scaffold_file(int count) {
    run_config cfg;
    benchgen_options opt;
    opt.count = count;
    opt.output_path = temp_path("personas.jsonl").string();
    std::ostringstream sink;
    cmd_benchgen(cfg, opt, sink);
    return opt.output_path;
}

} // namespace

TEST_CASE("run config loads defaults, files, and rejects unknown keys") {
    run_config defaults = load_run_config("");
    CHECK(defaults.retrieval.tau == 0.1);
    CHECK(defaults.retrieval.word_budget == 150);
    CHECK(defaults.embed_dim == 256);

    auto path = write_file("config.json", R"({
        "tau": 0.2,
        "word_budget": 120,
        "budgets": [["lighting", 4], ["materials", 2]],
        "cluster_k": 3,
        "jobs": 2
    })");
    run_config cfg = load_run_config(path);
    CHECK(cfg.retrieval.tau == 0.2);
    CHECK(cfg.retrieval.word_budget == 120);
    REQUIRE(cfg.retrieval.budgets.size() == 2);
    CHECK(cfg.retrieval.budgets[0].first == "lighting");
    CHECK(cfg.retrieval.budgets[0].second == 4);
    CHECK(cfg.scoring.cluster_k == 3);
    CHECK(cfg.jobs == 2);

    auto bad = write_file("bad.json", R"({"tua": 0.2})");
    CHECK_THROWS_AS(load_run_config(bad), error);
    auto invalid = write_file("invalid.json", R"({"tau": -1.0})");
    CHECK_THROWS_AS(load_run_config(invalid), error);
    auto backend = write_file("backend.json", R"({"embedder": "cloudy"})");
    CHECK_THROWS_AS(load_run_config(backend), error);
    CHECK_THROWS_AS(load_run_config("/nonexistent/config.json"), error);
}

TEST_CASE("config hash is stable and sensitive to settings, not secrets") {
    run_config a, b;
    CHECK(config_hash(a) == config_hash(b));
    CHECK(config_hash(a).size() == 16);
    b.retrieval.tau = 0.2;
    CHECK(config_hash(a) != config_hash(b));
    run_config c;
    c.embed_api_key = "s3cret";
    c.llm_api_url = "https://llm.internal";
    CHECK(config_hash(a) == config_hash(c));
    // canonical dump never leaks secrets
    CHECK(canonical_config_json(c).find("s3cret") == std::string::npos);
    CHECK(canonical_config_json(c).find("llm.internal") == std::string::npos);
}

TEST_CASE("ingest counts accepted and rejected personas") {
    persona good;
    good.id = "user_ok";
    good.demographics = {{"country", "Chile"}, {"city", "Valparaiso"}, {"age", "33"}};
    good.elements["lighting"] = {"harbor dusk glow"};
    for (int i = 0; i < 10; ++i) {
        post q;
        q.id = "p" + std::to_string(i);
        q.caption = "Hill stairs and harbor dusk glow, take " + std::to_string(i) + ".";
        q.element_refs["lighting"] = {"harbor dusk glow"};
        good.posts.push_back(q);
    }
    persona bad = good;
    bad.id = "user_bad";
    bad.posts.resize(4);

    auto input = temp_path("ingest_in.jsonl");
    {
        std::ofstream out(input);
        out << persona_record(good) << "\n" << persona_record(bad) << "\n";
    }
    auto output = temp_path("ingest_out.jsonl").string();
    run_config cfg;
    std::ostringstream sink;
    auto summary = cmd_ingest(cfg, input.string(), output, sink);
    CHECK(summary.accepted == 1);
    CHECK(summary.rejected == 1);
    CHECK(sink.str().find("accepted 1") != std::string::npos);
    CHECK(sink.str().find("rejected 1") != std::string::npos);
    CHECK(sink.str().find("line 2") != std::string::npos);

    // output is a header plus clean persona records, loadable again
    auto records = read_jsonl(output);
    REQUIRE(records.size() == 2);
    CHECK(records[0]["record"] == "header");
    CHECK(records[0]["config_hash"] == config_hash(cfg));
    auto reload = load_personas(output);
    CHECK(reload.set.personas.size() == 1);
    CHECK(reload.rejects.empty());
}

TEST_CASE("benchgen writes the requested count with a header") {
    run_config cfg;
    benchgen_options opt;
    opt.count = 3;
    opt.output_path = temp_path("bench.jsonl").string();
    std::ostringstream sink;
    cmd_benchgen(cfg, opt, sink);
    CHECK(sink.str() == "scaffolded 3 personas to " + opt.output_path + "\n");
    auto records = read_jsonl(opt.output_path);
    REQUIRE(records.size() == 4);
    CHECK(records[0]["record"] == "header");
    CHECK(records[0]["command"] == "benchgen");
    CHECK(records[1]["id"] == "user_000000");
    CHECK(records[3]["id"] == "user_000002");

    benchgen_options zero;
    zero.count = 0;
    zero.output_path = opt.output_path;
    CHECK_THROWS_AS(cmd_benchgen(cfg, zero, sink), error);
    benchgen_options nowhere;
    nowhere.count = 2;
    CHECK_THROWS_AS(cmd_benchgen(cfg, nowhere, sink), error);
}

TEST_CASE("personalize writes one deterministic record per persona") {
    auto personas = scaffold_file(3);
    run_config cfg;
    personalize_options opt;
    opt.personas_path = personas;
    opt.query = "a quiet reading corner at dusk";
    opt.all = true;
    opt.output_path = temp_path("prompts.jsonl").string();
    std::ostringstream sink;
    std::size_t written = cmd_personalize(cfg, opt, sink);
    CHECK(written == 3);

    auto records = read_jsonl(opt.output_path);
    REQUIRE(records.size() == 4);
    CHECK(records[0]["record"] == "header");
    CHECK(records[0]["command"] == "personalize");
    for (std::size_t i = 1; i < records.size(); ++i) {
        const json& r = records[i];
        CHECK(r["record"] == "prompt");
        CHECK(r["method"] == "vprag");
        CHECK(r["query"] == opt.query);
        CHECK(r["n_eff"].get<double>() >= 1.0);
        CHECK(!r["text"].get<std::string>().empty());
        CHECK(r["persona"].get<std::string>().rfind("user_", 0) == 0);
    }
    // records are sorted by persona id
    CHECK(records[1]["persona"] == "user_000000");
    CHECK(records[3]["persona"] == "user_000002");

    // byte-identical on a second run
    personalize_options rerun = opt;
    rerun.output_path = temp_path("prompts2.jsonl").string();
    cmd_personalize(cfg, rerun, sink);
    CHECK(slurp(opt.output_path) == slurp(rerun.output_path));

    // parallel execution produces the same bytes
    personalize_options par = opt;
    par.output_path = temp_path("prompts_par.jsonl").string();
    par.jobs = 3;
    cmd_personalize(cfg, par, sink);
    CHECK(slurp(opt.output_path) == slurp(par.output_path));
}

TEST_CASE("personalize validates its request") {
    auto personas = scaffold_file(2);
    run_config cfg;
    std::ostringstream sink;

    personalize_options opt;
    opt.personas_path = personas;
    opt.output_path = temp_path("p.jsonl").string();
    SUBCASE("query required") {
        opt.all = true;
        CHECK_THROWS_AS(cmd_personalize(cfg, opt, sink), error);
    }
    SUBCASE("target required") {
        opt.query = "q";
        CHECK_THROWS_AS(cmd_personalize(cfg, opt, sink), error);
    }
    SUBCASE("unknown persona") {
        opt.query = "q";
        opt.persona_id = "user_999999";
        CHECK_THROWS_AS(cmd_personalize(cfg, opt, sink), error);
    }
    SUBCASE("unknown method") {
        opt.query = "q";
        opt.all = true;
        opt.method = "telepathy";
        CHECK_THROWS_AS(cmd_personalize(cfg, opt, sink), error);
    }
    SUBCASE("rerank needs a model") {
        opt.query = "q";
        opt.all = true;
        opt.rerank = 4;
        CHECK_THROWS_AS(cmd_personalize(cfg, opt, sink), error);
    }
    SUBCASE("rerank only applies to vprag") {
        opt.query = "q";
        opt.all = true;
        opt.method = "baseline";
        opt.rerank = 4;
        opt.model_path = "whatever.txt";
        CHECK_THROWS_AS(cmd_personalize(cfg, opt, sink), error);
    }
}

TEST_CASE("personalize baseline methods emit the expected text") {
    auto personas = scaffold_file(1);
    run_config cfg;
    std::ostringstream sink;

    personalize_options opt;
    opt.personas_path = personas;
    opt.query = "a quiet reading corner at dusk";
    opt.all = true;

    opt.method = "baseline";
    opt.output_path = temp_path("baseline.jsonl").string();
    cmd_personalize(cfg, opt, sink);
    auto base = read_jsonl(opt.output_path);
    CHECK(base[1]["text"] == opt.query);

    opt.method = "persona_only";
    opt.output_path = temp_path("persona_only.jsonl").string();
    cmd_personalize(cfg, opt, sink);
    auto po = read_jsonl(opt.output_path);
    std::string po_text = po[1]["text"].get<std::string>();
    CHECK(po_text.rfind(opt.query, 0) == 0);
    CHECK(po_text.find("From ") != std::string::npos);

    opt.method = "brag";
    opt.output_path = temp_path("brag.jsonl").string();
    cmd_personalize(cfg, opt, sink);
    auto brag = read_jsonl(opt.output_path);
    CHECK(brag[1]["text"].get<std::string>().size() > po_text.size());
}

TEST_CASE("rerank scores feedback-model candidates per persona") {
    auto personas = scaffold_file(2);
    run_config cfg;
    std::ostringstream sink;

    // train a small synthetic model whose input dim matches the embedder
    train_feedback_options tf;
    tf.synthetic_profiles = 6;
    tf.synthetic_dim = cfg.embed_dim;
    tf.train.max_epochs = 2;
    tf.model_out = temp_path("model.txt").string();
    cmd_train_feedback(cfg, tf, sink);

    personalize_options opt;
    opt.personas_path = personas;
    opt.query = "a quiet reading corner at dusk";
    opt.all = true;
    opt.rerank = 3;
    opt.model_path = tf.model_out;
    opt.output_path = temp_path("reranked.jsonl").string();
    cmd_personalize(cfg, opt, sink);

    auto records = read_jsonl(opt.output_path);
    REQUIRE(records.size() == 3);
    for (std::size_t i = 1; i < records.size(); ++i) {
        const json& r = records[i];
        REQUIRE(r.contains("rerank_selected"));
        CHECK(r["rerank_candidates"].get<std::size_t>() == 3);
        CHECK(r["rerank_selected"].get<std::size_t>() < 3);
        CHECK(!r["text"].get<std::string>().empty());
    }

    // a model whose input width disagrees with the embedder is rejected
    train_feedback_options narrow = tf;
    narrow.synthetic_dim = 16;
    narrow.model_out = temp_path("narrow.txt").string();
    cmd_train_feedback(cfg, narrow, sink);
    personalize_options mismatched = opt;
    mismatched.model_path = narrow.model_out;
    mismatched.output_path = temp_path("mismatched.jsonl").string();
    CHECK_THROWS_AS(cmd_personalize(cfg, mismatched, sink), error);
}

TEST_CASE("score emits one record per prompt and honors the baseline flag") {
    auto personas = scaffold_file(2);
    run_config cfg;
    std::ostringstream sink;

    personalize_options popt;
    popt.personas_path = personas;
    popt.query = "a quiet reading corner at dusk";
    popt.all = true;
    popt.output_path = temp_path("prompts.jsonl").string();
    cmd_personalize(cfg, popt, sink);

    score_cmd_options sopt;
    sopt.prompts_path = popt.output_path;
    sopt.personas_path = personas;
    sopt.output_path = temp_path("scores.jsonl").string();
    std::size_t written = cmd_score(cfg, sopt, sink);
    CHECK(written == 2);
    auto records = read_jsonl(sopt.output_path);
    REQUIRE(records.size() == 3);
    CHECK(records[0]["record"] == "header");
    for (std::size_t i = 1; i < records.size(); ++i) {
        const json& r = records[i];
        CHECK(r["record"] == "score");
        CHECK(r["method"] == "vprag");
        CHECK(r["task"] == popt.query);
        double combined = r["combined"].get<double>();
        double expect = 0.20 * r["pa"].get<double>() + 0.30 * r["gs"].get<double>() +
                        0.30 * r["cp"].get<double>() + 0.20 * r["nv"].get<double>();
        CHECK(combined == doctest::Approx(expect).epsilon(1e-12));
        CHECK(r["nv_applicable"] == true);
    }

    score_cmd_options flat = sopt;
    flat.output_path = temp_path("scores_flat.jsonl").string();
    flat.baseline_novelty_zero = true;
    cmd_score(cfg, flat, sink);
    auto flattened = read_jsonl(flat.output_path);
    for (std::size_t i = 1; i < flattened.size(); ++i) {
        CHECK(flattened[i]["nv"] == 0.0);
        CHECK(flattened[i]["nv_applicable"] == false);
    }

    // prompts naming unknown personas are data errors
    auto orphan = write_file("orphan.jsonl",
                             records[0].dump() + "\n" +
                                 R"({"record":"prompt","persona":"user_x","method":"vprag",)"
                                 R"("query":"q","text":"t"})" "\n");
    score_cmd_options bad = sopt;
    bad.prompts_path = orphan;
    bad.output_path = temp_path("scores_bad.jsonl").string();
    CHECK_THROWS_AS(cmd_score(cfg, bad, sink), error);
}

TEST_CASE("evaluate summarizes methods and correlates two files") {
    auto personas = scaffold_file(2);
    run_config cfg;
    std::ostringstream sink;

    auto make_scores = [&](const std::string& method, const std::string& tag) {
        personalize_options popt;
        popt.personas_path = personas;
        popt.query = "a quiet reading corner at dusk";
        popt.all = true;
        popt.method = method;
        popt.output_path = temp_path(tag + "_prompts.jsonl").string();
        cmd_personalize(cfg, popt, sink);
        score_cmd_options sopt;
        sopt.prompts_path = popt.output_path;
        sopt.personas_path = personas;
        sopt.output_path = temp_path(tag + "_scores.jsonl").string();
        sopt.baseline_novelty_zero = method == "baseline";
        cmd_score(cfg, sopt, sink);
        return sopt.output_path;
    };

    auto vprag_scores = make_scores("vprag", "v");
    auto base_scores = make_scores("baseline", "b");

    // method comparison reads any number of methods from one merged file
    auto merged = temp_path("merged_scores.jsonl").string();
    {
        std::ofstream out(merged);
        out << slurp(vprag_scores) << slurp(base_scores);
    }
    evaluate_options eopt;
    eopt.score_files = {merged};
    eopt.report_path = temp_path("report.jsonl").string();
    std::ostringstream out;
    cmd_evaluate(cfg, eopt, out);
    std::string text = out.str();
    CHECK(text.find("method baseline") != std::string::npos);
    CHECK(text.find("method vprag") != std::string::npos);
    CHECK(text.find("win_rate") != std::string::npos);
    CHECK(text.find("spearman") == std::string::npos);

    auto report = read_jsonl(eopt.report_path);
    REQUIRE(report.size() == 3);
    CHECK(report[0]["record"] == "header");
    CHECK(report[1]["record"] == "method_summary");
    CHECK(report[2]["record"] == "method_summary");
    int best_count = 0;
    for (std::size_t i = 1; i < report.size(); ++i)
        best_count += report[i]["best"].get<bool>() ? 1 : 0;
    CHECK(best_count == 1);

    // a single method wins every unit; effect size against itself is NA
    evaluate_options solo;
    solo.score_files = {vprag_scores};
    std::ostringstream solo_out;
    cmd_evaluate(cfg, solo, solo_out);
    CHECK(solo_out.str().find("win_rate 1") != std::string::npos);
    CHECK(solo_out.str().find("cohens_d NA") != std::string::npos);

    // exactly two files correlate unit-by-unit; identical inputs give rho 1
    evaluate_options twin;
    twin.score_files = {vprag_scores, vprag_scores};
    std::ostringstream twin_out;
    cmd_evaluate(cfg, twin, twin_out);
    CHECK(twin_out.str().find("spearman 1") != std::string::npos);

    // files with different coverage cannot be correlated
    evaluate_options apples;
    apples.score_files = {vprag_scores, base_scores};
    std::ostringstream ignored;
    CHECK_THROWS_AS(cmd_evaluate(cfg, apples, ignored), error);

    evaluate_options none;
    CHECK_THROWS_AS(cmd_evaluate(cfg, none, out), error);
}

TEST_CASE("train-feedback reports split metrics and saves a model") {
    run_config cfg;
    train_feedback_options opt;
    opt.synthetic_profiles = 6;
    opt.synthetic_dim = 16;
    opt.train.max_epochs = 3;
    opt.model_out = temp_path("trained.txt").string();
    std::ostringstream sink;
    auto result = cmd_train_feedback(cfg, opt, sink);
    CHECK(result.train.count == 200); // 4 of 6 profiles of 50 examples each
    CHECK(result.val.count == 50);
    CHECK(result.test.count == 50);
    std::string text = sink.str();
    CHECK(text.find("train mse") != std::string::npos);
    CHECK(text.find("best_epoch") != std::string::npos);
    CHECK(text.find("saved model to") != std::string::npos);
    CHECK(std::filesystem::exists(opt.model_out));

    // examples can come from a JSONL file instead
    auto examples = temp_path("examples.jsonl");
    {
        std::ofstream out(examples);
        rng gen(5);
        for (int p = 0; p < 4; ++p)
            for (int i = 0; i < 30; ++i) {
                json j;
                j["profile_id"] = "pf" + std::to_string(p);
                vec a(8), b(8);
                for (double& x : a) x = gen.next_normal();
                for (double& x : b) x = gen.next_normal();
                j["persona"] = normalize(a);
                j["prompt"] = normalize(b);
                j["label"] = (i % 2) ? 0.9 : 0.1;
                out << j.dump() << "\n";
            }
    }
    train_feedback_options from_file;
    from_file.examples_path = examples.string();
    from_file.train.max_epochs = 2;
    auto r2 = cmd_train_feedback(cfg, from_file, sink);
    CHECK(r2.train.count + r2.val.count + r2.test.count == 120);

    auto malformed = write_file("bad_examples.jsonl", "{\"profile_id\": 3}\n");
    train_feedback_options broken;
    broken.examples_path = malformed;
    CHECK_THROWS_AS(cmd_train_feedback(cfg, broken, sink), error);
}

TEST_CASE("exit codes map error kinds to the documented values") {
    CHECK(exit_code_for(error(errc::invalid_argument, "x")) == 1);
    CHECK(exit_code_for(error(errc::data, "x")) == 2);
    CHECK(exit_code_for(error(errc::budget_too_small, "x")) == 2);
    CHECK(exit_code_for(error(errc::missing_cell, "x")) == 2);
    CHECK(exit_code_for(error(errc::remote, "x")) == 3);
}
