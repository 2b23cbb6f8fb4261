#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "vptt/cli.hpp"

int main(int argc, char** argv) {
    CLI::App app{"visual-prior prompt personalization toolkit"};
    app.require_subcommand(1);

    std::string config_path;
    app.add_option("-c,--config", config_path, "JSON run config (defaults when omitted)");

    auto* ingest = app.add_subcommand("ingest", "validate and canonicalize a persona file");
    std::string ingest_input, ingest_output;
    ingest->add_option("input", ingest_input, "persona JSONL file")->required();
    ingest->add_option("-o,--output", ingest_output, "canonical persona JSONL to write");

    auto* pers = app.add_subcommand("personalize", "compose personalized prompts");
    vptt::cli::personalize_options popt;
    double tau_override = 0.0;
    std::size_t budget_override = 0, jobs_override = 0;
    pers->add_option("--personas", popt.personas_path, "persona JSONL file")->required();
    pers->add_option("-q,--query", popt.query, "task query text")->required();
    pers->add_option("--persona", popt.persona_id, "single persona id");
    pers->add_flag("--all", popt.all, "run every persona in the file");
    pers->add_option("--method", popt.method, "vprag | brag | persona_only | baseline");
    pers->add_option("--rerank", popt.rerank, "candidate prompts per persona");
    pers->add_option("--model", popt.model_path, "trained feedback model for --rerank");
    pers->add_option("--jobs", jobs_override, "worker threads (overrides config)");
    pers->add_option("--tau", tau_override, "softmax temperature (overrides config)");
    pers->add_option("--word-budget", budget_override, "prompt word budget (overrides config)");
    pers->add_option("-o,--output", popt.output_path, "prompt records JSONL")->required();

    auto* score = app.add_subcommand("score", "score prompt records against personas");
    vptt::cli::score_cmd_options sopt;
    score->add_option("--prompts", sopt.prompts_path, "prompt records JSONL")->required();
    score->add_option("--personas", sopt.personas_path, "persona JSONL file")->required();
    score->add_flag("--baseline-novelty-zero", sopt.baseline_novelty_zero,
                    "force the novelty component to 0 on every record");
    score->add_option("-o,--output", sopt.output_path, "score records JSONL")->required();

    auto* evaluate = app.add_subcommand("evaluate", "aggregate score files into a report");
    vptt::cli::evaluate_options eopt;
    evaluate->add_option("files", eopt.score_files, "score record files")->required();
    evaluate->add_option("--report", eopt.report_path, "JSONL report path");

    auto* bench = app.add_subcommand("benchgen", "scaffold deterministic benchmark personas");
    vptt::cli::benchgen_options bopt;
    bench->add_option("count", bopt.count, "number of personas")->required();
    bench->add_option("-o,--output", bopt.output_path, "persona JSONL to write")->required();

    auto* train = app.add_subcommand("train-feedback", "train the preference re-ranker");
    vptt::cli::train_feedback_options topt;
    train->add_option("--examples", topt.examples_path,
                      "preference examples JSONL (omit for the synthetic set)");
    train->add_option("--synthetic-profiles", topt.synthetic_profiles);
    train->add_option("--synthetic-dim", topt.synthetic_dim);
    train->add_option("--synthetic-seed", topt.synthetic_seed);
    train->add_option("--model-seed", topt.model_seed);
    train->add_option("--input-dim", topt.model.input_dim, "0 infers from the data");
    train->add_option("--lr", topt.train.lr);
    train->add_option("--weight-decay", topt.train.weight_decay);
    train->add_option("--dropout", topt.train.dropout);
    train->add_option("--batch-size", topt.train.batch_size);
    train->add_option("--epochs", topt.train.max_epochs);
    train->add_option("--patience", topt.train.patience);
    train->add_option("--seed", topt.train.seed);
    train->add_option("--train-ratio", topt.train.train_ratio);
    train->add_option("--val-ratio", topt.train.val_ratio);
    train->add_option("--model-out", topt.model_out, "save the trained model here");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int rc = app.exit(e);
        return rc == 0 ? 0 : 1;
    }

    try {
        auto cfg = vptt::cli::load_run_config(config_path);
        if (*ingest) {
            vptt::cli::cmd_ingest(cfg, ingest_input, ingest_output, std::cout);
        } else if (*pers) {
            if (pers->count("--tau") > 0) cfg.retrieval.tau = tau_override;
            if (pers->count("--word-budget") > 0) cfg.retrieval.word_budget = budget_override;
            if (pers->count("--jobs") > 0) popt.jobs = jobs_override;
            vptt::cli::cmd_personalize(cfg, popt, std::cout);
        } else if (*score) {
            vptt::cli::cmd_score(cfg, sopt, std::cout);
        } else if (*evaluate) {
            vptt::cli::cmd_evaluate(cfg, eopt, std::cout);
        } else if (*bench) {
            vptt::cli::cmd_benchgen(cfg, bopt, std::cout);
        } else if (*train) {
            vptt::cli::cmd_train_feedback(cfg, topt, std::cout);
        }
        return 0;
    } catch (const vptt::error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return vptt::cli::exit_code_for(e);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
}
