#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "vptt/hash.hpp"
#include "vptt/vec.hpp"

// Preference re-ranker: a small cross-attention network scoring how well a
// composed prompt suits a persona. Hand-rolled forward/backward over a flat
// parameter vector so gradients can be finite-difference checked and models
// serialize exactly.

namespace vptt::feedback {

struct preference_example {
    std::string profile_id; // split unit; all examples of a profile share a split
    vec persona;
    vec prompt;
    double label = 0.0; // target in [0, 1]
};

struct model_config {
    std::size_t input_dim = 0;
    std::size_t d_model = 128;
    std::size_t ffn_dim = 256;
    std::size_t heads = 4;
    std::size_t head_hidden1 = 128;
    std::size_t head_hidden2 = 64;
};

struct tensor_info {
    std::string name;
    std::size_t offset = 0;
    std::size_t rows = 0;
    std::size_t cols = 0; // 0 for vectors
    std::size_t size() const { return rows * (cols == 0 ? 1 : cols); }
};

class feedback_model {
  public:
    feedback_model(model_config cfg, std::uint64_t seed = 7);

    const model_config& config() const { return cfg_; }
    const std::vector<tensor_info>& layout() const { return layout_; }
    std::vector<double>& params() { return params_; }
    const std::vector<double>& params() const { return params_; }

    // Deterministic inference (dropout off).
    double predict(const vec& persona, const vec& prompt) const;

    // Mean squared error over the batch; when grad is non-null the parameter
    // gradient is accumulated into it (must be zeroed by the caller). A
    // non-null dropout_stream enables inverted dropout at the given rate.
    double batch_loss(const std::vector<const preference_example*>& batch,
                      std::vector<double>* grad = nullptr, rng* dropout_stream = nullptr,
                      double dropout = 0.0) const;

  private:
    model_config cfg_;
    std::vector<tensor_info> layout_;
    std::vector<double> params_;
};

struct train_config {
    double lr = 0.001;
    double weight_decay = 0.05;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double eps = 1e-8;
    double dropout = 0.2;
    std::size_t batch_size = 16;
    std::size_t max_epochs = 200;
    std::size_t patience = 10;
    std::uint64_t seed = 1;
    // profile-count ratios; test takes the remainder
    double train_ratio = 0.65;
    double val_ratio = 0.10;
    // labels within this band of 0.5 are excluded from accuracy
    double neutral_band = 0.05;
};

struct split_metrics {
    double mse = 0.0;
    double mae = 0.0;
    double accuracy = 0.0; // over non-neutral labels, threshold 0.5
    std::size_t count = 0;
    std::size_t scored = 0; // examples entering accuracy
};

struct epoch_record {
    std::size_t epoch = 0;
    double train_mse = 0.0;
    double val_mse = 0.0;
};

struct train_result {
    split_metrics train;
    split_metrics val;
    split_metrics test;
    std::vector<epoch_record> history;
    std::size_t best_epoch = 0;
};

// AdamW + MSE with profile-level splits and early stopping on validation
// loss (best parameters restored).
train_result train(feedback_model& model, const std::vector<preference_example>& examples,
                   const train_config& cfg = {});

split_metrics evaluate(const feedback_model& model,
                       const std::vector<preference_example>& examples,
                       double neutral_band = 0.05);

struct gradient_check_config {
    std::size_t samples = 200;   // parameters probed
    std::size_t batch_limit = 8; // examples used for the loss
    double fd_step = 1e-5;
    std::uint64_t seed = 3;
};

struct gradient_check_result {
    double max_rel_err = 0.0;
    std::size_t checked = 0;
    std::size_t skipped = 0; // analytic and numeric both ~0 (dead paths)
};

// Central finite differences against the analytic gradient, dropout off.
gradient_check_result gradient_check(const feedback_model& model,
                                     const std::vector<preference_example>& examples,
                                     const gradient_check_config& cfg = {});

struct rerank_result {
    std::size_t selected = 0; // ties resolve to the lowest index
    std::vector<double> scores;
};

rerank_result rerank(const feedback_model& model, const vec& persona,
                     const std::vector<vec>& prompts);

// 20 aligned (label 0.9), 20 misaligned (0.1) and 10 neutral (0.5) examples
// per profile around a random unit persona direction.
std::vector<preference_example> build_synthetic_set(std::size_t profiles, std::size_t dim,
                                                    std::uint64_t seed = 11);

void save_model(const feedback_model& model, const std::string& path);
feedback_model load_model(const std::string& path);

} // namespace vptt::feedback
