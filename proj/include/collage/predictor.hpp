/**
 * Accuracy surrogate for collage graphs.
 *
 * A small graph-convolutional regressor with hierarchical top-k pooling:
 * each of the `conv_layers` stages computes H <- relu(A_hat H W + b) with
 * A_hat the symmetric-normalized adjacency with self-loops, scores nodes by
 * H w / |w|, gates them by tanh(score), keeps the top ceil(pool_ratio * n)
 * nodes (ties broken by score, then node id, so the result does not depend
 * on row order), and emits a [mean | max] readout of the survivors. The
 * readouts of all stages are summed and fed to an MLP; the scalar output is
 * squashed by a logistic so predictions live in (0, 1).
 *
 * Gradients are exact analytic derivatives with the top-k selection frozen
 * at the evaluation point (straight-through); training is plain Adam on
 * minibatch MSE with a 9:1 train/validation split, early stopping, and
 * best-validation checkpointing. Everything is deterministic for a fixed
 * seed.
 */
#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "collage/graph.hpp"

namespace collage {

struct PredictorConfig {
    int feat_dim = 512;
    int hidden_dim = 128;
    int conv_layers = 3;
    double pool_ratio = 0.5;
    std::vector<int> mlp_dims = {256, 128, 64};

    int readout_dim() const { return 2 * hidden_dim; }
    void validate() const;
    bool operator==(const PredictorConfig&) const = default;
};

struct PredictorParams {
    PredictorConfig config;
    // conv_w[l]: (in x hidden) with in = feat_dim for l=0 else hidden_dim.
    std::vector<Eigen::MatrixXd> conv_w;
    std::vector<Eigen::VectorXd> conv_b;
    // pool_w[l]: hidden_dim scoring vector, normalized at use.
    std::vector<Eigen::VectorXd> pool_w;
    // mlp_w[j]: (out x in); the final layer maps to a single output.
    std::vector<Eigen::MatrixXd> mlp_w;
    std::vector<Eigen::VectorXd> mlp_b;

    static PredictorParams init(const PredictorConfig& config, uint64_t seed);
    /// Zero-valued clone with identical shapes (gradient accumulator).
    PredictorParams zeros_like() const;

    size_t scalar_count() const;
    /// Flat view over every trainable scalar, in a fixed order.
    std::vector<double*> scalars();
    std::vector<const double*> scalars() const;
};

struct LabeledCollage {
    CollageGraph graph;
    double y = 0.0;  // accuracy in [0, 1]
};

struct LossGrad {
    double mse = 0.0;
    PredictorParams grad;
};

struct TrainConfig {
    int batch_size = 512;
    double learning_rate = 0.001;
    int epochs = 500;
    double adam_beta1 = 0.9;
    double adam_beta2 = 0.999;
    double adam_eps = 1e-8;
    double val_fraction = 0.1;  // 9:1 train/validation split
    int patience = 20;
    uint64_t seed = 0;
};

struct EpochStats {
    int epoch = 0;
    double train_mse = 0.0;
    double val_mse = 0.0;
};

struct TrainResult {
    PredictorParams params;  // best validation checkpoint
    std::vector<EpochStats> history;
    int best_epoch = 0;
    double best_val_mse = 0.0;
};

/// Predicted accuracy in (0, 1). Throws ShapeError on dimension mismatch.
double predictor_forward(const PredictorParams& params, const CollageGraph& graph);

/// Batch MSE and its exact gradient. Throws NumericError (with the sample
/// index) if any per-sample loss is non-finite.
LossGrad loss_and_grad(const PredictorParams& params, std::span<const LabeledCollage> batch);

TrainResult train_predictor(const std::vector<LabeledCollage>& dataset,
                            const PredictorConfig& pcfg, const TrainConfig& tcfg);

void save_params(const PredictorParams& params, const std::string& path);
PredictorParams load_params(const std::string& path);
/// Load and require an exact config match.
PredictorParams load_params(const std::string& path, const PredictorConfig& expected);

void write_history_csv(const std::vector<EpochStats>& history, const std::string& path);

}  // namespace collage
