#pragma once

// Parametric estimation function mapping an L x N measurement matrix to an
// N_s x M condition field: fully connected -> 3D transposed convolution ->
// two 3D convolutions, leaky-rectified except for the final affine layer.
// Trained by plain mini-batch gradient descent on the summed squared error
// of min-max normalized conditions.

#include <array>
#include <cstdint>
#include <span>
#include <vector>

#include <Eigen/Core>

namespace metaiot {

struct NetworkArch {
    int input_rows = 0;     // L
    int input_cols = 0;     // N
    int n_conditions = 0;   // N_s
    std::array<int, 3> grid{0, 0, 0};  // nx, ny, nz; M = nx * ny * nz

    // Only the fully connected layer, mapping straight to N_s * M outputs.
    bool fc_only = false;

    int fc_channels = 8;    // fc output is reshaped to fc_channels x coarse grid
    int deconv_channels = 16;
    int deconv_kernel = 4;
    int deconv_stride = 2;
    int conv1_channels = 8;
    int conv1_kernel = 3;
    int conv2_kernel = 3;   // conv2 emits n_conditions channels

    int input_size() const noexcept { return input_rows * input_cols; }
    int cells() const noexcept { return grid[0] * grid[1] * grid[2]; }
    int output_size() const noexcept { return n_conditions * cells(); }
    std::array<int, 3> coarse_grid() const noexcept;
    int fc_out() const noexcept;
    Eigen::Index parameter_count() const noexcept;
};

void validate(const NetworkArch& arch);

inline constexpr double kLeakySlope = 0.01;

struct Normalization {
    Eigen::VectorXd input_mean;  // per entry of the flattened L x N input
    Eigen::VectorXd input_std;   // strictly positive
    Eigen::VectorXd cond_min;    // per condition
    Eigen::VectorXd cond_max;

    Eigen::VectorXd normalize_input(const Eigen::MatrixXd& measurement) const;
    // N_s x M physical <-> [-1, 1]
    Eigen::MatrixXd normalize_output(const Eigen::MatrixXd& field) const;
    Eigen::MatrixXd denormalize_output(const Eigen::MatrixXd& normalized) const;
};

struct EstimatorParams {
    NetworkArch arch;
    Eigen::VectorXd weights;  // all layer weights and biases, see the layout in estimator.cpp
    Normalization norm;
};

struct TrainConfig {
    double lr = 1e-3;
    int epochs = 100;
    int batch_size = 32;
    std::uint64_t seed = 0;
    double weight_init_scale = 2.4;
    double momentum = 0.0;  // 0 is plain gradient descent
    double validation_fraction = 0.1;
};

void validate(const TrainConfig& cfg);

// measurement: L x N dB; truth: N_s x M physical units.
struct LabeledSample {
    Eigen::MatrixXd measurement;
    Eigen::MatrixXd truth;
};

Normalization fit_normalization(std::span<const LabeledSample> samples);

EstimatorParams init_params(const NetworkArch& arch, const Normalization& norm, double init_scale, std::uint64_t seed);

Eigen::MatrixXd forward(const EstimatorParams& params, const Eigen::MatrixXd& measurement);

// Sum of squared differences; shapes must match.
double loss(const Eigen::MatrixXd& estimate, const Eigen::MatrixXd& truth);

struct GradientResult {
    Eigen::VectorXd gradient;  // d(mean batch loss) / d(weights)
    double loss = 0;           // mean batch loss on normalized values
};

GradientResult backward(const EstimatorParams& params, std::span<const LabeledSample> batch);

// Mean normalized loss without gradients.
double batch_loss(const EstimatorParams& params, std::span<const LabeledSample> batch);

struct TrainResult {
    EstimatorParams params;
    std::vector<double> train_loss;  // [0] before training, then running mean per epoch
    std::vector<double> val_loss;    // [0] before training, then after each epoch
    int best_epoch = 0;
};

TrainResult train(const NetworkArch& arch, std::span<const LabeledSample> train_set, const TrainConfig& cfg);

struct EvaluationReport {
    std::size_t samples = 0;
    Eigen::VectorXd rmse;       // per condition, physical units
    Eigen::VectorXd mae;        // per condition, physical units
    double mean_loss = 0;       // normalized summed squared error per sample
    double normalized_rmse = 0; // sqrt(mean_loss / (N_s * M))
    Eigen::MatrixXd cell_rmse;  // M x N_s, physical units
};

EvaluationReport evaluate(const EstimatorParams& params, std::span<const LabeledSample> test_set);

// Scores arbitrary predictions (N_s x M physical) against the same normalization.
EvaluationReport evaluate_predictions(std::span<const Eigen::MatrixXd> predictions,
                                      std::span<const LabeledSample> test_set, const Normalization& norm);

// Per-condition mean of the training truths, broadcast over every cell.
Eigen::MatrixXd constant_mean_predictor(std::span<const LabeledSample> train_set);

} // namespace metaiot
