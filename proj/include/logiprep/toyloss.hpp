#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <ostream>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "logiprep/record.hpp"

namespace logiprep {

// Single-layer, single-head encoder: x = E[id] + P[pos];
// h = x + softmax(x Wq (x Wk)^T / sqrt(d)) (x Wv) Wo.
// MLM logits h E^T + b (tied), CLS logits h_0 Wc + bc.
struct TinyEncoderParams {
  Eigen::MatrixXd token_emb;  // V x d
  Eigen::MatrixXd pos_emb;    // 128 x d
  Eigen::MatrixXd wq, wk, wv, wo;  // d x d
  Eigen::VectorXd mlm_bias;   // V
  Eigen::MatrixXd cls_w;      // d x 2
  Eigen::VectorXd cls_b;      // 2

  static TinyEncoderParams zeros(std::size_t vocab_size, std::size_t width);
  // Embeddings ~ N(0, embed_scale^2), projection matrices ~ N(0,
  // matrix_scale^2), biases zero. Counter RNG keyed by seed.
  static TinyEncoderParams random(std::size_t vocab_size, std::size_t width, std::uint64_t seed,
                                  double embed_scale = 0.1, double matrix_scale = 0.5);

  std::size_t vocab_size() const { return static_cast<std::size_t>(token_emb.rows()); }
  std::size_t width() const { return static_cast<std::size_t>(token_emb.cols()); }

  // Flat view over every tensor, in declaration order.
  std::size_t parameter_count() const;
  double& coordinate(std::size_t i);
  double coordinate(std::size_t i) const;

  void add_scaled(double alpha, const TinyEncoderParams& other);
  bool all_finite() const;
};

struct JointLossValue {
  double l_smlm = 0.0;
  double l_ecls = 0.0;
  double total = 0.0;  // l_smlm + cls_weight * l_ecls
};

struct LossWeights {
  double mlm = 1.0;  // only changed to isolate one term when testing
  double cls = 1.0;
};

// Throws Error(kInput) when an id or target is outside [0, V), the
// lengths differ, or the record exceeds 128 positions.
JointLossValue forward(const TinyEncoderParams& params, const TrainingRecord& record,
                       const LossWeights& weights = {});

struct LossAndGradient {
  JointLossValue loss;
  TinyEncoderParams grad;
};

LossAndGradient backward(const TinyEncoderParams& params, const TrainingRecord& record,
                         const LossWeights& weights = {});

// argmax of the CLS logits; ties go to label 0.
int predict_cls(const TinyEncoderParams& params, const TrainingRecord& record);

struct ToyEvaluation {
  double l_smlm = 0.0;
  double l_ecls = 0.0;
  double total = 0.0;
  double cls_accuracy = 0.0;
};

// Means over all records.
ToyEvaluation evaluate_toy(const TinyEncoderParams& params, std::span<const TrainingRecord> records,
                           const LossWeights& weights = {});

struct ToyTrainOptions {
  std::size_t steps = 2000;
  double learning_rate = 0.05;
  std::uint64_t seed = 0;
  std::size_t width = 16;
  double embed_scale = 0.1;
  double matrix_scale = 0.5;
  double cls_weight = 1.0;
};

struct LossCurvePoint {
  std::size_t step = 0;
  JointLossValue loss;  // before the update at this step
};

struct ToyTrainResult {
  TinyEncoderParams initial;
  TinyEncoderParams params;
  std::vector<LossCurvePoint> curve;
  std::vector<TrainingRecord> records;
};

// Plain per-record gradient descent, cycling through the records in shard
// order. Vocab size comes from the manifest config (vocab_size) or, when
// absent, from the largest id seen.
ToyTrainResult train_toy(const std::filesystem::path& shards_dir, const ToyTrainOptions& options);
ToyTrainResult train_toy(std::vector<TrainingRecord> records, std::size_t vocab_size,
                         const ToyTrainOptions& options);

// step,l_smlm,l_ecls,total
void write_loss_curve_csv(std::ostream& out, std::span<const LossCurvePoint> curve);

}  // namespace logiprep
