#include "logiprep/toyloss.hpp"

#include <array>
#include <cmath>
#include <cstdio>

#include "logiprep/counter_rng.hpp"
#include "logiprep/error.hpp"
#include "logiprep/shards.hpp"

namespace logiprep {

namespace {

using Eigen::MatrixXd;
using Eigen::RowVectorXd;
using Eigen::VectorXd;

// Raw (pointer, size) pairs in declaration order.
template <typename P, typename D>
std::array<std::pair<D*, std::size_t>, 9> flat(P& p) {
  auto sz = [](auto& m) { return static_cast<std::size_t>(m.size()); };
  return {{{p.token_emb.data(), sz(p.token_emb)},
           {p.pos_emb.data(), sz(p.pos_emb)},
           {p.wq.data(), sz(p.wq)},
           {p.wk.data(), sz(p.wk)},
           {p.wv.data(), sz(p.wv)},
           {p.wo.data(), sz(p.wo)},
           {p.mlm_bias.data(), sz(p.mlm_bias)},
           {p.cls_w.data(), sz(p.cls_w)},
           {p.cls_b.data(), sz(p.cls_b)}}};
}

double log_sum_exp(const RowVectorXd& z) {
  const double m = z.maxCoeff();
  return m + std::log((z.array() - m).exp().sum());
}

RowVectorXd softmax(const RowVectorXd& z) {
  RowVectorXd e = (z.array() - z.maxCoeff()).exp();
  return e / e.sum();
}

void check_record(const TinyEncoderParams& p, const TrainingRecord& r) {
  const auto v = static_cast<std::int64_t>(p.vocab_size());
  if (r.input_ids.empty() || r.input_ids.size() != r.mlm_targets.size()) {
    throw Error(ErrorKind::kInput, "toyloss: record ids and targets must be non-empty and equal length");
  }
  if (r.input_ids.size() > static_cast<std::size_t>(p.pos_emb.rows())) {
    throw Error(ErrorKind::kInput, "toyloss: record longer than the position table");
  }
  for (std::size_t i = 0; i < r.input_ids.size(); ++i) {
    if (r.input_ids[i] < 0 || r.input_ids[i] >= v) {
      throw Error(ErrorKind::kInput, "toyloss: id " + std::to_string(r.input_ids[i]) +
                                         " at position " + std::to_string(i) + " outside vocab of " +
                                         std::to_string(v));
    }
    if (r.mlm_targets[i] != kIgnoreTarget && (r.mlm_targets[i] < 0 || r.mlm_targets[i] >= v)) {
      throw Error(ErrorKind::kInput, "toyloss: target " + std::to_string(r.mlm_targets[i]) +
                                         " at position " + std::to_string(i) + " outside vocab");
    }
  }
  if (r.cls_label != 0 && r.cls_label != 1) throw Error(ErrorKind::kInput, "toyloss: cls label not 0/1");
}

struct Trace {
  MatrixXd x, q, k, v, a, c, h;
  std::vector<std::size_t> targets;  // positions with a target
  MatrixXd probs;                    // |targets| x V softmax rows
  RowVectorXd cls_probs;
  JointLossValue loss;
};

Trace run_forward(const TinyEncoderParams& p, const TrainingRecord& r, const LossWeights& w) {
  check_record(p, r);
  const auto n = static_cast<Eigen::Index>(r.input_ids.size());
  const double scale = 1.0 / std::sqrt(static_cast<double>(p.width()));
  Trace t;
  t.x.resize(n, p.token_emb.cols());
  for (Eigen::Index i = 0; i < n; ++i) t.x.row(i) = p.token_emb.row(r.input_ids[i]) + p.pos_emb.row(i);
  t.q = t.x * p.wq;
  t.k = t.x * p.wk;
  t.v = t.x * p.wv;
  MatrixXd s = (t.q * t.k.transpose()) * scale;
  t.a.resize(n, n);
  for (Eigen::Index i = 0; i < n; ++i) t.a.row(i) = softmax(s.row(i));
  t.c = t.a * t.v;
  t.h = t.x + t.c * p.wo;

  for (std::size_t i = 0; i < r.mlm_targets.size(); ++i) {
    if (r.mlm_targets[i] != kIgnoreTarget) t.targets.push_back(i);
  }
  t.probs.resize(static_cast<Eigen::Index>(t.targets.size()), p.token_emb.rows());
  double ce_sum = 0.0;
  for (std::size_t j = 0; j < t.targets.size(); ++j) {
    const auto pos = static_cast<Eigen::Index>(t.targets[j]);
    RowVectorXd z = t.h.row(pos) * p.token_emb.transpose() + p.mlm_bias.transpose();
    ce_sum += log_sum_exp(z) - z(r.mlm_targets[t.targets[j]]);
    t.probs.row(static_cast<Eigen::Index>(j)) = softmax(z);
  }
  t.loss.l_smlm = t.targets.empty() ? 0.0 : ce_sum / static_cast<double>(t.targets.size());

  RowVectorXd u = t.h.row(0) * p.cls_w + p.cls_b.transpose();
  t.loss.l_ecls = log_sum_exp(u) - u(r.cls_label);
  t.cls_probs = softmax(u);
  t.loss.total = w.mlm * t.loss.l_smlm + w.cls * t.loss.l_ecls;
  return t;
}

}  // namespace

TinyEncoderParams TinyEncoderParams::zeros(std::size_t vocab_size, std::size_t width) {
  if (vocab_size == 0 || width == 0) throw Error(ErrorKind::kConfig, "toyloss: vocab size and width must be positive");
  const auto v = static_cast<Eigen::Index>(vocab_size);
  const auto d = static_cast<Eigen::Index>(width);
  TinyEncoderParams p;
  p.token_emb = MatrixXd::Zero(v, d);
  p.pos_emb = MatrixXd::Zero(static_cast<Eigen::Index>(kMaxSequenceLength), d);
  p.wq = MatrixXd::Zero(d, d);
  p.wk = MatrixXd::Zero(d, d);
  p.wv = MatrixXd::Zero(d, d);
  p.wo = MatrixXd::Zero(d, d);
  p.mlm_bias = VectorXd::Zero(v);
  p.cls_w = MatrixXd::Zero(d, 2);
  p.cls_b = VectorXd::Zero(2);
  return p;
}

TinyEncoderParams TinyEncoderParams::random(std::size_t vocab_size, std::size_t width,
                                            std::uint64_t seed, double embed_scale,
                                            double matrix_scale) {
  TinyEncoderParams p = zeros(vocab_size, width);
  auto tensors = flat<TinyEncoderParams, double>(p);
  for (std::size_t t = 0; t < tensors.size(); ++t) {
    // Biases start at zero.
    if (t == 6 || t == 8) continue;
    const double scale = t < 2 ? embed_scale : matrix_scale;
    CounterRng rng = CounterRng::keyed({seed, t});
    auto [data, size] = tensors[t];
    for (std::size_t i = 0; i < size; ++i) {
      // Box-Muller; 1 - u keeps the log argument in (0, 1].
      const double u1 = 1.0 - rng.next_unit();
      const double u2 = rng.next_unit();
      data[i] = scale * std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * M_PI * u2);
    }
  }
  return p;
}

std::size_t TinyEncoderParams::parameter_count() const {
  std::size_t n = 0;
  for (auto [data, size] : flat<const TinyEncoderParams, const double>(*this)) n += size;
  return n;
}

double& TinyEncoderParams::coordinate(std::size_t i) {
  for (auto [data, size] : flat<TinyEncoderParams, double>(*this)) {
    if (i < size) return data[i];
    i -= size;
  }
  throw Error(ErrorKind::kInvariant, "toyloss: coordinate out of range");
}

double TinyEncoderParams::coordinate(std::size_t i) const {
  return const_cast<TinyEncoderParams&>(*this).coordinate(i);
}

void TinyEncoderParams::add_scaled(double alpha, const TinyEncoderParams& o) {
  token_emb += alpha * o.token_emb;
  pos_emb += alpha * o.pos_emb;
  wq += alpha * o.wq;
  wk += alpha * o.wk;
  wv += alpha * o.wv;
  wo += alpha * o.wo;
  mlm_bias += alpha * o.mlm_bias;
  cls_w += alpha * o.cls_w;
  cls_b += alpha * o.cls_b;
}

bool TinyEncoderParams::all_finite() const {
  for (auto [data, size] : flat<const TinyEncoderParams, const double>(*this)) {
    for (std::size_t i = 0; i < size; ++i) {
      if (!std::isfinite(data[i])) return false;
    }
  }
  return true;
}

JointLossValue forward(const TinyEncoderParams& params, const TrainingRecord& record,
                       const LossWeights& weights) {
  return run_forward(params, record, weights).loss;
}

LossAndGradient backward(const TinyEncoderParams& p, const TrainingRecord& r, const LossWeights& w) {
  Trace t = run_forward(p, r, w);
  const auto n = t.x.rows();
  const double scale = 1.0 / std::sqrt(static_cast<double>(p.width()));
  LossAndGradient out{t.loss, TinyEncoderParams::zeros(p.vocab_size(), p.width())};
  TinyEncoderParams& g = out.grad;

  MatrixXd dh = MatrixXd::Zero(n, t.x.cols());
  if (!t.targets.empty()) {
    const double inv = w.mlm / static_cast<double>(t.targets.size());
    for (std::size_t j = 0; j < t.targets.size(); ++j) {
      const auto pos = static_cast<Eigen::Index>(t.targets[j]);
      RowVectorXd dz = t.probs.row(static_cast<Eigen::Index>(j));
      dz(r.mlm_targets[t.targets[j]]) -= 1.0;
      dz *= inv;
      dh.row(pos) += dz * p.token_emb;
      g.token_emb += dz.transpose() * t.h.row(pos);
      g.mlm_bias += dz.transpose();
    }
  }

  RowVectorXd du = t.cls_probs;
  du(r.cls_label) -= 1.0;
  du *= w.cls;
  g.cls_w = t.h.row(0).transpose() * du;
  g.cls_b = du.transpose();
  dh.row(0) += du * p.cls_w.transpose();

  // h = x + c Wo
  MatrixXd dx = dh;
  g.wo = t.c.transpose() * dh;
  MatrixXd dc = dh * p.wo.transpose();
  // c = a v
  MatrixXd da = dc * t.v.transpose();
  MatrixXd dv = t.a.transpose() * dc;
  // a = softmax(s) row-wise
  MatrixXd ds(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const double dot = da.row(i).dot(t.a.row(i));
    ds.row(i) = t.a.row(i).array() * (da.row(i).array() - dot);
  }
  ds *= scale;
  MatrixXd dq = ds * t.k;
  MatrixXd dk = ds.transpose() * t.q;
  g.wq = t.x.transpose() * dq;
  g.wk = t.x.transpose() * dk;
  g.wv = t.x.transpose() * dv;
  dx += dq * p.wq.transpose() + dk * p.wk.transpose() + dv * p.wv.transpose();

  for (Eigen::Index i = 0; i < n; ++i) {
    g.token_emb.row(r.input_ids[static_cast<std::size_t>(i)]) += dx.row(i);
    g.pos_emb.row(i) += dx.row(i);
  }
  return out;
}

int predict_cls(const TinyEncoderParams& params, const TrainingRecord& record) {
  Trace t = run_forward(params, record, {});
  return t.cls_probs(1) > t.cls_probs(0) ? 1 : 0;
}

ToyEvaluation evaluate_toy(const TinyEncoderParams& params, std::span<const TrainingRecord> records,
                           const LossWeights& weights) {
  ToyEvaluation e;
  if (records.empty()) return e;
  std::size_t correct = 0;
  for (const auto& r : records) {
    Trace t = run_forward(params, r, weights);
    e.l_smlm += t.loss.l_smlm;
    e.l_ecls += t.loss.l_ecls;
    e.total += t.loss.total;
    if ((t.cls_probs(1) > t.cls_probs(0) ? 1 : 0) == r.cls_label) ++correct;
  }
  const double n = static_cast<double>(records.size());
  e.l_smlm /= n;
  e.l_ecls /= n;
  e.total /= n;
  e.cls_accuracy = static_cast<double>(correct) / n;
  return e;
}

ToyTrainResult train_toy(std::vector<TrainingRecord> records, std::size_t vocab_size,
                         const ToyTrainOptions& options) {
  if (records.empty()) throw Error(ErrorKind::kInput, "train-toy: no records to train on");
  ToyTrainResult result;
  result.initial = TinyEncoderParams::random(vocab_size, options.width, options.seed, options.embed_scale,
                                              options.matrix_scale);
  result.params = result.initial;
  const LossWeights weights{1.0, options.cls_weight};
  result.curve.reserve(options.steps);
  for (std::size_t step = 0; step < options.steps; ++step) {
    const auto& r = records[step % records.size()];
    LossAndGradient lg = backward(result.params, r, weights);
    result.curve.push_back({step, lg.loss});
    result.params.add_scaled(-options.learning_rate, lg.grad);
  }
  if (!result.params.all_finite()) {
    throw Error(ErrorKind::kInvariant, "train-toy: parameters diverged (non-finite values)");
  }
  result.records = std::move(records);
  return result;
}

ToyTrainResult train_toy(const std::filesystem::path& shards_dir, const ToyTrainOptions& options) {
  ShardSet set = read_shards(shards_dir);
  if (set.records.empty()) throw Error(ErrorKind::kInput, "train-toy: shards in " + shards_dir.string() + " are empty");
  std::size_t vocab_size = 0;
  const auto& cfg = set.manifest.config;
  if (cfg.contains("vocab_size") && cfg["vocab_size"].is_number_unsigned()) {
    vocab_size = cfg["vocab_size"].get<std::size_t>();
  } else {
    for (const auto& r : set.records) {
      for (auto id : r.input_ids) vocab_size = std::max(vocab_size, static_cast<std::size_t>(id) + 1);
      for (auto id : r.mlm_targets) {
        if (id >= 0) vocab_size = std::max(vocab_size, static_cast<std::size_t>(id) + 1);
      }
    }
  }
  return train_toy(std::move(set.records), vocab_size, options);
}

void write_loss_curve_csv(std::ostream& out, std::span<const LossCurvePoint> curve) {
  out << "step,l_smlm,l_ecls,total\n";
  char buf[128];
  for (const auto& pt : curve) {
    std::snprintf(buf, sizeof buf, "%zu,%.17g,%.17g,%.17g\n", pt.step, pt.loss.l_smlm, pt.loss.l_ecls,
                  pt.loss.total);
    out << buf;
  }
}

}  // namespace logiprep
