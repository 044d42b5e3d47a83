#include "tabseq/nn.hpp"

#include <algorithm>
#include <cmath>
#include <iostream>
#include <numeric>
#include <ostream>
#include <stdexcept>

namespace tabseq {
namespace nn {

namespace {

MatrixXd he_uniform(Eigen::Index rows, Eigen::Index cols, Eigen::Index fan_in,
                    std::mt19937_64& rng) {
  const double limit = std::sqrt(6.0 / static_cast<double>(std::max<Eigen::Index>(fan_in, 1)));
  std::uniform_real_distribution<double> u(-limit, limit);
  MatrixXd w(rows, cols);
  for (Eigen::Index i = 0; i < rows; ++i)
    for (Eigen::Index j = 0; j < cols; ++j) w(i, j) = u(rng);
  return w;
}

// d(softmax)/d(logits) applied row by row: dS_i = A_i o (dA_i - <dA_i, A_i>)
MatrixXd softmax_rows_backward(const MatrixXd& softmax_out, const MatrixXd& d_softmax) {
  MatrixXd d_logits(softmax_out.rows(), softmax_out.cols());
  for (Eigen::Index i = 0; i < softmax_out.rows(); ++i) {
    const double inner = d_softmax.row(i).dot(softmax_out.row(i));
    d_logits.row(i) =
        softmax_out.row(i).array() * (d_softmax.row(i).array() - inner);
  }
  return d_logits;
}

MatrixXd rows_subset(const MatrixXd& x, const std::vector<Eigen::Index>& idx, std::size_t begin,
                     std::size_t end) {
  MatrixXd out(static_cast<Eigen::Index>(end - begin), x.cols());
  for (std::size_t i = begin; i < end; ++i)
    out.row(static_cast<Eigen::Index>(i - begin)) = x.row(idx[i]);
  return out;
}

struct ParamRefs {
  std::vector<MatrixXd*> params;
  std::vector<const MatrixXd*> grads;
};

ParamRefs dae_param_refs(DaeModel& model, const DaeGrads& g) {
  ParamRefs refs;
  auto add = [&](MatrixXd& p, const MatrixXd& gr) {
    refs.params.push_back(&p);
    refs.grads.push_back(&gr);
  };
  if (model.attn.has_embedding()) {
    add(model.attn.w_embed, g.attn.w_embed);
    add(model.attn.b_embed, g.attn.b_embed);
  }
  for (int h = 0; h < model.attn.heads; ++h) {
    add(model.attn.wq[static_cast<std::size_t>(h)], g.attn.wq[static_cast<std::size_t>(h)]);
    add(model.attn.wk[static_cast<std::size_t>(h)], g.attn.wk[static_cast<std::size_t>(h)]);
    add(model.attn.wv[static_cast<std::size_t>(h)], g.attn.wv[static_cast<std::size_t>(h)]);
  }
  add(model.attn.w_out, g.attn.w_out);
  add(model.dae.w_enc, g.w_enc);
  add(model.dae.b_enc, g.b_enc);
  add(model.dae.w_dec, g.w_dec);
  add(model.dae.b_dec, g.b_dec);
  return refs;
}

double clamp01_eps(double p) { return std::min(std::max(p, 1e-7), 1.0 - 1e-7); }

}  // namespace

// ---------------------------------------------------------------------------
// Elementwise / row ops
// ---------------------------------------------------------------------------

MatrixXd softmax_rows(const MatrixXd& x) {
  MatrixXd out(x.rows(), x.cols());
  for (Eigen::Index i = 0; i < x.rows(); ++i) {
    const double mx = x.row(i).maxCoeff();
    Eigen::ArrayXd e = (x.row(i).array() - mx).exp();
    out.row(i) = e / e.sum();
  }
  return out;
}

MatrixXd relu(const MatrixXd& x) { return x.cwiseMax(0.0); }

MatrixXd sigmoid(const MatrixXd& x) {
  return ((-x.array()).exp() + 1.0).inverse().matrix();
}

double mse_loss(const MatrixXd& target, const MatrixXd& recon) {
  if (target.rows() != recon.rows() || target.cols() != recon.cols())
    throw std::invalid_argument("mse_loss: shape mismatch");
  return (target - recon).array().square().mean();
}

double bce_loss(const std::vector<int>& y, const MatrixXd& prob) {
  if (static_cast<Eigen::Index>(y.size()) != prob.rows() || prob.cols() != 1)
    throw std::invalid_argument("bce_loss: shape mismatch");
  double loss = 0.0;
  for (std::size_t i = 0; i < y.size(); ++i) {
    const double p = clamp01_eps(prob(static_cast<Eigen::Index>(i), 0));
    loss -= y[i] != 0 ? std::log(p) : std::log(1.0 - p);
  }
  return loss / static_cast<double>(y.size());
}

double ce_loss(const std::vector<int>& y, const MatrixXd& prob) {
  if (static_cast<Eigen::Index>(y.size()) != prob.rows())
    throw std::invalid_argument("ce_loss: shape mismatch");
  double loss = 0.0;
  for (std::size_t i = 0; i < y.size(); ++i)
    loss -= std::log(clamp01_eps(prob(static_cast<Eigen::Index>(i), y[i])));
  return loss / static_cast<double>(y.size());
}

// ---------------------------------------------------------------------------
// Multi-head attention over feature tokens
// ---------------------------------------------------------------------------

MatrixXd mha_forward(const MatrixXd& x, const AttentionParams& p, MhaCache* cache) {
  if (x.cols() != p.input_dim)
    throw std::invalid_argument("mha_forward: expected " + std::to_string(p.input_dim) +
                                " input columns, got " + std::to_string(x.cols()));
  if (p.heads * p.head_dim != p.model_dim)
    throw std::invalid_argument("mha_forward: heads * head_dim != model_dim");
  if (p.has_embedding() != (p.input_dim != p.model_dim))
    throw std::invalid_argument("mha_forward: embedding presence inconsistent with dims");

  const MatrixXd embedded =
      p.has_embedding() ? MatrixXd((x * p.w_embed).rowwise() + p.b_embed.row(0)) : x;

  const Eigen::Index batch = x.rows();
  const int tokens = p.model_dim;
  const int dk = p.head_dim;
  const double inv_sqrt_dk = 1.0 / std::sqrt(static_cast<double>(dk));

  MatrixXd pooled(batch, p.heads * dk);
  if (cache) {
    cache->attn.assign(static_cast<std::size_t>(batch), {});
    cache->q.assign(static_cast<std::size_t>(batch), {});
    cache->k.assign(static_cast<std::size_t>(batch), {});
    cache->v.assign(static_cast<std::size_t>(batch), {});
  }

  for (Eigen::Index b = 0; b < batch; ++b) {
    const Eigen::VectorXd t = embedded.row(b).transpose();  // tokens x 1
    for (int h = 0; h < p.heads; ++h) {
      const MatrixXd q = t * p.wq[static_cast<std::size_t>(h)];  // tokens x dk
      const MatrixXd k = t * p.wk[static_cast<std::size_t>(h)];
      const MatrixXd v = t * p.wv[static_cast<std::size_t>(h)];
      const MatrixXd attn = softmax_rows(q * k.transpose() * inv_sqrt_dk);
      const MatrixXd head = attn * v;  // tokens x dk
      pooled.row(b).segment(h * dk, dk) = head.colwise().mean();
      if (cache) {
        cache->attn[static_cast<std::size_t>(b)].push_back(attn);
        cache->q[static_cast<std::size_t>(b)].push_back(q);
        cache->k[static_cast<std::size_t>(b)].push_back(k);
        cache->v[static_cast<std::size_t>(b)].push_back(v);
      }
    }
    (void)tokens;
  }

  if (cache) {
    cache->input = x;
    cache->embedded = embedded;
    cache->pooled = pooled;
    cache->recorded = true;
  }
  return pooled * p.w_out;
}

MatrixXd mha_token_outputs(const Eigen::VectorXd& tokens, const AttentionParams& p) {
  const int dk = p.head_dim;
  const double inv_sqrt_dk = 1.0 / std::sqrt(static_cast<double>(dk));
  MatrixXd concat(tokens.size(), p.heads * dk);
  for (int h = 0; h < p.heads; ++h) {
    const MatrixXd q = tokens * p.wq[static_cast<std::size_t>(h)];
    const MatrixXd k = tokens * p.wk[static_cast<std::size_t>(h)];
    const MatrixXd v = tokens * p.wv[static_cast<std::size_t>(h)];
    concat.middleCols(h * dk, dk) = softmax_rows(q * k.transpose() * inv_sqrt_dk) * v;
  }
  return concat;
}

AttentionGrads mha_backward(const MatrixXd& d_out, const AttentionParams& p,
                            const MhaCache& cache, MatrixXd* d_input) {
  if (!cache.recorded) throw std::logic_error("mha_backward: forward pass was not recorded");

  const Eigen::Index batch = cache.input.rows();
  const int tokens = p.model_dim;
  const int dk = p.head_dim;
  const double inv_sqrt_dk = 1.0 / std::sqrt(static_cast<double>(dk));

  AttentionGrads g;
  g.w_out = cache.pooled.transpose() * d_out;
  g.wq.assign(static_cast<std::size_t>(p.heads), MatrixXd::Zero(1, dk));
  g.wk.assign(static_cast<std::size_t>(p.heads), MatrixXd::Zero(1, dk));
  g.wv.assign(static_cast<std::size_t>(p.heads), MatrixXd::Zero(1, dk));

  const MatrixXd d_pooled = d_out * p.w_out.transpose();  // batch x heads*dk
  MatrixXd d_embedded = MatrixXd::Zero(batch, tokens);

  for (Eigen::Index b = 0; b < batch; ++b) {
    const Eigen::VectorXd t = cache.embedded.row(b).transpose();
    Eigen::VectorXd dt = Eigen::VectorXd::Zero(tokens);
    for (int h = 0; h < p.heads; ++h) {
      const std::size_t hb = static_cast<std::size_t>(h);
      const MatrixXd& attn = cache.attn[static_cast<std::size_t>(b)][hb];
      const MatrixXd& q = cache.q[static_cast<std::size_t>(b)][hb];
      const MatrixXd& k = cache.k[static_cast<std::size_t>(b)][hb];
      const MatrixXd& v = cache.v[static_cast<std::size_t>(b)][hb];

      // head output was mean-pooled over tokens
      const MatrixXd d_head = Eigen::VectorXd::Ones(tokens) *
                              (d_pooled.row(b).segment(h * dk, dk) /
                               static_cast<double>(tokens));
      const MatrixXd d_attn = d_head * v.transpose();
      const MatrixXd d_v = attn.transpose() * d_head;
      const MatrixXd d_scores = softmax_rows_backward(attn, d_attn) * inv_sqrt_dk;
      const MatrixXd d_q = d_scores * k;
      const MatrixXd d_k = d_scores.transpose() * q;

      g.wq[hb] += t.transpose() * d_q;
      g.wk[hb] += t.transpose() * d_k;
      g.wv[hb] += t.transpose() * d_v;
      dt += d_q * p.wq[hb].transpose() + d_k * p.wk[hb].transpose() +
            d_v * p.wv[hb].transpose();
    }
    d_embedded.row(b) = dt.transpose();
  }

  if (p.has_embedding()) {
    g.w_embed = cache.input.transpose() * d_embedded;
    g.b_embed = d_embedded.colwise().sum();
    if (d_input) *d_input = d_embedded * p.w_embed.transpose();
  } else {
    if (d_input) *d_input = d_embedded;
  }
  return g;
}

// ---------------------------------------------------------------------------
// DAE
// ---------------------------------------------------------------------------

DaeForward dae_forward(const MatrixXd& x_noisy, const MatrixXd& x_clean,
                       const AttentionParams& attn, const DaeParams& dae, bool record) {
  if (x_noisy.rows() != x_clean.rows() || x_noisy.cols() != x_clean.cols())
    throw std::invalid_argument("dae_forward: noisy/clean shape mismatch");
  if (x_clean.size() > 0 && (x_clean.minCoeff() < -2.0 || x_clean.maxCoeff() > 3.0))
    std::cerr << "[tabseq] dae_forward: input values far outside [0, 1]; "
                 "did you forget to scale?\n";

  DaeForward fwd;
  fwd.mha_out = mha_forward(x_noisy, attn, record ? &fwd.mha : nullptr);
  fwd.z_pre = (fwd.mha_out * dae.w_enc).rowwise() + dae.b_enc.row(0);
  fwd.z = relu(fwd.z_pre);
  const MatrixXd y_pre = (fwd.z * dae.w_dec).rowwise() + dae.b_dec.row(0);
  fwd.xhat = sigmoid(y_pre);
  fwd.loss = mse_loss(x_clean, fwd.xhat);
  if (record) {
    fwd.x_clean = x_clean;
    fwd.recorded = true;
  }
  return fwd;
}

DaeGrads dae_backward(const DaeForward& fwd, const AttentionParams& attn, const DaeParams& dae) {
  if (!fwd.recorded) throw std::logic_error("dae_backward: forward pass was not recorded");

  const double scale = 2.0 / static_cast<double>(fwd.xhat.size());
  const MatrixXd d_xhat = scale * (fwd.xhat - fwd.x_clean);
  const MatrixXd d_ypre =
      d_xhat.array() * fwd.xhat.array() * (1.0 - fwd.xhat.array());

  DaeGrads g;
  g.w_dec = fwd.z.transpose() * d_ypre;
  g.b_dec = d_ypre.colwise().sum();
  const MatrixXd d_z = d_ypre * dae.w_dec.transpose();
  const MatrixXd d_zpre = d_z.array() * (fwd.z_pre.array() > 0.0).cast<double>();
  g.w_enc = fwd.mha_out.transpose() * d_zpre;
  g.b_enc = d_zpre.colwise().sum();
  const MatrixXd d_mha = d_zpre * dae.w_enc.transpose();
  g.attn = mha_backward(d_mha, attn, fwd.mha);
  return g;
}

MatrixXd corrupt(const MatrixXd& x, const NoiseConfig& cfg, std::mt19937_64& rng) {
  MatrixXd out = x;
  if (cfg.mode == NoiseMode::gaussian) {
    if (cfg.sigma < 0.0) throw std::invalid_argument("corrupt: sigma must be >= 0");
    if (cfg.sigma == 0.0) return out;
    std::normal_distribution<double> noise(0.0, cfg.sigma);
    for (Eigen::Index i = 0; i < out.rows(); ++i)
      for (Eigen::Index j = 0; j < out.cols(); ++j)
        out(i, j) = std::min(1.0, std::max(0.0, out(i, j) + noise(rng)));
  } else {
    if (cfg.mask_fraction < 0.0 || cfg.mask_fraction >= 1.0)
      throw std::invalid_argument("corrupt: mask fraction must be in [0, 1)");
    if (cfg.mask_fraction == 0.0) return out;
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (Eigen::Index i = 0; i < out.rows(); ++i)
      for (Eigen::Index j = 0; j < out.cols(); ++j)
        if (u(rng) < cfg.mask_fraction) out(i, j) = 0.0;
  }
  return out;
}

// ---------------------------------------------------------------------------
// Adam
// ---------------------------------------------------------------------------

void adam_step(MatrixXd& param, const MatrixXd& grad, AdamState& state, long t,
               const TrainConfig& cfg) {
  if (param.rows() != grad.rows() || param.cols() != grad.cols())
    throw std::invalid_argument("adam_step: param/grad shape mismatch");
  if (t < 1) throw std::invalid_argument("adam_step: timestep must be >= 1");
  if (state.m.size() == 0) {
    state.m = MatrixXd::Zero(param.rows(), param.cols());
    state.v = MatrixXd::Zero(param.rows(), param.cols());
  }
  state.m = cfg.beta1 * state.m + (1.0 - cfg.beta1) * grad;
  state.v = cfg.beta2 * state.v + (1.0 - cfg.beta2) * grad.cwiseProduct(grad);
  const double bc1 = 1.0 - std::pow(cfg.beta1, static_cast<double>(t));
  const double bc2 = 1.0 - std::pow(cfg.beta2, static_cast<double>(t));
  param.array() -= cfg.learning_rate * (state.m.array() / bc1) /
                   ((state.v.array() / bc2).sqrt() + cfg.epsilon);
}

// ---------------------------------------------------------------------------
// Models and training
// ---------------------------------------------------------------------------

DaeModel init_dae(int input_dim, const NetworkConfig& net, std::uint64_t seed) {
  if (net.model_dim % net.heads != 0)
    throw std::invalid_argument("init_dae: model_dim must be divisible by heads");
  std::mt19937_64 rng(seed);
  DaeModel model;
  auto& a = model.attn;
  a.input_dim = input_dim;
  a.heads = net.heads;
  a.model_dim = net.model_dim;
  a.head_dim = net.model_dim / net.heads;
  if (input_dim != net.model_dim) {
    a.w_embed = he_uniform(input_dim, net.model_dim, input_dim, rng);
    a.b_embed = MatrixXd::Zero(1, net.model_dim);
  }
  for (int h = 0; h < a.heads; ++h) {
    a.wq.push_back(he_uniform(1, a.head_dim, 1, rng));
    a.wk.push_back(he_uniform(1, a.head_dim, 1, rng));
    a.wv.push_back(he_uniform(1, a.head_dim, 1, rng));
  }
  a.w_out = he_uniform(a.heads * a.head_dim, a.model_dim, a.heads * a.head_dim, rng);

  model.dae.latent_dim = net.latent_dim;
  model.dae.w_enc = he_uniform(net.model_dim, net.latent_dim, net.model_dim, rng);
  model.dae.b_enc = MatrixXd::Zero(1, net.latent_dim);
  model.dae.w_dec = he_uniform(net.latent_dim, input_dim, net.latent_dim, rng);
  model.dae.b_dec = MatrixXd::Zero(1, input_dim);
  return model;
}

ClassifierParams init_classifier(int latent_dim, int hidden, int num_outputs,
                                 std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  ClassifierParams p;
  p.num_outputs = num_outputs;
  p.w1 = he_uniform(latent_dim, hidden, latent_dim, rng);
  p.b1 = MatrixXd::Zero(1, hidden);
  p.w2 = he_uniform(hidden, num_outputs, hidden, rng);
  p.b2 = MatrixXd::Zero(1, num_outputs);
  return p;
}

LossCurve train_dae(DaeModel& model, const MatrixXd& train_x, const MatrixXd& val_x,
                    const TrainConfig& cfg) {
  LossCurve curve;
  if (cfg.epochs <= 0) return curve;
  const Eigen::Index n = train_x.rows();
  if (n == 0) throw std::invalid_argument("train_dae: empty training data");

  Eigen::Index batch_size = cfg.batch_size;
  if (batch_size > n) {
    std::cerr << "[tabseq] train_dae: batch size " << batch_size << " > " << n
              << " samples, using full batch\n";
    batch_size = n;
  }
  if (batch_size < 1) throw std::invalid_argument("train_dae: batch size must be positive");

  std::mt19937_64 rng(cfg.seed);
  std::vector<Eigen::Index> idx(static_cast<std::size_t>(n));
  std::iota(idx.begin(), idx.end(), 0);

  DaeGrads grads;  // only used for ref layout after first backward
  std::vector<AdamState> states;
  long t = 0;

  for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
    std::shuffle(idx.begin(), idx.end(), rng);
    double loss_sum = 0.0;
    for (std::size_t start = 0; start < static_cast<std::size_t>(n);
         start += static_cast<std::size_t>(batch_size)) {
      const std::size_t stop =
          std::min(start + static_cast<std::size_t>(batch_size), static_cast<std::size_t>(n));
      const MatrixXd clean = rows_subset(train_x, idx, start, stop);
      const MatrixXd noisy = corrupt(clean, cfg.noise, rng);
      DaeForward fwd = dae_forward(noisy, clean, model.attn, model.dae, /*record=*/true);
      grads = dae_backward(fwd, model.attn, model.dae);
      loss_sum += fwd.loss * static_cast<double>(stop - start);

      ParamRefs refs = dae_param_refs(model, grads);
      if (states.empty()) states.resize(refs.params.size());
      ++t;
      for (std::size_t i = 0; i < refs.params.size(); ++i)
        adam_step(*refs.params[i], *refs.grads[i], states[i], t, cfg);
    }
    curve.train.push_back(loss_sum / static_cast<double>(n));
    if (val_x.rows() > 0)
      curve.val.push_back(
          dae_forward(val_x, val_x, model.attn, model.dae, /*record=*/false).loss);
  }
  return curve;
}

MatrixXd encode(const MatrixXd& x, const DaeModel& model) {
  const MatrixXd mha_out = mha_forward(x, model.attn);
  return relu((mha_out * model.dae.w_enc).rowwise() + model.dae.b_enc.row(0));
}

MatrixXd classifier_forward(const MatrixXd& z, const ClassifierParams& p) {
  const MatrixXd h1 = relu((z * p.w1).rowwise() + p.b1.row(0));
  const MatrixXd logits = (h1 * p.w2).rowwise() + p.b2.row(0);
  return p.num_outputs == 1 ? sigmoid(logits) : softmax_rows(logits);
}

double classifier_loss_grads(const ClassifierParams& p, const MatrixXd& z,
                             const std::vector<int>& y, int num_classes,
                             ClassifierGrads* grads) {
  if (static_cast<Eigen::Index>(y.size()) != z.rows())
    throw std::invalid_argument("classifier: label/row count mismatch");
  const Eigen::Index batch = z.rows();
  const MatrixXd h1_pre = (z * p.w1).rowwise() + p.b1.row(0);
  const MatrixXd h1 = relu(h1_pre);
  const MatrixXd logits = (h1 * p.w2).rowwise() + p.b2.row(0);

  MatrixXd prob, d_logits;
  double loss;
  if (num_classes == 2) {
    prob = sigmoid(logits);
    loss = bce_loss(y, prob);
    d_logits = prob;
    for (Eigen::Index i = 0; i < batch; ++i)
      d_logits(i, 0) =
          (prob(i, 0) - static_cast<double>(y[static_cast<std::size_t>(i)])) /
          static_cast<double>(batch);
  } else {
    prob = softmax_rows(logits);
    loss = ce_loss(y, prob);
    d_logits = prob / static_cast<double>(batch);
    for (Eigen::Index i = 0; i < batch; ++i)
      d_logits(i, y[static_cast<std::size_t>(i)]) -= 1.0 / static_cast<double>(batch);
  }

  if (grads) {
    grads->w2 = h1.transpose() * d_logits;
    grads->b2 = d_logits.colwise().sum();
    const MatrixXd d_h1 = d_logits * p.w2.transpose();
    const MatrixXd d_h1pre = d_h1.array() * (h1_pre.array() > 0.0).cast<double>();
    grads->w1 = z.transpose() * d_h1pre;
    grads->b1 = d_h1pre.colwise().sum();
  }
  return loss;
}

ClassifierCurve train_classifier(ClassifierParams& p, const MatrixXd& z_train,
                                 const std::vector<int>& y_train, const MatrixXd& z_val,
                                 const std::vector<int>& y_val, int num_classes,
                                 const TrainConfig& cfg) {
  if (static_cast<Eigen::Index>(y_train.size()) != z_train.rows())
    throw std::invalid_argument("train_classifier: label/row count mismatch");
  {
    std::vector<int> distinct = y_train;
    std::sort(distinct.begin(), distinct.end());
    distinct.erase(std::unique(distinct.begin(), distinct.end()), distinct.end());
    if (distinct.size() < 2)
      throw std::invalid_argument("train_classifier: training set has a single class");
  }

  ClassifierCurve curve;
  if (cfg.epochs <= 0) return curve;
  const Eigen::Index n = z_train.rows();
  Eigen::Index batch_size = std::min<Eigen::Index>(cfg.batch_size, n);

  std::mt19937_64 rng(cfg.seed);
  std::vector<Eigen::Index> idx(static_cast<std::size_t>(n));
  std::iota(idx.begin(), idx.end(), 0);

  AdamState s_w1, s_b1, s_w2, s_b2;
  long t = 0;

  auto epoch_metrics = [&](const MatrixXd& z, const std::vector<int>& y, double* loss_out,
                           double* acc_out) {
    const MatrixXd prob = classifier_forward(z, p);
    *loss_out = num_classes == 2 ? bce_loss(y, prob) : ce_loss(y, prob);
    std::size_t hits = 0;
    for (Eigen::Index i = 0; i < z.rows(); ++i) {
      int pred;
      if (num_classes == 2) {
        pred = prob(i, 0) >= 0.5 ? 1 : 0;
      } else {
        Eigen::Index best;
        prob.row(i).maxCoeff(&best);
        pred = static_cast<int>(best);
      }
      hits += pred == y[static_cast<std::size_t>(i)];
    }
    *acc_out = static_cast<double>(hits) / static_cast<double>(z.rows());
  };

  for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
    std::shuffle(idx.begin(), idx.end(), rng);
    for (std::size_t start = 0; start < static_cast<std::size_t>(n);
         start += static_cast<std::size_t>(batch_size)) {
      const std::size_t stop =
          std::min(start + static_cast<std::size_t>(batch_size), static_cast<std::size_t>(n));
      const MatrixXd zb = rows_subset(z_train, idx, start, stop);
      std::vector<int> yb(stop - start);
      for (std::size_t i = start; i < stop; ++i)
        yb[i - start] = y_train[static_cast<std::size_t>(idx[i])];

      ClassifierGrads g;
      classifier_loss_grads(p, zb, yb, num_classes, &g);
      ++t;
      adam_step(p.w1, g.w1, s_w1, t, cfg);
      adam_step(p.b1, g.b1, s_b1, t, cfg);
      adam_step(p.w2, g.w2, s_w2, t, cfg);
      adam_step(p.b2, g.b2, s_b2, t, cfg);
    }
    double loss, acc;
    epoch_metrics(z_train, y_train, &loss, &acc);
    curve.train_loss.push_back(loss);
    curve.train_accuracy.push_back(acc);
    if (z_val.rows() > 0) {
      epoch_metrics(z_val, y_val, &loss, &acc);
      curve.val_loss.push_back(loss);
      curve.val_accuracy.push_back(acc);
    }
  }
  return curve;
}

MatrixXd predict(const MatrixXd& x, const DaeModel& model, const ClassifierParams& clf) {
  return classifier_forward(encode(x, model), clf);
}

// ---------------------------------------------------------------------------
// Checkpoint serialization
// ---------------------------------------------------------------------------

void write_tensor_section(std::ostream& os, const std::string& name, const MatrixXd& value) {
  os << "tensor " << name << " " << value.rows() << " " << value.cols() << "\n";
  char buf[64];
  for (Eigen::Index i = 0; i < value.rows(); ++i) {
    for (Eigen::Index j = 0; j < value.cols(); ++j) {
      std::snprintf(buf, sizeof(buf), "%.17g", value(i, j));
      os << buf << (j + 1 < value.cols() ? " " : "");
    }
    os << "\n";
  }
}

std::vector<NamedTensor> collect_tensors(const DaeModel& model, const ClassifierParams& clf) {
  std::vector<NamedTensor> out;
  if (model.attn.has_embedding()) {
    out.push_back({"attn.w_embed", model.attn.w_embed});
    out.push_back({"attn.b_embed", model.attn.b_embed});
  }
  for (int h = 0; h < model.attn.heads; ++h) {
    const std::string suffix = std::to_string(h);
    out.push_back({"attn.wq." + suffix, model.attn.wq[static_cast<std::size_t>(h)]});
    out.push_back({"attn.wk." + suffix, model.attn.wk[static_cast<std::size_t>(h)]});
    out.push_back({"attn.wv." + suffix, model.attn.wv[static_cast<std::size_t>(h)]});
  }
  out.push_back({"attn.w_out", model.attn.w_out});
  out.push_back({"dae.w_enc", model.dae.w_enc});
  out.push_back({"dae.b_enc", model.dae.b_enc});
  out.push_back({"dae.w_dec", model.dae.w_dec});
  out.push_back({"dae.b_dec", model.dae.b_dec});
  out.push_back({"clf.w1", clf.w1});
  out.push_back({"clf.b1", clf.b1});
  out.push_back({"clf.w2", clf.w2});
  out.push_back({"clf.b2", clf.b2});
  return out;
}

}  // namespace nn
}  // namespace tabseq
