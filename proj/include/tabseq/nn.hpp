#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <iosfwd>
#include <random>
#include <string>
#include <vector>

namespace tabseq {
namespace nn {

using Eigen::MatrixXd;

// ---------------------------------------------------------------------------
// Parameters
// ---------------------------------------------------------------------------

// Multi-head attention over feature tokens. Each feature of the embedded
// input is a token of width 1; per head, tokens are projected to
// head_dim-wide queries/keys/values, attended, concatenated across heads,
// mean-pooled over tokens and projected by w_out. When input_dim !=
// model_dim a learned dense embedding maps samples to model_dim first
// (w_embed is 0x0 otherwise).
struct AttentionParams {
  int input_dim = 0;
  int heads = 4;
  int model_dim = 32;
  int head_dim = 8;  // model_dim / heads

  MatrixXd w_embed;  // input_dim x model_dim (empty when input_dim == model_dim)
  MatrixXd b_embed;  // 1 x model_dim
  std::vector<MatrixXd> wq, wk, wv;  // per head, 1 x head_dim
  MatrixXd w_out;                    // (heads*head_dim) x model_dim

  bool has_embedding() const { return w_embed.size() > 0; }
};

struct DaeParams {
  int latent_dim = 32;
  MatrixXd w_enc;  // model_dim x latent_dim
  MatrixXd b_enc;  // 1 x latent_dim
  MatrixXd w_dec;  // latent_dim x input_dim
  MatrixXd b_dec;  // 1 x input_dim
};

// Dense latent -> hidden -> outputs. Binary targets use one sigmoid output,
// multi-class uses softmax over C outputs.
struct ClassifierParams {
  int num_outputs = 1;
  MatrixXd w1;  // latent_dim x hidden
  MatrixXd b1;  // 1 x hidden
  MatrixXd w2;  // hidden x num_outputs
  MatrixXd b2;  // 1 x num_outputs
};

enum class NoiseMode { gaussian, mask };

struct NoiseConfig {
  NoiseMode mode = NoiseMode::gaussian;
  double sigma = 0.1;          // gaussian: N(0, sigma^2), clamped to [0, 1]
  double mask_fraction = 0.25;  // mask: fraction of entries zeroed
};

struct TrainConfig {
  int epochs = 50;
  int batch_size = 32;
  double learning_rate = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
  NoiseConfig noise;
  std::uint64_t seed = 0;
};

struct NetworkConfig {
  int heads = 4;
  int model_dim = 32;
  int latent_dim = 32;
  int classifier_hidden = 16;
};

// ---------------------------------------------------------------------------
// Elementwise / row ops
// ---------------------------------------------------------------------------

MatrixXd softmax_rows(const MatrixXd& x);  // max-subtraction guard, rows sum to 1
MatrixXd relu(const MatrixXd& x);
MatrixXd sigmoid(const MatrixXd& x);

double mse_loss(const MatrixXd& target, const MatrixXd& recon);  // mean over all entries
// Binary cross-entropy over a column of probabilities; probabilities are
// clamped to [1e-7, 1 - 1e-7] inside the log.
double bce_loss(const std::vector<int>& y, const MatrixXd& prob);
// Categorical cross-entropy over softmax rows.
double ce_loss(const std::vector<int>& y, const MatrixXd& prob);

// ---------------------------------------------------------------------------
// Forward / backward
// ---------------------------------------------------------------------------

struct MhaCache {
  MatrixXd input;     // batch x input_dim
  MatrixXd embedded;  // batch x model_dim (tokens per sample)
  // per sample, per head
  std::vector<std::vector<MatrixXd>> attn;  // softmax(Q K^T / sqrt(d_k)), T x T
  std::vector<std::vector<MatrixXd>> q, k, v;
  MatrixXd pooled;  // batch x heads*head_dim, token-mean of concatenated heads
  bool recorded = false;
};

// x: batch x input_dim -> batch x model_dim.
MatrixXd mha_forward(const MatrixXd& x, const AttentionParams& p, MhaCache* cache = nullptr);

// Per-token concatenated head outputs for one sample (T x heads*head_dim).
// Attention is permutation-equivariant along the token axis.
MatrixXd mha_token_outputs(const Eigen::VectorXd& tokens, const AttentionParams& p);

struct AttentionGrads {
  MatrixXd w_embed, b_embed;
  std::vector<MatrixXd> wq, wk, wv;
  MatrixXd w_out;
};
AttentionGrads mha_backward(const MatrixXd& d_out, const AttentionParams& p,
                            const MhaCache& cache, MatrixXd* d_input = nullptr);

struct DaeForward {
  MatrixXd z;     // batch x latent_dim
  MatrixXd xhat;  // batch x input_dim
  double loss = 0.0;
  // recorded intermediates for backward
  MhaCache mha;
  MatrixXd mha_out, z_pre;
  MatrixXd x_clean;
  bool recorded = false;
};

// Denoising forward pass: encode corrupt input, reconstruct, MSE against the
// clean input. Warns once if inputs look unscaled (far outside [0, 1]).
DaeForward dae_forward(const MatrixXd& x_noisy, const MatrixXd& x_clean,
                       const AttentionParams& attn, const DaeParams& dae,
                       bool record = false);

struct DaeGrads {
  AttentionGrads attn;
  MatrixXd w_enc, b_enc, w_dec, b_dec;
};

// Gradients of the recorded forward's MSE loss for every parameter tensor.
// Throws std::logic_error if the forward was not recorded.
DaeGrads dae_backward(const DaeForward& fwd, const AttentionParams& attn, const DaeParams& dae);

// Gaussian mode adds N(0, sigma^2) then clamps to [0, 1]; mask mode zeroes a
// uniform fraction of entries.
MatrixXd corrupt(const MatrixXd& x, const NoiseConfig& cfg, std::mt19937_64& rng);

// ---------------------------------------------------------------------------
// Adam
// ---------------------------------------------------------------------------

struct AdamState {
  MatrixXd m, v;
};

// Standard Adam update with bias correction; t is the 1-based timestep.
void adam_step(MatrixXd& param, const MatrixXd& grad, AdamState& state, long t,
               const TrainConfig& cfg);

// ---------------------------------------------------------------------------
// Models and training
// ---------------------------------------------------------------------------

struct DaeModel {
  AttentionParams attn;
  DaeParams dae;
};

struct LossCurve {
  std::vector<double> train;
  std::vector<double> val;
};

struct ClassifierCurve {
  std::vector<double> train_loss, train_accuracy;
  std::vector<double> val_loss, val_accuracy;
};

DaeModel init_dae(int input_dim, const NetworkConfig& net, std::uint64_t seed);
ClassifierParams init_classifier(int latent_dim, int hidden, int num_outputs,
                                 std::uint64_t seed);

// Mini-batch Adam over cfg.epochs with seeded shuffling and per-batch
// corruption. Train curve records the mean batch loss per epoch; val curve
// records clean-input reconstruction loss.
LossCurve train_dae(DaeModel& model, const MatrixXd& train_x, const MatrixXd& val_x,
                    const TrainConfig& cfg);

// Deterministic clean-input encoding (no corruption).
MatrixXd encode(const MatrixXd& x, const DaeModel& model);

MatrixXd classifier_forward(const MatrixXd& z, const ClassifierParams& p);

// Trains the classifier head on frozen encodings. num_classes decides the
// loss: 2 -> sigmoid + BCE, >2 -> softmax + categorical cross-entropy.
ClassifierCurve train_classifier(ClassifierParams& p, const MatrixXd& z_train,
                                 const std::vector<int>& y_train, const MatrixXd& z_val,
                                 const std::vector<int>& y_val, int num_classes,
                                 const TrainConfig& cfg);

struct ClassifierGrads {
  MatrixXd w1, b1, w2, b2;
};
// Loss + gradients for one batch (used by train_classifier and the gradient
// tests).
double classifier_loss_grads(const ClassifierParams& p, const MatrixXd& z,
                             const std::vector<int>& y, int num_classes,
                             ClassifierGrads* grads);

// encode -> classify. Binary: n x 1 probabilities of class 1; multi-class:
// n x C rows summing to 1.
MatrixXd predict(const MatrixXd& x, const DaeModel& model, const ClassifierParams& clf);

// ---------------------------------------------------------------------------
// Checkpoint serialization
// ---------------------------------------------------------------------------

// Named tensors round-trip bit-exactly through the text format.
struct NamedTensor {
  std::string name;
  MatrixXd value;
};

void write_tensor_section(std::ostream& os, const std::string& name, const MatrixXd& value);
std::vector<NamedTensor> collect_tensors(const DaeModel& model, const ClassifierParams& clf);

}  // namespace nn
}  // namespace tabseq
