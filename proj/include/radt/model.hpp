#pragma once

#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "radt/tensor.hpp"
#include "radt/types.hpp"

namespace radt::nn {

struct TransformerConfig {
  int n_head = 1;
  int n_layer = 2;
  int embed_dim = 64;
  double adelta = 2.0;  // attention boost toward prompt tokens
  int max_seq_len = 128;
  int d_s = 3;
  int d_a = 3;
  double dropout = 0.1;

  void validate() const;
};

struct LayerParams {
  Tensor ln1_g, ln1_b;
  Tensor W_qkv, b_qkv;  // (D, 3D)
  Tensor W_o, b_o;      // (D, D)
  Tensor ln2_g, ln2_b;
  Tensor W_ff1, b_ff1;  // (D, 4D)
  Tensor W_ff2, b_ff2;  // (4D, D)
};

/// All learnable tensors, including the five prompt embedding tables.
struct ModelParams {
  TransformerConfig cfg;
  Tensor E_z;    // (2, D): rows for z=1, z=0
  Tensor E_i;    // (2, D): rows for i_b, i_g
  Tensor e_vec;  // (1, D): prompt end token
  Tensor E_b;    // (2*d_s, D): avoid box coordinate embedding
  Tensor E_g;    // (d_s, D): goal embedding
  Tensor W_state, b_state;
  Tensor W_action, b_action;
  Tensor pos_emb;  // (max_seq_len, D), learned absolute positions
  std::vector<LayerParams> layers;
  Tensor lnf_g, lnf_b;
  Tensor W_head_a, b_head_a;  // action head (D, d_a)
  Tensor W_head_k, b_head_k;  // avoid-awareness head (D, 1)

  /// Normal(0, 0.02) weights, zero biases, unit layer-norm gains.
  static ModelParams init(const TransformerConfig& cfg, Rng& rng);

  std::vector<std::pair<std::string, Tensor>> named_params();
  void zero_grad();
  /// Deep copy (independent parameter storage), e.g. for eval snapshots.
  ModelParams clone() const;
  std::size_t param_count();
};

/// Prompt token count: z, i_b, the boxes, i_g, g, e.
inline int prompt_length(int n_avoid) { return n_avoid + 5; }

/// Prompt token embeddings in prompt order, shape (prompt_len, D).
Tensor embed_prompt(const PromptSpec& prompt, ModelParams& params);

/// Interleaved s_1, a_1, s_2, ... tokens. Accepts one fewer action than
/// states (rollout: history plus the current state awaiting its action).
Tensor embed_trajectory(const std::vector<StateVec>& states,
                        const std::vector<ActionVec>& actions,
                        ModelParams& params);

struct EncodedSequence {
  Tensor tokens;  // (L, D), positions applied
  int prompt_len = 0;
  /// Positions whose transformer outputs predict a_t and k_t.
  std::vector<int> state_token_positions;
};

EncodedSequence encode_sequence(const PromptSpec& prompt,
                                const std::vector<StateVec>& states,
                                const std::vector<ActionVec>& actions,
                                ModelParams& params);

struct ForwardOptions {
  bool training = false;
  Rng* dropout_rng = nullptr;
  /// When set, receives the post-boost, pre-mask attention logits of every
  /// layer, each a (B*H, L, L) buffer.
  std::vector<std::vector<double>>* capture_attention_logits = nullptr;
};

/// Pre-norm causal transformer over stacked token batches (B, L, D).
/// Attention logits gain +adelta at every key column inside that sample's
/// prompt, before the causal mask and softmax.
Tensor transformer_apply(ModelParams& params, const Tensor& tokens,
                         const std::vector<int>& prompt_lens,
                         const ForwardOptions& opts = {});

struct ModelOutput {
  std::vector<ActionVec> action_preds;  // one per state token
  std::vector<double> k_preds;          // avoid-awareness probabilities
};

/// Single-sequence forward pass returning per-state-token head outputs.
ModelOutput forward(ModelParams& params, const EncodedSequence& seq,
                    const ForwardOptions& opts = {});

/// Graph-returning heads for training: action predictions (T, d_a) and
/// violation-free probabilities (T, 1) read at the state token positions.
std::pair<Tensor, Tensor> forward_heads(ModelParams& params,
                                        const Tensor& hidden_row,
                                        const std::vector<int>& positions);

/// Deterministic next-action prediction: forward on (prompt | history | s_t),
/// action head at the final position. Evaluation always conditions on z=1.
/// Overflowing contexts keep the prompt and the most recent trajectory
/// window; the prompt is never evicted.
ActionVec predict_action(ModelParams& params, const PromptSpec& prompt,
                         const std::vector<StateVec>& history_states,
                         const std::vector<ActionVec>& history_actions,
                         const StateVec& current_state);

void save_checkpoint(const std::string& path, ModelParams& params);
ModelParams load_checkpoint(const std::string& path);

}  // namespace radt::nn
