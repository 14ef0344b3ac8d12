#include "radt/model.hpp"

#include <cmath>
#include <fstream>

#include "json.hpp"

namespace radt::nn {

namespace {

Tensor gather_row_range(const Tensor& x, int start, int len) {
  std::vector<int> idx(len);
  for (int i = 0; i < len; ++i) idx[i] = start + i;
  return gather_rows(x, idx);
}

}  // namespace

void TransformerConfig::validate() const {
  if (n_head < 1 || n_layer < 1 || embed_dim < 1)
    throw ArgumentError("model dimensions must be positive");
  if (embed_dim % n_head != 0)
    throw ArgumentError("embed_dim must be divisible by n_head");
  if (adelta < 0) throw ArgumentError("adelta must be nonnegative");
  if (max_seq_len < 1) throw ArgumentError("max_seq_len must be positive");
  if (d_s < 1 || d_a < 1) throw ArgumentError("d_s/d_a must be positive");
  if (dropout < 0.0 || dropout >= 1.0)
    throw ArgumentError("dropout must be in [0, 1)");
}

ModelParams ModelParams::init(const TransformerConfig& cfg, Rng& rng) {
  cfg.validate();
  const int D = cfg.embed_dim;
  ModelParams p;
  p.cfg = cfg;
  auto w = [&](std::vector<int> shape) { return Tensor::randn_param(shape, rng); };
  auto zeros = [&](std::vector<int> shape) { return Tensor::zeros(shape, true); };
  auto ones = [&](int n) {
    return Tensor::param({n}, std::vector<double>(n, 1.0));
  };
  p.E_z = w({2, D});
  p.E_i = w({2, D});
  p.e_vec = w({1, D});
  p.E_b = w({2 * cfg.d_s, D});
  p.E_g = w({cfg.d_s, D});
  p.W_state = w({cfg.d_s, D});
  p.b_state = zeros({D});
  p.W_action = w({cfg.d_a, D});
  p.b_action = zeros({D});
  p.pos_emb = w({cfg.max_seq_len, D});
  for (int l = 0; l < cfg.n_layer; ++l) {
    LayerParams lp;
    lp.ln1_g = ones(D);
    lp.ln1_b = zeros({D});
    lp.W_qkv = w({D, 3 * D});
    lp.b_qkv = zeros({3 * D});
    lp.W_o = w({D, D});
    lp.b_o = zeros({D});
    lp.ln2_g = ones(D);
    lp.ln2_b = zeros({D});
    lp.W_ff1 = w({D, 4 * D});
    lp.b_ff1 = zeros({4 * D});
    lp.W_ff2 = w({4 * D, D});
    lp.b_ff2 = zeros({D});
    p.layers.push_back(std::move(lp));
  }
  p.lnf_g = ones(D);
  p.lnf_b = zeros({D});
  p.W_head_a = w({D, cfg.d_a});
  p.b_head_a = zeros({cfg.d_a});
  p.W_head_k = w({D, 1});
  p.b_head_k = zeros({1});
  return p;
}

std::vector<std::pair<std::string, Tensor>> ModelParams::named_params() {
  std::vector<std::pair<std::string, Tensor>> out{
      {"E_z", E_z},         {"E_i", E_i},
      {"e_vec", e_vec},     {"E_b", E_b},
      {"E_g", E_g},         {"W_state", W_state},
      {"b_state", b_state}, {"W_action", W_action},
      {"b_action", b_action}, {"pos_emb", pos_emb},
  };
  for (std::size_t l = 0; l < layers.size(); ++l) {
    auto& lp = layers[l];
    std::string k = "layer" + std::to_string(l) + ".";
    out.emplace_back(k + "ln1_g", lp.ln1_g);
    out.emplace_back(k + "ln1_b", lp.ln1_b);
    out.emplace_back(k + "W_qkv", lp.W_qkv);
    out.emplace_back(k + "b_qkv", lp.b_qkv);
    out.emplace_back(k + "W_o", lp.W_o);
    out.emplace_back(k + "b_o", lp.b_o);
    out.emplace_back(k + "ln2_g", lp.ln2_g);
    out.emplace_back(k + "ln2_b", lp.ln2_b);
    out.emplace_back(k + "W_ff1", lp.W_ff1);
    out.emplace_back(k + "b_ff1", lp.b_ff1);
    out.emplace_back(k + "W_ff2", lp.W_ff2);
    out.emplace_back(k + "b_ff2", lp.b_ff2);
  }
  out.emplace_back("lnf_g", lnf_g);
  out.emplace_back("lnf_b", lnf_b);
  out.emplace_back("W_head_a", W_head_a);
  out.emplace_back("b_head_a", b_head_a);
  out.emplace_back("W_head_k", W_head_k);
  out.emplace_back("b_head_k", b_head_k);
  return out;
}

void ModelParams::zero_grad() {
  for (auto& [name, t] : named_params()) t.grad().clear();
}

ModelParams ModelParams::clone() const {
  // Tensors are shared handles; rebuild each member with its own storage.
  ModelParams copy = *this;
  auto deep = [](Tensor& t) {
    t = Tensor::param(t.shape(), t.value());
  };
  deep(copy.E_z); deep(copy.E_i); deep(copy.e_vec); deep(copy.E_b); deep(copy.E_g);
  deep(copy.W_state); deep(copy.b_state); deep(copy.W_action); deep(copy.b_action);
  deep(copy.pos_emb);
  for (auto& lp : copy.layers) {
    deep(lp.ln1_g); deep(lp.ln1_b); deep(lp.W_qkv); deep(lp.b_qkv);
    deep(lp.W_o); deep(lp.b_o); deep(lp.ln2_g); deep(lp.ln2_b);
    deep(lp.W_ff1); deep(lp.b_ff1); deep(lp.W_ff2); deep(lp.b_ff2);
  }
  deep(copy.lnf_g); deep(copy.lnf_b);
  deep(copy.W_head_a); deep(copy.b_head_a); deep(copy.W_head_k); deep(copy.b_head_k);
  return copy;
}

std::size_t ModelParams::param_count() {
  std::size_t n = 0;
  for (auto& [name, t] : named_params()) n += t.numel();
  return n;
}

Tensor embed_prompt(const PromptSpec& prompt, ModelParams& params) {
  const auto& cfg = params.cfg;
  if (static_cast<int>(prompt.goal.size()) != cfg.d_s)
    throw ArgumentError("prompt goal dimension does not match model d_s");
  for (const auto& b : prompt.avoid_boxes)
    if (static_cast<int>(b.dim()) != cfg.d_s)
      throw ArgumentError("avoid box dimension does not match model d_s");
  if (prompt.z != 0 && prompt.z != 1)
    throw ArgumentError("prompt z must be 0 or 1");

  std::vector<Tensor> parts;
  parts.reserve(prompt.avoid_boxes.size() + 5);
  // z one-hot is [1,0] for z=1 and [0,1] for z=0: row 0 vs row 1 of E_z.
  parts.push_back(select_rows(params.E_z, {prompt.z == 1 ? 0 : 1}));
  parts.push_back(select_rows(params.E_i, {0}));  // i_b
  for (const auto& b : prompt.avoid_boxes) {
    Tensor coords = Tensor::constant({1, 2 * cfg.d_s}, b.coordinate_vector());
    parts.push_back(matmul(coords, params.E_b));
  }
  parts.push_back(select_rows(params.E_i, {1}));  // i_g
  Tensor g = Tensor::constant({1, cfg.d_s}, prompt.goal);
  parts.push_back(matmul(g, params.E_g));
  parts.push_back(params.e_vec);
  return concat_rows(parts);
}

Tensor embed_trajectory(const std::vector<StateVec>& states,
                        const std::vector<ActionVec>& actions,
                        ModelParams& params) {
  const auto& cfg = params.cfg;
  const int T = static_cast<int>(states.size());
  const int A = static_cast<int>(actions.size());
  if (T == 0) throw ArgumentError("embed_trajectory needs at least one state");
  if (A != T && A != T - 1)
    throw ArgumentError("action count must equal state count or one fewer");

  std::vector<double> sflat;
  sflat.reserve(static_cast<std::size_t>(T) * cfg.d_s);
  for (const auto& s : states) {
    if (static_cast<int>(s.size()) != cfg.d_s)
      throw ArgumentError("state dimension does not match model d_s");
    sflat.insert(sflat.end(), s.begin(), s.end());
  }
  Tensor s_tok = add(matmul(Tensor::constant({T, cfg.d_s}, std::move(sflat)),
                            params.W_state),
                     params.b_state);
  if (A == 0) return s_tok;  // single state, no action

  std::vector<double> aflat;
  aflat.reserve(static_cast<std::size_t>(A) * cfg.d_a);
  for (const auto& a : actions) {
    if (static_cast<int>(a.size()) != cfg.d_a)
      throw ArgumentError("action dimension does not match model d_a");
    aflat.insert(aflat.end(), a.begin(), a.end());
  }
  Tensor a_tok = add(matmul(Tensor::constant({A, cfg.d_a}, std::move(aflat)),
                            params.W_action),
                     params.b_action);

  if (A == T) return interleave_rows(s_tok, a_tok);
  // Trailing state without its action yet: interleave the first T-1 pairs,
  // then append the final state token.
  Tensor paired = interleave_rows(gather_row_range(s_tok, 0, T - 1), a_tok);
  return concat_rows({paired, gather_row_range(s_tok, T - 1, 1)});
}

EncodedSequence encode_sequence(const PromptSpec& prompt,
                                const std::vector<StateVec>& states,
                                const std::vector<ActionVec>& actions,
                                ModelParams& params) {
  EncodedSequence seq;
  seq.prompt_len = prompt_length(static_cast<int>(prompt.n_avoid()));
  Tensor ptok = embed_prompt(prompt, params);
  Tensor ttok = embed_trajectory(states, actions, params);
  Tensor tokens = concat_rows({ptok, ttok});
  const int L = tokens.dim(0);
  if (L > params.cfg.max_seq_len)
    throw ArgumentError("sequence length " + std::to_string(L) +
                        " exceeds max_seq_len " +
                        std::to_string(params.cfg.max_seq_len));
  std::vector<int> pos(L);
  for (int i = 0; i < L; ++i) pos[i] = i;
  seq.tokens = add(tokens, select_rows(params.pos_emb, pos));
  for (std::size_t t = 0; t < states.size(); ++t)
    seq.state_token_positions.push_back(seq.prompt_len + 2 * static_cast<int>(t));
  return seq;
}

namespace {

// Boost-then-mask buffers shared by every head of one batch row.
std::vector<double> boost_buffer(int L, int prompt_len, double adelta) {
  std::vector<double> m(static_cast<std::size_t>(L) * L, 0.0);
  for (int q = 0; q < L; ++q)
    for (int k = 0; k < prompt_len; ++k) m[static_cast<std::size_t>(q) * L + k] = adelta;
  return m;
}

std::vector<double> causal_buffer(int L) {
  std::vector<double> m(static_cast<std::size_t>(L) * L, 0.0);
  for (int q = 0; q < L; ++q)
    for (int k = q + 1; k < L; ++k)
      m[static_cast<std::size_t>(q) * L + k] = -1e30;
  return m;
}

}  // namespace

Tensor transformer_apply(ModelParams& params, const Tensor& tokens,
                         const std::vector<int>& prompt_lens,
                         const ForwardOptions& opts) {
  const auto& cfg = params.cfg;
  if (tokens.ndim() != 3) throw ArgumentError("transformer_apply expects (B,L,D)");
  const int B = tokens.dim(0), L = tokens.dim(1), D = tokens.dim(2);
  if (static_cast<int>(prompt_lens.size()) != B)
    throw ArgumentError("one prompt length per batch row required");
  if (L > cfg.max_seq_len) throw ArgumentError("sequence exceeds max_seq_len");
  const int H = cfg.n_head;
  const int dh = D / H;
  const bool training = opts.training && opts.dropout_rng != nullptr;
  Rng* rng = opts.dropout_rng;

  // Additive attention biases, tiled over heads: prompt boost first (the
  // capture point sits between boost and causal mask), then the mask.
  std::vector<double> boost(static_cast<std::size_t>(B) * H * L * L);
  std::vector<double> causal(static_cast<std::size_t>(B) * H * L * L);
  const std::vector<double> causal_one = causal_buffer(L);
  for (int b = 0; b < B; ++b) {
    const std::vector<double> boost_one = boost_buffer(L, prompt_lens[b], cfg.adelta);
    for (int h = 0; h < H; ++h) {
      std::size_t off = (static_cast<std::size_t>(b) * H + h) * L * L;
      std::copy(boost_one.begin(), boost_one.end(), boost.begin() + off);
      std::copy(causal_one.begin(), causal_one.end(), causal.begin() + off);
    }
  }

  Tensor x = tokens;
  if (training) x = dropout(x, cfg.dropout, *rng, true);

  for (auto& lp : params.layers) {
    Tensor h1 = layer_norm(x, lp.ln1_g, lp.ln1_b);
    Tensor qkv = add(matmul(h1, lp.W_qkv), lp.b_qkv);
    Tensor q = split_heads(slice_last(qkv, 0, D), H);
    Tensor k = split_heads(slice_last(qkv, D, D), H);
    Tensor v = split_heads(slice_last(qkv, 2 * D, D), H);
    Tensor scores = scale(matmul(q, transpose_last2(k)), 1.0 / std::sqrt(dh));
    Tensor boosted = add_constant(scores, boost);
    if (opts.capture_attention_logits)
      opts.capture_attention_logits->push_back(boosted.value());
    Tensor probs = softmax_last(add_constant(boosted, causal));
    if (training) probs = dropout(probs, cfg.dropout, *rng, true);
    Tensor ctx = merge_heads(matmul(probs, v), H);
    Tensor attn = add(matmul(ctx, lp.W_o), lp.b_o);
    if (training) attn = dropout(attn, cfg.dropout, *rng, true);
    x = add(x, attn);

    Tensor h2 = layer_norm(x, lp.ln2_g, lp.ln2_b);
    Tensor ff = add(matmul(gelu(add(matmul(h2, lp.W_ff1), lp.b_ff1)), lp.W_ff2),
                    lp.b_ff2);
    if (training) ff = dropout(ff, cfg.dropout, *rng, true);
    x = add(x, ff);
  }
  return layer_norm(x, params.lnf_g, params.lnf_b);
}

std::pair<Tensor, Tensor> forward_heads(ModelParams& params,
                                        const Tensor& hidden_rows,
                                        const std::vector<int>& positions) {
  Tensor at = gather_rows(hidden_rows, positions);
  Tensor action_preds = add(matmul(at, params.W_head_a), params.b_head_a);
  Tensor k_preds = sigmoid(add(matmul(at, params.W_head_k), params.b_head_k));
  return {action_preds, k_preds};
}

ModelOutput forward(ModelParams& params, const EncodedSequence& seq,
                    const ForwardOptions& opts) {
  Tensor batch = stack({seq.tokens});
  Tensor hidden = transformer_apply(params, batch, {seq.prompt_len}, opts);
  auto [a_preds, k_preds] =
      forward_heads(params, slice_batch(hidden, 0), seq.state_token_positions);
  ModelOutput out;
  const int d_a = params.cfg.d_a;
  const auto& av = a_preds.value();
  for (std::size_t t = 0; t < seq.state_token_positions.size(); ++t)
    out.action_preds.emplace_back(av.begin() + t * d_a, av.begin() + (t + 1) * d_a);
  out.k_preds = k_preds.value();
  return out;
}

ActionVec predict_action(ModelParams& params, const PromptSpec& prompt,
                         const std::vector<StateVec>& history_states,
                         const std::vector<ActionVec>& history_actions,
                         const StateVec& current_state) {
  if (history_actions.size() != history_states.size())
    throw ArgumentError("history must hold matched state/action pairs");
  std::vector<StateVec> states = history_states;
  states.push_back(current_state);
  std::vector<ActionVec> actions = history_actions;

  // Context window: the prompt always stays; the trajectory keeps its most
  // recent tokens, truncated at a state boundary.
  const int P = prompt_length(static_cast<int>(prompt.n_avoid()));
  const int avail = params.cfg.max_seq_len - P;
  if (avail < 1) throw ArgumentError("max_seq_len leaves no room after prompt");
  int keep_pairs = std::min<int>(static_cast<int>(actions.size()), (avail - 1) / 2);
  if (static_cast<int>(states.size()) * 2 - 1 > avail) {
    states.erase(states.begin(), states.end() - (keep_pairs + 1));
    actions.erase(actions.begin(), actions.end() - keep_pairs);
  }

  EncodedSequence seq = encode_sequence(prompt, states, actions, params);
  ModelOutput out = forward(params, seq, {});
  return out.action_preds.back();
}

void save_checkpoint(const std::string& path, ModelParams& params) {
  nlohmann::json j;
  j["format_version"] = 1;
  j["config"] = {{"n_head", params.cfg.n_head},   {"n_layer", params.cfg.n_layer},
                 {"embed_dim", params.cfg.embed_dim},
                 {"adelta", params.cfg.adelta},   {"max_seq_len", params.cfg.max_seq_len},
                 {"d_s", params.cfg.d_s},         {"d_a", params.cfg.d_a},
                 {"dropout", params.cfg.dropout}};
  nlohmann::json tensors;
  for (auto& [name, t] : params.named_params())
    tensors[name] = {{"shape", t.shape()}, {"data", t.value()}};
  j["params"] = std::move(tensors);
  std::ofstream out(path);
  if (!out) throw Error("cannot write checkpoint: " + path);
  out << j.dump();
}

ModelParams load_checkpoint(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot read checkpoint: " + path);
  nlohmann::json j = nlohmann::json::parse(in, nullptr, false);
  if (j.is_discarded()) throw SchemaError("checkpoint is not valid JSON: " + path);
  if (j.value("format_version", 0) != 1)
    throw SchemaError("unsupported checkpoint format version");
  const auto& c = j.at("config");
  TransformerConfig cfg;
  cfg.n_head = c.at("n_head").get<int>();
  cfg.n_layer = c.at("n_layer").get<int>();
  cfg.embed_dim = c.at("embed_dim").get<int>();
  cfg.adelta = c.at("adelta").get<double>();
  cfg.max_seq_len = c.at("max_seq_len").get<int>();
  cfg.d_s = c.at("d_s").get<int>();
  cfg.d_a = c.at("d_a").get<int>();
  cfg.dropout = c.at("dropout").get<double>();
  Rng rng(0);
  ModelParams params = ModelParams::init(cfg, rng);
  const auto& tensors = j.at("params");
  for (auto& [name, t] : params.named_params()) {
    if (!tensors.contains(name))
      throw SchemaError("checkpoint missing tensor: " + name);
    const auto& tj = tensors.at(name);
    auto shape = tj.at("shape").get<std::vector<int>>();
    if (shape != t.shape())
      throw SchemaError("checkpoint tensor " + name + " has wrong shape");
    auto data = tj.at("data").get<std::vector<double>>();
    if (data.size() != t.numel())
      throw SchemaError("checkpoint tensor " + name + " has wrong size");
    t.value() = std::move(data);
  }
  return params;
}

}  // namespace radt::nn
