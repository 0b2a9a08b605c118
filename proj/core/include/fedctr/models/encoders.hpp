#pragma once

#include <span>
#include <string>

#include "fedctr/data/records.hpp"
#include "fedctr/models/config.hpp"
#include "fedctr/nn/layers.hpp"

namespace fedctr::models {

using nn::LayerParams;
using nn::ParamVisitor;
using nn::Tape;

/// Text -> vector: word embeddings + position embeddings, multi-head
/// self-attention over the words, attentive pooling to one vector.
/// Shared building block of the user model and the ad title/description
/// encoders.
class TextEncoder {
 public:
  TextEncoder(const std::string& name, const ModelConfig& cfg, Rng& rng);

  std::size_t output_dim() const { return cfg_.embedding_dim(); }

  /// `train_rng` enables dropout; pass nullptr for eval mode.
  Vector forward(std::span<const TokenId> tokens, Tape& tape, Rng* train_rng);
  void backward(const Vector& grad, Tape& tape);
  void visit_params(const ParamVisitor& v);

 private:
  ModelConfig cfg_;
  LayerParams word_emb_, word_pos_, attn_, pool_;
};

struct UserEmbedding {
  Vector value;
  bool cold_start = false;
};

/// Per-platform hierarchical user model: behaviors are encoded from their
/// text, then the behavior sequence is encoded (position embeddings,
/// self-attention, attentive pooling) into one user vector.
class UserModel {
 public:
  UserModel(const std::string& name, const ModelConfig& cfg, Rng& rng);

  std::size_t output_dim() const { return cfg_.embedding_dim(); }
  const ModelConfig& config() const { return cfg_; }

  /// Behaviors must already be restricted to the relevant time range; the
  /// most recent `max_behaviors` are kept. An empty history returns the
  /// learned cold-start embedding, flagged.
  UserEmbedding forward(std::span<const data::BehaviorRecord> behaviors, Tape& tape, Rng* train_rng);
  void backward(const Vector& grad_u, Tape& tape);
  void visit_params(const ParamVisitor& v);

 private:
  ModelConfig cfg_;
  TextEncoder behavior_encoder_;
  LayerParams beh_pos_, beh_attn_, beh_pool_, cold_start_;
};

/// Ad model: ID embedding + dense, title and description text encoders, and
/// an attention network combining the available views into one ad vector.
class AdModel {
 public:
  AdModel(const std::string& name, const ModelConfig& cfg, Rng& rng);

  std::size_t output_dim() const { return cfg_.embedding_dim(); }

  Vector forward(const data::AdRecord& ad, Tape& tape, Rng* train_rng);
  void backward(const Vector& grad_d, Tape& tape);
  void visit_params(const ParamVisitor& v);

 private:
  ModelConfig cfg_;
  LayerParams id_emb_, id_dense_;
  TextEncoder title_enc_, desc_enc_;
  LayerParams view_pool_;
};

}  // namespace fedctr::models
