#include "fedctr/nn/params.hpp"

#include <stdexcept>

namespace fedctr::nn {

const char* layer_kind_name(LayerKind k) {
  switch (k) {
    case LayerKind::kEmbedding: return "embedding";
    case LayerKind::kPositionEmbedding: return "position-embedding";
    case LayerKind::kDense: return "dense";
    case LayerKind::kSelfAttention: return "multi-head-self-attention";
    case LayerKind::kAttentivePooling: return "attentive-pooling";
    case LayerKind::kDropout: return "dropout";
    case LayerKind::kAggregator: return "aggregator";
    case LayerKind::kPredictor: return "predictor";
    case LayerKind::kRoute: return "route";
  }
  return "?";
}

Matrix& LayerParams::add(std::string block_name, Matrix value, bool trainable) {
  for (const auto& b : blocks_) {
    if (b.name == block_name) {
      throw std::invalid_argument("LayerParams: duplicate block '" + block_name + "'");
    }
  }
  Matrix grad(value.rows(), value.cols());
  blocks_.push_back(ParamBlock{std::move(block_name), std::move(value), std::move(grad), trainable});
  return blocks_.back().value;
}

ParamBlock& LayerParams::block(std::string_view block_name) {
  for (auto& b : blocks_) {
    if (b.name == block_name) return b;
  }
  throw std::invalid_argument("LayerParams '" + name_ + "': no block '" + std::string(block_name) + "'");
}

const ParamBlock& LayerParams::block(std::string_view block_name) const {
  return const_cast<LayerParams*>(this)->block(block_name);
}

void LayerParams::zero_grads() {
  for (auto& b : blocks_) b.grad.fill(0.0);
}

std::size_t LayerParams::param_count() const {
  std::size_t n = 0;
  for (const auto& b : blocks_) n += b.value.size();
  return n;
}

void Tape::push(LayerKind kind, std::vector<Matrix> saved) {
  if (sealed_) throw std::logic_error("Tape: push after seal");
  frames_.push_back(Frame{kind, std::move(saved)});
}

void Tape::seal() {
  if (sealed_) throw std::logic_error("Tape: already sealed");
  sealed_ = true;
  cursor_ = frames_.size();
}

Tape::Frame Tape::pop(LayerKind expected) {
  if (!sealed_) throw std::logic_error("Tape: pop before seal");
  if (cursor_ == 0) throw std::logic_error("Tape: all frames already consumed");
  Frame& f = frames_[cursor_ - 1];
  if (f.kind != expected) {
    throw std::invalid_argument(std::string("Tape: expected ") + layer_kind_name(expected) +
                                " frame, found " + layer_kind_name(f.kind) +
                                " (tape does not match this backward pass)");
  }
  --cursor_;
  return std::move(f);
}

void Tape::set_owner(const void* owner) {
  if (owner_ != nullptr && owner_ != owner) {
    throw std::invalid_argument("Tape: already owned by another model");
  }
  owner_ = owner;
}

}  // namespace fedctr::nn
