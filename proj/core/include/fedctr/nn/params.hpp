#pragma once

#include <functional>
#include <string>
#include <string_view>
#include <vector>

#include "fedctr/nn/matrix.hpp"

namespace fedctr::nn {

enum class LayerKind {
  kEmbedding,
  kPositionEmbedding,
  kDense,
  kSelfAttention,
  kAttentivePooling,
  kDropout,
  kAggregator,
  kPredictor,
  kRoute,  // model-level routing decisions (cold-start, present views)
};

const char* layer_kind_name(LayerKind k);

/// One named parameter matrix paired with its gradient accumulator.
/// Non-trainable blocks carry structural constants (e.g. head geometry) and
/// are ignored by optimizers and gradient checks.
struct ParamBlock {
  std::string name;
  Matrix value;
  Matrix grad;
  bool trainable = true;
};

/// Parameter blocks of one layer instance. Gradient blocks always mirror the
/// value shapes and accumulate additively across backward calls.
class LayerParams {
 public:
  LayerParams() = default;
  LayerParams(LayerKind kind, std::string name) : kind_(kind), name_(std::move(name)) {}

  Matrix& add(std::string block_name, Matrix value, bool trainable = true);

  ParamBlock& block(std::string_view block_name);
  const ParamBlock& block(std::string_view block_name) const;
  Matrix& value(std::string_view block_name) { return block(block_name).value; }
  const Matrix& value(std::string_view block_name) const { return block(block_name).value; }
  Matrix& grad(std::string_view block_name) { return block(block_name).grad; }

  std::vector<ParamBlock>& blocks() { return blocks_; }
  const std::vector<ParamBlock>& blocks() const { return blocks_; }

  void zero_grads();
  std::size_t param_count() const;

  LayerKind kind() const { return kind_; }
  const std::string& name() const { return name_; }

 private:
  LayerKind kind_ = LayerKind::kDense;
  std::string name_;
  std::vector<ParamBlock> blocks_;
};

using ParamVisitor = std::function<void(ParamBlock&)>;

/// Records the intermediate activations a forward pass needs for its exact
/// backward. Frames are pushed in forward order, sealed, then consumed in
/// strict LIFO order; each frame can be consumed exactly once.
class Tape {
 public:
  struct Frame {
    LayerKind kind;
    std::vector<Matrix> saved;
  };

  void push(LayerKind kind, std::vector<Matrix> saved);

  /// Marks the forward pass complete. Frames become immutable and backward
  /// consumption may begin.
  void seal();
  bool sealed() const { return sealed_; }

  /// Consumes the topmost unconsumed frame; rejects kind mismatches, which
  /// indicate a tape/params pairing error.
  Frame pop(LayerKind expected);

  bool fully_consumed() const { return sealed_ && cursor_ == 0; }
  std::size_t frame_count() const { return frames_.size(); }

  /// Read-only access for inspection (e.g. attention weights) before backward.
  const Frame& frame(std::size_t i) const { return frames_.at(i); }

  /// Owner tag lets a model verify the tape was produced by its own forward.
  void set_owner(const void* owner);
  const void* owner() const { return owner_; }

 private:
  std::vector<Frame> frames_;
  const void* owner_ = nullptr;
  std::size_t cursor_ = 0;
  bool sealed_ = false;
};

}  // namespace fedctr::nn
