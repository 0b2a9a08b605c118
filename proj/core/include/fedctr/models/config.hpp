#pragma once

#include <cstddef>
#include <cstdint>

namespace fedctr::models {

/// Architecture hyperparameters shared by the user and ad models. Defaults
/// follow the full-scale configuration (300-d word embeddings, 16 heads of
/// 16 dims); tests and desk-scale experiments shrink them via config.
struct ModelConfig {
  std::size_t vocab_size = 0;  // set from the dataset
  std::size_t ad_count = 0;    // set from the dataset

  std::size_t word_dim = 300;
  std::size_t heads = 16;
  std::size_t head_dim = 16;
  std::size_t pool_hidden = 0;  // 0: same as the pooled dim
  std::size_t id_dim = 64;      // ad-ID embedding dim

  std::size_t max_tokens = 16;     // per behavior / title / description
  std::size_t max_behaviors = 50;  // per user per platform

  double dropout = 0.2;
  std::size_t fm_factors = 8;

  std::size_t embedding_dim() const { return heads * head_dim; }
};

}  // namespace fedctr::models
