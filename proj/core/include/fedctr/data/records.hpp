#pragma once

#include <vector>

#include "fedctr/types.hpp"

namespace fedctr::data {

/// One user behavior on one platform: a tokenized search query, a browsed
/// page title, etc. Raw text never travels further than the owning platform.
struct BehaviorRecord {
  int platform = 0;  // 1-based platform index
  Timestamp timestamp = 0;
  std::vector<TokenId> tokens;
};

struct AdRecord {
  AdId id = 0;
  std::vector<TokenId> title;
  std::vector<TokenId> description;
};

/// One labeled impression: ad `ad_index` shown to `user_id` at `timestamp`,
/// clicked (1) or not (0).
struct TrainingSample {
  UserId user_id = 0;
  AdId ad_index = 0;
  int label = 0;
  Timestamp timestamp = 0;
};

}  // namespace fedctr::data
