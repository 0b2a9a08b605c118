#pragma once

#include <cstdint>

namespace fedctr {

using TokenId = std::uint32_t;
using UserId = std::uint64_t;
using AdId = std::uint32_t;
using Timestamp = std::int64_t;

}  // namespace fedctr
