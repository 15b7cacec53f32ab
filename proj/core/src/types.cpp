#include "memexperts/types.hpp"

#include <cmath>

#include "memexperts/errors.hpp"

namespace memexperts {

std::string to_string(const ArrivalStamp& stamp) {
  return "(" + std::to_string(stamp.day) + (stamp.phase == Phase::Forwarded ? ",F," : ",S,") +
         std::to_string(stamp.seq) + ")";
}

HierarchyConfig::HierarchyConfig(std::size_t n, std::size_t m, std::vector<Day> block_sizes,
                                 Day horizon)
    : n_(n), m_(m), block_sizes_(std::move(block_sizes)), horizon_(horizon), epsilon_(0.0) {
  if (n_ == 0) throw ConfigError("need at least one expert");
  if (m_ == 0) throw ConfigError("space parameter m must be positive");
  if (block_sizes_.empty()) throw ConfigError("need at least one level");
  if (block_sizes_.front() < 1) throw ConfigError("T_0 must be at least 1");
  for (std::size_t i = 1; i < block_sizes_.size(); ++i) {
    if (block_sizes_[i] <= block_sizes_[i - 1])
      throw ConfigError("block sizes must be strictly increasing");
    if (block_sizes_[i] % block_sizes_[i - 1] != 0)
      throw ConfigError("T_" + std::to_string(i) + " is not a multiple of T_" +
                        std::to_string(i - 1));
  }
  if (horizon_ <= block_sizes_.back())
    throw ConfigError("horizon must exceed the largest block size");
  if (horizon_ % block_sizes_.back() != 0)
    throw ConfigError("horizon must be a multiple of the largest block size");
  epsilon_ = std::log(static_cast<double>(horizon_)) / static_cast<double>(m_);
}

Day HierarchyConfig::block_size(int level) const {
  if (level < 0 || level > levels()) throw RangeError("level out of range");
  return level == levels() ? horizon_ : block_sizes_[static_cast<std::size_t>(level)];
}

}  // namespace memexperts
