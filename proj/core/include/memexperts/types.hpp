#pragma once

#include <compare>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace memexperts {

using Day = std::int64_t;

struct ExpertId {
  std::uint32_t value = 0;

  friend constexpr auto operator<=>(const ExpertId&, const ExpertId&) = default;
};

// Entries created at an update time t get stamps strictly inside [t, t+1):
// forwarded copies first, then fresh samples. seq disambiguates within a phase.
enum class Phase : std::uint8_t { Forwarded = 0, Sampled = 1 };

struct ArrivalStamp {
  Day day = 0;
  Phase phase = Phase::Forwarded;
  std::uint32_t seq = 0;

  friend constexpr auto operator<=>(const ArrivalStamp&, const ArrivalStamp&) = default;
};

// Lexicographic (day, phase, seq); Forwarded precedes Sampled on the same day.
constexpr std::strong_ordering compare_stamps(const ArrivalStamp& a, const ArrivalStamp& b) {
  return a <=> b;
}

// First stamp that is up for eviction when the enclosing block began at tau.
constexpr ArrivalStamp eviction_boundary(Day tau) { return ArrivalStamp{tau, Phase::Sampled, 0}; }

std::string to_string(const ArrivalStamp& stamp);

struct PoolEntry {
  ExpertId expert;
  ArrivalStamp arrival;
  double loss_since_arrival = 0.0;
  double log_weight = 0.0;
  // Set while the entry sits before the current eviction boundary; it cannot be
  // evicted before this day.
  std::optional<Day> protected_until;
};

// Entries are kept sorted by arrival stamp.
struct Bucket {
  int level = 0;
  std::vector<PoolEntry> entries;

  std::size_t size() const noexcept { return entries.size(); }
  bool empty() const noexcept { return entries.empty(); }
};

// External mixing weights between level i and level i+1, log-domain.
// big tracks the level-(i+1) prediction, small the composite up to level i.
struct WeightPair {
  double big = 0.0;
  double small = 0.0;
};

struct LevelWeights {
  std::vector<WeightPair> pairs;

  std::size_t size() const noexcept { return pairs.size(); }
  void reset(std::size_t i) { pairs.at(i) = WeightPair{}; }
};

// One expert drawn into a bucket at a block boundary.
struct SampleRecord {
  int level = 0;
  ArrivalStamp stamp;
  ExpertId expert;

  friend bool operator==(const SampleRecord&, const SampleRecord&) = default;
};

using SamplingTrace = std::vector<SampleRecord>;

// Full parameterization of the hierarchical learner: block sizes T_0 < ... < T_{k-1}
// with each dividing the next, and the horizon T (= T_k) a multiple of T_{k-1}.
class HierarchyConfig {
 public:
  HierarchyConfig(std::size_t n, std::size_t m, std::vector<Day> block_sizes, Day horizon);

  std::size_t experts() const noexcept { return n_; }
  std::size_t space() const noexcept { return m_; }
  int levels() const noexcept { return static_cast<int>(block_sizes_.size()); }
  Day horizon() const noexcept { return horizon_; }
  double epsilon() const noexcept { return epsilon_; }
  const std::vector<Day>& block_sizes() const noexcept { return block_sizes_; }

  // T_i for i in [0, k]; T_k is the horizon.
  Day block_size(int level) const;

  friend bool operator==(const HierarchyConfig&, const HierarchyConfig&) = default;

 private:
  std::size_t n_;
  std::size_t m_;
  std::vector<Day> block_sizes_;
  Day horizon_;
  double epsilon_;
};

}  // namespace memexperts
