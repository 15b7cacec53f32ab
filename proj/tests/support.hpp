#pragma once

#include <algorithm>
#include <cstdint>
#include <memory>
#include <vector>

#include "memexperts/random.hpp"
#include "memexperts/streams.hpp"
#include "memexperts/types.hpp"

namespace memexperts::testing {

// Hand-rolled generators for property tests.
class Gen {
 public:
  explicit Gen(std::uint64_t seed) : rng_(seed) {}

  std::int64_t integer(std::int64_t lo, std::int64_t hi) {
    return lo + static_cast<std::int64_t>(rng_.below(static_cast<std::uint64_t>(hi - lo + 1)));
  }
  double real(double lo, double hi) { return lo + (hi - lo) * rng_.uniform(); }
  bool coin(double p = 0.5) { return rng_.bernoulli(p); }

  ArrivalStamp stamp(Day max_day) {
    return ArrivalStamp{integer(0, max_day), coin() ? Phase::Sampled : Phase::Forwarded,
                        static_cast<std::uint32_t>(integer(0, 3))};
  }

  // Random bucket with distinct, sorted stamps and coarse losses so that
  // ties and near-ties under (1 + eps) are common.
  Bucket bucket(std::size_t max_entries, std::size_t n, Day max_day) {
    Bucket b;
    const auto size = static_cast<std::size_t>(integer(0, static_cast<std::int64_t>(max_entries)));
    std::vector<ArrivalStamp> stamps;
    while (stamps.size() < size) {
      const ArrivalStamp s = stamp(max_day);
      bool dup = false;
      for (const auto& t : stamps) dup = dup || t == s;
      if (!dup) stamps.push_back(s);
    }
    std::sort(stamps.begin(), stamps.end());
    for (const auto& s : stamps) {
      PoolEntry e;
      e.expert = ExpertId{static_cast<std::uint32_t>(integer(0, static_cast<std::int64_t>(n) - 1))};
      e.arrival = s;
      e.loss_since_arrival = coin(0.2) ? 0.0 : static_cast<double>(integer(0, 40)) / 4.0;
      e.log_weight = real(-3.0, 0.0);
      b.entries.push_back(e);
    }
    return b;
  }

  std::shared_ptr<MatrixStream> matrix(std::size_t n, Day days, bool binary = false) {
    std::vector<std::vector<double>> rows(static_cast<std::size_t>(days), std::vector<double>(n));
    for (auto& row : rows)
      for (double& v : row) v = binary ? (coin() ? 1.0 : 0.0) : real(0.0, 1.0);
    return std::make_shared<MatrixStream>(n, std::move(rows));
  }

  Rng& rng() { return rng_; }

 private:
  Rng rng_;
};

// The three-expert overlap example, row per day.
inline std::vector<std::vector<double>> trap_rows() {
  return {{1, 0, 0}, {0, 0, 0}, {0, 0, 1}, {0, 1, 0}, {1, 1, 0}};
}

}  // namespace memexperts::testing
