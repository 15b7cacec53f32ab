#pragma once

#include <cstddef>
#include <cstdint>
#include <memory>
#include <span>
#include <vector>

#include <nlohmann/json.hpp>

#include "memexperts/loss_stream.hpp"
#include "memexperts/types.hpp"

namespace memexperts {

// A bounded-memory learner under the query model. Each day the driver calls
// query_set(), then play(), then observe() with the losses of exactly the
// declared experts.
class OnlineLearner {
 public:
  virtual ~OnlineLearner() = default;

  virtual std::size_t experts() const = 0;
  // Number of days this learner was parameterized for.
  virtual Day horizon() const = 0;

  // Experts whose losses will be revealed today, sorted and unique.
  virtual std::span<const ExpertId> query_set() = 0;
  // Must be a member of query_set().
  virtual ExpertId play() = 0;
  virtual void observe(const DayLosses& losses) = 0;

  // Current memory footprint in words.
  virtual std::size_t tracked_words() const = 0;
  virtual nlohmann::json describe() const = 0;
};

using LearnerPtr = std::unique_ptr<OnlineLearner>;

struct RunSeeds {
  std::uint64_t stream = 0;
  std::uint64_t algorithm = 0;

  friend bool operator==(const RunSeeds&, const RunSeeds&) = default;
};

struct RunRecord {
  std::vector<ExpertId> plays;
  std::vector<double> losses;
  double cumulative_loss = 0.0;
  std::size_t peak_words = 0;
  std::size_t peak_query = 0;
  std::vector<std::size_t> daily_words;  // filled when requested
  SamplingTrace trace;                   // hierarchical learners only
  nlohmann::json config;
  RunSeeds seeds;

  Day days() const noexcept { return static_cast<Day>(plays.size()); }
};

struct DriverOptions {
  bool record_daily_words = false;
};

// Runs `days` days of the query-model protocol against the stream.
// The learner's footprint is sampled once before day 1 and after every day.
RunRecord run_learner(OnlineLearner& learner, const LossStream& stream, Day days,
                      const DriverOptions& options = {});

}  // namespace memexperts
