#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "memexperts/bootstrap.hpp"
#include "memexperts/learner.hpp"
#include "memexperts/loss_stream.hpp"
#include "memexperts/pool.hpp"

namespace memexperts {

struct OracleResult {
  ExpertId best;
  double loss = 0.0;
};

// Best single expert over days [0, days) (default: the whole stream), by full
// scan. Ties go to the smallest index.
OracleResult hindsight_oracle(const LossStream& stream, Day days = -1);

// The same answer maintained one day at a time.
class HindsightTracker {
 public:
  explicit HindsightTracker(std::size_t n);

  void observe(std::span<const double> day_losses);
  OracleResult best() const;
  const std::vector<double>& totals() const noexcept { return totals_; }
  Day days() const noexcept { return days_; }

 private:
  std::vector<double> totals_;
  Day days_ = 0;
};

// Cumulative regret after each day against the hindsight winner of the
// record's whole run.
std::vector<double> regret_curve(const RunRecord& record, const LossStream& stream);

double final_regret(const RunRecord& record, const LossStream& stream);

// Peak and per-sample word counts.
class SpaceAccountant {
 public:
  void observe(std::size_t words);
  void observe(const PoolState& pools);

  std::size_t peak() const noexcept { return peak_; }
  const std::vector<std::size_t>& samples() const noexcept { return samples_; }

 private:
  std::size_t peak_ = 0;
  std::vector<std::size_t> samples_;
};

enum class Variant { Mwu, OneLevel, Hier, Boot };

std::string_view to_string(Variant variant);
Variant parse_variant(std::string_view name);

// Episode length for the bootstrapped variant: smallest power of two >= sqrt(T).
Day boot_episode_length(Day horizon);

// The learner family a variant uses for a T-day run.
Blueprint variant_blueprint(Variant variant, std::size_t n, std::size_t m, Day horizon,
                            int k_offset = 1);

struct TrialSpec {
  std::size_t n = 0;
  std::size_t m = 0;
  Day horizon = 0;
  std::string stream;
  Variant variant = Variant::Hier;
  RunSeeds seeds;
  int k_offset = 1;
  bool unknown_horizon = false;
  Day max_guess = Day{1} << 20;
};

// Stream and algorithm seeds derived from one user seed.
RunSeeds seeds_from(std::uint64_t seed);

StreamPtr make_stream(const TrialSpec& spec);
LearnerPtr make_learner(const TrialSpec& spec);

struct TrialOutcome {
  RunRecord record;
  StreamPtr stream;
  OracleResult oracle;
  double regret = 0.0;
};

TrialOutcome run_trial(const TrialSpec& spec, const DriverOptions& options = {});

// One JSONL object describing a finished trial.
nlohmann::json trial_json(const TrialSpec& spec, const TrialOutcome& outcome);

struct SweepCell {
  std::size_t n = 0;
  std::size_t m = 0;
  Day horizon = 0;
  std::string stream;
};

struct SweepConfig {
  std::vector<SweepCell> cells;
  std::vector<Variant> variants;
  int trials = 1;
  std::uint64_t seed = 0;
  int k_offset = 1;
};

struct SweepRow {
  std::size_t cell = 0;
  Variant variant = Variant::Hier;
  int trial = 0;
  TrialSpec spec;
  double regret = 0.0;
  double cumulative_loss = 0.0;
  OracleResult oracle;
  std::size_t peak_words = 0;
  std::size_t peak_query = 0;
  nlohmann::json config;
};

// Seeds of trial t in cell c; every variant of the cell shares them.
RunSeeds sweep_seeds(std::uint64_t seed, std::size_t cell, int trial);

// Worker count: hardware concurrency capped by MEMEXPERTS_THREADS.
unsigned sweep_threads();

// Rows ordered by (cell, variant, trial) regardless of scheduling.
std::vector<SweepRow> sweep(const SweepConfig& config, unsigned threads = 0);

nlohmann::json sweep_row_json(const SweepRow& row);
void write_jsonl(const std::vector<SweepRow>& rows, std::ostream& out);
// Median, 10% and 90% quantiles of regret and median peak words, one column
// group per variant.
void write_summary_csv(const SweepConfig& config, const std::vector<SweepRow>& rows,
                       std::ostream& out);
void write_regret_csv(const std::vector<double>& curve, std::ostream& out);

// Linear-interpolated quantile of an unsorted sample.
double quantile(std::vector<double> values, double q);
double median(std::vector<double> values);

}  // namespace memexperts
