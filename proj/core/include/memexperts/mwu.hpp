#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "memexperts/learner.hpp"
#include "memexperts/random.hpp"
#include "memexperts/types.hpp"

namespace memexperts {

// Log-weights never drop below this; keeps exp() finite without reordering mass.
inline constexpr double kLogWeightFloor = -745.0;

// Exponential-weights step on one log-weight: lw - eta * loss / range.
// |loss| > range is a contract violation. Negative losses are allowed.
double mwu_step(double log_weight, double loss, double eta, double range = 1.0);

// Normalized sampling probabilities for a set of log-weights.
void mwu_probabilities(std::span<const double> log_weights, std::span<double> out);

// Index drawn proportionally to exp(log_weights). Throws ConfigError if empty.
std::size_t mwu_sample(std::span<const double> log_weights, Rng& rng);

struct LearningRates {
  double internal;  // within a bucket
  double external;  // between consecutive levels
};

// sqrt(max(1, ln |B|) / T_i) and sqrt(2 / T_i).
LearningRates learning_rates(std::size_t bucket_size, Day block_size);

// Weight vector plus rate for a plain multiplicative-weights learner.
class MwuState {
 public:
  MwuState(std::size_t size, double eta);
  MwuState(std::vector<double> log_weights, double eta);

  std::size_t size() const noexcept { return log_weights_.size(); }
  double eta() const noexcept { return eta_; }
  std::span<const double> log_weights() const noexcept { return log_weights_; }
  double weight(std::size_t i) const;

  std::size_t sample(Rng& rng) const { return mwu_sample(log_weights_, rng); }
  std::vector<double> probabilities() const;

  void update(std::span<const double> losses, double range = 1.0);
  void update_one(std::size_t i, double loss, double range = 1.0);
  void reset();

 private:
  std::vector<double> log_weights_;
  double eta_;
};

// Functional form of MwuState::update.
MwuState mwu_update(MwuState state, std::span<const double> losses, double range = 1.0);

// Envelope used for tests and for bootstrap clamps: 4 sqrt(T ln(nT)).
double mwu_regret_envelope(std::size_t n, Day horizon);

// Full-information MWU over all n experts with eta = sqrt(ln n / T).
// Queries every expert every day; footprint is one id and one weight per expert.
class MwuLearner final : public OnlineLearner {
 public:
  MwuLearner(std::size_t n, Day horizon, std::uint64_t seed);
  MwuLearner(std::size_t n, Day horizon, double eta, std::uint64_t seed);

  std::size_t experts() const override { return state_.size(); }
  Day horizon() const override { return horizon_; }
  std::span<const ExpertId> query_set() override { return all_; }
  ExpertId play() override;
  void observe(const DayLosses& losses) override;
  std::size_t tracked_words() const override;
  nlohmann::json describe() const override;

  const MwuState& state() const noexcept { return state_; }

 private:
  MwuState state_;
  Day horizon_;
  std::uint64_t seed_;
  Rng rng_;
  std::vector<ExpertId> all_;
  std::vector<double> scratch_;
};

}  // namespace memexperts
