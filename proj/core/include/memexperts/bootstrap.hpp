#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "memexperts/hierarchy.hpp"
#include "memexperts/learner.hpp"
#include "memexperts/mwu.hpp"

namespace memexperts {

// max(expert - alg2, -r2).
double truncated_loss(double expert_episode_loss, double alg2_episode_loss, double r2);

// A learner family with a known horizon and regret envelope.
struct Blueprint {
  std::string name;
  std::size_t experts = 0;
  Day horizon = 0;
  double regret_bound = 0.0;
  std::function<LearnerPtr(std::uint64_t seed)> make;
};

Blueprint mwu_blueprint(std::size_t n, Day horizon);

// T / m + sqrt(T n / m): the one-level sampling-plus-MWU envelope.
double hierarchical_regret_envelope(const HierarchyConfig& config);
Blueprint hierarchical_blueprint(const HierarchyConfig& config);

struct ComposeOptions {
  double c3 = 2.0;
  // Failure probability; 0 means 1 / T^2 for the composed horizon T.
  double delta = 0.0;
  // Overrides the inner blueprint's regret bound as the truncation level.
  std::optional<double> r2;
  // Largest outer query set tolerated at an episode start.
  std::optional<std::size_t> query_limit;
  bool record_ledgers = false;
  bool record_inner_plays = false;
};

// c3 * sqrt(T2 ln(n / delta)).
double two_choice_envelope(std::size_t n, Day episode_length, double delta, double c3);

// Seed for the inner learner of one episode.
std::uint64_t episode_seed(std::uint64_t seed, std::size_t episode);

struct EpisodeLedger {
  std::size_t episode_index = 0;
  std::vector<ExpertId> experts;
  std::vector<double> expert_losses;  // expected synthetic-expert loss
  std::vector<double> truncated;      // as fed to the outer learner
  double alg2_episode_loss = 0.0;
  double r2_bound = 0.0;
};

// Outer learner over episodes of synthetic experts; a fresh inner learner
// every episode; one two-choice MWU per outer-queried expert.
class ComposedLearner final : public OnlineLearner {
 public:
  ComposedLearner(const Blueprint& outer, const Blueprint& inner, std::uint64_t seed,
                  ComposeOptions options = {});

  std::size_t experts() const override { return n_; }
  Day horizon() const override { return outer_horizon_ * episode_length_; }
  std::span<const ExpertId> query_set() override;
  ExpertId play() override;
  void observe(const DayLosses& losses) override;
  std::size_t tracked_words() const override;
  nlohmann::json describe() const override;

  double r2() const noexcept { return r2_; }
  double r3() const noexcept { return r3_; }
  // max(R2, R3): the loss range handed to the outer learner.
  double width() const noexcept { return width_; }
  Day episode_length() const noexcept { return episode_length_; }
  std::size_t episode() const noexcept { return episode_; }
  const std::vector<EpisodeLedger>& ledgers() const noexcept { return ledgers_; }
  const std::vector<std::vector<ExpertId>>& inner_plays() const noexcept { return inner_plays_; }

 private:
  void start_episode();
  void finish_episode();

  Blueprint inner_;
  std::size_t n_;
  Day outer_horizon_;
  Day episode_length_;
  std::uint64_t seed_;
  ComposeOptions options_;
  double r2_;
  double r3_;
  double width_;
  double two_choice_eta_;
  std::string outer_name_;

  LearnerPtr outer_;
  LearnerPtr inner_learner_;
  std::size_t episode_ = 0;
  Day day_in_episode_ = 0;

  std::vector<ExpertId> outer_query_;
  std::size_t chosen_ = 0;  // index into outer_query_
  std::vector<MwuState> two_choice_;
  std::vector<double> synthetic_loss_;
  double alg2_loss_ = 0.0;
  Rng rng_;

  std::vector<ExpertId> inner_query_;
  ExpertId inner_play_{};
  bool played_ = false;
  std::vector<ExpertId> query_;

  std::vector<EpisodeLedger> ledgers_;
  std::vector<std::vector<ExpertId>> inner_plays_;
};

Blueprint compose(const Blueprint& outer, const Blueprint& inner, ComposeOptions options = {});

// (R^(i-1) + sum_{j=0}^{i-3} R^j T^((i-j)/2)) sqrt(ln(n / delta)).
double corollary_r2(double base_regret, Day base_horizon, int i, std::size_t n, double delta);

// Base over T days folded into a learner over T^i days: the base runs the
// episodes, the (i-1)-fold learner runs inside them.
Blueprint iterate_compose(const Blueprint& base, int i, ComposeOptions options = {});

struct UnknownHorizonOptions {
  Day max_guess = Day{1} << 20;
  bool record_copy_plays = false;
};

// Copies for guesses 2, 4, ..., max_guess all start on day 0; the copy for
// guess G retires after G days. An MWU over the live copies restarts at every
// retirement.
class DoublingLearner final : public OnlineLearner {
 public:
  DoublingLearner(std::function<Blueprint(Day)> factory, std::size_t n, std::uint64_t seed,
                  UnknownHorizonOptions options = {});

  std::size_t experts() const override { return n_; }
  Day horizon() const override { return options_.max_guess; }
  std::span<const ExpertId> query_set() override;
  ExpertId play() override;
  void observe(const DayLosses& losses) override;
  std::size_t tracked_words() const override;
  nlohmann::json describe() const override;

  std::size_t live_copies() const noexcept { return copies_.size() - first_live_; }
  // Plays of the copy for guess 2^j (j >= 1), when recording.
  const std::vector<ExpertId>& copy_plays(int j) const;
  std::uint64_t copy_seed(int j) const;

 private:
  struct Copy {
    Day guess;
    LearnerPtr learner;
    std::vector<ExpertId> query;
    ExpertId play{};
    std::vector<ExpertId> recorded;
  };

  void restart_top();

  std::size_t n_;
  std::uint64_t seed_;
  UnknownHorizonOptions options_;
  std::vector<Copy> copies_;
  std::size_t first_live_ = 0;
  std::optional<MwuState> top_;
  Rng rng_;
  Day day_ = 0;
  std::size_t chosen_ = 0;
  bool played_ = false;
  std::vector<ExpertId> query_;
  std::string name_;
};

LearnerPtr unknown_horizon(std::function<Blueprint(Day)> factory, std::size_t n,
                           std::uint64_t seed, UnknownHorizonOptions options = {});

}  // namespace memexperts
