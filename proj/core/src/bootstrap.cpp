#include "memexperts/bootstrap.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "memexperts/errors.hpp"

namespace memexperts {

double truncated_loss(double expert_episode_loss, double alg2_episode_loss, double r2) {
  if (!(r2 > 0.0)) throw ConfigError("truncation level must be positive");
  return std::max(expert_episode_loss - alg2_episode_loss, -r2);
}

Blueprint mwu_blueprint(std::size_t n, Day horizon) {
  Blueprint bp;
  bp.name = "mwu";
  bp.experts = n;
  bp.horizon = horizon;
  bp.regret_bound = mwu_regret_envelope(n, horizon);
  bp.make = [n, horizon](std::uint64_t seed) -> LearnerPtr {
    return std::make_unique<MwuLearner>(n, horizon, seed);
  };
  return bp;
}

double hierarchical_regret_envelope(const HierarchyConfig& config) {
  const double t = static_cast<double>(config.horizon());
  const double n = static_cast<double>(config.experts());
  const double m = static_cast<double>(config.space());
  return t / m + std::sqrt(t * n / m);
}

Blueprint hierarchical_blueprint(const HierarchyConfig& config) {
  Blueprint bp;
  bp.name = config.levels() == 1 ? "onelevel" : "hier";
  bp.experts = config.experts();
  bp.horizon = config.horizon();
  bp.regret_bound = hierarchical_regret_envelope(config);
  bp.make = [config](std::uint64_t seed) -> LearnerPtr {
    return std::make_unique<HierarchicalLearner>(config, seed);
  };
  return bp;
}

double two_choice_envelope(std::size_t n, Day episode_length, double delta, double c3) {
  if (!(delta > 0.0 && delta < 1.0)) throw ConfigError("delta must lie in (0, 1)");
  return c3 * std::sqrt(static_cast<double>(episode_length) *
                        std::log(static_cast<double>(n) / delta));
}

std::uint64_t episode_seed(std::uint64_t seed, std::size_t episode) {
  return derive_seed(derive_seed(seed, "episode"), static_cast<std::uint64_t>(episode));
}

namespace {

double default_delta(Day horizon) {
  const double t = static_cast<double>(std::max<Day>(horizon, 2));
  return 1.0 / (t * t);
}

}  // namespace

ComposedLearner::ComposedLearner(const Blueprint& outer, const Blueprint& inner,
                                 std::uint64_t seed, ComposeOptions options)
    : inner_(inner),
      n_(outer.experts),
      outer_horizon_(outer.horizon),
      episode_length_(inner.horizon),
      seed_(seed),
      options_(std::move(options)),
      outer_name_(outer.name),
      rng_(derive_seed(seed, "synthetic")) {
  if (!outer.make || !inner.make) throw ConfigError("blueprint without a factory");
  if (inner.experts != n_) throw ConfigError("outer and inner learners disagree on n");
  if (outer_horizon_ < 1 || episode_length_ < 1) throw ConfigError("horizons must be positive");
  const double delta =
      options_.delta > 0.0 ? options_.delta : default_delta(outer_horizon_ * episode_length_);
  r2_ = options_.r2.value_or(inner.regret_bound);
  if (!(r2_ > 0.0)) throw ConfigError("R2 must be positive");
  r3_ = two_choice_envelope(n_, episode_length_, delta, options_.c3);
  width_ = std::max(r2_, r3_);
  two_choice_eta_ = std::sqrt(std::log(2.0) / static_cast<double>(episode_length_));
  outer_ = outer.make(derive_seed(seed, "outer"));
  start_episode();
}

void ComposedLearner::start_episode() {
  auto declared = outer_->query_set();
  outer_query_.assign(declared.begin(), declared.end());
  if (options_.query_limit && outer_query_.size() > *options_.query_limit)
    throw SpaceModelViolation("outer learner queried " + std::to_string(outer_query_.size()) +
                              " experts, limit " + std::to_string(*options_.query_limit));
  const ExpertId pick = outer_->play();
  const auto it = std::lower_bound(outer_query_.begin(), outer_query_.end(), pick);
  if (it == outer_query_.end() || *it != pick)
    throw QueryModelViolation("outer learner played an expert outside its query set");
  chosen_ = static_cast<std::size_t>(it - outer_query_.begin());
  two_choice_.assign(outer_query_.size(), MwuState(2, two_choice_eta_));
  synthetic_loss_.assign(outer_query_.size(), 0.0);
  alg2_loss_ = 0.0;
  day_in_episode_ = 0;
  inner_learner_ = inner_.make(episode_seed(seed_, episode_));
  if (options_.record_inner_plays) inner_plays_.emplace_back();
}

void ComposedLearner::finish_episode() {
  std::vector<double> truncated(outer_query_.size());
  for (std::size_t j = 0; j < outer_query_.size(); ++j)
    truncated[j] = std::min(width_, truncated_loss(synthetic_loss_[j], alg2_loss_, r2_));
  if (options_.record_ledgers)
    ledgers_.push_back(EpisodeLedger{episode_, outer_query_, synthetic_loss_, truncated,
                                     alg2_loss_, r2_});
  outer_->observe(DayLosses(outer_query_, std::move(truncated), width_, true));
}

std::span<const ExpertId> ComposedLearner::query_set() {
  if (episode_ >= static_cast<std::size_t>(outer_horizon_))
    throw HorizonError("composed learner horizon exhausted");
  auto declared = inner_learner_->query_set();
  inner_query_.assign(declared.begin(), declared.end());
  query_.clear();
  std::set_union(outer_query_.begin(), outer_query_.end(), inner_query_.begin(),
                 inner_query_.end(), std::back_inserter(query_));
  return query_;
}

ExpertId ComposedLearner::play() {
  if (episode_ >= static_cast<std::size_t>(outer_horizon_))
    throw HorizonError("composed learner horizon exhausted");
  inner_play_ = inner_learner_->play();
  if (options_.record_inner_plays) inner_plays_.back().push_back(inner_play_);
  played_ = true;
  return two_choice_[chosen_].sample(rng_) == 0 ? outer_query_[chosen_] : inner_play_;
}

void ComposedLearner::observe(const DayLosses& losses) {
  if (!played_) throw ContractViolation("observe called before play");
  played_ = false;
  inner_learner_->observe(losses.restricted(inner_query_));
  const double inner_loss = losses.unit(inner_play_);
  alg2_loss_ += inner_loss;
  double pair[2];
  pair[1] = inner_loss;
  for (std::size_t j = 0; j < outer_query_.size(); ++j) {
    pair[0] = losses.unit(outer_query_[j]);
    MwuState& mwu = two_choice_[j];
    const double lw0 = mwu.log_weights()[0];
    const double lw1 = mwu.log_weights()[1];
    const double p0 = 1.0 / (1.0 + std::exp(lw1 - lw0));
    synthetic_loss_[j] += p0 * pair[0] + (1.0 - p0) * pair[1];
    mwu.update(pair);
  }
  if (++day_in_episode_ == episode_length_) {
    finish_episode();
    ++episode_;
    if (episode_ < static_cast<std::size_t>(outer_horizon_)) start_episode();
  }
}

std::size_t ComposedLearner::tracked_words() const {
  std::size_t words = outer_->tracked_words() + 3 * outer_query_.size() + 4;
  if (inner_learner_) words += inner_learner_->tracked_words();
  return words;
}

nlohmann::json ComposedLearner::describe() const {
  return {{"algorithm", "boot"},
          {"n", n_},
          {"T", horizon()},
          {"T1", outer_horizon_},
          {"T2", episode_length_},
          {"outer", outer_name_},
          {"inner", inner_.name},
          {"r2", r2_},
          {"r3", r3_},
          {"width", width_},
          {"seed", seed_}};
}

Blueprint compose(const Blueprint& outer, const Blueprint& inner, ComposeOptions options) {
  if (inner.experts != outer.experts) throw ConfigError("outer and inner learners disagree on n");
  Blueprint bp;
  bp.name = "boot(" + outer.name + "," + inner.name + ")";
  bp.experts = outer.experts;
  bp.horizon = outer.horizon * inner.horizon;
  const double delta = options.delta > 0.0 ? options.delta : default_delta(bp.horizon);
  const double r2 = options.r2.value_or(inner.regret_bound);
  const double r3 = two_choice_envelope(outer.experts, inner.horizon, delta, options.c3);
  bp.regret_bound = outer.regret_bound * std::max(r2, r3) +
                    static_cast<double>(outer.horizon) * r3;
  bp.make = [outer, inner, options](std::uint64_t seed) -> LearnerPtr {
    return std::make_unique<ComposedLearner>(outer, inner, seed, options);
  };
  return bp;
}

double corollary_r2(double base_regret, Day base_horizon, int i, std::size_t n, double delta) {
  if (i < 2) throw ConfigError("corollary truncation level needs i >= 2");
  const double t = static_cast<double>(base_horizon);
  double sum = std::pow(base_regret, i - 1);
  for (int j = 0; j <= i - 3; ++j) sum += std::pow(base_regret, j) * std::pow(t, (i - j) / 2.0);
  return sum * std::sqrt(std::log(static_cast<double>(n) / delta));
}

Blueprint iterate_compose(const Blueprint& base, int i, ComposeOptions options) {
  if (i < 1) throw ConfigError("iteration count must be at least 1");
  Blueprint current = base;
  Day horizon = base.horizon;
  for (int level = 2; level <= i; ++level) {
    horizon *= base.horizon;
    ComposeOptions step = options;
    step.delta = options.delta > 0.0 ? options.delta : default_delta(horizon);
    step.r2 = corollary_r2(base.regret_bound, base.horizon, level, base.experts, step.delta);
    current = compose(base, current, step);
  }
  return current;
}

DoublingLearner::DoublingLearner(std::function<Blueprint(Day)> factory, std::size_t n,
                                 std::uint64_t seed, UnknownHorizonOptions options)
    : n_(n), seed_(seed), options_(options), rng_(derive_seed(seed, "doubling")) {
  if (options_.max_guess < 2) throw ConfigError("largest horizon guess must be at least 2");
  for (int j = 1; (Day{1} << j) <= options_.max_guess && j < 62; ++j) {
    const Day guess = Day{1} << j;
    Blueprint bp = factory(guess);
    if (bp.experts != n_) throw ConfigError("copy for guess " + std::to_string(guess) +
                                            " has the wrong number of experts");
    if (bp.horizon < guess)
      throw ConfigError("copy for guess " + std::to_string(guess) + " has a shorter horizon");
    name_ = bp.name;
    copies_.push_back(Copy{guess, bp.make(copy_seed(j)), {}, {}, {}});
  }
  restart_top();
}

std::uint64_t DoublingLearner::copy_seed(int j) const {
  return derive_seed(derive_seed(seed_, "copy"), static_cast<std::uint64_t>(j));
}

const std::vector<ExpertId>& DoublingLearner::copy_plays(int j) const {
  if (j < 1 || static_cast<std::size_t>(j) > copies_.size()) throw RangeError("no such copy");
  return copies_[static_cast<std::size_t>(j - 1)].recorded;
}

void DoublingLearner::restart_top() {
  const std::size_t live = live_copies();
  if (live <= 1) {
    top_.reset();
    return;
  }
  const double span = static_cast<double>(copies_[first_live_].guess - day_);
  top_.emplace(live, std::sqrt(std::log(static_cast<double>(live)) / span));
}

std::span<const ExpertId> DoublingLearner::query_set() {
  if (live_copies() == 0) throw HorizonError("every horizon guess has expired");
  query_.clear();
  for (std::size_t c = first_live_; c < copies_.size(); ++c) {
    auto declared = copies_[c].learner->query_set();
    copies_[c].query.assign(declared.begin(), declared.end());
    query_.insert(query_.end(), declared.begin(), declared.end());
  }
  query_ = distinct_experts(std::move(query_));
  return query_;
}

ExpertId DoublingLearner::play() {
  if (live_copies() == 0) throw HorizonError("every horizon guess has expired");
  for (std::size_t c = first_live_; c < copies_.size(); ++c) {
    copies_[c].play = copies_[c].learner->play();
    if (options_.record_copy_plays) copies_[c].recorded.push_back(copies_[c].play);
  }
  chosen_ = top_ ? top_->sample(rng_) : 0;
  played_ = true;
  return copies_[first_live_ + chosen_].play;
}

void DoublingLearner::observe(const DayLosses& losses) {
  if (!played_) throw ContractViolation("observe called before play");
  played_ = false;
  std::vector<double> copy_losses;
  copy_losses.reserve(live_copies());
  for (std::size_t c = first_live_; c < copies_.size(); ++c) {
    copies_[c].learner->observe(losses.restricted(copies_[c].query));
    copy_losses.push_back(losses.unit(copies_[c].play));
  }
  if (top_) top_->update(copy_losses);
  ++day_;
  bool retired = false;
  while (first_live_ < copies_.size() && copies_[first_live_].guess <= day_) {
    copies_[first_live_].learner.reset();
    copies_[first_live_].query.clear();
    ++first_live_;
    retired = true;
  }
  if (retired) restart_top();
}

std::size_t DoublingLearner::tracked_words() const {
  std::size_t words = 4 + 2 * live_copies();
  for (std::size_t c = first_live_; c < copies_.size(); ++c)
    words += copies_[c].learner->tracked_words();
  return words;
}

nlohmann::json DoublingLearner::describe() const {
  return {{"algorithm", "doubling"},
          {"inner", name_},
          {"n", n_},
          {"max_guess", options_.max_guess},
          {"copies", copies_.size()},
          {"seed", seed_}};
}

LearnerPtr unknown_horizon(std::function<Blueprint(Day)> factory, std::size_t n,
                           std::uint64_t seed, UnknownHorizonOptions options) {
  return std::make_unique<DoublingLearner>(std::move(factory), n, seed, options);
}

}  // namespace memexperts
