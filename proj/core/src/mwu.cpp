#include "memexperts/mwu.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "memexperts/errors.hpp"

namespace memexperts {

double mwu_step(double log_weight, double loss, double eta, double range) {
  if (!(std::abs(loss) <= range))
    throw ContractViolation("loss " + std::to_string(loss) + " exceeds range " +
                            std::to_string(range));
  return std::max(kLogWeightFloor, log_weight - eta * (loss / range));
}

void mwu_probabilities(std::span<const double> log_weights, std::span<double> out) {
  if (log_weights.empty()) throw ConfigError("no weights to normalize");
  const double top = *std::max_element(log_weights.begin(), log_weights.end());
  double total = 0.0;
  for (std::size_t i = 0; i < log_weights.size(); ++i) {
    out[i] = std::exp(log_weights[i] - top);
    total += out[i];
  }
  for (std::size_t i = 0; i < log_weights.size(); ++i) out[i] /= total;
}

std::size_t mwu_sample(std::span<const double> log_weights, Rng& rng) {
  if (log_weights.empty()) throw ConfigError("cannot sample from an empty weight set");
  if (log_weights.size() == 1) return 0;
  const double top = *std::max_element(log_weights.begin(), log_weights.end());
  double total = 0.0;
  for (double lw : log_weights) total += std::exp(lw - top);
  double target = rng.uniform() * total;
  for (std::size_t i = 0; i < log_weights.size(); ++i) {
    target -= std::exp(log_weights[i] - top);
    if (target < 0.0) return i;
  }
  // Rounding can leave a sliver of mass past the end; give it to the last
  // index that carries weight.
  for (std::size_t i = log_weights.size(); i-- > 0;)
    if (std::exp(log_weights[i] - top) > 0.0) return i;
  return log_weights.size() - 1;
}

LearningRates learning_rates(std::size_t bucket_size, Day block_size) {
  const double span = static_cast<double>(std::max<Day>(block_size, 1));
  const double log_size = std::log(static_cast<double>(std::max<std::size_t>(bucket_size, 1)));
  return {std::sqrt(std::max(1.0, log_size) / span), std::sqrt(2.0 / span)};
}

MwuState::MwuState(std::size_t size, double eta) : MwuState(std::vector<double>(size, 0.0), eta) {}

MwuState::MwuState(std::vector<double> log_weights, double eta)
    : log_weights_(std::move(log_weights)), eta_(eta) {
  if (!(eta_ > 0.0)) throw ConfigError("learning rate must be positive");
  for (double& lw : log_weights_) {
    if (std::isnan(lw) || lw == INFINITY) throw ConfigError("log-weights must be finite");
    lw = std::max(lw, kLogWeightFloor);
  }
}

double MwuState::weight(std::size_t i) const { return std::exp(log_weights_.at(i)); }

std::vector<double> MwuState::probabilities() const {
  std::vector<double> out(log_weights_.size());
  mwu_probabilities(log_weights_, out);
  return out;
}

void MwuState::update(std::span<const double> losses, double range) {
  if (losses.size() != log_weights_.size())
    throw ContractViolation("loss vector length does not match weight count");
  for (double l : losses)
    if (!(std::abs(l) <= range)) throw ContractViolation("loss exceeds declared range");
  for (std::size_t i = 0; i < losses.size(); ++i)
    log_weights_[i] = mwu_step(log_weights_[i], losses[i], eta_, range);
}

void MwuState::update_one(std::size_t i, double loss, double range) {
  log_weights_.at(i) = mwu_step(log_weights_[i], loss, eta_, range);
}

void MwuState::reset() { std::fill(log_weights_.begin(), log_weights_.end(), 0.0); }

MwuState mwu_update(MwuState state, std::span<const double> losses, double range) {
  state.update(losses, range);
  return state;
}

double mwu_regret_envelope(std::size_t n, Day horizon) {
  const double t = static_cast<double>(horizon);
  return 4.0 * std::sqrt(t * std::log(static_cast<double>(n) * t));
}

namespace {

double default_eta(std::size_t n, Day horizon) {
  if (horizon < 1) throw ConfigError("horizon must be positive");
  return std::sqrt(std::log(static_cast<double>(std::max<std::size_t>(n, 2))) /
                   static_cast<double>(horizon));
}

}  // namespace

MwuLearner::MwuLearner(std::size_t n, Day horizon, std::uint64_t seed)
    : MwuLearner(n, horizon, default_eta(n, horizon), seed) {}

MwuLearner::MwuLearner(std::size_t n, Day horizon, double eta, std::uint64_t seed)
    : state_(n, eta), horizon_(horizon), seed_(seed), rng_(seed), scratch_(n) {
  if (n == 0) throw ConfigError("need at least one expert");
  all_.reserve(n);
  for (std::size_t e = 0; e < n; ++e) all_.push_back(ExpertId{static_cast<std::uint32_t>(e)});
}

ExpertId MwuLearner::play() { return all_[state_.sample(rng_)]; }

void MwuLearner::observe(const DayLosses& losses) {
  for (std::size_t e = 0; e < all_.size(); ++e) scratch_[e] = losses(all_[e]);
  state_.update(scratch_, losses.range());
}

std::size_t MwuLearner::tracked_words() const { return 2 * state_.size() + 4; }

nlohmann::json MwuLearner::describe() const {
  return {{"algorithm", "mwu"}, {"n", state_.size()}, {"T", horizon_}, {"eta", state_.eta()},
          {"seed", seed_}};
}

}  // namespace memexperts
