#include "memexperts/harness.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdlib>
#include <exception>
#include <mutex>
#include <ostream>
#include <thread>

#include "memexperts/errors.hpp"
#include "memexperts/hierarchy.hpp"
#include "memexperts/mwu.hpp"
#include "memexperts/streams.hpp"

namespace memexperts {

OracleResult hindsight_oracle(const LossStream& stream, Day days) {
  if (days < 0) days = stream.horizon();
  if (days > stream.horizon()) throw HorizonError("oracle window longer than the stream");
  OracleResult best{ExpertId{0}, INFINITY};
  for (std::uint32_t e = 0; e < stream.experts(); ++e) {
    const double total = interval_loss(stream, ExpertId{e}, 0, days);
    if (total < best.loss) best = {ExpertId{e}, total};
  }
  if (stream.experts() == 0) best.loss = 0.0;
  return best;
}

HindsightTracker::HindsightTracker(std::size_t n) : totals_(n, 0.0) {}

void HindsightTracker::observe(std::span<const double> day_losses) {
  if (day_losses.size() != totals_.size()) throw ContractViolation("loss vector length mismatch");
  for (std::size_t e = 0; e < totals_.size(); ++e) totals_[e] += day_losses[e];
  ++days_;
}

OracleResult HindsightTracker::best() const {
  OracleResult best{ExpertId{0}, totals_.empty() ? 0.0 : totals_[0]};
  for (std::size_t e = 1; e < totals_.size(); ++e)
    if (totals_[e] < best.loss) best = {ExpertId{static_cast<std::uint32_t>(e)}, totals_[e]};
  return best;
}

std::vector<double> regret_curve(const RunRecord& record, const LossStream& stream) {
  const Day days = record.days();
  if (days > stream.horizon()) throw HorizonError("record is longer than the stream");
  const OracleResult oracle = hindsight_oracle(stream, days);
  std::vector<double> curve;
  curve.reserve(static_cast<std::size_t>(days));
  double alg = 0.0;
  double best = 0.0;
  for (Day d = 0; d < days; ++d) {
    alg += record.losses[static_cast<std::size_t>(d)];
    best += stream.loss(d, oracle.best);
    curve.push_back(alg - best);
  }
  return curve;
}

double final_regret(const RunRecord& record, const LossStream& stream) {
  return record.cumulative_loss - hindsight_oracle(stream, record.days()).loss;
}

void SpaceAccountant::observe(std::size_t words) {
  peak_ = std::max(peak_, words);
  samples_.push_back(words);
}

void SpaceAccountant::observe(const PoolState& pools) { observe(pool_words(pools)); }

std::string_view to_string(Variant variant) {
  switch (variant) {
    case Variant::Mwu: return "mwu";
    case Variant::OneLevel: return "onelevel";
    case Variant::Hier: return "hier";
    case Variant::Boot: return "boot";
  }
  return "unknown";
}

Variant parse_variant(std::string_view name) {
  if (name == "mwu") return Variant::Mwu;
  if (name == "onelevel") return Variant::OneLevel;
  if (name == "hier") return Variant::Hier;
  if (name == "boot") return Variant::Boot;
  throw ConfigError("unknown algorithm '" + std::string(name) + "'");
}

Day boot_episode_length(Day horizon) {
  Day length = 1;
  while (length * length < horizon) length *= 2;
  return std::max<Day>(length, 2);
}

Blueprint variant_blueprint(Variant variant, std::size_t n, std::size_t m, Day horizon,
                            int k_offset) {
  switch (variant) {
    case Variant::Mwu: return mwu_blueprint(n, horizon);
    case Variant::OneLevel: return hierarchical_blueprint(one_level_parameters(n, m, horizon));
    case Variant::Hier: return hierarchical_blueprint(choose_parameters(n, m, horizon, k_offset));
    case Variant::Boot: {
      const Blueprint inner = hierarchical_blueprint(
          choose_parameters(n, m, boot_episode_length(horizon), k_offset));
      const Day episodes = std::max<Day>(2, (horizon + inner.horizon - 1) / inner.horizon);
      const Blueprint outer =
          hierarchical_blueprint(choose_parameters(n, m, episodes, k_offset));
      return compose(outer, inner);
    }
  }
  throw ConfigError("unknown variant");
}

RunSeeds seeds_from(std::uint64_t seed) {
  return RunSeeds{derive_seed(seed, "stream"), derive_seed(seed, "algorithm")};
}

StreamPtr make_stream(const TrialSpec& spec) {
  return generate(parse_stream_spec(spec.stream, spec.n, spec.horizon, spec.seeds.stream));
}

LearnerPtr make_learner(const TrialSpec& spec) {
  if (spec.unknown_horizon) {
    const Variant variant = spec.variant;
    const std::size_t n = spec.n;
    const std::size_t m = spec.m;
    const int k_offset = spec.k_offset;
    auto factory = [variant, n, m, k_offset](Day guess) {
      return variant_blueprint(variant, n, m, guess, k_offset);
    };
    return unknown_horizon(factory, spec.n, spec.seeds.algorithm,
                           UnknownHorizonOptions{spec.max_guess, false});
  }
  return variant_blueprint(spec.variant, spec.n, spec.m, spec.horizon, spec.k_offset)
      .make(spec.seeds.algorithm);
}

TrialOutcome run_trial(const TrialSpec& spec, const DriverOptions& options) {
  TrialOutcome outcome;
  outcome.stream = make_stream(spec);
  if (outcome.stream->experts() != spec.n)
    throw ConfigError("stream has " + std::to_string(outcome.stream->experts()) +
                      " experts, expected " + std::to_string(spec.n));
  if (outcome.stream->horizon() < spec.horizon)
    throw HorizonError("stream has " + std::to_string(outcome.stream->horizon()) +
                       " days, expected " + std::to_string(spec.horizon));
  LearnerPtr learner = make_learner(spec);
  if (learner->horizon() < spec.horizon)
    throw HorizonError("learner horizon shorter than the run");
  outcome.record = run_learner(*learner, *outcome.stream, spec.horizon, options);
  if (const auto* hier = dynamic_cast<const HierarchicalLearner*>(learner.get()))
    outcome.record.trace = hier->trace();
  outcome.record.seeds = spec.seeds;
  outcome.oracle = hindsight_oracle(*outcome.stream, spec.horizon);
  outcome.regret = outcome.record.cumulative_loss - outcome.oracle.loss;
  return outcome;
}

nlohmann::json trial_json(const TrialSpec& spec, const TrialOutcome& outcome) {
  return {{"variant", to_string(spec.variant)},
          {"n", spec.n},
          {"m", spec.m},
          {"T", spec.horizon},
          {"stream", spec.stream},
          {"unknown_horizon", spec.unknown_horizon},
          {"seeds", {{"stream", spec.seeds.stream}, {"algorithm", spec.seeds.algorithm}}},
          {"final_regret", outcome.regret},
          {"cumulative_loss", outcome.record.cumulative_loss},
          {"best_expert", outcome.oracle.best.value},
          {"best_loss", outcome.oracle.loss},
          {"peak_words", outcome.record.peak_words},
          {"peak_query", outcome.record.peak_query},
          {"config", outcome.record.config}};
}

RunSeeds sweep_seeds(std::uint64_t seed, std::size_t cell, int trial) {
  const std::uint64_t base =
      derive_seed(derive_seed(derive_seed(seed, "cell"), cell), static_cast<std::uint64_t>(trial));
  return seeds_from(base);
}

unsigned sweep_threads() {
  unsigned threads = std::max(1u, std::thread::hardware_concurrency());
  if (const char* env = std::getenv("MEMEXPERTS_THREADS")) {
    const long cap = std::strtol(env, nullptr, 10);
    if (cap >= 1) threads = std::min(threads, static_cast<unsigned>(cap));
  }
  return threads;
}

std::vector<SweepRow> sweep(const SweepConfig& config, unsigned threads) {
  if (config.trials < 1) throw ConfigError("need at least one trial");
  if (config.variants.empty()) throw ConfigError("need at least one variant");
  std::vector<SweepRow> rows;
  for (std::size_t c = 0; c < config.cells.size(); ++c)
    for (Variant v : config.variants)
      for (int t = 0; t < config.trials; ++t) {
        SweepRow row;
        row.cell = c;
        row.variant = v;
        row.trial = t;
        const SweepCell& cell = config.cells[c];
        row.spec = TrialSpec{cell.n, cell.m, cell.horizon, cell.stream, v,
                             sweep_seeds(config.seed, c, t), config.k_offset};
        rows.push_back(std::move(row));
      }

  if (threads == 0) threads = sweep_threads();
  threads = std::max(1u, std::min<unsigned>(threads, static_cast<unsigned>(rows.size())));
  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_lock;
  auto worker = [&] {
    while (true) {
      const std::size_t i = next.fetch_add(1);
      if (i >= rows.size()) return;
      try {
        SweepRow& row = rows[i];
        TrialOutcome outcome = run_trial(row.spec);
        row.regret = outcome.regret;
        row.cumulative_loss = outcome.record.cumulative_loss;
        row.oracle = outcome.oracle;
        row.peak_words = outcome.record.peak_words;
        row.peak_query = outcome.record.peak_query;
        row.config = std::move(outcome.record.config);
      } catch (...) {
        std::lock_guard<std::mutex> lock(failure_lock);
        if (!failure) failure = std::current_exception();
        next = rows.size();
        return;
      }
    }
  };
  if (threads == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (unsigned i = 0; i < threads; ++i) pool.emplace_back(worker);
    for (std::thread& th : pool) th.join();
  }
  if (failure) std::rethrow_exception(failure);
  return rows;
}

nlohmann::json sweep_row_json(const SweepRow& row) {
  return {{"cell", row.cell},
          {"trial", row.trial},
          {"variant", to_string(row.variant)},
          {"n", row.spec.n},
          {"m", row.spec.m},
          {"T", row.spec.horizon},
          {"stream", row.spec.stream},
          {"seeds", {{"stream", row.spec.seeds.stream}, {"algorithm", row.spec.seeds.algorithm}}},
          {"final_regret", row.regret},
          {"cumulative_loss", row.cumulative_loss},
          {"best_expert", row.oracle.best.value},
          {"best_loss", row.oracle.loss},
          {"peak_words", row.peak_words},
          {"peak_query", row.peak_query},
          {"config", row.config}};
}

void write_jsonl(const std::vector<SweepRow>& rows, std::ostream& out) {
  for (const SweepRow& row : rows) out << sweep_row_json(row).dump() << '\n';
}

double quantile(std::vector<double> values, double q) {
  if (values.empty()) throw ConfigError("quantile of an empty sample");
  std::sort(values.begin(), values.end());
  const double pos = q * static_cast<double>(values.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const auto hi = std::min(lo + 1, values.size() - 1);
  const double frac = pos - static_cast<double>(lo);
  return values[lo] + frac * (values[hi] - values[lo]);
}

double median(std::vector<double> values) { return quantile(std::move(values), 0.5); }

void write_summary_csv(const SweepConfig& config, const std::vector<SweepRow>& rows,
                       std::ostream& out) {
  out << "cell,n,m,T,stream";
  for (Variant v : config.variants) {
    const std::string name(to_string(v));
    out << ',' << name << "_median_regret," << name << "_q10_regret," << name << "_q90_regret,"
        << name << "_median_peak_words";
  }
  out << '\n';
  for (std::size_t c = 0; c < config.cells.size(); ++c) {
    const SweepCell& cell = config.cells[c];
    out << c << ',' << cell.n << ',' << cell.m << ',' << cell.horizon << ",\"" << cell.stream
        << '"';
    for (Variant v : config.variants) {
      std::vector<double> regrets;
      std::vector<double> words;
      for (const SweepRow& row : rows)
        if (row.cell == c && row.variant == v) {
          regrets.push_back(row.regret);
          words.push_back(static_cast<double>(row.peak_words));
        }
      out << ',' << format_double(median(regrets)) << ',' << format_double(quantile(regrets, 0.1))
          << ',' << format_double(quantile(regrets, 0.9)) << ',' << format_double(median(words));
    }
    out << '\n';
  }
}

void write_regret_csv(const std::vector<double>& curve, std::ostream& out) {
  out << "day,cumulative_regret\n";
  for (std::size_t d = 0; d < curve.size(); ++d)
    out << (d + 1) << ',' << format_double(curve[d]) << '\n';
}

}  // namespace memexperts
