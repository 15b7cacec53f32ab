#include "memexperts/diagnostics.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "memexperts/errors.hpp"
#include "memexperts/pool.hpp"

namespace memexperts {

std::string_view to_string(BlockKind kind) {
  switch (kind) {
    case BlockKind::Stay: return "stay";
    case BlockKind::Evict: return "evict";
    case BlockKind::ActualizedStay: return "actualized";
  }
  return "unknown";
}

std::size_t BlockReport::count(int level, BlockKind kind) const {
  return static_cast<std::size_t>(std::count_if(blocks.begin(), blocks.end(), [&](const BlockLabel& b) {
    return b.level == level && b.label == kind;
  }));
}

const BlockLabel& BlockReport::label(int level, Day block_index) const {
  for (const BlockLabel& b : blocks)
    if (b.level == level && b.block_index == block_index) return b;
  throw RangeError("no label for level " + std::to_string(level) + " block " +
                   std::to_string(block_index));
}

namespace {

struct Ghost {
  Day start = 0;
  double loss = 0.0;
  std::vector<char> alive;
  bool sampled = false;
};

}  // namespace

BlockReport classify_blocks(const SamplingTrace& trace, const LossStream& stream,
                            const HierarchyConfig& config, Day days) {
  if (stream.experts() != config.experts())
    throw ConfigError("stream and config disagree on the number of experts");
  if (days < 1 || days > stream.horizon() || days > config.horizon())
    throw HorizonError("diagnostic window outside the stream or config horizon");

  BlockReport report;
  report.best = hindsight_oracle(stream, days).best;
  const ExpertId best = report.best;
  const std::size_t m = config.space();
  const double eps = config.epsilon();
  const int k = config.levels();

  std::vector<std::vector<Ghost>> ghosts(static_cast<std::size_t>(k));
  auto add_ghosts = [&](Day t, int top) {
    for (int i = 0; i <= top; ++i) {
      Ghost g;
      g.start = t;
      g.alive.assign(m, 1);
      for (const SampleRecord& r : trace)
        if (r.level == i && r.stamp.day == t && r.expert == best) g.sampled = true;
      ghosts[static_cast<std::size_t>(i)].push_back(std::move(g));
    }
  };

  std::vector<double> prefix_min;
  UpdateHooks hooks;
  hooks.before_eviction = [&](int level, const Bucket& bucket, const ArrivalStamp& boundary) {
    const auto& entries = bucket.entries;
    prefix_min.assign(entries.size() + 1, INFINITY);
    for (std::size_t j = 0; j < entries.size(); ++j)
      prefix_min[j + 1] = std::min(prefix_min[j], entries[j].loss_since_arrival);
    for (Ghost& g : ghosts[static_cast<std::size_t>(level)]) {
      if (ArrivalStamp{g.start, Phase::Sampled, 0} < boundary) continue;
      const double threshold = (1.0 + eps) * g.loss;
      for (std::uint32_t slot = 0; slot < m; ++slot) {
        if (!g.alive[slot]) continue;
        const ArrivalStamp stamp{g.start, Phase::Sampled, slot};
        const auto before = std::lower_bound(
            entries.begin(), entries.end(), stamp,
            [](const PoolEntry& e, const ArrivalStamp& s) { return e.arrival < s; });
        if (prefix_min[static_cast<std::size_t>(before - entries.begin())] <= threshold)
          g.alive[slot] = 0;
      }
    }
  };

  PoolState pools = PoolState::empty(config);
  TraceReplaySource source(trace);
  update_buckets(pools, config, 0, source, nullptr, &hooks);
  add_ghosts(0, k - 1);

  const Day t0 = config.block_size(0);
  std::vector<double> row(config.experts());
  for (Day d = 0; d < days; ++d) {
    stream.day_losses(d, row);
    accumulate_losses(pools, [&](ExpertId e) { return row[e.value]; });
    for (auto& level : ghosts)
      for (Ghost& g : level) g.loss += row[best.value];
    const Day t = d + 1;
    if (t % t0 == 0 && t < config.horizon() && t < days) {
      const BucketUpdateReport rep = update_buckets(pools, config, t, source, nullptr, &hooks);
      add_ghosts(t, rep.top_level);
    }
  }

  std::vector<std::vector<BlockKind>> labels(static_cast<std::size_t>(k));
  for (int i = 0; i < k; ++i) {
    const Bucket& bucket = pools.buckets[static_cast<std::size_t>(i)];
    for (const Ghost& g : ghosts[static_cast<std::size_t>(i)]) {
      bool stay = true;
      for (std::uint32_t slot = 0; slot < m && stay; ++slot) {
        if (g.alive[slot]) continue;
        const ArrivalStamp stamp{g.start, Phase::Sampled, slot};
        stay = std::any_of(bucket.entries.begin(), bucket.entries.end(), [&](const PoolEntry& e) {
          return e.expert == best && e.arrival < stamp;
        });
      }
      const BlockKind kind = !stay ? BlockKind::Evict
                             : g.sampled ? BlockKind::ActualizedStay
                                         : BlockKind::Stay;
      labels[static_cast<std::size_t>(i)].push_back(kind);
      report.blocks.push_back(BlockLabel{i, g.start / config.block_size(i), kind});
    }
  }

  Day t = 0;
  int level = k - 1;
  while (t < days) {
    const Day index = t / config.block_size(level);
    const auto& per_level = labels[static_cast<std::size_t>(level)];
    if (index >= static_cast<Day>(per_level.size())) break;
    const BlockKind kind = per_level[static_cast<std::size_t>(index)];
    report.walk.push_back(BlockLabel{level, index, kind});
    if (kind == BlockKind::Evict) {
      t += config.block_size(level);
      if (t >= days) break;
      level = top_touched_level(config, t);
      continue;
    }
    if (kind == BlockKind::ActualizedStay) {
      report.actualized = true;
      break;
    }
    ++report.stay_before_actualization;
    if (level == 0) {
      t += t0;
      if (t >= days) break;
      level = top_touched_level(config, t);
    } else {
      --level;
    }
  }
  return report;
}

double stay_set_reference(std::size_t n, std::size_t m, double delta) {
  return static_cast<double>(n) / static_cast<double>(m) * std::log(1.0 / delta);
}

nlohmann::json block_report_json(const BlockReport& report, const HierarchyConfig& config,
                                 double delta) {
  nlohmann::json levels = nlohmann::json::array();
  for (int i = 0; i < config.levels(); ++i)
    levels.push_back({{"level", i},
                      {"block_size", config.block_size(i)},
                      {"stay", report.count(i, BlockKind::Stay)},
                      {"evict", report.count(i, BlockKind::Evict)},
                      {"actualized", report.count(i, BlockKind::ActualizedStay)}});
  const double reference = stay_set_reference(config.experts(), config.space(), delta);
  return {{"best_expert", report.best.value},
          {"levels", levels},
          {"walk_length", report.walk.size()},
          {"stay_before_actualization", report.stay_before_actualization},
          {"actualized", report.actualized},
          {"delta", delta},
          {"reference", reference},
          {"within_reference",
           static_cast<double>(report.stay_before_actualization) <= reference}};
}

nlohmann::json trace_json(const HierarchyConfig& config, const TrialSpec& spec, Day days,
                          const SamplingTrace& trace) {
  nlohmann::json samples = nlohmann::json::array();
  for (const SampleRecord& r : trace)
    samples.push_back({r.level, r.stamp.day, r.stamp.seq, r.expert.value});
  return {{"config",
           {{"n", config.experts()},
            {"m", config.space()},
            {"block_sizes", config.block_sizes()},
            {"horizon", config.horizon()}}},
          {"days", days},
          {"stream", spec.stream},
          {"T", spec.horizon},
          {"variant", to_string(spec.variant)},
          {"seeds", {{"stream", spec.seeds.stream}, {"algorithm", spec.seeds.algorithm}}},
          {"samples", samples}};
}

LoadedTrace parse_trace_json(const nlohmann::json& doc) {
  try {
    const auto& c = doc.at("config");
    HierarchyConfig config(c.at("n").get<std::size_t>(), c.at("m").get<std::size_t>(),
                           c.at("block_sizes").get<std::vector<Day>>(),
                           c.at("horizon").get<Day>());
    TrialSpec spec;
    spec.n = config.experts();
    spec.m = config.space();
    spec.horizon = doc.at("T").get<Day>();
    spec.stream = doc.at("stream").get<std::string>();
    spec.variant = parse_variant(doc.at("variant").get<std::string>());
    spec.seeds.stream = doc.at("seeds").at("stream").get<std::uint64_t>();
    spec.seeds.algorithm = doc.at("seeds").at("algorithm").get<std::uint64_t>();
    SamplingTrace trace;
    for (const auto& s : doc.at("samples")) {
      trace.push_back(SampleRecord{s.at(0).get<int>(),
                                   ArrivalStamp{s.at(1).get<Day>(), Phase::Sampled,
                                                s.at(2).get<std::uint32_t>()},
                                   ExpertId{s.at(3).get<std::uint32_t>()}});
    }
    return LoadedTrace{std::move(config), std::move(spec), doc.at("days").get<Day>(),
                       std::move(trace)};
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("malformed trace: ") + e.what());
  }
}

}  // namespace memexperts
