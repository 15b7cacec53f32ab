#pragma once

#include <cstddef>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "memexperts/harness.hpp"
#include "memexperts/types.hpp"

namespace memexperts {

enum class BlockKind { Stay, Evict, ActualizedStay };

std::string_view to_string(BlockKind kind);

struct BlockLabel {
  int level = 0;
  Day block_index = 0;
  BlockKind label = BlockKind::Evict;
};

struct BlockReport {
  ExpertId best;
  // Every block whose sampling time falls before `days`, by level then index.
  std::vector<BlockLabel> blocks;
  // Blocks visited by the stay-set walk, in order.
  std::vector<BlockLabel> walk;
  std::size_t stay_before_actualization = 0;
  bool actualized = false;

  std::size_t count(int level, BlockKind kind) const;
  const BlockLabel& label(int level, Day block_index) const;
};

// Offline replay of the pools from the sampling trace. For every block and
// sampling slot, the best expert in hindsight is inserted hypothetically in
// place of the real sample and followed through all later evictions of that
// level before day `days`. A slot survives if it is never dominated, or if a
// real copy of that expert with an earlier stamp is still in the level at the
// end. A block is Stay when every slot survives, and ActualizedStay when it
// is Stay and the expert was really sampled there.
BlockReport classify_blocks(const SamplingTrace& trace, const LossStream& stream,
                            const HierarchyConfig& config, Day days);

// (n / m) ln(1 / delta).
double stay_set_reference(std::size_t n, std::size_t m, double delta);

nlohmann::json block_report_json(const BlockReport& report, const HierarchyConfig& config,
                                 double delta);

// Self-contained record of a hierarchical run: config, stream, seeds, trace.
nlohmann::json trace_json(const HierarchyConfig& config, const TrialSpec& spec, Day days,
                          const SamplingTrace& trace);

struct LoadedTrace {
  HierarchyConfig config;
  TrialSpec spec;
  Day days = 0;
  SamplingTrace trace;
};

LoadedTrace parse_trace_json(const nlohmann::json& doc);

}  // namespace memexperts
