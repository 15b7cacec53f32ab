#include "cli.hpp"

#include <algorithm>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <optional>
#include <ostream>
#include <random>
#include <stdexcept>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "memexperts/diagnostics.hpp"
#include "memexperts/errors.hpp"
#include "memexperts/harness.hpp"
#include "memexperts/hierarchy.hpp"
#include "memexperts/streams.hpp"

namespace memexperts::cli {

namespace {

namespace fs = std::filesystem;

class UsageError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

std::uint64_t resolve_seed(const std::optional<std::uint64_t>& seed, std::ostream& err) {
  if (seed) return *seed;
  std::random_device rd;
  const std::uint64_t drawn = (static_cast<std::uint64_t>(rd()) << 32) ^ rd();
  err << "seed: " << drawn << '\n';
  return drawn;
}

std::ofstream open_output(const fs::path& path) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ConfigError("cannot write " + path.string());
  return out;
}

// Fills n and T from a CSV stream when the flags leave them unset.
void infer_from_file(TrialSpec& spec) {
  if (spec.n > 0 && spec.horizon > 0) return;
  const StreamSpec parsed = parse_stream_spec(spec.stream, 0, 0, 0);
  if (parsed.kind != StreamKind::File) return;
  const StreamPtr stream = ingest(parsed.path);
  if (spec.n == 0) spec.n = stream->experts();
  if (spec.horizon == 0) spec.horizon = stream->horizon();
}

std::optional<HierarchyConfig> hierarchy_config(const TrialSpec& spec) {
  if (spec.unknown_horizon) return std::nullopt;
  if (spec.variant == Variant::Hier)
    return choose_parameters(spec.n, spec.m, spec.horizon, spec.k_offset);
  if (spec.variant == Variant::OneLevel) return one_level_parameters(spec.n, spec.m, spec.horizon);
  return std::nullopt;
}

struct RunFlags {
  std::size_t n = 0;
  std::size_t m = 8;
  Day horizon = 0;
  bool unknown_horizon = false;
  Day max_guess = Day{1} << 20;
  std::string stream = "iid";
  std::string algo = "hier";
  std::optional<std::uint64_t> seed;
  std::string out = ".";
  int k_offset = 1;
};

int cmd_run(const RunFlags& flags, std::ostream& out, std::ostream& err) {
  TrialSpec spec;
  spec.n = flags.n;
  spec.m = flags.m;
  spec.horizon = flags.horizon;
  spec.stream = flags.stream;
  spec.variant = parse_variant(flags.algo);
  spec.k_offset = flags.k_offset;
  spec.unknown_horizon = flags.unknown_horizon;
  spec.max_guess = flags.max_guess;
  infer_from_file(spec);
  if (spec.n == 0) throw UsageError("--n is required unless the stream is a CSV file");
  if (spec.horizon == 0) throw UsageError("--T is required unless the stream is a CSV file");
  if (spec.unknown_horizon && spec.horizon > spec.max_guess)
    throw UsageError("--T exceeds --max-guess");
  spec.seeds = seeds_from(resolve_seed(flags.seed, err));

  const TrialOutcome outcome = run_trial(spec);
  const fs::path dir(flags.out);
  fs::create_directories(dir);
  {
    auto file = open_output(dir / "run.jsonl");
    file << trial_json(spec, outcome).dump() << '\n';
  }
  {
    auto file = open_output(dir / "regret.csv");
    write_regret_csv(regret_curve(outcome.record, *outcome.stream), file);
  }
  if (const auto config = hierarchy_config(spec)) {
    auto file = open_output(dir / "trace.json");
    file << trace_json(*config, spec, spec.horizon, outcome.record.trace).dump() << '\n';
  }
  out << "final_regret " << format_double(outcome.regret) << '\n';
  out << "peak_words " << outcome.record.peak_words << '\n';
  out << "best_expert " << outcome.oracle.best.value << " loss "
      << format_double(outcome.oracle.loss) << '\n';
  return kExitOk;
}

struct SweepFlags {
  std::string grid;
  std::vector<std::size_t> n;
  std::vector<std::size_t> m;
  std::vector<Day> horizon;
  std::vector<std::string> stream;
  std::vector<std::string> variants;
  int trials = 1;
  std::optional<std::uint64_t> seed;
  std::string out = ".";
  int k_offset = 1;
};

template <class T>
std::vector<T> as_list(const nlohmann::json& value) {
  if (value.is_array()) return value.get<std::vector<T>>();
  return {value.get<T>()};
}

void cross_product(SweepConfig& config, const std::vector<std::size_t>& ns,
                   const std::vector<std::size_t>& ms, const std::vector<Day>& ts,
                   const std::vector<std::string>& streams) {
  for (std::size_t n : ns)
    for (std::size_t m : ms)
      for (Day t : ts)
        for (const std::string& s : streams) config.cells.push_back(SweepCell{n, m, t, s});
}

SweepConfig sweep_config(SweepFlags flags, std::ostream& err) {
  SweepConfig config;
  config.trials = flags.trials;
  config.k_offset = flags.k_offset;
  if (!flags.grid.empty()) {
    std::ifstream in(flags.grid);
    if (!in) throw UsageError("cannot open grid file " + flags.grid);
    nlohmann::json grid;
    try {
      grid = nlohmann::json::parse(in);
      if (grid.contains("cells")) {
        for (const auto& c : grid.at("cells"))
          config.cells.push_back(SweepCell{c.at("n").get<std::size_t>(), c.at("m").get<std::size_t>(),
                                           c.at("T").get<Day>(),
                                           c.value("stream", std::string("iid"))});
      } else {
        cross_product(config, as_list<std::size_t>(grid.at("n")), as_list<std::size_t>(grid.at("m")),
                      as_list<Day>(grid.at("T")),
                      grid.contains("stream") ? as_list<std::string>(grid.at("stream"))
                                              : std::vector<std::string>{"iid"});
      }
      if (grid.contains("variants") && flags.variants.empty())
        flags.variants = as_list<std::string>(grid.at("variants"));
      if (grid.contains("trials")) config.trials = grid.at("trials").get<int>();
      if (grid.contains("seed") && !flags.seed) flags.seed = grid.at("seed").get<std::uint64_t>();
      if (grid.contains("k_offset")) config.k_offset = grid.at("k_offset").get<int>();
    } catch (const nlohmann::json::exception& e) {
      throw UsageError("malformed grid file: " + std::string(e.what()));
    }
  } else {
    if (flags.n.empty() || flags.m.empty() || flags.horizon.empty())
      throw UsageError("sweep needs --grid or --n, --m and --T");
    if (flags.stream.empty()) flags.stream.push_back("iid");
    cross_product(config, flags.n, flags.m, flags.horizon, flags.stream);
  }
  if (flags.variants.empty()) flags.variants = {"hier"};
  for (const std::string& v : flags.variants) config.variants.push_back(parse_variant(v));
  if (config.trials < 1) throw UsageError("--trials must be at least 1");
  config.seed = resolve_seed(flags.seed, err);
  return config;
}

int cmd_sweep(const SweepFlags& flags, std::ostream& out, std::ostream& err) {
  const SweepConfig config = sweep_config(flags, err);
  const std::vector<SweepRow> rows = sweep(config);
  const fs::path dir(flags.out);
  fs::create_directories(dir);
  {
    auto file = open_output(dir / "sweep.jsonl");
    write_jsonl(rows, file);
  }
  {
    auto file = open_output(dir / "summary.csv");
    write_summary_csv(config, rows, file);
  }
  write_summary_csv(config, rows, out);
  return kExitOk;
}

struct DiagnoseFlags {
  std::string trace;
  double delta = 0.05;
  std::string out;
};

int cmd_diagnose(const DiagnoseFlags& flags, std::ostream& out) {
  std::ifstream in(flags.trace);
  if (!in) throw ConfigError("cannot open trace file " + flags.trace);
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(in);
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError("malformed trace file: " + std::string(e.what()));
  }
  const LoadedTrace loaded = parse_trace_json(doc);
  const StreamPtr stream = make_stream(loaded.spec);
  const BlockReport report = classify_blocks(loaded.trace, *stream, loaded.config, loaded.days);
  const HierarchyConfig& config = loaded.config;
  out << "best_expert " << report.best.value << '\n';
  for (int i = 0; i < config.levels(); ++i)
    out << "level " << i << " T=" << config.block_size(i)
        << " stay " << report.count(i, BlockKind::Stay)
        << " evict " << report.count(i, BlockKind::Evict)
        << " actualized " << report.count(i, BlockKind::ActualizedStay) << '\n';
  out << "stay_before_actualization " << report.stay_before_actualization
      << (report.actualized ? " (actualized)" : " (not actualized)") << '\n';
  out << "reference (n/m)*ln(1/delta) = "
      << format_double(stay_set_reference(config.experts(), config.space(), flags.delta))
      << " at delta=" << format_double(flags.delta) << '\n';
  if (!flags.out.empty()) {
    auto file = open_output(flags.out);
    file << block_report_json(report, config, flags.delta).dump(2) << '\n';
  }
  return kExitOk;
}

struct StreamFlags {
  std::string stream = "iid";
  std::size_t n = 0;
  Day horizon = 0;
  std::optional<std::uint64_t> seed;
  std::string out = "-";
};

int cmd_stream(const StreamFlags& flags, std::ostream& out, std::ostream& err) {
  StreamSpec spec = parse_stream_spec(flags.stream, flags.n, flags.horizon, 0);
  if (spec.kind != StreamKind::File) {
    if (spec.n == 0 || spec.horizon == 0) throw UsageError("--n and --T are required");
    spec.seed = seeds_from(resolve_seed(flags.seed, err)).stream;
  }
  const StreamPtr stream = generate(spec);
  if (flags.out == "-") {
    write_csv(*stream, out);
  } else {
    auto file = open_output(flags.out);
    write_csv(*stream, file);
  }
  return kExitOk;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Memory-bounded learning with expert advice", "memexperts"};
  app.set_config("--config", "", "Read flags from a TOML or INI file (same key names)");
  app.require_subcommand(1);

  RunFlags run_flags;
  auto* run_cmd = app.add_subcommand("run", "Run one trial");
  run_cmd->add_option("--n", run_flags.n, "Number of experts");
  run_cmd->add_option("--m", run_flags.m, "Space parameter")->check(CLI::PositiveNumber);
  run_cmd->add_option("--T", run_flags.horizon, "Number of days");
  run_cmd->add_flag("--unknown-horizon", run_flags.unknown_horizon,
                    "Run copies for doubling horizon guesses");
  run_cmd->add_option("--max-guess", run_flags.max_guess, "Largest horizon guess")
      ->check(CLI::Range(Day{2}, Day{1} << 40));
  run_cmd->add_option("--stream", run_flags.stream, "Stream spec or CSV path");
  run_cmd->add_option("--algo", run_flags.algo, "Algorithm")
      ->check(CLI::IsMember({"mwu", "onelevel", "hier", "boot"}));
  run_cmd->add_option("--seed", run_flags.seed, "Master seed");
  run_cmd->add_option("--out", run_flags.out, "Output directory");
  run_cmd->add_option("--k-offset", run_flags.k_offset, "Levels subtracted from lg lg(Tm/n)");

  SweepFlags sweep_flags;
  auto* sweep_cmd = app.add_subcommand("sweep", "Run a grid of trials");
  sweep_cmd->add_option("--grid", sweep_flags.grid, "JSON grid file");
  sweep_cmd->add_option("--n", sweep_flags.n, "Expert counts")->delimiter(',');
  sweep_cmd->add_option("--m", sweep_flags.m, "Space parameters")->delimiter(',');
  sweep_cmd->add_option("--T", sweep_flags.horizon, "Horizons")->delimiter(',');
  sweep_cmd->add_option("--stream", sweep_flags.stream, "Stream spec (repeatable)");
  sweep_cmd->add_option("--variants", sweep_flags.variants, "Algorithms")
      ->delimiter(',')
      ->check(CLI::IsMember({"mwu", "onelevel", "hier", "boot"}));
  sweep_cmd->add_option("--trials", sweep_flags.trials, "Trials per cell and variant");
  sweep_cmd->add_option("--seed", sweep_flags.seed, "Master seed");
  sweep_cmd->add_option("--out", sweep_flags.out, "Output directory");
  sweep_cmd->add_option("--k-offset", sweep_flags.k_offset, "Levels subtracted from lg lg(Tm/n)");

  DiagnoseFlags diagnose_flags;
  auto* diagnose_cmd = app.add_subcommand("diagnose", "Classify blocks of a recorded run");
  diagnose_cmd->add_option("--trace", diagnose_flags.trace, "trace.json from a run")->required();
  diagnose_cmd->add_option("--delta", diagnose_flags.delta, "Failure probability")
      ->check(CLI::Range(1e-300, 1.0));
  diagnose_cmd->add_option("--out", diagnose_flags.out, "Write the report as JSON");

  StreamFlags stream_flags;
  auto* stream_cmd = app.add_subcommand("stream", "Write a stream as CSV");
  stream_cmd->add_option("--stream", stream_flags.stream, "Stream spec or CSV path");
  stream_cmd->add_option("--n", stream_flags.n, "Number of experts");
  stream_cmd->add_option("--T", stream_flags.horizon, "Number of days");
  stream_cmd->add_option("--seed", stream_flags.seed, "Master seed");
  stream_cmd->add_option("--out", stream_flags.out, "Output path, - for stdout");

  std::vector<std::string> rest(args.size() > 1 ? args.begin() + 1 : args.end(), args.end());
  std::reverse(rest.begin(), rest.end());
  try {
    app.parse(rest);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitUsage;
  }

  try {
    if (*run_cmd) return cmd_run(run_flags, out, err);
    if (*sweep_cmd) return cmd_sweep(sweep_flags, out, err);
    if (*diagnose_cmd) return cmd_diagnose(diagnose_flags, out);
    if (*stream_cmd) return cmd_stream(stream_flags, out, err);
  } catch (const UsageError& e) {
    err << "usage error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const ConfigError& e) {
    err << "usage error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kExitRuntime;
  }
  return kExitUsage;
}

}  // namespace memexperts::cli
