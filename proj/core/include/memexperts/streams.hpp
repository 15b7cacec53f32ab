#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "memexperts/loss_stream.hpp"

namespace memexperts {

enum class StreamKind { IidBernoulli, DriftingBest, EvictTrap, Constant, File };

std::string_view to_string(StreamKind kind);

struct StreamSpec {
  StreamKind kind = StreamKind::IidBernoulli;
  std::size_t n = 0;
  Day horizon = 0;
  std::uint64_t seed = 0;

  // IidBernoulli: expert `best` has mean p_best, everyone else p.
  double p = 0.5;
  double p_best = 0.3;
  std::size_t best = 0;

  // DriftingBest: a seeded rotation of leaders, each holding zero loss for
  // `period` days (0 picks horizon / 8); the rest draw Bernoulli(background).
  Day period = 0;
  double background = 0.5;

  // EvictTrap: each column of the three-expert pattern lasts `stretch` days.
  Day stretch = 1;

  // Constant
  double value = 0.5;

  // File
  std::string path;
};

// Parses "kind[:key=value,...]" or a CSV path. n, T and seed fill the
// corresponding fields; keys may override them.
StreamSpec parse_stream_spec(std::string_view text, std::size_t n, Day horizon,
                             std::uint64_t seed);

// Inverse of parse_stream_spec for everything except n, T and seed.
std::string to_string(const StreamSpec& spec);

// A replayable stream for a StreamSpec. Generated kinds compute each loss on
// demand from (seed, day, expert) and hold no per-day state.
StreamPtr generate(const StreamSpec& spec);

// Dense row-per-day matrix.
class MatrixStream final : public LossStream {
 public:
  MatrixStream(std::size_t n, std::vector<std::vector<double>> rows);

  std::size_t experts() const override { return n_; }
  Day horizon() const override { return static_cast<Day>(rows_.size()); }
  double loss(Day day, ExpertId expert) const override;

 private:
  std::size_t n_;
  std::vector<std::vector<double>> rows_;
};

class IidBernoulliStream final : public LossStream {
 public:
  IidBernoulliStream(std::size_t n, Day horizon, std::uint64_t seed, double p, double p_best,
                     std::size_t best);

  std::size_t experts() const override { return n_; }
  Day horizon() const override { return horizon_; }
  double loss(Day day, ExpertId expert) const override;

 private:
  std::size_t n_;
  Day horizon_;
  std::uint64_t seed_;
  double p_;
  double p_best_;
  std::size_t best_;
};

class DriftingBestStream final : public LossStream {
 public:
  DriftingBestStream(std::size_t n, Day horizon, std::uint64_t seed, Day period,
                     double background);

  std::size_t experts() const override { return leaders_.size(); }
  Day horizon() const override { return horizon_; }
  double loss(Day day, ExpertId expert) const override;

  ExpertId leader(Day day) const;
  Day period() const noexcept { return period_; }

 private:
  Day horizon_;
  std::uint64_t seed_;
  Day period_;
  double background_;
  std::vector<ExpertId> leaders_;
};

class EvictTrapStream final : public LossStream {
 public:
  EvictTrapStream(std::size_t n, Day horizon, Day stretch);

  std::size_t experts() const override { return n_; }
  Day horizon() const override { return horizon_; }
  double loss(Day day, ExpertId expert) const override;

 private:
  std::size_t n_;
  Day horizon_;
  Day stretch_;
};

class ConstantStream final : public LossStream {
 public:
  ConstantStream(std::size_t n, Day horizon, double value);

  std::size_t experts() const override { return n_; }
  Day horizon() const override { return horizon_; }
  double loss(Day day, ExpertId expert) const override;

 private:
  std::size_t n_;
  Day horizon_;
  double value_;
};

// CSV: optional "# n=<n> T=<T>" header, then one row of n values per day.
// Expected n and T, when given, must match the file.
StreamPtr ingest(const std::string& path, std::optional<std::size_t> n = std::nullopt,
                 std::optional<Day> horizon = std::nullopt);
StreamPtr parse_csv(std::istream& in, std::optional<std::size_t> n = std::nullopt,
                    std::optional<Day> horizon = std::nullopt);

// Shortest decimal that round-trips to the same double.
std::string format_double(double value);

void write_csv(const LossStream& stream, std::ostream& out);
void write_csv(const LossStream& stream, const std::string& path);

}  // namespace memexperts
