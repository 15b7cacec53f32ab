#pragma once

#include <cstddef>
#include <memory>
#include <span>
#include <vector>

#include "memexperts/types.hpp"

namespace memexperts {

// An oblivious loss sequence: loss(day, e) in [0, 1] for day in [0, horizon).
// Implementations are immutable and safe to share between concurrent runs.
class LossStream {
 public:
  virtual ~LossStream() = default;

  virtual std::size_t experts() const = 0;
  virtual Day horizon() const = 0;

  // Throws HorizonError past the end.
  virtual double loss(Day day, ExpertId expert) const = 0;

  // Whole loss vector for one day; out.size() must equal experts().
  virtual void day_losses(Day day, std::span<double> out) const;

 protected:
  void check_day(Day day) const;
};

using StreamPtr = std::shared_ptr<const LossStream>;

// Sum of an expert's losses over stream days [lo, hi). Throws RangeError if
// the interval leaves [0, horizon).
double interval_loss(const LossStream& stream, ExpertId expert, Day lo, Day hi);

// Stream extended past its end with a constant loss for every expert.
class PaddedStream final : public LossStream {
 public:
  PaddedStream(StreamPtr base, Day horizon, double fill = 0.0);

  std::size_t experts() const override { return base_->experts(); }
  Day horizon() const override { return horizon_; }
  double loss(Day day, ExpertId expert) const override;

 private:
  StreamPtr base_;
  Day horizon_;
  double fill_;
};

// Days [offset, offset + length) of another stream, renumbered from 0.
class StreamWindow final : public LossStream {
 public:
  StreamWindow(StreamPtr base, Day offset, Day length);

  std::size_t experts() const override { return base_->experts(); }
  Day horizon() const override { return length_; }
  double loss(Day day, ExpertId expert) const override;

 private:
  StreamPtr base_;
  Day offset_;
  Day length_;
};

// The losses revealed to a learner on one day: exactly the experts it
// declared. Reading any other expert throws QueryModelViolation.
//
// Values lie in [0, range], or in [-range, range] when is_signed().
class DayLosses {
 public:
  DayLosses() = default;
  // ids must be strictly increasing; values aligned with ids.
  DayLosses(std::vector<ExpertId> ids, std::vector<double> values, double range = 1.0,
            bool is_signed = false);

  double operator()(ExpertId expert) const;
  // The same loss affinely mapped into [0, 1].
  double unit(ExpertId expert) const;

  bool contains(ExpertId expert) const;
  std::span<const ExpertId> ids() const noexcept { return ids_; }
  std::span<const double> values() const noexcept { return values_; }
  double range() const noexcept { return range_; }
  bool is_signed() const noexcept { return signed_; }

  // Restriction to a subset of the declared experts (sorted, unique).
  DayLosses restricted(std::span<const ExpertId> subset) const;

  // Number of distinct experts whose loss has been read so far.
  std::size_t distinct_reads() const;
  bool was_read(ExpertId expert) const;

 private:
  std::size_t index_of(ExpertId expert) const;

  std::vector<ExpertId> ids_;
  std::vector<double> values_;
  double range_ = 1.0;
  bool signed_ = false;
  mutable std::vector<char> read_;
};

// Sorted, deduplicated copy.
std::vector<ExpertId> distinct_experts(std::vector<ExpertId> ids);

}  // namespace memexperts
