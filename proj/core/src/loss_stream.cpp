#include "memexperts/loss_stream.hpp"

#include <algorithm>
#include <string>

#include "memexperts/errors.hpp"

namespace memexperts {

void LossStream::check_day(Day day) const {
  if (day < 0 || day >= horizon())
    throw HorizonError("day " + std::to_string(day) + " outside stream horizon " +
                       std::to_string(horizon()));
}

void LossStream::day_losses(Day day, std::span<double> out) const {
  for (std::size_t e = 0; e < out.size(); ++e)
    out[e] = loss(day, ExpertId{static_cast<std::uint32_t>(e)});
}

double interval_loss(const LossStream& stream, ExpertId expert, Day lo, Day hi) {
  if (lo < 0 || hi < lo || hi > stream.horizon())
    throw RangeError("interval [" + std::to_string(lo) + ", " + std::to_string(hi) +
                     ") outside [0, " + std::to_string(stream.horizon()) + ")");
  if (expert.value >= stream.experts()) throw RangeError("expert id out of range");
  double total = 0.0;
  for (Day d = lo; d < hi; ++d) total += stream.loss(d, expert);
  return total;
}

PaddedStream::PaddedStream(StreamPtr base, Day horizon, double fill)
    : base_(std::move(base)), horizon_(horizon), fill_(fill) {
  if (!base_) throw ConfigError("padded stream needs a base stream");
  if (horizon_ < base_->horizon()) throw ConfigError("padding cannot shorten a stream");
  if (fill_ < 0.0 || fill_ > 1.0) throw ConfigError("padding loss must lie in [0, 1]");
}

double PaddedStream::loss(Day day, ExpertId expert) const {
  check_day(day);
  if (day < base_->horizon()) return base_->loss(day, expert);
  return fill_;
}

StreamWindow::StreamWindow(StreamPtr base, Day offset, Day length)
    : base_(std::move(base)), offset_(offset), length_(length) {
  if (!base_) throw ConfigError("window needs a base stream");
  if (offset_ < 0 || length_ < 0 || offset_ + length_ > base_->horizon())
    throw RangeError("window outside base stream");
}

double StreamWindow::loss(Day day, ExpertId expert) const {
  check_day(day);
  return base_->loss(offset_ + day, expert);
}

DayLosses::DayLosses(std::vector<ExpertId> ids, std::vector<double> values, double range,
                     bool is_signed)
    : ids_(std::move(ids)),
      values_(std::move(values)),
      range_(range),
      signed_(is_signed),
      read_(ids_.size(), 0) {
  if (ids_.size() != values_.size()) throw ContractViolation("ids and values differ in length");
  if (!(range_ > 0.0)) throw ContractViolation("loss range must be positive");
  for (std::size_t i = 1; i < ids_.size(); ++i)
    if (!(ids_[i - 1] < ids_[i])) throw ContractViolation("query ids must be sorted and unique");
}

std::size_t DayLosses::index_of(ExpertId expert) const {
  auto it = std::lower_bound(ids_.begin(), ids_.end(), expert);
  if (it == ids_.end() || *it != expert)
    throw QueryModelViolation("loss of expert " + std::to_string(expert.value) +
                              " read without being queried");
  return static_cast<std::size_t>(it - ids_.begin());
}

double DayLosses::operator()(ExpertId expert) const {
  const std::size_t i = index_of(expert);
  read_[i] = 1;
  return values_[i];
}

double DayLosses::unit(ExpertId expert) const {
  const double x = (*this)(expert);
  return signed_ ? 0.5 * (x / range_ + 1.0) : x / range_;
}

bool DayLosses::contains(ExpertId expert) const {
  return std::binary_search(ids_.begin(), ids_.end(), expert);
}

DayLosses DayLosses::restricted(std::span<const ExpertId> subset) const {
  std::vector<ExpertId> ids(subset.begin(), subset.end());
  std::vector<double> values;
  values.reserve(ids.size());
  for (ExpertId e : ids) values.push_back((*this)(e));
  return DayLosses(std::move(ids), std::move(values), range_, signed_);
}

std::size_t DayLosses::distinct_reads() const {
  return static_cast<std::size_t>(std::count(read_.begin(), read_.end(), 1));
}

bool DayLosses::was_read(ExpertId expert) const {
  auto it = std::lower_bound(ids_.begin(), ids_.end(), expert);
  return it != ids_.end() && *it == expert && read_[static_cast<std::size_t>(it - ids_.begin())];
}

std::vector<ExpertId> distinct_experts(std::vector<ExpertId> ids) {
  std::sort(ids.begin(), ids.end());
  ids.erase(std::unique(ids.begin(), ids.end()), ids.end());
  return ids;
}

}  // namespace memexperts
