#include "memexperts/learner.hpp"

#include <algorithm>
#include <string>

#include "memexperts/errors.hpp"

namespace memexperts {

RunRecord run_learner(OnlineLearner& learner, const LossStream& stream, Day days,
                      const DriverOptions& options) {
  if (learner.experts() != stream.experts())
    throw ConfigError("learner and stream disagree on the number of experts");
  if (days < 0 || days > stream.horizon())
    throw HorizonError("stream has " + std::to_string(stream.horizon()) + " days, " +
                       std::to_string(days) + " requested");

  RunRecord record;
  record.plays.reserve(static_cast<std::size_t>(days));
  record.losses.reserve(static_cast<std::size_t>(days));
  record.peak_words = learner.tracked_words();
  if (options.record_daily_words) record.daily_words.push_back(record.peak_words);

  for (Day day = 0; day < days; ++day) {
    auto declared = learner.query_set();
    std::vector<ExpertId> ids(declared.begin(), declared.end());
    record.peak_query = std::max(record.peak_query, ids.size());

    const ExpertId played = learner.play();
    if (!std::binary_search(ids.begin(), ids.end(), played))
      throw QueryModelViolation("played expert " + std::to_string(played.value) +
                                " is not in the day's query set");

    std::vector<double> values;
    values.reserve(ids.size());
    for (ExpertId e : ids) values.push_back(stream.loss(day, e));
    DayLosses revealed(std::move(ids), std::move(values));

    const double incurred = revealed(played);
    learner.observe(revealed);

    record.plays.push_back(played);
    record.losses.push_back(incurred);
    record.cumulative_loss += incurred;

    const std::size_t words = learner.tracked_words();
    record.peak_words = std::max(record.peak_words, words);
    if (options.record_daily_words) record.daily_words.push_back(words);
  }
  record.config = learner.describe();
  return record;
}

}  // namespace memexperts
