#include "memexperts/streams.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>

#include "memexperts/errors.hpp"
#include "memexperts/random.hpp"

namespace memexperts {

namespace {

std::string_view trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

template <class T>
bool parse_number(std::string_view text, T& out) {
  text = trim(text);
  if (text.empty()) return false;
  if (text.front() == '+') text.remove_prefix(1);
  const char* end = text.data() + text.size();
  auto [ptr, ec] = std::from_chars(text.data(), end, out);
  return ec == std::errc() && ptr == end;
}

template <class T>
T spec_number(std::string_view key, std::string_view text) {
  T value{};
  if (!parse_number(text, value))
    throw ConfigError("stream option " + std::string(key) + ": cannot parse '" +
                      std::string(text) + "'");
  return value;
}

void check_unit(double v, const char* what) {
  if (!(v >= 0.0 && v <= 1.0)) throw ConfigError(std::string(what) + " must lie in [0, 1]");
}

// Columns of the three-expert overlap pattern.
constexpr double kTrapPattern[3][5] = {
    {1, 0, 0, 0, 1},
    {0, 0, 0, 1, 1},
    {0, 0, 1, 0, 0},
};

std::optional<StreamKind> kind_from_name(std::string_view name) {
  if (name == "iid" || name == "iidbernoulli" || name == "bernoulli")
    return StreamKind::IidBernoulli;
  if (name == "drifting" || name == "driftingbest" || name == "drift")
    return StreamKind::DriftingBest;
  if (name == "evicttrap" || name == "trap") return StreamKind::EvictTrap;
  if (name == "constant" || name == "const") return StreamKind::Constant;
  if (name == "file" || name == "csv") return StreamKind::File;
  return std::nullopt;
}

}  // namespace

std::string_view to_string(StreamKind kind) {
  switch (kind) {
    case StreamKind::IidBernoulli: return "iid";
    case StreamKind::DriftingBest: return "drifting";
    case StreamKind::EvictTrap: return "evicttrap";
    case StreamKind::Constant: return "constant";
    case StreamKind::File: return "file";
  }
  return "unknown";
}

std::string format_double(double value) {
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, value);
  if (ec != std::errc()) throw ContractViolation("cannot format number");
  return std::string(buf, ptr);
}

StreamSpec parse_stream_spec(std::string_view text, std::size_t n, Day horizon,
                             std::uint64_t seed) {
  StreamSpec spec;
  spec.n = n;
  spec.horizon = horizon;
  spec.seed = seed;
  text = trim(text);
  const auto colon = text.find(':');
  const std::string_view head = text.substr(0, colon);
  const auto kind = kind_from_name(head);
  if (!kind) {
    if (text.empty()) throw ConfigError("empty stream spec");
    spec.kind = StreamKind::File;
    spec.path = std::string(text);
    return spec;
  }
  spec.kind = *kind;
  if (colon == std::string_view::npos) {
    if (spec.kind == StreamKind::File) throw ConfigError("file stream needs a path");
    return spec;
  }
  std::string_view rest = text.substr(colon + 1);
  if (spec.kind == StreamKind::File) {
    spec.path = std::string(rest);
    return spec;
  }
  while (!rest.empty()) {
    const auto comma = rest.find(',');
    const std::string_view item = trim(rest.substr(0, comma));
    rest = comma == std::string_view::npos ? std::string_view{} : rest.substr(comma + 1);
    if (item.empty()) continue;
    const auto eq = item.find('=');
    if (eq == std::string_view::npos)
      throw ConfigError("stream option '" + std::string(item) + "' needs key=value");
    const std::string_view key = trim(item.substr(0, eq));
    const std::string_view value = trim(item.substr(eq + 1));
    if (key == "n") spec.n = spec_number<std::size_t>(key, value);
    else if (key == "T") spec.horizon = spec_number<Day>(key, value);
    else if (key == "seed") spec.seed = spec_number<std::uint64_t>(key, value);
    else if (spec.kind == StreamKind::IidBernoulli && key == "p") spec.p = spec_number<double>(key, value);
    else if (spec.kind == StreamKind::IidBernoulli && key == "p_best") spec.p_best = spec_number<double>(key, value);
    else if (spec.kind == StreamKind::IidBernoulli && key == "best") spec.best = spec_number<std::size_t>(key, value);
    else if (spec.kind == StreamKind::DriftingBest && key == "period") spec.period = spec_number<Day>(key, value);
    else if (spec.kind == StreamKind::DriftingBest && key == "background") spec.background = spec_number<double>(key, value);
    else if (spec.kind == StreamKind::EvictTrap && key == "stretch") spec.stretch = spec_number<Day>(key, value);
    else if (spec.kind == StreamKind::Constant && (key == "c" || key == "value")) spec.value = spec_number<double>(key, value);
    else
      throw ConfigError("unknown option '" + std::string(key) + "' for stream kind " +
                        std::string(to_string(spec.kind)));
  }
  return spec;
}

std::string to_string(const StreamSpec& spec) {
  std::string out(to_string(spec.kind));
  switch (spec.kind) {
    case StreamKind::IidBernoulli:
      out += ":p=" + format_double(spec.p) + ",p_best=" + format_double(spec.p_best) +
             ",best=" + std::to_string(spec.best);
      break;
    case StreamKind::DriftingBest:
      out += ":period=" + std::to_string(spec.period) +
             ",background=" + format_double(spec.background);
      break;
    case StreamKind::EvictTrap: out += ":stretch=" + std::to_string(spec.stretch); break;
    case StreamKind::Constant: out += ":c=" + format_double(spec.value); break;
    case StreamKind::File: out += ":" + spec.path; break;
  }
  return out;
}

StreamPtr generate(const StreamSpec& spec) {
  switch (spec.kind) {
    case StreamKind::IidBernoulli:
      return std::make_shared<IidBernoulliStream>(spec.n, spec.horizon, spec.seed, spec.p,
                                                  spec.p_best, spec.best);
    case StreamKind::DriftingBest: {
      const Day period = spec.period > 0 ? spec.period : std::max<Day>(1, spec.horizon / 8);
      return std::make_shared<DriftingBestStream>(spec.n, spec.horizon, spec.seed, period,
                                                  spec.background);
    }
    case StreamKind::EvictTrap:
      return std::make_shared<EvictTrapStream>(spec.n, spec.horizon, spec.stretch);
    case StreamKind::Constant:
      return std::make_shared<ConstantStream>(spec.n, spec.horizon, spec.value);
    case StreamKind::File: {
      std::optional<std::size_t> n;
      std::optional<Day> horizon;
      if (spec.n > 0) n = spec.n;
      if (spec.horizon > 0) horizon = spec.horizon;
      return ingest(spec.path, n, horizon);
    }
  }
  throw ConfigError("unknown stream kind");
}

MatrixStream::MatrixStream(std::size_t n, std::vector<std::vector<double>> rows)
    : n_(n), rows_(std::move(rows)) {
  for (std::size_t d = 0; d < rows_.size(); ++d) {
    if (rows_[d].size() != n_)
      throw ConfigError("row " + std::to_string(d) + " has " + std::to_string(rows_[d].size()) +
                        " values, expected " + std::to_string(n_));
    for (double v : rows_[d])
      if (!(v >= 0.0 && v <= 1.0)) throw RangeError("loss outside [0, 1]");
  }
}

double MatrixStream::loss(Day day, ExpertId expert) const {
  check_day(day);
  return rows_[static_cast<std::size_t>(day)].at(expert.value);
}

IidBernoulliStream::IidBernoulliStream(std::size_t n, Day horizon, std::uint64_t seed, double p,
                                       double p_best, std::size_t best)
    : n_(n), horizon_(horizon), seed_(seed), p_(p), p_best_(p_best), best_(best) {
  if (n_ == 0) throw ConfigError("need at least one expert");
  if (horizon_ < 0) throw ConfigError("horizon must be non-negative");
  check_unit(p_, "p");
  check_unit(p_best_, "p_best");
  if (best_ >= n_) throw ConfigError("best expert index out of range");
}

double IidBernoulliStream::loss(Day day, ExpertId expert) const {
  check_day(day);
  if (expert.value >= n_) throw RangeError("expert id out of range");
  const double p = expert.value == best_ ? p_best_ : p_;
  return hash_uniform(seed_, static_cast<std::uint64_t>(day), expert.value) < p ? 1.0 : 0.0;
}

DriftingBestStream::DriftingBestStream(std::size_t n, Day horizon, std::uint64_t seed, Day period,
                                       double background)
    : horizon_(horizon), seed_(seed), period_(period), background_(background) {
  if (n == 0) throw ConfigError("need at least one expert");
  if (horizon_ < 0) throw ConfigError("horizon must be non-negative");
  if (period_ < 1) throw ConfigError("drift period must be positive");
  check_unit(background_, "background");
  leaders_.reserve(n);
  for (std::size_t e = 0; e < n; ++e) leaders_.push_back(ExpertId{static_cast<std::uint32_t>(e)});
  Rng rng(derive_seed(seed, "leaders"));
  for (std::size_t i = n; i > 1; --i) std::swap(leaders_[i - 1], leaders_[rng.below(i)]);
}

ExpertId DriftingBestStream::leader(Day day) const {
  return leaders_[static_cast<std::size_t>(day / period_) % leaders_.size()];
}

double DriftingBestStream::loss(Day day, ExpertId expert) const {
  check_day(day);
  if (expert.value >= leaders_.size()) throw RangeError("expert id out of range");
  if (expert == leader(day)) return 0.0;
  return hash_uniform(seed_, static_cast<std::uint64_t>(day), expert.value) < background_ ? 1.0
                                                                                           : 0.0;
}

EvictTrapStream::EvictTrapStream(std::size_t n, Day horizon, Day stretch)
    : n_(n), horizon_(horizon), stretch_(stretch) {
  if (n_ == 0) throw ConfigError("need at least one expert");
  if (horizon_ < 0) throw ConfigError("horizon must be non-negative");
  if (stretch_ < 1) throw ConfigError("stretch must be positive");
}

double EvictTrapStream::loss(Day day, ExpertId expert) const {
  check_day(day);
  if (expert.value >= n_) throw RangeError("expert id out of range");
  if (expert.value >= 3) return 1.0;
  return kTrapPattern[expert.value][(day / stretch_) % 5];
}

ConstantStream::ConstantStream(std::size_t n, Day horizon, double value)
    : n_(n), horizon_(horizon), value_(value) {
  if (horizon_ < 0) throw ConfigError("horizon must be non-negative");
  check_unit(value_, "constant loss");
}

double ConstantStream::loss(Day day, ExpertId expert) const {
  check_day(day);
  if (expert.value >= n_) throw RangeError("expert id out of range");
  return value_;
}

StreamPtr parse_csv(std::istream& in, std::optional<std::size_t> n, std::optional<Day> horizon) {
  std::vector<std::vector<double>> rows;
  std::optional<std::size_t> width = n;
  std::optional<Day> declared_rows = horizon;
  std::string line;
  long line_no = 0;
  long last_line = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const std::string_view text = trim(line);
    if (text.empty()) continue;
    if (text.front() == '#') {
      std::istringstream header{std::string(text.substr(1))};
      std::string token;
      while (header >> token) {
        const auto eq = token.find('=');
        if (eq == std::string::npos) continue;
        const std::string key = token.substr(0, eq);
        const std::string_view value = std::string_view(token).substr(eq + 1);
        if (key == "n") {
          std::size_t v = 0;
          if (!parse_number(value, v)) throw ParseError("bad header value for n", line_no);
          if (width && *width != v)
            throw ParseError("header declares n=" + std::to_string(v) + ", expected " +
                                 std::to_string(*width),
                             line_no);
          width = v;
        } else if (key == "T") {
          Day v = 0;
          if (!parse_number(value, v)) throw ParseError("bad header value for T", line_no);
          if (declared_rows && *declared_rows != v)
            throw ParseError("header declares T=" + std::to_string(v) + ", expected " +
                                 std::to_string(*declared_rows),
                             line_no);
          declared_rows = v;
        }
      }
      continue;
    }
    last_line = line_no;
    std::vector<double> row;
    std::string_view rest = text;
    long column = 0;
    while (true) {
      ++column;
      const auto comma = rest.find(',');
      const std::string_view field = rest.substr(0, comma);
      double v = 0.0;
      if (!parse_number(field, v))
        throw ParseError("cannot parse '" + std::string(trim(field)) + "'", line_no, column);
      if (!(v >= 0.0 && v <= 1.0))
        throw ParseError("value " + std::string(trim(field)) + " outside [0, 1]", line_no, column);
      row.push_back(v);
      if (comma == std::string_view::npos) break;
      rest = rest.substr(comma + 1);
    }
    if (!width) width = row.size();
    if (row.size() != *width)
      throw ParseError("expected " + std::to_string(*width) + " values, found " +
                           std::to_string(row.size()),
                       line_no, static_cast<long>(std::min(row.size(), *width) + 1));
    if (declared_rows && static_cast<Day>(rows.size()) >= *declared_rows)
      throw ParseError("more than " + std::to_string(*declared_rows) + " rows", line_no);
    rows.push_back(std::move(row));
  }
  if (declared_rows && static_cast<Day>(rows.size()) != *declared_rows)
    throw ParseError("short file: expected " + std::to_string(*declared_rows) + " rows, found " +
                         std::to_string(rows.size()),
                     last_line + 1);
  return std::make_shared<MatrixStream>(width.value_or(0), std::move(rows));
}

StreamPtr ingest(const std::string& path, std::optional<std::size_t> n,
                 std::optional<Day> horizon) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open stream file " + path);
  return parse_csv(in, n, horizon);
}

void write_csv(const LossStream& stream, std::ostream& out) {
  const std::size_t n = stream.experts();
  out << "# n=" << n << " T=" << stream.horizon() << '\n';
  std::vector<double> row(n);
  std::string line;
  for (Day d = 0; d < stream.horizon(); ++d) {
    stream.day_losses(d, row);
    line.clear();
    for (std::size_t e = 0; e < n; ++e) {
      if (e) line += ',';
      line += format_double(row[e]);
    }
    out << line << '\n';
  }
}

void write_csv(const LossStream& stream, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw ConfigError("cannot write " + path);
  write_csv(stream, out);
  if (!out) throw ConfigError("write failed for " + path);
}

}  // namespace memexperts
