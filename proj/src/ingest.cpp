#include "gwmv/ingest.hpp"

#include "gwmv/error.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <charconv>
#include <chrono>
#include <cmath>
#include <fstream>
#include <istream>
#include <optional>
#include <ostream>

namespace gwmv {

const char* to_string(FillPolicy f) {
  switch (f) {
    case FillPolicy::none: return "none";
    case FillPolicy::zero: return "zero";
    case FillPolicy::previous: return "previous";
  }
  return "none";
}

FillPolicy fill_policy_from_string(const std::string& s) {
  if (s == "none") return FillPolicy::none;
  if (s == "zero") return FillPolicy::zero;
  if (s == "previous") return FillPolicy::previous;
  throw InvalidInput("unknown fill policy '" + s + "' (expected none|zero|previous)");
}

const char* to_string(Normalization n) {
  switch (n) {
    case Normalization::none: return "none";
    case Normalization::zscore: return "zscore";
    case Normalization::max: return "max";
  }
  return "none";
}

Normalization normalization_from_string(const std::string& s) {
  if (s == "none") return Normalization::none;
  if (s == "zscore") return Normalization::zscore;
  if (s == "max") return Normalization::max;
  throw InvalidInput("unknown normalization '" + s + "' (expected none|zscore|max)");
}

namespace {

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  if (s.size() >= 2 && s.front() == '"' && s.back() == '"') s = s.substr(1, s.size() - 2);
  return s;
}

std::vector<std::string_view> split(std::string_view line, char delim) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  for (;;) {
    const auto pos = line.find(delim, start);
    if (pos == std::string_view::npos) {
      out.push_back(trim(line.substr(start)));
      return out;
    }
    out.push_back(trim(line.substr(start, pos - start)));
    start = pos + 1;
  }
}

int to_int(std::string_view s) {
  int v = 0;
  const auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || p != s.data() + s.size()) throw InvalidInput(fmt::format("bad number '{}'", s));
  return v;
}

std::int64_t minutes_since_epoch(int y, int mo, int d, int h, int mi) {
  using namespace std::chrono;
  const year_month_day ymd{year{y}, month{static_cast<unsigned>(mo)}, day{static_cast<unsigned>(d)}};
  if (!ymd.ok()) throw InvalidInput(fmt::format("invalid date {:04}-{:02}-{:02}", y, mo, d));
  if (h < 0 || h > 23 || mi < 0 || mi > 59) throw InvalidInput(fmt::format("invalid time {:02}:{:02}", h, mi));
  return static_cast<std::int64_t>(sys_days{ymd}.time_since_epoch().count()) * 1440 + h * 60 + mi;
}

}  // namespace

double parse_decimal(std::string_view token, char decimal) {
  token = trim(token);
  if (token.empty()) throw InvalidInput("empty numeric field");
  std::string buf(token);
  if (decimal != '.') {
    if (buf.find('.') != std::string::npos) throw InvalidInput(fmt::format("unexpected '.' in '{}'", token));
    std::replace(buf.begin(), buf.end(), decimal, '.');
  }
  double v = 0.0;
  const char* first = buf.data();
  if (*first == '+') ++first;
  const auto [p, ec] = std::from_chars(first, buf.data() + buf.size(), v);
  if (ec != std::errc() || p != buf.data() + buf.size() || !std::isfinite(v))
    throw InvalidInput(fmt::format("not a number: '{}'", token));
  return v;
}

// "YYYY-MM-DD HH:MM[:SS]"
std::int64_t parse_timestamp(std::string_view text) {
  text = trim(text);
  if (text.size() < 16 || text[4] != '-' || text[7] != '-' || (text[10] != ' ' && text[10] != 'T') ||
      text[13] != ':')
    throw InvalidInput(fmt::format("bad timestamp '{}'", text));
  if (text.size() > 16 && (text.size() != 19 || text[16] != ':' || text.substr(17) != "00"))
    throw InvalidInput(fmt::format("bad timestamp '{}' (seconds must be 00)", text));
  return minutes_since_epoch(to_int(text.substr(0, 4)), to_int(text.substr(5, 2)), to_int(text.substr(8, 2)),
                             to_int(text.substr(11, 2)), to_int(text.substr(14, 2)));
}

std::int64_t parse_date(std::string_view date) {
  date = trim(date);
  if (date.size() != 10 || date[4] != '-' || date[7] != '-') throw InvalidInput(fmt::format("bad date '{}'", date));
  return minutes_since_epoch(to_int(date.substr(0, 4)), to_int(date.substr(5, 2)), to_int(date.substr(8, 2)), 0, 0);
}

std::string format_timestamp(std::int64_t minutes) {
  using namespace std::chrono;
  const auto days_part = static_cast<int>(minutes >= 0 ? minutes / 1440 : (minutes - 1439) / 1440);
  const int rem = static_cast<int>(minutes - static_cast<std::int64_t>(days_part) * 1440);
  const year_month_day ymd{sys_days{days{days_part}}};
  return fmt::format("{:04}-{:02}-{:02} {:02}:{:02}:00", static_cast<int>(ymd.year()),
                     static_cast<unsigned>(ymd.month()), static_cast<unsigned>(ymd.day()), rem / 60, rem % 60);
}

LoadSeries parse_eld(std::istream& in, const EldFormat& f) {
  std::string line;
  std::size_t line_no = 0;
  std::vector<std::string> clients;
  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    const auto header = split(line, f.delimiter);
    if (header.size() < 2) throw ParseError("header must name at least one client", line_no);
    for (std::size_t c = 1; c < header.size(); ++c) {
      if (header[c].empty()) throw ParseError(fmt::format("empty client name in column {}", c + 1), line_no);
      clients.emplace_back(header[c]);
    }
    break;
  }
  if (clients.empty()) throw ParseError("empty input: no header row", line_no);

  const std::size_t nc = clients.size();
  std::vector<std::int64_t> stamps;
  std::vector<double> cells;  // time-major while reading
  std::vector<char> missing;
  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    const auto fields = split(line, f.delimiter);
    if (fields.size() != nc + 1)
      throw ParseError(fmt::format("expected {} fields, found {}", nc + 1, fields.size()), line_no);
    std::int64_t t = 0;
    try {
      t = parse_timestamp(fields[0]);
    } catch (const InvalidInput& e) {
      throw ParseError(e.what(), line_no);
    }
    if (!stamps.empty() && t - stamps.back() != kSlotMinutes)
      throw ParseError(fmt::format("irregular spacing: {} follows {} (expected {} minutes)", format_timestamp(t),
                                   format_timestamp(stamps.back()), kSlotMinutes),
                       line_no);
    stamps.push_back(t);
    for (std::size_t c = 0; c < nc; ++c) {
      const auto tok = fields[c + 1];
      if (tok.empty() || tok == "NA" || tok == "NaN" || tok == "nan") {
        if (f.fill == FillPolicy::none)
          throw ParseError(fmt::format("missing value for client {} (use a fill policy)", clients[c]), line_no);
        cells.push_back(0.0);
        missing.push_back(1);
        continue;
      }
      try {
        cells.push_back(parse_decimal(tok, f.decimal));
      } catch (const InvalidInput& e) {
        throw ParseError(fmt::format("client {}: {}", clients[c], e.what()), line_no);
      }
      missing.push_back(0);
    }
  }
  if (stamps.empty()) throw ParseError("no data rows", line_no);

  LoadSeries s;
  s.clients = std::move(clients);
  s.timestamps = std::move(stamps);
  const Index nt = static_cast<Index>(s.timestamps.size());
  s.values.resize(static_cast<Index>(nc), nt);
  for (Index t = 0; t < nt; ++t) {
    for (std::size_t c = 0; c < nc; ++c) {
      const std::size_t k = static_cast<std::size_t>(t) * nc + c;
      double v = cells[k];
      if (missing[k]) {
        ++s.filled;
        if (f.fill == FillPolicy::previous) v = t > 0 ? s.values(static_cast<Index>(c), t - 1) : 0.0;
      }
      s.values(static_cast<Index>(c), t) = v;
    }
  }
  return s;
}

LoadSeries load_eld(const std::string& path, const EldFormat& f) {
  std::ifstream in(path);
  if (!in) throw InvalidInput("cannot open " + path);
  return parse_eld(in, f);
}

void write_eld(std::ostream& out, const LoadSeries& s, const EldFormat& f) {
  auto number = [&](double v) {
    std::string txt = fmt::format("{}", v);
    if (f.decimal != '.') std::replace(txt.begin(), txt.end(), '.', f.decimal);
    return txt;
  };
  out << "\"\"";
  for (const auto& c : s.clients) out << f.delimiter << '"' << c << '"';
  out << '\n';
  for (Index t = 0; t < s.step_count(); ++t) {
    out << '"' << format_timestamp(s.timestamps[static_cast<std::size_t>(t)]) << '"';
    for (Index c = 0; c < s.client_count(); ++c) out << f.delimiter << number(s.values(c, t));
    out << '\n';
  }
}

void save_eld(const std::string& path, const LoadSeries& s, const EldFormat& f) {
  std::ofstream out(path);
  if (!out) throw InvalidInput("cannot write " + path);
  write_eld(out, s, f);
}

DailyViewSpec DailyViewSpec::quarterly_2014() {
  DailyViewSpec spec;
  spec.dates = {"2014-01-01", "2014-04-01", "2014-07-01", "2014-10-01"};
  return spec;
}

DailyViews daily_views(const LoadSeries& s, const DailyViewSpec& spec) {
  if (spec.dates.empty()) throw InvalidInput("daily views need at least one date");
  if (s.timestamps.empty()) throw InvalidInput("load series is empty");
  const std::int64_t first = s.timestamps.front();
  const auto nt = static_cast<std::int64_t>(s.timestamps.size());

  std::vector<Matrix> blocks;
  for (const auto& date : spec.dates) {
    const std::int64_t start = parse_date(date) + kSlotMinutes;
    const std::int64_t offset = (start - first) / kSlotMinutes;
    const std::int64_t lo = std::max<std::int64_t>(offset, 0);
    const std::int64_t hi = std::min<std::int64_t>(offset + kSlotsPerDay, nt);
    const std::int64_t covered = std::max<std::int64_t>(hi - lo, 0);
    if ((start - first) % kSlotMinutes != 0 || covered != kSlotsPerDay) {
      const std::int64_t missing = kSlotsPerDay - covered;
      throw InvalidInput(fmt::format("date {} is not fully covered: {} of {} slots missing (series spans {} .. {})",
                                     date, missing, kSlotsPerDay, format_timestamp(first),
                                     format_timestamp(s.timestamps.back())));
    }
    blocks.push_back(s.values.middleCols(static_cast<Index>(offset), kSlotsPerDay));
  }

  std::vector<Index> keep;
  std::vector<std::string> dropped;
  for (Index c = 0; c < s.client_count(); ++c) {
    bool all_zero = true;
    for (const auto& b : blocks) all_zero = all_zero && b.row(c).cwiseAbs().maxCoeff() == 0.0;
    if (all_zero && spec.drop_zero_clients)
      dropped.push_back(s.clients[static_cast<std::size_t>(c)]);
    else
      keep.push_back(c);
  }
  if (keep.size() < 2) throw InvalidInput(fmt::format("only {} clients left after dropping all-zero ones", keep.size()));

  std::vector<std::string> ids;
  for (Index c : keep) ids.push_back(s.clients[static_cast<std::size_t>(c)]);
  std::vector<SampleMatrix> views;
  for (const auto& b : blocks) {
    Matrix x(static_cast<Index>(keep.size()), kSlotsPerDay);
    for (std::size_t r = 0; r < keep.size(); ++r) {
      Eigen::RowVectorXd row = b.row(keep[r]);
      if (spec.normalization == Normalization::zscore) {
        const double mean = row.mean();
        const double sd = std::sqrt((row.array() - mean).square().mean());
        row = sd > 0.0 ? Eigen::RowVectorXd((row.array() - mean) / sd) : Eigen::RowVectorXd(row.array() - mean);
      } else if (spec.normalization == Normalization::max) {
        const double peak = row.cwiseAbs().maxCoeff();
        if (peak > 0.0) row /= peak;
      }
      x.row(static_cast<Index>(r)) = row;
    }
    views.emplace_back(std::move(x), ids);
  }
  return DailyViews{MultiViewDataset(std::move(views), ViewMetric::geodesic), spec.dates, std::move(dropped),
                    spec.normalization};
}

}  // namespace gwmv
