#pragma once

#include "gwmv/types.hpp"

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

namespace gwmv {

inline constexpr int kSlotMinutes = 15;
inline constexpr int kSlotsPerDay = 24 * 60 / kSlotMinutes;

enum class FillPolicy { none, zero, previous };
const char* to_string(FillPolicy f);
FillPolicy fill_policy_from_string(const std::string& s);

struct EldFormat {
  char delimiter = ';';
  char decimal = ',';
  FillPolicy fill = FillPolicy::none;
};

// Clients x time. Timestamps are minutes since 1970-01-01 00:00 (no time zone).
struct LoadSeries {
  std::vector<std::string> clients;
  std::vector<std::int64_t> timestamps;
  Matrix values;
  std::size_t filled = 0;  // missing cells replaced under the fill policy

  Index client_count() const noexcept { return values.rows(); }
  Index step_count() const noexcept { return values.cols(); }
};

/// "2,5" -> 2.5 with decimal mark ','. Throws InvalidInput on junk.
double parse_decimal(std::string_view token, char decimal);

std::int64_t parse_timestamp(std::string_view text);
std::string format_timestamp(std::int64_t minutes);
/// Minutes since the epoch of midnight on `date` ("YYYY-MM-DD").
std::int64_t parse_date(std::string_view date);

LoadSeries parse_eld(std::istream& in, const EldFormat& fmt = {});
LoadSeries load_eld(const std::string& path, const EldFormat& fmt = {});
void write_eld(std::ostream& out, const LoadSeries& s, const EldFormat& fmt = {});
void save_eld(const std::string& path, const LoadSeries& s, const EldFormat& fmt = {});

enum class Normalization { none, zscore, max };
const char* to_string(Normalization n);
Normalization normalization_from_string(const std::string& s);

// Day D covers the 96 interval-ending stamps D 00:15 .. D+1 00:00, which is
// how the distribution file labels its readings.
struct DailyViewSpec {
  std::vector<std::string> dates;
  Normalization normalization = Normalization::none;
  bool drop_zero_clients = true;

  /// First day of each quarter of 2014.
  static DailyViewSpec quarterly_2014();
};

struct DailyViews {
  MultiViewDataset data;
  std::vector<std::string> dates;
  std::vector<std::string> dropped_clients;
  Normalization normalization = Normalization::none;
};

DailyViews daily_views(const LoadSeries& s, const DailyViewSpec& spec);

}  // namespace gwmv
