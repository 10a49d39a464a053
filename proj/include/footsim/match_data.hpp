#pragma once

#include <algorithm>
#include <charconv>
#include <cstddef>
#include <fstream>
#include <istream>
#include <optional>
#include <ostream>
#include <string>
#include <string_view>
#include <vector>

#include "footsim/date.hpp"
#include "footsim/errors.hpp"

namespace footsim {

enum class Side { home, away };

struct MatchRecord {
  Date date;
  std::string home_team;
  std::string away_team;
  int home_goals = 0;
  int away_goals = 0;
  int home_shots = 0;
  int away_shots = 0;
  // Decimal odds, strictly > 1.0 when present.  Absent odds keep the record
  // usable for modeling; only betting evaluation skips such matches.
  std::optional<double> odds_home;
  std::optional<double> odds_draw;
  std::optional<double> odds_away;

  bool operator==(const MatchRecord&) const = default;
};

struct Dataset {
  std::vector<MatchRecord> records;   // non-decreasing by date
  std::size_t skipped_rows = 0;       // source rows dropped as unparseable
};

// Per-team-per-match training targets: how many shots, and goals per shot.
// With zero shots the ratio is undefined; quality is reported as 0 and
// quality_observed is false so quality-model fits can leave the row out.
struct ShotTargets {
  int shots = 0;
  double quality = 0.0;
  bool quality_observed = true;
};

inline ShotTargets derive_targets(const MatchRecord& rec, Side side) {
  const int shots = side == Side::home ? rec.home_shots : rec.away_shots;
  const int goals = side == Side::home ? rec.home_goals : rec.away_goals;
  if (shots == 0) return {0, 0.0, false};
  // Own goals and penalties can put goals above shots; clamp instead of
  // dropping the row.
  const double quality = std::min(1.0, static_cast<double>(goals) / shots);
  return {shots, quality, true};
}

struct CsvOptions {
  std::string odds_home_column = "B365H";
  std::string odds_draw_column = "B365D";
  std::string odds_away_column = "B365A";
};

namespace detail {

// Minimal RFC-ish field splitter: commas split, double quotes group, "" is a
// literal quote.  Enough for football results files.
inline std::vector<std::string> split_csv_line(std::string_view line) {
  std::vector<std::string> fields;
  std::string current;
  bool quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    const char c = line[i];
    if (quoted) {
      if (c == '"' && i + 1 < line.size() && line[i + 1] == '"') {
        current += '"';
        ++i;
      } else if (c == '"') {
        quoted = false;
      } else {
        current += c;
      }
    } else if (c == '"') {
      quoted = true;
    } else if (c == ',') {
      fields.push_back(std::move(current));
      current.clear();
    } else {
      current += c;
    }
  }
  fields.push_back(std::move(current));
  return fields;
}

inline std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r'))
    s.remove_suffix(1);
  return s;
}

inline std::optional<int> parse_int(std::string_view s) {
  s = trim(s);
  int value = 0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), value);
  if (ec != std::errc() || ptr != s.data() + s.size()) return std::nullopt;
  return value;
}

inline std::optional<double> parse_double(std::string_view s) {
  s = trim(s);
  double value = 0.0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), value);
  if (ec != std::errc() || ptr != s.data() + s.size()) return std::nullopt;
  return value;
}

inline std::string format_double(double v) {
  char buf[32];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, ptr);
}

}  // namespace detail

// Header-driven CSV ingestion.  Rows whose required fields fail to parse are
// skipped and counted, a missing required column is a hard error, and the
// result comes back sorted by date (stable, so same-day source order holds).
inline Dataset parse_csv(std::istream& source, const CsvOptions& options = {}) {
  std::string line;
  if (!std::getline(source, line)) throw InputError("empty file: no header row");

  const auto header = detail::split_csv_line(line);
  const auto column = [&](std::string_view name) -> std::optional<std::size_t> {
    for (std::size_t i = 0; i < header.size(); ++i)
      if (detail::trim(header[i]) == name) return i;
    return std::nullopt;
  };
  const auto required = [&](std::string_view name) {
    const auto idx = column(name);
    if (!idx) throw InputError("missing required column: " + std::string(name));
    return *idx;
  };

  const std::size_t col_date = required("Date");
  const std::size_t col_home = required("HomeTeam");
  const std::size_t col_away = required("AwayTeam");
  const std::size_t col_fthg = required("FTHG");
  const std::size_t col_ftag = required("FTAG");
  const std::size_t col_hs = required("HS");
  const std::size_t col_as = required("AS");
  const auto col_oh = column(options.odds_home_column);
  const auto col_od = column(options.odds_draw_column);
  const auto col_oa = column(options.odds_away_column);

  Dataset data;
  while (std::getline(source, line)) {
    if (detail::trim(line).empty()) continue;
    const auto fields = detail::split_csv_line(line);
    const auto field = [&](std::size_t idx) -> std::string_view {
      return idx < fields.size() ? std::string_view(fields[idx]) : std::string_view();
    };

    MatchRecord rec;
    try {
      rec.date = Date::parse(detail::trim(field(col_date)));
    } catch (const InputError&) {
      ++data.skipped_rows;
      continue;
    }
    rec.home_team = detail::trim(field(col_home));
    rec.away_team = detail::trim(field(col_away));
    const auto fthg = detail::parse_int(field(col_fthg));
    const auto ftag = detail::parse_int(field(col_ftag));
    const auto hs = detail::parse_int(field(col_hs));
    const auto as = detail::parse_int(field(col_as));
    if (rec.home_team.empty() || rec.away_team.empty() || !fthg || !ftag ||
        !hs || !as || *fthg < 0 || *ftag < 0 || *hs < 0 || *as < 0) {
      ++data.skipped_rows;
      continue;
    }
    rec.home_goals = *fthg;
    rec.away_goals = *ftag;
    rec.home_shots = *hs;
    rec.away_shots = *as;

    // Odds are optional; an odds value that is missing, unparseable, or not
    // strictly above 1.0 is treated as absent rather than sinking the row.
    const auto odds_at = [&](const std::optional<std::size_t>& idx) {
      std::optional<double> odds;
      if (idx) odds = detail::parse_double(field(*idx));
      if (odds && !(*odds > 1.0)) odds.reset();
      return odds;
    };
    rec.odds_home = odds_at(col_oh);
    rec.odds_draw = odds_at(col_od);
    rec.odds_away = odds_at(col_oa);

    data.records.push_back(std::move(rec));
  }

  if (data.records.empty()) throw InputError("empty dataset");
  std::stable_sort(data.records.begin(), data.records.end(),
                   [](const MatchRecord& a, const MatchRecord& b) {
                     return a.date < b.date;
                   });
  return data;
}

inline Dataset load_csv(const std::string& path, const CsvOptions& options = {}) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open data file: " + path);
  return parse_csv(in, options);
}

// Mirrors the input columns; odds columns are emitted only when at least one
// record carries odds.  Doubles print shortest-round-trip so a re-parse gives
// back identical values.
inline void write_csv(std::ostream& out, const Dataset& data,
                      const CsvOptions& options = {}) {
  const bool any_odds = std::any_of(
      data.records.begin(), data.records.end(), [](const MatchRecord& r) {
        return r.odds_home || r.odds_draw || r.odds_away;
      });

  out << "Date,HomeTeam,AwayTeam,FTHG,FTAG,HS,AS";
  if (any_odds)
    out << ',' << options.odds_home_column << ',' << options.odds_draw_column
        << ',' << options.odds_away_column;
  out << '\n';

  for (const MatchRecord& rec : data.records) {
    out << rec.date.to_iso() << ',' << rec.home_team << ',' << rec.away_team
        << ',' << rec.home_goals << ',' << rec.away_goals << ','
        << rec.home_shots << ',' << rec.away_shots;
    if (any_odds) {
      const auto cell = [&](const std::optional<double>& v) {
        out << ',';
        if (v) out << detail::format_double(*v);
      };
      cell(rec.odds_home);
      cell(rec.odds_draw);
      cell(rec.odds_away);
    }
    out << '\n';
  }
}

// Tail split for out-of-time validation: holdout is the final tail_n records,
// train is everything before them.
inline std::pair<Dataset, Dataset> chronological_split(const Dataset& data,
                                                       std::size_t tail_n) {
  if (tail_n >= data.records.size())
    throw InputError("holdout size " + std::to_string(tail_n) +
                     " must be smaller than the dataset (" +
                     std::to_string(data.records.size()) + " records)");
  const std::size_t cut = data.records.size() - tail_n;
  Dataset train, holdout;
  train.records.assign(data.records.begin(), data.records.begin() + cut);
  holdout.records.assign(data.records.begin() + cut, data.records.end());
  return {std::move(train), std::move(holdout)};
}

}  // namespace footsim
