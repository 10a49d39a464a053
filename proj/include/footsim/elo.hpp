#pragma once

#include <cmath>
#include <cstddef>
#include <map>
#include <ostream>
#include <string>
#include <vector>

#include "footsim/errors.hpp"
#include "footsim/match_data.hpp"
#include "footsim/normal.hpp"

namespace footsim {

struct EloParams {
  double k_factor = 32.0;
  double scale_a = 400.0;
  double initial_rating = 500.0;
};

// P(team i beats team j) under the logistic rating model.
inline double expected_score(double rating_i, double rating_j,
                             const EloParams& params = {}) {
  return 1.0 / (1.0 + std::pow(10.0, -(rating_i - rating_j) / params.scale_a));
}

// One rating exchange.  outcome_i is 1 for an i win, 0.5 for a draw, 0 for a
// loss; the two deltas cancel exactly, so total rating mass is conserved.
inline std::pair<double, double> update(double rating_i, double rating_j,
                                        double outcome_i,
                                        const EloParams& params = {}) {
  if (outcome_i != 1.0 && outcome_i != 0.5 && outcome_i != 0.0)
    throw DomainError("outcome must be 1, 0.5, or 0");
  const double p = expected_score(rating_i, rating_j, params);
  const double delta = params.k_factor * (outcome_i - p);
  return {rating_i + delta, rating_j - delta};
}

struct EloEntry {
  std::size_t match_index = 0;
  Date date;
  double pre_rating = 0.0;
  double post_rating = 0.0;
};

// Ratings of the two sides around one match; pre-match values are what a
// model may legitimately see as features for that match.
struct MatchRatings {
  double home_pre = 0.0;
  double home_post = 0.0;
  double away_pre = 0.0;
  double away_post = 0.0;
};

struct EloTimeline {
  std::map<std::string, std::vector<EloEntry>> per_team;
  std::vector<MatchRatings> per_match;  // parallel to the source records
  std::map<std::string, double> current;
  EloParams params;
};

// Replays a chronologically sorted history, entering unseen teams at the
// initial rating.  Pure function of its inputs.
inline EloTimeline run_history(const Dataset& data, const EloParams& params = {}) {
  EloTimeline timeline;
  timeline.params = params;
  for (std::size_t i = 0; i < data.records.size(); ++i) {
    const MatchRecord& rec = data.records[i];
    auto home = timeline.current.try_emplace(rec.home_team, params.initial_rating);
    auto away = timeline.current.try_emplace(rec.away_team, params.initial_rating);
    const double pre_home = home.first->second;
    const double pre_away = away.first->second;

    double outcome_home = 0.5;
    if (rec.home_goals > rec.away_goals) outcome_home = 1.0;
    else if (rec.home_goals < rec.away_goals) outcome_home = 0.0;

    const auto [post_home, post_away] =
        update(pre_home, pre_away, outcome_home, params);
    home.first->second = post_home;
    away.first->second = post_away;
    timeline.per_team[rec.home_team].push_back({i, rec.date, pre_home, post_home});
    timeline.per_team[rec.away_team].push_back({i, rec.date, pre_away, post_away});
    timeline.per_match.push_back({pre_home, post_home, pre_away, post_away});
  }
  return timeline;
}

namespace detail {

inline NormalSpec window_spec(const std::vector<double>& ratings) {
  const std::size_t n = ratings.size();
  double mean = 0.0;
  for (double r : ratings) mean += r;
  mean /= static_cast<double>(n);
  if (n < 2) return {mean, 0.0};
  double ss = 0.0;
  for (double r : ratings) ss += (r - mean) * (r - mean);
  return {mean, std::sqrt(ss / static_cast<double>(n - 1))};
}

}  // namespace detail

// Rating form going into a simulation: mean and sample standard deviation of
// the team's last `window` post-match ratings (fewer if it has played fewer;
// a single observation gets std 0).
inline NormalSpec rating_distribution(const EloTimeline& timeline,
                                      const std::string& team,
                                      std::size_t window = 10) {
  const auto it = timeline.per_team.find(team);
  if (it == timeline.per_team.end() || it->second.empty())
    throw DomainError("unknown team: " + team);
  const auto& entries = it->second;
  const std::size_t take = std::min(window, entries.size());
  std::vector<double> ratings;
  ratings.reserve(take);
  for (std::size_t i = entries.size() - take; i < entries.size(); ++i)
    ratings.push_back(entries[i].post_rating);
  return detail::window_spec(ratings);
}

// Same, but using only matches with match_index < cutoff, so holdout fixtures
// see ratings as of their own date.  A team with no prior matches falls back
// to a point mass at the initial rating.
inline NormalSpec rating_distribution_at(const EloTimeline& timeline,
                                         const std::string& team,
                                         std::size_t cutoff_index,
                                         std::size_t window = 10) {
  const auto it = timeline.per_team.find(team);
  std::vector<double> ratings;
  if (it != timeline.per_team.end()) {
    const auto& entries = it->second;
    std::size_t end = 0;
    while (end < entries.size() && entries[end].match_index < cutoff_index) ++end;
    const std::size_t take = std::min(window, end);
    ratings.reserve(take);
    for (std::size_t i = end - take; i < end; ++i)
      ratings.push_back(entries[i].post_rating);
  }
  if (ratings.empty()) return {timeline.params.initial_rating, 0.0};
  return detail::window_spec(ratings);
}

inline void write_timeline_csv(std::ostream& out, const EloTimeline& timeline) {
  out << "team,match_index,date,pre_rating,post_rating\n";
  for (const auto& [team, entries] : timeline.per_team)
    for (const EloEntry& e : entries)
      out << team << ',' << e.match_index << ',' << e.date.to_iso() << ','
          << detail::format_double(e.pre_rating) << ','
          << detail::format_double(e.post_rating) << '\n';
}

}  // namespace footsim
