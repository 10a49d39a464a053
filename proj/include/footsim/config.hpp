#pragma once

#include <charconv>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "footsim/elo.hpp"
#include "footsim/errors.hpp"
#include "footsim/evaluation.hpp"
#include "footsim/match_data.hpp"
#include "footsim/simulator.hpp"

namespace footsim {

inline std::uint64_t fnv1a(std::string_view bytes,
                           std::uint64_t hash = 0xcbf29ce484222325ull) {
  for (const unsigned char c : bytes) {
    hash ^= c;
    hash *= 1099511628211ull;
  }
  return hash;
}

inline std::string hex64(std::uint64_t value) {
  char buf[19];
  std::snprintf(buf, sizeof(buf), "0x%016llx",
                static_cast<unsigned long long>(value));
  return buf;
}

// Flat key=value run configuration.  Every key has a default; the file only
// needs the keys it wants to change.  Unknown keys are rejected so a typo
// cannot silently fall back to a default.
struct RunConfig {
  std::string data;
  std::string odds_columns = "B365H,B365D,B365A";
  double elo_k = 32.0;
  double elo_a = 400.0;
  double elo_initial = 500.0;
  std::size_t window = 10;
  std::string model = "ols";  // ols | knn
  std::size_t knn_k = 50;
  bool mad_rescale = true;
  std::size_t n_simulations = 10000;
  int max_shots = 50;
  std::uint64_t seed = 42;
  std::size_t tail_n = 300;
  int strategy = 1;
  std::string bet_scope = "per_market";  // per_market | best_market
  std::string bias_grid = "0.8:1.4:0.01";
  std::string out = "out";
  std::string resample_ratings = "per_sim";  // per_sim | once
  std::string margin_def = "inv";            // inv | overround
  double p_min = 0.001;
  unsigned threads = 1;

  void set(std::string_view key, std::string_view value);

  EloParams elo_params() const { return {elo_k, elo_a, elo_initial}; }

  CsvOptions csv_options() const {
    const auto comma1 = odds_columns.find(',');
    const auto comma2 =
        comma1 == std::string::npos ? std::string::npos
                                    : odds_columns.find(',', comma1 + 1);
    if (comma2 == std::string::npos ||
        odds_columns.find(',', comma2 + 1) != std::string::npos)
      throw InputError("odds_columns must name exactly three columns");
    return {odds_columns.substr(0, comma1),
            odds_columns.substr(comma1 + 1, comma2 - comma1 - 1),
            odds_columns.substr(comma2 + 1)};
  }

  RatingResample resample_mode() const {
    return resample_ratings == "once" ? RatingResample::once
                                      : RatingResample::per_sim;
  }

  BetScope bet_scope_mode() const {
    return bet_scope == "best_market" ? BetScope::best_market
                                      : BetScope::per_market;
  }

  MarginDef margin_def_mode() const {
    return margin_def == "overround" ? MarginDef::overround
                                     : MarginDef::inverse_overround;
  }

  // start:stop:step, endpoints inclusive (within half a step).
  std::vector<double> bias_grid_values() const {
    const auto colon1 = bias_grid.find(':');
    if (colon1 == std::string::npos) {
      const auto single = detail::parse_double(bias_grid);
      if (!single || *single <= 0.0)
        throw InputError("bias_grid must be a multiplier or start:stop:step");
      return {*single};
    }
    const auto colon2 = bias_grid.find(':', colon1 + 1);
    if (colon2 == std::string::npos)
      throw InputError("bias_grid must be start:stop:step");
    const auto start = detail::parse_double(bias_grid.substr(0, colon1));
    const auto stop =
        detail::parse_double(bias_grid.substr(colon1 + 1, colon2 - colon1 - 1));
    const auto step = detail::parse_double(bias_grid.substr(colon2 + 1));
    if (!start || !stop || !step || *step <= 0.0 || *stop < *start ||
        *start <= 0.0)
      throw InputError("bias_grid bounds must be positive with stop >= start");
    std::vector<double> grid;
    const auto count = static_cast<std::size_t>((*stop - *start) / *step + 0.5);
    for (std::size_t i = 0; i <= count; ++i) {
      const double value = *start + static_cast<double>(i) * *step;
      if (value > *stop + *step * 1e-6) break;
      grid.push_back(value);
    }
    return grid;
  }

  // Canonical serialization: every key in fixed order, values in
  // shortest-round-trip form.  Hashing this makes the manifest's config hash
  // change exactly when some field changes.
  std::string canonical() const {
    std::ostringstream s;
    s << "bet_scope=" << bet_scope << '\n'
      << "bias_grid=" << bias_grid << '\n'
      << "data=" << data << '\n'
      << "elo_a=" << detail::format_double(elo_a) << '\n'
      << "elo_initial=" << detail::format_double(elo_initial) << '\n'
      << "elo_k=" << detail::format_double(elo_k) << '\n'
      << "knn_k=" << knn_k << '\n'
      << "mad_rescale=" << (mad_rescale ? "on" : "off") << '\n'
      << "margin_def=" << margin_def << '\n'
      << "max_shots=" << max_shots << '\n'
      << "model=" << model << '\n'
      << "n_simulations=" << n_simulations << '\n'
      << "odds_columns=" << odds_columns << '\n'
      << "out=" << out << '\n'
      << "p_min=" << detail::format_double(p_min) << '\n'
      << "resample_ratings=" << resample_ratings << '\n'
      << "seed=" << seed << '\n'
      << "strategy=" << strategy << '\n'
      << "tail_n=" << tail_n << '\n'
      << "threads=" << threads << '\n'
      << "window=" << window << '\n';
    return s.str();
  }

  std::uint64_t hash() const { return fnv1a(canonical()); }
};

namespace detail {

template <typename T>
T parse_number(std::string_view key, std::string_view value) {
  T parsed{};
  const auto [ptr, ec] =
      std::from_chars(value.data(), value.data() + value.size(), parsed);
  if (ec != std::errc() || ptr != value.data() + value.size())
    throw InputError("config key '" + std::string(key) +
                     "': cannot parse value '" + std::string(value) + "'");
  return parsed;
}

inline bool parse_switch(std::string_view key, std::string_view value) {
  if (value == "on" || value == "true" || value == "1") return true;
  if (value == "off" || value == "false" || value == "0") return false;
  throw InputError("config key '" + std::string(key) + "': expected on or off");
}

}  // namespace detail

inline void RunConfig::set(std::string_view key, std::string_view value) {
  const auto require = [&](bool ok, const char* why) {
    if (!ok)
      throw InputError("config key '" + std::string(key) + "': " + why);
  };
  if (key == "data") data = value;
  else if (key == "odds_columns") odds_columns = value;
  else if (key == "elo_k") {
    elo_k = detail::parse_number<double>(key, value);
    require(elo_k > 0.0, "must be positive");
  } else if (key == "elo_a") {
    elo_a = detail::parse_number<double>(key, value);
    require(elo_a > 0.0, "must be positive");
  } else if (key == "elo_initial") {
    elo_initial = detail::parse_number<double>(key, value);
  } else if (key == "window") {
    window = detail::parse_number<std::size_t>(key, value);
    require(window >= 1, "must be at least 1");
  } else if (key == "model") {
    model = value;
    require(model == "ols" || model == "knn", "must be ols or knn");
  } else if (key == "knn_k") {
    knn_k = detail::parse_number<std::size_t>(key, value);
    require(knn_k >= 1, "must be at least 1");
  } else if (key == "mad_rescale") {
    mad_rescale = detail::parse_switch(key, value);
  } else if (key == "n_simulations") {
    n_simulations = detail::parse_number<std::size_t>(key, value);
    require(n_simulations >= 1, "must be at least 1");
  } else if (key == "max_shots") {
    max_shots = detail::parse_number<int>(key, value);
    require(max_shots >= 1, "must be at least 1");
  } else if (key == "seed") {
    seed = detail::parse_number<std::uint64_t>(key, value);
  } else if (key == "tail_n") {
    tail_n = detail::parse_number<std::size_t>(key, value);
    require(tail_n >= 1, "must be at least 1");
  } else if (key == "strategy") {
    strategy = detail::parse_number<int>(key, value);
    require(strategy == 1 || strategy == 2, "must be 1 or 2");
  } else if (key == "bet_scope") {
    bet_scope = value;
    require(bet_scope == "per_market" || bet_scope == "best_market",
            "must be per_market or best_market");
  } else if (key == "bias_grid") {
    bias_grid = value;
  } else if (key == "out") {
    out = value;
  } else if (key == "resample_ratings") {
    resample_ratings = value;
    require(resample_ratings == "per_sim" || resample_ratings == "once",
            "must be per_sim or once");
  } else if (key == "margin_def") {
    margin_def = value;
    require(margin_def == "inv" || margin_def == "overround",
            "must be inv or overround");
  } else if (key == "p_min") {
    p_min = detail::parse_number<double>(key, value);
    require(p_min > 0.0 && p_min < 1.0, "must lie in (0,1)");
  } else if (key == "threads") {
    threads = detail::parse_number<unsigned>(key, value);
    require(threads >= 1, "must be at least 1");
  } else {
    throw InputError("unknown config key '" + std::string(key) + "'");
  }
}

// key=value lines, # starts a comment, blank lines ignored.
inline RunConfig parse_config(std::istream& in) {
  RunConfig cfg;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    std::string_view view = line;
    if (const auto hash_pos = view.find('#'); hash_pos != std::string_view::npos)
      view = view.substr(0, hash_pos);
    view = detail::trim(view);
    if (view.empty()) continue;
    const auto eq = view.find('=');
    if (eq == std::string_view::npos)
      throw InputError("config line " + std::to_string(line_no) +
                       ": expected key=value");
    try {
      cfg.set(detail::trim(view.substr(0, eq)),
              detail::trim(view.substr(eq + 1)));
    } catch (const InputError& e) {
      throw InputError("config line " + std::to_string(line_no) + ": " +
                       e.what());
    }
  }
  return cfg;
}

inline RunConfig parse_config(std::string_view text) {
  std::istringstream in{std::string(text)};
  return parse_config(in);
}

inline RunConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open config file: " + path);
  return parse_config(in);
}

inline std::uint64_t fingerprint_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InputError("cannot open data file: " + path);
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return fnv1a(buffer.str());
}

}  // namespace footsim
