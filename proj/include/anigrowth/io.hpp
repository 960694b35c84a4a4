#pragma once

// CSV and JSON file formats.
//
//   matched pairs: finger_id,impression_id,minutia_id,x_ref,y_ref,x_query,y_query
//   estimates:     finger_id,impression_id,gamma_hat,beta_hat,tau_hat,lambda_hat,n,iterations,final_F
//
// Coordinates are pixels in image convention (y down); only relative
// geometry enters the model.

#include <cerrno>
#include <charconv>
#include <cstdio>
#include <fstream>
#include <map>
#include <string>
#include <string_view>
#include <vector>

#include "anigrowth/circular.hpp"
#include "anigrowth/core.hpp"
#include "anigrowth/descriptive.hpp"
#include "anigrowth/minutiae.hpp"
#include "anigrowth/procrustes.hpp"
#include "anigrowth/simulation.hpp"
#include "anigrowth/sweep.hpp"
#include "json.hpp"

namespace anigrowth {

inline constexpr std::string_view kPairsHeader = "finger_id,impression_id,minutia_id,x_ref,y_ref,x_query,y_query";
inline constexpr std::string_view kEstimatesHeader =
    "finger_id,impression_id,gamma_hat,beta_hat,tau_hat,lambda_hat,n,iterations,final_F";
inline constexpr std::string_view kAboveGrid = "above-grid";

namespace detail {

inline std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return std::string(s.substr(b, e - b + 1));
}

inline std::vector<std::string> split_fields(const std::string& line) {
  std::vector<std::string> out;
  std::size_t start = 0;
  for (;;) {
    const auto comma = line.find(',', start);
    out.push_back(trim(std::string_view(line).substr(start, comma - start)));
    if (comma == std::string::npos) break;
    start = comma + 1;
  }
  return out;
}

inline long long parse_int(const std::string& s, std::size_t line, const char* name) {
  long long v = 0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size()) {
    throw ParseError(std::string("bad integer in ") + name + ": '" + s + "'", line);
  }
  return v;
}

inline double parse_real(const std::string& s, std::size_t line, const char* name) {
  if (s.empty()) throw ParseError(std::string("missing value for ") + name, line);
  char* end = nullptr;
  errno = 0;
  const double v = std::strtod(s.c_str(), &end);
  if (end != s.c_str() + s.size()) throw ParseError(std::string("bad number in ") + name + ": '" + s + "'", line);
  if (!std::isfinite(v)) throw ParseError(std::string("non-finite value in ") + name, line);
  return v;
}

inline std::string format_real(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.12g", v);
  return buf;
}

/// Reads lines, skipping blank ones; checks the header on the first.
class CsvReader {
 public:
  CsvReader(std::istream& in, std::string_view header, std::size_t columns)
      : in_(in), columns_(columns) {
    std::string line;
    if (!next_raw(line)) throw ParseError("missing header", 1);
    if (trim(line) != header) throw ParseError("expected header '" + std::string(header) + "'", line_);
  }

  bool next(std::vector<std::string>& fields) {
    std::string line;
    if (!next_raw(line)) return false;
    fields = split_fields(line);
    if (fields.size() != columns_) {
      throw ParseError("expected " + std::to_string(columns_) + " fields, got " + std::to_string(fields.size()),
                       line_);
    }
    return true;
  }

  std::size_t line() const noexcept { return line_; }

 private:
  bool next_raw(std::string& line) {
    while (std::getline(in_, line)) {
      ++line_;
      if (!trim(line).empty()) return true;
    }
    return false;
  }

  std::istream& in_;
  std::size_t columns_;
  std::size_t line_ = 0;
};

inline std::ifstream open_in(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open '" + path + "' for reading");
  return in;
}

inline std::ofstream open_out(const std::string& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open '" + path + "' for writing");
  return out;
}

inline void finish(std::ofstream& out, const std::string& path) {
  out.flush();
  if (!out) throw IoError("write to '" + path + "' failed");
}

}  // namespace detail

// ---------------------------------------------------------------------------
// Matched pairs

/// Parses the matched-pairs CSV. Rows of one (finger, impression) are ordered
/// by minutia_id. Patterns are returned uncentered.
inline StudyDataset read_study(std::istream& in) {
  detail::CsvReader reader(in, kPairsHeader, 7);
  struct Row {
    Complex ref, query;
  };
  std::map<PairKey, std::map<long long, Row>> rows;
  std::map<PairKey, std::size_t> first_line;
  std::vector<std::string> f;
  while (reader.next(f)) {
    const std::size_t ln = reader.line();
    const auto finger = detail::parse_int(f[0], ln, "finger_id");
    const auto impression = detail::parse_int(f[1], ln, "impression_id");
    const auto minutia = detail::parse_int(f[2], ln, "minutia_id");
    const Row r{{detail::parse_real(f[3], ln, "x_ref"), detail::parse_real(f[4], ln, "y_ref")},
                {detail::parse_real(f[5], ln, "x_query"), detail::parse_real(f[6], ln, "y_query")}};
    const PairKey key{static_cast<int>(finger), static_cast<int>(impression)};
    first_line.emplace(key, ln);
    if (!rows[key].emplace(minutia, r).second) {
      throw ParseError("duplicate key (" + f[0] + "," + f[1] + "," + f[2] + ")", ln);
    }
  }
  StudyDataset data;
  for (auto& [key, by_id] : rows) {
    std::vector<Complex> ref, query;
    for (const auto& [_, r] : by_id) {
      ref.push_back(r.ref);
      query.push_back(r.query);
    }
    try {
      data.add(key, MatchedPair(MinutiaPattern(std::move(ref), key.finger, 0),
                                MinutiaPattern(std::move(query), key.finger, key.impression)));
    } catch (const InvalidInput& e) {
      throw ParseError(e.what(), first_line[key]);
    }
  }
  return data;
}

inline StudyDataset load_study(const std::string& path) {
  auto in = detail::open_in(path);
  return read_study(in);
}

inline void write_study(std::ostream& out, const StudyDataset& data) {
  out << kPairsHeader << '\n';
  for (const auto& [key, pair] : data) {
    for (std::size_t j = 0; j < pair.size(); ++j) {
      const Complex r = pair.reference[j];
      const Complex q = pair.query[j];
      out << key.finger << ',' << key.impression << ',' << (j + 1) << ',' << detail::format_real(r.real()) << ','
          << detail::format_real(r.imag()) << ',' << detail::format_real(q.real()) << ','
          << detail::format_real(q.imag()) << '\n';
    }
  }
}

inline void save_study(const StudyDataset& data, const std::string& path) {
  auto out = detail::open_out(path);
  write_study(out, data);
  detail::finish(out, path);
}

// ---------------------------------------------------------------------------
// Estimates

inline void write_estimates(std::ostream& out, const EstimateTable& table) {
  out << kEstimatesHeader << '\n';
  for (const auto& [key, row] : table) {
    const auto& p = row.params;
    out << key.finger << ',' << key.impression << ',' << detail::format_real(p.gamma) << ','
        << detail::format_real(p.beta) << ',' << detail::format_real(p.tau) << ',' << detail::format_real(p.lambda)
        << ',' << row.n << ',' << row.iterations << ',' << detail::format_real(row.final_objective) << '\n';
  }
}

inline void save_estimates(const EstimateTable& table, const std::string& path) {
  auto out = detail::open_out(path);
  write_estimates(out, table);
  detail::finish(out, path);
}

/// Inverse of write_estimates. The convergence flag is not stored and reads
/// back as true.
inline EstimateTable read_estimates(std::istream& in) {
  detail::CsvReader reader(in, kEstimatesHeader, 9);
  EstimateTable table;
  std::vector<std::string> f;
  while (reader.next(f)) {
    const std::size_t ln = reader.line();
    const PairKey key{static_cast<int>(detail::parse_int(f[0], ln, "finger_id")),
                      static_cast<int>(detail::parse_int(f[1], ln, "impression_id"))};
    EstimateRow row;
    try {
      row.params = GrowthParams::make(detail::parse_real(f[2], ln, "gamma_hat"), detail::parse_real(f[3], ln, "beta_hat"),
                                      detail::parse_real(f[4], ln, "tau_hat"), detail::parse_real(f[5], ln, "lambda_hat"));
    } catch (const InvalidInput& e) {
      throw ParseError(e.what(), ln);
    }
    const auto n = detail::parse_int(f[6], ln, "n");
    const auto iterations = detail::parse_int(f[7], ln, "iterations");
    if (n < 0 || iterations < 0) throw ParseError("negative count", ln);
    row.n = static_cast<std::size_t>(n);
    row.iterations = static_cast<int>(iterations);
    row.final_objective = detail::parse_real(f[8], ln, "final_F");
    if (!table.emplace(key, row).second) throw ParseError("duplicate estimate for (" + f[0] + "," + f[1] + ")", ln);
  }
  return table;
}

inline EstimateTable load_estimates(const std::string& path) {
  auto in = detail::open_in(path);
  return read_estimates(in);
}

// ---------------------------------------------------------------------------
// Plot data

inline void write_rose(std::ostream& out, std::span<const RoseBin> bins) {
  out << "bin_center,count\n";
  for (const auto& b : bins) out << detail::format_real(b.center) << ',' << b.count << '\n';
}

inline void write_sweep(std::ostream& out, std::span<const SweepPoint> points) {
  out << "gamma,tau_min\n";
  for (const auto& p : points) {
    out << detail::format_real(p.gamma) << ',';
    if (p.tau_min) {
      out << detail::format_real(*p.tau_min);
    } else {
      out << kAboveGrid;
    }
    out << '\n';
  }
}

inline void write_five_number(std::ostream& out, const FiveNumberSummary& s) {
  out << "min,q1,median,q3,max\n"
      << detail::format_real(s.minimum) << ',' << detail::format_real(s.lower_quartile) << ','
      << detail::format_real(s.median) << ',' << detail::format_real(s.upper_quartile) << ','
      << detail::format_real(s.maximum) << '\n';
}

// ---------------------------------------------------------------------------
// Simulation config (JSON)

inline nlohmann::json to_json(const SimConfig& c, const NoiseModel& noise) {
  return {{"fingers", c.fingers},
          {"impressions", c.impressions},
          {"intensity", c.intensity},
          {"half_width", c.half_width},
          {"half_height", c.half_height},
          {"lambda_values", c.lambda_values},
          {"sigma", noise.sigma},
          {"truncation", noise.truncation},
          {"seed", c.seed}};
}

/// Missing keys keep their defaults; unknown keys are rejected.
inline std::pair<SimConfig, NoiseModel> sim_config_from_json(const nlohmann::json& j) {
  if (!j.is_object()) throw InvalidInput("simulation config must be a JSON object");
  SimConfig c;
  NoiseModel noise;
  for (const auto& [k, v] : j.items()) {
    try {
      if (k == "fingers") {
        c.fingers = v.get<int>();
      } else if (k == "impressions") {
        c.impressions = v.get<int>();
      } else if (k == "intensity") {
        c.intensity = v.get<double>();
      } else if (k == "half_width") {
        c.half_width = v.get<double>();
      } else if (k == "half_height") {
        c.half_height = v.get<double>();
      } else if (k == "lambda_values") {
        c.lambda_values = v.get<std::vector<double>>();
      } else if (k == "sigma") {
        noise.sigma = v.get<double>();
      } else if (k == "truncation") {
        noise.truncation = v.get<double>();
      } else if (k == "seed") {
        c.seed = v.get<std::uint64_t>();
      } else {
        throw InvalidInput("unknown simulation config key '" + k + "'");
      }
    } catch (const nlohmann::json::exception&) {
      throw InvalidInput("bad type for simulation config key '" + k + "'");
    }
  }
  c.validate();
  noise.validate();
  return {c, noise};
}

inline std::pair<SimConfig, NoiseModel> load_sim_config(const std::string& path) {
  auto in = detail::open_in(path);
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::parse_error& e) {
    throw ParseError(e.what(), 0);
  }
  return sim_config_from_json(j);
}

}  // namespace anigrowth
