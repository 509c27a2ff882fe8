#pragma once

#include <charconv>
#include <cstdint>
#include <fstream>
#include <map>
#include <optional>
#include <ostream>
#include <set>
#include <sstream>
#include <string>
#include <string_view>
#include <system_error>
#include <vector>

#include "surveil/change_series.hpp"
#include "surveil/cusum.hpp"
#include "surveil/records.hpp"

namespace surveil {

/// Shortest round-trip decimal form; parsing it back recovers the exact
/// double, so re-rendering a parsed file is byte-identical.
inline std::string formatDouble(double v) {
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, ptr);
}

inline double parseDouble(std::string_view s, const std::string& context) {
  double v = 0.0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc{} || ptr != s.data() + s.size())
    throw InputError("bad numeric value '" + std::string(s) + "' in " + context);
  return v;
}

inline long parseLong(std::string_view s, const std::string& context) {
  long v = 0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc{} || ptr != s.data() + s.size())
    throw InputError("bad integer value '" + std::string(s) + "' in " + context);
  return v;
}

/// Comma-separated fields, no quoting: codes and ids must not contain commas
/// or newlines.
inline std::vector<std::string_view> splitCsvLine(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (true) {
    const std::size_t pos = line.find(',', start);
    if (pos == std::string_view::npos) {
      out.push_back(line.substr(start));
      break;
    }
    out.push_back(line.substr(start, pos - start));
    start = pos + 1;
  }
  return out;
}

inline constexpr const char* kClaimFixedColumns[] = {
    "enrollee_id", "period", "claim_type", "condition", "episode_id", "quantity", "cost"};

/// Claims file access: fixed columns by the standard header names, every
/// other column a registered dimension (empty string = absent).
class ClaimsCsvFile {
 public:
  explicit ClaimsCsvFile(std::string path) : path_(std::move(path)) {}

  template <typename Fn>
  void forEach(Fn&& fn) const {
    std::ifstream in(path_);
    if (!in) throw InputError("cannot open claims file: " + path_);
    std::string line;
    if (!std::getline(in, line)) return;  // empty file: no records
    stripCr(line);
    const std::vector<std::string_view> header = splitCsvLine(line);
    std::map<std::string, std::size_t> col;
    for (std::size_t i = 0; i < header.size(); ++i) col.emplace(std::string(header[i]), i);
    for (const char* name : kClaimFixedColumns)
      if (!col.contains(name))
        throw InputError("claims file missing column '" + std::string(name) + "': " + path_);
    std::vector<std::pair<std::string, std::size_t>> dims;
    for (std::size_t i = 0; i < header.size(); ++i) {
      bool fixed = false;
      for (const char* name : kClaimFixedColumns) fixed = fixed || header[i] == name;
      if (!fixed) dims.emplace_back(std::string(header[i]), i);
    }
    std::size_t line_no = 1;
    while (std::getline(in, line)) {
      ++line_no;
      stripCr(line);
      if (line.empty()) continue;
      const std::vector<std::string_view> f = splitCsvLine(line);
      if (f.size() != header.size())
        throw InputError("claims row " + std::to_string(line_no) + " has " +
                         std::to_string(f.size()) + " fields, expected " +
                         std::to_string(header.size()));
      const std::string ctx = path_ + ":" + std::to_string(line_no);
      ClaimRecord rec;
      rec.enrollee_id = std::string(f[col.at("enrollee_id")]);
      rec.period = static_cast<int>(parseLong(f[col.at("period")], ctx));
      rec.claim_type = claimTypeFromString(std::string(f[col.at("claim_type")]));
      rec.condition = std::string(f[col.at("condition")]);
      rec.episode_id = std::string(f[col.at("episode_id")]);
      rec.quantity = parseDouble(f[col.at("quantity")], ctx);
      rec.cost = parseDouble(f[col.at("cost")], ctx);
      rec.attributes.reserve(dims.size());
      for (const auto& [dim, idx] : dims)
        if (!f[idx].empty()) rec.attributes.emplace_back(dim, std::string(f[idx]));
      fn(rec);
    }
  }

 private:
  static void stripCr(std::string& line) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
  }
  std::string path_;
};

class EnrollmentCsvFile {
 public:
  explicit EnrollmentCsvFile(std::string path) : path_(std::move(path)) {}

  template <typename Fn>
  void forEach(Fn&& fn) const {
    std::ifstream in(path_);
    if (!in) throw InputError("cannot open enrollment file: " + path_);
    std::string line;
    if (!std::getline(in, line)) return;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    const std::vector<std::string_view> header = splitCsvLine(line);
    std::map<std::string, std::size_t> col;
    for (std::size_t i = 0; i < header.size(); ++i) col.emplace(std::string(header[i]), i);
    for (const char* name : {"enrollee_id", "period", "member_months"})
      if (!col.contains(name))
        throw InputError("enrollment file missing column '" + std::string(name) + "': " + path_);
    std::size_t line_no = 1;
    while (std::getline(in, line)) {
      ++line_no;
      if (!line.empty() && line.back() == '\r') line.pop_back();
      if (line.empty()) continue;
      const std::vector<std::string_view> f = splitCsvLine(line);
      const std::string ctx = path_ + ":" + std::to_string(line_no);
      EnrollmentRecord rec;
      rec.enrollee_id = std::string(f[col.at("enrollee_id")]);
      rec.period = static_cast<int>(parseLong(f[col.at("period")], ctx));
      rec.member_months = parseDouble(f[col.at("member_months")], ctx);
      fn(rec);
    }
  }

 private:
  std::string path_;
};

/// Streams claim rows with a fixed dimension column set (attributes outside
/// the set would be dropped silently, so callers pass the full registry).
class ClaimsCsvWriter {
 public:
  ClaimsCsvWriter(std::ostream& out, std::vector<std::string> dimension_columns)
      : out_(out), dims_(std::move(dimension_columns)) {
    out_ << "enrollee_id,period,claim_type,condition,episode_id,quantity,cost";
    for (const auto& dim : dims_) out_ << "," << dim;
    out_ << "\n";
  }

  void write(const ClaimRecord& rec) {
    out_ << rec.enrollee_id << "," << rec.period << "," << toString(rec.claim_type) << ","
         << rec.condition << "," << rec.episode_id << "," << formatDouble(rec.quantity) << ","
         << formatDouble(rec.cost);
    for (const auto& dim : dims_) {
      const std::string* code = rec.attribute(dim);
      out_ << "," << (code != nullptr ? *code : "");
    }
    out_ << "\n";
  }

 private:
  std::ostream& out_;
  std::vector<std::string> dims_;
};

class EnrollmentCsvWriter {
 public:
  explicit EnrollmentCsvWriter(std::ostream& out) : out_(out) {
    out_ << "enrollee_id,period,member_months\n";
  }
  void write(const EnrollmentRecord& rec) {
    out_ << rec.enrollee_id << "," << rec.period << "," << formatDouble(rec.member_months)
         << "\n";
  }

 private:
  std::ostream& out_;
};

/// Plot-ready export of a detection run: one row per period t = T..P with the
/// change value, normalized rate, and both CUSUM trajectories (zero anchors
/// at t = T).
inline void exportTrajectory(const ChangeSeries& cs, const DetectionResult& det,
                             std::ostream& out) {
  out << "period,c,x,s_up,s_down\n";
  for (std::size_t i = 0; i < cs.c.size(); ++i) {
    const int period = cs.T + static_cast<int>(i);
    const double su = i == 0 ? 0.0 : det.s_up[i - 1];
    const double sd = i == 0 ? 0.0 : det.s_down[i - 1];
    out << period << "," << formatDouble(cs.c[i]) << "," << formatDouble(cs.x[i]) << ","
        << formatDouble(su) << "," << formatDouble(sd) << "\n";
  }
}

}  // namespace surveil
