#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <istream>
#include <map>
#include <ostream>
#include <sstream>
#include <span>
#include <string>
#include <vector>

#include "decaykit/errors.hpp"
#include "decaykit/funcspace.hpp"
#include "decaykit/numfmt.hpp"

namespace decaykit {

/// Time grid plus scalar or fixed-length vector samples.
class Trajectory {
 public:
  Trajectory() = default;
  explicit Trajectory(std::size_t dim) : dim_(dim) {
    if (dim == 0) throw ConfigError("trajectory dimension must be positive");
  }

  /// Appends a sample; times must be strictly increasing and values finite.
  void push(double t, std::span<const double> row) {
    if (row.size() != dim_) throw ConfigError("trajectory row has wrong dimension");
    if (!times_.empty() && !(t > times_.back()))
      throw ValidationError("trajectory times must be strictly increasing");
    for (double v : row)
      if (!std::isfinite(v)) throw NumericError("non-finite trajectory value at t=" + format_double(t));
    times_.push_back(t);
    values_.insert(values_.end(), row.begin(), row.end());
  }
  void push(double t, double v) { push(t, std::span<const double>(&v, 1)); }

  std::size_t size() const { return times_.size(); }
  bool empty() const { return times_.empty(); }
  std::size_t dim() const { return dim_; }
  const std::vector<double>& times() const { return times_; }
  double time(std::size_t i) const { return times_[i]; }
  double value(std::size_t i, std::size_t component = 0) const { return values_[i * dim_ + component]; }
  std::span<const double> row(std::size_t i) const { return {values_.data() + i * dim_, dim_}; }
  double start_time() const { return times_.front(); }
  double end_time() const { return times_.back(); }

  /// Scalar column as a vector.
  std::vector<double> column(std::size_t component = 0) const {
    std::vector<double> out(size());
    for (std::size_t i = 0; i < size(); ++i) out[i] = value(i, component);
    return out;
  }

  /// Linear interpolation of one component; DomainError outside [start, end].
  double at(double t, std::size_t component = 0) const {
    if (empty() || t < times_.front() || t > times_.back())
      throw DomainError("trajectory queried at t=" + format_double(t) + " outside its time range");
    auto it = std::upper_bound(times_.begin(), times_.end(), t);
    if (it == times_.end()) return value(size() - 1, component);
    const auto i = static_cast<std::size_t>(it - times_.begin());
    if (i == 0) return value(0, component);
    const double w = (t - times_[i - 1]) / (times_[i] - times_[i - 1]);
    return value(i - 1, component) + w * (value(i, component) - value(i - 1, component));
  }

  /// Scalar trajectory as a tabulated function (values must be nonnegative).
  UnivariateFn as_function(std::size_t component = 0) const {
    return UnivariateFn::tabulated(times_, column(component), false, "trajectory");
  }

  std::map<std::string, std::string> metadata;
  bool complete = true;
  std::vector<std::string> columns;  // optional value column names

 private:
  std::size_t dim_ = 1;
  std::vector<double> times_;
  std::vector<double> values_;
};

/// CSV: optional `# key: value` metadata block, then a header line, then rows.
inline void write_csv(const Trajectory& traj, std::ostream& out, bool with_metadata = true) {
  if (with_metadata) {
    for (const auto& [k, v] : traj.metadata) out << "# " << k << ": " << v << '\n';
    out << "# complete: " << (traj.complete ? "true" : "false") << '\n';
  }
  out << 't';
  for (std::size_t c = 0; c < traj.dim(); ++c) {
    out << ',';
    if (c < traj.columns.size()) out << traj.columns[c];
    else out << (traj.dim() == 1 ? std::string("value") : "value" + std::to_string(c));
  }
  out << '\n';
  for (std::size_t i = 0; i < traj.size(); ++i) {
    out << format_double(traj.time(i));
    for (std::size_t c = 0; c < traj.dim(); ++c) out << ',' << format_double(traj.value(i, c));
    out << '\n';
  }
}

inline std::string to_csv(const Trajectory& traj, bool with_metadata = true) {
  std::ostringstream os;
  write_csv(traj, os, with_metadata);
  return os.str();
}

inline Trajectory read_csv(std::istream& in) {
  std::map<std::string, std::string> meta;
  std::vector<std::string> header;
  std::vector<std::vector<double>> rows;
  bool complete = true;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    if (line[0] == '#') {
      const auto colon = line.find(':');
      if (colon == std::string::npos) continue;
      std::string key = line.substr(2, colon - 2);
      std::string val = line.substr(std::min(colon + 2, line.size()));
      if (key == "complete") complete = val == "true";
      else meta[key] = val;
      continue;
    }
    std::vector<std::string> cells;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) cells.push_back(cell);
    if (header.empty()) {
      header = cells;
      continue;
    }
    if (cells.size() != header.size()) throw ConfigError("trajectory CSV row has wrong column count");
    std::vector<double> r;
    for (const auto& c : cells) r.push_back(parse_double(c));
    rows.push_back(std::move(r));
  }
  if (header.size() < 2) throw ConfigError("trajectory CSV needs a header with at least two columns");
  Trajectory traj(header.size() - 1);
  for (const auto& r : rows) traj.push(r[0], std::span<const double>(r.data() + 1, r.size() - 1));
  traj.metadata = std::move(meta);
  traj.complete = complete;
  traj.columns.assign(header.begin() + 1, header.end());
  return traj;
}

}  // namespace decaykit
