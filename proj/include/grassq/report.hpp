// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <json.hpp>
#include <string>
#include <variant>
#include <vector>

namespace grassq {

inline constexpr const char* kLibraryVersion = "0.1.0";

/// One CSV cell. monostate renders as an empty field (not applicable).
using Cell = std::variant<std::monostate, std::int64_t, std::uint64_t, double, bool, std::string>;

inline Cell cell(double v) { return Cell(std::in_place_type<double>, v); }
inline Cell cell_int(std::int64_t v) { return Cell(std::in_place_type<std::int64_t>, v); }
inline Cell cell_seed(std::uint64_t v) { return Cell(std::in_place_type<std::uint64_t>, v); }
inline Cell cell_bool(bool v) { return Cell(std::in_place_type<bool>, v); }
inline Cell cell_str(std::string v) { return Cell(std::in_place_type<std::string>, std::move(v)); }
inline Cell cell_none() { return Cell{}; }

/// Tabular result of an experiment plus the configuration that produced it.
/// Stochastic rows carry a `seed` column that reproduces them.
struct ExperimentReport {
  std::string experiment;
  nlohmann::ordered_json config;
  std::vector<std::string> columns;
  std::vector<std::vector<Cell>> rows;
  double wall_time_s = 0.0;
  std::string version = kLibraryVersion;

  ExperimentReport() = default;
  ExperimentReport(std::string name, std::vector<std::string> cols)
      : experiment(std::move(name)), columns(std::move(cols)) {}

  void add_row(std::vector<Cell> row);
  std::size_t column(const std::string& name) const;

  /// Numeric view of a cell; NaN for empty cells, 0/1 for booleans.
  double number(std::size_t row, const std::string& col) const;
  bool flag(std::size_t row, const std::string& col) const;

  /// Header plus rows; doubles printed with 17 significant digits.
  /// Contains nothing run-dependent, so identical inputs give identical bytes.
  std::string to_csv() const;
  nlohmann::ordered_json to_json() const;
};

}  // namespace grassq
