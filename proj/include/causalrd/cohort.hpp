#pragma once

#include <cstddef>
#include <filesystem>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "causalrd/network.hpp"

namespace causalrd {

inline constexpr int kMissing = -1;

struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;

  // Column position, or npos.
  std::size_t column(std::string_view name) const;
};

CsvTable parse_csv(std::string_view text, const std::string& source);
CsvTable read_csv(const std::filesystem::path& path);
std::string format_csv(const CsvTable& table);
void write_csv(const std::filesystem::path& path, const CsvTable& table);

// One row per subject, one column per network node holding a state index or
// kMissing. Nodes absent from the source file are missing everywhere.
class Cohort {
 public:
  Cohort() = default;
  explicit Cohort(std::size_t width) : width_(width) {}

  std::size_t size() const { return width_ == 0 ? 0 : values_.size() / width_; }
  std::size_t width() const { return width_; }
  std::span<const int> row(std::size_t i) const { return {values_.data() + i * width_, width_}; }
  std::span<int> row(std::size_t i) { return {values_.data() + i * width_, width_}; }
  int at(std::size_t i, std::size_t node) const { return values_[i * width_ + node]; }

  void add_row(std::span<const int> values, std::string id = {});
  // External identifier if the source carried one, else the ordinal.
  std::string id(std::size_t i) const;
  bool has_ids() const { return !ids_.empty(); }

  Cohort subset(std::span<const std::size_t> rows) const;

 private:
  std::size_t width_ = 0;
  std::vector<int> values_;
  std::vector<std::string> ids_;
};

// Maps cells to state indices by label. Empty cell = missing; an optional
// leading `id` column is kept as the record label. Throws CohortFormatError
// naming the source, row and column.
Cohort bind_cohort(const CsvTable& table, const DiscreteNetwork& net, const std::string& source);
Cohort load_cohort(const std::filesystem::path& path, const DiscreteNetwork& net);

CsvTable cohort_table(const Cohort& cohort, const DiscreteNetwork& net, std::span<const std::size_t> nodes);
void save_cohort(const std::filesystem::path& path, const Cohort& cohort, const DiscreteNetwork& net,
                 std::span<const std::size_t> nodes);

}  // namespace causalrd
