#include "causalrd/cohort.hpp"

#include <fstream>
#include <set>
#include <sstream>

#include "causalrd/error.hpp"

namespace causalrd {

std::size_t CsvTable::column(std::string_view name) const {
  for (std::size_t i = 0; i < header.size(); ++i)
    if (header[i] == name) return i;
  return static_cast<std::size_t>(-1);
}

CsvTable parse_csv(std::string_view text, const std::string& source) {
  std::vector<std::vector<std::string>> records;
  std::vector<std::string> record;
  std::string field;
  bool quoted = false;
  bool any = false;
  std::size_t line = 1;
  for (std::size_t i = 0; i < text.size(); ++i) {
    const char c = text[i];
    if (quoted) {
      if (c == '"') {
        if (i + 1 < text.size() && text[i + 1] == '"') {
          field += '"';
          ++i;
        } else {
          quoted = false;
        }
      } else {
        if (c == '\n') ++line;
        field += c;
      }
      continue;
    }
    switch (c) {
      case '"':
        quoted = true;
        any = true;
        break;
      case ',':
        record.push_back(std::move(field));
        field.clear();
        any = true;
        break;
      case '\r':
        break;
      case '\n':
        if (any || !field.empty()) {
          record.push_back(std::move(field));
          records.push_back(std::move(record));
        }
        record.clear();
        field.clear();
        any = false;
        ++line;
        break;
      default:
        field += c;
        any = true;
    }
  }
  if (quoted) throw CohortFormatError(source + ": unterminated quote near line " + std::to_string(line));
  if (any || !field.empty()) {
    record.push_back(std::move(field));
    records.push_back(std::move(record));
  }
  if (records.empty()) throw CohortFormatError(source + ": empty file, expected a header row");

  CsvTable table;
  table.header = std::move(records.front());
  for (std::size_t r = 1; r < records.size(); ++r) {
    if (records[r].size() != table.header.size())
      throw CohortFormatError(source + ": row " + std::to_string(r) + " has " + std::to_string(records[r].size()) +
                              " fields, header has " + std::to_string(table.header.size()));
    table.rows.push_back(std::move(records[r]));
  }
  return table;
}

CsvTable read_csv(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot open '" + path.string() + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_csv(ss.str(), path.string());
}

namespace {

std::string quote(const std::string& field) {
  if (field.find_first_of(",\"\n\r") == std::string::npos) return field;
  std::string out = "\"";
  for (char c : field) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + '"';
}

}  // namespace

std::string format_csv(const CsvTable& table) {
  std::string out;
  auto line = [&](const std::vector<std::string>& fields) {
    for (std::size_t i = 0; i < fields.size(); ++i) {
      if (i) out += ',';
      out += quote(fields[i]);
    }
    out += '\n';
  };
  line(table.header);
  for (const auto& r : table.rows) line(r);
  return out;
}

void write_csv(const std::filesystem::path& path, const CsvTable& table) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write '" + path.string() + "'");
  out << format_csv(table);
  if (!out) throw Error("write failed for '" + path.string() + "'");
}

void Cohort::add_row(std::span<const int> values, std::string id) {
  if (values.size() != width_) throw std::invalid_argument("row width mismatch");
  values_.insert(values_.end(), values.begin(), values.end());
  if (!id.empty() || !ids_.empty()) {
    ids_.resize(size() - 1);
    ids_.push_back(std::move(id));
  }
}

std::string Cohort::id(std::size_t i) const {
  if (i < ids_.size() && !ids_[i].empty()) return ids_[i];
  return std::to_string(i);
}

Cohort Cohort::subset(std::span<const std::size_t> rows) const {
  Cohort out(width_);
  for (auto r : rows) out.add_row(row(r), has_ids() ? id(r) : std::string());
  return out;
}

Cohort bind_cohort(const CsvTable& table, const DiscreteNetwork& net, const std::string& source) {
  const auto id_col = table.column("id");
  std::vector<std::size_t> node_of(table.header.size(), net.size());
  std::set<std::size_t> seen;
  for (std::size_t c = 0; c < table.header.size(); ++c) {
    if (c == id_col) continue;
    const auto node = net.find(table.header[c]);
    if (!node) throw CohortFormatError(source + ": column '" + table.header[c] + "' is not a model node");
    if (!seen.insert(*node).second) throw CohortFormatError(source + ": duplicate column '" + table.header[c] + "'");
    node_of[c] = *node;
  }
  Cohort cohort(net.size());
  std::vector<int> values(net.size());
  for (std::size_t r = 0; r < table.rows.size(); ++r) {
    std::fill(values.begin(), values.end(), kMissing);
    const auto& fields = table.rows[r];
    for (std::size_t c = 0; c < fields.size(); ++c) {
      if (c == id_col || fields[c].empty()) continue;
      const auto state = net.variable(node_of[c]).state_index(fields[c]);
      if (!state)
        throw CohortFormatError(source + ": row " + std::to_string(r + 1) + ", column '" + table.header[c] +
                                "': '" + fields[c] + "' is not a state");
      values[node_of[c]] = static_cast<int>(*state);
    }
    cohort.add_row(values, id_col < fields.size() ? fields[id_col] : std::string());
  }
  return cohort;
}

Cohort load_cohort(const std::filesystem::path& path, const DiscreteNetwork& net) {
  return bind_cohort(read_csv(path), net, path.string());
}

CsvTable cohort_table(const Cohort& cohort, const DiscreteNetwork& net, std::span<const std::size_t> nodes) {
  CsvTable table;
  table.header.push_back("id");
  for (auto n : nodes) table.header.push_back(net.variable(n).name);
  table.rows.reserve(cohort.size());
  for (std::size_t r = 0; r < cohort.size(); ++r) {
    std::vector<std::string> fields;
    fields.reserve(nodes.size() + 1);
    fields.push_back(cohort.id(r));
    for (auto n : nodes) {
      const int s = cohort.at(r, n);
      fields.push_back(s == kMissing ? std::string() : net.variable(n).states[static_cast<std::size_t>(s)]);
    }
    table.rows.push_back(std::move(fields));
  }
  return table;
}

void save_cohort(const std::filesystem::path& path, const Cohort& cohort, const DiscreteNetwork& net,
                 std::span<const std::size_t> nodes) {
  write_csv(path, cohort_table(cohort, net, nodes));
}

}  // namespace causalrd
