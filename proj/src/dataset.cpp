#include "coc/dataset.hpp"

#include <algorithm>
#include <array>
#include <charconv>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include <fmt/format.h>

#include "coc/error.hpp"
#include "coc/random.hpp"

namespace coc {

namespace {

double normalize_value(const AttributeMeta& meta, double raw) {
  if (meta.constant()) return 0.5;
  return (raw - meta.raw_min) / (meta.raw_max - meta.raw_min);
}

std::vector<std::string> split_csv_line(std::string_view line) {
  std::vector<std::string> fields;
  std::string field;
  bool quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    const char c = line[i];
    if (quoted) {
      if (c == '"' && i + 1 < line.size() && line[i + 1] == '"') {
        field.push_back('"');
        ++i;
      } else if (c == '"') {
        quoted = false;
      } else {
        field.push_back(c);
      }
    } else if (c == '"') {
      quoted = true;
    } else if (c == ',') {
      fields.push_back(std::move(field));
      field.clear();
    } else {
      field.push_back(c);
    }
  }
  fields.push_back(std::move(field));
  for (auto& f : fields) {
    const auto first = f.find_first_not_of(" \t");
    const auto last = f.find_last_not_of(" \t");
    f = first == std::string::npos ? std::string{} : f.substr(first, last - first + 1);
  }
  return fields;
}

bool is_missing(const std::string& cell) {
  return cell.empty() || cell == "NA" || cell == "?" || cell == "NaN";
}

std::optional<double> parse_number(const std::string& cell) {
  double value = 0.0;
  const char* begin = cell.data();
  const char* end = begin + cell.size();
  if (begin != end && *begin == '+') ++begin;
  const auto [ptr, ec] = std::from_chars(begin, end, value);
  if (ec != std::errc{} || ptr != end || !std::isfinite(value)) return std::nullopt;
  return value;
}

}  // namespace

std::string default_class_color(std::size_t class_position) {
  static constexpr std::array<const char*, 3> kPrimary = {"#d62728", "#2ca02c", "#1f77b4"};
  static constexpr std::array<const char*, 12> kCycle = {
      "#ff7f0e", "#9467bd", "#8c564b", "#e377c2", "#7f7f7f", "#bcbd22",
      "#17becf", "#393b79", "#637939", "#8c6d31", "#843c39", "#7b4173"};
  if (class_position < kPrimary.size()) return kPrimary[class_position];
  return kCycle[(class_position - kPrimary.size()) % kCycle.size()];
}

Dataset::Dataset(std::vector<std::string> attribute_names,
                 std::vector<std::vector<double>> raw_rows, std::vector<std::string> labels) {
  if (attribute_names.empty()) throw DataError("dataset has no attributes");
  if (raw_rows.empty()) throw DataError("dataset has no cases");
  if (raw_rows.size() != labels.size()) throw DataError("label count does not match case count");

  std::set<std::string> seen;
  for (std::size_t i = 0; i < attribute_names.size(); ++i) {
    if (!seen.insert(attribute_names[i]).second) {
      throw DataError(fmt::format("duplicate attribute name '{}'", attribute_names[i]));
    }
    attributes_.push_back({attribute_names[i], i, 0.0, 0.0});
  }

  const std::size_t n = attributes_.size();
  for (std::size_t r = 0; r < raw_rows.size(); ++r) {
    if (raw_rows[r].size() != n) {
      throw DataError(fmt::format("case {} has {} values, expected {}", r, raw_rows[r].size(), n));
    }
  }
  for (std::size_t i = 0; i < n; ++i) {
    auto [lo, hi] = std::minmax_element(raw_rows.begin(), raw_rows.end(),
                                        [i](const auto& a, const auto& b) { return a[i] < b[i]; });
    attributes_[i].raw_min = (*lo)[i];
    attributes_[i].raw_max = (*hi)[i];
  }

  for (std::size_t r = 0; r < raw_rows.size(); ++r) {
    auto found = std::find_if(classes_.begin(), classes_.end(),
                              [&](const ClassInfo& c) { return c.name == labels[r]; });
    if (found == classes_.end()) {
      classes_.push_back({labels[r], default_class_color(classes_.size())});
      found = classes_.end() - 1;
    }
    Case c;
    c.id = r;
    c.label = static_cast<ClassIndex>(found - classes_.begin());
    c.norm.resize(n);
    for (std::size_t i = 0; i < n; ++i) c.norm[i] = normalize_value(attributes_[i], raw_rows[r][i]);
    c.raw = std::move(raw_rows[r]);
    cases_.push_back(std::move(c));
  }
}

const Case& Dataset::at(std::size_t case_id) const {
  if (case_id >= cases_.size()) throw NotFoundError(fmt::format("unknown case id {}", case_id));
  return cases_[case_id];
}

ClassIndex Dataset::class_index(const std::string& name) const {
  for (std::size_t i = 0; i < classes_.size(); ++i) {
    if (classes_[i].name == name) return i;
  }
  throw NotFoundError(fmt::format("unknown class '{}'", name));
}

std::vector<std::size_t> Dataset::class_counts() const {
  std::vector<std::size_t> counts(classes_.size(), 0);
  for (const auto& c : cases_) ++counts[c.label];
  return counts;
}

std::vector<double> Dataset::normalize(std::span<const double> raw) const {
  if (raw.size() != dimension()) throw DataError("dimension mismatch");
  std::vector<double> out(raw.size());
  for (std::size_t i = 0; i < raw.size(); ++i) out[i] = normalize_value(attributes_[i], raw[i]);
  return out;
}

std::vector<double> Dataset::denormalize(std::span<const double> norm) const {
  if (norm.size() != dimension()) throw DataError("dimension mismatch");
  std::vector<double> out(norm.size());
  for (std::size_t i = 0; i < norm.size(); ++i) {
    const auto& a = attributes_[i];
    out[i] = a.constant() ? a.raw_min : a.raw_min + norm[i] * (a.raw_max - a.raw_min);
  }
  return out;
}

Dataset Dataset::subset(std::span<const std::size_t> case_ids) const {
  std::vector<std::string> names;
  for (const auto& a : attributes_) names.push_back(a.name);
  std::vector<std::vector<double>> rows;
  std::vector<std::string> labels;
  for (auto id : case_ids) {
    rows.push_back(at(id).raw);
    labels.push_back(classes_[at(id).label].name);
  }
  return Dataset(std::move(names), std::move(rows), std::move(labels));
}

Dataset parse_csv(std::string_view text, const LabelColumn& label_column,
                  const CsvOptions& options) {
  std::istringstream in{std::string(text)};
  std::string line;
  std::vector<std::string> header;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.find_first_not_of(" \t") == std::string::npos) continue;
    header = split_csv_line(line);
    break;
  }
  if (header.empty()) throw DataError("empty dataset: no header row");

  std::size_t label_pos = 0;
  if (const auto* name = std::get_if<std::string>(&label_column)) {
    const auto it = std::find(header.begin(), header.end(), *name);
    if (it == header.end()) throw DataError(fmt::format("label column '{}' not found", *name));
    label_pos = static_cast<std::size_t>(it - header.begin());
  } else {
    label_pos = std::get<std::size_t>(label_column);
    if (label_pos == kLastColumn) label_pos = header.size() - 1;
    if (label_pos >= header.size()) {
      throw DataError(fmt::format("label column index {} out of range", label_pos));
    }
  }

  std::vector<std::string> names;
  for (std::size_t i = 0; i < header.size(); ++i) {
    if (i != label_pos) names.push_back(header[i]);
  }

  std::vector<std::vector<double>> rows;
  std::vector<std::string> labels;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.find_first_not_of(" \t") == std::string::npos) continue;
    const auto cells = split_csv_line(line);
    if (cells.size() != header.size()) {
      throw DataError(fmt::format("row {}: expected {} cells, found {}", line_no, header.size(),
                                  cells.size()));
    }
    std::vector<double> values;
    bool missing = false;
    for (std::size_t i = 0; i < cells.size(); ++i) {
      if (i == label_pos) continue;
      if (is_missing(cells[i])) {
        if (!options.drop_missing) {
          throw DataError(fmt::format("row {}, column '{}': missing value", line_no, header[i]));
        }
        missing = true;
        break;
      }
      const auto value = parse_number(cells[i]);
      if (!value) {
        throw DataError(fmt::format("row {}, column '{}': non-numeric value '{}'", line_no,
                                    header[i], cells[i]));
      }
      values.push_back(*value);
    }
    if (missing) continue;
    if (cells[label_pos].empty()) {
      if (options.drop_missing) continue;
      throw DataError(fmt::format("row {}: missing label", line_no));
    }
    rows.push_back(std::move(values));
    labels.push_back(cells[label_pos]);
  }
  if (rows.empty()) throw DataError("empty dataset: no data rows");
  return Dataset(std::move(names), std::move(rows), std::move(labels));
}

Dataset load_csv(const std::filesystem::path& path, const LabelColumn& label_column,
                 const CsvOptions& options) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError(fmt::format("cannot open '{}'", path.string()));
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return parse_csv(buffer.str(), label_column, options);
}

Dataset gen_synthetic(std::size_t cases_per_class, std::size_t attributes,
                      std::span<const double> means, double stddev, std::uint64_t seed) {
  if (means.empty()) throw DataError("gen_synthetic: at least one class mean is required");
  if (cases_per_class == 0) throw DataError("gen_synthetic: cases_per_class must be >= 1");
  if (attributes == 0) throw DataError("gen_synthetic: attributes must be >= 1");
  if (!(stddev > 0.0)) throw DataError("gen_synthetic: std must be > 0");

  Rng rng(seed);
  std::vector<std::string> names;
  for (std::size_t i = 0; i < attributes; ++i) names.push_back(fmt::format("x{}", i + 1));
  std::vector<std::vector<double>> rows;
  std::vector<std::string> labels;
  for (std::size_t c = 0; c < means.size(); ++c) {
    for (std::size_t k = 0; k < cases_per_class; ++k) {
      std::vector<double> row(attributes);
      for (auto& v : row) v = rng.normal(means[c], stddev);
      rows.push_back(std::move(row));
      labels.push_back(fmt::format("class{}", c));
    }
  }
  return Dataset(std::move(names), std::move(rows), std::move(labels));
}

Case synth_mean(const Dataset& dataset, ClassIndex label) {
  if (label >= dataset.classes().size()) {
    throw NotFoundError(fmt::format("unknown class index {}", label));
  }
  Case mean;
  mean.id = dataset.size();
  mean.label = label;
  mean.synthetic = true;
  mean.raw.assign(dataset.dimension(), 0.0);
  mean.norm.assign(dataset.dimension(), 0.0);
  std::size_t count = 0;
  for (const auto& c : dataset.cases()) {
    if (c.label != label) continue;
    ++count;
    for (std::size_t i = 0; i < dataset.dimension(); ++i) {
      mean.raw[i] += c.raw[i];
      mean.norm[i] += c.norm[i];
    }
  }
  if (count == 0) throw DataError(fmt::format("class '{}' has no cases", dataset.classes()[label].name));
  for (auto& v : mean.raw) v /= static_cast<double>(count);
  for (auto& v : mean.norm) v /= static_cast<double>(count);
  return mean;
}

nlohmann::json to_json(const Dataset& dataset) {
  nlohmann::json attrs = nlohmann::json::array();
  for (const auto& a : dataset.attributes()) {
    attrs.push_back({{"name", a.name}, {"index", a.index}, {"raw_min", a.raw_min}, {"raw_max", a.raw_max}});
  }
  nlohmann::json classes = nlohmann::json::array();
  for (const auto& c : dataset.classes()) classes.push_back({{"name", c.name}, {"color", c.color}});
  nlohmann::json cases = nlohmann::json::array();
  for (const auto& c : dataset.cases()) {
    cases.push_back({{"id", c.id}, {"label", c.label}, {"raw", c.raw}, {"norm", c.norm}});
  }
  return {{"attributes", attrs}, {"classes", classes}, {"cases", cases}};
}

std::string to_csv(const Dataset& dataset) {
  std::string out;
  for (const auto& a : dataset.attributes()) out += a.name + ",";
  out += "class\n";
  for (const auto& c : dataset.cases()) {
    for (double v : c.raw) out += fmt::format("{},", v);
    out += dataset.classes()[c.label].name + "\n";
  }
  return out;
}

}  // namespace coc
