#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include <json.hpp>

namespace coc {

using ClassIndex = std::size_t;

struct AttributeMeta {
  std::string name;
  std::size_t index = 0;
  double raw_min = 0.0;
  double raw_max = 0.0;

  bool constant() const { return !(raw_max > raw_min); }
};

struct ClassInfo {
  std::string name;
  std::string color;  // #rrggbb
};

struct Case {
  std::size_t id = 0;
  std::vector<double> raw;
  std::vector<double> norm;
  ClassIndex label = 0;
  bool synthetic = false;
};

// Immutable labeled n-D dataset. Normalization is min-max per attribute;
// constant attributes normalize to 0.5.
class Dataset {
 public:
  Dataset(std::vector<std::string> attribute_names,
          std::vector<std::vector<double>> raw_rows,
          std::vector<std::string> labels);

  const std::vector<AttributeMeta>& attributes() const { return attributes_; }
  const std::vector<Case>& cases() const { return cases_; }
  const std::vector<ClassInfo>& classes() const { return classes_; }

  std::size_t dimension() const { return attributes_.size(); }
  std::size_t size() const { return cases_.size(); }
  const Case& at(std::size_t case_id) const;

  // Throws NotFoundError for an unknown class name.
  ClassIndex class_index(const std::string& name) const;
  std::vector<std::size_t> class_counts() const;

  std::vector<double> normalize(std::span<const double> raw) const;
  std::vector<double> denormalize(std::span<const double> norm) const;

  // Copy keeping only the given cases; normalization is recomputed and ids
  // are renumbered from 0.
  Dataset subset(std::span<const std::size_t> case_ids) const;

 private:
  std::vector<AttributeMeta> attributes_;
  std::vector<Case> cases_;
  std::vector<ClassInfo> classes_;
};

std::string default_class_color(std::size_t class_position);

using LabelColumn = std::variant<std::string, std::size_t>;
inline constexpr std::size_t kLastColumn = static_cast<std::size_t>(-1);

struct CsvOptions {
  // Drop rows with empty or NA cells instead of rejecting the file.
  bool drop_missing = false;
};

Dataset load_csv(const std::filesystem::path& path, const LabelColumn& label_column,
                 const CsvOptions& options = {});
Dataset parse_csv(std::string_view text, const LabelColumn& label_column,
                  const CsvOptions& options = {});

// Each class samples every attribute i.i.d. from normal(mean, std);
// classes are named "class0", "class1", ...
Dataset gen_synthetic(std::size_t cases_per_class, std::size_t attributes,
                      std::span<const double> means, double stddev, std::uint64_t seed);

// Per-class synthetic mean; the returned case is flagged synthetic and its id
// is one past the last dataset id. It is not inserted into the dataset.
Case synth_mean(const Dataset& dataset, ClassIndex label);

nlohmann::json to_json(const Dataset& dataset);
std::string to_csv(const Dataset& dataset);

}  // namespace coc
