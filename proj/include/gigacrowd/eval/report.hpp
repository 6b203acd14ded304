#pragma once

#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "gigacrowd/eval/metrics.hpp"

namespace gigacrowd::eval {

// One row of a metrics table. Columns that do not apply stay empty and are
// written as blank CSV cells or omitted from JSON.
struct MetricRow {
  std::string scene;
  std::optional<double> ap50, ar;
  std::optional<double> mota, motp, idf1, far, mt_count, mt_ratio;
  std::optional<double> precision, recall, f1;
};

MetricRow row_from(const std::string& scene, const DetEvalResult& r);
MetricRow row_from(const std::string& scene, const MotEvalResult& r);
MetricRow row_from(const std::string& scene, const GroupEvalResult& r);

const std::vector<std::string>& metric_columns();

// Column-wise mean over the rows that carry each column, labelled "mean".
MetricRow aggregate_rows(const std::vector<MetricRow>& rows);

// Header, one row per scene, then the aggregate row.
std::string rows_to_csv(const std::vector<MetricRow>& rows);
nlohmann::json rows_to_json(const std::vector<MetricRow>& rows);

}  // namespace gigacrowd::eval
