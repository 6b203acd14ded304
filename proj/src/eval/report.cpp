#include "gigacrowd/eval/report.hpp"

#include <array>
#include <cstdio>

namespace gigacrowd::eval {
namespace {

using Field = std::optional<double> MetricRow::*;

const std::array<Field, 11> kFields = {&MetricRow::ap50,   &MetricRow::ar,        &MetricRow::mota,
                                       &MetricRow::motp,   &MetricRow::idf1,      &MetricRow::far,
                                       &MetricRow::mt_count, &MetricRow::mt_ratio, &MetricRow::precision,
                                       &MetricRow::recall, &MetricRow::f1};

std::string format_number(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.10g", v);
  return buf;
}

std::string csv_escape(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

}  // namespace

const std::vector<std::string>& metric_columns() {
  static const std::vector<std::string> cols = {"ap50", "ar",       "mota",      "motp",   "idf1", "far",
                                                "mt_count", "mt_ratio", "precision", "recall", "f1"};
  return cols;
}

MetricRow row_from(const std::string& scene, const DetEvalResult& r) {
  MetricRow row;
  row.scene = scene;
  row.ap50 = r.ap50;
  row.ar = r.ar;
  return row;
}

MetricRow row_from(const std::string& scene, const MotEvalResult& r) {
  MetricRow row;
  row.scene = scene;
  row.mota = r.mota;
  row.motp = r.motp;
  row.idf1 = r.idf1;
  row.far = r.far;
  row.mt_count = r.mt_count;
  row.mt_ratio = r.mt_ratio;
  return row;
}

MetricRow row_from(const std::string& scene, const GroupEvalResult& r) {
  MetricRow row;
  row.scene = scene;
  row.precision = r.precision;
  row.recall = r.recall;
  row.f1 = r.f1;
  return row;
}

MetricRow aggregate_rows(const std::vector<MetricRow>& rows) {
  MetricRow mean;
  mean.scene = "mean";
  for (Field f : kFields) {
    double sum = 0.0;
    int n = 0;
    for (const MetricRow& r : rows)
      if (r.*f) {
        sum += *(r.*f);
        ++n;
      }
    if (n > 0) mean.*f = sum / n;
  }
  return mean;
}

std::string rows_to_csv(const std::vector<MetricRow>& rows) {
  std::string out = "scene";
  for (const std::string& c : metric_columns()) out += "," + c;
  out += "\n";
  auto emit = [&](const MetricRow& r) {
    out += csv_escape(r.scene);
    for (Field f : kFields) {
      out += ",";
      if (r.*f) out += format_number(*(r.*f));
    }
    out += "\n";
  };
  for (const MetricRow& r : rows) emit(r);
  emit(aggregate_rows(rows));
  return out;
}

nlohmann::json rows_to_json(const std::vector<MetricRow>& rows) {
  auto to_obj = [](const MetricRow& r) {
    nlohmann::json o;
    o["scene"] = r.scene;
    for (std::size_t i = 0; i < kFields.size(); ++i)
      if (r.*kFields[i]) o[metric_columns()[i]] = *(r.*kFields[i]);
    return o;
  };
  nlohmann::json scenes = nlohmann::json::array();
  for (const MetricRow& r : rows) scenes.push_back(to_obj(r));
  return {{"scenes", scenes}, {"aggregate", to_obj(aggregate_rows(rows))}};
}

}  // namespace gigacrowd::eval
