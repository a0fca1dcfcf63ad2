#include "ipd/csv_io.hpp"

#include "ipd/error.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <map>
#include <sstream>

namespace ipd {

namespace {

std::vector<std::string> split_fields(const std::string& line) {
  std::vector<std::string> out;
  std::string field;
  std::stringstream ss(line);
  while (std::getline(ss, field, ',')) {
    const auto b = field.find_first_not_of(" \t");
    const auto e = field.find_last_not_of(" \t");
    field = b == std::string::npos ? "" : field.substr(b, e - b + 1);
    if (field.size() >= 2 && field.front() == '"' && field.back() == '"') field = field.substr(1, field.size() - 2);
    out.push_back(field);
  }
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

std::string at(std::size_t row, const std::string& column) {
  return "row " + std::to_string(row) + ", column '" + column + "'";
}

double parse_number(const std::string& s, std::size_t row, const std::string& column) {
  double v = 0.0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (s.empty() || ec != std::errc() || ptr != s.data() + s.size())
    fail(ErrorKind::ParseError, at(row, column) + ": cannot parse '" + s + "' as a number");
  if (!std::isfinite(v)) fail(ErrorKind::NonFiniteValue, at(row, column) + ": non-finite value");
  return v;
}

std::string fmt(double v, int digits) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*g", digits, v);
  return buf;
}

struct ParsedRow {
  double t = 0.0;
  bool labeled = false;
  std::vector<double> x;
  double y = 0.0;
  double yhat = 0.0;
};

struct ParsedTable {
  std::vector<std::string> features;
  bool has_intercept = false;
  std::vector<ParsedRow> rows;
};

ParsedTable parse_table(const std::string& text) {
  std::vector<std::string> lines;
  {
    std::stringstream ss(text);
    std::string line;
    while (std::getline(ss, line)) {
      if (!line.empty() && line.back() == '\r') line.pop_back();
      lines.push_back(line);
    }
  }
  while (!lines.empty() && lines.back().empty()) lines.pop_back();
  if (lines.empty()) fail(ErrorKind::SchemaError, "calibration file has no header row");
  if (lines[0].rfind("\xEF\xBB\xBF", 0) == 0) lines[0].erase(0, 3);

  const auto header = split_fields(lines[0]);
  std::map<std::string, std::size_t> index;
  for (std::size_t j = 0; j < header.size(); ++j) {
    if (header[j].empty()) fail(ErrorKind::SchemaError, "empty column name in header");
    if (!index.emplace(header[j], j).second) fail(ErrorKind::SchemaError, "duplicate column '" + header[j] + "'");
  }
  for (const char* required : {"t", "role", "y", "yhat"})
    if (!index.count(required)) fail(ErrorKind::SchemaError, std::string("missing required column '") + required + "'");

  ParsedTable table;
  std::vector<std::size_t> feature_cols;
  for (std::size_t j = 0; j < header.size(); ++j) {
    const auto& h = header[j];
    if (h == "t" || h == "role" || h == "y" || h == "yhat") continue;
    table.features.push_back(h);
    feature_cols.push_back(j);
    if (h == "intercept") table.has_intercept = true;
  }
  if (table.features.empty()) fail(ErrorKind::SchemaError, "no feature columns");

  const std::size_t ct = index["t"], crole = index["role"], cy = index["y"], cyhat = index["yhat"];
  for (std::size_t li = 1; li < lines.size(); ++li) {
    const std::size_t row = li + 1;
    if (lines[li].empty()) continue;
    const auto f = split_fields(lines[li]);
    if (f.size() != header.size())
      fail(ErrorKind::ParseError, "row " + std::to_string(row) + ": expected " + std::to_string(header.size()) +
                                      " fields, found " + std::to_string(f.size()));
    ParsedRow r;
    r.t = parse_number(f[ct], row, "t");
    if (f[crole] == "lab") r.labeled = true;
    else if (f[crole] != "unlab")
      fail(ErrorKind::SchemaError, at(row, "role") + ": expected 'lab' or 'unlab', got '" + f[crole] + "'");
    for (std::size_t k = 0; k < feature_cols.size(); ++k)
      r.x.push_back(parse_number(f[feature_cols[k]], row, table.features[k]));
    if (f[cyhat].empty()) fail(ErrorKind::SchemaError, at(row, "yhat") + ": missing prediction");
    r.yhat = parse_number(f[cyhat], row, "yhat");
    if (r.labeled) {
      if (f[cy].empty()) fail(ErrorKind::SchemaError, at(row, "y") + ": missing y on a lab row");
      r.y = parse_number(f[cy], row, "y");
    }
    table.rows.push_back(std::move(r));
  }
  return table;
}

std::vector<std::string> design_columns(const ParsedTable& table) {
  std::vector<std::string> cols;
  if (!table.has_intercept) cols.push_back("intercept");
  cols.insert(cols.end(), table.features.begin(), table.features.end());
  return cols;
}

Matrix design_rows(const ParsedTable& table, const std::vector<const ParsedRow*>& rows) {
  const auto width = static_cast<Eigen::Index>(table.features.size() + (table.has_intercept ? 0 : 1));
  const Eigen::Index offset = table.has_intercept ? 0 : 1;
  Matrix X(static_cast<Eigen::Index>(rows.size()), width);
  for (std::size_t i = 0; i < rows.size(); ++i) {
    const auto r = static_cast<Eigen::Index>(i);
    if (offset) X(r, 0) = 1.0;
    for (std::size_t k = 0; k < rows[i]->x.size(); ++k) X(r, offset + static_cast<Eigen::Index>(k)) = rows[i]->x[k];
  }
  return X;
}

LabeledBatch labeled_batch(const ParsedTable& table, const std::vector<const ParsedRow*>& rows) {
  Vector y(static_cast<Eigen::Index>(rows.size())), yhat(static_cast<Eigen::Index>(rows.size()));
  for (std::size_t i = 0; i < rows.size(); ++i) {
    y(static_cast<Eigen::Index>(i)) = rows[i]->y;
    yhat(static_cast<Eigen::Index>(i)) = rows[i]->yhat;
  }
  return {DesignMatrix(design_rows(table, rows), design_columns(table)), std::move(y), std::move(yhat)};
}

UnlabeledBatch unlabeled_batch(const ParsedTable& table, const std::vector<const ParsedRow*>& rows) {
  Vector yhat(static_cast<Eigen::Index>(rows.size()));
  for (std::size_t i = 0; i < rows.size(); ++i) yhat(static_cast<Eigen::Index>(i)) = rows[i]->yhat;
  return {DesignMatrix(design_rows(table, rows), design_columns(table)), std::move(yhat)};
}

}  // namespace

std::string read_text(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(ErrorKind::IoError, "cannot open '" + path + "'");
  std::stringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

void write_text(const std::string& path, const std::string& text) {
  if (path == "-") {
    std::cout << text;
    std::cout.flush();
    if (!std::cout) fail(ErrorKind::IoError, "cannot write to standard output");
    return;
  }
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) fail(ErrorKind::IoError, "cannot open '" + path + "' for writing");
  out << text;
  out.close();
  if (!out) fail(ErrorKind::IoError, "failed writing '" + path + "'");
}

CalibrationData parse_calibration_csv(const std::string& text) {
  const ParsedTable table = parse_table(text);
  std::map<double, std::pair<std::vector<const ParsedRow*>, std::vector<const ParsedRow*>>> groups;
  for (const auto& r : table.rows) (r.labeled ? groups[r.t].first : groups[r.t].second).push_back(&r);
  if (groups.empty()) fail(ErrorKind::SchemaError, "calibration file has no data rows");

  CalibrationData out;
  out.columns = design_columns(table);
  for (const auto& [t, rows] : groups) {
    if (rows.first.empty() || rows.second.empty())
      fail(ErrorKind::SchemaError, "time " + fmt(t, 17) + " needs at least one lab and one unlab row");
    CalibrationPoint p;
    p.t = t;
    p.lab = labeled_batch(table, rows.first);
    p.unlab = unlabeled_batch(table, rows.second);
    out.points.push_back(std::move(p));
  }
  return out;
}

CalibrationData load_calibration_csv(const std::string& path) { return parse_calibration_csv(read_text(path)); }

LabeledBatch load_labeled_csv(const std::string& path) {
  const ParsedTable table = parse_table(read_text(path));
  std::vector<const ParsedRow*> rows;
  for (const auto& r : table.rows)
    if (r.labeled) rows.push_back(&r);
  if (rows.empty()) fail(ErrorKind::SchemaError, "'" + path + "' has no lab rows");
  return labeled_batch(table, rows);
}

std::string format_calibration_csv(const std::vector<CalibrationPoint>& points) {
  if (points.empty()) fail(ErrorKind::InvalidArgument, "no calibration points to write");
  const auto& names = points.front().lab.X.column_names();
  std::vector<Eigen::Index> keep;
  std::ostringstream out;
  out << "t,role";
  for (std::size_t j = 0; j < names.size(); ++j)
    if (names[j] != "intercept") {
      keep.push_back(static_cast<Eigen::Index>(j));
      out << ',' << names[j];
    }
  out << ",y,yhat\n";
  for (const auto& p : points) {
    const Matrix& L = p.lab.X.values();
    for (Eigen::Index i = 0; i < L.rows(); ++i) {
      out << fmt(p.t, 17) << ",lab";
      for (auto j : keep) out << ',' << fmt(L(i, j), 17);
      out << ',' << fmt(p.lab.y(i), 17) << ',' << fmt(p.lab.yhat(i), 17) << '\n';
    }
    const Matrix& U = p.unlab.X.values();
    for (Eigen::Index i = 0; i < U.rows(); ++i) {
      out << fmt(p.t, 17) << ",unlab";
      for (auto j : keep) out << ',' << fmt(U(i, j), 17);
      out << ",," << fmt(p.unlab.yhat(i), 17) << '\n';
    }
  }
  return out.str();
}

void write_calibration_csv(const std::string& path, const std::vector<CalibrationPoint>& points) {
  write_text(path, format_calibration_csv(points));
}

std::string format_grid_csv(const std::vector<GridCell>& cells) {
  std::ostringstream out;
  out << "lambda,theta,decision,w_ref,w_rec,utility_ref,utility_rec,utility_ret\n";
  for (const auto& c : cells) {
    const auto& s = c.solution;
    out << fmt(c.lambda, 12) << ',' << fmt(c.theta, 12) << ',' << to_string(s.decision) << ',' << fmt(s.w_ref, 12)
        << ',' << fmt(s.w_rec, 12) << ',' << fmt(s.utility_ref, 12) << ',' << fmt(s.utility_rec, 12) << ','
        << fmt(s.utility_ret, 12) << '\n';
  }
  return out.str();
}

}  // namespace ipd
