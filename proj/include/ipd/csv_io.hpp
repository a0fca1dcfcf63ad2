#pragma once

#include "ipd/sim.hpp"

#include <string>
#include <vector>

namespace ipd {

/// Calibration table: header `t,role,<features...>,y,yhat`, role in {lab, unlab}.
struct CalibrationData {
  std::vector<CalibrationPoint> points;  // ascending t
  std::vector<std::string> columns;      // design columns, intercept first unless supplied
};

/// Throws ParseError (row and column named), SchemaError or NonFiniteValue.
CalibrationData parse_calibration_csv(const std::string& text);
CalibrationData load_calibration_csv(const std::string& path);

/// Labeled rows of a file in the calibration schema, all times pooled.
/// Used for an explicit refit holdout.
LabeledBatch load_labeled_csv(const std::string& path);

/// Writes the calibration schema with %.17g numbers; a column named
/// "intercept" is left out since loading adds it back.
std::string format_calibration_csv(const std::vector<CalibrationPoint>& points);
void write_calibration_csv(const std::string& path, const std::vector<CalibrationPoint>& points);

/// Grid CSV: lambda,theta,decision,w_ref,w_rec,utility_ref,utility_rec,utility_ret
std::string format_grid_csv(const std::vector<GridCell>& cells);

/// Writes text to a file, or to standard output for "-". Throws IoError.
void write_text(const std::string& path, const std::string& text);
std::string read_text(const std::string& path);

}  // namespace ipd
