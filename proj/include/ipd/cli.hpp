#pragma once

#include "ipd/config.hpp"
#include "ipd/csv_io.hpp"

#include <string>
#include <vector>

namespace ipd {

/// Calibration data, refit holdout and target index for a CSV-driven run.
struct CsvInputs {
  CalibrationData data;
  LabeledBatch holdout;
  std::size_t target = 0;
};

/// Without an explicit holdout file the labeled rows of the earliest
/// calibration point serve as the refit holdout.
CsvInputs load_csv_inputs(const std::string& data_path, const std::string& holdout_path, const std::string& target);

/// Estimates, preferences (calibrated on a resampled null when the config asks for it) and decision.
DecisionRun decide_from_csv(const ScenarioConfig& cfg, const CsvInputs& inputs);

/// Exit codes: 0 success, 2 input / config / schema errors, 3 numerical errors.
int cli_main(int argc, const char* const* argv);
int cli_main(const std::vector<std::string>& args);

}  // namespace ipd
