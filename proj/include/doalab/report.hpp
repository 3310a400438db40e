#pragma once

#include <ostream>
#include <string>

#include "doalab/experiment.hpp"

namespace doalab {

/// CSV columns: sweep_value, method, rmse_db, crb_db, trials, failures.
/// Numbers use %.6f; -inf marks an all-exact RMSE and nan a singular CRB.
/// One row per (sweep point, method) in report order.
void write_csv(std::ostream& out, const RmseReport& report);
void write_csv(const std::string& path, const RmseReport& report);

/// Line plot of RMSE per method with the numeric CRB dashed.
void write_svg(std::ostream& out, const RmseReport& report);
void write_svg(const std::string& path, const RmseReport& report);

/// Fixed-format number used by the CSV and the CLI.
std::string format_number(double v);

}  // namespace doalab
