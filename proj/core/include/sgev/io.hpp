#pragma once

#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "sgev/panel.hpp"

namespace sgev {

// Shortest decimal form that parses back to the identical double.
std::string format_double(double v);

// Strict double parse; the whole token must be consumed.
double parse_double(std::string_view token, const std::string& where);

// Writes via a temporary file in the same directory plus rename, so an
// interrupted run never leaves a partial artifact.
void atomic_write_text(const std::string& path, const std::string& content);

std::string read_text_file(const std::string& path);

// Wide CSV: optional '#' comment lines, then a header row of series
// names, then one row of decimal reals per time step.
TimeSeriesPanel read_panel_csv(const std::string& path);

// meta lines are echoed as '# key = value' before the header.
std::string panel_to_csv(const TimeSeriesPanel& panel,
                         const std::vector<std::pair<std::string, std::string>>& meta = {});

void write_panel_csv(const std::string& path, const TimeSeriesPanel& panel,
                     const std::vector<std::pair<std::string, std::string>>& meta = {});

}  // namespace sgev
