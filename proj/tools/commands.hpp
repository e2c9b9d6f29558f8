#pragma once

#include <functional>
#include <map>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "manifest.hpp"

namespace rangelab::cli {

using Action = std::function<void(Manifest&)>;
using Registry = std::map<const CLI::App*, Action>;

void add_simulate(CLI::App& app, Registry& reg);
void add_green(CLI::App& app, Registry& reg);
void add_capacity(CLI::App& app, Registry& reg);
void add_folding(CLI::App& app, Registry& reg);
void add_deviation(CLI::App& app, Registry& reg);
void add_report(CLI::App& app, Registry& reg);

/// Splits one RFC 4180 line (without the line terminator).
std::vector<std::string> split_csv_line(const std::string& line);

}  // namespace rangelab::cli
