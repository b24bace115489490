#pragma once

#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "gatelab/bon.hpp"

namespace gatelab {

inline constexpr const char* kRecordHeader =
    "config_id,seed,N,ratio,r_min,mode,task_id,category,p_true,binding,r_sel,y_sel,payoff_sel";

// Shortest decimal text that parses back to the same double.
std::string format_double(double v);

void write_records_csv(const std::filesystem::path& path, std::span<const SweepRecord> records);
std::vector<SweepRecord> read_records_csv(const std::filesystem::path& path);

void write_tasks_csv(const std::filesystem::path& path, std::span<const Task> tasks);
void write_binding_csv(const std::filesystem::path& path, const BindingEstimate& est);

// Reads (report, outcome) pairs from a CSV with either r,y or r_sel,y_sel columns.
std::pair<std::vector<double>, std::vector<int>> read_forecast_csv(const std::filesystem::path& path);

}  // namespace gatelab
