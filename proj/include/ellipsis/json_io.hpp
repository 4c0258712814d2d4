#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include <json.hpp>

#include "ellipsis/analytics.hpp"
#include "ellipsis/buffer_sim.hpp"
#include "ellipsis/learner.hpp"
#include "ellipsis/reconstruct.hpp"
#include "ellipsis/reducer.hpp"
#include "ellipsis/workload_gen.hpp"

namespace ellipsis {

inline constexpr int kSchemaVersion = 1;

using json = nlohmann::json;

/// Reads and parses a JSON file. Throws Error for I/O or syntax problems.
json read_json_file(const std::filesystem::path& path);
void write_json_file(const std::filesystem::path& path, const json& value);

// Template entries appear in JSON as "sys:a0:a1:a2:a3" strings. Integer
// fields such as arch and per also accept hex strings ("40000028").

/// Throws SpecInvalid on any schema problem.
WorkloadSpec workload_spec_from_json(const json& j);
json workload_spec_to_json(const WorkloadSpec& spec);
AnomalySpec anomaly_spec_from_json(const json& j);

/// Accepts a single task object or {"tasks": [...]}. Keys: name, I, len, p,
/// f, n, B_A, B_E. Throws SpecInvalid.
std::vector<TaskParams> task_params_from_json(const json& j);

/// Throws SpecInvalid.
BufferConfig buffer_config_from_json(const json& j);

json to_json(const ReduceCounters& c);
ReduceCounters counters_from_json(const json& j);
json to_json(const std::vector<TaskStatistics>& stats);
json to_json(const SimResult& r);
json to_json(const RetentionReport& r);
json to_json(const ComparisonReport& r);

}  // namespace ellipsis
