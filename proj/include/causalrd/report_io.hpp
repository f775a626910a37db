#pragma once

#include <filesystem>
#include <string>

#include "causalrd/model_io.hpp"
#include "causalrd/rddo.hpp"

namespace causalrd {

// Frozen column order of effects.csv.
inline constexpr const char* kEffectsHeader = "variable,t,mode,category,n,mean,std,ks_min_p,significant,rank";

Json report_json(const RdDoReport& report);
CsvTable effects_table(const RdDoReport& report);
CsvTable timepoints_table(const RdDoReport& report);

// Writes report.json, effects.csv, timepoints.csv and run_manifest.json
// into `out` (created if needed). Throws Error naming the path on IO failure.
void emit_report(const RdDoReport& report, const std::filesystem::path& out, const Json& manifest);

}  // namespace causalrd
