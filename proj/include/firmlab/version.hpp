#pragma once

namespace firmlab {

inline constexpr const char* kVersion = "0.1.0";

// Version of the JSON report layout emitted by the experiment runner.
inline constexpr int kReportSchemaVersion = 1;

}  // namespace firmlab
