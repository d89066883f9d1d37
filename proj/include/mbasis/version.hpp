#pragma once

namespace mbasis {

inline constexpr const char kVersion[] = "0.1.0";
inline constexpr const char kSystemSchema[] = "mbasis/1";
inline constexpr const char kReportSchema[] = "mbasis/report/1";

}  // namespace mbasis
