#pragma once

namespace lsbound {

inline constexpr const char* kVersion = "0.1.0";
inline constexpr int kRecordSchemaVersion = 1;

}  // namespace lsbound
