#pragma once

#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "lsbound/bounds.hpp"
#include "lsbound/config.hpp"
#include "lsbound/train.hpp"

namespace lsbound {

struct ResultRecord {
  std::string kind;  // bound | verify | sweep-row | train-trace | estimate
  nlohmann::json payload;
  std::string timestamp;    // ISO 8601 UTC
  std::string version;      // toolkit version
  std::string config_hash;  // 16 hex digits
};

std::string iso8601_utc_now();
std::string config_hash_hex(const ConfigMap& map);

ResultRecord make_record(std::string kind, nlohmann::json payload, const std::string& config_hash);

nlohmann::json record_json(const ResultRecord& record);

// Appends one JSON line per record to <dir>/<kind>.jsonl; returns the file
// paths written. Existing lines are never rewritten.
std::vector<std::string> persist(std::span<const ResultRecord> records, const std::string& dir);

nlohmann::json bound_report_json(const BoundReport& report);
nlohmann::json train_trace_json(const TrainTrace& trace);
nlohmann::json balance_stats_json(const BalanceStats& stats);

}  // namespace lsbound
