#include "lsbound/records.hpp"

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <map>
#include <mutex>

#include "lsbound/errors.hpp"
#include "lsbound/version.hpp"

namespace lsbound {

std::string iso8601_utc_now() {
  const auto now = std::chrono::system_clock::now();
  const std::time_t t = std::chrono::system_clock::to_time_t(now);
  std::tm tm{};
  gmtime_r(&t, &tm);
  const auto us = std::chrono::duration_cast<std::chrono::microseconds>(now.time_since_epoch())
                      .count() %
                  1000000;
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%04d-%02d-%02dT%02d:%02d:%02d.%06lldZ", tm.tm_year + 1900,
                tm.tm_mon + 1, tm.tm_mday, tm.tm_hour, tm.tm_min, tm.tm_sec,
                static_cast<long long>(us));
  return buf;
}

std::string config_hash_hex(const ConfigMap& map) {
  char buf[20];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(map.hash()));
  return buf;
}

ResultRecord make_record(std::string kind, nlohmann::json payload,
                         const std::string& config_hash) {
  ResultRecord r;
  r.kind = std::move(kind);
  r.payload = std::move(payload);
  r.timestamp = iso8601_utc_now();
  r.version = kVersion;
  r.config_hash = config_hash;
  return r;
}

nlohmann::json record_json(const ResultRecord& record) {
  return nlohmann::json{{"schema_version", kRecordSchemaVersion},
                        {"kind", record.kind},
                        {"timestamp", record.timestamp},
                        {"version", record.version},
                        {"config_hash", record.config_hash},
                        {"payload", record.payload}};
}

namespace {

std::mutex& writer_lock(const std::string& path) {
  static std::mutex registry_lock;
  static std::map<std::string, std::mutex> locks;
  std::lock_guard<std::mutex> guard(registry_lock);
  return locks[path];
}

}  // namespace

std::vector<std::string> persist(std::span<const ResultRecord> records, const std::string& dir) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw format_error("persist: cannot create directory " + dir + ": " + ec.message());
  std::vector<std::string> paths;
  for (const ResultRecord& record : records) {
    const std::string path = (std::filesystem::path(dir) / (record.kind + ".jsonl")).string();
    const std::string line = record_json(record).dump() + "\n";
    {
      std::lock_guard<std::mutex> guard(writer_lock(path));
      std::ofstream out(path, std::ios::app);
      if (!out) throw format_error("persist: cannot open " + path + " for append");
      out.write(line.data(), static_cast<std::streamsize>(line.size()));
      if (!out) throw format_error("persist: write failed for " + path);
    }
    if (std::find(paths.begin(), paths.end(), path) == paths.end()) paths.push_back(path);
  }
  return paths;
}

nlohmann::json bound_report_json(const BoundReport& report) {
  nlohmann::json j{{"theorem", report.theorem},
                   {"complexity", report.complexity},
                   {"kl", report.kl},
                   {"empirical_risk", report.empirical_risk},
                   {"log_inv_delta", report.log_inv_delta},
                   {"lambda", report.lambda_used},
                   {"rhs", report.rhs},
                   {"flagged", report.flagged}};
  nlohmann::json meta = nlohmann::json::object();
  for (const auto& [key, value] : report.metadata) meta[key] = value;
  j["metadata"] = meta;
  return j;
}

nlohmann::json train_trace_json(const TrainTrace& trace) {
  return nlohmann::json{{"epoch_loss", trace.epoch_loss},
                        {"epochs", trace.epoch_loss.size()},
                        {"weight_count", trace.final_weights.size()},
                        {"wall_seconds", trace.wall_seconds},
                        {"per_label_mean_loss", trace.per_label_mean_loss},
                        {"label_loss_std", trace.label_loss_std}};
}

nlohmann::json balance_stats_json(const BalanceStats& stats) {
  return nlohmann::json{{"per_label_mean", stats.per_label_mean},
                        {"counts", stats.counts},
                        {"overall_mean", stats.overall_mean},
                        {"across_label_std", stats.across_label_std}};
}

}  // namespace lsbound
