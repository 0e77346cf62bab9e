#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace pacgibbs {

inline constexpr int kRecordSchemaVersion = 1;

class RecordFormatError : public std::runtime_error {
 public:
  RecordFormatError(std::size_t line, const std::string& message)
      : std::runtime_error(line == 0 ? message : "line " + std::to_string(line) + ": " + message), line_(line) {}
  std::size_t line() const { return line_; }

 private:
  std::size_t line_;
};

/// One certificate evaluation of one sweep point. `status` is "ok" or
/// "failed"; failed records keep the grid coordinates and an error message.
struct RunRecord {
  int schema_version = kRecordSchemaVersion;
  std::uint64_t seed = 0;
  std::string config_digest;
  std::uint64_t run_index = 0;
  std::uint64_t repetition = 0;
  std::string family;
  std::string mu_family;
  double alpha = 0.0;
  std::uint64_t alpha_index = 0;
  double alpha_prime = 0.0;
  std::optional<double> beta;
  double ratio = 0.0;
  std::uint64_t m = 0;
  std::uint64_t m_prime = 0;
  double emp_risk = 0.0;
  double test_risk = 0.0;
  double mu_post = 0.0;
  double mu_prior = 0.0;
  double omega_post = 0.0;
  double omega_prior = 0.0;
  double tau = 0.0;
  bool tau_clamped = false;
  double risk_upper = 1.0;
  std::string status = "ok";
  std::string error;
  double wall_time_ms = 0.0;

  bool operator==(const RunRecord&) const = default;
};

std::string serialize_record(const RunRecord& record);
RunRecord parse_record(const std::string& line, std::size_t line_number = 0);

void persist_records(const std::vector<RunRecord>& records, const std::filesystem::path& path);
std::vector<RunRecord> load_records(const std::filesystem::path& path);

}  // namespace pacgibbs
