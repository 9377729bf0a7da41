#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <vector>

namespace mixcal {

enum class Role { drive, measurement };

const char* role_name(Role role);
std::optional<Role> parse_role(const std::string& name);

struct CalibrationRecord {
  std::string channel_id;
  std::string timestamp;  // UTC, YYYY-MM-DDTHH:MM:SSZ
  Role role = Role::drive;
  double i_offset = 0.0;
  double q_offset = 0.0;
  double c_real = 0.0;
  double c_imag = 0.0;
  double residual_carrier_db = 0.0;
  double residual_image_db = 0.0;
  std::string config_digest;

  void validate() const;
  friend bool operator==(const CalibrationRecord&, const CalibrationRecord&) = default;
};

std::string utc_timestamp_now();
// Accepts YYYY-MM-DDTHH:MM:SSZ or a bare date YYYY-MM-DD (midnight UTC).
std::optional<long long> parse_utc_timestamp(const std::string& text);

// One JSON object, no trailing newline. Infinite dB values are written as strings.
std::string record_to_line(const CalibrationRecord& record);
CalibrationRecord record_from_line(const std::string& line);  // throws IoError

struct RecordFilter {
  std::optional<std::string> channel_id;
  std::optional<std::string> since;  // inclusive lower bound on timestamp
};

struct StoreListing {
  std::vector<CalibrationRecord> records;  // matching records before any corrupt line
  std::optional<std::string> error;
  std::size_t error_line = 0;  // 1-based; 0 when there is no error
};

// Appends one line to the store at `path`. Holds an advisory lock on
// `path` + ".lock" and replaces the store by renaming a fully written copy, so
// readers see either the old or the new file. Existing lines are copied
// byte-for-byte. Throws IoError.
void store_append(const std::string& path, const CalibrationRecord& record);

// A missing store lists as empty. Reading stops at the first corrupt line.
StoreListing store_list(const std::string& path, const RecordFilter& filter = {});

}  // namespace mixcal
