#include "mixcal/record_store.hpp"

#include <fcntl.h>
#include <sys/file.h>
#include <unistd.h>

#include <cerrno>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <ctime>
#include <fstream>
#include <limits>
#include <sstream>

#include "json.hpp"
#include "mixcal/errors.hpp"

namespace mixcal {
namespace {

using Json = nlohmann::ordered_json;

Json db_value(double v) {
  if (std::isfinite(v)) return v;
  if (std::isnan(v)) return "nan";
  return v > 0 ? "inf" : "-inf";
}

double db_from(const Json& j) {
  if (j.is_number()) return j.get<double>();
  if (j.is_string()) {
    const auto s = j.get<std::string>();
    if (s == "-inf") return -std::numeric_limits<double>::infinity();
    if (s == "inf") return std::numeric_limits<double>::infinity();
    if (s == "nan") return std::numeric_limits<double>::quiet_NaN();
  }
  throw IoError("expected a dB value");
}

std::string errno_text() { return std::strerror(errno); }

class FileLock {
 public:
  explicit FileLock(const std::string& path) {
    fd_ = ::open(path.c_str(), O_RDWR | O_CREAT | O_CLOEXEC, 0644);
    if (fd_ < 0) throw IoError("cannot open lock file " + path + ": " + errno_text());
    if (::flock(fd_, LOCK_EX) != 0) {
      ::close(fd_);
      throw IoError("cannot lock " + path + ": " + errno_text());
    }
  }
  ~FileLock() {
    ::flock(fd_, LOCK_UN);
    ::close(fd_);
  }
  FileLock(const FileLock&) = delete;
  FileLock& operator=(const FileLock&) = delete;

 private:
  int fd_ = -1;
};

void write_all(int fd, const std::string& data, const std::string& path) {
  std::size_t done = 0;
  while (done < data.size()) {
    const ssize_t n = ::write(fd, data.data() + done, data.size() - done);
    if (n < 0) {
      if (errno == EINTR) continue;
      throw IoError("cannot write " + path + ": " + errno_text());
    }
    done += static_cast<std::size_t>(n);
  }
}

}  // namespace

const char* role_name(Role role) { return role == Role::drive ? "drive" : "measurement"; }

std::optional<Role> parse_role(const std::string& name) {
  if (name == "drive") return Role::drive;
  if (name == "measurement") return Role::measurement;
  return std::nullopt;
}

void CalibrationRecord::validate() const {
  if (channel_id.empty()) throw DomainError("channel_id must not be empty");
  if (!parse_utc_timestamp(timestamp)) throw DomainError("timestamp is not a UTC ISO-8601 time: " + timestamp);
}

std::string utc_timestamp_now() {
  const std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

std::optional<long long> parse_utc_timestamp(const std::string& text) {
  std::tm tm{};
  int y, mo, d, h = 0, mi = 0, s = 0;
  char tail = 0;
  if (text.size() == 10) {
    if (std::sscanf(text.c_str(), "%4d-%2d-%2d%c", &y, &mo, &d, &tail) != 3) return std::nullopt;
  } else if (text.size() == 20) {
    if (std::sscanf(text.c_str(), "%4d-%2d-%2dT%2d:%2d:%2d%c", &y, &mo, &d, &h, &mi, &s, &tail) != 7 || tail != 'Z')
      return std::nullopt;
  } else {
    return std::nullopt;
  }
  if (mo < 1 || mo > 12 || d < 1 || d > 31 || h > 23 || mi > 59 || s > 60 || h < 0 || mi < 0 || s < 0)
    return std::nullopt;
  tm.tm_year = y - 1900;
  tm.tm_mon = mo - 1;
  tm.tm_mday = d;
  tm.tm_hour = h;
  tm.tm_min = mi;
  tm.tm_sec = s;
  const std::time_t t = timegm(&tm);
  // timegm normalizes out-of-range days (Feb 30 -> Mar 2); reject those.
  if (tm.tm_mday != d || tm.tm_mon != mo - 1) return std::nullopt;
  return static_cast<long long>(t);
}

std::string record_to_line(const CalibrationRecord& r) {
  Json j;
  j["channel_id"] = r.channel_id;
  j["timestamp"] = r.timestamp;
  j["role"] = role_name(r.role);
  j["i_offset"] = r.i_offset;
  j["q_offset"] = r.q_offset;
  j["c_real"] = r.c_real;
  j["c_imag"] = r.c_imag;
  j["residual_carrier_db"] = db_value(r.residual_carrier_db);
  j["residual_image_db"] = db_value(r.residual_image_db);
  j["config_digest"] = r.config_digest;
  return j.dump();
}

CalibrationRecord record_from_line(const std::string& line) {
  CalibrationRecord r;
  try {
    const Json j = Json::parse(line);
    if (!j.is_object() || j.size() != 10) throw IoError("expected an object with 10 fields");
    r.channel_id = j.at("channel_id").get<std::string>();
    r.timestamp = j.at("timestamp").get<std::string>();
    const auto role = parse_role(j.at("role").get<std::string>());
    if (!role) throw IoError("unknown role");
    r.role = *role;
    r.i_offset = j.at("i_offset").get<double>();
    r.q_offset = j.at("q_offset").get<double>();
    r.c_real = j.at("c_real").get<double>();
    r.c_imag = j.at("c_imag").get<double>();
    r.residual_carrier_db = db_from(j.at("residual_carrier_db"));
    r.residual_image_db = db_from(j.at("residual_image_db"));
    r.config_digest = j.at("config_digest").get<std::string>();
    r.validate();
  } catch (const Json::exception& e) {
    throw IoError(e.what());
  } catch (const DomainError& e) {
    throw IoError(e.what());
  }
  return r;
}

void store_append(const std::string& path, const CalibrationRecord& record) {
  record.validate();
  const std::string line = record_to_line(record) + "\n";
  FileLock lock(path + ".lock");

  std::string existing;
  {
    std::ifstream in(path, std::ios::binary);
    if (in) {
      std::ostringstream buf;
      buf << in.rdbuf();
      existing = buf.str();
    } else if (::access(path.c_str(), F_OK) == 0) {
      throw IoError("cannot read store " + path);
    }
  }
  if (!existing.empty() && existing.back() != '\n') existing += '\n';

  const std::string tmp = path + ".tmp." + std::to_string(::getpid());
  const int fd = ::open(tmp.c_str(), O_WRONLY | O_CREAT | O_TRUNC | O_CLOEXEC, 0644);
  if (fd < 0) throw IoError("cannot create " + tmp + ": " + errno_text());
  try {
    write_all(fd, existing, tmp);
    write_all(fd, line, tmp);
    if (::fsync(fd) != 0) throw IoError("cannot sync " + tmp + ": " + errno_text());
  } catch (...) {
    ::close(fd);
    ::unlink(tmp.c_str());
    throw;
  }
  ::close(fd);
  if (std::rename(tmp.c_str(), path.c_str()) != 0) {
    const std::string why = errno_text();
    ::unlink(tmp.c_str());
    throw IoError("cannot replace store " + path + ": " + why);
  }
}

StoreListing store_list(const std::string& path, const RecordFilter& filter) {
  StoreListing out;
  std::optional<long long> since;
  if (filter.since) {
    since = parse_utc_timestamp(*filter.since);
    if (!since) throw DomainError("since is not a UTC ISO-8601 time: " + *filter.since);
  }
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    if (::access(path.c_str(), F_OK) == 0) throw IoError("cannot read store " + path);
    return out;
  }
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    CalibrationRecord r;
    try {
      r = record_from_line(line);
    } catch (const IoError& e) {
      out.error = "store " + path + " line " + std::to_string(line_no) + ": " + e.what();
      out.error_line = line_no;
      break;
    }
    if (filter.channel_id && r.channel_id != *filter.channel_id) continue;
    if (since && *parse_utc_timestamp(r.timestamp) < *since) continue;
    out.records.push_back(std::move(r));
  }
  return out;
}

}  // namespace mixcal
