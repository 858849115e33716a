#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace carnot {

struct CheckRecord {
  std::string name;
  bool pass = false;
  double measured = 0.0;
  double tolerance = 0.0;
  std::string resolution;
  std::string detail;
  double runtime_s = 0.0;  // kept out of the hashed payload
};

struct Provenance {
  std::string scenario;
  std::string spec_hash;
  std::uint64_t seed = 0;
  std::string version;
};

class VerificationReport {
 public:
  Provenance provenance;
  std::string verdict;

  void add(CheckRecord record);
  void append(const VerificationReport& other);
  const std::vector<CheckRecord>& checks() const noexcept { return checks_; }
  const CheckRecord* find(const std::string& name) const;
  bool all_pass() const;

 private:
  std::vector<CheckRecord> checks_;
};

std::string library_version();

// 64-bit FNV-1a, lower-case hex.
std::string fnv1a_hex(const std::string& bytes);

// Deterministic JSON of provenance, checks and verdict (no timings).
std::string report_payload_json(const VerificationReport& report);
// Payload plus a "timing" block.
std::string report_json(const VerificationReport& report);
std::string payload_hash(const VerificationReport& report);
std::string summary_table(const VerificationReport& report);

void save_report(const VerificationReport& report, const std::string& path);
VerificationReport load_report(const std::string& path);

}  // namespace carnot
