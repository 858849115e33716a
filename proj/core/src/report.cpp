#include "carnot/report.hpp"

#include "carnot/error.hpp"

#include <json.hpp>

#include <cmath>
#include <cstdio>
#include <fstream>
#include <iomanip>
#include <sstream>

namespace carnot {

using nlohmann::ordered_json;

void VerificationReport::add(CheckRecord record) { checks_.push_back(std::move(record)); }

void VerificationReport::append(const VerificationReport& other) {
  for (const auto& r : other.checks_) checks_.push_back(r);
}

const CheckRecord* VerificationReport::find(const std::string& name) const {
  for (const auto& r : checks_)
    if (r.name == name) return &r;
  return nullptr;
}

bool VerificationReport::all_pass() const {
  for (const auto& r : checks_)
    if (!r.pass) return false;
  return true;
}

std::string library_version() { return CARNOT_VERSION; }

std::string fnv1a_hex(const std::string& bytes) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

namespace {

ordered_json number(double v) {
  if (std::isfinite(v)) return v;
  return nullptr;
}

ordered_json payload(const VerificationReport& r) {
  ordered_json j;
  j["provenance"] = {{"scenario", r.provenance.scenario},
                     {"spec_hash", r.provenance.spec_hash},
                     {"seed", r.provenance.seed},
                     {"version", r.provenance.version}};
  ordered_json checks = ordered_json::array();
  for (const auto& c : r.checks()) {
    checks.push_back({{"name", c.name},
                      {"pass", c.pass},
                      {"measured", number(c.measured)},
                      {"tolerance", number(c.tolerance)},
                      {"resolution", c.resolution},
                      {"detail", c.detail}});
  }
  j["checks"] = std::move(checks);
  j["verdict"] = r.verdict;
  return j;
}

double as_double(const ordered_json& v) {
  return v.is_number() ? v.get<double>() : std::numeric_limits<double>::quiet_NaN();
}

}  // namespace

std::string report_payload_json(const VerificationReport& report) { return payload(report).dump(2); }

std::string report_json(const VerificationReport& report) {
  ordered_json j;
  j["payload"] = payload(report);
  j["payload_hash"] = payload_hash(report);
  ordered_json timing = ordered_json::object();
  for (const auto& c : report.checks()) timing[c.name] = c.runtime_s;
  j["timing"] = std::move(timing);
  return j.dump(2);
}

std::string payload_hash(const VerificationReport& report) { return fnv1a_hex(report_payload_json(report)); }

std::string summary_table(const VerificationReport& report) {
  std::size_t w = 5;
  for (const auto& c : report.checks()) w = std::max(w, c.name.size());
  std::ostringstream os;
  os << std::left << std::setw(static_cast<int>(w)) << "check" << "  result  " << std::setw(14) << "measured"
     << std::setw(14) << "tolerance" << "detail\n";
  for (const auto& c : report.checks()) {
    os << std::left << std::setw(static_cast<int>(w)) << c.name << "  " << std::setw(6) << (c.pass ? "pass" : "FAIL")
       << "  " << std::setw(14) << std::setprecision(6) << c.measured << std::setw(14) << c.tolerance << c.detail
       << "\n";
  }
  os << "verdict: " << report.verdict << "\n";
  return os.str();
}

void save_report(const VerificationReport& report, const std::string& path) {
  std::ofstream out(path);
  if (!out) fail(ErrorCode::IoError, "cannot write " + path);
  out << report_json(report) << "\n";
}

VerificationReport load_report(const std::string& path) {
  std::ifstream in(path);
  if (!in) fail(ErrorCode::IoError, "cannot open " + path);
  ordered_json j;
  try {
    in >> j;
  } catch (const std::exception& e) {
    fail(ErrorCode::IoError, path + ": " + e.what());
  }
  const ordered_json& p = j.contains("payload") ? j["payload"] : j;
  VerificationReport r;
  try {
    const auto& prov = p.at("provenance");
    r.provenance.scenario = prov.value("scenario", "");
    r.provenance.spec_hash = prov.value("spec_hash", "");
    r.provenance.seed = prov.value("seed", std::uint64_t{0});
    r.provenance.version = prov.value("version", "");
    r.verdict = p.value("verdict", "");
    for (const auto& c : p.at("checks")) {
      CheckRecord rec;
      rec.name = c.at("name").get<std::string>();
      rec.pass = c.at("pass").get<bool>();
      rec.measured = as_double(c.at("measured"));
      rec.tolerance = as_double(c.at("tolerance"));
      rec.resolution = c.value("resolution", "");
      rec.detail = c.value("detail", "");
      if (j.contains("timing") && j["timing"].contains(rec.name)) rec.runtime_s = j["timing"][rec.name].get<double>();
      r.add(std::move(rec));
    }
  } catch (const nlohmann::json::exception& e) {
    fail(ErrorCode::IoError, path + ": " + e.what());
  }
  return r;
}

}  // namespace carnot
