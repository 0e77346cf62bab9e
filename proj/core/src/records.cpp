#include "pacgibbs/records.hpp"

#include <fstream>
#include <limits>

#include "json.hpp"

namespace pacgibbs {

using nlohmann::json;

std::string serialize_record(const RunRecord& r) {
  json j;
  j["schema_version"] = r.schema_version;
  j["seed"] = r.seed;
  j["config_digest"] = r.config_digest;
  j["run_index"] = r.run_index;
  j["repetition"] = r.repetition;
  j["family"] = r.family;
  j["mu_family"] = r.mu_family;
  j["alpha"] = r.alpha;
  j["alpha_index"] = r.alpha_index;
  j["alpha_prime"] = r.alpha_prime;
  j["beta"] = r.beta ? json(*r.beta) : json(nullptr);
  j["ratio"] = r.ratio;
  j["m"] = r.m;
  j["m_prime"] = r.m_prime;
  j["emp_risk"] = r.emp_risk;
  j["test_risk"] = r.test_risk;
  j["mu_post"] = r.mu_post;
  j["mu_prior"] = r.mu_prior;
  j["omega_post"] = r.omega_post;
  j["omega_prior"] = r.omega_prior;
  j["tau"] = r.tau;
  j["tau_clamped"] = r.tau_clamped;
  j["risk_upper"] = r.risk_upper;
  j["status"] = r.status;
  j["error"] = r.error;
  j["wall_time_ms"] = r.wall_time_ms;
  return j.dump();
}

namespace {

template <class T>
T field(const json& j, const char* key, std::size_t line) {
  const auto it = j.find(key);
  if (it == j.end()) throw RecordFormatError(line, std::string("missing field '") + key + "'");
  try {
    return it->get<T>();
  } catch (const json::exception&) {
    throw RecordFormatError(line, std::string("field '") + key + "' has the wrong type");
  }
}

// Non-finite doubles serialize as null; read them back as NaN.
double number(const json& j, const char* key, std::size_t line) {
  const auto it = j.find(key);
  if (it == j.end()) throw RecordFormatError(line, std::string("missing field '") + key + "'");
  if (it->is_null()) return std::numeric_limits<double>::quiet_NaN();
  if (!it->is_number()) throw RecordFormatError(line, std::string("field '") + key + "' is not a number");
  return it->get<double>();
}

}  // namespace

RunRecord parse_record(const std::string& line, std::size_t n) {
  json j;
  try {
    j = json::parse(line);
  } catch (const json::parse_error& ex) {
    throw RecordFormatError(n, std::string("malformed record: ") + ex.what());
  }
  if (!j.is_object()) throw RecordFormatError(n, "record is not a JSON object");
  RunRecord r;
  r.schema_version = field<int>(j, "schema_version", n);
  if (r.schema_version != kRecordSchemaVersion) {
    throw RecordFormatError(n, "schema_version " + std::to_string(r.schema_version) + " (expected " +
                                   std::to_string(kRecordSchemaVersion) + ")");
  }
  r.seed = field<std::uint64_t>(j, "seed", n);
  r.config_digest = field<std::string>(j, "config_digest", n);
  r.run_index = field<std::uint64_t>(j, "run_index", n);
  r.repetition = field<std::uint64_t>(j, "repetition", n);
  r.family = field<std::string>(j, "family", n);
  r.mu_family = field<std::string>(j, "mu_family", n);
  r.alpha = number(j, "alpha", n);
  r.alpha_index = field<std::uint64_t>(j, "alpha_index", n);
  r.alpha_prime = number(j, "alpha_prime", n);
  if (!j.contains("beta")) throw RecordFormatError(n, "missing field 'beta'");
  if (!j["beta"].is_null()) r.beta = number(j, "beta", n);
  r.ratio = number(j, "ratio", n);
  r.m = field<std::uint64_t>(j, "m", n);
  r.m_prime = field<std::uint64_t>(j, "m_prime", n);
  r.emp_risk = number(j, "emp_risk", n);
  r.test_risk = number(j, "test_risk", n);
  r.mu_post = number(j, "mu_post", n);
  r.mu_prior = number(j, "mu_prior", n);
  r.omega_post = number(j, "omega_post", n);
  r.omega_prior = number(j, "omega_prior", n);
  r.tau = number(j, "tau", n);
  r.tau_clamped = field<bool>(j, "tau_clamped", n);
  r.risk_upper = number(j, "risk_upper", n);
  r.status = field<std::string>(j, "status", n);
  r.error = field<std::string>(j, "error", n);
  r.wall_time_ms = number(j, "wall_time_ms", n);
  return r;
}

void persist_records(const std::vector<RunRecord>& records, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot write records to " + path.string());
  for (const auto& r : records) out << serialize_record(r) << '\n';
  if (!out) throw std::runtime_error("write failed for " + path.string());
}

std::vector<RunRecord> load_records(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot read records from " + path.string());
  std::vector<RunRecord> out;
  std::string line;
  std::size_t n = 0;
  while (std::getline(in, line)) {
    ++n;
    if (line.empty()) continue;
    out.push_back(parse_record(line, n));
  }
  return out;
}

}  // namespace pacgibbs
