#include "ensmc/config.hpp"

#include <charconv>
#include <fstream>
#include <sstream>

#include "ensmc/errors.hpp"

namespace ensmc {

namespace {

std::string trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string_view::npos) return "";
  const auto last = s.find_last_not_of(" \t\r");
  return std::string(s.substr(first, last - first + 1));
}

double to_double(const std::string& key, const std::string& v) {
  double out = 0.0;
  auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (ec != std::errc() || ptr != v.data() + v.size())
    throw ConfigError("config: bad numeric value for '" + key + "': '" + v + "'");
  return out;
}

std::int64_t to_int(const std::string& key, const std::string& v) {
  std::int64_t out = 0;
  auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (ec != std::errc() || ptr != v.data() + v.size())
    throw ConfigError("config: bad integer value for '" + key + "': '" + v + "'");
  return out;
}

std::uint64_t to_u64(const std::string& key, const std::string& v) {
  std::uint64_t out = 0;
  auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (ec != std::errc() || ptr != v.data() + v.size())
    throw ConfigError("config: bad unsigned value for '" + key + "': '" + v + "'");
  return out;
}

bool to_bool(const std::string& key, const std::string& v) {
  if (v == "true" || v == "1" || v == "yes") return true;
  if (v == "false" || v == "0" || v == "no") return false;
  throw ConfigError("config: bad boolean value for '" + key + "': '" + v + "'");
}

void append_double_kv(KvPairs& kv, const std::string& key, double v) {
  char buf[32];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  kv.emplace_back(key, std::string(buf, ptr));
}

}  // namespace

KvPairs parse_kv_text(const std::string& text) {
  KvPairs kv;
  std::istringstream in(text);
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const std::size_t hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    const std::string stripped = trim(line);
    if (stripped.empty()) continue;
    const std::size_t eq = stripped.find('=');
    if (eq == std::string::npos)
      throw ConfigError("config: line " + std::to_string(lineno) + " is not 'key = value'");
    std::string key = trim(stripped.substr(0, eq));
    std::string value = trim(stripped.substr(eq + 1));
    if (key.empty())
      throw ConfigError("config: empty key on line " + std::to_string(lineno));
    kv.emplace_back(std::move(key), std::move(value));
  }
  return kv;
}

KvPairs parse_kv_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open config '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_kv_text(ss.str());
}

std::string kv_to_text(const KvPairs& kv) {
  std::string out;
  for (const auto& [k, v] : kv) {
    out += k;
    out += " = ";
    out += v;
    out.push_back('\n');
  }
  return out;
}

std::string RunConfig::resolved_path() const {
  if (!path.empty()) return path;
  if (algo == "ensemble-chol") return "chol";
  if (algo == "random-grid") return "chol";
  return "eig";  // the paper's comparisons assume eigenvector computations
}

RunConfig RunConfig::from_kv(const KvPairs& kv) {
  RunConfig c;
  for (const auto& [key, value] : kv) {
    if (key.rfind("result.", 0) == 0) continue;  // summaries replay as configs
    if (key == "data") c.data = value;
    else if (key == "algo") c.algo = value;
    else if (key == "path") c.path = value;
    else if (key == "measure") c.measure = value;
    else if (key == "K") c.K = static_cast<int>(to_int(key, value));
    else if (key == "budget") c.budget = to_u64(key, value);
    else if (key == "thin-records") c.thin_records = static_cast<int>(to_int(key, value));
    else if (key == "seed") c.seed = to_u64(key, value);
    else if (key == "stream") c.stream = to_u64(key, value);
    else if (key == "center") c.center = to_bool(key, value);
    else if (key == "s") c.s = to_double(key, value);
    else if (key == "sd-nu") c.sd_nu = to_double(key, value);
    else if (key == "sd-psi") c.sd_psi = to_double(key, value);
    else if (key == "sd-eta") c.sd_eta = to_double(key, value);
    else if (key == "sd-sigma") c.sd_sigma = to_double(key, value);
    else if (key == "extra") c.extra = static_cast<int>(to_int(key, value));
    else if (key == "drag-count") c.drag_count = static_cast<int>(to_int(key, value));
    else if (key == "grid-step-sd") c.grid_step_sd = to_double(key, value);
    else if (key == "exch-spread-factor") c.exch_spread_factor = to_double(key, value);
    else if (key == "grid-extent-lo") c.grid_extent_lo = to_double(key, value);
    else if (key == "grid-extent-hi") c.grid_extent_hi = to_double(key, value);
    else if (key == "chain-step-factor") c.chain_step_factor = to_double(key, value);
    else if (key == "regen-every") c.regen_every = static_cast<int>(to_int(key, value));
    else if (key == "shifted") c.shifted = to_bool(key, value);
    else if (key == "shift-sd-factor") c.shift_sd_factor = to_double(key, value);
    else if (key == "mode-threshold") c.mode_threshold = to_double(key, value);
    else if (key == "a") c.a = to_double(key, value);
    else if (key == "r") c.r = to_double(key, value);
    else throw ConfigError("config: unknown key '" + key + "'");
  }
  return c;
}

KvPairs RunConfig::to_kv() const {
  KvPairs kv;
  kv.emplace_back("data", data);
  kv.emplace_back("algo", algo);
  kv.emplace_back("path", resolved_path());
  kv.emplace_back("measure", measure);
  kv.emplace_back("K", std::to_string(K));
  kv.emplace_back("budget", std::to_string(budget));
  kv.emplace_back("thin-records", std::to_string(thin_records));
  kv.emplace_back("seed", std::to_string(seed));
  kv.emplace_back("stream", std::to_string(stream));
  kv.emplace_back("center", center ? "true" : "false");
  append_double_kv(kv, "s", s);
  append_double_kv(kv, "sd-nu", sd_nu);
  append_double_kv(kv, "sd-psi", sd_psi);
  append_double_kv(kv, "sd-eta", sd_eta);
  append_double_kv(kv, "sd-sigma", sd_sigma);
  kv.emplace_back("extra", std::to_string(extra));
  kv.emplace_back("drag-count", std::to_string(drag_count));
  append_double_kv(kv, "grid-step-sd", grid_step_sd);
  append_double_kv(kv, "exch-spread-factor", exch_spread_factor);
  append_double_kv(kv, "grid-extent-lo", grid_extent_lo);
  append_double_kv(kv, "grid-extent-hi", grid_extent_hi);
  append_double_kv(kv, "chain-step-factor", chain_step_factor);
  kv.emplace_back("regen-every", std::to_string(regen_every));
  kv.emplace_back("shifted", shifted ? "true" : "false");
  append_double_kv(kv, "shift-sd-factor", shift_sd_factor);
  append_double_kv(kv, "mode-threshold", mode_threshold);
  append_double_kv(kv, "a", a);
  append_double_kv(kv, "r", r);
  return kv;
}

void RunConfig::validate() const {
  const bool known_algo = algo == "joint-rwm" || algo == "single-rwm" || algo == "extra-fast" ||
                          algo == "random-grid" || algo == "ensemble-chol" ||
                          algo == "ensemble-eig";
  if (!known_algo) throw ConfigError("config: unknown algo '" + algo + "'");
  const std::string rp = resolved_path();
  if (rp != "chol" && rp != "eig") throw ConfigError("config: unknown path '" + path + "'");
  if (algo == "ensemble-chol" && rp != "chol")
    throw ConfigError("config: ensemble-chol requires the Cholesky path");
  if (algo == "ensemble-eig" && rp != "eig")
    throw ConfigError("config: ensemble-eig requires the eigendecomposition path");
  if (measure != "independent" && measure != "exchangeable" && measure != "grid" &&
      measure != "chain")
    throw ConfigError("config: unknown measure '" + measure + "'");
  if (budget < 1) throw ConfigError("config: budget must be >= 1");
  if (thin_records < 1) throw ConfigError("config: thin-records must be >= 1");
  if (K < 2) throw ConfigError("config: K must be >= 2");
  if (extra < 0) throw ConfigError("config: extra must be >= 0");
  if (drag_count < 0) throw ConfigError("config: drag-count must be >= 0");
  if (regen_every < 1) throw ConfigError("config: regen-every must be >= 1");
  if (!(s > 0.0) || !(sd_nu > 0.0) || !(sd_psi > 0.0) || !(sd_eta > 0.0) || !(sd_sigma > 0.0))
    throw ConfigError("config: proposal sds must be > 0");
  if (!(grid_step_sd > 0.0)) throw ConfigError("config: grid-step-sd must be > 0");
  if (!(exch_spread_factor > 0.0)) throw ConfigError("config: exch-spread-factor must be > 0");
  if (!(grid_extent_lo > 0.0) || grid_extent_hi < grid_extent_lo)
    throw ConfigError("config: bad grid extent range");
  if (chain_step_factor < 0.0) throw ConfigError("config: chain-step-factor must be >= 0");
  if (shifted && !(shift_sd_factor > 0.0))
    throw ConfigError("config: shift-sd-factor must be > 0 when shifted");
  if (!(a >= 0.0)) throw ConfigError("config: a must be >= 0");
  if (!(r > 0.0)) throw ConfigError("config: r must be > 0");
}

}  // namespace ensmc
