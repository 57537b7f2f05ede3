#pragma once

#include <cmath>
#include <cstdint>
#include <string>
#include <utility>
#include <vector>

namespace ensmc {

// Flat `key = value` text, '#' comments.  Order-preserving.
using KvPairs = std::vector<std::pair<std::string, std::string>>;

KvPairs parse_kv_text(const std::string& text);
KvPairs parse_kv_file(const std::string& path);
std::string kv_to_text(const KvPairs& kv);

// One sampling run.  Every key is settable from a config file or a CLI flag
// of the same name; unknown keys are hard errors ("result." keys excepted,
// so a summary file can be replayed as a config).
struct RunConfig {
  std::string data;                 // dataset csv
  std::string algo = "single-rwm";  // joint-rwm | single-rwm | extra-fast |
                                    // random-grid | ensemble-chol | ensemble-eig
  std::string path;                 // chol | eig; empty = per-algo default
  std::string measure = "grid";     // independent | exchangeable | grid | chain
  int K = 49;
  std::uint64_t budget = 300000;
  int thin_records = 1000;
  std::uint64_t seed = 1;
  std::uint64_t stream = 0;
  bool center = true;

  double s = 0.25;       // joint-rwm proposal sd
  double sd_nu = 2.0;    // single-variable proposal sds (log scale)
  double sd_psi = 0.6;
  double sd_eta = 0.6;
  double sd_sigma = 0.6;
  int extra = 49;        // extra-fast updates per iteration
  int drag_count = 10;   // random-grid proposals per displacement
  double grid_step_sd = 0.5;  // random-grid displacement sd per slow coordinate

  double exch_spread_factor = 0.4;  // exchangeable spread / prior sd
  double grid_extent_lo = 1.0;      // grid half-extent range / prior sd
  double grid_extent_hi = 1.1;
  double chain_step_factor = 0.0;   // chain step / prior sd; 0 = 1/sqrt(K)
  int regen_every = 1;
  bool shifted = false;
  double shift_sd_factor = 0.4;     // shifted-fast offset sd / prior sd

  double mode_threshold = std::log(0.25);
  double a = 1.0;
  double r = 0.01;

  std::string resolved_path() const;  // per-algo default applied
  static RunConfig from_kv(const KvPairs& kv);
  KvPairs to_kv() const;
  void validate() const;  // throws ConfigError
};

}  // namespace ensmc
