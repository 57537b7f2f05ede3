// ensmc: ensemble MCMC for fast/slow targets -- command-line driver.
//
// Subcommands: gen-data, run, plot, compare.  Exit codes: 0 success,
// 2 configuration error, 3 runtime error.

#include <CLI11.hpp>

#include <cstdint>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "ensmc/config.hpp"
#include "ensmc/datagen.hpp"
#include "ensmc/errors.hpp"
#include "ensmc/gpmodel.hpp"
#include "ensmc/runner.hpp"
#include "ensmc/svgplot.hpp"
#include "ensmc/trace.hpp"

namespace {

constexpr int kExitConfig = 2;
constexpr int kExitRuntime = 3;

std::uint64_t fnv1a64(const std::string& bytes) {
  std::uint64_t h = 0xcbf29ce484222325ull;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ull;
  }
  return h;
}

std::string file_checksum(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ensmc::IoError("cannot open '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx",
                static_cast<unsigned long long>(fnv1a64(ss.str())));
  return buf;
}

// Option values are carried as strings and parsed by RunConfig::from_kv, so
// config files and flags share one code path ("key = value" keys == flag
// names without the leading dashes).
struct RunFlagSet {
  std::vector<std::pair<std::string, CLI::Option*>> opts;
  std::map<std::string, std::string> values;

  void add(CLI::App* cmd, const std::string& key, const std::string& desc) {
    CLI::Option* o = cmd->add_option("--" + key, values[key], desc);
    opts.emplace_back(key, o);
  }
  void append_given(ensmc::KvPairs& kv) const {
    for (const auto& [key, opt] : opts)
      if (opt->count() > 0) kv.emplace_back(key, values.at(key));
  }
};

void add_run_flags(CLI::App* cmd, RunFlagSet& f) {
  f.add(cmd, "data", "dataset csv (columns z1..zp,y)");
  f.add(cmd, "algo",
        "joint-rwm | single-rwm | extra-fast | random-grid | ensemble-chol | ensemble-eig");
  f.add(cmd, "path", "likelihood factorization: chol | eig (default per algo)");
  f.add(cmd, "measure", "ensemble base measure: independent | exchangeable | grid | chain");
  f.add(cmd, "K", "ensemble size (grid on a 2-D fast space needs a square K)");
  f.add(cmd, "budget", "slow-evaluation budget");
  f.add(cmd, "thin-records", "number of trace rows (recorded at budget/thin-records slow evals)");
  f.add(cmd, "seed", "rng seed");
  f.add(cmd, "stream", "rng stream id");
  f.add(cmd, "center", "center responses at load time (true|false)");
  f.add(cmd, "s", "joint-rwm proposal sd");
  f.add(cmd, "sd-nu", "proposal sd for each log nu");
  f.add(cmd, "sd-psi", "proposal sd for log psi (Cholesky path)");
  f.add(cmd, "sd-eta", "proposal sd for log eta");
  f.add(cmd, "sd-sigma", "proposal sd for log sigma (eigen path)");
  f.add(cmd, "extra", "extra fast-variable updates per iteration (extra-fast)");
  f.add(cmd, "drag-count", "random-grid proposals per displacement");
  f.add(cmd, "grid-step-sd", "random-grid displacement sd per slow coordinate");
  f.add(cmd, "exch-spread-factor", "exchangeable spread as a fraction of the prior sd");
  f.add(cmd, "grid-extent-lo", "grid half-extent lower factor (x prior sd)");
  f.add(cmd, "grid-extent-hi", "grid half-extent upper factor (x prior sd)");
  f.add(cmd, "chain-step-factor", "chain step as a fraction of the prior sd (0 = 1/sqrt(K))");
  f.add(cmd, "regen-every", "sweeps per ensemble before collapsing and regrowing");
  f.add(cmd, "shifted", "use shifted-fast ensemble proposals (true|false)");
  f.add(cmd, "shift-sd-factor", "shifted-fast offset sd as a fraction of the prior sd");
  f.add(cmd, "mode-threshold", "log sigma threshold separating the modes");
  f.add(cmd, "a", "constant covariance term");
  f.add(cmd, "r", "jitter added to the Upsilon diagonal");
}

ensmc::RunConfig config_from(const std::string& config_path, const RunFlagSet& flags) {
  ensmc::KvPairs kv;
  if (!config_path.empty()) kv = ensmc::parse_kv_file(config_path);
  flags.append_given(kv);
  ensmc::RunConfig cfg = ensmc::RunConfig::from_kv(kv);
  cfg.validate();
  return cfg;
}

int cmd_gen_data(const std::string& preset, std::optional<int> n, std::optional<int> p,
                 std::optional<double> noise_sd, std::uint64_t seed, const std::string& out) {
  ensmc::datagen::DataGenSpec spec;
  if (preset == "paper" || preset.empty()) {
    spec = ensmc::datagen::DataGenSpec::paper(seed);
  } else {
    throw ensmc::ConfigError("unknown preset '" + preset + "'");
  }
  if (n) spec.n = *n;
  if (p) spec.p = *p;
  if (noise_sd) spec.noise_sd = *noise_sd;
  spec.seed = seed;
  spec.validate();

  const ensmc::gp::GpDataset data = ensmc::datagen::generate(spec, /*center=*/true);
  data.write_csv(out);
  std::cout << "wrote " << out << " (n=" << data.n() << ", p=" << data.p() << ")\n"
            << "seed = " << seed << "\n"
            << "checksum = " << file_checksum(out) << "\n";
  return 0;
}

int cmd_run(const std::string& config_path, const RunFlagSet& flags, const std::string& out_trace,
            const std::string& out_summary, bool timings) {
  const ensmc::RunConfig cfg = config_from(config_path, flags);
  ensmc::RunOutput out = ensmc::execute_run(cfg);
  if (!out_trace.empty()) ensmc::write_trace_csv(out.trace, out_trace);
  if (!out_summary.empty()) {
    std::ofstream f(out_summary, std::ios::binary);
    if (!f) throw ensmc::IoError("cannot open '" + out_summary + "' for writing");
    f << ensmc::summary_to_text(out.summary, timings);
  }
  std::cout << ensmc::summary_to_text(out.summary, timings);
  return 0;
}

int cmd_plot(const std::string& trace_path, const std::string& out) {
  const ensmc::Trace trace = ensmc::read_trace_csv(trace_path);
  ensmc::write_trace_svg(trace, out);
  std::cout << "wrote " << out << " (" << trace.size() << " records)\n";
  return 0;
}

int cmd_compare(const std::vector<std::string>& run_specs, const std::string& base_config,
                const RunFlagSet& flags, int jobs, const std::string& out_text,
                const std::string& out_csv, bool timings) {
  std::vector<ensmc::RunConfig> configs;
  for (const std::string& spec : run_specs) {
    ensmc::KvPairs kv;
    if (!base_config.empty()) kv = ensmc::parse_kv_file(base_config);
    flags.append_given(kv);
    if (spec.find('=') == std::string::npos) {
      const ensmc::KvPairs file_kv = ensmc::parse_kv_file(spec);
      kv.insert(kv.end(), file_kv.begin(), file_kv.end());
    } else {
      std::stringstream ss(spec);
      std::string item;
      while (std::getline(ss, item, ',')) {
        const std::size_t eq = item.find('=');
        if (eq == std::string::npos)
          throw ensmc::ConfigError("compare: bad --run item '" + item + "'");
        kv.emplace_back(item.substr(0, eq), item.substr(eq + 1));
      }
    }
    ensmc::RunConfig cfg = ensmc::RunConfig::from_kv(kv);
    cfg.validate();
    configs.push_back(std::move(cfg));
  }

  const std::vector<ensmc::CompareRow> rows = ensmc::run_compare(configs, jobs);
  const std::string text = ensmc::compare_text(rows, timings);
  std::cout << text;
  if (!out_text.empty()) {
    std::ofstream f(out_text, std::ios::binary);
    if (!f) throw ensmc::IoError("cannot open '" + out_text + "' for writing");
    f << text;
  }
  if (!out_csv.empty()) {
    std::ofstream f(out_csv, std::ios::binary);
    if (!f) throw ensmc::IoError("cannot open '" + out_csv + "' for writing");
    f << ensmc::compare_csv(rows, timings);
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"ensemble MCMC for targets with fast and slow variables"};
  app.require_subcommand(1);

  // gen-data
  auto* gen = app.add_subcommand("gen-data", "generate the synthetic regression dataset");
  std::string preset = "paper";
  std::optional<int> gen_n, gen_p;
  std::optional<double> gen_noise;
  std::uint64_t gen_seed = 1;
  std::string gen_out = "dataset.csv";
  gen->add_option("--preset", preset, "dataset preset (paper: n=100, p=12, noise sd 0.4)");
  gen->add_option("--n", gen_n, "number of observations");
  gen->add_option("--p", gen_p, "number of covariates (the generator defines p=12)");
  gen->add_option("--noise-sd", gen_noise, "response noise standard deviation");
  gen->add_option("--seed", gen_seed, "rng seed");
  gen->add_option("--out", gen_out, "output csv path")->required();

  // run
  auto* run = app.add_subcommand("run", "run one sampling chain");
  std::string run_config, out_trace = "trace.csv", out_summary;
  bool run_timings = false;
  run->add_option("--config", run_config, "key = value config file (flags override)");
  run->add_option("--out-trace", out_trace, "trace csv output path");
  run->add_option("--out-summary", out_summary, "summary output path");
  run->add_flag("--timings", run_timings, "include wall-clock fields (not byte-reproducible)");
  RunFlagSet run_flags;
  add_run_flags(run, run_flags);

  // plot
  auto* plot = app.add_subcommand("plot", "render a trace csv as an svg");
  std::string plot_trace, plot_out = "trace.svg";
  plot->add_option("--trace", plot_trace, "trace csv path")->required();
  plot->add_option("--out", plot_out, "svg output path");

  // compare
  auto* cmp = app.add_subcommand("compare", "run several configs and tabulate diagnostics");
  std::vector<std::string> cmp_runs;
  std::string cmp_config, cmp_out, cmp_out_csv;
  int cmp_jobs = 0;
  bool cmp_timings = false;
  cmp->add_option("--run", cmp_runs,
                  "run spec: config file path or inline key=value,key=value (repeatable)")
      ->required();
  cmp->add_option("--config", cmp_config, "base config applied to every run");
  cmp->add_option("--jobs", cmp_jobs, "parallel runs (0 = hardware concurrency)");
  cmp->add_option("--out", cmp_out, "plain-text report path");
  cmp->add_option("--out-csv", cmp_out_csv, "csv report path");
  cmp->add_flag("--timings", cmp_timings, "include wall-clock columns");
  RunFlagSet cmp_flags;
  add_run_flags(cmp, cmp_flags);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitConfig;
  }

  try {
    if (gen->parsed()) return cmd_gen_data(preset, gen_n, gen_p, gen_noise, gen_seed, gen_out);
    if (run->parsed()) return cmd_run(run_config, run_flags, out_trace, out_summary, run_timings);
    if (plot->parsed()) return cmd_plot(plot_trace, plot_out);
    if (cmp->parsed())
      return cmd_compare(cmp_runs, cmp_config, cmp_flags, cmp_jobs, cmp_out, cmp_out_csv,
                         cmp_timings);
  } catch (const ensmc::ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const ensmc::UnsupportedP& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitRuntime;
  }
  return 0;
}
