#include "ensmc/runner.hpp"

#include <charconv>
#include <chrono>
#include <cmath>
#include <future>
#include <thread>

#include "ensmc/errors.hpp"

namespace ensmc {

namespace {

std::string fmt_double(double v) {
  char buf[32];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, ptr);
}

KernelKind kernel_kind(const std::string& algo) {
  if (algo == "joint-rwm") return KernelKind::kJointRwm;
  if (algo == "single-rwm") return KernelKind::kSingleVarRwm;
  if (algo == "extra-fast") return KernelKind::kExtraFastRwm;
  if (algo == "random-grid") return KernelKind::kRandomGrid;
  if (algo == "ensemble-chol") return KernelKind::kEnsembleChol;
  if (algo == "ensemble-eig") return KernelKind::kEnsembleEig;
  throw ConfigError("unknown algo '" + algo + "'");
}

MeasureKind measure_kind(const std::string& measure) {
  if (measure == "independent") return MeasureKind::kIndependent;
  if (measure == "exchangeable") return MeasureKind::kExchangeable;
  if (measure == "grid") return MeasureKind::kGrid;
  if (measure == "chain") return MeasureKind::kChain;
  throw ConfigError("unknown measure '" + measure + "'");
}

}  // namespace

GpRunSetup build_gp_setup(const RunConfig& cfg, std::shared_ptr<const gp::GpDataset> data) {
  cfg.validate();
  gp::GpModelSpec spec = gp::GpModelSpec::paper();
  spec.a = cfg.a;
  spec.r = cfg.r;
  spec.validate();

  GpRunSetup setup;
  setup.data = data;
  const int p = data->p();
  const bool chol_path = cfg.resolved_path() == "chol";

  std::shared_ptr<gp::GpCholTarget> chol;
  std::shared_ptr<gp::GpEigTarget> eig;
  if (chol_path) {
    chol = std::make_shared<gp::GpCholTarget>(spec, data);
    setup.target = chol;
  } else {
    eig = std::make_shared<gp::GpEigTarget>(spec, data);
    setup.target = eig;
  }

  // chains start at the prior means of the log parameters
  gp::GpHyperParams init_params;
  init_params.log_eta = spec.prior_log_eta.mean;
  init_params.log_sigma = spec.prior_log_sigma.mean;
  init_params.log_nu.assign(p, spec.prior_log_nu_mean);
  setup.init = chol_path ? chol->point_from_params(init_params)
                         : eig->point_from_params(init_params);

  // fast-space prior marginals, per path
  std::vector<double> fast_means, fast_sds;
  if (chol_path) {
    fast_means = {spec.prior_log_eta.mean};
    fast_sds = {spec.prior_log_eta.sd};
  } else {
    fast_means = {spec.prior_log_eta.mean, spec.prior_log_sigma.mean};
    fast_sds = {spec.prior_log_eta.sd, spec.prior_log_sigma.sd};
  }

  KernelConfig k;
  k.kind = kernel_kind(cfg.algo);
  k.joint_sd = cfg.s;
  k.extra_fast_count = cfg.extra;
  k.grid_drag_count = cfg.drag_count;
  k.ensemble_size = cfg.K;
  k.measure = measure_kind(cfg.measure);
  k.regen_every = cfg.regen_every;
  k.shifted_fast = cfg.shifted;

  k.slow_sds.assign(p, cfg.sd_nu);
  if (chol_path) {
    k.slow_sds.push_back(cfg.sd_psi);
    k.fast_sds = {cfg.sd_eta};
  } else {
    k.fast_sds = {cfg.sd_eta, cfg.sd_sigma};
  }
  k.grid_slow_step_sds.assign(setup.target->slow_dim(), cfg.grid_step_sd);
  if (cfg.shifted)
    for (double sd : fast_sds) k.shift_sds.push_back(cfg.shift_sd_factor * sd);

  const bool is_ensemble =
      k.kind == KernelKind::kEnsembleChol || k.kind == KernelKind::kEnsembleEig;
  if (is_ensemble) {
    const int d_fast = setup.target->fast_dim();
    switch (k.measure) {
      case MeasureKind::kIndependent: {
        setup.measure = std::make_shared<IndependentMeasure>(
            cfg.K, std::make_shared<DiagGaussian>(fast_means, fast_sds));
        break;
      }
      case MeasureKind::kExchangeable: {
        std::vector<double> spreads;
        for (double sd : fast_sds) spreads.push_back(cfg.exch_spread_factor * sd);
        setup.measure = std::make_shared<ExchangeableMeasure>(cfg.K, spreads);
        break;
      }
      case MeasureKind::kGrid: {
        std::vector<int> counts;
        if (d_fast == 1) {
          counts = {cfg.K};
        } else {
          const int m = static_cast<int>(std::lround(std::sqrt(static_cast<double>(cfg.K))));
          if (m * m != cfg.K)
            throw ConfigError("grid measure on a 2-D fast space needs a square K");
          counts = {m, m};
        }
        // realized half-extent per dimension is uniform on
        // [grid_extent_lo, grid_extent_hi] times the prior sd
        std::vector<double> spacings;
        for (int j = 0; j < d_fast; ++j)
          spacings.push_back(2.0 * fast_sds[j] / (counts[j] > 1 ? counts[j] - 1 : 1));
        setup.measure = std::make_shared<GridMeasure>(counts, spacings, cfg.grid_extent_lo,
                                                      cfg.grid_extent_hi);
        break;
      }
      case MeasureKind::kChain: {
        if (d_fast != 1)
          throw ConfigError("chain measure requires a scalar fast space (Cholesky path)");
        const double factor =
            cfg.chain_step_factor > 0.0 ? cfg.chain_step_factor : 1.0 / std::sqrt(cfg.K);
        setup.measure = std::make_shared<ChainMeasure>(cfg.K, factor * fast_sds[0]);
        break;
      }
    }
  }
  setup.kernel = k;
  return setup;
}

RunSummary summarize_run(const RunConfig& cfg, const RunResult& result, double wall_seconds,
                         long clamped_eigenvalues) {
  RunSummary s;
  s.stats = trace_stats(result.trace, cfg.mode_threshold);
  s.iterations = result.iterations;
  s.slow_work = result.counters.slow_work;
  s.fast_work = result.counters.fast_work;
  s.groups = result.tally.groups;
  s.clamped_eigenvalues = clamped_eigenvalues;
  s.wall_seconds = wall_seconds;
  s.config_echo = cfg.to_kv();
  return s;
}

std::string summary_to_text(const RunSummary& summary, bool with_timings) {
  std::string out = "# ensmc run summary\n";
  out += kv_to_text(summary.config_echo);
  KvPairs res;
  res.emplace_back("result.iterations", std::to_string(summary.iterations));
  res.emplace_back("result.records", std::to_string(summary.stats.records));
  res.emplace_back("result.slow_evals", std::to_string(summary.stats.slow_evals));
  res.emplace_back("result.fast_evals", std::to_string(summary.stats.fast_evals));
  res.emplace_back("result.slow_work", fmt_double(summary.slow_work));
  res.emplace_back("result.fast_work", fmt_double(summary.fast_work));
  res.emplace_back("result.acc_slow", fmt_double(summary.stats.acc_slow));
  res.emplace_back("result.acc_fast", fmt_double(summary.stats.acc_fast));
  res.emplace_back("result.mode_switches", std::to_string(summary.stats.mode_switches));
  res.emplace_back("result.ess_log_sigma", fmt_double(summary.stats.ess_log_sigma));
  for (const GroupTally& g : summary.groups)
    res.emplace_back("result.reject." + g.name, fmt_double(g.rejection_rate()));
  if (summary.clamped_eigenvalues >= 0)
    res.emplace_back("result.clamped_eigenvalues", std::to_string(summary.clamped_eigenvalues));
  if (with_timings) {
    res.emplace_back("result.wall_seconds", fmt_double(summary.wall_seconds));
    if (summary.stats.slow_evals > 0)
      res.emplace_back("result.wall_per_slow_eval",
                       fmt_double(summary.wall_seconds / summary.stats.slow_evals));
  }
  out += kv_to_text(res);
  return out;
}

RunOutput execute_run(const RunConfig& cfg) {
  if (cfg.data.empty()) throw ConfigError("config: 'data' (dataset csv) is required");
  auto data = std::make_shared<const gp::GpDataset>(gp::GpDataset::from_csv(cfg.data, cfg.center));
  return execute_run(cfg, std::move(data));
}

RunOutput execute_run(const RunConfig& cfg, std::shared_ptr<const gp::GpDataset> data) {
  GpRunSetup setup = build_gp_setup(cfg, std::move(data));
  std::unique_ptr<Kernel> kernel = make_kernel(*setup.target, setup.kernel, setup.measure);
  RngStream rng(cfg.seed, cfg.stream);
  const std::uint64_t thin =
      std::max<std::uint64_t>(1, cfg.budget / static_cast<std::uint64_t>(cfg.thin_records));

  const auto t0 = std::chrono::steady_clock::now();
  RunResult result = run_chain(*setup.target, *kernel, setup.init, cfg.budget, thin, rng);
  const double wall = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();

  long clamped = -1;
  if (const auto* eig = dynamic_cast<const gp::GpEigTarget*>(setup.target.get()))
    clamped = eig->clamp_events();

  RunOutput out;
  out.summary = summarize_run(cfg, result, wall, clamped);
  out.trace = std::move(result.trace);
  return out;
}

std::vector<CompareRow> run_compare(const std::vector<RunConfig>& configs, int jobs) {
  if (configs.size() < 2) throw ConfigError("compare: need at least 2 run configs");
  if (jobs < 1) jobs = static_cast<int>(std::thread::hardware_concurrency());
  if (jobs < 1) jobs = 1;

  std::vector<CompareRow> rows(configs.size());
  std::atomic<std::size_t> next{0};
  auto worker = [&]() {
    while (true) {
      const std::size_t i = next.fetch_add(1);
      if (i >= configs.size()) return;
      RunOutput out = execute_run(configs[i]);
      rows[i].label = configs[i].algo + (configs[i].algo.rfind("ensemble", 0) == 0
                                             ? "/" + configs[i].measure
                                             : "");
      rows[i].summary = std::move(out.summary);
    }
  };
  std::vector<std::thread> pool;
  for (int t = 0; t < std::min<int>(jobs, static_cast<int>(configs.size())); ++t)
    pool.emplace_back(worker);
  for (auto& t : pool) t.join();
  return rows;
}

namespace {

std::string pad(std::string s, std::size_t w) {
  if (s.size() < w) s.append(w - s.size(), ' ');
  return s;
}

std::string fmt3(double v) {
  char buf[32];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v, std::chars_format::fixed, 3);
  return std::string(buf, ptr);
}

}  // namespace

std::string compare_text(const std::vector<CompareRow>& rows, bool with_timings) {
  std::string out = pad("run", 26) + pad("rej_slow", 10) + pad("rej_fast", 10) +
                    pad("slow_evals", 12) + pad("switches", 10) + pad("ess_lsigma", 12);
  if (with_timings) out += pad("us_per_slow", 12);
  out += "\n";
  for (const CompareRow& r : rows) {
    out += pad(r.label, 26);
    out += pad(fmt3(1.0 - r.summary.stats.acc_slow), 10);
    out += pad(fmt3(1.0 - r.summary.stats.acc_fast), 10);
    out += pad(std::to_string(r.summary.stats.slow_evals), 12);
    out += pad(std::to_string(r.summary.stats.mode_switches), 10);
    out += pad(fmt3(r.summary.stats.ess_log_sigma), 12);
    if (with_timings)
      out += pad(fmt3(1e6 * r.summary.wall_seconds /
                      std::max<std::uint64_t>(1, r.summary.stats.slow_evals)),
                 12);
    out += "\n";
  }
  return out;
}

std::string compare_csv(const std::vector<CompareRow>& rows, bool with_timings) {
  std::string out = "run,rej_slow,rej_fast,slow_evals,fast_evals,mode_switches,ess_log_sigma";
  if (with_timings) out += ",wall_seconds";
  out += "\n";
  for (const CompareRow& r : rows) {
    out += r.label;
    out += ',' + fmt_double(1.0 - r.summary.stats.acc_slow);
    out += ',' + fmt_double(1.0 - r.summary.stats.acc_fast);
    out += ',' + std::to_string(r.summary.stats.slow_evals);
    out += ',' + std::to_string(r.summary.stats.fast_evals);
    out += ',' + std::to_string(r.summary.stats.mode_switches);
    out += ',' + fmt_double(r.summary.stats.ess_log_sigma);
    if (with_timings) out += ',' + fmt_double(r.summary.wall_seconds);
    out += "\n";
  }
  return out;
}

}  // namespace ensmc
