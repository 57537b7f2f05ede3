#pragma once

#include <memory>
#include <string>
#include <vector>

#include "ensmc/config.hpp"
#include "ensmc/diagnostics.hpp"
#include "ensmc/gpmodel.hpp"
#include "ensmc/samplers.hpp"

namespace ensmc {

// Target + measure + kernel settings realized from a RunConfig.
struct GpRunSetup {
  std::shared_ptr<const gp::GpDataset> data;
  std::shared_ptr<FastSlowTarget> target;
  std::shared_ptr<const EnsembleMeasure> measure;  // null for non-ensemble kinds
  KernelConfig kernel;
  FastSlowPoint init;  // prior means unless overridden
};

GpRunSetup build_gp_setup(const RunConfig& cfg, std::shared_ptr<const gp::GpDataset> data);

struct RunSummary {
  TraceStats stats;          // trace-derivable core
  std::uint64_t iterations = 0;
  double slow_work = 0.0;
  double fast_work = 0.0;
  std::vector<GroupTally> groups;
  long clamped_eigenvalues = -1;  // -1: not an eigen-path run
  double wall_seconds = 0.0;      // serialized only with timings enabled
  KvPairs config_echo;
};

RunSummary summarize_run(const RunConfig& cfg, const RunResult& result, double wall_seconds,
                         long clamped_eigenvalues);

// Flat key=value text: the config echo verbatim, then "result." keys.
// Deterministic unless with_timings (wall-clock fields) is requested.
std::string summary_to_text(const RunSummary& summary, bool with_timings);

struct RunOutput {
  Trace trace;
  RunSummary summary;
};

// Loads the dataset, realizes the setup, runs the chain.
RunOutput execute_run(const RunConfig& cfg);
RunOutput execute_run(const RunConfig& cfg, std::shared_ptr<const gp::GpDataset> data);

// ---- comparison reports -------------------------------------------------------

struct CompareRow {
  std::string label;
  RunSummary summary;
};

// Executes each config (independent chains, up to jobs in parallel) and
// collects summaries.  Results are ordered and deterministic regardless of
// scheduling.
std::vector<CompareRow> run_compare(const std::vector<RunConfig>& configs, int jobs);

std::string compare_text(const std::vector<CompareRow>& rows, bool with_timings);
std::string compare_csv(const std::vector<CompareRow>& rows, bool with_timings);

}  // namespace ensmc
