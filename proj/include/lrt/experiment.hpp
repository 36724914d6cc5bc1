#pragma once

#include "lrt/classifier.hpp"
#include "lrt/config.hpp"

#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace lrt {

/// Pipeline failure carrying the stage it happened in (load, split, learn,
/// model, classify, evaluate, report).
struct StageError : std::runtime_error {
  StageError(std::string stage_, const std::string& what)
      : std::runtime_error("[stage:" + stage_ + "] " + what),
        stage(std::move(stage_)) {}
  std::string stage;
};

struct RunReport {
  std::string method;
  std::uint64_t seed = 0;
  std::string config_echo;  // complete config document for exact re-runs
  std::string train_fingerprint;
  std::string test_fingerprint;
  int train_samples = 0;
  int test_samples = 0;
  int classes = 0;
  EvaluationReport eval;
  std::vector<LearnTrace> traces;  // empty, one (global) or one per class
  std::vector<int> rpca_nonconverged;
  double wall_time_ms = 0.0;  // volatile; kept out of the canonical JSON

  /// Canonical, byte-stable JSON (no timing fields).
  std::string to_json() const;
  static RunReport from_json_text(const std::string& text);
};

struct RunOutput {
  RunReport report;
  std::vector<Transform> transforms;  // learned (or identity) transforms
  std::optional<LowRankModel> model;  // when the classifier used RPCA
};

/// Runs load -> split -> learn -> model -> classify -> evaluate in memory.
/// Throws StageError; writes nothing.
RunOutput run_experiment_full(const ExperimentConfig& cfg);
RunReport run_experiment(const ExperimentConfig& cfg);

/// Writes report.json, accuracy.csv, summary.txt and (when configured)
/// learned transform/trace/model containers into the output directory.
/// All writes are atomic (temp + rename). Returns the paths written.
std::vector<std::filesystem::path> write_report(const RunOutput& output,
                                                const ExperimentConfig& cfg);

/// Full pipeline plus artifact writing; returns everything produced.
RunOutput run_and_write(const ExperimentConfig& cfg);

/// Aligned accuracy table, one column per report in input order. Reports
/// with dataset fingerprints differing from the first are flagged.
std::string compare_runs(const std::vector<RunReport>& reports);

}  // namespace lrt
