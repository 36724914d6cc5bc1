#pragma once

#include "lrt/dataset.hpp"
#include "lrt/rpca.hpp"
#include "lrt/transform_learning.hpp"

#include <filesystem>
#include <string>

namespace lrt {

enum class LearnerKind { None, Global, PerClass };
enum class ClassifierKind { Nn, LrtNn, LrtOmp, ClassLrtNn, ClassLrtOmp };

/// Everything one experiment run needs, loadable from a plain key = value
/// config document with [section] headers (see docs/ and tests for the
/// grammar). One top-level seed feeds every random substream.
struct ExperimentConfig {
  enum class Source { Synthetic, Images, Cache };

  Source source = Source::Synthetic;
  DatasetSpec dataset;
  SyntheticSpec synthetic;
  std::filesystem::path cache_file;
  SplitSpec split;

  LearnerKind learner = LearnerKind::None;
  LearnConfig learn;
  RpcaConfig rpca;
  ClassifierKind classifier = ClassifierKind::Nn;
  int s_max = 10;

  std::filesystem::path output_dir = "out";
  bool write_json = true;
  bool write_csv = true;
  bool save_artifacts = true;
  std::uint64_t seed = 0;

  /// Cross-field consistency (classifier vs learner kind, split presence...).
  void validate() const;
};

ExperimentConfig parse_config_text(const std::string& text);
ExperimentConfig load_config(const std::filesystem::path& file);

/// Canonical text form; parse_config_text(config_to_string(c)) == c, and the
/// string is byte-stable for identical configs.
std::string config_to_string(const ExperimentConfig& cfg);

std::string to_string(LearnerKind kind);
std::string to_string(ClassifierKind kind);

/// Table-style method name, e.g. "Global LRT+OMP" or "Original+NN".
std::string method_name(const ExperimentConfig& cfg);

}  // namespace lrt
