#pragma once

#include "lrt/linalg.hpp"

#include <filesystem>
#include <string>
#include <utility>
#include <vector>

namespace lrt {

/// Column-per-sample dataset. Column k holds sample k, labels(k) its class
/// index in [0, num_classes). Condition tags (lighting, pose, ...) drive
/// protocol splits and may be empty. class_names maps label -> display name.
struct DataMatrix {
  Matrix samples;  // d x K
  std::vector<int> labels;
  std::vector<std::string> conditions;
  std::vector<std::string> class_names;

  Index dim() const { return samples.rows(); }
  Index count() const { return samples.cols(); }
  int num_classes() const;

  /// Columns of class c (Y_i).
  Matrix class_submatrix(int c) const;
  /// Columns of every class except c (Y_not_i).
  Matrix complement(int c) const;
  /// Column indices of class c, in dataset order.
  std::vector<Index> class_columns(int c) const;

  /// Basic shape/label consistency; throws std::invalid_argument on failure.
  void validate() const;

  /// Content hash over samples, labels and conditions (FNV-1a, hex string).
  std::string fingerprint() const;
};

/// Dense grayscale raster with values in [0,1], row-major.
struct Image {
  int width = 0;
  int height = 0;
  std::vector<double> pixels;

  double at(int x, int y) const { return pixels[static_cast<size_t>(y) * width + x]; }
  double& at(int x, int y) { return pixels[static_cast<size_t>(y) * width + x]; }
};

/// PGM (P2/P5) or PNG, decided by the file magic. Color input is reduced to
/// luma with weights 0.299/0.587/0.114.
Image read_image(const std::filesystem::path& file);
Image read_pgm(const std::filesystem::path& file);
Image read_png(const std::filesystem::path& file);

/// Bilinear resampling with half-pixel centers:
///   src_x = (dst_x + 0.5) * width_ratio - 0.5, clamped to the border.
Image resize_bilinear(const Image& src, int width, int height);

/// Column-major flattening: pixel (x, y) lands at index x * height + y.
Vector image_to_column(const Image& img);

/// Mirror around the vertical axis: (x, y) -> (width-1-x, y) on a
/// column-major flattened image.
Vector flip_horizontal(const Vector& column, int width, int height);

struct DatasetSpec {
  std::filesystem::path root;
  int target_width = 20;
  int target_height = 20;

  enum class LabelRule { DirectoryPerClass, FilenamePattern };
  LabelRule label_rule = LabelRule::DirectoryPerClass;
  /// ECMAScript regex applied to the filename stem; capture group 1 is the
  /// class name (FilenamePattern rule only).
  std::string label_pattern;
  /// Optional regex on the stem; capture group 1 is the condition tag.
  /// Without it the condition is the whole stem.
  std::string condition_pattern;
  /// Rescale each column to unit l2 norm after loading.
  bool unit_normalize = false;
};

/// Loads every .pgm/.png under the root (sorted traversal, so column order
/// is stable across platforms), converts to grayscale, resizes to the target
/// size and flattens column-major. Unreadable files are skipped and listed
/// in *warnings when given.
DataMatrix load_image_dataset(const DatasetSpec& spec,
                              std::vector<std::string>* warnings = nullptr);

struct SplitSpec {
  enum class Mode {
    ConditionList,     // explicit train/test condition tags (pose sets too)
    RandomConditions,  // draw train_condition_count tags at random
    RandomFraction,    // per-class random sample split, no tags needed
  };
  Mode mode = Mode::RandomConditions;

  std::vector<std::string> train_conditions;
  std::vector<std::string> test_conditions;
  int train_condition_count = 0;
  double train_fraction = 0.5;
  std::uint64_t seed = 0;
};

/// Splits into disjoint train/test sets. Condition-driven modes partition
/// whole conditions; ConditionList first restricts the data to the listed
/// conditions (protocols may ignore some), then partitions the rest. Every
/// class must appear in the training half.
std::pair<DataMatrix, DataMatrix> split(const DataMatrix& data,
                                        const SplitSpec& spec);

/// Synthetic domain-shift generator: N classes with rank-r subspaces, each
/// sample pushed through one of several shared random distortions (the
/// "domains") plus Gaussian noise. Train and test draw from disjoint domain
/// sets, so test domains are unseen.
struct SyntheticSpec {
  int classes = 5;
  int rank = 3;
  int dim = 64;
  int samples_per_class = 40;  // per split
  int domains = 3;
  double distortion = 0.9;
  double noise = 0.0;
  std::uint64_t seed = 0;

  void validate() const;
};

std::pair<DataMatrix, DataMatrix> synthesize_domain_shift(
    const SyntheticSpec& spec);

}  // namespace lrt
