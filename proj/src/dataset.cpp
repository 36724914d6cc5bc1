#include "lrt/dataset.hpp"

#include <algorithm>
#include <bit>
#include <map>
#include <regex>
#include <set>
#include <sstream>
#include <stdexcept>

namespace lrt {

namespace {

constexpr std::uint64_t kFnvOffset = 1469598103934665603ull;
constexpr std::uint64_t kFnvPrime = 1099511628211ull;

struct Fnv {
  std::uint64_t h = kFnvOffset;
  void byte(unsigned char b) {
    h ^= b;
    h *= kFnvPrime;
  }
  void u64(std::uint64_t v) {
    for (int i = 0; i < 8; ++i) byte(static_cast<unsigned char>(v >> (8 * i)));
  }
  void f64(double v) { u64(std::bit_cast<std::uint64_t>(v)); }
  void str(const std::string& s) {
    u64(s.size());
    for (char c : s) byte(static_cast<unsigned char>(c));
  }
};

DataMatrix subset(const DataMatrix& data, const std::vector<Index>& cols) {
  DataMatrix out;
  out.samples.resize(data.dim(), static_cast<Index>(cols.size()));
  out.labels.reserve(cols.size());
  const bool tagged = !data.conditions.empty();
  if (tagged) out.conditions.reserve(cols.size());
  for (size_t i = 0; i < cols.size(); ++i) {
    out.samples.col(static_cast<Index>(i)) = data.samples.col(cols[i]);
    out.labels.push_back(data.labels[static_cast<size_t>(cols[i])]);
    if (tagged) {
      out.conditions.push_back(data.conditions[static_cast<size_t>(cols[i])]);
    }
  }
  out.class_names = data.class_names;
  return out;
}

void require_classes_in_train(const DataMatrix& data, const DataMatrix& train) {
  std::set<int> all(data.labels.begin(), data.labels.end());
  std::set<int> got(train.labels.begin(), train.labels.end());
  for (int c : all) {
    if (!got.count(c)) {
      throw std::invalid_argument("split: class " + std::to_string(c) +
                                  " absent from the training partition");
    }
  }
}

}  // namespace

int DataMatrix::num_classes() const {
  int n = 0;
  for (int l : labels) n = std::max(n, l + 1);
  return n;
}

std::vector<Index> DataMatrix::class_columns(int c) const {
  std::vector<Index> cols;
  for (size_t k = 0; k < labels.size(); ++k) {
    if (labels[k] == c) cols.push_back(static_cast<Index>(k));
  }
  return cols;
}

Matrix DataMatrix::class_submatrix(int c) const {
  const auto cols = class_columns(c);
  Matrix out(dim(), static_cast<Index>(cols.size()));
  for (size_t i = 0; i < cols.size(); ++i) {
    out.col(static_cast<Index>(i)) = samples.col(cols[i]);
  }
  return out;
}

Matrix DataMatrix::complement(int c) const {
  Matrix out(dim(), count() - static_cast<Index>(class_columns(c).size()));
  Index j = 0;
  for (size_t k = 0; k < labels.size(); ++k) {
    if (labels[k] != c) out.col(j++) = samples.col(static_cast<Index>(k));
  }
  return out;
}

void DataMatrix::validate() const {
  if (samples.rows() < 1) {
    throw std::invalid_argument("DataMatrix: feature dimension must be >= 1");
  }
  if (static_cast<size_t>(samples.cols()) != labels.size()) {
    throw std::invalid_argument("DataMatrix: one label per column required");
  }
  if (!conditions.empty() && conditions.size() != labels.size()) {
    throw std::invalid_argument(
        "DataMatrix: condition tags must be empty or one per column");
  }
  if (!samples.allFinite()) {
    throw std::invalid_argument("DataMatrix: non-finite sample entries");
  }
  for (int l : labels) {
    if (l < 0) throw std::invalid_argument("DataMatrix: negative class label");
  }
}

std::string DataMatrix::fingerprint() const {
  Fnv f;
  f.u64(static_cast<std::uint64_t>(samples.rows()));
  f.u64(static_cast<std::uint64_t>(samples.cols()));
  for (Index j = 0; j < samples.cols(); ++j) {
    for (Index i = 0; i < samples.rows(); ++i) f.f64(samples(i, j));
  }
  for (int l : labels) f.u64(static_cast<std::uint64_t>(l));
  for (const auto& c : conditions) f.str(c);
  std::ostringstream os;
  os << std::hex << f.h;
  return os.str();
}

DataMatrix load_image_dataset(const DatasetSpec& spec,
                              std::vector<std::string>* warnings) {
  namespace fs = std::filesystem;
  if (spec.target_width <= 0 || spec.target_height <= 0) {
    throw std::invalid_argument("DatasetSpec: target size must be positive");
  }
  if (!fs::is_directory(spec.root)) {
    throw std::invalid_argument("DatasetSpec: root '" + spec.root.string() +
                                "' is not a directory");
  }
  auto warn = [&](const std::string& msg) {
    if (warnings) warnings->push_back(msg);
  };

  std::vector<fs::path> files;
  for (const auto& entry : fs::recursive_directory_iterator(spec.root)) {
    if (!entry.is_regular_file()) continue;
    std::string ext = entry.path().extension().string();
    std::transform(ext.begin(), ext.end(), ext.begin(),
                   [](unsigned char c) { return std::tolower(c); });
    if (ext == ".pgm" || ext == ".png") files.push_back(entry.path());
  }
  // Sorted traversal keeps column order identical across platforms.
  std::sort(files.begin(), files.end(), [](const auto& a, const auto& b) {
    return a.generic_string() < b.generic_string();
  });

  const std::regex label_re(spec.label_pattern.empty() ? "^(.*)$"
                                                       : spec.label_pattern);
  const std::regex cond_re(spec.condition_pattern.empty()
                               ? "^(.*)$"
                               : spec.condition_pattern);

  struct Loaded {
    std::string cls;
    std::string cond;
    Vector col;
  };
  std::vector<Loaded> loaded;
  for (const auto& file : files) {
    const std::string stem = file.stem().string();
    std::string cls;
    if (spec.label_rule == DatasetSpec::LabelRule::DirectoryPerClass) {
      cls = file.parent_path().filename().string();
    } else {
      std::smatch m;
      if (!std::regex_search(stem, m, label_re) || m.size() < 2) {
        warn("no class label in '" + file.string() + "', skipped");
        continue;
      }
      cls = m[1].str();
    }
    std::string cond = stem;
    if (!spec.condition_pattern.empty()) {
      std::smatch m;
      if (!std::regex_search(stem, m, cond_re) || m.size() < 2) {
        warn("no condition tag in '" + file.string() + "', skipped");
        continue;
      }
      cond = m[1].str();
    }
    try {
      Image img = read_image(file);
      if (img.width != spec.target_width || img.height != spec.target_height) {
        img = resize_bilinear(img, spec.target_width, spec.target_height);
      }
      Vector col = image_to_column(img);
      if (spec.unit_normalize) {
        const double n = col.norm();
        if (n > 0) col /= n;
      }
      loaded.push_back({cls, cond, std::move(col)});
    } catch (const std::exception& e) {
      warn(std::string(e.what()) + ", skipped");
    }
  }
  if (loaded.empty()) {
    throw std::runtime_error("load_image_dataset: no usable images under '" +
                             spec.root.string() + "'");
  }

  std::map<std::string, int> class_ids;
  for (const auto& l : loaded) class_ids.emplace(l.cls, 0);
  int next = 0;
  for (auto& [name, id] : class_ids) id = next++;

  DataMatrix data;
  data.samples.resize(static_cast<Index>(spec.target_width) *
                          spec.target_height,
                      static_cast<Index>(loaded.size()));
  data.class_names.resize(class_ids.size());
  for (const auto& [name, id] : class_ids) data.class_names[id] = name;
  for (size_t k = 0; k < loaded.size(); ++k) {
    data.samples.col(static_cast<Index>(k)) = loaded[k].col;
    data.labels.push_back(class_ids[loaded[k].cls]);
    data.conditions.push_back(loaded[k].cond);
  }
  return data;
}

std::pair<DataMatrix, DataMatrix> split(const DataMatrix& data,
                                        const SplitSpec& spec) {
  data.validate();
  std::vector<Index> train_cols;
  std::vector<Index> test_cols;

  if (spec.mode == SplitSpec::Mode::RandomFraction) {
    if (spec.train_fraction <= 0 || spec.train_fraction >= 1) {
      throw std::invalid_argument("split: train_fraction must be in (0,1)");
    }
    auto rng = make_rng(spec.seed, "split");
    std::map<int, std::vector<Index>> per_class;
    for (size_t k = 0; k < data.labels.size(); ++k) {
      per_class[data.labels[k]].push_back(static_cast<Index>(k));
    }
    for (auto& [cls, cols] : per_class) {
      if (cols.size() < 2) {
        throw std::invalid_argument(
            "split: class " + std::to_string(cls) +
            " needs at least two samples for a fraction split");
      }
      std::shuffle(cols.begin(), cols.end(), rng);
      size_t n_train = static_cast<size_t>(
          std::lround(spec.train_fraction * static_cast<double>(cols.size())));
      n_train = std::clamp<size_t>(n_train, 1, cols.size() - 1);
      train_cols.insert(train_cols.end(), cols.begin(), cols.begin() + n_train);
      test_cols.insert(test_cols.end(), cols.begin() + n_train, cols.end());
    }
    std::sort(train_cols.begin(), train_cols.end());
    std::sort(test_cols.begin(), test_cols.end());
  } else {
    if (data.conditions.empty()) {
      throw std::invalid_argument(
          "split: condition tags required for condition-driven splits");
    }
    std::set<std::string> train_set;
    std::set<std::string> test_set;
    if (spec.mode == SplitSpec::Mode::ConditionList) {
      train_set.insert(spec.train_conditions.begin(),
                       spec.train_conditions.end());
      test_set.insert(spec.test_conditions.begin(),
                      spec.test_conditions.end());
      if (train_set.empty() || test_set.empty()) {
        throw std::invalid_argument(
            "split: train and test condition lists must be non-empty");
      }
      for (const auto& c : train_set) {
        if (test_set.count(c)) {
          throw std::invalid_argument(
              "split: condition '" + c + "' in both train and test lists");
        }
      }
    } else {
      std::set<std::string> all(data.conditions.begin(),
                                data.conditions.end());
      const int n = static_cast<int>(all.size());
      if (spec.train_condition_count <= 0 ||
          spec.train_condition_count >= n) {
        throw std::invalid_argument(
            "split: train_condition_count must be in (0, #conditions)");
      }
      std::vector<std::string> shuffled(all.begin(), all.end());
      auto rng = make_rng(spec.seed, "split");
      std::shuffle(shuffled.begin(), shuffled.end(), rng);
      train_set.insert(shuffled.begin(),
                       shuffled.begin() + spec.train_condition_count);
      test_set.insert(shuffled.begin() + spec.train_condition_count,
                      shuffled.end());
    }
    for (size_t k = 0; k < data.conditions.size(); ++k) {
      if (train_set.count(data.conditions[k])) {
        train_cols.push_back(static_cast<Index>(k));
      } else if (test_set.count(data.conditions[k])) {
        test_cols.push_back(static_cast<Index>(k));
      }
      // Conditions outside the two lists are not part of the protocol.
    }
  }

  if (train_cols.empty() || test_cols.empty()) {
    throw std::invalid_argument("split: both partitions must be non-empty");
  }
  DataMatrix train = subset(data, train_cols);
  DataMatrix test = subset(data, test_cols);
  require_classes_in_train(data, train);
  return {std::move(train), std::move(test)};
}

void SyntheticSpec::validate() const {
  if (classes < 2) {
    throw std::invalid_argument("SyntheticSpec: need at least two classes");
  }
  if (rank < 1 || rank >= dim) {
    throw std::invalid_argument("SyntheticSpec: rank must satisfy 1 <= r < d");
  }
  if (dim < 1 || samples_per_class < 1) {
    throw std::invalid_argument("SyntheticSpec: counts must be positive");
  }
  if (domains < 2) {
    throw std::invalid_argument(
        "SyntheticSpec: need >= 2 domains to hold one out for testing");
  }
  if (distortion < 0 || noise < 0) {
    throw std::invalid_argument(
        "SyntheticSpec: distortion and noise must be non-negative");
  }
}

std::pair<DataMatrix, DataMatrix> synthesize_domain_shift(
    const SyntheticSpec& spec) {
  spec.validate();
  auto rng = make_rng(spec.seed, "synthetic");
  std::normal_distribution<double> gauss(0.0, 1.0);
  auto draw = [&](Index rows, Index cols) {
    Matrix m(rows, cols);
    for (Index j = 0; j < cols; ++j) {
      for (Index i = 0; i < rows; ++i) m(i, j) = gauss(rng);
    }
    return m;
  };

  const Index d = spec.dim;
  // Orthonormal rank-r basis per class.
  std::vector<Matrix> bases;
  for (int c = 0; c < spec.classes; ++c) {
    Eigen::HouseholderQR<Matrix> qr(draw(d, spec.rank));
    bases.push_back(Matrix(qr.householderQ()).leftCols(spec.rank));
  }
  // Domains form a one-parameter distortion family (like a lighting or pose
  // sweep): one shared random map, applied with a per-domain magnitude that
  // grows along the domain index. Entries scaled by 1/sqrt(d) so magnitude m
  // means a distortion part of spectral norm about 2m.
  const Matrix family = draw(d, d) / std::sqrt(double(d));
  std::vector<Matrix> domain_maps;
  for (int j = 0; j < spec.domains; ++j) {
    const double magnitude =
        spec.domains > 1 ? spec.distortion * j / (spec.domains - 1) : 0.0;
    domain_maps.push_back(Matrix::Identity(d, d) + magnitude * family);
  }
  // Test domains sit at the far end of the sweep, so their distortions are
  // stronger than anything seen in training.
  const int n_test_domains = std::max(1, spec.domains / 3);
  const int n_train_domains = spec.domains - n_test_domains;

  auto make_side = [&](bool train_side) {
    DataMatrix out;
    out.samples.resize(d, static_cast<Index>(spec.classes) *
                              spec.samples_per_class);
    Index col = 0;
    for (int c = 0; c < spec.classes; ++c) {
      for (int k = 0; k < spec.samples_per_class; ++k) {
        const int dom = train_side ? k % n_train_domains
                                   : n_train_domains + k % n_test_domains;
        Vector sample = domain_maps[dom] * (bases[c] * draw(spec.rank, 1));
        if (spec.noise > 0) sample += spec.noise * draw(d, 1);
        out.samples.col(col++) = sample;
        out.labels.push_back(c);
        out.conditions.push_back("domain" + std::to_string(dom));
      }
      out.class_names.push_back("class" + std::to_string(c));
    }
    return out;
  };
  DataMatrix train = make_side(true);
  DataMatrix test = make_side(false);
  return {std::move(train), std::move(test)};
}

}  // namespace lrt
