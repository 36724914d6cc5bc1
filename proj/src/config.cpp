#include "lrt/config.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <map>
#include <set>
#include <sstream>
#include <stdexcept>

namespace lrt {

namespace {

std::string fmt_double(double v) {
  char buf[32];
  auto [p, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, p);
}

std::string trim(std::string s) {
  const auto is_space = [](unsigned char c) { return std::isspace(c); };
  while (!s.empty() && is_space(s.front())) s.erase(s.begin());
  while (!s.empty() && is_space(s.back())) s.pop_back();
  return s;
}

[[noreturn]] void parse_fail(int line, const std::string& what) {
  throw std::invalid_argument("config line " + std::to_string(line) + ": " +
                              what);
}

// Values stored as token lists; scalars are single-element lists.
struct KeyValues {
  std::map<std::string, std::vector<std::string>> values;
  std::map<std::string, int> lines;
  mutable std::set<std::string> consumed;

  bool has(const std::string& key) const { return values.count(key) != 0; }

  const std::vector<std::string>* get(const std::string& key) const {
    auto it = values.find(key);
    if (it == values.end()) return nullptr;
    consumed.insert(key);
    return &it->second;
  }

  std::string scalar(const std::string& key, const std::string& fallback) const {
    const auto* v = get(key);
    if (!v) return fallback;
    if (v->size() != 1) {
      throw std::invalid_argument("config: '" + key + "' expects one value");
    }
    return (*v)[0];
  }

  double number(const std::string& key, double fallback) const {
    const auto* v = get(key);
    if (!v) return fallback;
    try {
      return std::stod(scalar(key, ""));
    } catch (...) {
      throw std::invalid_argument("config: '" + key + "' is not a number");
    }
  }

  long integer(const std::string& key, long fallback) const {
    const double d = number(key, static_cast<double>(fallback));
    const long l = static_cast<long>(d);
    if (static_cast<double>(l) != d) {
      throw std::invalid_argument("config: '" + key + "' is not an integer");
    }
    return l;
  }

  bool boolean(const std::string& key, bool fallback) const {
    const auto* v = get(key);
    if (!v) return fallback;
    const std::string s = scalar(key, "");
    if (s == "true") return true;
    if (s == "false") return false;
    throw std::invalid_argument("config: '" + key + "' must be true/false");
  }

  std::vector<std::string> list(const std::string& key) const {
    const auto* v = get(key);
    return v ? *v : std::vector<std::string>{};
  }

  void check_all_consumed() const {
    for (const auto& [key, v] : values) {
      if (!consumed.count(key)) {
        throw std::invalid_argument(
            "config line " + std::to_string(lines.at(key)) +
            ": unknown key '" + key + "'");
      }
    }
  }
};

// key = value | "value" | [v1, v2, ...], '#' starts a comment.
KeyValues parse_key_values(const std::string& text) {
  KeyValues kv;
  std::istringstream in(text);
  std::string line;
  std::string section;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    // strip comments outside quotes
    bool quoted = false;
    for (size_t i = 0; i < line.size(); ++i) {
      if (line[i] == '"') quoted = !quoted;
      if (line[i] == '#' && !quoted) {
        line.erase(i);
        break;
      }
    }
    line = trim(line);
    if (line.empty()) continue;
    if (line.front() == '[' && line.back() == ']') {
      section = trim(line.substr(1, line.size() - 2));
      if (section.empty()) parse_fail(lineno, "empty section name");
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string::npos) parse_fail(lineno, "expected key = value");
    std::string key = trim(line.substr(0, eq));
    std::string value = trim(line.substr(eq + 1));
    if (key.empty()) parse_fail(lineno, "empty key");
    if (!section.empty()) key = section + "." + key;
    if (kv.values.count(key)) parse_fail(lineno, "duplicate key '" + key + "'");

    std::vector<std::string> tokens;
    auto unquote = [&](std::string tok) {
      tok = trim(tok);
      if (tok.size() >= 2 && tok.front() == '"' && tok.back() == '"') {
        tok = tok.substr(1, tok.size() - 2);
      }
      return tok;
    };
    if (!value.empty() && value.front() == '[') {
      if (value.back() != ']') parse_fail(lineno, "unterminated array");
      std::string body = value.substr(1, value.size() - 2);
      std::string tok;
      bool in_quotes = false;
      for (char c : body) {
        if (c == '"') in_quotes = !in_quotes;
        if (c == ',' && !in_quotes) {
          if (!trim(tok).empty()) tokens.push_back(unquote(tok));
          tok.clear();
        } else {
          tok.push_back(c);
        }
      }
      if (!trim(tok).empty()) tokens.push_back(unquote(tok));
    } else {
      if (value.empty()) parse_fail(lineno, "empty value for '" + key + "'");
      tokens.push_back(unquote(value));
    }
    kv.values.emplace(key, std::move(tokens));
    kv.lines.emplace(key, lineno);
  }
  return kv;
}

template <class T>
T parse_enum(const std::string& value, const char* key,
             std::initializer_list<std::pair<const char*, T>> options) {
  for (const auto& [name, val] : options) {
    if (value == name) return val;
  }
  std::string names;
  for (const auto& [name, val] : options) {
    if (!names.empty()) names += ", ";
    names += name;
  }
  throw std::invalid_argument("config: '" + std::string(key) + "' must be one of: " + names);
}

std::string quote(const std::string& s) { return '"' + s + '"'; }

}  // namespace

void ExperimentConfig::validate() const {
  learn.validate();
  rpca.validate();
  if (s_max < 1) {
    throw std::invalid_argument("config: classify.sparsity must be >= 1");
  }
  if (source == Source::Synthetic) {
    synthetic.validate();
  } else {
    if (source == Source::Images && dataset.root.empty()) {
      throw std::invalid_argument("config: dataset.root required for images");
    }
    if (source == Source::Cache && cache_file.empty()) {
      throw std::invalid_argument("config: dataset.file required for cache");
    }
    switch (split.mode) {
      case SplitSpec::Mode::RandomConditions:
        if (split.train_condition_count < 1) {
          throw std::invalid_argument(
              "config: split.train_count required for random-conditions");
        }
        break;
      case SplitSpec::Mode::ConditionList:
        if (split.train_conditions.empty() || split.test_conditions.empty()) {
          throw std::invalid_argument(
              "config: split.train and split.test lists required");
        }
        break;
      case SplitSpec::Mode::RandomFraction:
        if (split.train_fraction <= 0 || split.train_fraction >= 1) {
          throw std::invalid_argument(
              "config: split.fraction must be in (0,1)");
        }
        break;
    }
  }
  const bool class_classifier = classifier == ClassifierKind::ClassLrtNn ||
                                classifier == ClassifierKind::ClassLrtOmp;
  if (class_classifier && learner != LearnerKind::PerClass) {
    throw std::invalid_argument(
        "config: class-lrt classifiers require learn.kind = \"class\"");
  }
  if (!class_classifier && learner == LearnerKind::PerClass) {
    throw std::invalid_argument(
        "config: learn.kind = \"class\" requires a class-lrt classifier");
  }
  if (classifier == ClassifierKind::Nn && learner != LearnerKind::None) {
    throw std::invalid_argument(
        "config: classifier nn ignores transforms; use lrt-nn with a learner");
  }
}

ExperimentConfig parse_config_text(const std::string& text) {
  const KeyValues kv = parse_key_values(text);
  ExperimentConfig cfg;

  cfg.seed = static_cast<std::uint64_t>(kv.integer("seed", 0));

  cfg.source = parse_enum<ExperimentConfig::Source>(
      kv.scalar("dataset.source", "synthetic"), "dataset.source",
      {{"synthetic", ExperimentConfig::Source::Synthetic},
       {"images", ExperimentConfig::Source::Images},
       {"cache", ExperimentConfig::Source::Cache}});

  cfg.dataset.root = kv.scalar("dataset.root", "");
  cfg.dataset.target_width = static_cast<int>(kv.integer("dataset.width", 20));
  cfg.dataset.target_height =
      static_cast<int>(kv.integer("dataset.height", 20));
  cfg.dataset.label_rule = parse_enum<DatasetSpec::LabelRule>(
      kv.scalar("dataset.label_rule", "directory"), "dataset.label_rule",
      {{"directory", DatasetSpec::LabelRule::DirectoryPerClass},
       {"pattern", DatasetSpec::LabelRule::FilenamePattern}});
  cfg.dataset.label_pattern = kv.scalar("dataset.label_pattern", "");
  cfg.dataset.condition_pattern = kv.scalar("dataset.condition_pattern", "");
  cfg.dataset.unit_normalize = kv.boolean("dataset.unit_normalize", false);
  cfg.cache_file = kv.scalar("dataset.file", "");

  cfg.synthetic.classes = static_cast<int>(kv.integer("dataset.classes", 5));
  cfg.synthetic.rank = static_cast<int>(kv.integer("dataset.rank", 3));
  cfg.synthetic.dim = static_cast<int>(kv.integer("dataset.dim", 64));
  cfg.synthetic.samples_per_class =
      static_cast<int>(kv.integer("dataset.samples_per_class", 40));
  cfg.synthetic.domains = static_cast<int>(kv.integer("dataset.domains", 3));
  cfg.synthetic.distortion = kv.number("dataset.distortion", 0.9);
  cfg.synthetic.noise = kv.number("dataset.noise", 0.0);
  cfg.synthetic.seed = cfg.seed;

  cfg.split.mode = parse_enum<SplitSpec::Mode>(
      kv.scalar("split.mode", "random-conditions"), "split.mode",
      {{"random-conditions", SplitSpec::Mode::RandomConditions},
       {"condition-list", SplitSpec::Mode::ConditionList},
       {"pose-sets", SplitSpec::Mode::ConditionList},
       {"random-fraction", SplitSpec::Mode::RandomFraction}});
  cfg.split.train_conditions = kv.list("split.train");
  cfg.split.test_conditions = kv.list("split.test");
  cfg.split.train_condition_count =
      static_cast<int>(kv.integer("split.train_count", 0));
  cfg.split.train_fraction = kv.number("split.fraction", 0.5);
  cfg.split.seed = cfg.seed;

  cfg.learner = parse_enum<LearnerKind>(
      kv.scalar("learn.kind", "none"), "learn.kind",
      {{"none", LearnerKind::None},
       {"global", LearnerKind::Global},
       {"class", LearnerKind::PerClass}});
  cfg.learn.lambda = kv.number("learn.lambda", 0.1);
  cfg.learn.step_size = kv.number("learn.step", 0.05);
  cfg.learn.iterations = static_cast<int>(kv.integer("learn.iterations", 100));
  cfg.learn.delta.value = kv.number("learn.delta", 1e-4);
  cfg.learn.delta.kind = parse_enum<DeltaPolicy::Kind>(
      kv.scalar("learn.delta_mode", "relative"), "learn.delta_mode",
      {{"relative", DeltaPolicy::Kind::Relative},
       {"absolute", DeltaPolicy::Kind::Absolute}});
  cfg.learn.record_trace = kv.boolean("learn.record_trace", true);
  cfg.learn.literal_plus_update = kv.boolean("learn.literal_update", false);
  cfg.learn.backtracking = kv.boolean("learn.backtracking", false);
  cfg.learn.seed = cfg.seed;

  const double beta = kv.number("rpca.beta", 0.0);
  if (beta > 0) cfg.rpca.beta = beta;
  cfg.rpca.tol = kv.number("rpca.tol", 1e-7);
  cfg.rpca.max_iter = static_cast<int>(kv.integer("rpca.max_iter", 500));

  cfg.classifier = parse_enum<ClassifierKind>(
      kv.scalar("classify.kind", "nn"), "classify.kind",
      {{"nn", ClassifierKind::Nn},
       {"lrt-nn", ClassifierKind::LrtNn},
       {"lrt-omp", ClassifierKind::LrtOmp},
       {"class-lrt-nn", ClassifierKind::ClassLrtNn},
       {"class-lrt-omp", ClassifierKind::ClassLrtOmp}});
  cfg.s_max = static_cast<int>(kv.integer("classify.sparsity", 10));

  cfg.output_dir = kv.scalar("output.dir", "out");
  const auto formats = kv.list("output.formats");
  if (!formats.empty()) {
    cfg.write_json = cfg.write_csv = false;
    for (const auto& f : formats) {
      if (f == "json") {
        cfg.write_json = true;
      } else if (f == "csv") {
        cfg.write_csv = true;
      } else {
        throw std::invalid_argument("config: unknown output format '" + f +
                                    "'");
      }
    }
  }
  cfg.save_artifacts = kv.boolean("output.save_artifacts", true);

  kv.check_all_consumed();
  cfg.validate();
  return cfg;
}

ExperimentConfig load_config(const std::filesystem::path& file) {
  std::ifstream in(file);
  if (!in) {
    throw std::runtime_error("cannot open config '" + file.string() + "'");
  }
  std::ostringstream os;
  os << in.rdbuf();
  return parse_config_text(os.str());
}

std::string config_to_string(const ExperimentConfig& cfg) {
  std::ostringstream os;
  os << "seed = " << cfg.seed << "\n\n[dataset]\n";
  switch (cfg.source) {
    case ExperimentConfig::Source::Synthetic:
      os << "source = \"synthetic\"\n"
         << "classes = " << cfg.synthetic.classes << "\n"
         << "rank = " << cfg.synthetic.rank << "\n"
         << "dim = " << cfg.synthetic.dim << "\n"
         << "samples_per_class = " << cfg.synthetic.samples_per_class << "\n"
         << "domains = " << cfg.synthetic.domains << "\n"
         << "distortion = " << fmt_double(cfg.synthetic.distortion) << "\n"
         << "noise = " << fmt_double(cfg.synthetic.noise) << "\n";
      break;
    case ExperimentConfig::Source::Images:
      os << "source = \"images\"\n"
         << "root = " << quote(cfg.dataset.root.generic_string()) << "\n"
         << "width = " << cfg.dataset.target_width << "\n"
         << "height = " << cfg.dataset.target_height << "\n"
         << "label_rule = "
         << (cfg.dataset.label_rule == DatasetSpec::LabelRule::DirectoryPerClass
                 ? "\"directory\""
                 : "\"pattern\"")
         << "\n";
      if (!cfg.dataset.label_pattern.empty()) {
        os << "label_pattern = " << quote(cfg.dataset.label_pattern) << "\n";
      }
      if (!cfg.dataset.condition_pattern.empty()) {
        os << "condition_pattern = " << quote(cfg.dataset.condition_pattern)
           << "\n";
      }
      os << "unit_normalize = "
         << (cfg.dataset.unit_normalize ? "true" : "false") << "\n";
      break;
    case ExperimentConfig::Source::Cache:
      os << "source = \"cache\"\n"
         << "file = " << quote(cfg.cache_file.generic_string()) << "\n";
      break;
  }
  if (cfg.source != ExperimentConfig::Source::Synthetic) {
    os << "\n[split]\n";
    switch (cfg.split.mode) {
      case SplitSpec::Mode::RandomConditions:
        os << "mode = \"random-conditions\"\n"
           << "train_count = " << cfg.split.train_condition_count << "\n";
        break;
      case SplitSpec::Mode::ConditionList: {
        os << "mode = \"condition-list\"\ntrain = [";
        for (size_t i = 0; i < cfg.split.train_conditions.size(); ++i) {
          os << (i ? ", " : "") << quote(cfg.split.train_conditions[i]);
        }
        os << "]\ntest = [";
        for (size_t i = 0; i < cfg.split.test_conditions.size(); ++i) {
          os << (i ? ", " : "") << quote(cfg.split.test_conditions[i]);
        }
        os << "]\n";
        break;
      }
      case SplitSpec::Mode::RandomFraction:
        os << "mode = \"random-fraction\"\n"
           << "fraction = " << fmt_double(cfg.split.train_fraction) << "\n";
        break;
    }
  }
  os << "\n[learn]\n"
     << "kind = " << quote(to_string(cfg.learner)) << "\n"
     << "lambda = " << fmt_double(cfg.learn.lambda) << "\n"
     << "step = " << fmt_double(cfg.learn.step_size) << "\n"
     << "iterations = " << cfg.learn.iterations << "\n"
     << "delta = " << fmt_double(cfg.learn.delta.value) << "\n"
     << "delta_mode = "
     << (cfg.learn.delta.kind == DeltaPolicy::Kind::Relative ? "\"relative\""
                                                             : "\"absolute\"")
     << "\n"
     << "record_trace = " << (cfg.learn.record_trace ? "true" : "false")
     << "\n"
     << "literal_update = "
     << (cfg.learn.literal_plus_update ? "true" : "false") << "\n"
     << "backtracking = " << (cfg.learn.backtracking ? "true" : "false")
     << "\n";
  os << "\n[rpca]\n"
     << "beta = " << fmt_double(cfg.rpca.beta.value_or(0.0)) << "\n"
     << "tol = " << fmt_double(cfg.rpca.tol) << "\n"
     << "max_iter = " << cfg.rpca.max_iter << "\n";
  os << "\n[classify]\n"
     << "kind = " << quote(to_string(cfg.classifier)) << "\n"
     << "sparsity = " << cfg.s_max << "\n";
  os << "\n[output]\n"
     << "dir = " << quote(cfg.output_dir.generic_string()) << "\n"
     << "formats = [";
  bool first = true;
  if (cfg.write_json) {
    os << "\"json\"";
    first = false;
  }
  if (cfg.write_csv) os << (first ? "" : ", ") << "\"csv\"";
  os << "]\n"
     << "save_artifacts = " << (cfg.save_artifacts ? "true" : "false") << "\n";
  return os.str();
}

std::string to_string(LearnerKind kind) {
  switch (kind) {
    case LearnerKind::None: return "none";
    case LearnerKind::Global: return "global";
    case LearnerKind::PerClass: return "class";
  }
  return "none";
}

std::string to_string(ClassifierKind kind) {
  switch (kind) {
    case ClassifierKind::Nn: return "nn";
    case ClassifierKind::LrtNn: return "lrt-nn";
    case ClassifierKind::LrtOmp: return "lrt-omp";
    case ClassifierKind::ClassLrtNn: return "class-lrt-nn";
    case ClassifierKind::ClassLrtOmp: return "class-lrt-omp";
  }
  return "nn";
}

std::string method_name(const ExperimentConfig& cfg) {
  const char* prefix = cfg.learner == LearnerKind::Global   ? "Global "
                       : cfg.learner == LearnerKind::PerClass ? "Class "
                                                              : "Identity ";
  switch (cfg.classifier) {
    case ClassifierKind::Nn: return "Original+NN";
    case ClassifierKind::LrtNn: return std::string(prefix) + "LRT+NN";
    case ClassifierKind::LrtOmp: return std::string(prefix) + "LRT+OMP";
    case ClassifierKind::ClassLrtNn: return "Class LRT+NN";
    case ClassifierKind::ClassLrtOmp: return "Class LRT+OMP";
  }
  return "unknown";
}

}  // namespace lrt
