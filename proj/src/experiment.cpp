#include "lrt/experiment.hpp"

#include "lrt/omp.hpp"
#include "lrt/parallel.hpp"
#include "lrt/serialization.hpp"

#include <json.hpp>

#include <charconv>
#include <chrono>
#include <cstdlib>
#include <filesystem>
#include <sstream>

namespace lrt {

namespace {

using nlohmann::json;

std::string fmt_double(double v) {
  char buf[32];
  auto [p, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, p);
}

template <class Fn>
auto stage(const char* name, Fn&& fn) {
  try {
    return fn();
  } catch (const StageError&) {
    throw;
  } catch (const std::exception& e) {
    throw StageError(name, e.what());
  }
}

std::string pad(std::string s, size_t width) {
  while (s.size() < width) s.push_back(' ');
  return s;
}

}  // namespace

RunOutput run_experiment_full(const ExperimentConfig& cfg) {
  const auto t0 = std::chrono::steady_clock::now();
  stage("config", [&] { cfg.validate(); });

  DataMatrix train;
  DataMatrix test;
  if (cfg.source == ExperimentConfig::Source::Synthetic) {
    std::tie(train, test) = stage("load", [&] {
      return synthesize_domain_shift(cfg.synthetic);
    });
  } else {
    DataMatrix all = stage("load", [&] {
      return cfg.source == ExperimentConfig::Source::Images
                 ? load_image_dataset(cfg.dataset)
                 : load_dataset(cfg.cache_file);
    });
    std::tie(train, test) = stage("split", [&] { return split(all, cfg.split); });
  }

  RunOutput out;
  RunReport& report = out.report;
  report.method = method_name(cfg);
  report.seed = cfg.seed;
  report.config_echo = config_to_string(cfg);
  report.train_fingerprint = train.fingerprint();
  report.test_fingerprint = test.fingerprint();
  report.train_samples = static_cast<int>(train.count());
  report.test_samples = static_cast<int>(test.count());
  report.classes = train.num_classes();

  std::vector<Transform>& transforms = out.transforms;
  stage("learn", [&] {
    switch (cfg.learner) {
      case LearnerKind::Global: {
        auto [t, trace] = learn_global_transform(train, cfg.learn);
        transforms.push_back(std::move(t));
        report.traces.push_back(std::move(trace));
        break;
      }
      case LearnerKind::PerClass: {
        auto result = learn_class_transforms(train, cfg.learn);
        transforms = std::move(result.transforms);
        report.traces = std::move(result.traces);
        break;
      }
      case LearnerKind::None:
        if (cfg.classifier == ClassifierKind::LrtNn ||
            cfg.classifier == ClassifierKind::LrtOmp) {
          transforms.push_back(Transform{
              Matrix::Identity(train.dim(), train.dim()),
              TransformKind::Global, -1});
        }
        break;
    }
    return 0;
  });

  ClassNnGallery class_nn;
  DataMatrix transformed_gallery;
  const bool needs_model = cfg.classifier == ClassifierKind::LrtOmp ||
                           cfg.classifier == ClassifierKind::ClassLrtOmp;
  stage("model", [&] {
    if (needs_model) {
      out.model = build_lowrank_model(transforms, train, cfg.rpca);
      report.rpca_nonconverged = out.model->nonconverged_classes;
    } else if (cfg.classifier == ClassifierKind::ClassLrtNn) {
      class_nn = build_class_nn_gallery(train, transforms);
    } else if (cfg.classifier == ClassifierKind::LrtNn) {
      transformed_gallery = train;
      transformed_gallery.samples = transforms[0].matrix * train.samples;
    }
    return 0;
  });

  std::vector<Prediction> predictions(static_cast<size_t>(test.count()));
  stage("classify", [&] {
    parallel_for(static_cast<size_t>(test.count()), [&](size_t i) {
      const Vector probe = test.samples.col(static_cast<Index>(i));
      switch (cfg.classifier) {
        case ClassifierKind::Nn:
          predictions[i] = nn_classify(train, probe);
          break;
        case ClassifierKind::LrtNn:
          predictions[i] =
              nn_classify(transformed_gallery, transforms[0].matrix * probe);
          break;
        case ClassifierKind::LrtOmp:
          predictions[i] = lrt_omp_classify(*out.model, probe, cfg.s_max);
          break;
        case ClassifierKind::ClassLrtNn:
          predictions[i] = class_lrt_nn_classify(class_nn, probe);
          break;
        case ClassifierKind::ClassLrtOmp:
          predictions[i] = class_lrt_classify(*out.model, probe, cfg.s_max);
          break;
      }
    });
    return 0;
  });

  stage("evaluate", [&] {
    report.eval = evaluate(predictions, test.labels);
    return 0;
  });

  report.wall_time_ms =
      std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() -
                                                t0)
          .count();
  return out;
}

RunReport run_experiment(const ExperimentConfig& cfg) {
  return run_experiment_full(cfg).report;
}

std::string RunReport::to_json() const {
  json j;
  j["method"] = method;
  j["seed"] = seed;
  j["config"] = config_echo;
  j["dataset"] = {{"train_fingerprint", train_fingerprint},
                  {"test_fingerprint", test_fingerprint},
                  {"train_samples", train_samples},
                  {"test_samples", test_samples},
                  {"classes", classes}};
  j["accuracy"] = eval.accuracy;
  j["correct"] = eval.correct;
  j["total"] = eval.total;
  j["class_labels"] = eval.class_labels;
  j["per_class_accuracy"] = eval.per_class_accuracy;
  j["per_class_total"] = eval.per_class_total;
  std::vector<std::vector<int>> confusion;
  for (Index r = 0; r < eval.confusion.rows(); ++r) {
    std::vector<int> row;
    for (Index c = 0; c < eval.confusion.cols(); ++c) {
      row.push_back(eval.confusion(r, c));
    }
    confusion.push_back(std::move(row));
  }
  j["confusion"] = confusion;
  if (!traces.empty()) {
    std::vector<double> finals;
    std::vector<std::vector<double>> curves;
    for (const auto& t : traces) {
      finals.push_back(t.final_objective);
      if (!t.objective_values.empty()) curves.push_back(t.objective_values);
    }
    j["final_objectives"] = finals;
    if (!curves.empty()) j["objective_traces"] = curves;
  }
  if (!rpca_nonconverged.empty()) j["rpca_nonconverged"] = rpca_nonconverged;
  return j.dump(2) + "\n";
}

RunReport RunReport::from_json_text(const std::string& text) {
  const json j = json::parse(text);
  RunReport r;
  r.method = j.at("method").get<std::string>();
  r.seed = j.at("seed").get<std::uint64_t>();
  r.config_echo = j.at("config").get<std::string>();
  const auto& d = j.at("dataset");
  r.train_fingerprint = d.at("train_fingerprint").get<std::string>();
  r.test_fingerprint = d.at("test_fingerprint").get<std::string>();
  r.train_samples = d.at("train_samples").get<int>();
  r.test_samples = d.at("test_samples").get<int>();
  r.classes = d.at("classes").get<int>();
  r.eval.accuracy = j.at("accuracy").get<double>();
  r.eval.correct = j.at("correct").get<int>();
  r.eval.total = j.at("total").get<int>();
  r.eval.class_labels = j.at("class_labels").get<std::vector<int>>();
  r.eval.per_class_accuracy =
      j.at("per_class_accuracy").get<std::vector<double>>();
  r.eval.per_class_total = j.at("per_class_total").get<std::vector<int>>();
  const auto confusion = j.at("confusion").get<std::vector<std::vector<int>>>();
  const Index n = static_cast<Index>(confusion.size());
  r.eval.confusion = Eigen::MatrixXi::Zero(n, n);
  for (Index row = 0; row < n; ++row) {
    for (Index col = 0; col < n; ++col) {
      r.eval.confusion(row, col) = confusion[static_cast<size_t>(row)][static_cast<size_t>(col)];
    }
  }
  if (j.contains("objective_traces")) {
    for (const auto& curve :
         j.at("objective_traces").get<std::vector<std::vector<double>>>()) {
      LearnTrace t;
      t.objective_values = curve;
      t.final_objective = curve.empty() ? 0.0 : curve.back();
      r.traces.push_back(std::move(t));
    }
  }
  if (j.contains("rpca_nonconverged")) {
    r.rpca_nonconverged = j.at("rpca_nonconverged").get<std::vector<int>>();
  }
  return r;
}

std::vector<std::filesystem::path> write_report(const RunOutput& output,
                                                const ExperimentConfig& cfg) {
  namespace fs = std::filesystem;
  const RunReport& report = output.report;
  return stage("report", [&] {
    fs::path dir = cfg.output_dir;
    if (const char* env = std::getenv("LRT_OUTPUT_DIR")) dir = env;
    fs::create_directories(dir);
    std::vector<fs::path> written;

    if (cfg.write_json) {
      const fs::path p = dir / "report.json";
      atomic_write_file(p, report.to_json());
      written.push_back(p);
    }
    if (cfg.write_csv) {
      std::ostringstream csv;
      csv << "name,label,total,accuracy_percent\n";
      csv << "overall,," << report.eval.total << ','
          << fmt_double(report.eval.accuracy) << '\n';
      for (size_t c = 0; c < report.eval.class_labels.size(); ++c) {
        csv << "class" << report.eval.class_labels[c] << ','
            << report.eval.class_labels[c] << ',' << report.eval.per_class_total[c]
            << ',' << fmt_double(report.eval.per_class_accuracy[c]) << '\n';
      }
      const fs::path p = dir / "accuracy.csv";
      atomic_write_file(p, csv.str());
      written.push_back(p);
    }
    {
      std::ostringstream sum;
      sum << "method: " << report.method << '\n'
          << "seed: " << report.seed << '\n'
          << "train/test samples: " << report.train_samples << '/'
          << report.test_samples << " (" << report.classes << " classes)\n"
          << "train fingerprint: " << report.train_fingerprint << '\n'
          << "test fingerprint: " << report.test_fingerprint << '\n'
          << "accuracy: " << fmt_double(report.eval.accuracy) << "% ("
          << report.eval.correct << '/' << report.eval.total << ")\n"
          << "wall time: " << fmt_double(report.wall_time_ms) << " ms\n";
      if (!report.rpca_nonconverged.empty()) {
        sum << "rpca non-converged classes:";
        for (int c : report.rpca_nonconverged) sum << ' ' << c;
        sum << '\n';
      }
      const fs::path p = dir / "summary.txt";
      atomic_write_file(p, sum.str());
      written.push_back(p);
    }
    if (cfg.save_artifacts) {
      for (const auto& t : output.transforms) {
        std::string name = t.kind == TransformKind::Global
                               ? std::string("transform_global")
                               : "transform_class" + std::to_string(t.class_index);
        const fs::path p = dir / (name + ".lrt");
        save_transform(t, p);
        written.push_back(p);
      }
      if (cfg.learn.record_trace && cfg.learner != LearnerKind::None) {
        for (size_t i = 0; i < report.traces.size(); ++i) {
          std::string name = cfg.learner == LearnerKind::Global
                                 ? std::string("trace_global")
                                 : "trace_class" + std::to_string(i);
          const fs::path p = dir / (name + ".txt");
          save_trace(report.traces[i], p);
          written.push_back(p);
        }
      }
      if (output.model) {
        const fs::path p = dir / "model.lrm";
        save_model(*output.model, p);
        written.push_back(p);
      }
    }
    return written;
  });
}

RunOutput run_and_write(const ExperimentConfig& cfg) {
  RunOutput output = run_experiment_full(cfg);
  write_report(output, cfg);
  return output;
}

std::string compare_runs(const std::vector<RunReport>& reports) {
  if (reports.empty()) {
    throw std::invalid_argument("compare_runs: no reports given");
  }
  std::vector<bool> mismatched(reports.size(), false);
  for (size_t i = 1; i < reports.size(); ++i) {
    mismatched[i] =
        reports[i].train_fingerprint != reports[0].train_fingerprint ||
        reports[i].test_fingerprint != reports[0].test_fingerprint;
  }

  std::vector<int> all_labels;
  for (const auto& r : reports) {
    for (int l : r.eval.class_labels) {
      if (std::find(all_labels.begin(), all_labels.end(), l) ==
          all_labels.end()) {
        all_labels.push_back(l);
      }
    }
  }
  std::sort(all_labels.begin(), all_labels.end());

  std::ostringstream os;
  for (size_t i = 0; i < reports.size(); ++i) {
    if (mismatched[i]) {
      os << "warning: report " << i + 1 << " (" << reports[i].method
         << ") was produced on a different dataset split\n";
    }
  }

  std::vector<std::vector<std::string>> columns;
  {
    std::vector<std::string> head{"metric", "fingerprint", "accuracy"};
    for (int l : all_labels) head.push_back("class" + std::to_string(l));
    columns.push_back(std::move(head));
  }
  for (size_t i = 0; i < reports.size(); ++i) {
    const auto& r = reports[i];
    std::vector<std::string> col;
    col.push_back(r.method + (mismatched[i] ? " [mismatch]" : ""));
    col.push_back(r.train_fingerprint.substr(0, 8) + "/" +
                  r.test_fingerprint.substr(0, 8));
    col.push_back(fmt_double(r.eval.accuracy));
    for (int l : all_labels) {
      const auto it = std::find(r.eval.class_labels.begin(),
                                r.eval.class_labels.end(), l);
      col.push_back(it == r.eval.class_labels.end()
                        ? "-"
                        : fmt_double(r.eval.per_class_accuracy[static_cast<size_t>(
                              it - r.eval.class_labels.begin())]));
    }
    columns.push_back(std::move(col));
  }

  std::vector<size_t> widths(columns.size(), 0);
  for (size_t c = 0; c < columns.size(); ++c) {
    for (const auto& cell : columns[c]) {
      widths[c] = std::max(widths[c], cell.size());
    }
  }
  for (size_t row = 0; row < columns[0].size(); ++row) {
    for (size_t c = 0; c < columns.size(); ++c) {
      os << (c ? " | " : "") << pad(columns[c][row], widths[c]);
    }
    os << '\n';
  }
  return os.str();
}

}  // namespace lrt
