#include "lrt/experiment.hpp"
#include "lrt/serialization.hpp"

#include <CLI11.hpp>

#include <fstream>
#include <iostream>
#include <sstream>

namespace {

std::string slurp(const std::string& file) {
  std::ifstream in(file);
  if (!in) throw std::runtime_error("cannot open '" + file + "'");
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"lrt: discriminative low-rank transformation experiments"};
  app.require_subcommand(1);

  std::string config_file;
  auto* run = app.add_subcommand("run", "Run an experiment from a config file");
  run->add_option("config", config_file, "experiment config document")
      ->required()
      ->check(CLI::ExistingFile);

  std::vector<std::string> report_files;
  std::string compare_out;
  auto* compare =
      app.add_subcommand("compare", "Align accuracies of several run reports");
  compare->add_option("reports", report_files, "report.json files")
      ->required()
      ->check(CLI::ExistingFile);
  compare->add_option("-o,--out", compare_out, "also write the table here");

  std::vector<std::string> container_files;
  auto* inspect = app.add_subcommand(
      "inspect", "Describe transform/dataset/model container files");
  inspect->add_option("files", container_files)
      ->required()
      ->check(CLI::ExistingFile);

  CLI11_PARSE(app, argc, argv);

  try {
    if (run->parsed()) {
      const lrt::ExperimentConfig cfg = lrt::load_config(config_file);
      const lrt::RunOutput output = lrt::run_and_write(cfg);
      const auto& r = output.report;
      std::cout << r.method << ": accuracy " << r.eval.accuracy << "% ("
                << r.eval.correct << "/" << r.eval.total << "), "
                << r.classes << " classes, seed " << r.seed << "\n";
      if (!r.rpca_nonconverged.empty()) {
        std::cout << "note: RPCA did not converge for "
                  << r.rpca_nonconverged.size() << " class(es)\n";
      }
    } else if (compare->parsed()) {
      std::vector<lrt::RunReport> reports;
      for (const auto& f : report_files) {
        reports.push_back(lrt::RunReport::from_json_text(slurp(f)));
      }
      const std::string table = lrt::compare_runs(reports);
      std::cout << table;
      if (!compare_out.empty()) lrt::atomic_write_file(compare_out, table);
    } else if (inspect->parsed()) {
      for (const auto& f : container_files) {
        std::cout << f << ":\n" << lrt::describe_container(f);
      }
    }
  } catch (const std::exception& e) {
    std::cerr << "error " << e.what() << "\n";
    return 1;
  }
  return 0;
}
