#include <csignal>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include "CLI11.hpp"
#include "futureyou/experiment_harness.hpp"
#include "futureyou/life_story.hpp"
#include "futureyou/measures.hpp"
#include "futureyou/memory_engine.hpp"
#include "futureyou/service/config.hpp"
#include "futureyou/service/http.hpp"
#include "futureyou/service/simulate.hpp"

namespace fy = futureyou;

namespace {

httplib::Server* g_server = nullptr;

void stop_server(int) {
  if (g_server != nullptr) g_server->stop();
}

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw fy::Error("cannot read " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file(const std::filesystem::path& path, const std::string& text) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  out << text;
  if (!out) throw fy::Error("cannot write " + path.string());
}

void emit(const std::string& out_path, const std::string& text) {
  if (out_path.empty() || out_path == "-") {
    std::cout << text;
  } else {
    write_file(out_path, text);
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Future You study service and analysis tools"};
  app.require_subcommand(1);

  auto* serve = app.add_subcommand("serve", "Run the HTTP service");
  std::string config_path;
  int port_override = -1;
  serve->add_option("--config", config_path, "INI config file")->required()->check(CLI::ExistingFile);
  serve->add_option("--port", port_override, "Override server.port");

  auto* report = app.add_subcommand("report", "Build the results table from an exported deltas CSV");
  std::string input, report_out;
  bool as_json = false, keep_excluded = false, per_group = false;
  double alpha = 0.05;
  report->add_option("--input", input, "Deltas CSV from /export.csv or simulate")->required()->check(CLI::ExistingFile);
  report->add_option("--out", report_out, "Output path (default stdout)");
  report->add_flag("--json", as_json, "Emit JSON instead of the text table");
  report->add_flag("--keep-excluded", keep_excluded, "Do not drop flagged participants");
  report->add_flag("--per-group-normality", per_group, "Shapiro-Wilk per group instead of pooled residuals");
  report->add_option("--alpha", alpha, "Significance level")->check(CLI::Range(0.0, 1.0));

  auto* simulate = app.add_subcommand("simulate", "Run synthetic participants through the service");
  fy::service::SimulationOptions sim;
  std::string sim_out;
  simulate->add_option("--n", sim.participants, "Participants")->check(CLI::PositiveNumber);
  simulate->add_option("--seed", sim.seed, "Seed");
  simulate->add_option("--flagged", sim.flagged, "Participants failing an attention check or reporting an issue");
  simulate->add_option("--out", sim_out, "Deltas CSV path (default stdout)");

  auto* defaults = app.add_subcommand("defaults", "Write the built-in content files");
  std::string defaults_dir;
  defaults->add_option("--out-dir", defaults_dir, "Directory for the JSON files")->required();

  CLI11_PARSE(app, argc, argv);

  try {
    if (*serve) {
      auto config = fy::service::load_config(config_path);
      if (port_override >= 0) config.server.port = port_override;
      fy::service::Runtime runtime(config);
      httplib::Server server;
      g_server = &server;
      std::signal(SIGINT, stop_server);
      std::signal(SIGTERM, stop_server);
      std::cerr << "listening on " << config.server.host << ":" << config.server.port << "\n";
      if (!fy::service::serve(runtime, server)) {
        std::cerr << "cannot listen on " << config.server.host << ":" << config.server.port << "\n";
        return 1;
      }
      return 0;
    }
    if (*report) {
      auto rows = fy::harness::read_deltas_csv(read_file(input));
      const auto total = rows.size();
      if (!keep_excluded) rows = fy::harness::drop_excluded(rows);
      fy::harness::ReportOptions options;
      options.analysis.alpha = alpha;
      if (per_group) options.analysis.normality = fy::stats::NormalityMode::per_group;
      const auto table = fy::harness::build_report(rows, options);
      emit(report_out, as_json ? fy::harness::to_json(table).dump(2) + "\n" : fy::harness::render_text(table));
      std::cerr << "participants: " << total << ", analysed: " << rows.size() << ", excluded: " << total - rows.size()
                << "\n";
      return 0;
    }
    if (*simulate) {
      const auto result = fy::service::simulate_study(sim);
      emit(sim_out, result.deltas_csv);
      const auto excl = fy::harness::apply_exclusions(result.records);
      std::cerr << "participants: " << result.records.size() << ", kept: " << excl.kept.size()
                << ", excluded: " << excl.excluded.size() << "\n";
      return 0;
    }
    if (*defaults) {
      const std::filesystem::path dir = defaults_dir;
      write_file(dir / "question_schema.json", fy::life_story::QuestionSchema::default_schema().to_json().dump(2) + "\n");
      write_file(dir / "probing_topics.json", fy::memory::ProbingCatalog::defaults().to_json().dump(2) + "\n");
      write_file(dir / "instruments.json", fy::measures::Instrument::defaults().to_json().dump(2) + "\n");
      return 0;
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
