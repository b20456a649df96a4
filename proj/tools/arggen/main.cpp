#include <CLI11.hpp>
#include <nlohmann/json.hpp>
#include <spdlog/sinks/stdout_color_sinks.h>
#include <spdlog/spdlog.h>

#include <iostream>
#include <map>
#include <optional>
#include <string>

#include "arggen/error.hpp"
#include "settings.hpp"
#include "stages.hpp"
#include "work_dir_lock.hpp"

namespace {

void report_error(std::string_view code, std::string_view message) {
  std::cerr << nlohmann::json{{"error", code}, {"message", message}}.dump() << std::endl;
}

}  // namespace

int main(int argc, char** argv) {
  using namespace arggen::cli;

  CLI::App app{"arggen: legal argument generation pipeline"};
  app.require_subcommand(1);

  std::string config_file;
  app.add_option("--config", config_file, "JSON settings file; flags override its values")->check(CLI::ExistingFile);

  // Every setting is a same-named flag; only flags actually given override the config.
  std::map<std::string, std::string> raw;
  std::map<std::string, CLI::Option*> options;
  for (const auto& spec : setting_specs()) {
    const auto name = flag_name(spec.key);
    if (spec.default_value.is_boolean()) {
      options[spec.key] = app.add_flag_callback(name, [&raw, key = spec.key] { raw[key] = "true"; }, spec.help);
    } else {
      options[spec.key] = app.add_option_function<std::string>(
          name, [&raw, key = spec.key](const std::string& v) { raw[key] = v; }, spec.help);
    }
  }

  auto* synth = app.add_subcommand("synth", "write the bundled synthetic corpus");
  std::string synth_out = "data/synthetic";
  synth->add_option("--out", synth_out, "output directory");

  const std::vector<std::pair<std::string, std::string>> stage_names = {
      {"ingest", "load the gold and auto corpora and assign train/validation/test splits"},
      {"label", "assign rhetorical roles to every sentence"},
      {"build-pairs", "summarize facts and ratio into fact-argument pairs"},
      {"rewrite", "clean the pair texts with a rewrite backend"},
      {"review", "approve or reject rewrites"},
      {"train", "fine-tune a model adapter"},
      {"generate", "generate arguments for the test pairs"},
      {"evaluate", "score generations against the references"},
  };
  std::map<std::string, CLI::App*> stages;
  for (const auto& [name, help] : stage_names) stages[name] = app.add_subcommand(name, help);
  for (auto* sub : app.get_subcommands({})) sub->fallthrough();

  ReviewOptions review;
  auto* review_cmd = stages["review"];
  auto* approve_all = review_cmd->add_flag("--approve-all", "approve every pending record");
  auto* reject_all = review_cmd->add_flag("--reject-all", "reject every pending record");
  approve_all->excludes(reject_all);
  review_cmd->add_option("--note", review.note, "reviewer note stored with each decision");

  ReportOptions report;
  auto* report_cmd = app.add_subcommand("report", "render the comparison table for several runs");
  report_cmd->add_option("runs,--runs", report.runs, "run directories");
  report_cmd->add_option("--format", report.format, "stdout format: text|csv|latex");
  report_cmd->add_option("--csv", report.csv, "also write the CSV table here");
  report_cmd->add_option("--latex", report.latex, "also write the LaTeX table here");
  report_cmd->fallthrough();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    report_error("UsageError", e.what());
    return 2;
  }

  try {
    auto settings = merge_settings(config_file.empty() ? std::nullopt
                                                       : std::optional<std::filesystem::path>(config_file),
                                   raw);
    auto config = pipeline_config(settings);

    auto logger = spdlog::stderr_color_mt("arggen");
    spdlog::set_default_logger(logger);
    spdlog::set_level(spdlog::level::from_str(config.log_level));

    if (synth->parsed()) {
      run_synth(synth_out, config.seed, std::cout);
      return 0;
    }
    if (report_cmd->parsed()) {
      run_report(report, std::cout);
      return 0;
    }

    WorkDirLock lock(config.work_dir);
    if (stages["ingest"]->parsed()) run_ingest(config, std::cout);
    else if (stages["label"]->parsed()) run_label(config, std::cout);
    else if (stages["build-pairs"]->parsed()) run_build_pairs(config, std::cout);
    else if (stages["rewrite"]->parsed()) run_rewrite(config, std::cout);
    else if (stages["review"]->parsed()) {
      if (*approve_all) review.mode = ReviewOptions::Mode::ApproveAll;
      if (*reject_all) review.mode = ReviewOptions::Mode::RejectAll;
      run_review(config, review, std::cin, std::cout);
    } else if (stages["train"]->parsed()) run_train(config, std::cout);
    else if (stages["generate"]->parsed()) run_generate(config, std::cout);
    else if (stages["evaluate"]->parsed()) run_evaluate(config, std::cout);
    return 0;
  } catch (const arggen::Error& e) {
    report_error(arggen::to_string(e.code()), e.what());
  } catch (const std::exception& e) {
    report_error("InternalError", e.what());
  }
  return 1;
}
