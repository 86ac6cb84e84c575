// Command-line benchmark runner: evaluates search methods over JSONL
// datasets or the synthetic suite, and emits reports, Brier curves, and
// difficulty estimates.

#include <cstdio>
#include <fstream>
#include <iostream>
#include <memory>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "litesearch/bench.hpp"
#include "litesearch/config.hpp"
#include "litesearch/hash.hpp"

namespace {

using namespace litesearch;

struct DataArgs {
  std::string dataset_path;
  std::string synthetic_spec;
};

void add_data_options(CLI::App* cmd, DataArgs& args) {
  auto* dataset = cmd->add_option("--dataset", args.dataset_path,
                                  "JSONL dataset: one {id, question, answer, table?} per line");
  auto* synthetic = cmd->add_option("--synthetic", args.synthetic_spec,
                                    "Synthetic suite spec, e.g. L=4,q=0.7,sigma=0.15,n=200,seed=7");
  dataset->excludes(synthetic);
}

struct LoadedData {
  std::vector<Question> questions;
  std::shared_ptr<synthetic::SyntheticSuite> suite;
};

LoadedData load_data(const DataArgs& args, AppConfig& config) {
  LoadedData data;
  if (!args.synthetic_spec.empty()) {
    data.suite = synthetic::make_suite(synthetic::parse_suite_spec(args.synthetic_spec));
    data.questions = data.suite->questions();
    config.backend_kind = AppConfig::BackendKind::synthetic;
  } else if (!args.dataset_path.empty()) {
    data.questions = bench::load_dataset(args.dataset_path);
  } else {
    throw InvalidInputError("provide --dataset or --synthetic");
  }
  return data;
}

AppConfig load_app_config(const std::string& path) {
  if (path.empty()) {
    AppConfig config;
    apply_env_overrides(config);
    return config;
  }
  return load_config(path);
}

int run_evaluation(const std::vector<std::string>& method_names, const DataArgs& data_args,
                   const std::string& config_path, const std::string& out_path,
                   const std::string& format_name, int workers, int64_t seed_override,
                   bool with_difficulty, const std::string& trajectory_log) {
  AppConfig config = load_app_config(config_path);
  if (seed_override >= 0) config.seed = static_cast<uint64_t>(seed_override);
  LoadedData data = load_data(data_args, config);
  bench::BackendSet backends = make_backends(config, data.suite);

  std::vector<bench::MethodSpec> methods;
  for (const std::string& name : method_names) {
    methods.push_back(baselines::parse_method(name));
  }

  bench::EvalOptions options;
  options.workers = workers;
  options.seed = config.seed;
  options.estimate_difficulty = with_difficulty;
  options.trajectory_log_path = trajectory_log;

  bench::Report report =
      bench::evaluate(methods, data.questions, config.search, backends, options);
  report.config_snapshot = config_to_json(config);

  bench::emit_report(report, bench::parse_report_format(format_name), out_path);
  for (const bench::MethodAggregate& m : report.methods) {
    std::printf("%-28s accuracy %.3f   tokens(k) %.2f   n %d\n", m.method.c_str(),
                m.accuracy, m.tokens_k, m.n);
  }
  if (!report.failures.empty()) {
    std::printf("%zu question/method pairs failed on transport; see report\n",
                report.failures.size());
  }
  std::printf("report written to %s\n", out_path.c_str());
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Value-guided tree search benchmark harness"};
  app.require_subcommand(1);

  // run: one method
  auto* run_cmd = app.add_subcommand("run", "Evaluate a single method");
  DataArgs run_data;
  add_data_options(run_cmd, run_data);
  std::string run_method = "litesearch";
  std::string run_config, run_out = "report.json", run_format = "json";
  std::string run_node_log, run_traj_log;
  int run_workers = 1;
  int64_t run_seed = -1;
  bool run_difficulty = false;
  run_cmd->add_option("--method", run_method, "Method name, e.g. litesearch, hard_vote@20");
  run_cmd->add_option("--config", run_config, "JSON config path");
  run_cmd->add_option("--out", run_out, "Report output path");
  run_cmd->add_option("--format", run_format, "json | csv | markdown");
  run_cmd->add_option("--workers", run_workers, "Parallel question workers");
  run_cmd->add_option("--seed", run_seed, "Override the config seed");
  run_cmd->add_option("--trajectory-log", run_traj_log, "JSONL drill-down of result trajectories");
  run_cmd->add_flag("--difficulty", run_difficulty, "Also estimate question difficulty");

  // compare: several methods, paired seeds
  auto* cmp_cmd = app.add_subcommand("compare", "Evaluate several methods with paired seeds");
  DataArgs cmp_data;
  add_data_options(cmp_cmd, cmp_data);
  std::string cmp_methods = "greedy,litesearch";
  std::string cmp_config, cmp_out = "report.json", cmp_format = "json";
  std::string cmp_traj_log;
  int cmp_workers = 1;
  int64_t cmp_seed = -1;
  bool cmp_difficulty = false;
  cmp_cmd->add_option("--methods", cmp_methods, "Comma-separated method names");
  cmp_cmd->add_option("--config", cmp_config, "JSON config path");
  cmp_cmd->add_option("--out", cmp_out, "Report output path");
  cmp_cmd->add_option("--format", cmp_format, "json | csv | markdown");
  cmp_cmd->add_option("--workers", cmp_workers, "Parallel question workers");
  cmp_cmd->add_option("--seed", cmp_seed, "Override the config seed");
  cmp_cmd->add_option("--trajectory-log", cmp_traj_log, "JSONL drill-down of result trajectories");
  cmp_cmd->add_flag("--difficulty", cmp_difficulty, "Also estimate question difficulty");

  // calibration: Brier-by-step analysis
  auto* cal_cmd = app.add_subcommand("calibration", "Brier-by-step curve from records");
  DataArgs cal_data;
  std::string cal_records, cal_out = "brier.csv", cal_config, cal_records_out;
  int cal_samples = 20;
  int64_t cal_seed = -1;
  cal_cmd->add_option("--records", cal_records,
                      "JSONL records {question_id, correct, values:[...]}");
  add_data_options(cal_cmd, cal_data);
  cal_cmd->add_option("--samples", cal_samples, "Sampled trajectories per question");
  cal_cmd->add_option("--config", cal_config, "JSON config path");
  cal_cmd->add_option("--out", cal_out, "Output CSV path");
  cal_cmd->add_option("--records-out", cal_records_out, "Also write the generated records");
  cal_cmd->add_option("--seed", cal_seed, "Override the config seed");

  // difficulty: per-question difficulty estimates
  auto* diff_cmd = app.add_subcommand("difficulty", "Estimate per-question difficulty");
  DataArgs diff_data;
  add_data_options(diff_cmd, diff_data);
  std::string diff_config, diff_out = "diff.csv";
  int diff_samples = 20;
  int64_t diff_seed = -1;
  diff_cmd->add_option("--samples", diff_samples, "Sampled paths per question");
  diff_cmd->add_option("--config", diff_config, "JSON config path");
  diff_cmd->add_option("--out", diff_out, "Output CSV path");
  diff_cmd->add_option("--seed", diff_seed, "Override the config seed");

  CLI11_PARSE(app, argc, argv);

  try {
    if (run_cmd->parsed()) {
      return run_evaluation({run_method}, run_data, run_config, run_out, run_format,
                            run_workers, run_seed, run_difficulty, run_traj_log);
    }
    if (cmp_cmd->parsed()) {
      std::vector<std::string> names;
      std::stringstream ss(cmp_methods);
      for (std::string item; std::getline(ss, item, ',');) {
        if (!item.empty()) names.push_back(item);
      }
      return run_evaluation(names, cmp_data, cmp_config, cmp_out, cmp_format,
                            cmp_workers, cmp_seed, cmp_difficulty, cmp_traj_log);
    }
    if (cal_cmd->parsed()) {
      std::vector<bench::CalibrationRecord> records;
      if (!cal_records.empty()) {
        records = bench::load_calibration_records(cal_records);
      } else {
        AppConfig config = load_app_config(cal_config);
        if (cal_seed >= 0) config.seed = static_cast<uint64_t>(cal_seed);
        LoadedData data = load_data(cal_data, config);
        bench::BackendSet backends = make_backends(config, data.suite);
        records = bench::collect_calibration_records(data.questions, backends,
                                                     config.search, cal_samples,
                                                     config.seed);
        if (!cal_records_out.empty()) {
          bench::write_calibration_records(records, cal_records_out);
        }
      }
      std::vector<bench::BrierPoint> curve = bench::brier_by_step(records);
      std::ofstream out(cal_out);
      if (!out) throw IoError("cannot write " + cal_out);
      out << "step,brier,n\n";
      for (const bench::BrierPoint& p : curve) {
        out << p.step << "," << p.brier << "," << p.n << "\n";
      }
      std::printf("%zu records -> %zu curve points -> %s\n", records.size(),
                  curve.size(), cal_out.c_str());
      return 0;
    }
    if (diff_cmd->parsed()) {
      AppConfig config = load_app_config(diff_config);
      if (diff_seed >= 0) config.seed = static_cast<uint64_t>(diff_seed);
      LoadedData data = load_data(diff_data, config);
      bench::BackendSet backends = make_backends(config, data.suite);
      std::ofstream out(diff_out);
      if (!out) throw IoError("cannot write " + diff_out);
      out << "question_id,difficulty\n";
      GenParams params{
          .demonstrations = backends.demonstrations,
          .temperature = config.search.temperature,
          .max_step_tokens = config.search.max_step_tokens,
          .max_depth = config.search.max_depth,
      };
      for (const Question& q : data.questions) {
        uint64_t qseed = mix(config.seed, kStreamQuestion, fnv1a(q.id));
        double d = bench::difficulty(q, *backends.policy, params, diff_samples, qseed);
        out << q.id << "," << d << "\n";
      }
      std::printf("difficulty for %zu questions -> %s\n", data.questions.size(),
                  diff_out.c_str());
      return 0;
    }
  } catch (const Error& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
  return 0;
}
