#include "litesearch/bench.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>
#include <thread>

#include "litesearch/hash.hpp"

namespace litesearch::bench {

namespace {

GenParams gen_params(const BackendSet& backends, const SearchConfig& config,
                     double temperature) {
  return GenParams{
      .demonstrations = backends.demonstrations,
      .temperature = temperature,
      .max_step_tokens = config.max_step_tokens,
      .max_depth = config.max_depth,
  };
}

uint64_t question_seed(uint64_t global_seed, const Question& q) {
  return mix(global_seed, kStreamQuestion, fnv1a(q.id));
}

std::string answer_to_string(const std::optional<Answer>& a) {
  return a ? a->text : "";
}

}  // namespace

std::vector<Question> load_dataset(const std::string& path) {
  std::ifstream in(path);
  if (!in) {
    throw IoError("cannot open dataset: " + path);
  }
  std::vector<Question> out;
  std::set<std::string> seen_ids;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    nlohmann::json j;
    try {
      j = nlohmann::json::parse(line);
    } catch (const nlohmann::json::exception& e) {
      throw ParseError("line " + std::to_string(line_no) + ": " + e.what());
    }
    auto field = [&](const char* name) -> const nlohmann::json& {
      if (!j.contains(name)) {
        throw ParseError("line " + std::to_string(line_no) + ": missing field \"" +
                         name + "\"");
      }
      return j.at(name);
    };
    Question q;
    const auto& id = field("id");
    q.id = id.is_string() ? id.get<std::string>() : id.dump();
    q.text = field("question").get<std::string>();
    const auto& answer = field("answer");
    std::string raw_answer = answer.is_string() ? answer.get<std::string>() : answer.dump();
    q.gold_answer = normalize_answer(raw_answer);
    if (!q.gold_answer) {
      throw ParseError("line " + std::to_string(line_no) + ": unparseable answer \"" +
                       raw_answer + "\"");
    }
    if (j.contains("table") && !j.at("table").is_null()) {
      q.table_context = j.at("table").get<std::string>();
    }
    if (!seen_ids.insert(q.id).second) {
      throw ParseError("line " + std::to_string(line_no) + ": duplicate id \"" + q.id +
                       "\"");
    }
    out.push_back(std::move(q));
  }
  return out;
}

namespace {

struct QuestionOutcome {
  std::vector<EvalRecord> records;    // one per method, method order
  std::vector<FailureRecord> failures;
  std::vector<std::string> trajectory_lines;
  double difficulty_value = -1.0;
};

QuestionOutcome evaluate_question(const Question& q,
                                  const std::vector<MethodSpec>& methods,
                                  const SearchConfig& config, const BackendSet& backends,
                                  const EvalOptions& options) {
  QuestionOutcome out;
  uint64_t qseed = question_seed(options.seed, q);
  for (const MethodSpec& spec : methods) {
    baselines::BaselineContext ctx{
        .policy = *backends.policy,
        .value = backends.value.get(),
        .config = config,
        .demonstrations = backends.demonstrations,
        .value_instruction = backends.value_instruction,
        .seed = qseed,
    };
    EvalRecord record;
    record.question_id = q.id;
    record.method = spec.name;
    try {
      baselines::MethodResult mr = baselines::run_method(spec, q, ctx);
      record.answer = mr.answer;
      record.correct = mr.answer && q.gold_answer &&
                       answers_equal(*mr.answer, *q.gold_answer);
      record.tokens = mr.tokens.generated_tokens;
      record.iterations = mr.iterations;
      record.per_step_values = mr.per_step_values;
      record.outcome = mr.outcome.empty() ? "answered" : mr.outcome;
      if (mr.outcome == "failed") {
        out.failures.push_back({q.id, spec.name, "backend failure"});
        record.outcome = "failed";
      }
      if (!options.trajectory_log_path.empty() && mr.trajectory) {
        nlohmann::json tj = trajectory_to_json(*mr.trajectory);
        tj["method"] = spec.name;
        tj["correct"] = record.correct;
        out.trajectory_lines.push_back(tj.dump());
      }
    } catch (const TransportError& e) {
      out.failures.push_back({q.id, spec.name, e.what()});
      record.outcome = "failed";
    } catch (const DegenerateOutputError& e) {
      out.failures.push_back({q.id, spec.name, e.what()});
      record.outcome = "failed";
    }
    out.records.push_back(std::move(record));
  }
  if (options.estimate_difficulty) {
    out.difficulty_value =
        difficulty(q, *backends.policy, gen_params(backends, config, config.temperature),
                   options.difficulty_samples, qseed);
  }
  return out;
}

}  // namespace

Report evaluate(const std::vector<MethodSpec>& methods,
                const std::vector<Question>& dataset, const SearchConfig& config,
                const BackendSet& backends, const EvalOptions& options) {
  if (methods.empty()) {
    throw InvalidInputError("evaluate needs at least one method");
  }
  for (const MethodSpec& m : methods) {
    if (m.needs_value_backend() && !backends.value) {
      throw InvalidInputError("method " + m.name + " needs a value backend");
    }
  }

  std::vector<QuestionOutcome> outcomes(dataset.size());
  int workers = std::max(1, options.workers);
  if (workers == 1) {
    for (size_t i = 0; i < dataset.size(); ++i) {
      outcomes[i] = evaluate_question(dataset[i], methods, config, backends, options);
    }
  } else {
    std::atomic<size_t> next{0};
    std::vector<std::thread> pool;
    pool.reserve(static_cast<size_t>(workers));
    for (int w = 0; w < workers; ++w) {
      pool.emplace_back([&] {
        for (size_t i = next.fetch_add(1); i < dataset.size(); i = next.fetch_add(1)) {
          outcomes[i] = evaluate_question(dataset[i], methods, config, backends, options);
        }
      });
    }
    for (std::thread& t : pool) t.join();
  }

  Report report;
  std::ofstream trajectory_log;
  if (!options.trajectory_log_path.empty()) {
    trajectory_log.open(options.trajectory_log_path);
    if (!trajectory_log) {
      throw IoError("cannot open trajectory log: " + options.trajectory_log_path);
    }
  }

  struct Accumulator {
    long long tokens = 0;
    int correct = 0;
    int n = 0;
  };
  std::map<std::string, Accumulator> by_method;
  std::map<int, std::map<std::string, std::pair<double, int>>> bucket_tokens;

  for (size_t i = 0; i < dataset.size(); ++i) {
    QuestionOutcome& qo = outcomes[i];
    for (EvalRecord& r : qo.records) {
      if (r.outcome != "failed") {
        Accumulator& acc = by_method[r.method];
        acc.tokens += r.tokens;
        acc.correct += r.correct ? 1 : 0;
        acc.n += 1;
        if (qo.difficulty_value >= 0.0) {
          int bucket = static_cast<int>(std::lround(qo.difficulty_value * 10.0));
          auto& [sum, count] = bucket_tokens[bucket][r.method];
          sum += static_cast<double>(r.tokens);
          count += 1;
        }
      }
      report.records.push_back(std::move(r));
    }
    for (FailureRecord& f : qo.failures) report.failures.push_back(std::move(f));
    for (const std::string& line : qo.trajectory_lines) trajectory_log << line << "\n";
  }

  for (const MethodSpec& m : methods) {
    const Accumulator& acc = by_method[m.name];
    MethodAggregate agg;
    agg.method = m.name;
    agg.n = acc.n;
    agg.total_tokens = acc.tokens;
    agg.accuracy = acc.n > 0 ? static_cast<double>(acc.correct) / acc.n : 0.0;
    agg.tokens_k = acc.n > 0 ? static_cast<double>(acc.tokens) / acc.n / 1000.0 : 0.0;
    report.methods.push_back(std::move(agg));
  }

  for (const auto& [bucket, per_method] : bucket_tokens) {
    DifficultyBucket b;
    b.difficulty = bucket / 10.0;
    int n = 0;
    for (const auto& [method, sum_count] : per_method) {
      b.mean_tokens_k[method] = sum_count.first / sum_count.second / 1000.0;
      n = std::max(n, sum_count.second);
    }
    b.n = n;
    report.difficulty_buckets.push_back(std::move(b));
  }

  // Brier curve over records that carry per-step values.
  std::vector<CalibrationRecord> calibration;
  for (const EvalRecord& r : report.records) {
    if (!r.per_step_values.empty()) {
      calibration.push_back({r.question_id, r.correct, r.per_step_values});
    }
  }
  report.brier = brier_by_step(calibration);
  return report;
}

std::vector<BrierPoint> brier_by_step(const std::vector<CalibrationRecord>& records) {
  size_t max_len = 0;
  for (const CalibrationRecord& r : records) {
    max_len = std::max(max_len, r.values.size());
  }
  std::vector<BrierPoint> curve;
  for (size_t i = 0; i < max_len; ++i) {
    double sum = 0.0;
    int n = 0;
    for (const CalibrationRecord& r : records) {
      if (r.values.size() <= i) continue;
      double err = r.values[i] - (r.correct ? 1.0 : 0.0);
      sum += err * err;
      n += 1;
    }
    if (n == 0) break;
    curve.push_back({static_cast<int>(i), sum / n, n});
  }
  return curve;
}

double difficulty(const Question& question, PolicyBackend& policy,
                  const GenParams& params, int samples, uint64_t seed) {
  if (samples < 1) throw InvalidInputError("difficulty needs samples >= 1");
  if (!question.gold_answer) {
    throw InvalidInputError("difficulty needs a gold answer");
  }
  int hits = 0;
  TokenLedger scratch;  // difficulty probing never bills a method ledger
  for (int j = 0; j < samples; ++j) {
    uint64_t s = mix(seed, kStreamDifficulty, static_cast<uint64_t>(j));
    Trajectory t = sample_trajectory(policy, question, params, s, scratch);
    if (t.extracted_answer && answers_equal(*t.extracted_answer, *question.gold_answer)) {
      ++hits;
    }
  }
  return 1.0 - static_cast<double>(hits) / samples;
}

std::vector<CalibrationRecord> collect_calibration_records(
    const std::vector<Question>& dataset, const BackendSet& backends,
    const SearchConfig& config, int samples, uint64_t seed) {
  if (!backends.value) {
    throw InvalidInputError("calibration records need a value backend");
  }
  std::vector<CalibrationRecord> records;
  records.reserve(dataset.size() * static_cast<size_t>(samples));
  GenParams params = gen_params(backends, config, config.temperature);
  TokenLedger scratch;
  for (const Question& q : dataset) {
    uint64_t qseed = question_seed(seed, q);
    for (int j = 0; j < samples; ++j) {
      uint64_t s = mix(qseed, kStreamCalibration, static_cast<uint64_t>(j));
      Trajectory t = sample_trajectory(*backends.policy, q, params, s, scratch);
      CalibrationRecord record;
      record.question_id = q.id;
      record.correct = t.extracted_answer && q.gold_answer &&
                       answers_equal(*t.extracted_answer, *q.gold_answer);
      Trajectory prefix;
      prefix.question = q;
      record.values.push_back(
          score_state(*backends.value, prefix, backends.value_instruction));
      for (const Step& step : t.steps) {
        prefix.steps.push_back(step);
        record.values.push_back(
            score_state(*backends.value, prefix, backends.value_instruction));
      }
      records.push_back(std::move(record));
    }
  }
  return records;
}

std::vector<CalibrationRecord> load_calibration_records(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open records file: " + path);
  std::vector<CalibrationRecord> out;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    try {
      nlohmann::json j = nlohmann::json::parse(line);
      CalibrationRecord r;
      r.question_id = j.value("question_id", "");
      r.correct = j.at("correct").get<bool>();
      r.values = j.at("values").get<std::vector<double>>();
      out.push_back(std::move(r));
    } catch (const nlohmann::json::exception& e) {
      throw ParseError("line " + std::to_string(line_no) + ": " + e.what());
    }
  }
  return out;
}

void write_calibration_records(const std::vector<CalibrationRecord>& records,
                               const std::string& path) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write records file: " + path);
  for (const CalibrationRecord& r : records) {
    nlohmann::json j{{"question_id", r.question_id}, {"correct", r.correct},
                     {"values", r.values}};
    out << j.dump() << "\n";
  }
}

ReportFormat parse_report_format(const std::string& name) {
  if (name == "json") return ReportFormat::json;
  if (name == "csv") return ReportFormat::csv;
  if (name == "markdown" || name == "md" || name == "markdown-table") {
    return ReportFormat::markdown;
  }
  throw InvalidInputError("unknown report format: " + name);
}

nlohmann::json report_to_json(const Report& report) {
  nlohmann::json j;
  j["config"] = report.config_snapshot;
  j["methods"] = nlohmann::json::array();
  for (const MethodAggregate& m : report.methods) {
    j["methods"].push_back({{"method", m.method},
                            {"accuracy", m.accuracy},
                            {"tokens_k", m.tokens_k},
                            {"n", m.n},
                            {"total_tokens", m.total_tokens}});
  }
  j["records"] = nlohmann::json::array();
  for (const EvalRecord& r : report.records) {
    j["records"].push_back({{"question_id", r.question_id},
                            {"method", r.method},
                            {"answer", answer_to_string(r.answer)},
                            {"correct", r.correct},
                            {"tokens", r.tokens},
                            {"iterations", r.iterations},
                            {"per_step_values", r.per_step_values},
                            {"outcome", r.outcome}});
  }
  j["failures"] = nlohmann::json::array();
  for (const FailureRecord& f : report.failures) {
    j["failures"].push_back(
        {{"question_id", f.question_id}, {"method", f.method}, {"error", f.error}});
  }
  j["brier"] = nlohmann::json::array();
  for (const BrierPoint& b : report.brier) {
    j["brier"].push_back({{"step", b.step}, {"brier", b.brier}, {"n", b.n}});
  }
  j["difficulty_buckets"] = nlohmann::json::array();
  for (const DifficultyBucket& d : report.difficulty_buckets) {
    j["difficulty_buckets"].push_back({{"difficulty", d.difficulty},
                                       {"n", d.n},
                                       {"mean_tokens_k", d.mean_tokens_k}});
  }
  return j;
}

Report report_from_json(const nlohmann::json& j) {
  Report report;
  report.config_snapshot = j.value("config", nlohmann::json::object());
  for (const auto& m : j.value("methods", nlohmann::json::array())) {
    MethodAggregate agg;
    agg.method = m.at("method").get<std::string>();
    agg.accuracy = m.at("accuracy").get<double>();
    agg.tokens_k = m.at("tokens_k").get<double>();
    agg.n = m.at("n").get<int>();
    agg.total_tokens = m.value("total_tokens", 0LL);
    report.methods.push_back(std::move(agg));
  }
  for (const auto& r : j.value("records", nlohmann::json::array())) {
    EvalRecord record;
    record.question_id = r.at("question_id").get<std::string>();
    record.method = r.at("method").get<std::string>();
    std::string answer = r.value("answer", "");
    if (!answer.empty()) record.answer = normalize_answer(answer);
    record.correct = r.at("correct").get<bool>();
    record.tokens = r.at("tokens").get<long long>();
    record.iterations = r.value("iterations", 0);
    record.per_step_values = r.value("per_step_values", std::vector<double>{});
    record.outcome = r.value("outcome", "");
    report.records.push_back(std::move(record));
  }
  for (const auto& f : j.value("failures", nlohmann::json::array())) {
    report.failures.push_back({f.at("question_id").get<std::string>(),
                               f.at("method").get<std::string>(),
                               f.value("error", "")});
  }
  for (const auto& b : j.value("brier", nlohmann::json::array())) {
    report.brier.push_back(
        {b.at("step").get<int>(), b.at("brier").get<double>(), b.value("n", 0)});
  }
  for (const auto& d : j.value("difficulty_buckets", nlohmann::json::array())) {
    DifficultyBucket bucket;
    bucket.difficulty = d.at("difficulty").get<double>();
    bucket.n = d.value("n", 0);
    bucket.mean_tokens_k =
        d.value("mean_tokens_k", std::map<std::string, double>{});
    report.difficulty_buckets.push_back(std::move(bucket));
  }
  return report;
}

void emit_report(const Report& report, ReportFormat format, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write report: " + path);
  switch (format) {
    case ReportFormat::json:
      out << report_to_json(report).dump(2) << "\n";
      break;
    case ReportFormat::csv: {
      out << "method,accuracy,tokens_k,n\n";
      char line[256];
      for (const MethodAggregate& m : report.methods) {
        std::snprintf(line, sizeof(line), "%s,%.4f,%.2f,%d\n", m.method.c_str(),
                      m.accuracy, m.tokens_k, m.n);
        out << line;
      }
      break;
    }
    case ReportFormat::markdown: {
      out << "| Method | Accuracy ↑ | Tokens (k) ↓ | N |\n";
      out << "|---|---|---|---|\n";
      char line[256];
      for (const MethodAggregate& m : report.methods) {
        std::snprintf(line, sizeof(line), "| %s | %.3f | %.2f | %d |\n",
                      m.method.c_str(), m.accuracy, m.tokens_k, m.n);
        out << line;
      }
      break;
    }
  }
  if (!out) throw IoError("failed while writing report: " + path);
}

}  // namespace litesearch::bench
