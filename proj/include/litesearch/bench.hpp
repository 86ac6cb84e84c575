#pragma once

#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "litesearch/baselines.hpp"
#include "litesearch/search.hpp"

namespace litesearch::bench {

using baselines::MethodSpec;

struct BackendSet {
  std::shared_ptr<PolicyBackend> policy;
  std::shared_ptr<ValueBackend> value;  // may be null for value-free methods
  std::vector<Demonstration> demonstrations;
  std::string value_instruction;
};

struct EvalRecord {
  std::string question_id;
  std::string method;
  std::optional<Answer> answer;
  bool correct = false;
  long long tokens = 0;
  int iterations = 0;
  std::vector<double> per_step_values;
  std::string outcome;
};

struct FailureRecord {
  std::string question_id;
  std::string method;
  std::string error;
};

struct MethodAggregate {
  std::string method;
  double accuracy = 0.0;
  double tokens_k = 0.0;  // mean generated tokens per question, in thousands
  int n = 0;              // questions evaluated (failures excluded)
  long long total_tokens = 0;
};

struct BrierPoint {
  int step = 0;
  double brier = 0.0;
  int n = 0;
};

/// One trajectory-level calibration record: prefix values (index i = value
/// after i steps) against final correctness.
struct CalibrationRecord {
  std::string question_id;
  bool correct = false;
  std::vector<double> values;
};

struct DifficultyBucket {
  double difficulty = 0.0;  // bucket center, 0.0 .. 1.0 in steps of 0.1
  int n = 0;
  std::map<std::string, double> mean_tokens_k;  // per method
};

struct Report {
  nlohmann::json config_snapshot;
  std::vector<MethodAggregate> methods;
  std::vector<EvalRecord> records;
  std::vector<FailureRecord> failures;
  std::vector<BrierPoint> brier;                    // filled when records carry values
  std::vector<DifficultyBucket> difficulty_buckets; // filled when difficulty was estimated
};

/// Loads a JSON-lines dataset: one {id, question, answer, table?} record
/// per line. Malformed lines and duplicate ids raise ParseError naming the
/// line number.
std::vector<Question> load_dataset(const std::string& path);

struct EvalOptions {
  int workers = 1;
  uint64_t seed = 0;
  bool estimate_difficulty = false;
  int difficulty_samples = 20;
  std::string trajectory_log_path;  // optional JSONL drill-down sink
};

/**
 * Paired evaluation: every method sees the same per-question random stream
 * (seeds derive from the question id, never from arrival order), so
 * cross-method comparisons are paired and reports are byte-identical for a
 * given seed regardless of the worker count. Per-question transport
 * failures are recorded and excluded from both the accuracy numerator and
 * denominator.
 */
Report evaluate(const std::vector<MethodSpec>& methods,
                const std::vector<Question>& dataset, const SearchConfig& config,
                const BackendSet& backends, const EvalOptions& options);

/// Mean squared error between prefix values and final correctness, per
/// step index, over records long enough to reach that index.
std::vector<BrierPoint> brier_by_step(const std::vector<CalibrationRecord>& records);

/// Fraction of sampled solutions missing the gold answer: 1 - hits/n at
/// temperature 0.6. Independent of any method configuration.
double difficulty(const Question& question, PolicyBackend& policy,
                  const GenParams& params, int samples, uint64_t seed);

/// Samples `samples` trajectories per question, scores every prefix, and
/// returns calibration records (the drill-down behind the Brier curve).
std::vector<CalibrationRecord> collect_calibration_records(
    const std::vector<Question>& dataset, const BackendSet& backends,
    const SearchConfig& config, int samples, uint64_t seed);

std::vector<CalibrationRecord> load_calibration_records(const std::string& path);
void write_calibration_records(const std::vector<CalibrationRecord>& records,
                               const std::string& path);

enum class ReportFormat { json, csv, markdown };

ReportFormat parse_report_format(const std::string& name);

/// json: complete, machine-readable, round-trips. csv: fixed header
/// "method,accuracy,tokens_k,n". markdown: one row per method with the
/// Accuracy-up / Tokens-down columns.
void emit_report(const Report& report, ReportFormat format, const std::string& path);

nlohmann::json report_to_json(const Report& report);
Report report_from_json(const nlohmann::json& j);

}  // namespace litesearch::bench
