#include "itest/reporter.hpp"

#include <cmath>
#include <fstream>

#include <fmt/format.h>

namespace itest {
namespace {

constexpr std::size_t kRuleWidth = 72;

std::string rule(std::string_view title, char fill = '=') {
  std::string middle = title.empty() ? std::string() : fmt::format(" {} ", title);
  std::size_t side = middle.size() >= kRuleWidth ? 0 : (kRuleWidth - middle.size()) / 2;
  std::string line = std::string(side, fill) + middle;
  line += std::string(kRuleWidth > line.size() ? kRuleWidth - line.size() : 0, fill);
  return line + "\n";
}

std::string status_label(Status s) {
  switch (s) {
    case Status::SkippedDisabled: return "SKIPPED (disabled)";
    case Status::SkippedAssumption: return "SKIPPED (assumption)";
    default: return std::string(to_string(s));
  }
}

std::string case_label(const TestOutcome& o) {
  if (o.display_name == o.case_id) return o.case_id;
  return fmt::format("{} {}", o.case_id, o.display_name);
}

std::string location_label(const CollectionError& e) {
  return e.line ? fmt::format("{}:{}", e.path, *e.line) : e.path;
}

std::string indent_lines(std::string_view text, std::string_view prefix) {
  std::string out;
  std::size_t pos = 0;
  while (pos < text.size()) {
    std::size_t nl = text.find('\n', pos);
    if (nl == std::string_view::npos) nl = text.size();
    out += fmt::format("{}{}\n", prefix, text.substr(pos, nl - pos));
    pos = nl + 1;
  }
  return out;
}

double round_ms(double seconds) { return std::round(seconds * 1000.0) / 1000.0; }

}  // namespace

Totals Report::totals() const {
  Totals t;
  for (const auto& o : outcomes) {
    switch (o.status) {
      case Status::Passed: ++t.passed; break;
      case Status::Failed: ++t.failed; break;
      case Status::SkippedDisabled: ++t.skipped_disabled; break;
      case Status::SkippedAssumption: ++t.skipped_assumption; break;
      case Status::Timeout: ++t.timeout; break;
      case Status::Error: ++t.error; break;
    }
  }
  for (const auto& e : collection_errors) {
    if (e.fatal) ++t.collection_errors;
  }
  return t;
}

std::string summary_line(const Report& report) {
  Totals t = report.totals();
  return fmt::format("{} passed, {} failed, {} skipped, {} timeout, {} errors in {:.2f}s", t.passed, t.failed,
                     t.skipped(), t.timeout, t.error + t.collection_errors, report.wall_time_s);
}

std::string render_terminal(const Report& report, bool verbose) {
  std::string out;
  out += fmt::format("itest-runner {}: {} inline test{} from {} file{}\n", kToolVersion, report.outcomes.size(),
                     report.outcomes.size() == 1 ? "" : "s", report.files_scanned,
                     report.files_scanned == 1 ? "" : "s");
  if (!report.outcomes.empty()) out += "\n";
  for (const auto& o : report.outcomes) {
    out += fmt::format("{} {}", case_label(o), status_label(o.status));
    if (verbose && o.status != Status::SkippedDisabled) {
      out += fmt::format(" ({:.2f}s, {} run{})", o.duration_s, o.repetitions_run, o.repetitions_run == 1 ? "" : "s");
    }
    out += "\n";
  }

  bool any_error = !report.collection_errors.empty();
  for (const auto& o : report.outcomes) any_error = any_error || o.status == Status::Error;
  if (any_error) {
    out += "\n" + rule("ERRORS");
    for (const auto& e : report.collection_errors) {
      out += fmt::format("{} {}: {}\n", location_label(e), e.reason, e.message);
    }
    for (const auto& o : report.outcomes) {
      if (o.status != Status::Error) continue;
      out += rule(case_label(o), '_');
      std::string detail = o.error_detail.value_or("");
      if (!verbose) {
        // The exception line is the last line of the interpreter's output.
        std::size_t nl = detail.find_last_of('\n');
        if (nl != std::string::npos) detail = detail.substr(nl + 1);
      }
      out += indent_lines(detail, "E   ");
    }
  }

  bool any_failure = false;
  for (const auto& o : report.outcomes) any_failure = any_failure || o.status == Status::Failed;
  if (any_failure) {
    out += "\n" + rule("FAILURES");
    for (const auto& o : report.outcomes) {
      if (o.status != Status::Failed || !o.failure) continue;
      const FailureRecord& f = *o.failure;
      out += rule(case_label(o), '_');
      out += indent_lines(f.check, "    ");
      if (f.expected_repr) out += indent_lines(*f.expected_repr, "E   expected: ");
      out += indent_lines(f.actual_repr, "E   actual:   ");
      if (o.repetitions_run > 1) out += fmt::format("E   (repetition {} of the run)\n", f.repetition + 1);
    }
  }

  bool any_timeout = false;
  for (const auto& o : report.outcomes) any_timeout = any_timeout || o.status == Status::Timeout;
  if (any_timeout) {
    out += "\n" + rule("TIMEOUTS");
    for (const auto& o : report.outcomes) {
      if (o.status == Status::Timeout) out += fmt::format("{}: still running after its time limit\n", case_label(o));
    }
  }

  if (!report.warnings.empty()) {
    out += "\n" + rule("WARNINGS");
    for (const auto& w : report.warnings) {
      out += fmt::format("{}:{}: {}\n", w.location.path, w.location.line, w.message);
    }
  }
  out += "\n" + summary_line(report) + "\n";
  return out;
}

std::string render_listing(const std::vector<TestCase>& cases, const std::vector<CollectionError>& errors,
                           const std::vector<Warning>& warnings) {
  std::string out;
  for (const auto& c : cases) {
    out += c.id;
    if (c.display_name != c.id) out += " " + c.display_name;
    if (!c.tags.empty()) out += fmt::format(" [{}]", fmt::join(c.tags, ", "));
    if (c.disabled) out += " (disabled)";
    out += "\n";
  }
  for (const auto& e : errors) out += fmt::format("{} {}: {}\n", location_label(e), e.reason, e.message);
  for (const auto& w : warnings) out += fmt::format("{}:{}: warning: {}\n", w.location.path, w.location.line, w.message);
  std::size_t fatal = 0;
  for (const auto& e : errors) fatal += e.fatal ? 1 : 0;
  out += fmt::format("{} inline test{} collected, {} collection error{}\n", cases.size(), cases.size() == 1 ? "" : "s",
                     fatal, fatal == 1 ? "" : "s");
  return out;
}

nlohmann::json to_json(const Report& report) {
  using nlohmann::json;
  const RunConfig& c = report.config;
  json config = {
      {"paths", c.paths},
      {"group_tags", c.group_tags},
      {"order_tags", c.order_tags},
      {"name_filter", c.name_filter ? json(*c.name_filter) : json(nullptr)},
      {"ignore_import_errors", c.ignore_import_errors},
      {"default_timeout_s", c.default_timeout ? json(*c.default_timeout) : json(nullptr)},
      {"interpreter_command", c.interpreter_command},
      {"list_only", c.list_only},
  };
  json cases = json::array();
  for (const auto& o : report.outcomes) {
    json entry = {
        {"id", o.case_id},
        {"name", o.display_name},
        {"file", o.path},
        {"line", o.line},
        {"param_index", o.param_index},
        {"tags", o.tags},
        {"status", to_string(o.status)},
        {"duration_s", round_ms(o.duration_s)},
        {"repetitions_run", o.repetitions_run},
    };
    if (o.failure) {
      const FailureRecord& f = *o.failure;
      json failure = {
          {"kind", f.kind},
          {"check", f.check},
          {"actual_expr", f.actual_expr},
          {"actual_repr", f.actual_repr},
          {"repetition", f.repetition},
      };
      if (f.expected_repr) {
        failure["expected_expr"] = f.expected_expr.value_or("");
        failure["expected_repr"] = *f.expected_repr;
      }
      entry["failure"] = failure;
    }
    if (o.error_detail) entry["error_detail"] = *o.error_detail;
    cases.push_back(entry);
  }
  json errors = json::array();
  for (const auto& e : report.collection_errors) {
    errors.push_back({{"file", e.path},
                      {"line", e.line ? json(*e.line) : json(nullptr)},
                      {"reason", e.reason},
                      {"message", e.message},
                      {"fatal", e.fatal}});
  }
  json warnings = json::array();
  for (const auto& w : report.warnings) {
    warnings.push_back({{"file", w.location.path}, {"line", w.location.line}, {"message", w.message}});
  }
  Totals t = report.totals();
  json totals = {
      {"passed", t.passed},
      {"failed", t.failed},
      {"skipped_disabled", t.skipped_disabled},
      {"skipped_assumption", t.skipped_assumption},
      {"timeout", t.timeout},
      {"error", t.error},
      {"collection_errors", t.collection_errors},
      {"cases", t.cases()},
  };
  return {
      {"schema_version", kReportSchemaVersion},
      {"tool_version", kToolVersion},
      {"config", config},
      {"files_scanned", report.files_scanned},
      {"cases", cases},
      {"collection_errors", errors},
      {"warnings", warnings},
      {"totals", totals},
      {"wall_time_s", round_ms(report.wall_time_s)},
  };
}

void emit_json(const Report& report, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ReportWriteError("cannot write report to " + path.string());
  out << to_json(report).dump(2) << "\n";
  out.close();
  if (!out) throw ReportWriteError("cannot write report to " + path.string());
}

int exit_code(const Report& report) {
  Totals t = report.totals();
  return t.failed + t.timeout + t.error + t.collection_errors > 0 ? 1 : 0;
}

}  // namespace itest
