#ifndef GWK_REPORT_HPP
#define GWK_REPORT_HPP

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "gwk/asymptotics.hpp"
#include "gwk/montecarlo.hpp"
#include "gwk/offspring.hpp"
#include "gwk/qprocess.hpp"

namespace gwk {

/// Key order is part of the output contract, so reports use ordered objects.
using Json = nlohmann::ordered_json;

/// A law file that cannot be read, parsed, or validated.
class InputError : public std::runtime_error {
 public:
  enum class Kind { io, parse, validation };

  InputError(Kind kind, const std::string& what) : std::runtime_error(what), kind_(kind) {}
  Kind kind() const noexcept { return kind_; }

 private:
  Kind kind_;
};

/// {"type":"pmf","p":[...]} or {"type":"linear_fractional","b":..,"c":..}.
/// Every message names the offending field; validation lists every violation.
OffspringLaw parse_law_text(std::string_view text, bool renormalize = false);
OffspringLaw parse_law_file(const std::string& path, bool renormalize = false);

/// Pretty JSON with doubles at 17 significant digits and non-finite values as
/// null. Parsing the output and writing it again reproduces it byte for byte.
std::string write_json(const Json& doc);

Json law_json(const OffspringLaw& law);
Json params_json(const ProcessParams& params);
Json limit_json(const LimitEstimate& limit, bool with_trace = true);
Json bounds_json(const BoundsReport& bounds);
Json measure_json(const InvariantMeasure& measure);
Json sim_json(const SimEstimate& est);

struct AnalysisOptions {
  int n_max = 200;
  double tol = 1e-9;
  std::optional<std::vector<double>> s_points;  ///< default probe points when empty
  Eigen::Index j_max = 60;
};

struct Discrepancy {
  double K_theory;
  double K_hat;
  double abs_gap;
  double rel_gap;
  bool lf_exact;  ///< the law is linear-fractional, so the gap must vanish
};

Discrepancy discrepancy(const OffspringLaw& law, const ProcessParams& params, const LimitEstimate& limit);

/// The full report: law, params, limit, bounds, invariant, p11, discrepancy.
Json analyze(const OffspringLaw& law, const AnalysisOptions& opts);

enum class CheckStatus { pass, fail, skipped, report };

std::string_view to_string(CheckStatus status) noexcept;

struct CheckResult {
  std::string name;
  double residual;
  double threshold;
  CheckStatus status;
  bool lf_only;
  std::string note;
};

struct VerifyOptions {
  std::uint64_t seed = 0;
  std::int64_t replicates = 100000;
};

/// Runs every cross-module identity on one law. Linear-fractional identities
/// are skipped with a reason on other laws; the K gap is reported, never failed.
std::vector<CheckResult> verify_suite(const OffspringLaw& law, const VerifyOptions& opts);

/// True when no check has status fail.
bool ledger_passed(const std::vector<CheckResult>& ledger);
Json ledger_json(const std::vector<CheckResult>& ledger);

/// Rows of strings for CSV and aligned-table output.
struct Table {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;
};

/// Flattens a JSON document into (key, value) rows with dotted paths.
Table flatten(const Json& doc);
std::string format_number(double x);
std::string write_csv(const Table& table);
std::string write_table(const Table& table);

}  // namespace gwk

#endif  // GWK_REPORT_HPP
