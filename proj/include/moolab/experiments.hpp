#pragma once

#include <json.hpp>

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "moolab/methods.hpp"

namespace moolab::lab {

class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// One experiment run, fully determined by these fields. `finalize()` fills
/// experiment-specific defaults and rejects inconsistent combinations.
struct ExperimentConfig {
  std::string experiment;  // strongly-convex | oblivious | universal | upper-agd
  double L = 0.0;          // 0 = pick the experiment default
  double mu = -1.0;        // -1 = unset
  double kappa = 0.0;      // 0 = unset
  int T = 0;               // 0 = pick the experiment default
  double R = 1.0;
  int m = 2;
  std::uint64_t seed = 0;
  double tol = kDefaultTol;
  std::string output_dir = "out";
  std::vector<double> schedule;  // empty = constant 1/L
  std::vector<double> epsilons{1e-1, 1e-2};

  static ExperimentConfig from_json(const nlohmann::json& j);
  static ExperimentConfig from_json_file(const std::string& path);
  nlohmann::json to_json() const;
  void finalize();
};

/// Theoretical floor/ceiling values per iteration with formula tags.
/// Entries may be NaN where a bound is not defined for that quantity.
struct BoundCurve {
  std::vector<double> floor;
  std::vector<double> ceiling;
  std::string floor_tag;
  std::string ceiling_tag;
};

struct Violation {
  std::string quantity;
  long t = -1;  // -1: not tied to a single iteration
  double measured = 0.0;
  double bound = 0.0;
};

struct RunReport {
  std::string experiment;
  nlohmann::json config;
  nlohmann::json metrics;
  std::vector<Violation> violations;
  std::int64_t runtime_ms = 0;

  int exit_code() const { return violations.empty() ? 0 : 2; }
  nlohmann::json to_json() const;
};

/// Run one configured experiment, writing trace.csv, summary.json and
/// chart.svg into the config's output directory.
RunReport run_experiment(const ExperimentConfig& cfg);

/// Write the report files for a single trace. `f_star` shifts raw objective
/// values into f-gaps for the CSV.
void write_report(const IterateTrace<double>& trace, const BoundCurve& bounds,
                  const std::string& dir, double f_star = 0.0);

/// Property suites for the polynomial extremal results: product inequality
/// and floor/ceiling, the Markov floor for random residuals, monotone decay,
/// and the Chebyshev identities. Prints one line per suite; returns 0 when
/// every suite holds, 2 otherwise.
int verify_appendix(int trials, std::ostream& out);

}  // namespace moolab::lab
