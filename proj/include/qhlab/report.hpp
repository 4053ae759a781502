// Run configuration, fixtures, output headers, SVG rendering and the full
// pipeline shared by the command line tool and the Python module.
#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "qhlab/domains.hpp"
#include "qhlab/whitney.hpp"

namespace qhlab {

const char* version();

struct RunConfig {
  std::string domain = "square";  // square | l-shape | four-corner | file
  std::string domain_file;
  double lambda = 1.0;
  int depth = 6;
  double beta = 1.0;  // below 1 the beta-version of the base domain is used
  int base_jmax = 5;
  int jmax = 8;
  double q = 1.0;
  double p = 2.0;
  double eps = 0.1;
  std::optional<double> c2bar;
  double h = 1.0 / 64.0;
  int iters = 200;
  int restarts = 3;
  int m_max = 64;
  int radii_levels = 10;
  std::ptrdiff_t flag = -1;  // cube whose shadow is highlighted; -1 picks one
  std::uint64_t seed = 1;
  bool chains = true;
  bool dimension = true;
  bool poincare = true;
  bool estimate = true;
  std::string out = "out";
};

/// Known keys in canonical order.
const std::vector<std::string>& config_keys();
void set_config_value(RunConfig& c, const std::string& key, const std::string& value);
std::string get_config_value(const RunConfig& c, const std::string& key);
/// Flat `key = value` lines; '#' starts a comment.
void read_config(std::istream& in, RunConfig& c);
void validate_config(const RunConfig& c);

/// `key=value` lines for every key except `out`.
std::string canonical_config(const RunConfig& c);
/// FNV-1a 64 of canonical_config.
std::uint64_t config_hash(const RunConfig& c);
/// "# qhlab <version> config=<hash> seed=<seed>"
std::string header_comment(const RunConfig& c);

struct Fixture {
  Domain base;
  std::optional<WhitneyDecomposition> base_whitney;  // beta-version only
  std::optional<BetaVersionDomain> beta_version;
  const Domain& domain() const { return beta_version ? beta_version->domain : base; }
};

Fixture build_fixture(const RunConfig& c);

void write_provenance_json(std::ostream& out, const Domain& d, const RunConfig& c);

struct SvgOptions {
  double width = 800.0;
  std::string comment;
  std::vector<std::size_t> highlight;  // cube ids drawn on top
  std::ptrdiff_t flagged = -1;
};

/// Cubes as rectangles colored by level, holes, walls and the outer boundary.
void write_svg(std::ostream& out, const Domain& d, const WhitneyDecomposition* w, const SvgOptions& opts);

enum Stage : unsigned {
  kStageBuild = 1u << 0,           // domain.txt, provenance.json
  kStageWhitney = 1u << 1,         // whitney.txt, census.csv
  kStageQhFit = 1u << 2,           // chains.csv, qhbc_fit.csv
  kStageShadows = 1u << 3,         // shadows.csv, sigma_series.csv
  kStageDimension = 1u << 4,       // boxcount.csv, dimension.csv
  kStageThreshold = 1u << 5,       // threshold_table.csv
  kStagePredicate = 1u << 6,       // predicate.json
  kStageCounterexample = 1u << 7,  // ratio_sequence.csv
  kStageEstimate = 1u << 8,        // estimate.csv
  kStageRender = 1u << 9,          // domain.svg
  kStageSummary = 1u << 10,        // summary.json
};

/// Runs the selected stages and writes their files into `dir`. Errors are
/// rethrown with the stage name prefixed. Returns the summary JSON text.
std::string run_stages(const RunConfig& c, const std::filesystem::path& dir, unsigned stages,
                       std::ostream* log = nullptr);

/// Every stage enabled by the config toggles.
unsigned pipeline_stages(const RunConfig& c);
std::string run_pipeline(const RunConfig& c, const std::filesystem::path& dir, std::ostream* log = nullptr);

}  // namespace qhlab
