// qhlab command line tool.
#include <fstream>
#include <iostream>
#include <map>
#include <string>

#include "CLI11.hpp"
#include "qhlab/report.hpp"

namespace {

using namespace qhlab;

struct ConfigFlags {
  std::string config_path;
  std::map<std::string, std::string> values;
};

using OptionMap = std::map<std::string, CLI::Option*>;

std::string dashed(std::string k) {
  for (char& ch : k)
    if (ch == '_') ch = '-';
  return k;
}

const std::map<std::string, std::string>& key_help() {
  static const std::map<std::string, std::string> h{
      {"domain", "square | l-shape | four-corner | file"},
      {"domain_file", "domain v1 file read when domain = file"},
      {"lambda", "fractal dimension of the four-corner set, in [1,2)"},
      {"depth", "IFS depth"},
      {"beta", "beta-version exponent in (0,1]; 1 keeps the base domain"},
      {"base_jmax", "Whitney level cap of the base domain for the surgery"},
      {"jmax", "Whitney level cap"},
      {"q", "exponent q >= 1"},
      {"p", "exponent p >= q"},
      {"eps", "epsilon of the shadow-sum ratio, in (0,1)"},
      {"c2bar", "assumed constant for the counterexample predicate, or none"},
      {"h", "grid spacing of the discrete estimator"},
      {"iters", "ascent iterations per start"},
      {"restarts", "noise restarts of the estimator"},
      {"m_max", "number of counterexample levels"},
      {"radii_levels", "dyadic radii 2^-1 .. 2^-levels for box counting"},
      {"flag", "cube id whose shadow is highlighted; -1 picks one"},
      {"seed", "random seed"},
      {"chains", "pipeline toggle: chain tree, fits and shadows"},
      {"dimension", "pipeline toggle: box counting and census slope"},
      {"poincare", "pipeline toggle: threshold, predicate, counterexample"},
      {"estimate", "pipeline toggle: discrete lower bound"},
      {"out", "output directory"},
  };
  return h;
}

OptionMap add_config_flags(CLI::App* sub, ConfigFlags& f) {
  OptionMap options;
  sub->add_option("-c,--config", f.config_path, "flat key = value config file; flags override it");
  for (const auto& k : config_keys()) {
    std::string names = "--" + dashed(k);
    if (k == "out") names = "-o,--out";
    if (k == "h") names = "--grid-h";
    options[k] = sub->add_option(names, f.values[k], key_help().at(k));
  }
  return options;
}

RunConfig resolve(const ConfigFlags& f, const OptionMap& options) {
  RunConfig c;
  if (!f.config_path.empty()) {
    std::ifstream in(f.config_path);
    if (!in) throw PreconditionError("cannot read config file " + f.config_path);
    read_config(in, c);
  }
  for (const auto& [k, opt] : options)
    if (opt->count() > 0) set_config_value(c, k, f.values.at(k));
  validate_config(c);
  return c;
}

struct Command {
  CLI::App* app = nullptr;
  unsigned stages = 0;  // 0: the whole pipeline
  OptionMap options;
};

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Whitney, quasihyperbolic and Poincare analyses of planar domains"};
  app.set_version_flag("--version", std::string("qhlab ") + version());
  app.require_subcommand(1);
  bool verbose = false;
  app.add_flag("-v,--verbose", verbose, "report stage timings on stderr");

  ConfigFlags flags;
  std::vector<Command> commands;
  auto add = [&](CLI::App* parent, const char* name, const char* help, unsigned stages) {
    CLI::App* sub = parent->add_subcommand(name, help);
    commands.push_back({sub, stages, add_config_flags(sub, flags)});
  };
  add(&app, "build", "write domain.txt and provenance.json", kStageBuild);
  add(&app, "whitney", "write whitney.txt and census.csv", kStageWhitney);
  add(&app, "qh-fit", "write chains.csv and qhbc_fit.csv", kStageQhFit);
  add(&app, "shadow-stats", "write shadows.csv and sigma_series.csv", kStageShadows);
  add(&app, "dim", "write boxcount.csv and dimension.csv", kStageDimension);
  CLI::App* poincare = app.add_subcommand("poincare", "threshold, counterexample, estimator and predicate");
  poincare->require_subcommand(1);
  add(poincare, "threshold", "write threshold_table.csv", kStageThreshold);
  add(poincare, "counterexample", "write ratio_sequence.csv", kStageCounterexample);
  add(poincare, "estimate", "write estimate.csv", kStageEstimate);
  add(poincare, "predicate", "write predicate.json", kStagePredicate);
  add(&app, "pipeline", "run every enabled stage and write the report bundle", 0);
  add(&app, "render", "write domain.svg", kStageRender);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    for (const Command& cmd : commands) {
      if (!cmd.app->parsed()) continue;
      const RunConfig c = resolve(flags, cmd.options);
      const unsigned stages = cmd.stages == 0 ? pipeline_stages(c) : cmd.stages;
      std::cout << run_stages(c, c.out, stages, verbose ? &std::cerr : nullptr) << '\n';
      return 0;
    }
    std::cerr << "qhlab: no command given\n";
    return 2;
  } catch (const PreconditionError& e) {
    std::cerr << "qhlab: error: " << e.what() << '\n';
    return 2;
  } catch (const InvariantError& e) {
    std::cerr << "qhlab: internal error: " << e.what() << '\n';
    return 3;
  } catch (const std::exception& e) {
    std::cerr << "qhlab: internal error: " << e.what() << '\n';
    return 3;
  }
}
