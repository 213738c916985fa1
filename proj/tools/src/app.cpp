#include "app.hpp"

#include <cstdint>
#include <map>
#include <optional>
#include <ostream>

#include <CLI11.hpp>

#include "config.hpp"
#include "run.hpp"

namespace pkcli {

namespace {

enum class FlagType { Integer, Real, Switch };

struct ScalarFlag {
  const char* flag;
  const char* key;
  FlagType type;
  const char* help;
};

const std::map<std::string, std::vector<ScalarFlag>>& scalar_flags() {
  static const std::map<std::string, std::vector<ScalarFlag>> flags{
      {"simulate", {{"--nsim", "nsim", FlagType::Integer, "number of simulations"}}},
      {"pfilter",
       {{"--np", "np", FlagType::Integer, "number of particles"},
        {"--nrep", "nrep", FlagType::Integer, "independent filter replicates"},
        {"--max-fail", "max_fail", FlagType::Integer, "tolerated filtering failures"}}},
      {"kalman", {{"--mle", "mle", FlagType::Switch, "also compute the exact maximum likelihood estimate"}}},
      {"mif",
       {{"--M", "M", FlagType::Integer, "iterations"},
        {"--J,--np", "J", FlagType::Integer, "particles per iteration"},
        {"--cooling-fraction", "cooling_fraction", FlagType::Real, "cooling fraction over the window"},
        {"--np-eval", "np_eval", FlagType::Integer, "particles for the final likelihood evaluation"},
        {"--nrep-eval", "nrep_eval", FlagType::Integer, "filter replicates for the final evaluation"}}},
      {"pmcmc",
       {{"--M", "M", FlagType::Integer, "chain length"},
        {"--np", "np", FlagType::Integer, "particles per likelihood estimate"},
        {"--nchains", "nchains", FlagType::Integer, "independent chains"}}},
      {"probe", {{"--nsim", "nsim", FlagType::Integer, "simulations for the synthetic likelihood"}}},
      {"abc",
       {{"--M", "M", FlagType::Integer, "chain length"},
        {"--epsilon", "epsilon", FlagType::Real, "ABC tolerance"},
        {"--scale-nsim", "scale_nsim", FlagType::Integer, "simulations used to scale the probes"}}},
      {"nlf",
       {{"--K", "K", FlagType::Integer, "radial basis functions per lag"},
        {"--B", "B", FlagType::Integer, "discarded transient"},
        {"--J", "J", FlagType::Integer, "simulation length for the fit"}}},
  };
  return flags;
}

struct Common {
  std::string config;
  std::optional<std::string> model, data, covariates, output;
  std::optional<std::uint64_t> seed;
  std::optional<int> threads;
  std::vector<std::string> params;
};

struct Scalars {
  std::map<std::string, std::optional<std::int64_t>> integers;
  std::map<std::string, std::optional<double>> reals;
  std::map<std::string, bool> switches;
};

void add_common(CLI::App* sub, Common& c, bool with_model) {
  sub->add_option("-c,--config", c.config, "JSON run configuration")->check(CLI::ExistingFile);
  if (with_model) {
    sub->add_option("--model", c.model, "built-in model name");
    sub->add_option("--data", c.data, "observation CSV, or \"simulate\"");
    sub->add_option("--covariates", c.covariates, "covariate CSV (sir-seasonal)");
    sub->add_option("--param", c.params, "parameter override name=value (repeatable)");
  }
  sub->add_option("--seed", c.seed, "random seed");
  sub->add_option("--threads", c.threads, "worker threads")->check(CLI::PositiveNumber);
  sub->add_option("-o,--output", c.output, "output directory");
}

std::optional<Json> parse_number(const std::string& text) {
  try {
    return Json::parse(text);
  } catch (const nlohmann::json::exception&) {
    return std::nullopt;
  }
}

// Merges command-line values into the configuration document and returns
// any problems found while doing so.
std::vector<Diagnostic> merge(Json& doc, const std::string& algorithm, const Common& c, const Scalars& s,
                              bool from_file) {
  std::vector<Diagnostic> problems;
  if (!from_file) doc["schema"] = kSchemaVersion;
  if (!algorithm.empty()) {
    if (doc.contains("algorithm") && doc["algorithm"] != algorithm)
      problems.push_back({1, "config algorithm " + doc["algorithm"].dump() + " does not match subcommand '" +
                                 algorithm + "'"});
    else
      doc["algorithm"] = algorithm;
  }
  if (c.model) doc["model"] = *c.model;
  if (c.data) doc["data"] = *c.data;
  if (c.covariates) doc["covariates"] = *c.covariates;
  if (c.output) doc["output"] = *c.output;
  if (c.seed) doc["seed"] = *c.seed;
  if (c.threads) doc["threads"] = *c.threads;
  for (const auto& p : c.params) {
    const auto eq = p.find('=');
    const auto value = eq == std::string::npos ? std::nullopt : parse_number(p.substr(eq + 1));
    if (!value || !value->is_number()) {
      problems.push_back({1, "--param expects name=value with a numeric value, got '" + p + "'"});
      continue;
    }
    if (!doc.contains("params") || !doc["params"].is_object()) doc["params"] = Json::object();
    doc["params"][p.substr(0, eq)] = *value;
  }
  auto block = [&]() -> Json& {
    if (!doc.contains(algorithm) || !doc[algorithm].is_object()) doc[algorithm] = Json::object();
    return doc[algorithm];
  };
  for (const auto& [key, v] : s.integers)
    if (v) block()[key] = *v;
  for (const auto& [key, v] : s.reals)
    if (v) block()[key] = *v;
  for (const auto& [key, v] : s.switches)
    if (v) block()[key] = true;
  return problems;
}

int validate_and_run(const std::string& algorithm, const Common& c, const Scalars& s, bool run, std::ostream& out,
                     std::ostream& err) {
  ConfigDocument doc;
  std::vector<Diagnostic> problems;
  const bool from_file = !c.config.empty();
  if (from_file) {
    doc = load_config(c.config, problems);
    if (!problems.empty()) {
      err << format_diagnostics(c.config, problems);
      return kValidationFailure;
    }
  } else {
    doc.path = "<command line>";
    doc.json = Json::object();
  }
  if (run) problems = merge(doc.json, algorithm, c, s, from_file);
  const auto more = validate_config(doc);
  problems.insert(problems.end(), more.begin(), more.end());
  if (!problems.empty()) {
    err << format_diagnostics(doc.path, problems);
    return kValidationFailure;
  }
  if (!run) {
    out << "valid\n";
    return kSuccess;
  }
  return run_config(doc.json, out, err);
}

}  // namespace

int cli_main(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"pomp-kit: inference for partially observed Markov processes"};
  app.require_subcommand(1);
  app.name("pomp-kit");

  Common common;
  Scalars scalars;
  std::string selected;
  bool run = true;

  for (const auto& algorithm : algorithm_names()) {
    auto* sub = app.add_subcommand(algorithm, "run the " + algorithm + " algorithm");
    add_common(sub, common, true);
    if (auto it = scalar_flags().find(algorithm); it != scalar_flags().end())
      for (const auto& f : it->second) {
        const std::string key = algorithm + "/" + f.key;
        switch (f.type) {
          case FlagType::Integer: sub->add_option(f.flag, scalars.integers[key], f.help); break;
          case FlagType::Real: sub->add_option(f.flag, scalars.reals[key], f.help); break;
          case FlagType::Switch: sub->add_flag(f.flag, scalars.switches[key], f.help); break;
        }
      }
    sub->callback([&selected, algorithm] { selected = algorithm; });
  }
  auto* generic = app.add_subcommand("run", "run the algorithm named in a configuration file");
  add_common(generic, common, false);
  generic->get_option("--config")->required();
  generic->callback([&selected] { selected = "run"; });

  auto* validate = app.add_subcommand("validate", "check a configuration file");
  validate->add_option("config", common.config, "JSON run configuration")->required()->check(CLI::ExistingFile);
  validate->callback([&selected, &run] {
    selected = "validate";
    run = false;
  });

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kSuccess : kValidationFailure;
  }

  // Scalar flags are keyed "algorithm/key"; keep only those of the chosen
  // subcommand, stripped to their block key.
  Scalars chosen;
  const std::string prefix = selected + "/";
  for (const auto& [k, v] : scalars.integers)
    if (k.rfind(prefix, 0) == 0) chosen.integers[k.substr(prefix.size())] = v;
  for (const auto& [k, v] : scalars.reals)
    if (k.rfind(prefix, 0) == 0) chosen.reals[k.substr(prefix.size())] = v;
  for (const auto& [k, v] : scalars.switches)
    if (k.rfind(prefix, 0) == 0) chosen.switches[k.substr(prefix.size())] = v;

  const std::string algorithm = (selected == "run" || selected == "validate") ? "" : selected;
  return validate_and_run(algorithm, common, chosen, run, out, err);
}

}  // namespace pkcli
