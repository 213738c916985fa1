#include "config.hpp"

#include <algorithm>
#include <fstream>
#include <limits>
#include <set>
#include <sstream>

#include <pompkit/models.hpp>

namespace pkcli {

namespace {

enum class Kind { Integer, NonNegInteger, PositiveInteger, Number, PositiveNumber, Fraction, Boolean, String,
                  StringArray, IntArray, NumberArray, NumberMap, IntervalMap, ObjectArray, ProbeArray, Object,
                  ParamMap };

struct Field {
  const char* name;
  Kind kind;
};

const std::vector<Field>& top_level_fields() {
  static const std::vector<Field> f{{"schema", Kind::Integer},   {"model", Kind::String},
                                    {"data", Kind::String},      {"covariates", Kind::String},
                                    {"params", Kind::ParamMap},  {"algorithm", Kind::String},
                                    {"seed", Kind::NonNegInteger}, {"output", Kind::String},
                                    {"threads", Kind::PositiveInteger}};
  return f;
}

const std::vector<Field>& block_fields(const std::string& algorithm) {
  static const std::vector<Field> simulate{{"nsim", Kind::PositiveInteger}};
  static const std::vector<Field> pfilter{
      {"np", Kind::PositiveInteger}, {"nrep", Kind::PositiveInteger}, {"max_fail", Kind::NonNegInteger}};
  static const std::vector<Field> kalman{
      {"mle", Kind::Boolean}, {"maxit", Kind::PositiveInteger}, {"reltol", Kind::PositiveNumber}};
  static const std::vector<Field> mif{{"M", Kind::NonNegInteger},         {"J", Kind::PositiveInteger},
                                      {"rw_sd", Kind::NumberMap},         {"ivp", Kind::StringArray},
                                      {"ic_lag", Kind::NonNegInteger},    {"var_factor", Kind::PositiveNumber},
                                      {"cooling_fraction", Kind::Fraction}, {"cooling_window", Kind::PositiveInteger},
                                      {"cooling_factor", Kind::Fraction}, {"transform", Kind::Boolean},
                                      {"max_fail", Kind::NonNegInteger},  {"starts", Kind::ObjectArray},
                                      {"nstarts", Kind::PositiveInteger}, {"start_box", Kind::IntervalMap},
                                      {"np_eval", Kind::PositiveInteger}, {"nrep_eval", Kind::PositiveInteger}};
  static const std::vector<Field> pmcmc{{"M", Kind::NonNegInteger},     {"np", Kind::PositiveInteger},
                                        {"nchains", Kind::PositiveInteger}, {"proposal_sd", Kind::NumberMap},
                                        {"max_fail", Kind::NonNegInteger}};
  static const std::vector<Field> probe{
      {"nsim", Kind::PositiveInteger}, {"probes", Kind::ProbeArray}, {"match", Kind::Object}};
  static const std::vector<Field> abc{{"M", Kind::NonNegInteger},        {"epsilon", Kind::Number},
                                      {"proposal_sd", Kind::NumberMap},  {"probes", Kind::ProbeArray},
                                      {"scale", Kind::NumberArray},      {"scale_nsim", Kind::PositiveInteger}};
  static const std::vector<Field> nlf{{"lags", Kind::IntArray},       {"K", Kind::PositiveInteger},
                                      {"B", Kind::PositiveInteger},   {"J", Kind::PositiveInteger},
                                      {"est", Kind::StringArray},     {"transform", Kind::Boolean},
                                      {"maxit", Kind::PositiveInteger}, {"reltol", Kind::PositiveNumber}};
  static const std::vector<Field> none;
  if (algorithm == "simulate") return simulate;
  if (algorithm == "pfilter") return pfilter;
  if (algorithm == "kalman") return kalman;
  if (algorithm == "mif") return mif;
  if (algorithm == "pmcmc") return pmcmc;
  if (algorithm == "probe") return probe;
  if (algorithm == "abc") return abc;
  if (algorithm == "nlf") return nlf;
  return none;
}

const std::vector<Field>& match_fields() {
  static const std::vector<Field> f{{"est", Kind::StringArray},
                                    {"maxit", Kind::PositiveInteger},
                                    {"reltol", Kind::PositiveNumber},
                                    {"transform", Kind::Boolean}};
  return f;
}

const std::vector<Field>& probe_fields() {
  static const std::vector<Field> f{{"type", Kind::String},    {"var", Kind::String},   {"transform", Kind::String},
                                    {"lags", Kind::IntArray},  {"powers", Kind::IntArray}, {"center", Kind::Boolean},
                                    {"ref", Kind::String},     {"npoly", Kind::PositiveInteger}};
  return f;
}

std::string join(const std::vector<std::string>& v) {
  std::string out;
  for (std::size_t i = 0; i < v.size(); ++i) out += (i ? ", " : "") + v[i];
  return out;
}

int line_of_offset(const std::string& text, std::size_t offset) {
  offset = std::min(offset, text.size());
  return 1 + static_cast<int>(std::count(text.begin(), text.begin() + static_cast<std::ptrdiff_t>(offset), '\n'));
}

class Checker {
 public:
  explicit Checker(const ConfigDocument& doc) : doc_(doc) {}

  // Line of the last key of `path` that can be found in order in the text.
  int locate(const std::vector<std::string>& path) const {
    std::size_t pos = 0;
    int line = 1;
    for (const auto& key : path) {
      const auto at = doc_.text.find("\"" + key + "\"", pos);
      if (at == std::string::npos) break;
      pos = at + key.size() + 2;
      line = line_of_offset(doc_.text, at);
    }
    return line;
  }

  void fail(const std::vector<std::string>& path, const std::string& message) {
    problems_.push_back({locate(path), message});
  }

  void check_field(const std::vector<std::string>& path, const Json& v, Kind kind) {
    const std::string name = path.back();
    auto need = [&](bool ok, const std::string& what) {
      if (!ok) fail(path, "field '" + dotted(path) + "' must be " + what);
      return ok;
    };
    switch (kind) {
      case Kind::Integer: need(v.is_number_integer(), "an integer"); break;
      case Kind::NonNegInteger: need(v.is_number_unsigned() || (v.is_number_integer() && v.get<long long>() >= 0), "a non-negative integer"); break;
      case Kind::PositiveInteger: need(v.is_number_integer() && v.get<long long>() >= 1, "a positive integer"); break;
      case Kind::Number: need(v.is_number(), "a number"); break;
      case Kind::PositiveNumber: need(v.is_number() && v.get<double>() > 0, "a positive number"); break;
      case Kind::Fraction: need(v.is_number() && v.get<double>() > 0 && v.get<double>() <= 1, "a number in (0, 1]"); break;
      case Kind::Boolean: need(v.is_boolean(), "true or false"); break;
      case Kind::String: need(v.is_string(), "a string"); break;
      case Kind::Object: need(v.is_object(), "an object"); break;
      case Kind::StringArray:
        if (need(v.is_array(), "an array of strings"))
          for (const auto& e : v)
            if (!need(e.is_string(), "an array of strings")) break;
        break;
      case Kind::IntArray:
        if (need(v.is_array(), "an array of integers"))
          for (const auto& e : v)
            if (!need(e.is_number_integer(), "an array of integers")) break;
        break;
      case Kind::NumberArray:
        if (need(v.is_array(), "an array of numbers"))
          for (const auto& e : v)
            if (!need(e.is_number(), "an array of numbers")) break;
        break;
      case Kind::NumberMap:
      case Kind::ParamMap:
        if (need(v.is_object(), "an object mapping parameter names to numbers"))
          for (const auto& [k, e] : v.items()) {
            auto sub = path;
            sub.push_back(k);
            if (!e.is_number()) fail(sub, "field '" + dotted(sub) + "' must be a number");
            else if (kind == Kind::NumberMap && e.get<double>() < 0)
              fail(sub, "field '" + dotted(sub) + "' must be non-negative");
          }
        break;
      case Kind::IntervalMap:
        if (need(v.is_object(), "an object mapping parameter names to [lower, upper]"))
          for (const auto& [k, e] : v.items()) {
            auto sub = path;
            sub.push_back(k);
            if (!e.is_array() || e.size() != 2 || !e[0].is_number() || !e[1].is_number() ||
                !(e[1].get<double>() >= e[0].get<double>()))
              fail(sub, "field '" + dotted(sub) + "' must be [lower, upper] with lower <= upper");
          }
        break;
      case Kind::ObjectArray:
        if (need(v.is_array(), "an array of objects"))
          for (const auto& e : v)
            if (!need(e.is_object(), "an array of objects")) break;
        break;
      case Kind::ProbeArray:
        if (need(v.is_array() && !v.empty(), "a non-empty array of probe objects"))
          for (std::size_t i = 0; i < v.size(); ++i) check_probe(path, v[i], i);
        break;
    }
    (void)name;
  }

  void check_object(const std::vector<std::string>& path, const Json& obj, const std::vector<Field>& fields) {
    for (const auto& [key, value] : obj.items()) {
      auto sub = path;
      sub.push_back(key);
      const auto it = std::find_if(fields.begin(), fields.end(), [&](const Field& f) { return key == f.name; });
      if (it == fields.end()) {
        std::vector<std::string> names;
        for (const auto& f : fields) names.emplace_back(f.name);
        fail(sub, "unknown field '" + dotted(sub) + "' (expected one of: " + join(names) + ")");
        continue;
      }
      check_field(sub, value, it->kind);
    }
  }

  void check_probe(const std::vector<std::string>& path, const Json& p, std::size_t index) {
    auto sub = path;
    const std::string where = dotted(path) + "[" + std::to_string(index) + "]";
    if (!p.is_object()) {
      fail(sub, "'" + where + "' must be an object");
      return;
    }
    check_object(path, p, probe_fields());
    static const std::set<std::string> types{"mean", "acf", "nlar", "marginal"};
    if (!p.contains("type") || !p["type"].is_string() || !types.count(p["type"].get<std::string>())) {
      fail(path, "'" + where + ".type' must be one of: acf, marginal, mean, nlar");
      return;
    }
    const auto type = p["type"].get<std::string>();
    if ((type == "acf" || type == "nlar") && !p.contains("lags")) fail(path, "'" + where + "' needs 'lags'");
    if (type == "nlar" && (!p.contains("powers") || !p.contains("lags") || !p["powers"].is_array() ||
                           !p["lags"].is_array() || p["powers"].size() != p["lags"].size()))
      fail(path, "'" + where + "' needs 'powers' with one entry per lag");
    if (p.contains("transform") && p["transform"].is_string()) {
      const auto t = p["transform"].get<std::string>();
      if (t != "identity" && t != "sqrt" && t != "log")
        fail(path, "'" + where + ".transform' must be one of: identity, log, sqrt");
    }
    if (p.contains("ref") && p["ref"].is_string() && p["ref"].get<std::string>() != "data")
      fail(path, "'" + where + ".ref' must be \"data\"");
  }

  std::vector<Diagnostic> run() {
    const Json& j = doc_.json;
    if (!j.is_object()) {
      problems_.push_back({1, "the configuration must be a JSON object"});
      return problems_;
    }
    const auto& algos = algorithm_names();
    std::vector<Field> fields = top_level_fields();
    for (const auto& a : algos) fields.push_back({a.c_str(), Kind::Object});

    for (const char* required : {"schema", "seed", "model", "algorithm"})
      if (!j.contains(required)) fail({}, std::string("missing required field '") + required + "'");

    for (const auto& [key, value] : j.items()) {
      const auto it = std::find_if(fields.begin(), fields.end(), [&](const Field& f) { return key == f.name; });
      if (it == fields.end()) {
        fail({key}, "unknown field '" + key + "'");
        continue;
      }
      if (std::find(algos.begin(), algos.end(), key) == algos.end()) check_field({key}, value, it->kind);
    }

    if (j.contains("schema") && j["schema"].is_number_integer() && j["schema"].get<int>() != kSchemaVersion)
      fail({"schema"}, "unsupported schema version " + j["schema"].dump() + " (this build reads schema " +
                           std::to_string(kSchemaVersion) + ")");
    if (j.contains("model") && j["model"].is_string()) {
      const auto names = pompkit::builtin_model_names();
      const auto m = j["model"].get<std::string>();
      if (std::find(names.begin(), names.end(), m) == names.end())
        fail({"model"}, "unknown model '" + m + "' (valid models: " + join(names) + ")");
      if (j.contains("covariates") && m != "sir-seasonal")
        fail({"covariates"}, "model '" + m + "' takes no covariates");
    }

    std::string algorithm;
    if (j.contains("algorithm") && j["algorithm"].is_string()) {
      algorithm = j["algorithm"].get<std::string>();
      if (std::find(algos.begin(), algos.end(), algorithm) == algos.end()) {
        fail({"algorithm"}, "unknown algorithm '" + algorithm + "' (valid algorithms: " + join(algos) + ")");
        algorithm.clear();
      }
    }
    for (const auto& a : algos) {
      if (!j.contains(a)) continue;
      if (!algorithm.empty() && a != algorithm) {
        fail({a}, "settings block '" + a + "' does not match algorithm '" + algorithm + "'");
        continue;
      }
      if (!j[a].is_object()) {
        fail({a}, "settings block '" + a + "' must be an object");
        continue;
      }
      check_object({a}, j[a], block_fields(a));
    }
    if (!algorithm.empty() && j.contains(algorithm) && j[algorithm].is_object()) check_semantics(algorithm, j[algorithm]);
    std::stable_sort(problems_.begin(), problems_.end(),
                     [](const Diagnostic& a, const Diagnostic& b) { return a.line < b.line; });
    return problems_;
  }

 private:
  void check_semantics(const std::string& algorithm, const Json& block) {
    if ((algorithm == "probe" || algorithm == "abc") && !block.contains("probes"))
      fail({algorithm}, "settings block '" + algorithm + "' needs 'probes'");
    if (algorithm == "probe" && block.contains("match") && block["match"].is_object())
      check_object({algorithm, "match"}, block["match"], match_fields());
    if (algorithm == "mif" && block.contains("starts") && block.contains("nstarts"))
      fail({algorithm, "nstarts"}, "give either 'starts' or 'nstarts', not both");
    if (algorithm == "mif" && block.contains("nstarts") && !block.contains("start_box"))
      fail({algorithm, "nstarts"}, "'nstarts' needs a 'start_box'");
    if (algorithm == "abc" && block.contains("epsilon") && block["epsilon"].is_number() &&
        block["epsilon"].get<double>() < 0)
      fail({algorithm, "epsilon"}, "field 'abc.epsilon' must be non-negative");
  }

  static std::string dotted(const std::vector<std::string>& path) {
    std::string out;
    for (std::size_t i = 0; i < path.size(); ++i) out += (i ? "." : "") + path[i];
    return out;
  }

  const ConfigDocument& doc_;
  std::vector<Diagnostic> problems_;
};

}  // namespace

const std::vector<std::string>& algorithm_names() {
  static const std::vector<std::string> names{"simulate", "pfilter", "mif", "pmcmc", "probe", "abc", "nlf", "kalman"};
  return names;
}

ConfigDocument load_config(const std::string& path, std::vector<Diagnostic>& problems) {
  ConfigDocument doc;
  doc.path = path;
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    problems.push_back({1, "cannot open config file"});
    return doc;
  }
  std::ostringstream ss;
  ss << in.rdbuf();
  doc.text = ss.str();
  try {
    doc.json = Json::parse(doc.text);
  } catch (const nlohmann::json::parse_error& e) {
    std::string what = e.what();
    const auto colon = what.find("syntax error");
    problems.push_back({line_of_offset(doc.text, e.byte > 0 ? e.byte - 1 : 0),
                        "malformed JSON: " + (colon == std::string::npos ? what : what.substr(colon))});
  }
  return doc;
}

std::vector<Diagnostic> validate_config(const ConfigDocument& doc) { return Checker(doc).run(); }

std::string format_diagnostics(const std::string& path, const std::vector<Diagnostic>& problems) {
  std::string out;
  for (const auto& p : problems) out += path + ":" + std::to_string(p.line) + ": error: " + p.message + "\n";
  return out;
}

Json with_defaults(const Json& config) {
  Json c = config;
  const auto algorithm = c.at("algorithm").get<std::string>();
  if (!c.contains("output")) c["output"] = ".";
  if (!c.contains("data")) c["data"] = "simulate";
  if (!c.contains("params")) c["params"] = Json::object();
  if (!c.contains("threads")) c["threads"] = 1;
  Json& b = c[algorithm];
  if (b.is_null()) b = Json::object();
  auto def = [&b](const char* key, Json value) {
    if (!b.contains(key)) b[key] = std::move(value);
  };
  if (algorithm == "simulate") {
    def("nsim", 1);
  } else if (algorithm == "pfilter") {
    def("np", 1000);
    def("nrep", 1);
    def("max_fail", 0);
  } else if (algorithm == "kalman") {
    def("mle", false);
    def("maxit", 2000);
    def("reltol", 1e-8);
  } else if (algorithm == "mif") {
    def("M", 100);
    def("J", 1000);
    def("rw_sd", Json::object());
    def("ivp", Json::array());
    def("var_factor", 2.0);
    def("cooling_fraction", 0.7);
    def("cooling_window", 50);
    def("transform", true);
    def("max_fail", 0);
    def("np_eval", 1000);
    def("nrep_eval", 10);
  } else if (algorithm == "pmcmc") {
    def("M", 1000);
    def("np", 100);
    def("nchains", 1);
    def("proposal_sd", Json::object());
    def("max_fail", 0);
  } else if (algorithm == "probe") {
    def("nsim", 1000);
  } else if (algorithm == "abc") {
    def("M", 1000);
    def("epsilon", 2.0);
    def("proposal_sd", Json::object());
    def("scale_nsim", 500);
  } else if (algorithm == "nlf") {
    def("lags", Json::array({1}));
    def("K", 4);
    def("B", 1000);
    def("J", 1000);
    def("est", Json::array());
    def("transform", true);
    def("maxit", 2000);
    def("reltol", 1e-8);
  }
  return c;
}

}  // namespace pkcli
