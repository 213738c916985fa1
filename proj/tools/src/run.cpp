#include "run.hpp"

#include <cmath>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <numeric>

#include <tbb/global_control.h>

#include <pompkit/pompkit.hpp>

namespace pkcli {

namespace pk = pompkit;
namespace fs = std::filesystem;

namespace {

struct Context {
  Json config;
  Json block;
  pk::ModelSpec model;
  pk::ParamVector params;
  pk::Rng algo_rng;
  fs::path output;
};

Json params_json(const pk::ParamVector& p) {
  Json j = Json::object();
  for (std::size_t i = 0; i < p.size(); ++i) j[p.name(i)] = p.value(i);
  return j;
}

Json vector_json(const std::vector<double>& v) {
  Json j = Json::array();
  for (double x : v) j.push_back(x);
  return j;
}

pk::ParamVector param_map(const pk::ModelSpec& model, const Json& j) {
  pk::ParamVector out;
  for (const auto& [name, value] : j.items()) {
    model.param_index(name);
    out.set(name, value.get<double>());
  }
  return out;
}

Json optional_json(const std::optional<double>& v) { return v ? Json(*v) : Json(nullptr); }

std::vector<std::string> string_list(const Json& j) {
  std::vector<std::string> out;
  for (const auto& e : j) out.push_back(e.get<std::string>());
  return out;
}

std::vector<int> int_list(const Json& j) {
  std::vector<int> out;
  for (const auto& e : j) out.push_back(e.get<int>());
  return out;
}

pk::ParamVector with_overrides(const pk::ModelSpec& model, pk::ParamVector base, const Json& overrides) {
  for (const auto& [name, value] : overrides.items()) {
    model.param_index(name);
    base.set(name, value.get<double>());
  }
  return base;
}

pk::NelderMeadOptions optimizer_options(const Json& block) {
  pk::NelderMeadOptions o;
  if (block.contains("maxit")) o.maxit = block["maxit"].get<int>();
  if (block.contains("reltol")) o.reltol = block["reltol"].get<double>();
  return o;
}

void write_json(const fs::path& path, const Json& j) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw pk::Error(pk::ErrorKind::Io, "cannot write " + path.string());
  f << j.dump(2) << '\n';
  if (!f) throw pk::Error(pk::ErrorKind::Io, "failed writing " + path.string());
}

Json result_header(const Context& c) {
  Json r;
  r["schema"] = kSchemaVersion;
  r["algorithm"] = c.config["algorithm"];
  r["model"] = c.config["model"];
  r["seed"] = c.config["seed"];
  r["data"] = c.config["data"];
  r["params"] = params_json(c.params);
  return r;
}

// Summary statistics of a set of chains, pooled over chains for means and
// standard deviations; ESS adds up over chains.
Json chain_summary(const std::vector<pk::Chain>& chains) {
  Json s;
  Json acceptance = Json::array();
  std::size_t evaluations = 0;
  for (const auto& ch : chains) {
    acceptance.push_back(ch.acceptance_rate);
    evaluations += ch.likelihood_evaluations;
  }
  s["acceptance"] = acceptance;
  s["likelihood_evaluations"] = evaluations;
  Json means = Json::object(), sds = Json::object(), ess = Json::object();
  for (const auto& name : chains.front().names) {
    std::vector<double> pooled;
    double total_ess = 0;
    for (const auto& ch : chains) {
      const auto col = ch.column(name);
      pooled.insert(pooled.end(), col.begin(), col.end());
      if (!col.empty()) total_ess += pk::effective_sample_size_chain(col).value;
    }
    if (pooled.empty()) continue;
    const double n = static_cast<double>(pooled.size());
    const double mean = std::accumulate(pooled.begin(), pooled.end(), 0.0) / n;
    double ss = 0;
    for (double v : pooled) ss += (v - mean) * (v - mean);
    means[name] = mean;
    sds[name] = pooled.size() > 1 ? std::sqrt(ss / (n - 1)) : 0.0;
    ess[name] = total_ess;
  }
  s["posterior_mean"] = means;
  s["posterior_sd"] = sds;
  s["ess"] = ess;
  return s;
}

void write_chains_csv(const fs::path& path, const std::vector<pk::Chain>& chains) {
  pk::CsvTable t;
  t.header = {"chain", "iteration"};
  for (const auto& n : chains.front().names) t.header.push_back(n);
  t.header.insert(t.header.end(), {"loglik", "logprior", "accepted"});
  const bool abc = chains.front().distances.has_value();
  if (abc) t.header.push_back("distance");
  for (std::size_t c = 0; c < chains.size(); ++c) {
    const auto& ch = chains[c];
    for (std::size_t m = 0; m < ch.size(); ++m) {
      std::vector<double> row{static_cast<double>(c + 1), static_cast<double>(m + 1)};
      for (Eigen::Index k = 0; k < ch.samples.cols(); ++k) row.push_back(ch.samples(static_cast<Eigen::Index>(m), k));
      row.push_back(ch.logliks[m]);
      row.push_back(ch.log_priors[m]);
      row.push_back(ch.accepted[m] ? 1.0 : 0.0);
      if (abc) row.push_back((*ch.distances)[m]);
      t.rows.push_back(std::move(row));
    }
  }
  pk::write_csv(path.string(), t);
}

pk::SeriesTransform series_transform(const std::string& name) {
  if (name == "sqrt") return [](double v) { return std::sqrt(v); };
  if (name == "log") return [](double v) { return std::log(v); };
  return {};
}

std::vector<pk::Probe> build_probes(const pk::ModelSpec& model, const Json& specs) {
  std::vector<pk::Probe> out;
  for (const auto& s : specs) {
    const auto type = s["type"].get<std::string>();
    const std::string var = s.contains("var") ? s["var"].get<std::string>() : model.observable_names.at(0);
    if (std::find(model.observable_names.begin(), model.observable_names.end(), var) == model.observable_names.end())
      throw pk::Error(pk::ErrorKind::Lookup, "probe variable '" + var + "' is not an observable of model '" +
                                                 model.name + "'");
    const auto transform = series_transform(s.value("transform", std::string("identity")));
    if (type == "mean") {
      out.push_back(pk::probe_mean(var, transform));
    } else if (type == "acf") {
      out.push_back(pk::probe_acf(var, int_list(s["lags"]), transform));
    } else if (type == "nlar") {
      out.push_back(pk::probe_nlar(var, int_list(s["lags"]), int_list(s["powers"]), transform, s.value("center", true)));
    } else {
      std::vector<double> ref;
      if (s.contains("ref") && s["ref"].is_array()) {
        for (const auto& v : s["ref"]) ref.push_back(v.get<double>());
      } else {
        for (double v : model.data.series(var))
          if (!std::isnan(v)) ref.push_back(v);
      }
      out.push_back(pk::probe_marginal(var, std::move(ref), s.value("npoly", 3), transform));
    }
  }
  return out;
}

int run_simulate(Context& c, std::ostream& out) {
  const auto nsim = c.block["nsim"].get<std::size_t>();
  const auto sims = pk::simulate(c.model, c.params, c.algo_rng, nsim);
  pk::CsvTable t;
  if (nsim > 1) t.header.push_back("sim");
  t.header.push_back("time");
  t.header.insert(t.header.end(), c.model.state_names.begin(), c.model.state_names.end());
  t.header.insert(t.header.end(), c.model.observable_names.begin(), c.model.observable_names.end());
  for (std::size_t i = 0; i < sims.size(); ++i) {
    const auto& s = sims[i];
    for (std::size_t n = 0; n < s.times.size(); ++n) {
      std::vector<double> row;
      if (nsim > 1) row.push_back(static_cast<double>(i + 1));
      row.push_back(s.times[n]);
      const auto x = pk::row_span(s.states, static_cast<Eigen::Index>(n + 1));
      const auto y = pk::row_span(s.observations, static_cast<Eigen::Index>(n));
      row.insert(row.end(), x.begin(), x.end());
      row.insert(row.end(), y.begin(), y.end());
      t.rows.push_back(std::move(row));
    }
  }
  pk::write_csv((c.output / "simulations.csv").string(), t);
  Json r = result_header(c);
  r["nsim"] = nsim;
  r["ntimes"] = c.model.data.size();
  write_json(c.output / "result.json", r);
  out << "wrote " << (c.output / "simulations.csv").string() << '\n';
  return kSuccess;
}

int run_pfilter(Context& c, std::ostream& out) {
  const auto np = c.block["np"].get<std::size_t>();
  const auto nrep = c.block["nrep"].get<std::size_t>();
  pk::PfilterOptions options;
  options.max_fail = c.block["max_fail"].get<std::size_t>();
  const pk::Rng base = c.algo_rng.split();
  std::vector<pk::FilterResult> runs;
  std::vector<double> ll;
  for (std::size_t r = 0; r < nrep; ++r) {
    pk::Rng stream = base.substream(r);
    runs.push_back(pk::pfilter(c.model, c.params, np, stream, options));
    ll.push_back(runs.back().loglik);
  }
  const auto& first = runs.front();
  Json r = result_header(c);
  r["np"] = np;
  r["nrep"] = nrep;
  if (nrep == 1) {
    r["loglik"] = first.loglik;
  } else {
    const auto lme = pk::logmeanexp(ll, true);
    r["loglik"] = lme.value;
    r["loglik_se"] = optional_json(lme.se);
    r["logliks"] = vector_json(ll);
  }
  r["cond_logliks"] = vector_json(first.cond_logliks);
  r["ess"] = vector_json(first.ess);
  r["failures"] = first.failures;
  write_json(c.output / "result.json", r);

  pk::CsvTable t;
  t.header = {"time", "cond_loglik", "ess"};
  for (const auto& s : c.model.state_names) t.header.push_back("filter_mean." + s);
  for (std::size_t n = 0; n < c.model.data.size(); ++n) {
    std::vector<double> row{c.model.data.times[n], first.cond_logliks[n], first.ess[n]};
    const auto m = pk::row_span(first.filter_means, static_cast<Eigen::Index>(n));
    row.insert(row.end(), m.begin(), m.end());
    t.rows.push_back(std::move(row));
  }
  pk::write_csv((c.output / "filter.csv").string(), t);
  out << "loglik " << pk::format_number(r["loglik"].get<double>()) << '\n';
  return kSuccess;
}

int run_kalman(Context& c, std::ostream& out) {
  if (c.model.name != "gompertz")
    throw pk::Error(pk::ErrorKind::Validation, "the kalman algorithm supports only the gompertz model");
  const auto obs = c.model.observable_names.at(0);
  Json r = result_header(c);
  r["loglik"] = pk::gompertz_kalman_loglik(c.model.data, c.params, 1.0, obs);
  if (c.block["mle"].get<bool>()) {
    const auto mle = pk::kalman_exact_mle(c.model.data, c.params, optimizer_options(c.block));
    r["mle"] = {{"theta", params_json(mle.theta)},
                {"loglik", mle.loglik},
                {"status", pk::to_string(mle.status)},
                {"evaluations", mle.evaluations}};
  }
  write_json(c.output / "result.json", r);
  out << "loglik " << pk::format_number(r["loglik"].get<double>()) << '\n';
  return kSuccess;
}

std::vector<pk::ParamVector> mif_starts(Context& c) {
  std::vector<pk::ParamVector> starts;
  if (c.block.contains("starts")) {
    for (const auto& s : c.block["starts"]) starts.push_back(with_overrides(c.model, c.params, s));
  } else if (c.block.contains("nstarts")) {
    pk::Rng box = c.algo_rng.split();
    const auto n = c.block["nstarts"].get<std::size_t>();
    for (std::size_t i = 0; i < n; ++i) {
      auto p = c.params;
      for (const auto& [name, range] : c.block["start_box"].items()) {
        c.model.param_index(name);
        const double lo = range[0].get<double>(), hi = range[1].get<double>();
        p.set(name, lo + (hi - lo) * box.uniform());
      }
      starts.push_back(std::move(p));
    }
  } else {
    starts.push_back(c.params);
  }
  return starts;
}

int run_mif(Context& c, std::ostream& out) {
  const Json& b = c.block;
  pk::MifSettings s;
  s.M = b["M"].get<std::size_t>();
  s.J = b["J"].get<std::size_t>();
  s.rw_sd = param_map(c.model, b["rw_sd"]);
  s.ivp_names = string_list(b["ivp"]);
  if (b.contains("ic_lag")) s.ic_lag = b["ic_lag"].get<std::size_t>();
  s.var_factor = b["var_factor"].get<double>();
  if (b.contains("cooling_factor")) s.cooling_factor = b["cooling_factor"].get<double>();
  s.cooling_fraction = b["cooling_fraction"].get<double>();
  s.cooling_window = b["cooling_window"].get<std::size_t>();
  s.transform = b["transform"].get<bool>();
  s.max_fail = b["max_fail"].get<std::size_t>();
  const auto np_eval = b["np_eval"].get<std::size_t>();
  const auto nrep_eval = b["nrep_eval"].get<std::size_t>();

  const auto starts = mif_starts(c);
  const pk::Rng runs = c.algo_rng.split();
  const pk::Rng evals = c.algo_rng.split();
  pk::PfilterOptions eval_options;
  eval_options.max_fail = s.max_fail;

  pk::CsvTable trace;
  trace.header = {"start", "iteration", "loglik"};
  trace.header.insert(trace.header.end(), c.model.param_names.begin(), c.model.param_names.end());

  Json fits = Json::array();
  std::size_t best = 0;
  double best_ll = -std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < starts.size(); ++i) {
    s.start = starts[i];
    pk::Rng stream = runs.substream(i);
    const auto res = pk::mif(c.model, s, stream);
    for (std::size_t m = 0; m < res.logliks.size(); ++m) {
      std::vector<double> row{static_cast<double>(i + 1), static_cast<double>(m + 1), res.logliks[m]};
      const auto th = pk::row_span(res.trace, static_cast<Eigen::Index>(m));
      row.insert(row.end(), th.begin(), th.end());
      trace.rows.push_back(std::move(row));
    }
    std::vector<double> ll;
    for (std::size_t r = 0; r < nrep_eval; ++r) {
      pk::Rng e = evals.substream(i, r);
      ll.push_back(pk::pfilter(c.model, res.theta_hat, np_eval, e, eval_options).loglik);
    }
    const auto lme = pk::logmeanexp(ll, true);
    Json fit;
    fit["start"] = params_json(starts[i]);
    fit["theta_hat"] = params_json(res.theta_hat);
    fit["loglik"] = lme.value;
    fit["loglik_se"] = optional_json(lme.se);
    fits.push_back(std::move(fit));
    if (i == 0 || lme.value > best_ll) {
      best = i;
      best_ll = lme.value;
    }
  }
  pk::write_csv((c.output / "trace.csv").string(), trace);

  Json r = result_header(c);
  r["cooling_factor"] = pk::mif_cooling_factor(s);
  r["best_start"] = best + 1;
  r["theta_hat"] = fits[best]["theta_hat"];
  r["loglik"] = fits[best]["loglik"];
  r["loglik_se"] = fits[best]["loglik_se"];
  r["fits"] = fits;
  write_json(c.output / "result.json", r);
  out << "loglik " << pk::format_number(best_ll) << '\n';
  return kSuccess;
}

int run_pmcmc(Context& c, std::ostream& out) {
  const Json& b = c.block;
  pk::Proposal proposal{param_map(c.model, b["proposal_sd"])};
  pk::PfilterOptions options;
  options.max_fail = b["max_fail"].get<std::size_t>();
  const pk::Rng base = c.algo_rng.split();
  std::vector<pk::Chain> chains;
  for (std::size_t k = 0; k < b["nchains"].get<std::size_t>(); ++k) {
    pk::Rng stream = base.substream(k);
    chains.push_back(pk::pmcmc(c.model, c.params, b["M"].get<std::size_t>(), b["np"].get<std::size_t>(), proposal,
                               stream, options));
  }
  write_chains_csv(c.output / "chain.csv", chains);
  Json r = result_header(c);
  r.update(chain_summary(chains));
  write_json(c.output / "result.json", r);
  out << "acceptance " << r["acceptance"].dump() << '\n';
  return kSuccess;
}

int run_probe(Context& c, std::ostream& out) {
  const auto probes = build_probes(c.model, c.block["probes"]);
  const auto nsim = c.block["nsim"].get<std::size_t>();
  pk::Rng probe_rng = c.algo_rng.split();
  const auto res = pk::probe(c.model, c.params, probes, nsim, probe_rng);
  pk::write_probe_csv((c.output / "simulations.csv").string(), res);
  Json r = result_header(c);
  r["nsim"] = nsim;
  r["probes"] = res.names;
  r["observed"] = vector_json(res.observed);
  r["synth_loglik"] = res.synth_loglik;
  r["p_values"] = vector_json(res.p_values);
  if (c.block.contains("match")) {
    const Json& m = c.block["match"];
    const auto est = m.contains("est") ? string_list(m["est"]) : std::vector<std::string>{};
    pk::Rng match_rng = c.algo_rng.split();
    const auto fit = pk::probe_match(c.model, c.params, est, probes, nsim, match_rng, optimizer_options(m),
                                     m.value("transform", true));
    r["match"] = {{"est", est},
                  {"theta", params_json(fit.theta)},
                  {"synth_loglik", fit.synth_loglik},
                  {"status", pk::to_string(fit.status)},
                  {"evaluations", fit.evaluations}};
  }
  write_json(c.output / "result.json", r);
  out << "synth_loglik " << pk::format_number(res.synth_loglik) << '\n';
  return kSuccess;
}

int run_abc(Context& c, std::ostream& out) {
  const Json& b = c.block;
  pk::AbcSettings s;
  s.probes = build_probes(c.model, b["probes"]);
  s.epsilon = b["epsilon"].get<double>();
  s.proposal = pk::Proposal{param_map(c.model, b["proposal_sd"])};
  s.M = b["M"].get<std::size_t>();
  pk::Rng scale_rng = c.algo_rng.split();
  if (b.contains("scale")) {
    for (const auto& v : b["scale"]) s.scale.push_back(v.get<double>());
  } else {
    s.scale = pk::compute_probe_scales(c.model, c.params, s.probes, b["scale_nsim"].get<std::size_t>(), scale_rng);
  }
  pk::Rng chain_rng = c.algo_rng.split();
  std::vector<pk::Chain> chains{pk::abc(c.model, c.params, s, chain_rng)};
  write_chains_csv(c.output / "chain.csv", chains);
  Json r = result_header(c);
  r["epsilon"] = s.epsilon;
  r["scale"] = vector_json(s.scale);
  r.update(chain_summary(chains));
  write_json(c.output / "result.json", r);
  out << "acceptance " << r["acceptance"].dump() << '\n';
  return kSuccess;
}

int run_nlf(Context& c, std::ostream& out) {
  const Json& b = c.block;
  pk::NlfSettings s;
  s.lags = int_list(b["lags"]);
  s.K = b["K"].get<int>();
  s.B = b["B"].get<std::size_t>();
  s.J = b["J"].get<std::size_t>();
  s.est = string_list(b["est"]);
  s.start = c.params;
  s.transform = b["transform"].get<bool>();
  s.optimizer = optimizer_options(b);
  for (const auto& name : s.est) c.model.param_index(name);
  const auto fit = pk::nlf_fit(c.model, s, c.algo_rng);
  Json r = result_header(c);
  r["lags"] = s.lags;
  r["theta"] = params_json(fit.theta);
  r["quasi_loglik"] = fit.quasi_loglik;
  r["status"] = pk::to_string(fit.status);
  r["evaluations"] = fit.evaluations;
  write_json(c.output / "result.json", r);
  out << "quasi_loglik " << pk::format_number(fit.quasi_loglik) << '\n';
  return kSuccess;
}

int dispatch(Context& c, std::ostream& out) {
  const auto a = c.config["algorithm"].get<std::string>();
  if (a == "simulate") return run_simulate(c, out);
  if (a == "pfilter") return run_pfilter(c, out);
  if (a == "kalman") return run_kalman(c, out);
  if (a == "mif") return run_mif(c, out);
  if (a == "pmcmc") return run_pmcmc(c, out);
  if (a == "probe") return run_probe(c, out);
  if (a == "abc") return run_abc(c, out);
  return run_nlf(c, out);
}

pk::ModelSpec load_model(const Json& config) {
  const auto name = config["model"].get<std::string>();
  if (name == "sir-seasonal" && config.contains("covariates"))
    return pk::sir_seasonal_model(pk::read_covariates(config["covariates"].get<std::string>()));
  return pk::builtin_model(name);
}

bool is_input_error(pk::ErrorKind k) {
  return k == pk::ErrorKind::Validation || k == pk::ErrorKind::Lookup || k == pk::ErrorKind::Io ||
         k == pk::ErrorKind::MissingComponent;
}

}  // namespace

int run_config(const Json& raw, std::ostream& out, std::ostream& err) {
  const Json config = with_defaults(raw);
  const tbb::global_control threads(tbb::global_control::max_allowed_parallelism,
                                    config["threads"].get<std::size_t>());
  try {
    Context c;
    c.config = config;
    c.block = config[config["algorithm"].get<std::string>()];
    c.model = load_model(config);
    c.params = with_overrides(c.model, c.model.default_params(), config["params"]);
    c.model.params = c.params;
    pk::Rng master(config["seed"].get<std::uint64_t>());
    pk::Rng data_rng = master.split();
    c.algo_rng = master.split();
    const auto data = config["data"].get<std::string>();
    if (data == "simulate") {
      if (config["algorithm"] != "simulate") c.model = pk::with_simulated_data(c.model, c.params, data_rng);
    } else {
      c.model.data = pk::read_time_series(data, c.model.observable_names, c.model.data.t0);
    }
    c.output = config["output"].get<std::string>();
    std::error_code ec;
    fs::create_directories(c.output, ec);
    if (ec) throw pk::Error(pk::ErrorKind::Io, "cannot create output directory " + c.output.string());
    return dispatch(c, out);
  } catch (const pk::Error& e) {
    err << "pomp-kit: " << e.what() << '\n';
    return is_input_error(e.kind()) ? kValidationFailure : kAlgorithmFailure;
  } catch (const std::exception& e) {
    err << "pomp-kit: " << e.what() << '\n';
    return kAlgorithmFailure;
  }
}

}  // namespace pkcli
