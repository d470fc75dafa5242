// Copyright 2026 The qdm Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

// qdm command-line driver.
//
//   qdm <subcommand> [--config FILE] [--seed N] [--shots N] [--randomizations N]
//                    [--n-id N] [--depths 1,2,3] [--noise NAME|FILE] [--out DIR]
//
// Exit codes: 0 ok, 2 configuration error, 3 numerical invariant violation.

#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <set>
#include <sstream>

#include "CLI11.hpp"
#include "qdm/qdm.hpp"

namespace fs = std::filesystem;
using qdm::Json;

namespace {

constexpr const char* kReportSchema = "qf-report/1";

void log(const std::string& msg) { std::cerr << "[qdm] " << msg << "\n"; }

// ---------------------------------------------------------------------------
// Configuration
// ---------------------------------------------------------------------------

struct Overrides {
  std::optional<std::uint64_t> seed, shots;
  std::optional<int> randomizations, n_id;
  std::optional<std::string> depths, noise, out;
};

struct Config {
  std::string experiment;
  int n = 3;
  int d = 3;
  std::vector<int> depths;
  int instances = 20;
  int randomizations = 20;
  std::uint64_t shots = 1024;
  int n_id = 1;
  std::vector<int> n_ids{1, 2, 3};
  std::string fold_strategy = "order_power";
  std::string noise = "paper-default";
  std::uint64_t seed = 1;
  bool rcal = true;
  std::uint64_t rcal_shots = 100000;
  int purify_steps = 20;
  // twirl-study
  std::vector<int> dims{2, 3, 5};
  std::vector<int> qudits{2, 2, 2};
  std::vector<int> grid{1, 2, 3, 4, 5, 6, 7, 8, 9, 10, 11, 12, 13, 14, 15, 16, 17, 18, 19, 20};
  int trials = 50;
  double target_fraction = 0.70;
  double eps = 0.01;
  // phase-char
  int points = 24;
  double inject_phase = 0.0;
  // tomo
  std::string circuit;
};

Config defaults_for(const std::string& kind) {
  Config c;
  c.experiment = kind;
  if (kind == "rcs" || kind == "nid-sweep") {
    c.n = 2;
    c.depths = {1, 2, 3, 6};
    c.n_id = 3;
  }
  if (kind == "rcal" || kind == "tomo") c.n = 3;
  if (kind == "phase-char") c.n = 2;
  return c;
}

std::vector<int> parse_int_list(const std::string& s, const std::string& what) {
  std::vector<int> out;
  std::stringstream ss(s);
  std::string tok;
  while (std::getline(ss, tok, ',')) {
    try {
      std::size_t pos = 0;
      out.push_back(std::stoi(tok, &pos));
      if (pos != tok.size()) throw std::invalid_argument(tok);
    } catch (const std::exception&) {
      throw qdm::ConfigError(what + ": '" + tok + "' is not an integer");
    }
  }
  if (out.empty()) throw qdm::ConfigError(what + ": empty list");
  return out;
}

void load_config_file(Config& c, const std::string& path) {
  std::ifstream in(path);
  if (!in) throw qdm::ConfigError("cannot read config file '" + path + "'");
  std::stringstream buf;
  buf << in.rdbuf();
  const qdm::DocReader r(buf.str(), path);
  const Json& root = r.root();
  if (!root.is_object()) r.fail("", "config must be a JSON object");
  static const std::set<std::string> known{
      "experiment", "n",     "d",      "depths", "instances",       "randomizations", "shots",  "n_id",
      "n_ids",      "fold_strategy", "noise", "seed", "rcal", "rcal_shots", "purify_steps", "dims", "qudits",
      "grid",       "trials", "target_fraction", "eps", "points", "inject_phase", "circuit"};
  for (auto it = root.begin(); it != root.end(); ++it)
    if (!known.count(it.key())) r.fail("/" + it.key(), "unknown config key");
  auto has = [&](const char* k) { return root.contains(k); };
  auto p = [](const char* k) { return std::string("/") + k; };
  if (has("experiment")) {
    const auto e = r.get_string(root["experiment"], "/experiment");
    if (e != c.experiment) r.fail("/experiment", "config is for '" + e + "', not '" + c.experiment + "'");
  }
  if (has("n")) c.n = static_cast<int>(r.get_int(root["n"], p("n")));
  if (has("d")) c.d = static_cast<int>(r.get_int(root["d"], p("d")));
  if (has("depths")) c.depths = r.get_int_list(root["depths"], p("depths"));
  if (has("instances")) c.instances = static_cast<int>(r.get_int(root["instances"], p("instances")));
  if (has("randomizations")) c.randomizations = static_cast<int>(r.get_int(root["randomizations"], p("randomizations")));
  if (has("shots")) c.shots = r.get_uint(root["shots"], p("shots"));
  if (has("n_id")) c.n_id = static_cast<int>(r.get_int(root["n_id"], p("n_id")));
  if (has("n_ids")) c.n_ids = r.get_int_list(root["n_ids"], p("n_ids"));
  if (has("fold_strategy")) c.fold_strategy = r.get_string(root["fold_strategy"], p("fold_strategy"));
  if (has("noise")) c.noise = r.get_string(root["noise"], p("noise"));
  if (has("seed")) c.seed = r.get_uint(root["seed"], p("seed"));
  if (has("rcal")) {
    if (!root["rcal"].is_boolean()) r.fail("/rcal", "expected true or false");
    c.rcal = root["rcal"].get<bool>();
  }
  if (has("rcal_shots")) c.rcal_shots = r.get_uint(root["rcal_shots"], p("rcal_shots"));
  if (has("purify_steps")) c.purify_steps = static_cast<int>(r.get_int(root["purify_steps"], p("purify_steps")));
  if (has("dims")) c.dims = r.get_int_list(root["dims"], p("dims"));
  if (has("qudits")) c.qudits = r.get_int_list(root["qudits"], p("qudits"));
  if (has("grid")) c.grid = r.get_int_list(root["grid"], p("grid"));
  if (has("trials")) c.trials = static_cast<int>(r.get_int(root["trials"], p("trials")));
  if (has("target_fraction")) c.target_fraction = r.get_double(root["target_fraction"], p("target_fraction"));
  if (has("eps")) c.eps = r.get_double(root["eps"], p("eps"));
  if (has("points")) c.points = static_cast<int>(r.get_int(root["points"], p("points")));
  if (has("inject_phase")) c.inject_phase = r.get_double(root["inject_phase"], p("inject_phase"));
  if (has("circuit")) c.circuit = r.get_string(root["circuit"], p("circuit"));
}

void apply_overrides(Config& c, const Overrides& o) {
  if (o.seed) c.seed = *o.seed;
  if (o.shots) c.shots = *o.shots;
  if (o.randomizations) c.randomizations = *o.randomizations;
  if (o.n_id) c.n_id = *o.n_id;
  if (o.depths) c.depths = parse_int_list(*o.depths, "--depths");
  if (o.noise) c.noise = *o.noise;
}

void check_config(const Config& c) {
  auto positive = [](long long v, const char* name) {
    if (v < 1) throw qdm::ConfigError(std::string(name) + " must be positive");
  };
  positive(c.n, "n");
  positive(c.instances, "instances");
  positive(c.randomizations, "randomizations");
  positive(c.n_id, "n_id");
  positive(c.trials, "trials");
  positive(c.points, "points");
  if (c.d < 2) throw qdm::ConfigError("d must be at least 2");
  if (c.purify_steps < 0) throw qdm::ConfigError("purify_steps must be nonnegative");
  for (int k : c.n_ids) positive(k, "n_ids entries");
  if (c.fold_strategy != "order_power" && c.fold_strategy != "inverse_pair")
    throw qdm::ConfigError("fold_strategy must be 'order_power' or 'inverse_pair'");
}

qdm::FoldStrategy strategy_of(const Config& c) {
  return c.fold_strategy == "inverse_pair" ? qdm::FoldStrategy::InversePair : qdm::FoldStrategy::OrderPower;
}

std::string read_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw qdm::ConfigError("cannot read '" + path + "'");
  std::stringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

/// Preset name or path to a noise document.
qdm::NoiseModel load_noise(const Config& c, int n, Json& provenance) {
  if (c.noise == "none" || c.noise == "paper-default") {
    provenance = {{"source", "preset"}, {"name", c.noise}};
    auto m = qdm::noise_preset(c.noise, n, c.d);
    if (!m.metadata.is_null()) provenance["metadata"] = m.metadata;
    return m;
  }
  if (!fs::exists(c.noise)) throw qdm::ConfigError("noise '" + c.noise + "' is neither a preset nor a readable file");
  auto m = qdm::parse_noise(read_file(c.noise));
  if (m.n() != n || m.d() != c.d)
    throw qdm::ConfigError("noise file register (n=" + std::to_string(m.n()) + ", d=" + std::to_string(m.d()) +
                           ") does not match the experiment (n=" + std::to_string(n) + ", d=" + std::to_string(c.d) + ")");
  provenance = {{"source", "file"}, {"path", c.noise}};
  if (!m.metadata.is_null()) provenance["metadata"] = m.metadata;
  return m;
}

Json config_json(const Config& c) {
  return {{"experiment", c.experiment},
          {"n", c.n},
          {"d", c.d},
          {"depths", c.depths},
          {"instances", c.instances},
          {"randomizations", c.randomizations},
          {"shots", c.shots},
          {"n_id", c.n_id},
          {"n_ids", c.n_ids},
          {"fold_strategy", c.fold_strategy},
          {"noise", c.noise},
          {"seed", c.seed},
          {"rcal", c.rcal},
          {"rcal_shots", c.rcal_shots},
          {"purify_steps", c.purify_steps},
          {"dims", c.dims},
          {"qudits", c.qudits},
          {"grid", c.grid},
          {"trials", c.trials},
          {"target_fraction", c.target_fraction},
          {"eps", c.eps},
          {"points", c.points},
          {"inject_phase", c.inject_phase},
          {"circuit", c.circuit}};
}

// ---------------------------------------------------------------------------
// Output
// ---------------------------------------------------------------------------

std::string num(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.12g", v);
  return buf;
}

struct MetricRow {
  std::string experiment;
  int n = 0, d = 0;
  std::optional<int> depth, instance, n_id;
  std::string method, metric;
  double value = 0;
  std::optional<double> std_error;
  bool quasi = false;
};

class Csv {
 public:
  explicit Csv(std::string header) : text_(std::move(header) + "\n") {}
  void row(const std::vector<std::string>& cells) {
    for (std::size_t i = 0; i < cells.size(); ++i) text_ += (i ? "," : "") + cells[i];
    text_ += "\n";
  }
  const std::string& str() const { return text_; }

 private:
  std::string text_;
};

std::string opt(const std::optional<int>& v) { return v ? std::to_string(*v) : ""; }
std::string opt(const std::optional<double>& v) { return v ? num(*v) : ""; }

struct Artifacts {
  Json results = Json::object();
  std::vector<MetricRow> rows;
  std::map<std::string, std::string> plots;  ///< file name -> CSV text
  bool invariant_failure = false;
};

void write_file(const fs::path& p, const std::string& text) {
  std::ofstream out(p, std::ios::binary);
  if (!out) throw qdm::ConfigError("cannot write '" + p.string() + "'");
  out << text;
}

std::string metrics_csv(const std::vector<MetricRow>& rows) {
  Csv csv("experiment,n,d,depth,instance,n_id,method,metric,value,std_error,quasi");
  for (const auto& r : rows)
    csv.row({r.experiment, std::to_string(r.n), std::to_string(r.d), opt(r.depth), opt(r.instance), opt(r.n_id), r.method,
             r.metric, num(r.value), opt(r.std_error), r.quasi ? "1" : "0"});
  return csv.str();
}

// ---------------------------------------------------------------------------
// Subcommands
// ---------------------------------------------------------------------------

Json rcal_json(const std::optional<qdm::RcalResult>& r) {
  if (!r) return nullptr;
  Json conf = Json::array();
  for (const auto& c : r->confusions) conf.push_back(qdm::real_matrix_to_json(c.matrix()));
  return {{"shots", r->shots}, {"condition_numbers", r->condition_numbers}, {"confusions", conf}};
}

std::string density_csv(const qdm::Matrix& m) {
  Csv csv("row,col,re,im");
  for (Eigen::Index i = 0; i < m.rows(); ++i)
    for (Eigen::Index j = 0; j < m.cols(); ++j)
      csv.row({std::to_string(i), std::to_string(j), num(m(i, j).real()), num(m(i, j).imag())});
  return csv.str();
}

Artifacts run_ghz(const Config& c, const qdm::NoiseModel& noise) {
  qdm::GhzConfig g;
  g.n = c.n;
  g.d = c.d;
  g.randomizations = c.randomizations;
  g.shots = c.shots;
  g.n_id = c.n_id;
  g.strategy = strategy_of(c);
  g.seed = c.seed;
  g.rcal = c.rcal;
  g.rcal_shots = c.rcal_shots;
  g.purify_steps = c.purify_steps;
  const auto r = qdm::ghz_experiment(g, noise);
  Artifacts a;
  const int depth = static_cast<int>(qdm::ghz_circuit(c.n, c.d).num_hard());
  Json methods = Json::array();
  for (const auto& m : r.methods) {
    const std::string name = qdm::to_string(m.method);
    methods.push_back({{"method", name},
                       {"fidelity", m.fidelity},
                       {"raw_fidelity", m.raw_fidelity},
                       {"purified_fidelity", m.purified_fidelity},
                       {"purification_residuals", m.purification_trace},
                       {"circuits", m.circuits},
                       {"alphas", m.alphas},
                       {"density_matrix", qdm::matrix_to_json(m.projected)}});
    const std::optional<int> nid = m.method == qdm::MitigationMethod::RCNOX ? std::optional<int>(c.n_id) : std::nullopt;
    a.rows.push_back({"ghz", c.n, c.d, depth, 0, nid, name, "fidelity", m.fidelity, std::nullopt, false});
    a.rows.push_back({"ghz", c.n, c.d, depth, 0, nid, name + "+purify", "fidelity", m.purified_fidelity, std::nullopt, false});
    a.plots["ghz_density_" + std::string(name == "rc+nox" ? "rc_nox" : name) + ".csv"] = density_csv(m.projected);
  }
  a.results = {{"settings", r.settings},
               {"methods", methods},
               {"rcal", rcal_json(r.rcal)},
               {"fold_commutation_diagnostic", r.fold_diagnostic}};
  return a;
}

qdm::RcsConfig rcs_config(const Config& c) {
  qdm::RcsConfig r;
  r.n = c.n;
  r.depths = c.depths;
  r.instances = c.instances;
  r.randomizations = c.randomizations;
  r.shots = c.shots;
  r.n_id = c.n_id;
  r.strategy = strategy_of(c);
  r.seed = c.seed;
  r.rcal = c.rcal;
  r.rcal_shots = c.rcal_shots;
  return r;
}

Json rcs_summary_json(const qdm::RcsResult& r) {
  Json s = Json::array();
  for (const auto& x : r.summary)
    s.push_back({{"depth", x.depth},
                 {"mean_vd_bare", x.mean_bare},
                 {"se_vd_bare", x.se_bare},
                 {"mean_vd_mitigated", x.mean_mitigated},
                 {"se_vd_mitigated", x.se_mitigated},
                 {"fractional_improvement", x.improvement}});
  return s;
}

Artifacts run_rcs(const Config& c, const qdm::NoiseModel& noise) {
  if (c.d != 3) throw qdm::ConfigError("rcs runs on qutrits (d = 3)");
  if (c.depths.empty()) throw qdm::ConfigError("depths must be nonempty");
  const auto r = qdm::rcs_experiment(rcs_config(c), noise);
  Artifacts a;
  Csv vd("depth,instance,method,vd");
  Json inst = Json::array();
  for (const auto& x : r.instances) {
    a.rows.push_back({"rcs", c.n, c.d, x.depth, x.instance, std::nullopt, "bare", "vd", x.vd_bare, std::nullopt, false});
    a.rows.push_back({"rcs", c.n, c.d, x.depth, x.instance, c.n_id, "rc+nox", "vd", x.vd_mitigated, std::nullopt,
                      x.mitigated_quasi});
    vd.row({std::to_string(x.depth), std::to_string(x.instance), "bare", num(x.vd_bare)});
    vd.row({std::to_string(x.depth), std::to_string(x.instance), "rc+nox", num(x.vd_mitigated)});
    inst.push_back({{"depth", x.depth},
                    {"instance", x.instance},
                    {"circuit_seed", x.circuit_seed},
                    {"vd_bare", x.vd_bare},
                    {"vd_mitigated", x.vd_mitigated},
                    {"mitigated_quasi", x.mitigated_quasi},
                    {"mitigated_negative_mass", x.mitigated_negative_mass}});
  }
  a.plots["rcs_vd.csv"] = vd.str();
  a.results = {{"pairing", c.n == 3 ? "CZdag alternates (0,1) on even layers and (1,2) on odd layers" : "CZdag on (0,1)"},
               {"summary", rcs_summary_json(r)},
               {"instances", inst},
               {"rcal", rcal_json(r.rcal)}};
  return a;
}

Artifacts run_nid_sweep(const Config& c, const qdm::NoiseModel& noise) {
  if (c.d != 3) throw qdm::ConfigError("nid-sweep runs on qutrits (d = 3)");
  const auto s = qdm::n_id_sweep(rcs_config(c), c.n_ids, noise);
  Artifacts a;
  Csv vd("depth,instance,n_id,method,vd");
  Json runs = Json::array();
  for (std::size_t k = 0; k < s.runs.size(); ++k) {
    const int nid = s.n_ids[k];
    for (const auto& x : s.runs[k].instances) {
      if (k == 0) {
        a.rows.push_back({"nid-sweep", c.n, c.d, x.depth, x.instance, std::nullopt, "bare", "vd", x.vd_bare, std::nullopt, false});
        vd.row({std::to_string(x.depth), std::to_string(x.instance), "", "bare", num(x.vd_bare)});
      }
      a.rows.push_back({"nid-sweep", c.n, c.d, x.depth, x.instance, nid, "rc+nox", "vd", x.vd_mitigated, std::nullopt,
                        x.mitigated_quasi});
      vd.row({std::to_string(x.depth), std::to_string(x.instance), std::to_string(nid), "rc+nox", num(x.vd_mitigated)});
    }
    runs.push_back({{"n_id", nid}, {"summary", rcs_summary_json(s.runs[k])}});
  }
  a.plots["nid_vd.csv"] = vd.str();
  a.results = {{"runs", runs}};
  return a;
}

Artifacts run_twirl_study(const Config& c) {
  qdm::TwirlDecayConfig t;
  t.dims = c.dims;
  t.qudits = c.qudits;
  t.grid = c.grid;
  t.trials = c.trials;
  t.target_fraction = c.target_fraction;
  t.eps = c.eps;
  t.seed = c.seed;
  const auto r = qdm::twirl_decay_study(t);
  Artifacts a;
  Csv curve("d,n,N,mean,std,se");
  Json pts = Json::array();
  for (const auto& p : r.points) {
    a.rows.push_back({"twirl-study", p.n, p.d, p.N, std::nullopt, std::nullopt, "twirl", "coherent_fraction", p.mean, p.se, false});
    curve.row({std::to_string(p.d), std::to_string(p.n), std::to_string(p.N), num(p.mean), num(p.std), num(p.se)});
    pts.push_back({{"d", p.d}, {"n", p.n}, {"N", p.N}, {"mean", p.mean}, {"std", p.std}, {"se", p.se}});
  }
  Json fits = Json::array();
  for (std::size_t di = 0; di < t.dims.size(); ++di) {
    std::vector<double> x, lx, y;
    for (const auto& p : r.points)
      if (p.d == t.dims[di] && p.n == t.qudits[di] && p.mean > 0) {
        x.push_back(p.N);
        lx.push_back(std::log(p.N));
        y.push_back(std::log(p.mean));
      }
    if (x.size() < 2) continue;
    const auto semi = qdm::linear_fit(x, y);
    const auto loglog = qdm::linear_fit(lx, y);
    fits.push_back({{"d", t.dims[di]},
                    {"semilog_slope", semi[1]},
                    {"semilog_r2", semi[2]},
                    {"loglog_slope", loglog[1]},
                    {"loglog_r2", loglog[2]}});
  }
  a.plots["twirl_decay.csv"] = curve.str();
  a.results = {{"points", pts},
               {"fits", fits},
               {"exhaustive_fraction", r.exhaustive},
               {"start_fraction_min", *std::min_element(r.start_fractions.begin(), r.start_fractions.end())},
               {"start_fraction_max", *std::max_element(r.start_fractions.begin(), r.start_fractions.end())}};
  return a;
}

Artifacts run_rcal(const Config& c, const qdm::NoiseModel& noise) {
  const auto r = qdm::rcal_confusion(noise, c.shots, c.seed);
  Artifacts a;
  Csv conf("qudit,reported,prepared,probability");
  for (std::size_t q = 0; q < r.confusions.size(); ++q) {
    const auto& m = r.confusions[q].matrix();
    for (Eigen::Index k = 0; k < m.cols(); ++k) {
      const double p = m(k, k);
      const double se = c.shots ? std::sqrt(p * (1 - p) / static_cast<double>(c.shots)) : 0.0;
      a.rows.push_back({"rcal", c.n, c.d, std::nullopt, static_cast<int>(q), std::nullopt, "rcal",
                        "p" + std::to_string(k) + "|" + std::to_string(k), p, se, false});
      for (Eigen::Index j = 0; j < m.rows(); ++j)
        conf.row({std::to_string(q), std::to_string(j), std::to_string(k), num(m(j, k))});
    }
  }
  a.plots["rcal_confusion.csv"] = conf.str();
  a.results = {{"rcal", rcal_json(r)}, {"singular", r.singular}};
  if (r.singular) a.invariant_failure = true;
  return a;
}

Artifacts run_tomo(const Config& c, const qdm::NoiseModel& noise) {
  const qdm::Circuit circ = c.circuit.empty() ? qdm::ghz_circuit(c.n, c.d) : qdm::parse_circuit(read_file(c.circuit));
  if (circ.n() != c.n || circ.d() != c.d) throw qdm::ConfigError("circuit register does not match n and d");
  qdm::check_noise_fits(circ, &noise);
  const auto readout = qdm::calibrate_readout(noise, c.rcal, c.rcal_shots, qdm::derive_seed(c.seed, {99}));
  const auto settings = qdm::tomo_settings(c.n, c.d);
  const qdm::Matrix rho = qdm::simulate_matrix(circ, &noise);
  const auto f = qdm::tomography_frequencies(rho, c.n, c.d, settings, &noise, c.shots, c.seed, readout.span());
  const auto rec = qdm::reconstruct(qdm::estimate_weyl_expectations(settings, f, c.n, c.d), c.n, c.d);
  const qdm::Matrix ideal = qdm::simulate_matrix(circ, nullptr);
  const qdm::DensityMatrix sigma(ideal);
  const double fid = qdm::fidelity(rec.projected, sigma);
  const double err = (rec.projected.data() - rho).norm();
  Artifacts a;
  a.rows.push_back({"tomo", c.n, c.d, static_cast<int>(circ.num_hard()), 0, std::nullopt, "bare", "fidelity", fid, std::nullopt, false});
  a.rows.push_back({"tomo", c.n, c.d, static_cast<int>(circ.num_hard()), 0, std::nullopt, "bare", "frobenius_error_vs_noisy",
                    err, std::nullopt, false});
  a.plots["tomo_density.csv"] = density_csv(rec.projected.data());
  a.results = {{"settings", settings.size()},
               {"fidelity", fid},
               {"frobenius_error_vs_noisy_state", err},
               {"density_matrix", qdm::matrix_to_json(rec.projected.data())},
               {"rcal", rcal_json(readout.rcal)}};
  return a;
}

Artifacts run_phase_char(const Config& c, qdm::NoiseModel noise) {
  if (c.d != 3) throw qdm::ConfigError("phase-char runs on qutrits (d = 3)");
  if (c.n != 2 && c.n != 3) throw qdm::ConfigError("phase-char needs 2 or 3 qutrits");
  if (c.inject_phase != 0.0)
    for (const char* sig : {"CZdag(0,1)", "CZdag(1,0)"})
      noise.add_hard(sig, {0, 1}, qdm::coherent_phase_error({c.inject_phase, 0, 0, 0}));
  Artifacts a;
  Csv sweep("study,control_state,phi,population");
  Json studies = Json::array();
  struct Study {
    const char* name;
    qdm::PhaseCharConfig cfg;
    bool spectator;
  };
  std::vector<Study> list{{"gate", {0, 1, {0, 1}, 0, 1, c.points}, false}};
  if (c.n == 3) list.push_back({"spectator", {2, 1, {0, 1}, 0, 1, c.points}, true});
  for (const auto& st : list) {
    Json phases = Json::array();
    for (int s = 0; s < 3; ++s) {
      const auto r = qdm::characterize_entangling_phase(noise, s, st.cfg);
      const double ideal = st.spectator ? 0.0 : qdm::wrap_phase(-2.0 * std::numbers::pi * s / 3.0);
      const double offset = qdm::wrap_phase(r.phase - ideal);
      phases.push_back({{"control_state", s}, {"phase", r.phase}, {"ideal", ideal}, {"offset", offset}, {"r2", r.r2},
                        {"amplitude", r.amplitude}});
      a.rows.push_back({"phase-char", c.n, c.d, std::nullopt, s, std::nullopt, st.name, "phase", r.phase, std::nullopt, false});
      a.rows.push_back({"phase-char", c.n, c.d, std::nullopt, s, std::nullopt, st.name, "offset", offset, std::nullopt, false});
      for (std::size_t k = 0; k < r.sweep.size(); ++k)
        sweep.row({st.name, std::to_string(s), num(r.sweep[k]), num(r.population[k])});
    }
    studies.push_back({{"study", st.name},
                       {"control", st.cfg.control},
                       {"probe", st.cfg.probe},
                       {"pair", {st.cfg.pair.first, st.cfg.pair.second}},
                       {"phases", phases}});
  }
  a.plots["phase_sweep.csv"] = sweep.str();
  a.results = {{"inject_phase", c.inject_phase}, {"studies", studies}};
  return a;
}

// Invariant suite for `validate`.
Artifacts run_validate(const Config& c) {
  Artifacts a;
  Json checks = Json::array();
  auto record = [&](const std::string& name, double value, double tol) {
    const bool ok = value <= tol;
    if (!ok) a.invariant_failure = true;
    checks.push_back({{"check", name}, {"value", value}, {"tolerance", tol}, {"pass", ok}});
    a.rows.push_back({"validate", 0, 0, std::nullopt, std::nullopt, std::nullopt, ok ? "pass" : "fail", name, value, std::nullopt, false});
    log(std::string(ok ? "ok   " : "FAIL ") + name + " = " + num(value));
  };
  qdm::Rng rng(c.seed);
  // Weyl algebra
  double weyl = 0;
  for (int d : {2, 3, 5})
    for (int t = 0; t < 50; ++t) {
      std::uniform_int_distribution<std::size_t> pick(0, qdm::WeylLabel::count(d, 2) - 1);
      const auto la = qdm::WeylLabel::from_index(d, 2, pick(rng)), lb = qdm::WeylLabel::from_index(d, 2, pick(rng));
      const qdm::Matrix ma = qdm::weyl_matrix(la), mb = qdm::weyl_matrix(lb);
      weyl = std::max(weyl, (qdm::weyl_matrix(qdm::weyl_compose({la, 0}, {lb, 0})) - ma * mb).norm());
      weyl = std::max(weyl, (ma * mb - qdm::root_of_unity(d, qdm::weyl_commutator_phase(la, lb)) * mb * ma).norm());
      weyl = std::max(weyl, (ma * ma.adjoint() - qdm::Matrix::Identity(ma.rows(), ma.rows())).norm());
    }
  record("weyl_algebra", weyl, 1e-10);
  const qdm::Matrix cz = qdm::Gate::cz_dag(3).matrix;
  record("czdag_order_three", (cz * cz * cz - qdm::Matrix::Identity(9, 9)).norm(), 1e-12);
  // Exhaustive twirl of the preset CZdag cycle
  {
    const qdm::Circuit circ(2, 3, {qdm::Cycle::hard({{{0, 1}, qdm::Gate::cz_dag(3)}})});
    const auto noise = qdm::paper_default_noise(2);
    qdm::Matrix avg = qdm::Matrix::Zero(81, 81);
    for (std::size_t k = 0; k < 81; ++k)
      avg += qdm::circuit_superoperator(qdm::randomize_with(circ, {qdm::WeylLabel::from_index(3, 2, k)}).circuit, &noise);
    avg /= 81.0;
    const qdm::Matrix s_ideal = qdm::kron(cz, cz.conjugate());
    record("twirl_offdiagonal_mass",
           qdm::transfer_matrix_from_superoperator(avg * s_ideal.adjoint(), 3).offdiagonal_mass(), 1e-9);
  }
  // RC and folding leave the noiseless action unchanged
  double rc = 0, folded = 0;
  for (int t = 0; t < 20; ++t) {
    const qdm::Circuit circ = qdm::rcs_circuit(2 + t % 2, 1 + t % 4, rng());
    const qdm::Matrix r0 = qdm::simulate_matrix(circ, nullptr);
    rc = std::max(rc, 1.0 - (r0 * qdm::simulate_matrix(qdm::randomize(circ, rng()).circuit, nullptr)).trace().real());
    const auto f = qdm::fold(circ, {0, 1 + t % 3, t % 2 ? qdm::FoldStrategy::InversePair : qdm::FoldStrategy::OrderPower});
    folded = std::max(folded, 1.0 - (r0 * qdm::simulate_matrix(f.circuit, nullptr)).trace().real());
  }
  record("rc_equivalence", rc, 1e-10);
  record("fold_equivalence", folded, 1e-10);
  // Tomography round trip
  double tomo = 0;
  for (int n = 1; n <= 2; ++n) {
    const auto circ = qdm::rcs_circuit(2, 2, rng());
    qdm::Matrix rho = qdm::simulate_matrix(circ, nullptr);
    if (n == 1) rho = 0.5 * rho + 0.5 * qdm::Matrix::Identity(9, 9) / 9.0;
    const auto settings = qdm::tomo_settings(2, 3);
    const auto f = qdm::tomography_frequencies(rho, 2, 3, settings, nullptr, 0, 0, {});
    tomo = std::max(tomo, (qdm::reconstruct(qdm::estimate_weyl_expectations(settings, f, 2, 3), 2, 3).raw - rho).norm());
  }
  record("tomography_round_trip", tomo, 1e-9);
  // RCAL exact recovery
  {
    const auto noise = qdm::paper_default_noise(3);
    const auto r = qdm::rcal_confusion(noise, 0, c.seed);
    double err = 0;
    for (std::size_t q = 0; q < 3; ++q)
      err = std::max(err, (r.confusions[q].matrix() - noise.readout()[q].matrix()).cwiseAbs().maxCoeff());
    record("rcal_exact_recovery", err, 1e-12);
  }
  a.results = {{"checks", checks}, {"all_pass", !a.invariant_failure}};
  return a;
}

// ---------------------------------------------------------------------------


int run(const std::string& kind, const std::string& config_path, const Overrides& ov) {
  Config cfg = defaults_for(kind);
  if (!config_path.empty()) load_config_file(cfg, config_path);
  apply_overrides(cfg, ov);
  check_config(cfg);

  fs::path out = "qdm-out";
  if (const char* env = std::getenv("QDM_OUT_DIR"); env && *env) out = env;
  if (ov.out) out = *ov.out;
  std::error_code ec;
  fs::create_directories(out / "plotdata", ec);
  if (ec) throw qdm::ConfigError("cannot create output directory '" + out.string() + "': " + ec.message());

  log(kind + ": seed " + std::to_string(cfg.seed) + ", threads " + std::to_string(qdm::thread_count()) + ", out " +
      out.string());
  const auto t0 = std::chrono::steady_clock::now();
  Json noise_prov = nullptr;
  Artifacts a;
  if (kind == "ghz") {
    a = run_ghz(cfg, load_noise(cfg, cfg.n, noise_prov));
  } else if (kind == "rcs") {
    a = run_rcs(cfg, load_noise(cfg, cfg.n, noise_prov));
  } else if (kind == "nid-sweep") {
    a = run_nid_sweep(cfg, load_noise(cfg, cfg.n, noise_prov));
  } else if (kind == "twirl-study") {
    a = run_twirl_study(cfg);
  } else if (kind == "rcal") {
    a = run_rcal(cfg, load_noise(cfg, cfg.n, noise_prov));
  } else if (kind == "tomo") {
    a = run_tomo(cfg, load_noise(cfg, cfg.n, noise_prov));
  } else if (kind == "phase-char") {
    a = run_phase_char(cfg, load_noise(cfg, cfg.n, noise_prov));
  } else if (kind == "validate") {
    a = run_validate(cfg);
  } else {
    throw qdm::ConfigError("unknown subcommand '" + kind + "'");
  }
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();

  for (const auto& r : a.rows)
    if (!std::isfinite(r.value)) throw qdm::InvariantViolation("non-finite metric '" + r.metric + "'");

  Json report = {{"schema", kReportSchema},
            {"experiment", kind},
            {"tool_version", QDM_VERSION},
            {"config", config_json(cfg)},
            {"noise", noise_prov},
            {"provenance", {{"seed", cfg.seed}, {"threads", qdm::thread_count()}, {"config_file", config_path}}},
            {"timing_s", secs},
            {"results", a.results},
            {"metrics_file", "metrics.csv"},
            {"plotdata", Json::array()}};
  for (const auto& [name, text] : a.plots) {
    write_file(out / "plotdata" / name, text);
    report["plotdata"].push_back("plotdata/" + name);
  }
  write_file(out / "metrics.csv", metrics_csv(a.rows));
  write_file(out / "report.json", report.dump(2) + "\n");
  log("wrote " + (out / "report.json").string() + " in " + num(secs) + " s");
  if (a.invariant_failure) {
    log("invariant check failed");
    return 3;
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"qdm: qudit density-matrix simulator and error-mitigation experiments"};
  app.require_subcommand(1);
  app.set_version_flag("--version", std::string(QDM_VERSION));
  std::string config_path;
  Overrides ov;
  std::string chosen;
  const std::vector<std::pair<const char*, const char*>> subs{
      {"ghz", "GHZ tomography: bare, RC, RC+NOX, purified"},
      {"rcs", "random circuit sampling, bare vs RC+NOX variation distance"},
      {"twirl-study", "coherent-fraction decay under N-sample twirls"},
      {"nid-sweep", "RCS mitigated VD for several identity-insertion counts"},
      {"rcal", "readout calibration confusion matrices"},
      {"tomo", "state tomography of a circuit output"},
      {"phase-char", "entangling-phase Ramsey characterization"},
      {"validate", "numerical invariant suite"},
  };
  for (const auto& [name, help] : subs) {
    auto* sc = app.add_subcommand(name, help);
    sc->add_option("--config", config_path, "JSON config file");
    sc->add_option_function<std::uint64_t>("--seed", [&](const std::uint64_t& v) { ov.seed = v; }, "master seed");
    sc->add_option_function<std::uint64_t>("--shots", [&](const std::uint64_t& v) { ov.shots = v; }, "shots per circuit (0 = exact)");
    sc->add_option_function<int>("--randomizations", [&](const int& v) { ov.randomizations = v; }, "RC randomizations N");
    sc->add_option_function<int>("--n-id", [&](const int& v) { ov.n_id = v; }, "identity insertions per folded cycle");
    sc->add_option_function<std::string>("--depths", [&](const std::string& v) { ov.depths = v; }, "comma-separated depths");
    sc->add_option_function<std::string>("--noise", [&](const std::string& v) { ov.noise = v; }, "preset name or noise file");
    sc->add_option_function<std::string>("--out", [&](const std::string& v) { ov.out = v; }, "output directory");
    sc->callback([&chosen, n = std::string(name)] { chosen = n; });
  }
  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }
  try {
    return run(chosen, config_path, ov);
  } catch (const qdm::InvariantViolation& e) {
    log(std::string("invariant violation: ") + e.what());
    return 3;
  } catch (const qdm::SingularMatrixError& e) {
    log(std::string("invariant violation: ") + e.what());
    return 3;
  } catch (const qdm::Error& e) {
    log(std::string("configuration error: ") + e.what());
    return 2;
  } catch (const std::exception& e) {
    log(std::string("error: ") + e.what());
    return 1;
  }
}
