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

// JSON documents for circuits and noise models.
//
// Circuit:
//   {"version": "qdm-circuit/1", "n": 3, "d": 3,
//    "cycles": [{"kind": "easy"|"hard", "tag": "...",
//                "gates": [{"qudits": [0], "kind": "hadamard", "payload": {}}]}]}
// Matrices are row-major lists of [re, im] pairs.

#pragma once

#include <cstdint>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "json.hpp"
#include "qdm/circuit.hpp"
#include "qdm/errors.hpp"
#include "qdm/noise.hpp"

namespace qdm {

inline constexpr const char* kCircuitVersion = "qdm-circuit/1";
inline constexpr const char* kNoiseVersion = "qdm-noise/1";

using Json = nlohmann::json;

// ---------------------------------------------------------------------------
// Line lookup
// ---------------------------------------------------------------------------

/// Maps JSON pointers ("/cycles/0/gates/1/kind") to the 1-based line where
/// the value starts. Assumes syntactically valid input.
class JsonLineIndex {
 public:
  explicit JsonLineIndex(const std::string& text) { build(text); }

  int line_of(const std::string& pointer) const {
    std::string p = pointer;
    while (true) {
      auto it = lines_.find(p);
      if (it != lines_.end()) return it->second;
      const auto slash = p.rfind('/');
      if (slash == std::string::npos || p.empty()) return 1;
      p = p.substr(0, slash);
    }
  }

 private:
  struct Frame {
    bool object;
    std::string path;
    std::string key;
    int index = 0;
  };

  static std::string escape(const std::string& k) {
    std::string out;
    for (char c : k) {
      if (c == '~') out += "~0";
      else if (c == '/') out += "~1";
      else out += c;
    }
    return out;
  }

  void build(const std::string& s) {
    std::vector<Frame> stack;
    int line = 1;
    bool expect_key = false;
    auto current_path = [&]() -> std::string {
      if (stack.empty()) return "";
      const Frame& f = stack.back();
      return f.path + "/" + (f.object ? escape(f.key) : std::to_string(f.index));
    };
    auto mark_value = [&]() {
      const std::string p = current_path();
      if (!lines_.count(p)) lines_[p] = line;
      return p;
    };
    lines_[""] = 1;
    for (std::size_t i = 0; i < s.size(); ++i) {
      const char c = s[i];
      if (c == '\n') {
        ++line;
        continue;
      }
      if (c == ' ' || c == '\t' || c == '\r') continue;
      if (c == '"') {
        std::string str;
        for (++i; i < s.size() && s[i] != '"'; ++i) {
          if (s[i] == '\\' && i + 1 < s.size()) {
            ++i;
            str += s[i];
          } else {
            if (s[i] == '\n') ++line;
            str += s[i];
          }
        }
        if (expect_key && !stack.empty() && stack.back().object) {
          stack.back().key = str;
          expect_key = false;
        } else {
          mark_value();
        }
        continue;
      }
      if (c == '{' || c == '[') {
        const std::string p = stack.empty() ? "" : mark_value();
        stack.push_back({c == '{', p, "", 0});
        expect_key = (c == '{');
        continue;
      }
      if (c == '}' || c == ']') {
        if (!stack.empty()) stack.pop_back();
        expect_key = false;
        continue;
      }
      if (c == ':') continue;
      if (c == ',') {
        if (!stack.empty()) {
          if (stack.back().object) expect_key = true;
          else ++stack.back().index;
        }
        continue;
      }
      // number / literal
      mark_value();
      while (i + 1 < s.size() && std::string(",]} \t\r\n").find(s[i + 1]) == std::string::npos) ++i;
    }
  }

  std::map<std::string, int> lines_;
};

/// Reads a document, mapping syntax errors to ParseError with a line number.
inline Json parse_json_text(const std::string& text, const std::string& what) {
  try {
    return Json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    int line = 1;
    for (std::size_t i = 0; i < std::min<std::size_t>(e.byte, text.size()); ++i)
      if (text[i] == '\n') ++line;
    throw ParseError(what + ": syntax error at line " + std::to_string(line) + ": " + e.what());
  }
}

/// Field access with pointer-and-line diagnostics.
class DocReader {
 public:
  DocReader(const std::string& text, std::string what)
      : what_(std::move(what)), root_(parse_json_text(text, what_)), lines_(text) {}

  const Json& root() const { return root_; }

  [[noreturn]] void fail(const std::string& pointer, const std::string& msg) const {
    throw ParseError(what_ + ": field '" + (pointer.empty() ? "/" : pointer) + "' (line " +
                     std::to_string(lines_.line_of(pointer)) + "): " + msg);
  }

  const Json& require(const Json& obj, const std::string& pointer, const std::string& key) const {
    if (!obj.is_object()) fail(pointer, "expected an object");
    auto it = obj.find(key);
    if (it == obj.end()) fail(pointer + "/" + key, "missing required field");
    return *it;
  }

  long long get_int(const Json& v, const std::string& pointer) const {
    if (!v.is_number_integer()) fail(pointer, "expected an integer");
    return v.get<long long>();
  }
  std::uint64_t get_uint(const Json& v, const std::string& pointer) const {
    if (!v.is_number_unsigned() && !(v.is_number_integer() && v.get<long long>() >= 0))
      fail(pointer, "expected a nonnegative integer");
    return v.get<std::uint64_t>();
  }
  double get_double(const Json& v, const std::string& pointer) const {
    if (!v.is_number()) fail(pointer, "expected a number");
    return v.get<double>();
  }
  std::string get_string(const Json& v, const std::string& pointer) const {
    if (!v.is_string()) fail(pointer, "expected a string");
    return v.get<std::string>();
  }
  std::vector<int> get_int_list(const Json& v, const std::string& pointer) const {
    if (!v.is_array()) fail(pointer, "expected an array of integers");
    std::vector<int> out;
    for (std::size_t i = 0; i < v.size(); ++i) out.push_back(static_cast<int>(get_int(v[i], pointer + "/" + std::to_string(i))));
    return out;
  }
  std::vector<double> get_double_list(const Json& v, const std::string& pointer) const {
    if (!v.is_array()) fail(pointer, "expected an array of numbers");
    std::vector<double> out;
    for (std::size_t i = 0; i < v.size(); ++i) out.push_back(get_double(v[i], pointer + "/" + std::to_string(i)));
    return out;
  }
  Matrix get_matrix(const Json& v, const std::string& pointer) const {
    if (!v.is_array()) fail(pointer, "expected a row-major list of [re, im] pairs");
    const auto count = v.size();
    const auto dim = static_cast<Eigen::Index>(std::llround(std::sqrt(static_cast<double>(count))));
    if (dim <= 0 || static_cast<std::size_t>(dim * dim) != count) fail(pointer, "matrix entry count is not a square");
    Matrix m(dim, dim);
    for (std::size_t i = 0; i < count; ++i) {
      const std::string p = pointer + "/" + std::to_string(i);
      const auto& e = v[i];
      if (!e.is_array() || e.size() != 2) fail(p, "expected [re, im]");
      m(static_cast<Eigen::Index>(i) / dim, static_cast<Eigen::Index>(i) % dim) = Complex(get_double(e[0], p + "/0"), get_double(e[1], p + "/1"));
    }
    return m;
  }

 private:
  std::string what_;
  Json root_;
  JsonLineIndex lines_;
};

inline Json matrix_to_json(const Matrix& m) {
  Json out = Json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i)
    for (Eigen::Index j = 0; j < m.cols(); ++j) out.push_back(Json::array({m(i, j).real(), m(i, j).imag()}));
  return out;
}

inline Json real_matrix_to_json(const RealMatrix& m) {
  Json out = Json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    Json row = Json::array();
    for (Eigen::Index j = 0; j < m.cols(); ++j) row.push_back(m(i, j));
    out.push_back(row);
  }
  return out;
}

// ---------------------------------------------------------------------------
// Circuits
// ---------------------------------------------------------------------------

inline Json gate_payload(const Gate& g) {
  Json p = Json::object();
  switch (g.kind) {
    case GateKind::Weyl:
    case GateKind::EigenbasisRotation:
      p["p"] = g.label->p[0];
      p["q"] = g.label->q[0];
      break;
    case GateKind::VirtualDiag: p["phases"] = g.phases; break;
    case GateKind::Haar:
      p["seed"] = g.seed_tag;
      p["matrix"] = matrix_to_json(g.matrix);
      break;
    case GateKind::Custom:
    case GateKind::CliffordCustom:
      p["name"] = g.name;
      p["matrix"] = matrix_to_json(g.matrix);
      break;
    default: break;
  }
  return p;
}

inline Json circuit_to_json(const Circuit& c) {
  Json cycles = Json::array();
  for (const auto& cyc : c.cycles()) {
    Json gates = Json::array();
    for (const auto& pl : cyc.gates)
      gates.push_back({{"qudits", pl.qudits}, {"kind", to_string(pl.gate.kind)}, {"payload", gate_payload(pl.gate)}});
    Json jc = {{"kind", cyc.is_hard() ? "hard" : "easy"}, {"gates", gates}};
    if (!cyc.tag.empty()) jc["tag"] = cyc.tag;
    cycles.push_back(jc);
  }
  return {{"version", kCircuitVersion}, {"n", c.n()}, {"d", c.d()}, {"cycles", cycles}};
}

inline std::string serialize(const Circuit& c) { return circuit_to_json(c).dump(2) + "\n"; }

inline Gate gate_from_json(const DocReader& r, const Json& g, const std::string& ptr, int d, std::size_t arity) {
  const std::string kind_s = r.get_string(r.require(g, ptr, "kind"), ptr + "/kind");
  const auto kind = gate_kind_from_string(kind_s);
  if (!kind) r.fail(ptr + "/kind", "unknown gate kind '" + kind_s + "'");
  static const Json empty = Json::object();
  const Json& payload = g.contains("payload") ? g["payload"] : empty;
  const std::string pp = ptr + "/payload";
  if (!payload.is_object()) r.fail(pp, "expected an object");
  auto label = [&]() {
    const int p = static_cast<int>(r.get_int(r.require(payload, pp, "p"), pp + "/p"));
    const int q = static_cast<int>(r.get_int(r.require(payload, pp, "q"), pp + "/q"));
    if (p < 0 || p >= d || q < 0 || q >= d) r.fail(pp, "Weyl exponents must lie in [0, d)");
    return WeylLabel::single(d, p, q);
  };
  try {
    Gate out;
    switch (*kind) {
      case GateKind::Weyl: out = Gate::weyl(label()); break;
      case GateKind::EigenbasisRotation: out = Gate::eigenbasis_rotation(label()); break;
      case GateKind::Hadamard: out = Gate::hadamard(d); break;
      case GateKind::HadamardDag: out = Gate::hadamard_dag(d); break;
      case GateKind::CZ: out = Gate::cz(d); break;
      case GateKind::CZdag: out = Gate::cz_dag(d); break;
      case GateKind::VirtualDiag:
        out = Gate::virtual_diag(d, r.get_double_list(r.require(payload, pp, "phases"), pp + "/phases"));
        break;
      case GateKind::Haar:
        out = Gate::haar_with_matrix(r.get_matrix(r.require(payload, pp, "matrix"), pp + "/matrix"), d,
                                     r.get_uint(r.require(payload, pp, "seed"), pp + "/seed"));
        break;
      case GateKind::Custom:
        out = Gate::custom(r.get_matrix(r.require(payload, pp, "matrix"), pp + "/matrix"), d,
                           r.get_string(r.require(payload, pp, "name"), pp + "/name"));
        break;
      case GateKind::CliffordCustom:
        out = Gate::clifford(r.get_matrix(r.require(payload, pp, "matrix"), pp + "/matrix"), d,
                             r.get_string(r.require(payload, pp, "name"), pp + "/name"));
        break;
    }
    if (static_cast<std::size_t>(out.arity) != arity) r.fail(ptr + "/qudits", "gate " + kind_s + " expects " + std::to_string(out.arity) + " qudits");
    return out;
  } catch (const ParseError&) {
    throw;
  } catch (const Error& e) {
    r.fail(pp, e.what());
  }
}

/// Inverse of serialize. Errors name the offending field and its line.
inline Circuit parse_circuit(const std::string& text) {
  const DocReader r(text, "circuit");
  const Json& root = r.root();
  const std::string version = r.get_string(r.require(root, "", "version"), "/version");
  if (version != kCircuitVersion) r.fail("/version", "unsupported version '" + version + "'");
  const long long n = r.get_int(r.require(root, "", "n"), "/n");
  const long long d = r.get_int(r.require(root, "", "d"), "/d");
  if (n < 1) r.fail("/n", "must be at least 1");
  if (d < 2) r.fail("/d", "must be at least 2");
  const Json& jcycles = r.require(root, "", "cycles");
  if (!jcycles.is_array()) r.fail("/cycles", "expected an array");
  std::vector<Cycle> cycles;
  for (std::size_t i = 0; i < jcycles.size(); ++i) {
    const std::string cp = "/cycles/" + std::to_string(i);
    const Json& jc = jcycles[i];
    const std::string kind = r.get_string(r.require(jc, cp, "kind"), cp + "/kind");
    if (kind != "easy" && kind != "hard") r.fail(cp + "/kind", "expected 'easy' or 'hard', got '" + kind + "'");
    Cycle c = kind == "hard" ? Cycle::hard({}) : Cycle::easy();
    if (jc.contains("tag")) c.tag = r.get_string(jc["tag"], cp + "/tag");
    const Json& jg = r.require(jc, cp, "gates");
    if (!jg.is_array()) r.fail(cp + "/gates", "expected an array");
    for (std::size_t j = 0; j < jg.size(); ++j) {
      const std::string gp = cp + "/gates/" + std::to_string(j);
      const auto qudits = r.get_int_list(r.require(jg[j], gp, "qudits"), gp + "/qudits");
      for (int q : qudits)
        if (q < 0 || q >= n) r.fail(gp + "/qudits", "qudit index " + std::to_string(q) + " out of range");
      c.gates.push_back({qudits, gate_from_json(r, jg[j], gp, static_cast<int>(d), qudits.size())});
    }
    cycles.push_back(std::move(c));
  }
  try {
    return Circuit(static_cast<int>(n), static_cast<int>(d), std::move(cycles));
  } catch (const Error& e) {
    r.fail("/cycles", e.what());
  }
}

// ---------------------------------------------------------------------------
// Noise models
// ---------------------------------------------------------------------------

inline Json channel_to_json(const std::vector<int>& targets, const QuantumChannel& ch) {
  Json ks = Json::array();
  for (const auto& k : ch.kraus()) ks.push_back(matrix_to_json(k));
  return {{"targets", targets}, {"kraus", ks}};
}

inline Json noise_to_json(const NoiseModel& m) {
  Json hard = Json::array(), tagged = Json::array(), easy = Json::array(), readout = Json::array();
  for (const auto& [sig, chans] : m.hard())
    for (const auto& lc : chans) {
      Json j = channel_to_json(lc.targets, lc.channel);
      j["signature"] = sig;
      hard.push_back(j);
    }
  for (const auto& [tag, chans] : m.tagged())
    for (const auto& lc : chans) {
      Json j = channel_to_json(lc.targets, lc.channel);
      j["tag"] = tag;
      tagged.push_back(j);
    }
  for (const auto& lc : m.easy()) easy.push_back(channel_to_json(lc.targets, lc.channel));
  for (const auto& c : m.readout()) readout.push_back(real_matrix_to_json(c.matrix()));
  return {{"version", kNoiseVersion}, {"n", m.n()}, {"d", m.d()}, {"hard", hard}, {"tagged", tagged},
          {"easy", easy}, {"readout", readout}, {"metadata", m.metadata}};
}

inline std::string serialize(const NoiseModel& m) { return noise_to_json(m).dump(2) + "\n"; }

inline NoiseModel parse_noise(const std::string& text) {
  const DocReader r(text, "noise model");
  const Json& root = r.root();
  const std::string version = r.get_string(r.require(root, "", "version"), "/version");
  if (version != kNoiseVersion) r.fail("/version", "unsupported version '" + version + "'");
  const int n = static_cast<int>(r.get_int(r.require(root, "", "n"), "/n"));
  const int d = static_cast<int>(r.get_int(r.require(root, "", "d"), "/d"));
  if (n < 1 || d < 2) r.fail("/n", "need n >= 1 and d >= 2");
  NoiseModel m(n, d);
  auto read_channel = [&](const Json& j, const std::string& p) {
    const auto targets = r.get_int_list(r.require(j, p, "targets"), p + "/targets");
    const Json& ks = r.require(j, p, "kraus");
    if (!ks.is_array() || ks.empty()) r.fail(p + "/kraus", "expected a nonempty array of matrices");
    std::vector<Matrix> kraus;
    for (std::size_t k = 0; k < ks.size(); ++k) kraus.push_back(r.get_matrix(ks[k], p + "/kraus/" + std::to_string(k)));
    try {
      return std::make_pair(targets, QuantumChannel(std::move(kraus)));
    } catch (const Error& e) {
      r.fail(p + "/kraus", e.what());
    }
  };
  auto section = [&](const char* key) -> const Json& {
    static const Json empty = Json::array();
    if (!root.contains(key)) return empty;
    const Json& s = root[key];
    if (!s.is_array()) r.fail(std::string("/") + key, "expected an array");
    return s;
  };
  try {
    const Json& hard = section("hard");
    for (std::size_t i = 0; i < hard.size(); ++i) {
      const std::string p = "/hard/" + std::to_string(i);
      auto [t, ch] = read_channel(hard[i], p);
      m.add_hard(r.get_string(r.require(hard[i], p, "signature"), p + "/signature"), t, ch);
    }
    const Json& tagged = section("tagged");
    for (std::size_t i = 0; i < tagged.size(); ++i) {
      const std::string p = "/tagged/" + std::to_string(i);
      auto [t, ch] = read_channel(tagged[i], p);
      m.add_tagged(r.get_string(r.require(tagged[i], p, "tag"), p + "/tag"), t, ch);
    }
    const Json& easy = section("easy");
    for (std::size_t i = 0; i < easy.size(); ++i) {
      auto [t, ch] = read_channel(easy[i], "/easy/" + std::to_string(i));
      m.add_easy(t, ch);
    }
    const Json& readout = section("readout");
    std::vector<ConfusionMatrix> conf;
    for (std::size_t i = 0; i < readout.size(); ++i) {
      const std::string p = "/readout/" + std::to_string(i);
      const Json& rows = readout[i];
      if (!rows.is_array() || static_cast<int>(rows.size()) != d) r.fail(p, "expected d rows");
      RealMatrix c(d, d);
      for (int a = 0; a < d; ++a) {
        const auto row = r.get_double_list(rows[static_cast<std::size_t>(a)], p + "/" + std::to_string(a));
        if (static_cast<int>(row.size()) != d) r.fail(p + "/" + std::to_string(a), "expected d entries");
        for (int b = 0; b < d; ++b) c(a, b) = row[static_cast<std::size_t>(b)];
      }
      try {
        conf.emplace_back(c);
      } catch (const Error& e) {
        r.fail(p, e.what());
      }
    }
    if (!conf.empty()) m.set_readout(std::move(conf));
  } catch (const ParseError&) {
    throw;
  } catch (const Error& e) {
    r.fail("", e.what());
  }
  if (root.contains("metadata")) m.metadata = root["metadata"];
  return m;
}

}  // namespace qdm
