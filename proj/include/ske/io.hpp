// Copyright 2026 The ske Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

// JSON channel / joint-law files and report serialization.
//
// Channel file:
//   { "label": "bsc", "x_size": 2, "y_size": 2, "z_size": 1,
//     "matrix": [ [[0.9],[0.1]], [[0.1],[0.9]] ] }        // matrix[x][y][z]
// Joint file (two axes):
//   { "label": "pair", "matrix": [[0.4, 0.1], [0.1, 0.4]] }
// Probabilities may be JSON numbers or decimal strings. Rows off by at most
// 1e-9 are renormalized; anything larger is an error.

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <fstream>
#include <optional>
#include <span>
#include <sstream>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

#include <json.hpp>

#include "bounds.hpp"
#include "channel.hpp"
#include "security.hpp"
#include "typicality.hpp"

namespace ske {

using json = nlohmann::ordered_json;

inline constexpr double kSpecRowTol = 1e-9;

/// Malformed input. `line` is 1-based, 0 when unknown.
struct InputError : std::runtime_error {
  std::string source;
  std::size_t line = 0;

  InputError(std::string src, std::size_t ln, const std::string& msg)
      : std::runtime_error(format(src, ln, msg)), source(std::move(src)), line(ln)
  {
  }

 private:
  static std::string format(const std::string& src, std::size_t ln, const std::string& msg)
  {
    std::string out = src.empty() ? "input" : src;
    if (ln) out += ":" + std::to_string(ln);
    return out + ": " + msg;
  }
};

namespace detail {

using PathStep = std::variant<std::string, std::size_t>;

inline std::size_t line_at(const std::string& text, std::size_t offset)
{
  offset = std::min(offset, text.size());
  return 1 + static_cast<std::size_t>(std::count(text.begin(), text.begin() + static_cast<std::ptrdiff_t>(offset), '\n'));
}

/// Walks well-formed JSON text to the value at `path`; returns its offset.
class PathLocator {
 public:
  explicit PathLocator(const std::string& t) : t_(t) {}

  std::optional<std::size_t> find(const std::vector<PathStep>& path)
  {
    i_ = 0;
    ws();
    for (const auto& step : path) {
      if (i_ >= t_.size()) return std::nullopt;
      if (const auto* key = std::get_if<std::string>(&step)) {
        if (t_[i_] != '{' || !member(*key)) return std::nullopt;
      } else {
        if (t_[i_] != '[' || !element(std::get<std::size_t>(step))) return std::nullopt;
      }
    }
    return i_;
  }

 private:
  void ws()
  {
    while (i_ < t_.size() && std::isspace(static_cast<unsigned char>(t_[i_]))) ++i_;
  }

  std::string string()
  {
    std::string out;
    ++i_;  // opening quote
    while (i_ < t_.size() && t_[i_] != '"') {
      if (t_[i_] == '\\') ++i_;
      if (i_ < t_.size()) out += t_[i_++];
    }
    ++i_;
    return out;
  }

  void skip()
  {
    ws();
    if (i_ >= t_.size()) return;
    if (t_[i_] == '"') {
      string();
    } else if (t_[i_] == '{' || t_[i_] == '[') {
      int depth = 0;
      while (i_ < t_.size()) {
        const char c = t_[i_];
        if (c == '"') {
          string();
          continue;
        }
        if (c == '{' || c == '[') ++depth;
        if (c == '}' || c == ']') --depth;
        ++i_;
        if (depth == 0) break;
      }
    } else {
      while (i_ < t_.size() && t_[i_] != ',' && t_[i_] != ']' && t_[i_] != '}' &&
             !std::isspace(static_cast<unsigned char>(t_[i_]))) {
        ++i_;
      }
    }
    ws();
  }

  bool member(const std::string& key)
  {
    ++i_;
    ws();
    while (i_ < t_.size() && t_[i_] != '}') {
      const auto k = string();
      ws();
      ++i_;  // colon
      ws();
      if (k == key) return true;
      skip();
      if (i_ < t_.size() && t_[i_] == ',') ++i_;
      ws();
    }
    return false;
  }

  bool element(std::size_t index)
  {
    ++i_;
    ws();
    for (std::size_t k = 0; i_ < t_.size() && t_[i_] != ']'; ++k) {
      if (k == index) return true;
      skip();
      if (i_ < t_.size() && t_[i_] == ',') ++i_;
      ws();
    }
    return false;
  }

  const std::string& t_;
  std::size_t i_ = 0;
};

}  // namespace detail

/// Parsed document plus the text it came from, for line-level diagnostics.
struct JsonDocument {
  json value;
  std::string text;
  std::string source;

  std::size_t line_of(const std::vector<detail::PathStep>& path) const
  {
    const auto off = detail::PathLocator(text).find(path);
    return off ? detail::line_at(text, *off) : 0;
  }

  [[noreturn]] void fail(const std::vector<detail::PathStep>& path, const std::string& msg) const
  {
    throw InputError(source, line_of(path), msg);
  }
};

inline JsonDocument parse_json_text(std::string text, std::string source = {})
{
  JsonDocument d{json(), std::move(text), std::move(source)};
  try {
    d.value = json::parse(d.text);
  } catch (const json::parse_error& e) {
    const std::size_t off = e.byte > 0 ? e.byte - 1 : 0;
    throw InputError(d.source, detail::line_at(d.text, off), std::string("malformed JSON: ") + e.what());
  }
  return d;
}

inline std::string read_text_file(const std::string& path)
{
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InputError(path, 0, "cannot open file");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

inline JsonDocument read_json_file(const std::string& path) { return parse_json_text(read_text_file(path), path); }

namespace detail {

inline double probability_at(const JsonDocument& d, const json& v, const std::vector<PathStep>& path)
{
  double p = 0.0;
  if (v.is_number()) {
    p = v.get<double>();
  } else if (v.is_string()) {
    const auto& s = v.get_ref<const std::string&>();
    const auto r = std::from_chars(s.data(), s.data() + s.size(), p);
    if (r.ec != std::errc() || r.ptr != s.data() + s.size()) d.fail(path, "not a decimal number: \"" + s + "\"");
  } else {
    d.fail(path, "expected a probability, found " + std::string(v.type_name()));
  }
  if (!std::isfinite(p) || p < 0.0 || p > 1.0) d.fail(path, "probability outside [0, 1]");
  return p;
}

inline std::size_t size_field(const JsonDocument& d, const char* key)
{
  const auto& v = d.value;
  if (!v.contains(key)) d.fail({}, std::string("missing field \"") + key + "\"");
  const auto& f = v.at(key);
  if (!f.is_number_unsigned() || f.get<std::size_t>() == 0 || f.get<std::size_t>() > 256) {
    d.fail({key}, std::string("\"") + key + "\" must be an integer in [1, 256]");
  }
  return f.get<std::size_t>();
}

inline const json& array_at(const JsonDocument& d, const json& v, const std::vector<PathStep>& path, std::size_t n,
                            const std::string& what)
{
  if (!v.is_array()) d.fail(path, what + " must be an array");
  if (v.size() != n) {
    d.fail(path, what + " has " + std::to_string(v.size()) + " entries, expected " + std::to_string(n));
  }
  return v;
}

/// Rescales `row` to sum 1 if it is within kSpecRowTol; otherwise fails.
inline void settle_row(const JsonDocument& d, std::span<double> row, const std::vector<PathStep>& path,
                       const std::string& what)
{
  double sum = 0.0;
  for (double v : row) sum += v;
  if (std::abs(sum - 1.0) > kSpecRowTol) {
    std::ostringstream m;
    m.precision(17);
    m << what << " sums to " << sum << ", not 1 within " << kSpecRowTol;
    d.fail(path, m.str());
  }
  for (auto& v : row) v /= sum;
}

}  // namespace detail

struct ChannelSpec {
  Dmbc channel;
  std::string label;
};

inline ChannelSpec channel_from_document(const JsonDocument& d)
{
  using detail::PathStep;
  if (!d.value.is_object()) d.fail({}, "channel file must be a JSON object");
  const std::size_t nx = detail::size_field(d, "x_size"), ny = detail::size_field(d, "y_size"),
                    nz = detail::size_field(d, "z_size");
  if (!d.value.contains("matrix")) d.fail({}, "missing field \"matrix\"");
  const auto& m = detail::array_at(d, d.value.at("matrix"), {"matrix"}, nx, "matrix");
  std::vector<double> w(nx * ny * nz);
  for (std::size_t x = 0; x < nx; ++x) {
    const std::vector<PathStep> px{"matrix", x};
    const auto& rx = detail::array_at(d, m[x], px, ny, "matrix[" + std::to_string(x) + "]");
    for (std::size_t y = 0; y < ny; ++y) {
      const std::vector<PathStep> py{"matrix", x, y};
      const auto& ry =
          detail::array_at(d, rx[y], py, nz, "matrix[" + std::to_string(x) + "][" + std::to_string(y) + "]");
      for (std::size_t z = 0; z < nz; ++z) {
        w[(x * ny + y) * nz + z] = detail::probability_at(d, ry[z], {"matrix", x, y, z});
      }
    }
    detail::settle_row(d, std::span<double>(w).subspan(x * ny * nz, ny * nz), px,
                       "matrix[" + std::to_string(x) + "]");
  }
  ChannelSpec spec{Dmbc(nx, ny, nz, std::move(w)), {}};
  if (d.value.contains("label")) {
    if (!d.value.at("label").is_string()) d.fail({"label"}, "\"label\" must be a string");
    spec.label = d.value.at("label").get<std::string>();
  }
  return spec;
}

inline ChannelSpec parse_channel(const std::string& text, const std::string& source = {})
{
  return channel_from_document(parse_json_text(text, source));
}

inline ChannelSpec read_channel(const std::string& path) { return channel_from_document(read_json_file(path)); }

inline json channel_to_json(const Dmbc& ch, const std::string& label = {})
{
  json j;
  if (!label.empty()) j["label"] = label;
  j["x_size"] = ch.x_size();
  j["y_size"] = ch.y_size();
  j["z_size"] = ch.z_size();
  json m = json::array();
  for (std::size_t x = 0; x < ch.x_size(); ++x) {
    json rx = json::array();
    for (std::size_t y = 0; y < ch.y_size(); ++y) {
      json ry = json::array();
      for (std::size_t z = 0; z < ch.z_size(); ++z) ry.push_back(ch(x, y, z));
      rx.push_back(std::move(ry));
    }
    m.push_back(std::move(rx));
  }
  j["matrix"] = std::move(m);
  return j;
}

/// Two-axis joint law from {"matrix": [[...], ...]}.
inline JointDistribution joint_from_document(const JsonDocument& d)
{
  if (!d.value.is_object() || !d.value.contains("matrix")) d.fail({}, "joint file needs a \"matrix\" field");
  const auto& m = d.value.at("matrix");
  if (!m.is_array() || m.empty()) d.fail({"matrix"}, "matrix must be a non-empty array of rows");
  const std::size_t na = m.size();
  if (!m[0].is_array() || m[0].empty()) d.fail({"matrix", std::size_t{0}}, "matrix rows must be non-empty arrays");
  const std::size_t nb = m[0].size();
  if (na > 256 || nb > 256) d.fail({"matrix"}, "alphabets larger than 256");
  std::vector<double> p(na * nb);
  for (std::size_t a = 0; a < na; ++a) {
    const auto& row = detail::array_at(d, m[a], {"matrix", a}, nb, "matrix[" + std::to_string(a) + "]");
    for (std::size_t b = 0; b < nb; ++b) p[a * nb + b] = detail::probability_at(d, row[b], {"matrix", a, b});
  }
  detail::settle_row(d, p, {"matrix"}, "matrix");
  return JointDistribution({na, nb}, std::move(p));
}

inline JointDistribution parse_joint(const std::string& text, const std::string& source = {})
{
  return joint_from_document(parse_json_text(text, source));
}

inline JointDistribution read_joint(const std::string& path) { return joint_from_document(read_json_file(path)); }

inline json joint_to_json(const JointDistribution& j)
{
  if (j.rank() != 2) throw std::invalid_argument("joint_to_json: two axes required");
  json m = json::array();
  const std::size_t nb = j.shape()[1];
  for (std::size_t a = 0; a < j.shape()[0]; ++a) {
    m.push_back(std::vector<double>(j.probs().begin() + a * nb, j.probs().begin() + (a + 1) * nb));
  }
  return {{"matrix", std::move(m)}};
}

/// Auxiliary scheme in the layout written by to_json(AuxScheme):
///   { "kernel_V": [[...]], "dist_W2": [...], "kernel_W1_given_W2": [[...]],
///     "kernel_X_given_W1": [[...]] }
/// Cardinalities follow from the shapes; "card_*" fields, when present, must agree.
inline AuxScheme scheme_from_document(const JsonDocument& d)
{
  using detail::PathStep;
  if (!d.value.is_object()) d.fail({}, "scheme file must be a JSON object");
  auto row = [&](const json& v, const std::vector<PathStep>& path, std::size_t n, const std::string& what) {
    const auto& a = detail::array_at(d, v, path, n, what);
    std::vector<double> out(n);
    for (std::size_t i = 0; i < n; ++i) {
      auto p = path;
      p.emplace_back(i);
      out[i] = detail::probability_at(d, a[i], p);
    }
    detail::settle_row(d, out, path, what);
    return out;
  };
  auto kernel = [&](const char* key) {
    if (!d.value.contains(key)) d.fail({}, std::string("missing field \"") + key + "\"");
    const auto& k = d.value.at(key);
    if (!k.is_array() || k.empty() || !k[0].is_array() || k[0].empty()) {
      d.fail({key}, std::string(key) + " must be a non-empty array of rows");
    }
    std::vector<std::vector<double>> rows;
    for (std::size_t i = 0; i < k.size(); ++i) {
      rows.push_back(row(k[i], {key, i}, k[0].size(), std::string(key) + "[" + std::to_string(i) + "]"));
    }
    return Kernel::from_rows(rows);
  };
  AuxScheme s;
  s.kernel_V = kernel("kernel_V");
  s.kernel_W1_given_W2 = kernel("kernel_W1_given_W2");
  s.kernel_X_given_W1 = kernel("kernel_X_given_W1");
  if (!d.value.contains("dist_W2")) d.fail({}, "missing field \"dist_W2\"");
  const auto& w2 = d.value.at("dist_W2");
  if (!w2.is_array() || w2.empty()) d.fail({"dist_W2"}, "dist_W2 must be a non-empty array");
  s.dist_W2 = Distribution(row(w2, {"dist_W2"}, w2.size(), "dist_W2"));
  s.card_V = s.kernel_V.out_size();
  s.card_W2 = s.dist_W2.size();
  s.card_W1 = s.kernel_W1_given_W2.out_size();
  if (s.kernel_W1_given_W2.in_size() != s.card_W2) {
    d.fail({"kernel_W1_given_W2"}, "kernel_W1_given_W2 needs one row per W2 symbol");
  }
  if (s.kernel_X_given_W1.in_size() != s.card_W1) {
    d.fail({"kernel_X_given_W1"}, "kernel_X_given_W1 needs one row per W1 symbol");
  }
  for (const auto& [key, card] : {std::pair{"card_V", s.card_V}, {"card_W1", s.card_W1}, {"card_W2", s.card_W2}}) {
    if (d.value.contains(key) && d.value.at(key) != card) d.fail({key}, std::string(key) + " disagrees with the shapes");
  }
  return s;
}

inline AuxScheme parse_scheme(const std::string& text, const std::string& source = {})
{
  return scheme_from_document(parse_json_text(text, source));
}

// ---------------------------------------------------------------------------
// Command-line value syntax

namespace detail {

/// Splits on `sep`, keeping empty fields.
inline std::vector<std::string> split_fields(const std::string& s, char sep)
{
  std::vector<std::string> out(1);
  for (char c : s) {
    if (c == sep) {
      out.emplace_back();
    } else {
      out.back() += c;
    }
  }
  return out;
}

/// Whole-string positive integer.
template <class T>
bool parse_positive(const std::string& s, T& v)
{
  const auto r = std::from_chars(s.data(), s.data() + s.size(), v);
  return !s.empty() && r.ec == std::errc() && r.ptr == s.data() + s.size() && v > 0;
}

}  // namespace detail

/// "2x1,2x1,2x1": |O| x |R| factorizations of X, Y and Z.
inline ChannelSplit parse_split(const std::string& s)
{
  const auto fields = detail::split_fields(s, ',');
  auto fail = [&] { throw InputError("--split", 0, "expected OxR,OxR,OxR with positive integers, got \"" + s + "\""); };
  if (fields.size() != 3) fail();
  AlphabetSplit parts[3];
  for (std::size_t k = 0; k < 3; ++k) {
    const auto f = detail::split_fields(fields[k], 'x');
    if (f.size() != 2 || !detail::parse_positive(f[0], parts[k].o) || !detail::parse_positive(f[1], parts[k].r)) fail();
  }
  return {parts[0], parts[1], parts[2]};
}

/// "default" or a list "a:b,c:d".
inline std::vector<Ratio> parse_ratio_grid(const std::string& s)
{
  if (s == "default") return default_ratio_grid();
  std::vector<Ratio> out;
  for (const auto& item : detail::split_fields(s, ',')) {
    const auto f = detail::split_fields(item, ':');
    Ratio r;
    if (f.size() != 2 || !detail::parse_positive(f[0], r.nf) || !detail::parse_positive(f[1], r.nb)) {
      throw InputError("--ratio-grid", 0, "expected \"default\" or a:b,c:d with positive integers, got \"" + s + "\"");
    }
    out.push_back(r);
  }
  return out;
}

// ---------------------------------------------------------------------------
// Report serialization

inline json to_json(const Distribution& p) { return std::vector<double>(p.probs().begin(), p.probs().end()); }

inline json to_json(const Kernel& k)
{
  json j = json::array();
  for (const auto& r : k.rows()) j.push_back(to_json(r));
  return j;
}

inline json to_json(const AuxScheme& s)
{
  return {{"card_V", s.card_V},
          {"card_W1", s.card_W1},
          {"card_W2", s.card_W2},
          {"kernel_V", to_json(s.kernel_V)},
          {"dist_W2", to_json(s.dist_W2)},
          {"kernel_W1_given_W2", to_json(s.kernel_W1_given_W2)},
          {"kernel_X_given_W1", to_json(s.kernel_X_given_W1)}};
}

inline json to_json(const BoundResult& r)
{
  json j{{"value", r.value}, {"feasible", r.feasible}};
  if (!r.direction.empty()) j["direction"] = r.direction;
  json in = json::array();
  for (const auto& p : r.inputs) in.push_back(to_json(p));
  j["inputs"] = std::move(in);
  if (r.ratio) j["ratio"] = {{"n_f", r.ratio->nf}, {"n_b", r.ratio->nb}};
  if (r.terms) {
    j["terms"] = {{"r_s1", r.terms->r_s1},
                  {"r_s2", r.terms->r_s2},
                  {"constraint_lhs", r.terms->constraint_lhs},
                  {"constraint_rhs", r.terms->constraint_rhs}};
  }
  if (r.scheme) j["scheme"] = to_json(*r.scheme);
  j["meta"] = {{"grid", r.meta.grid},
               {"restarts", r.meta.restarts},
               {"evaluations", r.meta.evaluations},
               {"method", r.meta.method}};
  if (!r.parts.empty()) {
    json parts = json::array();
    for (const auto& p : r.parts) parts.push_back(to_json(p));
    j["parts"] = std::move(parts);
  }
  return j;
}

inline json to_json(const ProportionEstimate& e)
{
  return {{"successes", e.successes}, {"trials", e.trials}, {"rate", e.rate}, {"lo", e.lo}, {"hi", e.hi}};
}

inline json to_json(const ChiSquareResult& c)
{
  return {{"bins", c.bins}, {"statistic", c.statistic}, {"df", c.df}, {"p_value", c.p_value}};
}

inline json to_json(const DegradednessReport& r)
{
  json j{{"degraded", r.degraded()},
         {"independent_subchannels", r.independent_subchannels},
         {"obversely_degraded", r.obversely_degraded},
         {"reversely_degraded", r.reversely_degraded},
         {"tol", r.tol},
         {"residuals",
          {{"independence", r.residuals.independence},
           {"obverse", r.residuals.obverse},
           {"reverse", r.residuals.reverse}}}};
  if (r.subchannel_split) {
    const auto& s = *r.subchannel_split;
    j["split"] = {{"x", {s.x.o, s.x.r}}, {"y", {s.y.o, s.y.r}}, {"z", {s.z.o, s.z.r}}};
  }
  return j;
}

inline json to_json(const AepReport& r)
{
  return {{"n", r.params.n},
          {"d", r.params.d},
          {"epsilon", r.params.epsilon},
          {"trials", r.trials},
          {"seed", r.seed},
          {"paired", to_json(r.paired)},
          {"independent", to_json(r.independent)},
          {"info_u", r.info_u},
          {"info_t", r.info_t},
          {"log2_upper", r.log2_upper},
          {"log2_lower", r.log2_lower},
          {"paired_ok", r.paired_ok},
          {"envelope_ok", r.envelope_ok},
          {"ok", r.ok()}};
}

inline json to_json(const CodingParameters& p)
{
  json capped = json::array();
  for (const auto& c : p.capped) capped.push_back(c);
  return {{"n_f", p.n_f},
          {"n_b", p.n_b},
          {"n_b1", p.n_b1},
          {"n_b2", p.n_b2},
          {"alpha", p.alpha},
          {"beta", p.beta},
          {"epsilon", p.epsilon},
          {"eta_f", p.eta_f},
          {"eta_t", p.eta_t},
          {"eta_t1", p.eta_t1},
          {"eta_t2", p.eta_t2},
          {"eta_b", p.eta_b},
          {"eta_b1", p.eta_b1},
          {"eta_b2", p.eta_b2},
          {"eta_1", p.eta_1},
          {"eta_2", p.eta_2},
          {"eta", p.eta},
          {"kappa", p.kappa},
          {"gamma", p.gamma},
          {"exact",
           {{"eta_f", p.exact.eta_f},
            {"eta_t", p.exact.eta_t},
            {"eta_b", p.exact.eta_b},
            {"eta", p.exact.eta},
            {"kappa", p.exact.kappa}}},
          {"information",
           {{"I(V;X_f)", p.info.i_v_x},
            {"I(V;Y_f)", p.info.i_v_y},
            {"I(V;Z_f)", p.info.i_v_z},
            {"I(V;Y_f|X_f)", p.info.i_v_y_given_x},
            {"I(W1;Y_b)", p.info.i_w1_y},
            {"I(W2;Y_b)", p.info.i_w2_y},
            {"I(W1;Y_b|W2)", p.info.i_w1_y_given_w2},
            {"I(W1;Z_b|W2)", p.info.i_w1_z_given_w2}}},
          {"capped", std::move(capped)}};
}

inline json to_json(const SecurityEstimate& e)
{
  json j{{"trials", e.trials},
         {"kappa", e.kappa},
         {"n_total", e.n_total},
         {"key_entropy", e.key_entropy},
         {"key_entropy_rate", e.key_entropy_rate},
         {"rate_ceiling", e.rate_ceiling},
         {"error", to_json(e.error)},
         {"nulls", {{"bob_search", e.null_bob}, {"alice_level1", e.null_alice1}, {"alice_level2", e.null_alice2}}},
         {"eve_reconstruct", to_json(e.eve_reconstruct)},
         {"key_uniformity", to_json(e.key_uniformity)}};
  j["leakage_ratio"] = e.leakage_ratio ? json(*e.leakage_ratio) : json(nullptr);
  return j;
}

}  // namespace ske
