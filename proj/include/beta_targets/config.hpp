#pragma once

// Run configuration: a JSON document validated strictly (unknown keys are
// errors), turned into module inputs, plus the small reproducibility helpers
// shared by every output (config hash, CSV preamble, error JSON).

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <initializer_list>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "json.hpp"

#include "beta_targets/dimension_engine.hpp"
#include "beta_targets/hausdorff_content.hpp"
#include "beta_targets/error.hpp"
#include "beta_targets/numerical_lab.hpp"
#include "beta_targets/parallelepiped.hpp"

namespace beta_targets {

using Json = nlohmann::json;

struct LevelRange {
  std::size_t n_min = 1;
  std::size_t n_max = 50;
  std::size_t window = kDefaultWindow;
  double tolerance = kDefaultConvergenceTolerance;
};

struct ExpandSection {
  std::vector<double> x{0.5};
  std::size_t n = 10;
};

struct CylindersSection {
  std::size_t n = 4;
  bool full_only = false;
  std::optional<Interval> within;
};

struct CountSection {
  std::size_t n_max = 10;
};

struct ContentSection {
  std::vector<Parallelepiped> shapes;
  std::vector<double> s{1.0};
  std::vector<int> depths = default_content_depths();
};

struct VerifyCoverSection {
  std::vector<std::size_t> levels{2, 3, 4};
  double excess = 0.2;
};

struct VerifyMeasureSection {
  std::vector<std::size_t> levels{2, 3};
  Square D = Square::unit();
  double t_offset = 0.1;  ///< t = s_n - t_offset unless t is given
  std::optional<double> t;
  std::optional<double> eps;
  std::size_t samples = 10'000;
};

struct RunConfig {
  std::vector<double> betas;
  std::optional<TargetSpec> target;
  LevelRange levels;
  ComputeMode mode = ComputeMode::automatic;
  std::uint64_t resource_cap = kDefaultLabCap;
  std::uint64_t seed = 0;
  unsigned threads = 1;
  std::optional<Parallelepiped> ortho;
  ExpandSection expand;
  CylindersSection cylinders;
  CountSection count;
  ContentSection content;
  VerifyCoverSection verify_cover;
  VerifyMeasureSection verify_measure;
  /// FNV-1a of the canonical (sorted-key, compact) form of the input document.
  std::uint64_t hash = 0;
};

inline std::uint64_t fnv1a64(std::string_view bytes) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

inline std::string hex64(std::uint64_t v) {
  std::ostringstream os;
  os << std::hex;
  os.width(16);
  os.fill('0');
  os << v;
  return os.str();
}

/// Comment line that opens every CSV artifact.
inline std::string csv_preamble(const RunConfig& cfg) {
  return "# config_hash=" + hex64(cfg.hash) + " seed=" + std::to_string(cfg.seed) + "\n";
}

inline Json error_json(const Error& e) {
  return {{"error", {{"module", to_string(e.module())}, {"code", to_string(e.code())}, {"message", e.detail()}}}};
}

namespace config_detail {

[[noreturn]] inline void schema(const std::string& path, const std::string& msg) {
  fail(Module::cli_io, ErrorCode::schema_error, path + ": " + msg);
}

inline void allow_keys(const Json& j, const std::string& path, std::initializer_list<const char*> keys) {
  if (!j.is_object()) schema(path, "expected an object");
  for (const auto& [k, v] : j.items()) {
    bool ok = false;
    for (const char* a : keys) ok = ok || k == a;
    if (!ok) schema(path + "." + k, "unknown key");
  }
}

inline double number(const Json& j, const std::string& path) {
  if (!j.is_number()) schema(path, "expected a number");
  return j.get<double>();
}

inline std::size_t count(const Json& j, const std::string& path, std::size_t min = 0) {
  if (!j.is_number_integer() || j.get<std::int64_t>() < static_cast<std::int64_t>(min))
    schema(path, "expected an integer >= " + std::to_string(min));
  return j.get<std::size_t>();
}

inline std::vector<double> numbers(const Json& j, const std::string& path) {
  if (!j.is_array()) schema(path, "expected an array of numbers");
  std::vector<double> out;
  for (std::size_t i = 0; i < j.size(); ++i) out.push_back(number(j[i], path + "[" + std::to_string(i) + "]"));
  return out;
}

inline std::vector<std::size_t> counts(const Json& j, const std::string& path, std::size_t min) {
  if (!j.is_array() || j.empty()) schema(path, "expected a non-empty array of integers");
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < j.size(); ++i) out.push_back(count(j[i], path + "[" + std::to_string(i) + "]", min));
  return out;
}

inline Interval interval(const Json& j, const std::string& path) {
  const auto v = numbers(j, path);
  if (v.size() != 2 || !(v[0] >= 0.0) || !(v[0] < v[1]) || !(v[1] <= 1.0)) schema(path, "expected [lo, hi] with 0 <= lo < hi <= 1");
  return {v[0], v[1]};
}

}  // namespace config_detail

/// {"origin": [...], "columns": [[...], ...]} with columns listed as vectors.
inline Parallelepiped parse_parallelepiped(const Json& j, const std::string& path = "parallelepiped") {
  using namespace config_detail;
  allow_keys(j, path, {"origin", "columns"});
  if (!j.contains("columns")) schema(path + ".columns", "missing");
  const Json& cols = j.at("columns");
  if (!cols.is_array() || cols.empty()) schema(path + ".columns", "expected a non-empty array of vectors");
  const std::size_t d = cols.size();
  Parallelepiped P{std::vector<double>(d, 0.0), Matrix(d, d)};
  if (j.contains("origin")) {
    P.origin = numbers(j.at("origin"), path + ".origin");
    if (P.origin.size() != d) schema(path + ".origin", "needs " + std::to_string(d) + " entries");
  }
  for (std::size_t c = 0; c < d; ++c) {
    const auto v = numbers(cols[c], path + ".columns[" + std::to_string(c) + "]");
    if (v.size() != d) schema(path + ".columns[" + std::to_string(c) + "]", "needs " + std::to_string(d) + " entries");
    for (std::size_t i = 0; i < d; ++i) P.columns(i, c) = v[i];
  }
  return P;
}

inline Json to_json(const Parallelepiped& P) {
  Json cols = Json::array();
  for (std::size_t c = 0; c < P.dim(); ++c) cols.push_back(P.columns.column_vector(c));
  return {{"origin", P.origin}, {"columns", cols}};
}

namespace config_detail {

inline ExponentRule exponent_rule(const Json& j, const std::string& path) {
  allow_keys(j, path, {"base", "rate", "offset"});
  ExponentRule r;
  if (j.contains("base")) r.base = number(j.at("base"), path + ".base");
  if (j.contains("rate")) r.rate = number(j.at("rate"), path + ".rate");
  if (j.contains("offset")) r.offset = number(j.at("offset"), path + ".offset");
  if (!(r.base > 1.0)) schema(path + ".base", "must exceed 1");
  if (!(r.rate >= 0.0)) schema(path + ".rate", "must be non-negative");
  return r;
}

inline std::vector<ExponentRule> exponent_rules(const Json& j, const std::string& path) {
  if (!j.is_array()) schema(path, "expected an array of side rules");
  std::vector<ExponentRule> out;
  for (std::size_t i = 0; i < j.size(); ++i) out.push_back(exponent_rule(j[i], path + "[" + std::to_string(i) + "]"));
  return out;
}

inline TargetSpec target(const Json& j, const BetaSystem& sys, const std::filesystem::path& base_dir) {
  const std::string path = "target";
  if (!j.is_object() || !j.contains("kind") || !j.at("kind").is_string()) schema(path + ".kind", "missing or not a string");
  const std::string kind = j.at("kind").get<std::string>();
  const std::size_t d = sys.dim();
  if (kind == "rotated2d") {
    allow_keys(j, path, {"kind", "theta", "theta_value", "a", "sides", "translation"});
    if (d != 2) schema(path, "rotated2d needs two betas");
    Rotated2dFamily fam;
    if (j.contains("theta") && !j.at("theta").is_string()) schema(path + ".theta", "expected a string");
    const std::string theta = j.contains("theta") ? j.at("theta").get<std::string>() : "const";
    if (theta == "const") {
      if (j.contains("a")) schema(path + ".a", "only valid with theta = arccos_pow2");
      fam.rotation.kind = RotationRule::Kind::constant;
      fam.rotation.theta = j.contains("theta_value") ? number(j.at("theta_value"), path + ".theta_value") : 0.0;
    } else if (theta == "arccos_pow2") {
      if (j.contains("theta_value")) schema(path + ".theta_value", "only valid with theta = const");
      if (!j.contains("a")) schema(path + ".a", "missing");
      fam.rotation.kind = RotationRule::Kind::arccos_pow2;
      fam.rotation.a = number(j.at("a"), path + ".a");
      if (!(fam.rotation.a >= 0.0)) schema(path + ".a", "must be non-negative");
    } else {
      schema(path + ".theta", "expected \"const\" or \"arccos_pow2\"");
    }
    if (j.contains("sides")) {
      const auto rules = exponent_rules(j.at("sides"), path + ".sides");
      if (rules.size() != 2) schema(path + ".sides", "needs two rules");
      fam.sides = {rules[0], rules[1]};
    }
    if (j.contains("translation")) {
      const auto t = numbers(j.at("translation"), path + ".translation");
      if (t.size() != 2) schema(path + ".translation", "needs two entries");
      fam.translation = {t[0], t[1]};
    }
    return {sys, fam};
  }
  if (kind == "axis") {
    allow_keys(j, path, {"kind", "sides", "origin"});
    if (!j.contains("sides")) schema(path + ".sides", "missing");
    AxisFamily fam;
    fam.sides = exponent_rules(j.at("sides"), path + ".sides");
    if (fam.sides.size() != d) schema(path + ".sides", "needs one rule per beta");
    if (j.contains("origin")) {
      fam.origin = numbers(j.at("origin"), path + ".origin");
      if (fam.origin.size() != d) schema(path + ".origin", "needs one entry per beta");
    }
    return {sys, fam};
  }
  if (kind == "explicit") {
    allow_keys(j, path, {"kind", "levels"});
    if (!j.contains("levels") || !j.at("levels").is_array()) schema(path + ".levels", "expected an array");
    ExplicitFamily fam;
    const Json& levels = j.at("levels");
    for (std::size_t i = 0; i < levels.size(); ++i) {
      const std::string p = path + ".levels[" + std::to_string(i) + "]";
      allow_keys(levels[i], p, {"n", "origin", "columns"});
      if (!levels[i].contains("n")) schema(p + ".n", "missing");
      const std::size_t n = count(levels[i].at("n"), p + ".n", 1);
      Json shape = levels[i];
      shape.erase("n");
      Parallelepiped P = parse_parallelepiped(shape, p);
      if (P.dim() != d) schema(p, "dimension differs from the number of betas");
      fam.by_level[n] = std::move(P);
    }
    return {sys, fam};
  }
  if (kind == "table") {
    allow_keys(j, path, {"kind", "path"});
    if (!j.contains("path") || !j.at("path").is_string()) schema(path + ".path", "missing or not a string");
    std::filesystem::path file = j.at("path").get<std::string>();
    if (file.is_relative()) file = base_dir / file;
    std::ifstream in(file);
    if (!in) fail(Module::cli_io, ErrorCode::io_error, "cannot open target table " + file.string());
    return {sys, load_target_table(in, d)};
  }
  schema(path + ".kind", "expected rotated2d, axis, explicit or table");
}

}  // namespace config_detail

/// Validates a configuration document. Relative table paths resolve against base_dir.
inline RunConfig parse_config(const Json& doc, const std::filesystem::path& base_dir = ".") {
  using namespace config_detail;
  allow_keys(doc, "config",
             {"betas", "target", "levels", "mode", "resource_cap", "seed", "threads", "ortho", "expand", "cylinders", "count",
              "content", "verify_cover", "verify_measure"});
  RunConfig cfg;
  cfg.hash = fnv1a64(doc.dump());
  if (!doc.contains("betas")) schema("config.betas", "missing");
  cfg.betas = numbers(doc.at("betas"), "config.betas");
  if (cfg.betas.empty()) schema("config.betas", "needs at least one beta");
  for (double b : cfg.betas)
    if (!(b > 1.0)) fail(Module::cli_io, ErrorCode::domain_error, "config.betas: every beta must exceed 1");
  const BetaSystem sys(cfg.betas);

  if (doc.contains("target")) cfg.target = target(doc.at("target"), sys, base_dir);
  if (doc.contains("levels")) {
    const Json& j = doc.at("levels");
    allow_keys(j, "levels", {"n_min", "n_max", "window", "tolerance"});
    if (j.contains("n_min")) cfg.levels.n_min = count(j.at("n_min"), "levels.n_min", 1);
    if (j.contains("n_max")) cfg.levels.n_max = count(j.at("n_max"), "levels.n_max", 1);
    if (j.contains("window")) cfg.levels.window = count(j.at("window"), "levels.window", 1);
    if (j.contains("tolerance")) cfg.levels.tolerance = number(j.at("tolerance"), "levels.tolerance");
  }
  if (cfg.levels.n_min > cfg.levels.n_max) schema("levels", "n_min exceeds n_max");
  cfg.levels.window = std::min(cfg.levels.window, cfg.levels.n_max - cfg.levels.n_min + 1);
  if (!(cfg.levels.tolerance > 0.0)) schema("levels.tolerance", "must be positive");

  if (doc.contains("mode")) {
    const Json& m = doc.at("mode");
    if (m == "auto") cfg.mode = ComputeMode::automatic;
    else if (m == "double") cfg.mode = ComputeMode::double_precision;
    else if (m == "log") cfg.mode = ComputeMode::log_domain;
    else schema("config.mode", "expected \"auto\", \"double\" or \"log\"");
  }
  if (doc.contains("resource_cap")) cfg.resource_cap = count(doc.at("resource_cap"), "config.resource_cap", 1);
  if (doc.contains("seed")) cfg.seed = count(doc.at("seed"), "config.seed");
  if (doc.contains("threads")) cfg.threads = static_cast<unsigned>(count(doc.at("threads"), "config.threads", 1));
  if (doc.contains("ortho")) cfg.ortho = parse_parallelepiped(doc.at("ortho"), "ortho");

  if (doc.contains("expand")) {
    const Json& j = doc.at("expand");
    allow_keys(j, "expand", {"x", "n"});
    if (j.contains("x")) cfg.expand.x = j.at("x").is_array() ? numbers(j.at("x"), "expand.x") : std::vector{number(j.at("x"), "expand.x")};
    if (j.contains("n")) cfg.expand.n = count(j.at("n"), "expand.n", 1);
  }
  if (doc.contains("cylinders")) {
    const Json& j = doc.at("cylinders");
    allow_keys(j, "cylinders", {"n", "full_only", "within"});
    if (j.contains("n")) cfg.cylinders.n = count(j.at("n"), "cylinders.n", 1);
    if (j.contains("full_only")) {
      if (!j.at("full_only").is_boolean()) schema("cylinders.full_only", "expected a boolean");
      cfg.cylinders.full_only = j.at("full_only").get<bool>();
    }
    if (j.contains("within")) cfg.cylinders.within = interval(j.at("within"), "cylinders.within");
  }
  if (doc.contains("count")) {
    const Json& j = doc.at("count");
    allow_keys(j, "count", {"n_max"});
    if (j.contains("n_max")) cfg.count.n_max = count(j.at("n_max"), "count.n_max", 1);
  }
  if (doc.contains("content")) {
    const Json& j = doc.at("content");
    allow_keys(j, "content", {"shapes", "s", "depths"});
    if (!j.contains("shapes") || !j.at("shapes").is_array()) schema("content.shapes", "expected an array of parallelograms");
    for (std::size_t i = 0; i < j.at("shapes").size(); ++i) {
      const std::string p = "content.shapes[" + std::to_string(i) + "]";
      Parallelepiped P = parse_parallelepiped(j.at("shapes")[i], p);
      if (P.dim() != 2) schema(p, "content shapes must be planar");
      cfg.content.shapes.push_back(std::move(P));
    }
    if (j.contains("s")) cfg.content.s = j.at("s").is_array() ? numbers(j.at("s"), "content.s") : std::vector{number(j.at("s"), "content.s")};
    if (j.contains("depths")) {
      cfg.content.depths.clear();
      for (auto k : counts(j.at("depths"), "content.depths", 0)) cfg.content.depths.push_back(static_cast<int>(k));
    }
  }
  if (doc.contains("verify_cover")) {
    const Json& j = doc.at("verify_cover");
    allow_keys(j, "verify_cover", {"levels", "excess"});
    if (j.contains("levels")) cfg.verify_cover.levels = counts(j.at("levels"), "verify_cover.levels", 1);
    if (j.contains("excess")) cfg.verify_cover.excess = number(j.at("excess"), "verify_cover.excess");
  }
  if (doc.contains("verify_measure")) {
    const Json& j = doc.at("verify_measure");
    allow_keys(j, "verify_measure", {"levels", "D", "t", "t_offset", "eps", "samples"});
    auto& vm = cfg.verify_measure;
    if (j.contains("levels")) vm.levels = counts(j.at("levels"), "verify_measure.levels", 1);
    if (j.contains("D")) {
      const Json& D = j.at("D");
      if (!D.is_array() || D.size() != 2) schema("verify_measure.D", "expected [[x0, x1], [y0, y1]]");
      vm.D = {interval(D[0], "verify_measure.D[0]"), interval(D[1], "verify_measure.D[1]")};
    }
    if (j.contains("t")) vm.t = number(j.at("t"), "verify_measure.t");
    if (j.contains("t_offset")) vm.t_offset = number(j.at("t_offset"), "verify_measure.t_offset");
    if (j.contains("eps")) vm.eps = number(j.at("eps"), "verify_measure.eps");
    if (j.contains("samples")) vm.samples = count(j.at("samples"), "verify_measure.samples", 1);
  }
  return cfg;
}

inline RunConfig parse_config(std::string_view text, const std::filesystem::path& base_dir = ".") {
  Json doc;
  try {
    doc = Json::parse(text);
  } catch (const Json::parse_error& e) {
    fail(Module::cli_io, ErrorCode::schema_error, std::string("malformed JSON: ") + e.what());
  }
  return parse_config(doc, base_dir);
}

inline RunConfig load_config(const std::filesystem::path& file) {
  std::ifstream in(file);
  if (!in) fail(Module::cli_io, ErrorCode::io_error, "cannot open config " + file.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_config(std::string_view(ss.str()), file.parent_path().empty() ? std::filesystem::path(".") : file.parent_path());
}

}  // namespace beta_targets
