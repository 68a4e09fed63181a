#pragma once

// The beta-targets command line: argument parsing with CLI11, one handler per
// subcommand. Kept in a header so the test suite can drive it in-process.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <numbers>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"

#include "beta_targets/beta_dynamics.hpp"
#include "beta_targets/config.hpp"
#include "beta_targets/dimension_engine.hpp"
#include "beta_targets/hausdorff_content.hpp"
#include "beta_targets/numerical_lab.hpp"
#include "beta_targets/parallelepiped.hpp"

namespace beta_targets::cli {

/// Shortest round-trip decimal form, so outputs are byte-stable.
inline std::string num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

struct Options {
  std::string config_path;
  std::string out_dir;
  std::optional<std::uint64_t> seed;
  std::optional<unsigned> threads;
  // Shortcuts that bypass the config file.
  std::vector<double> beta;
  std::optional<std::size_t> n;
  std::vector<double> x;
  std::optional<std::size_t> n_min, n_max, window;
};

namespace detail {

inline RunConfig resolve(const Options& o, bool config_required) {
  RunConfig cfg;
  if (!o.config_path.empty()) {
    cfg = load_config(o.config_path);
  } else if (config_required || o.beta.empty()) {
    fail(Module::cli_io, ErrorCode::schema_error, "--config is required" + std::string(config_required ? "" : " unless --beta is given"));
  } else {
    Json doc{{"betas", o.beta}};
    cfg = parse_config(doc);
  }
  if (!o.beta.empty() && !o.config_path.empty()) {
    for (double b : o.beta)
      if (!(b > 1.0)) fail(Module::cli_io, ErrorCode::domain_error, "every beta must exceed 1");
    cfg.betas = o.beta;
  }
  if (o.seed) cfg.seed = *o.seed;
  if (o.threads) cfg.threads = std::max(1u, *o.threads);
  if (o.n_min) cfg.levels.n_min = *o.n_min;
  if (o.n_max) cfg.levels.n_max = *o.n_max;
  if (o.window) cfg.levels.window = *o.window;
  if (cfg.levels.n_min < 1 || cfg.levels.n_min > cfg.levels.n_max)
    fail(Module::cli_io, ErrorCode::schema_error, "levels: need 1 <= n_min <= n_max");
  return cfg;
}

inline const TargetSpec& require_target(const RunConfig& cfg) {
  if (!cfg.target) fail(Module::cli_io, ErrorCode::schema_error, "config.target: missing");
  return *cfg.target;
}

}  // namespace detail

inline std::string run_expand(const RunConfig& cfg, const Options& o) {
  const std::size_t n = o.n.value_or(cfg.expand.n);
  const std::vector<double> xs = o.x.empty() ? cfg.expand.x : o.x;
  std::ostringstream out;
  out << csv_preamble(cfg) << "beta,x,n,word,orbit\n";
  for (double b : cfg.betas) {
    const BetaParam beta(b);
    for (double x : xs) {
      double y = x;
      for (std::size_t k = 0; k < n; ++k) y = transform(beta, y);
      out << num(b) << ',' << num(x) << ',' << n << ',' << digits(beta, x, n).to_string() << ',' << num(y) << '\n';
    }
  }
  return out.str();
}

inline std::string run_cylinders(const RunConfig& cfg, const Options& o) {
  EnumerationOptions opts;
  opts.full_only = cfg.cylinders.full_only;
  opts.within = cfg.cylinders.within;
  opts.node_cap = std::min<std::uint64_t>(cfg.resource_cap, kDefaultNodeCap);
  const std::size_t n = o.n.value_or(cfg.cylinders.n);
  std::ostringstream out;
  out << csv_preamble(cfg) << "beta,word,level,left,length,full\n";
  for (double b : cfg.betas)
    for_each_cylinder(BetaParam(b), n, [&](const CylinderNode<double>& c) {
      out << num(b) << ',' << c.word.to_string() << ',' << c.level << ',' << num(c.left) << ',' << num(c.length) << ','
          << (c.full ? 1 : 0) << '\n';
    }, opts);
  return out.str();
}

inline std::string run_count(const RunConfig& cfg, const Options& o) {
  const std::uint64_t cap = std::min<std::uint64_t>(cfg.resource_cap, kDefaultNodeCap);
  // `count --beta b --n k` answers with the bare number.
  if (o.config_path.empty() && o.n && cfg.betas.size() == 1)
    return std::to_string(count_admissible(BetaParam(cfg.betas[0]), *o.n, cap)) + "\n";
  std::ostringstream out;
  out << csv_preamble(cfg) << "beta,n,admissible,full,renyi_lower,renyi_upper,full_lower\n";
  const std::size_t lo = o.n ? *o.n : 1, hi = o.n ? *o.n : cfg.count.n_max;
  for (double b : cfg.betas) {
    const BetaParam beta(b);
    for (std::size_t n = lo; n <= hi; ++n) {
      const double bn = std::pow(b, static_cast<double>(n));
      out << num(b) << ',' << n << ',' << count_admissible(beta, n, cap) << ',' << count_full(beta, n, cap) << ',' << num(bn) << ','
          << num(bn * b / (b - 1.0)) << ',' << num(full_count_constant(beta) * bn) << '\n';
    }
  }
  return out.str();
}

inline Json ortho_json(const Parallelepiped& P) {
  const OrthoFrame frame = pivoted_orthogonalize(P);
  const Hyperrectangle R = bounding_hyperrectangle(frame, P.origin);
  const FrameCheck check = check_frame(P, frame);
  const std::size_t d = P.dim();
  Json gammas = Json::array(), U = Json::array(), axes = Json::array();
  for (std::size_t k = 0; k < d; ++k) {
    gammas.push_back(frame.gammas.column_vector(k));
    axes.push_back(R.axes.column_vector(k));
    std::vector<double> row(d);
    for (std::size_t j = 0; j < d; ++j) row[j] = frame.U(k, j);
    U.push_back(row);
  }
  return {{"parallelepiped", to_json(P)},
          {"permutation", frame.permutation},
          {"gamma_norms", frame.norms},
          {"gammas", gammas},
          {"U", U},
          {"bounding_box", {{"center", R.center}, {"axes", axes}, {"half_extents", R.half_extents}}},
          {"volume", volume(P)},
          {"checks",
           {{"orthogonal", check.orthogonal},
            {"sorted", check.sorted},
            {"coefficients_bounded", check.coefficients_bounded},
            {"max_abs_coefficient", check.max_abs_coefficient},
            {"reconstructs", check.reconstructs},
            {"vertices_contained", check.vertices_contained},
            {"volume_identity", check.volume_identity}}}};
}

inline std::string run_ortho(const RunConfig& cfg, const Options&) {
  if (!cfg.ortho) fail(Module::cli_io, ErrorCode::schema_error, "config.ortho: missing");
  Json j = ortho_json(*cfg.ortho);
  j["config_hash"] = hex64(cfg.hash);
  return j.dump(2) + "\n";
}

inline std::string run_content(const RunConfig& cfg, const Options&) {
  if (cfg.content.shapes.empty()) fail(Module::cli_io, ErrorCode::schema_error, "config.content.shapes: missing or empty");
  std::ostringstream out;
  out << csv_preamble(cfg) << "shape,s,lower,upper,grids\n";
  for (std::size_t i = 0; i < cfg.content.shapes.size(); ++i) {
    const auto poly = geom::ConvexPolygon::from_parallelepiped(cfg.content.shapes[i]);
    for (double s : cfg.content.s) {
      const ContentEstimate e = brute_force_content_2d(poly, s, cfg.content.depths);
      out << i << ',' << num(s) << ',' << num(e.lower) << ',' << num(e.upper) << ',' << e.scale_grid.size() << '\n';
    }
  }
  return out.str();
}

inline std::string run_dimension(const RunConfig& cfg, const Options&) {
  const TargetSpec& spec = detail::require_target(cfg);
  const std::size_t window = std::min(cfg.levels.window, cfg.levels.n_max - cfg.levels.n_min + 1);
  const DimensionReport rep = s_star(spec, cfg.levels.n_min, cfg.levels.n_max, window, cfg.levels.tolerance, cfg.mode, cfg.threads);
  std::ostringstream out;
  out << csv_preamble(cfg) << "n";
  for (std::size_t i = 1; i <= spec.dim(); ++i) out << ",gamma_" << i << "_log2";
  out << ",s_n,argmin_tau_log2,log_domain\n";
  for (const auto& lv : rep.levels) {
    out << lv.n;
    for (double g : lv.gamma_log2) out << ',' << num(g);
    out << ',' << num(lv.s_n) << ',' << num(lv.argmin_tau_log2) << ',' << (lv.log_domain ? 1 : 0) << '\n';
  }
  if (!rep.containment_warnings.empty()) {
    out << "# warning: P_n not inside [0,1)^d at n =";
    for (auto n : rep.containment_warnings) out << ' ' << n;
    out << '\n';
  }
  out << "# s_star=" << num(rep.s_star) << " converged=" << (rep.converged ? 1 : 0) << " window=" << rep.window
      << " window_min=" << num(rep.window_min) << " window_max=" << num(rep.window_max) << '\n';
  out << "# " << DimensionReport::kLargeIntersectionNote << '\n';
  return out.str();
}

inline std::string run_verify_cover(const RunConfig& cfg, const Options&) {
  const TargetSpec& spec = detail::require_target(cfg);
  std::ostringstream out;
  out << csv_preamble(cfg) << "n,tau_log2,measured,formula,ratio,s_n,volume_at_s_n,volume_at_s_n_plus_excess,is_argmin\n";
  for (std::size_t n : cfg.verify_cover.levels) {
    const CoverScan scan = cover_exponent_scan(spec, n, {}, cfg.verify_cover.excess, cfg.resource_cap, cfg.threads);
    for (const auto& r : scan.rows)
      out << n << ',' << num(r.tau_log2) << ',' << r.count << ',' << num(std::exp2(r.predicted_log2)) << ',' << num(r.ratio) << ','
          << num(scan.s_n) << ',' << num(r.volume_at_s_n) << ',' << num(r.volume_above) << ','
          << (r.tau_log2 == scan.argmin_tau_log2 ? 1 : 0) << '\n';
  }
  return out.str();
}

inline std::string run_verify_measure(const RunConfig& cfg, const Options&) {
  const TargetSpec& spec = detail::require_target(cfg);
  const auto& vm = cfg.verify_measure;
  std::ostringstream out;
  out << csv_preamble(cfg) << "n,regime,samples,t,eps,measured,center_x,center_y,r,mass\n";
  for (std::size_t n : vm.levels) {
    const double sn = s_n(spec, n, ComputeMode::double_precision).s_n;
    const double t = vm.t.value_or(sn - vm.t_offset);
    const double eps = vm.eps.value_or(default_epsilon(sn, t));
    const MuMeasure M = build_mu(spec, n, vm.D, eps, cfg.resource_cap);
    const MeasureCheck c = verify_measure_bound(M, spec, t, vm.samples, cfg.seed, cfg.threads);
    for (std::size_t k = 0; k < 4; ++k) {
      if (c.regime_samples[k] == 0) continue;
      out << n << ',' << to_string(static_cast<RadiusRegime>(k)) << ',' << c.regime_samples[k] << ',' << num(t) << ',' << num(eps) << ','
          << num(c.regime_max[k]) << ",,,,\n";
    }
    out << n << ",all," << vm.samples << ',' << num(t) << ',' << num(eps) << ',' << num(c.max_ratio) << ',' << num(c.worst.center.x)
        << ',' << num(c.worst.center.y) << ',' << num(c.worst.r) << ',' << num(c.worst.mass) << '\n';
  }
  return out.str();
}

/// Runs the command line; returns the process exit status.
inline int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Dimension of shrinking parallelepiped targets under beta-transformations", "beta-targets"};
  app.require_subcommand(1);
  Options o;

  struct Sub {
    const char* name;
    const char* help;
    bool config_required;
    const char* ext;
    std::string (*handler)(const RunConfig&, const Options&);
  };
  const std::vector<Sub> subs{
      {"expand", "greedy digits and n-th orbit point of x", false, "csv", run_expand},
      {"cylinders", "admissible level-n cylinders", false, "csv", run_cylinders},
      {"count", "admissible and full word counts", false, "csv", run_count},
      {"ortho", "pivoted orthogonal frame of a parallelepiped", true, "json", run_ortho},
      {"content", "Hausdorff content bounds of planar parallelograms", true, "csv", run_content},
      {"dimension", "s_n per level and the windowed limsup", true, "csv", run_dimension},
      {"verify-cover", "grid cover counts of E_n against the predicted count", true, "csv", run_verify_cover},
      {"verify-measure", "sampled ball masses of mu_n", true, "csv", run_verify_measure},
  };
  std::vector<CLI::App*> apps;
  for (const auto& s : subs) {
    CLI::App* sub = app.add_subcommand(s.name, s.help);
    sub->add_option("--config", o.config_path, "run configuration (JSON)");
    sub->add_option("--out", o.out_dir, "write the artifact into this directory instead of stdout");
    sub->add_option("--seed", o.seed, "random seed");
    sub->add_option("--threads", o.threads, "worker threads");
    if (!s.config_required) {
      sub->add_option("--beta", o.beta, "beta value(s), instead of a config")->delimiter(',');
      sub->add_option("--n", o.n, "level");
    }
    if (std::string(s.name) == "expand") sub->add_option("--x", o.x, "point(s) in [0,1)")->delimiter(',');
    if (std::string(s.name) == "dimension") {
      sub->add_option("--nmin", o.n_min, "first level");
      sub->add_option("--nmax", o.n_max, "last level");
      sub->add_option("--window", o.window, "levels in the limsup window");
    }
    apps.push_back(sub);
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e, out, err);
  }

  for (std::size_t i = 0; i < subs.size(); ++i) {
    if (!apps[i]->parsed()) continue;
    try {
      const RunConfig cfg = detail::resolve(o, subs[i].config_required);
      const std::string artifact = subs[i].handler(cfg, o);
      if (o.out_dir.empty()) {
        out << artifact;
      } else {
        std::filesystem::create_directories(o.out_dir);
        const auto file = std::filesystem::path(o.out_dir) / (std::string(subs[i].name) + "." + subs[i].ext);
        std::ofstream f(file, std::ios::binary);
        if (!(f << artifact)) fail(Module::cli_io, ErrorCode::io_error, "cannot write " + file.string());
        out << file.string() << '\n';
      }
      return 0;
    } catch (const Error& e) {
      err << error_json(e).dump() << '\n';
      return 1;
    } catch (const std::exception& e) {
      err << error_json(Error(Module::cli_io, ErrorCode::io_error, e.what())).dump() << '\n';
      return 1;
    }
  }
  return 1;
}

}  // namespace beta_targets::cli
