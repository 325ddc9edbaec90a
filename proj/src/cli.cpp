// SPDX-License-Identifier: Apache-2.0
#include "pspect/cli.hpp"

#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <numbers>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "pspect/eigensolve.hpp"
#include "pspect/fit.hpp"
#include "pspect/io.hpp"
#include "pspect/parallel.hpp"
#include "pspect/persson.hpp"
#include "pspect/selfcheck.hpp"
#include "pspect/strip.hpp"
#include "pspect/weyl2.hpp"

namespace pspect::cli {

namespace {

namespace fs = std::filesystem;
using nlohmann::json;

constexpr const char* kVersion = "pspect 0.1.0";

// Fractions like "1/128" are parsed exactly; plain decimals pass through.
double parse_number(const std::string& s) {
  const auto slash = s.find('/');
  if (slash == std::string::npos) {
    std::size_t used = 0;
    const double v = std::stod(s, &used);
    if (used != s.size()) throw ParameterError("bad numeric literal: " + s);
    return v;
  }
  const double num = std::stod(s.substr(0, slash));
  const double den = std::stod(s.substr(slash + 1));
  if (den == 0.0) throw ParameterError("zero denominator in: " + s);
  return num / den;
}

std::vector<double> parse_list(const std::string& s) {
  std::vector<double> out;
  std::stringstream ss(s);
  std::string tok;
  while (std::getline(ss, tok, ',')) {
    if (!tok.empty()) out.push_back(parse_number(tok));
  }
  return out;
}

std::vector<int> parse_int_list(const std::string& s) {
  std::vector<int> out;
  for (double v : parse_list(s)) out.push_back(static_cast<int>(v));
  return out;
}

std::string fnv1a_hex(const std::string& data) {
  std::uint64_t h = 1469598103934665603ULL;
  for (unsigned char c : data) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  char buf[24];
  std::snprintf(buf, sizeof(buf), "%016llx",
                static_cast<unsigned long long>(h));
  return buf;
}

struct RunContext {
  fs::path out_dir;
  json config;  // effective flat key/value configuration
  std::chrono::steady_clock::time_point t0 =
      std::chrono::steady_clock::now();

  std::string config_hash() const { return fnv1a_hex(config.dump()); }

  void write_manifest() const {
    json m = {{"config_hash", config_hash()},
              {"version", kVersion},
              {"eigen", std::to_string(EIGEN_WORLD_VERSION) + "." +
                            std::to_string(EIGEN_MAJOR_VERSION) + "." +
                            std::to_string(EIGEN_MINOR_VERSION)},
              {"wall_time_s",
               std::chrono::duration<double>(
                   std::chrono::steady_clock::now() - t0)
                   .count()}};
    std::ofstream os(out_dir / "manifest.json");
    os << m.dump(2) << '\n';
  }

  void write_json(const std::string& name, const json& j) const {
    std::ofstream os(out_dir / name);
    os << j.dump(2) << '\n';
  }

  std::ofstream open_csv(const std::string& name) const {
    return std::ofstream(out_dir / name);
  }
};

// Applies config-file values to options the command line left untouched.
void merge_config(CLI::App* cmd, const std::string& config_path) {
  if (config_path.empty()) return;
  std::ifstream is(config_path);
  if (!is) throw ConfigError("cannot open config file: " + config_path);
  json j = json::parse(is);
  for (auto& [key, value] : j.items()) {
    CLI::Option* opt = cmd->get_option_no_throw("--" + key);
    if (!opt || opt->count() > 0) continue;
    std::string sval =
        value.is_string() ? value.get<std::string>() : value.dump();
    opt->add_result(sval);
    opt->run_callback();
  }
}

DomainPtr parse_domain_2d(const std::string& spec, double h) {
  if (spec.rfind("rect:", 0) == 0) {
    const std::string body = spec.substr(5);
    const auto x = body.find('x');
    if (x == std::string::npos)
      throw ParameterError("domain spec: expected rect:AxT");
    const double alpha = parse_number(body.substr(0, x));
    const double T = parse_number(body.substr(x + 1));
    return make_rectangle(alpha, T, h);
  }
  throw ParameterError("unknown domain spec: " + spec +
                       " (expected rect:AxT or interval:W)");
}

// ----------------------------------------------------------------------
// eig
int run_eig(const std::string& domain_spec, const std::string& h_str,
            double p, double tol, double tol_el, RunContext& ctx) {
  const double h = parse_number(h_str);
  EnergyConfig cfg;
  cfg.p = p;
  SolveOptions opts;
  opts.tol = tol;
  opts.tol_el = tol_el;

  json report;
  if (domain_spec.rfind("interval:", 0) == 0) {
    const double w = parse_number(domain_spec.substr(9));
    auto dom = make_interval(w, h);
    EigenResult1D r = first_eigen(dom, cfg, opts);
    fs::create_directories(ctx.out_dir);
    save_grid_function(r.u, (ctx.out_dir / "u.grid").string());
    report = {{"lambda", r.lambda},
              {"iters", r.iters},
              {"energy_gap", r.energy_gap},
              {"el_residual", r.el_residual}};
  } else {
    auto dom = parse_domain_2d(domain_spec, h);
    EigenResult r = first_eigen(dom, cfg, opts);
    fs::create_directories(ctx.out_dir);
    save_grid_function(r.u, (ctx.out_dir / "u.grid").string());
    report = {{"lambda", r.lambda},
              {"iters", r.iters},
              {"energy_gap", r.energy_gap},
              {"el_residual", r.el_residual}};
    if (r.reg) {
      report["regularization"] = {
          {"eps", r.reg->eps},
          {"lambda_eps", r.reg->lambda_eps},
          {"lambda_eps_half", r.reg->lambda_eps_half},
          {"lambda_extrapolated", r.reg->lambda_extrapolated},
          {"multiplier_gap", r.reg->multiplier_gap}};
    }
  }
  report["config_hash"] = ctx.config_hash();
  ctx.write_json("report.json", report);
  ctx.write_manifest();
  return 0;
}

// ----------------------------------------------------------------------
// persson
int run_persson(double alpha, double p, const std::string& h_str,
                const std::string& radii_str, double box_scale,
                const std::string& n_list_str, int moments_k, int jobs,
                RunContext& ctx) {
  const double h = parse_number(h_str);
  const std::vector<double> radii = parse_list(radii_str);
  if (radii.empty()) throw ParameterError("persson: empty radii list");
  const double scale_ref =
      std::max({alpha, radii.back(), 1.0});
  const double box_half = box_scale * scale_ref;

  EnergyConfig cfg;
  cfg.p = p;
  if (p < 2.0) cfg.eps_reg = h;
  SolveOptions opts;

  ExteriorFamily fam = strip_exterior_family(alpha, h, box_half);
  PerssonSweep sweep = persson_sweep(fam, radii, cfg, opts, jobs, box_half);

  fs::create_directories(ctx.out_dir);
  {
    auto os = ctx.open_csv("sweep.csv");
    os << "R,lambda_raw,lambda_monotone\n";
    for (std::size_t k = 0; k < sweep.radii.size(); ++k)
      os << format_double(sweep.radii[k]) << ','
         << format_double(sweep.lambdas_raw[k]) << ','
         << format_double(sweep.lambdas[k]) << '\n';
  }

  json report = {{"e_p_estimate", std::isfinite(sweep.e_p_estimate)
                                      ? json(sweep.e_p_estimate)
                                      : json("inf")},
                 {"box_half_length", box_half},
                 {"config_hash", ctx.config_hash()}};

  if (!n_list_str.empty()) {
    PsOptions popts;
    popts.n_list = parse_int_list(n_list_str);
    popts.moments_k = moments_k;
    popts.e_p_estimate = sweep.e_p_estimate;
    popts.box_half_min = box_half;
    popts.jobs = jobs;
    TruncatedFamily tfam = strip_truncated_family(alpha, h);
    std::vector<PSRecord> records = build_ps_sequence(tfam, popts, cfg);

    {
      auto os = ctx.open_csv("ps.csv");
      os << "n,R_n,eps_n,lambda_n,dual_residual,probe_energy,"
            "probe_confinement_term,lambda_exterior,ball_mass_1\n";
      for (const auto& r : records)
        os << r.n << ',' << format_double(r.R_n) << ','
           << format_double(r.eps_n) << ',' << format_double(r.lambda_n)
           << ',' << format_double(r.dual_residual) << ','
           << format_double(r.probe_energy) << ','
           << format_double(r.probe_confinement_term) << ','
           << format_double(r.lambda_exterior) << ','
           << format_double(r.local_mass.empty() ? 0.0 : r.local_mass[0])
           << '\n';
    }
    {
      auto os = ctx.open_csv("moments.csv");
      os << "n,k,I,J\n";
      for (const auto& r : records)
        for (std::size_t k = 0; k < r.moments_I.size(); ++k)
          os << r.n << ',' << (k + 1) << ','
             << format_double(r.moments_I[k]) << ','
             << format_double(r.moments_J[k]) << '\n';
    }
    fs::create_directories(ctx.out_dir / "members");
    for (const auto& r : records) {
      char name[64];
      std::snprintf(name, sizeof(name), "members/ps_member_%03d.grid", r.n);
      save_grid_function(r.u, (ctx.out_dir / name).string());
    }
    MomentReport mrep = moment_report(records);
    json jm;
    for (int k = 0; k < mrep.K; ++k) {
      jm.push_back({{"k", k + 1},
                    {"slope_I", mrep.slope_I[k]},
                    {"slope_J", mrep.slope_J[k]},
                    {"tail_decreasing_I", mrep.tail_decreasing_I[k]},
                    {"tail_decreasing_J", mrep.tail_decreasing_J[k]}});
    }
    report["moments"] = jm;
    if (records.size() >= 3) {
      ClassifyOptions copts;
      copts.p = p;
      PSClassification cls = classify_ps(records, copts);
      const char* verdict = cls.verdict == PsVerdict::singular ? "singular"
                            : cls.verdict == PsVerdict::regular
                                ? "regular"
                                : "undetermined";
      report["classification"] = {{"verdict", verdict},
                                  {"d_metric_trace", cls.d_metric_trace}};
    }
  }
  ctx.write_json("report.json", report);
  ctx.write_manifest();
  return 0;
}

// ----------------------------------------------------------------------
// strip
int run_strip(double alpha, double p, double lambda_target,
              const std::string& h_str, int n_max, double find_tol,
              const std::string& t_list_str, int jobs, RunContext& ctx) {
  const double h = parse_number(h_str);
  std::vector<double> T_list;
  if (!t_list_str.empty()) {
    T_list = parse_list(t_list_str);
  } else {
    T_list = {0.5 * alpha, alpha, 1.5 * alpha, 2.0 * alpha, 4.0 * alpha,
              8.0 * alpha};
  }

  StripConfig sc;
  sc.alpha = alpha;
  sc.p = p;
  sc.lambda_target = lambda_target;
  sc.h = h;
  sc.n_max = n_max;
  sc.find_tol = find_tol;

  EnergyConfig cfg;
  cfg.p = p;
  if (p < 2.0) cfg.eps_reg = h;

  const auto curve = lambda_curve(alpha, p, T_list, h, SolveOptions{}, jobs);
  ReflectedSequence seq = build_reflected(sc);
  ResidualDecay decay = residual_decay(seq, cfg);

  fs::create_directories(ctx.out_dir);
  {
    auto os = ctx.open_csv("curve.csv");
    os << "T,lambda\n";
    for (const auto& [T, lam] : curve)
      os << format_double(T) << ',' << format_double(lam) << '\n';
  }
  {
    auto os = ctx.open_csv("residuals.csv");
    os << "n,two_n_plus_one,residual,bound,bound_ok,boundary_defect\n";
    for (std::size_t k = 0; k < decay.residuals.size(); ++k)
      os << decay.n_values[k] << ','
         << format_double(decay.two_n_plus_one[k]) << ','
         << format_double(decay.residuals[k]) << ','
         << format_double(decay.bounds[k]) << ','
         << (decay.bound_ok[k] ? 1 : 0) << ','
         << format_double(seq.boundary_defect[k]) << '\n';
  }
  {
    auto os = ctx.open_csv("pohozaev.csv");
    os << "n,defect,residual\n";
    for (std::size_t k = 0; k < seq.members.size(); ++k)
      os << seq.members[k].first << ','
         << format_double(
                pohozaev_defect(seq.members[k].second, seq.lambda, cfg))
         << ',' << format_double(decay.residuals[k]) << '\n';
  }
  fs::create_directories(ctx.out_dir / "members");
  for (const auto& [n, u] : seq.members) {
    char name[64];
    std::snprintf(name, sizeof(name), "members/member_%03d.grid", n);
    save_grid_function(u, (ctx.out_dir / name).string());
  }

  json report = {{"T", seq.T},
                 {"lambda", seq.lambda},
                 {"pi_p", pi_p(p, h)},
                 {"slope", decay.slope},
                 {"grad_psi_sup", decay.grad_psi_sup},
                 {"bound_ok", decay.bound_ok},
                 {"boundary_defect", seq.boundary_defect},
                 {"config_hash", ctx.config_hash()}};
  ctx.write_json("report.json", report);
  ctx.write_manifest();
  return 0;
}

// ----------------------------------------------------------------------
// weyl
int run_weyl(const std::string& input_dir, double lambda, RunContext& ctx) {
  EnergyConfig cfg;  // p = 2
  std::vector<fs::path> files;
  for (const auto& e : fs::directory_iterator(input_dir))
    if (e.path().extension() == ".grid") files.push_back(e.path());
  std::sort(files.begin(), files.end());
  if (files.empty())
    throw ParameterError("weyl: no .grid members in " + input_dir);

  json members = json::array();
  std::vector<double> strongs, xs;
  for (const auto& f : files) {
    GridFunction u = load_grid_function(f.string());
    WeylCorrection w = weyl_correct(u, lambda, cfg);
    members.push_back({{"file", f.filename().string()},
                       {"dual_norm_h", w.dual_norm_h},
                       {"strong_residual", w.strong_residual},
                       {"strong_residual_assembled",
                        w.strong_residual_assembled}});
    strongs.push_back(w.strong_residual);
    xs.push_back(static_cast<double>(strongs.size()));
  }
  fs::create_directories(ctx.out_dir);
  json report = {{"lambda", lambda},
                 {"members", members},
                 {"config_hash", ctx.config_hash()}};
  ctx.write_json("weyl.json", report);
  ctx.write_manifest();
  return 0;
}

} // namespace

int run(int argc, const char* const* argv) {
  CLI::App app{std::string(kVersion) +
               " - Dirichlet p-Laplacian spectral toolkit"};
  app.require_subcommand(1);
  app.set_help_flag("--help", "print help");  // frees -h for the spacing flag

  std::string config_path, out_dir = "pspect-out";
  int jobs = default_jobs();
  app.add_option("--config", config_path, "flat key/value JSON config file");
  app.add_option("--out", out_dir, "output directory");
  app.add_option("--jobs", jobs, "parallel workers over sweep items");

  // eig
  auto* eig = app.add_subcommand("eig", "first Dirichlet eigenvalue");
  eig->set_help_flag("--help", "print help");
  std::string eig_domain = "rect:0.5x0.5", eig_h = "1/64";
  double eig_p = 2.0, eig_tol = 1e-8, eig_tol_el = 1e-6;
  eig->add_option("--domain", eig_domain, "rect:AxT or interval:W");
  eig->add_option("--p", eig_p, "exponent p > 1");
  eig->add_option("--h", eig_h, "grid spacing (fraction allowed)");
  eig->add_option("--tol", eig_tol, "Rayleigh stagnation tolerance");
  eig->add_option("--tol-el", eig_tol_el, "EL dual-residual tolerance");

  // persson
  auto* per = app.add_subcommand("persson",
                                 "exterior sweep and PS-sequence factory");
  per->set_help_flag("--help", "print help");
  double per_alpha = 0.5, per_p = 2.0, per_box = 4.0;
  std::string per_h = "1/32", per_radii = "0,1,2,4", per_nlist;
  int per_k = 3;
  per->add_option("--alpha", per_alpha, "strip half-width");
  per->add_option("--p", per_p, "exponent");
  per->add_option("--h", per_h, "grid spacing");
  per->add_option("--radii", per_radii, "sweep radii, comma separated");
  per->add_option("--box", per_box,
                  "truncation box scale (times the largest length scale)");
  per->add_option("--n-list", per_nlist, "PS factory indices, e.g. 1,2,3,4");
  per->add_option("--moments-k", per_k, "highest potential moment");

  // strip
  auto* str = app.add_subcommand("strip", "strip case study");
  str->set_help_flag("--help", "print help");
  double str_alpha = 0.5, str_p = 2.0, str_lambda = 0.0, str_find_tol = 0.01;
  std::string str_h = "1/64", str_tlist;
  int str_nmax = 6;
  str->add_option("--alpha", str_alpha, "strip half-width");
  str->add_option("--p", str_p, "exponent");
  str->add_option("--lambda", str_lambda, "target level above the threshold")
      ->required();
  str->add_option("--n-max", str_nmax, "largest reflection count");
  str->add_option("--h", str_h, "grid spacing");
  str->add_option("--find-tol", str_find_tol, "relative tolerance of find_T");
  str->add_option("--T-list", str_tlist, "rectangle heights for the curve");

  // weyl
  auto* wey = app.add_subcommand("weyl", "p=2 correction of a sequence");
  wey->set_help_flag("--help", "print help");
  std::string wey_input;
  double wey_lambda = 0.0;
  wey->add_option("--input", wey_input, "directory of .grid members")
      ->required();
  wey->add_option("--lambda", wey_lambda, "level")->required();

  // check
  auto* chk =
      app.add_subcommand("check", "run the invariant suite on tiny grids");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 64;
  }

  try {
    CLI::App* active = app.get_subcommands().front();
    merge_config(active, config_path);

    RunContext ctx;
    ctx.out_dir = out_dir;

    if (active == chk) {
      return run_self_checks(std::cout) ? 0 : 1;
    }

    json cfg = {{"subcommand", active->get_name()}, {"jobs", jobs}};
    if (active == eig) {
      cfg.update({{"domain", eig_domain},
                  {"p", eig_p},
                  {"h", eig_h},
                  {"tol", eig_tol},
                  {"tol_el", eig_tol_el}});
      ctx.config = cfg;
      return run_eig(eig_domain, eig_h, eig_p, eig_tol, eig_tol_el, ctx);
    }
    if (active == per) {
      cfg.update({{"alpha", per_alpha},
                  {"p", per_p},
                  {"h", per_h},
                  {"radii", per_radii},
                  {"box", per_box},
                  {"n_list", per_nlist},
                  {"moments_k", per_k}});
      ctx.config = cfg;
      return run_persson(per_alpha, per_p, per_h, per_radii, per_box,
                         per_nlist, per_k, jobs, ctx);
    }
    if (active == str) {
      cfg.update({{"alpha", str_alpha},
                  {"p", str_p},
                  {"lambda", str_lambda},
                  {"h", str_h},
                  {"n_max", str_nmax},
                  {"find_tol", str_find_tol},
                  {"T_list", str_tlist}});
      ctx.config = cfg;
      return run_strip(str_alpha, str_p, str_lambda, str_h, str_nmax,
                       str_find_tol, str_tlist, jobs, ctx);
    }
    if (active == wey) {
      cfg.update({{"input", wey_input}, {"lambda", wey_lambda}});
      ctx.config = cfg;
      return run_weyl(wey_input, wey_lambda, ctx);
    }
    return 64;
  } catch (const SolverError& e) {
    std::cerr << "solver failure: " << e.what() << '\n';
    return 2;
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
}

} // namespace pspect::cli
