// Command-line front end: geometry exports, r_p estimation, extensions,
// KS energies, exponent scans, verifiers and heat-semigroup seminorms.
//
// Exit codes: 0 pass, 1 a verifier failed, 2 resource or validation error,
// 64 usage error.

#include <CLI11.hpp>

#include <Eigen/Core>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <nlohmann/json.hpp>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "ksfrac/analysis.hpp"
#include "ksfrac/energy.hpp"
#include "ksfrac/error.hpp"
#include "ksfrac/functions.hpp"
#include "ksfrac/geometry.hpp"
#include "ksfrac/harmonic.hpp"
#include "ksfrac/heat.hpp"
#include "ksfrac/io.hpp"

using namespace ksfrac;
using nlohmann::json;
namespace fs = std::filesystem;

namespace {

enum Exit { kPass = 0, kFail = 1, kInvalid = 2, kUsage = 64 };

struct RunConfig {
  std::string command;
  std::string family = "gasket";
  int level = -1;  // -1: per-command default
  std::string p = "2";
  std::string alpha = "auto";
  std::string r_grid = "default";
  std::string metric = "euclidean";
  std::string corpus = "default";
  std::uint64_t seed = 1;
  int depth = 8;
  std::string which;
  std::string out = "ksfrac_out";
  int threads = 1;
  std::string format = "both";

  // Everything that determines the results; the output directory does not.
  json to_json() const {
    return {{"command", command}, {"family", family}, {"level", level},   {"p", p},
            {"alpha", alpha},     {"r_grid", r_grid}, {"metric", metric}, {"corpus", corpus},
            {"seed", seed},       {"depth", depth},   {"which", which},   {"threads", threads},
            {"format", format}};
  }
};

// Reported for validation failures that are not library errors.
struct Invalid : std::runtime_error {
  using std::runtime_error::runtime_error;
};

std::vector<double> parse_list(const std::string& text, const char* what) {
  std::vector<double> out;
  std::stringstream in(text);
  std::string item;
  while (std::getline(in, item, ',')) {
    try {
      std::size_t used = 0;
      out.push_back(std::stod(item, &used));
      if (used != item.size()) throw std::invalid_argument(item);
    } catch (const std::exception&) {
      throw Invalid(std::string("cannot parse ") + what + " entry '" + item + "'");
    }
  }
  if (out.empty()) throw Invalid(std::string("empty ") + what);
  return out;
}

std::uint64_t fnv1a(const std::string& s) {
  std::uint64_t h = 1469598103934665603ull;
  for (unsigned char c : s) {
    h ^= c;
    h *= 1099511628211ull;
  }
  return h;
}

std::string hex(std::uint64_t v) {
  std::ostringstream out;
  out << std::hex;
  out.width(16);
  out.fill('0');
  out << v;
  return out.str();
}

class Run {
 public:
  explicit Run(RunConfig cfg) : cfg_(std::move(cfg)) {}

  int execute();

 private:
  const IfsSpec& spec() const { return *spec_; }
  double p() const { return ps_.front(); }
  double alpha_for(double p) const {
    return cfg_.alpha == "auto" ? alpha_formula(spec(), p) : alpha_value_;
  }
  std::vector<FunctionSpec> members(double p) const;
  std::vector<int> level_pair() const;
  AnalysisOptions options() const { return {metric_, cfg_.threads, cfg_.seed}; }

  void validate();
  void prepare_output();
  bool want_csv() const { return cfg_.format != "json"; }
  bool want_json() const { return cfg_.format != "csv"; }
  void write(const std::string& name, const std::string& text) const {
    write_text((fs::path(cfg_.out) / name).string(), text);
  }
  void write_json(const std::string& name, const json& j) const {
    if (want_json()) write(name, round9(j).dump(2) + "\n");
  }
  void log_verdict(const Verdict& v, double seconds) const;
  void write_manifest() const;

  int geometry();
  int estimate_rp_cmd();
  int extend();
  int energy();
  int scan();
  int verify();
  int heat();

  int finish(const Verdict& v, double seconds) const {
    log_verdict(v, seconds);
    write_json("verdict.json", v);
    std::cout << (v.pass ? "PASS " : "FAIL ") << v.name << " measured "
              << format9(v.measured_constant) << "\n";
    return v.pass ? kPass : kFail;
  }

  RunConfig cfg_;
  const IfsSpec* spec_ = nullptr;
  std::vector<double> ps_;
  double alpha_value_ = 0.0;
  Metric metric_ = Metric::Euclidean;
};

void Run::validate() {
  try {
    spec_ = &IfsSpec::of(parse_family(cfg_.family));
    metric_ = parse_metric(cfg_.metric);
  } catch (const Error& e) {
    throw Invalid(e.what());
  }
  ps_ = parse_list(cfg_.p, "--p");
  for (double p : ps_) {
    if (!(p >= 1.0)) throw Invalid("--p values must be >= 1");
  }
  if (cfg_.alpha != "auto") {
    alpha_value_ = parse_list(cfg_.alpha, "--alpha").front();
    if (!(alpha_value_ >= 0.0)) throw Invalid("--alpha must be >= 0 or 'auto'");
  }
  if (cfg_.level < -1) throw Invalid("--level must be >= 0");
  const bool graph_only =
      cfg_.command == "extend" || cfg_.command == "heat" || cfg_.command == "geometry";
  const int cap = graph_only ? spec().max_graph_level : spec().max_measure_level;
  if (cfg_.level > cap) {
    std::ostringstream msg;
    msg << "--level " << cfg_.level << " exceeds the supported maximum " << cap << " for "
        << cfg_.family << " (" << std::pow(spec().branch_count, cfg_.level)
        << " cells requested)";
    throw ResourceError(msg.str(), std::pow(spec().branch_count, cfg_.level));
  }
  if (cfg_.depth < 1) throw Invalid("--depth must be >= 1");
  if (cfg_.threads < 1) throw Invalid("--threads must be >= 1");
  if (cfg_.r_grid != "default" && cfg_.r_grid != "scan") parse_list(cfg_.r_grid, "--r-grid");
  if (cfg_.corpus != "default") parse_list(cfg_.corpus, "--corpus");
  if (cfg_.command == "estimate-rp" && spec().family != Family::Gasket) {
    throw Invalid("estimate-rp is defined on the gasket");
  }
  const bool harmonic = cfg_.command == "estimate-rp" ||
                        (cfg_.command == "extend" && spec().family == Family::Gasket);
  if (harmonic && p() <= 1.0) {
    throw Unsupported("p = 1 on the gasket: minimizers of the 1-energy are not unique");
  }
}

std::vector<FunctionSpec> Run::members(double p) const {
  const auto all = corpus(spec(), p);
  if (cfg_.corpus == "default") return all;
  std::vector<FunctionSpec> out;
  for (double idx : parse_list(cfg_.corpus, "--corpus")) {
    const auto i = static_cast<long>(idx);
    if (i < 0 || i >= static_cast<long>(all.size()) || i != idx) {
      throw Invalid("--corpus index out of range: " + format9(idx));
    }
    out.push_back(all[i]);
  }
  return out;
}

// Two consecutive levels ending at --level, or the family defaults.
std::vector<int> Run::level_pair() const {
  const int top = cfg_.level >= 0 ? cfg_.level : (spec().family == Family::Vicsek ? 5 : 7);
  if (top < 1) throw Invalid("--level must be >= 1 for two-level verifiers");
  return {top - 1, top};
}

void Run::prepare_output() {
  std::error_code ec;
  fs::create_directories(cfg_.out, ec);
  if (ec) throw Error("cannot create output directory " + cfg_.out + ": " + ec.message());
}

void Run::log_verdict(const Verdict& v, double seconds) const {
  json j = v;
  j["wall_time_s"] = seconds;
  j["config_hash"] = hex(fnv1a(cfg_.to_json().dump()));
  std::ofstream log(fs::path(cfg_.out) / "runlog.jsonl", std::ios::app);
  log << round9(j).dump() << "\n";
}

void Run::write_manifest() const {
  const json config = cfg_.to_json();
  std::ostringstream eigen;
  eigen << EIGEN_WORLD_VERSION << '.' << EIGEN_MAJOR_VERSION << '.' << EIGEN_MINOR_VERSION;
  std::ostringstream nl;
  nl << NLOHMANN_JSON_VERSION_MAJOR << '.' << NLOHMANN_JSON_VERSION_MINOR << '.'
     << NLOHMANN_JSON_VERSION_PATCH;
  const json manifest = {{"config", config},
                         {"config_hash", hex(fnv1a(config.dump()))},
                         {"seed", cfg_.seed},
                         {"versions",
                          {{"ksfrac", KSFRAC_VERSION},
                           {"eigen", eigen.str()},
                           {"nlohmann_json", nl.str()},
                           {"cli11", CLI11_VERSION},
                           {"compiler", __VERSION__}}}};
  write("manifest.json", manifest.dump(2) + "\n");
}

int Run::execute() {
  validate();
  prepare_output();
  write_manifest();
  if (cfg_.command == "geometry") return geometry();
  if (cfg_.command == "estimate-rp") return estimate_rp_cmd();
  if (cfg_.command == "extend") return extend();
  if (cfg_.command == "energy") return energy();
  if (cfg_.command == "scan") return scan();
  if (cfg_.command == "verify") return verify();
  return heat();
}

int Run::geometry() {
  const int level = cfg_.level >= 0 ? cfg_.level : 2;
  const LevelGraph g = build_level_graph(spec(), level);
  write_json("graph.json", graph_to_json(g));
  if (want_csv()) {
    write("vertices.csv", vertices_csv(g));
    write("edges.csv", edges_csv(g));
    write("atoms.csv", atoms_csv(build_measure(spec(), level)));
  }
  std::cout << cfg_.family << " level " << level << ": vertices " << g.vertex_count()
            << ", edges " << g.edge_count() << ", cells " << g.cell_count() << "\n";
  return kPass;
}

int Run::estimate_rp_cmd() {
  const RpEstimate e = estimate_rp(p(), cfg_.depth);
  json j = e;
  j["lower_bound"] = rp_lower_bound(p());
  j["upper_bound"] = rp_upper_bound(p());
  write_json("rp.json", j);
  if (want_csv()) {
    std::ostringstream csv;
    csv << "level,energy,ratio\n";
    for (std::size_t k = 0; k < e.energies.size(); ++k) {
      csv << k << ',' << format9(e.energies[k]) << ','
          << (k == 0 ? std::string() : format9(e.ratios[k - 1])) << '\n';
    }
    write("rp.csv", csv.str());
  }
  std::cout << "p " << format9(p()) << " r_hat " << format9(e.r_hat) << "\nstability "
            << format9(e.stability) << " bracket [" << format9(rp_lower_bound(p())) << ", "
            << format9(rp_upper_bound(p())) << ")\n";
  return kPass;
}

// The family's finite-energy corpus member on V_level, extended --depth
// levels further.
int Run::extend() {
  const int from = cfg_.level >= 0 ? cfg_.level : 0;
  const int to = from + cfg_.depth;
  if (to > spec().max_graph_level) {
    throw ResourceError("extend: target level " + std::to_string(to) + " exceeds the maximum",
                        std::pow(spec().branch_count, to));
  }
  const auto all = members(p());
  const FunctionSpec member = cfg_.corpus == "default" ? corpus(spec(), p())[4] : all.front();
  const LevelGraph base = build_level_graph(spec(), from);
  const VertexFunction f = evaluate(member, base);
  const std::optional<double> rp =
      spec().family == Family::Gasket && p() > 1.0 ? std::optional(estimate_rp(p(), 8).r_hat)
                                                   : std::nullopt;
  json energies = json::array();
  VertexFunction ext = f;
  for (int m = from; m <= to; ++m) {
    ext = spec().family == Family::Vicsek ? extend_vicsek(f, m) : extend_gasket(f, m, p());
    energies.push_back({{"level", m},
                        {"energy", discrete_energy(ext, build_level_graph(spec(), m), p(), rp)}});
  }
  const LevelGraph top = build_level_graph(spec(), to);
  write_json("extension.json", {{"member", label(member)}, {"p", p()}, {"energies", energies}});
  if (want_csv()) {
    std::ostringstream csv;
    csv << "id,x,y,value\n";
    for (std::size_t v = 0; v < top.vertex_count(); ++v) {
      csv << v << ',' << format9(top.points()[v].x) << ',' << format9(top.points()[v].y) << ','
          << format9(ext.values[v]) << '\n';
    }
    write("extension.csv", csv.str());
  }
  std::cout << label(member) << " extended to level " << to << ", energy "
            << format9(energies.back()["energy"].get<double>()) << "\n";
  return kPass;
}

int Run::energy() {
  const int level = cfg_.level >= 0 ? cfg_.level : (spec().family == Family::Vicsek ? 4 : 6);
  const DiscreteMeasure mu = build_measure(spec(), level);
  const auto oracle = make_oracle(mu, metric_);
  EnergyParams params;
  params.p = p();
  params.alpha = alpha_for(p());
  params.metric = metric_;
  if (cfg_.r_grid == "default") {
    params.radii = default_radii(spec(), level);
  } else if (cfg_.r_grid == "scan") {
    params.radii = scan_radii(spec(), level, 2);
  } else {
    params.radii = parse_list(cfg_.r_grid, "--r-grid");
  }
  json reports = json::array();
  int index = 0;
  for (const auto& member : members(p())) {
    const EnergyReport rep = energy_report(evaluate(member, mu), mu, *oracle, params, cfg_.threads);
    json j = rep;
    j["member"] = label(member);
    reports.push_back(j);
    if (want_csv()) write("energy_" + std::to_string(index) + ".csv", rep.to_csv());
    std::cout << label(member) << ": sup " << format9(rep.sup) << ", liminf "
              << format9(rep.liminf_proxy) << "\n";
    ++index;
  }
  write_json("energy.json", {{"family", cfg_.family},
                             {"level", level},
                             {"p", params.p},
                             {"alpha", params.alpha},
                             {"metric", cfg_.metric},
                             {"reports", reports}});
  return kPass;
}

int Run::scan() {
  const int level = cfg_.level >= 0 ? cfg_.level : (spec().family == Family::Vicsek ? 5 : 7);
  std::vector<ExponentScan> scans;
  bool ok = true;
  std::ostringstream csv;
  csv << "p,member,alpha_hat,raw_alpha_hat,r_squared,counted\n";
  for (double p : ps_) {
    const auto t0 = std::chrono::steady_clock::now();
    ExponentScan s = scan_alpha(spec(), p, members(p), level, options());
    const double secs =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    ok = ok && s.all_fits_ok;
    Verdict v{"scan", {{"family", cfg_.family}, {"p", p}, {"level", level}},
              s.alpha_hat, {level}, s.all_fits_ok, {{"alpha_formula", s.alpha_formula},
                                                    {"envelope_member", s.envelope_member}}};
    log_verdict(v, secs);
    for (const auto& m : s.members) {
      csv << format9(p) << ',' << m.label << ',' << format9(m.alpha_hat) << ','
          << format9(m.raw_alpha_hat) << ',' << format9(m.r_squared) << ',' << m.counted << '\n';
    }
    std::cout << "p " << format9(p) << " alpha_hat " << format9(s.alpha_hat) << " ("
              << s.envelope_member << "), formula " << format9(s.alpha_formula) << "\n";
    scans.push_back(std::move(s));
  }
  json j = json::array();
  for (const auto& s : scans) j.push_back(s);
  write_json("scan.json", j);
  if (want_csv()) write("scan.csv", csv.str());
  if (!ok) std::cout << "some member fits stayed below R^2 = 0.95\n";
  return ok ? kPass : kFail;
}

int Run::verify() {
  const auto t0 = std::chrono::steady_clock::now();
  auto elapsed = [&] {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  };
  const double p = this->p();
  const double alpha = alpha_for(p);
  const json params = {{"family", cfg_.family}, {"p", p}, {"alpha", alpha}};
  const auto corpus_p = members(p);
  Verdict v;
  v.name = cfg_.which;
  v.params = params;
  if (cfg_.which == "P") {
    v.levels = level_pair();
    const PWitness w = witness_P(spec(), p, alpha, corpus_p, v.levels, options());
    v.measured_constant = w.levels.back().max_ratio;
    v.pass = w.stable && w.diverges;
    v.details = w;
  } else if (cfg_.which == "morrey") {
    v.levels = level_pair();
    v.pass = true;
    json results = json::array();
    for (const auto& member : corpus_p) {
      if (std::holds_alternative<fn::Constant>(member)) continue;
      const MorreyResult m = morrey_check(spec(), member, p, alpha, v.levels, options());
      v.pass = v.pass && m.pass;
      v.measured_constant = std::max(v.measured_constant, m.quotients.back().quotient);
      json q = json::array();
      for (const auto& mq : m.quotients) {
        q.push_back({{"holder", mq.holder}, {"sup_energy", mq.sup_energy}, {"quotient", mq.quotient}});
      }
      results.push_back({{"member", m.label},
                         {"lambda", m.lambda},
                         {"quotients", q},
                         {"stability", m.stability},
                         {"pass", m.pass}});
    }
    v.details = results;
  } else if (cfg_.which == "nash" || cfg_.which == "gns") {
    v.levels = level_pair();
    const double Q = spec().hausdorff_dim;
    const GnsExponents e = cfg_.which == "nash" ? nash_exponents(Q, p, alpha)
                                                : gns_exponents(Q, p, alpha, 4.0, 1.0);
    const GnsResult g = gns_check(spec(), corpus_p, e, v.levels, options());
    v.measured_constant = g.levels.back().constant;
    v.pass = g.pass;
    v.details = g;
    std::cout << "theta " << format9(e.theta) << " (r " << format9(e.r) << ", s "
              << format9(e.s) << ", q " << format9(e.q) << ")\n";
  } else if (cfg_.which == "quasi") {
    v.levels = level_pair();
    const QuasiResult q = quasi_seminorm_checks(spec(), corpus_p, p, alpha, v.levels, options());
    v.measured_constant = q.levels.back().triangle_constant;
    v.pass = q.pass;
    v.details = q;
  } else if (cfg_.which == "monotone") {
    const int level = level_pair().back();
    v.levels = {level};
    const std::vector<double> grid =
        ps_.size() > 1 ? ps_ : std::vector<double>{1.0, 1.5, 2.0, 3.0, 4.0};
    std::vector<ExponentScan> scans;
    for (double q : grid) scans.push_back(scan_alpha(spec(), q, members(q), level, options()));
    const MonotonicityResult m = exponent_monotonicity(scans, spec().hausdorff_dim);
    v.params["p"] = grid;
    v.measured_constant = m.alpha_hat.front();
    v.pass = m.pass;
    v.details = m;
  } else if (cfg_.which == "heat-besov") {
    const int level = cfg_.level >= 0 ? cfg_.level : (spec().family == Family::Vicsek ? 4 : 6);
    v.levels = {level};
    const double beta = alpha / spec().walk_dim;
    v.params["beta"] = beta;
    const BandResult b = heat_besov_band(spec(), corpus_p, p, alpha, beta, level, options());
    v.measured_constant = b.width;
    v.pass = b.pass;
    v.details = b;
  } else {  // walkdim
    const int level = cfg_.level >= 0 ? cfg_.level : (spec().family == Family::Vicsek ? 4 : 6);
    v.levels = {level};
    const WalkKernel walk(build_level_graph(spec(), level));
    int x = 0;
    for (std::size_t u = 0; u < walk.size(); ++u) {
      if (walk.graph().degree(static_cast<int>(u)) == 4) {
        x = static_cast<int>(u);
        break;
      }
    }
    const int first = spec().family == Family::Vicsek ? 16 : 8;
    const int last = spec().family == Family::Vicsek ? 4096 : 2048;
    const auto steps = geometric_steps(first, last, std::sqrt(2.0));
    const WalkDimensionFit fit = estimate_walk_dimension(walk, x, steps);
    const double target = spec().hausdorff_dim / spec().walk_dim;
    v.measured_constant = -fit.slope;
    v.pass = std::abs(-fit.slope - target) <= 0.1;
    v.details = {{"vertex", x},
                 {"steps", fit.steps},
                 {"return_probability", fit.return_probability},
                 {"slope", fit.slope},
                 {"walk_dim", fit.walk_dim},
                 {"target_ratio", target},
                 {"r_squared", fit.r_squared}};
  }
  return finish(v, elapsed());
}

int Run::heat() {
  const int level = cfg_.level >= 0 ? cfg_.level : (spec().family == Family::Vicsek ? 4 : 6);
  const LevelGraph g = build_level_graph(spec(), level);
  const WalkKernel walk(g);
  const auto times = dyadic_times(walk);
  const double beta = alpha_for(p()) / spec().walk_dim;
  json reports = json::array();
  int index = 0;
  for (const auto& member : members(p())) {
    const HeatBesovReport rep = heat_besov_seminorm(evaluate(member, g), walk, p(), beta, times);
    json j = rep;
    j["member"] = label(member);
    reports.push_back(j);
    if (want_csv()) write("heat_" + std::to_string(index) + ".csv", rep.to_csv());
    std::cout << label(member) << ": sup " << format9(rep.sup) << "\n";
    ++index;
  }
  write_json("heat.json", {{"family", cfg_.family},
                           {"level", level},
                           {"p", p()},
                           {"beta", beta},
                           {"reports", reports}});
  return kPass;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Korevaar-Schoen-Sobolev experiments on the Vicsek set and the Sierpinski gasket"};
  app.set_version_flag("--version", std::string(KSFRAC_VERSION));
  app.set_config("--config", "", "flat key=value file; command-line flags take precedence");
  app.require_subcommand(1);
  app.fallthrough();

  RunConfig cfg;
  app.add_option("--family", cfg.family, "vicsek or gasket")
      ->check(CLI::IsMember({"vicsek", "gasket"}));
  app.add_option("--level", cfg.level, "discretization level N");
  app.add_option("--p", cfg.p, "exponent, or a comma-separated grid for scan/monotone");
  app.add_option("--alpha", cfg.alpha, "smoothness exponent or 'auto' (closed form)");
  app.add_option("--r-grid", cfg.r_grid, "'default', 'scan' or comma-separated radii");
  app.add_option("--metric", cfg.metric, "euclidean or geodesic")
      ->check(CLI::IsMember({"euclidean", "geodesic"}));
  app.add_option("--corpus", cfg.corpus, "'default' or comma-separated corpus indices");
  app.add_option("--seed", cfg.seed, "random seed");
  app.add_option("--depth", cfg.depth, "levels for estimate-rp / extend");
  app.add_option("--out", cfg.out, "output directory");
  app.add_option("--threads", cfg.threads, "worker cap");
  app.add_option("--format", cfg.format, "csv, json or both")
      ->check(CLI::IsMember({"csv", "json", "both"}));

  const std::pair<const char*, const char*> commands[] = {
      {"geometry", "write the level graph and measure atoms"},
      {"estimate-rp", "estimate the gasket renormalization constant r_p"},
      {"extend", "extend a level-0 function and track its energies"},
      {"energy", "discrete energies and KS profiles of the corpus"},
      {"scan", "fit the critical exponent alpha_p over a p grid"},
      {"heat", "heat-Besov seminorm of the corpus"},
  };
  for (const auto& [name, what] : commands) app.add_subcommand(name, what)->fallthrough();
  auto* verify = app.add_subcommand("verify", "run one verifier")->fallthrough();
  app.add_option("--which", cfg.which, "verifier for the verify command")
      ->check(CLI::IsMember(
          {"P", "morrey", "nash", "gns", "quasi", "monotone", "heat-besov", "walkdim"}));

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kPass : kUsage;
  }
  cfg.command = app.get_subcommands().front()->get_name();
  if (app.got_subcommand(verify) && cfg.which.empty()) {
    std::cerr << "verify: --which is required\n";
    return kUsage;
  }

  try {
    return Run(cfg).execute();
  } catch (const Invalid& e) {
    std::cerr << "invalid configuration: " << e.what() << "\n";
  } catch (const ResourceError& e) {
    std::cerr << "resource error: " << e.what() << "\n";
  } catch (const Unsupported& e) {
    std::cerr << "unsupported parameter: " << e.what() << "\n";
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
  }
  return kInvalid;
}
