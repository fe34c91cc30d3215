// chain <command> --config <path> [--out <dir>]
#include <CLI11.hpp>
#include <json.hpp>

#include <atomic>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "chain/core_model.hpp"
#include "chain/kernels.hpp"
#include "chain/solver.hpp"
#include "chain/spectral.hpp"
#include "chain/verify.hpp"

#ifndef CHAIN_VERSION
#define CHAIN_VERSION "0.0.0"
#endif

using namespace chain;
namespace fs = std::filesystem;

namespace {

// Flattened "section.key" -> value. INI (key = value, [section]) or JSON.
class Config {
 public:
  static Config load(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw Error(ErrorKind::Config, "cannot open config file '" + path + "'");
    std::stringstream ss;
    ss << in.rdbuf();
    Config c;
    c.text_ = ss.str();
    const auto first = c.text_.find_first_not_of(" \t\r\n");
    if (first != std::string::npos && c.text_[first] == '{')
      c.parse_json();
    else
      c.parse_ini();
    return c;
  }

  bool has(const std::string& key) const { return values_.count(key) > 0; }

  std::string str(const std::string& key) const {
    auto it = values_.find(key);
    if (it == values_.end()) throw Error(ErrorKind::Config, "missing field '" + key + "'");
    return it->second;
  }
  std::string str(const std::string& key, const std::string& fallback) const {
    return has(key) ? str(key) : fallback;
  }

  double num(const std::string& key) const { return to_double(key, str(key)); }
  double num(const std::string& key, double fallback) const { return has(key) ? num(key) : fallback; }

  std::vector<double> list(const std::string& key) const {
    std::vector<double> out;
    std::string item;
    std::stringstream ss(str(key));
    while (std::getline(ss, item, ','))
      if (item.find_first_not_of(" \t") != std::string::npos) out.push_back(to_double(key, item));
    return out;
  }

  /// FNV-1a over the raw config text.
  std::string hash() const {
    std::uint64_t h = 1469598103934665603ull;
    for (unsigned char ch : text_) {
      h ^= ch;
      h *= 1099511628211ull;
    }
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
    return buf;
  }

 private:
  static double to_double(const std::string& key, const std::string& s) {
    try {
      std::size_t pos = 0;
      const double v = std::stod(s, &pos);
      if (s.find_first_not_of(" \t", pos) != std::string::npos) throw std::invalid_argument(s);
      return v;
    } catch (const std::exception&) {
      throw Error(ErrorKind::Config, "field '" + key + "' is not a number: '" + s + "'");
    }
  }

  static std::string trim(const std::string& s) {
    const auto a = s.find_first_not_of(" \t\r");
    if (a == std::string::npos) return "";
    const auto b = s.find_last_not_of(" \t\r");
    return s.substr(a, b - a + 1);
  }

  void parse_ini() {
    std::stringstream ss(text_);
    std::string line, section;
    int lineno = 0;
    while (std::getline(ss, line)) {
      ++lineno;
      const auto hash = line.find_first_of("#;");
      line = trim(hash == std::string::npos ? line : line.substr(0, hash));
      if (line.empty()) continue;
      if (line.front() == '[') {
        if (line.back() != ']') throw Error(ErrorKind::Config, "bad section header on line " + std::to_string(lineno));
        section = trim(line.substr(1, line.size() - 2));
        continue;
      }
      const auto eq = line.find('=');
      if (eq == std::string::npos) throw Error(ErrorKind::Config, "expected 'key = value' on line " + std::to_string(lineno));
      const std::string key = trim(line.substr(0, eq));
      values_[section.empty() ? key : section + "." + key] = trim(line.substr(eq + 1));
    }
  }

  void flatten(const nlohmann::json& j, const std::string& prefix) {
    if (j.is_object()) {
      for (auto it = j.begin(); it != j.end(); ++it) flatten(it.value(), prefix.empty() ? it.key() : prefix + "." + it.key());
    } else if (j.is_array()) {
      std::string joined;
      for (const auto& e : j) joined += (joined.empty() ? "" : ",") + (e.is_string() ? e.get<std::string>() : e.dump());
      values_[prefix] = joined;
    } else if (j.is_string()) {
      values_[prefix] = j.get<std::string>();
    } else {
      values_[prefix] = j.dump();
    }
  }

  void parse_json() {
    nlohmann::json j;
    try {
      j = nlohmann::json::parse(text_);
    } catch (const std::exception& e) {
      throw Error(ErrorKind::Config, std::string("invalid JSON: ") + e.what());
    }
    flatten(j, "");
  }

  std::string text_;
  std::map<std::string, std::string> values_;
};

struct Context {
  const Config& cfg;
  fs::path out;
  std::string provenance;  // "# ..." lines
};

ChainParams read_params(const Config& c) {
  for (const char* k : {"params.nu", "params.m", "params.kappa", "params.gamma"})
    if (!c.has(k)) throw Error(ErrorKind::Config, std::string("missing field '") + k + "'");
  try {
    return ChainParams(c.num("params.nu"), c.num("params.m"), c.num("params.kappa"), c.num("params.gamma"));
  } catch (const Error& e) {
    if (e.kind() == ErrorKind::Config) throw;
    throw Error(ErrorKind::Config, std::string("params: ") + e.what());
  }
}

void require(bool ok, const std::string& field, const std::string& reason) {
  if (!ok) throw Error(ErrorKind::Config, "field '" + field + "' " + reason);
}

HalfLineState read_initial(const Config& c) {
  const std::string kind = c.str("initial_data.kind", "delta");
  if (kind == "delta") {
    const double site = c.num("initial_data.site", 5.0);
    require(site >= 0 && site == std::floor(site), "initial_data.site", "must be a non-negative integer");
    const std::string comp = c.str("initial_data.component", "u");
    require(comp == "u" || comp == "v", "initial_data.component", "must be 'u' or 'v'");
    return delta_state(Index(site), Index(site), comp == "u" ? Component::Position : Component::Velocity);
  }
  if (kind == "list") {
    const std::vector<double> u = c.list("initial_data.u");
    std::vector<double> v = c.has("initial_data.v") ? c.list("initial_data.v") : std::vector<double>(u.size(), 0.0);
    require(!u.empty(), "initial_data.u", "must be non-empty");
    require(v.size() == u.size(), "initial_data.v", "must have the same length as initial_data.u");
    return HalfLineState(Eigen::Map<const Eigen::VectorXd>(u.data(), Index(u.size())),
                         Eigen::Map<const Eigen::VectorXd>(v.data(), Index(v.size())));
  }
  if (kind == "file") {
    const std::string path = c.str("initial_data.path");
    std::ifstream in(path);
    require(bool(in), "initial_data.path", "cannot be opened");
    std::vector<double> u, v;
    std::string line;
    while (std::getline(in, line)) {
      if (line.empty() || line[0] == '#' || line[0] == 'x') continue;
      double x, a, b;
      char c1, c2;
      std::stringstream ls(line);
      require(bool(ls >> x >> c1 >> a >> c2 >> b), "initial_data.path", "rows must be 'x,u,v'");
      const std::size_t xi = std::size_t(x);
      if (u.size() <= xi) {
        u.resize(xi + 1, 0.0);
        v.resize(xi + 1, 0.0);
      }
      u[xi] = a;
      v[xi] = b;
    }
    require(!u.empty(), "initial_data.path", "contains no rows");
    return HalfLineState(Eigen::Map<const Eigen::VectorXd>(u.data(), Index(u.size())),
                         Eigen::Map<const Eigen::VectorXd>(v.data(), Index(v.size())));
  }
  throw Error(ErrorKind::Config, "field 'initial_data.kind' must be delta, list or file");
}

IntegrationOptions read_integration(const Config& c, const ChainParams& p, Index support) {
  IntegrationOptions o;
  o.T = c.num("numeric.T");
  o.dt = c.num("numeric.dt");
  o.L = Index(c.num("numeric.L", 0.0));
  require(o.T > 0, "numeric.T", "must be positive");
  require(o.dt > 0 && o.dt <= 0.5 / p.band_hi(), "numeric.dt", "must lie in (0, 0.5 / band_hi]");
  if (o.L > 0)
    require(o.L >= window_length(p, o.T, support), "numeric.L",
            "must be >= ceil(band_hi T) + support + 64 = " + std::to_string(window_length(p, o.T, support)));
  if (c.has("numeric.alpha")) o.alphas = c.list("numeric.alpha");
  o.record_stride = Index(c.num("numeric.record_stride", 1.0));
  o.snapshot_stride = Index(c.num("numeric.snapshot_stride", 0.0));
  require(o.record_stride >= 1, "numeric.record_stride", "must be >= 1");
  require(o.snapshot_stride >= 0, "numeric.snapshot_stride", "must be >= 0");
  return o;
}

// CSV outputs get "# ..." provenance lines; JSON carries a provenance object instead
std::ofstream open_out(const Context& ctx, const std::string& name, bool comment = true) {
  std::ofstream os(ctx.out / name);
  if (!os) throw Error(ErrorKind::InvalidArgument, "cannot write " + (ctx.out / name).string());
  if (comment) os << ctx.provenance;
  return os;
}

std::string num_str(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.6g", v);
  return buf;
}

nlohmann::ordered_json params_json(const ChainParams& p) {
  return {{"nu", p.nu()}, {"m", p.m()}, {"kappa", p.kappa()}, {"gamma", p.gamma()}};
}

nlohmann::ordered_json provenance_json(const Context& ctx, const std::optional<ChainParams>& p) {
  nlohmann::ordered_json j;
  j["tool"] = "chain";
  j["version"] = CHAIN_VERSION;
  j["config_hash"] = ctx.cfg.hash();
  if (p) j["params"] = params_json(*p);
  return j;
}

int cmd_simulate(const Context& ctx) {
  const ChainParams p = read_params(ctx.cfg);
  const HalfLineState y0 = read_initial(ctx.cfg);
  const IntegrationOptions o = read_integration(ctx.cfg, p, y0.support_end());
  const std::string boundary = ctx.cfg.str("numeric.boundary", "full");
  require(boundary == "full" || boundary == "dirichlet", "numeric.boundary", "must be 'full' or 'dirichlet'");
  const Trajectory tr = boundary == "full" ? integrate_full(p, y0, o) : integrate_dirichlet(p, y0, o);
  {
    auto os = open_out(ctx, "trajectory.csv");
    tr.write_csv(os);
  }
  for (std::size_t k = 0; k < tr.snapshots.size(); ++k) {
    auto os = open_out(ctx, "snapshot_" + std::to_string(k) + ".csv");
    tr.write_snapshot(os, Index(k));
  }
  std::cout << "simulate: " << tr.records() << " records, " << tr.snapshots.size() << " snapshots -> " << ctx.out
            << "\n";
  return 0;
}

int cmd_kernels(const Context& ctx) {
  const ChainParams p = read_params(ctx.cfg);
  const double dt = ctx.cfg.num("numeric.dt"), T = ctx.cfg.num("numeric.T");
  require(dt > 0, "numeric.dt", "must be positive");
  require(T > 0, "numeric.T", "must be positive");
  const Index sites = Index(ctx.cfg.num("numeric.k_sites", 8.0));
  require(sites >= 0, "numeric.k_sites", "must be >= 0");
  const std::string route = ctx.cfg.str("numeric.route", "frequency");
  require(route == "frequency" || route == "volterra", "numeric.route", "must be 'frequency' or 'volterra'");
  const BoundaryKernelTable t = BoundaryKernelTable::build(
      p, TimeGrid::covering(dt, T), sites, route == "frequency" ? KernelRoute::Frequency : KernelRoute::Volterra);
  {
    auto os = open_out(ctx, "N.csv");
    t.write_N(os);
  }
  if (sites > 0) {
    auto os = open_out(ctx, "K.csv");
    t.write_K(os);
  }
  std::cout << "kernels: " << t.grid.n + 1 << " samples (" << route << " route) -> " << ctx.out << "\n";
  return 0;
}

nlohmann::ordered_json complex_json(Complex z) { return {z.real(), z.imag()}; }

int cmd_spectrum(const Context& ctx) {
  const ChainParams p = read_params(ctx.cfg);
  const SpectralClass c = classify_conditions(p);
  const RealSpectrumReport r = find_real_spectrum(p);
  nlohmann::ordered_json j;
  j["provenance"] = provenance_json(ctx, p);
  j["classification"] = {{"tag", to_string(c.tag)}};
  if (c.beta) j["classification"]["beta"] = *c.beta;
  if (c.reason) j["classification"]["reason"] = to_string(*c.reason);
  if (c.frequency) j["classification"]["frequency"] = *c.frequency;
  j["discrete_eigenvalues"] = r.discrete_eigenvalues;
  j["embedded_resonances"] = r.embedded_resonances;
  j["edge_zeros"] = r.edge_zeros;
  nlohmann::ordered_json edges = nlohmann::ordered_json::array();
  std::vector<double> pts = {-p.band_hi(), p.band_hi()};
  if (p.m() > 0) {
    pts.push_back(-p.m());
    pts.push_back(p.m());
  } else {
    pts.push_back(0.0);
  }
  for (double e : pts) {
    EdgeExpansion x{p};
    try {
      x = edge_expansion(p, e);
    } catch (const Error& err) {
      edges.push_back({{"edge", e}, {"error", err.what()}});
      continue;
    }
    edges.push_back({{"edge", e},
                     {"jump_exponent", x.jump_exponent},
                     {"leading_power", x.leading_power},
                     {"coefficients", {complex_json(x.coefficients[0]), complex_json(x.coefficients[1])}}});
  }
  j["edge_expansions"] = edges;
  nlohmann::ordered_json poles = nlohmann::ordered_json::array();
  for (Complex s : lower_half_plane_poles(p)) poles.push_back(complex_json(s));
  j["lower_half_plane_poles"] = poles;
  auto os = open_out(ctx, "spectrum.json", false);
  os.precision(17);
  os << j.dump(2) << "\n";
  std::cout << "spectrum: " << to_string(c.tag) << ", " << r.discrete_eigenvalues.size() << " eigenvalues, "
            << r.embedded_resonances.size() << " resonances -> " << ctx.out << "\n";
  return 0;
}

int cmd_verify(const Context& ctx) {
  const Config& cfg = ctx.cfg;
  const ChainParams p = read_params(cfg);
  if (!cfg.has("verify.seed")) throw Error(ErrorKind::Config, "missing field 'verify.seed'");
  const double seed = cfg.num("verify.seed");
  require(seed >= 0 && seed == std::floor(seed), "verify.seed", "must be a non-negative integer");
  const double alpha = cfg.num("verify.alpha", 2.0);
  require(alpha > 1.5, "verify.alpha", "must exceed 3/2");
  const double tol = cfg.num("verify.tolerance", 0.2);

  FitOptions fo;
  fo.seed = std::uint64_t(seed);
  fo.bootstrap = int(cfg.num("verify.bootstrap", 200.0));
  require(fo.bootstrap >= 200, "verify.bootstrap", "must be >= 200");
  fo.t_min = cfg.num("verify.t_min");
  fo.t_max = cfg.num("verify.t_max");
  require(fo.t_min > 0 && fo.t_max > fo.t_min, "verify.t_max", "must exceed verify.t_min > 0");
  fo.min_decades = cfg.num("verify.min_decades", 1.0);
  fo.block_width = dispersive_period(p);

  std::vector<std::string> checks = {"auto"};
  if (cfg.has("verify.checks")) {
    checks.clear();
    std::stringstream ss(cfg.str("verify.checks"));
    std::string s;
    while (std::getline(ss, s, ',')) {
      s.erase(0, s.find_first_not_of(" \t"));
      s.erase(s.find_last_not_of(" \t") + 1);
      if (!s.empty()) checks.push_back(s);
    }
  }
  const SpectralClass cls = classify_conditions(p);
  if (checks.size() == 1 && checks[0] == "auto")
    checks = cls.decaying() ? std::vector<std::string>{"main_bound", "free_bound", "scattering", "kernel_bounds"}
                            : std::vector<std::string>{"witness"};

  std::vector<CheckReport> reports;
  std::optional<Trajectory> tr;
  HalfLineState y0;
  auto trajectory = [&]() -> const Trajectory& {
    if (!tr) {
      y0 = read_initial(cfg);
      IntegrationOptions o;
      o.T = fo.t_max;
      o.dt = cfg.num("numeric.dt", 0.01);
      require(o.dt > 0 && o.dt <= 0.5 / p.band_hi(), "numeric.dt", "must lie in (0, 0.5 / band_hi]");
      o.L = Index(cfg.num("numeric.L", 0.0));
      o.record_stride = Index(cfg.num("numeric.record_stride", 10.0));
      o.snapshot_stride = Index(cfg.num("numeric.snapshot_stride", 50.0));
      o.alphas = {-alpha};
      tr = integrate_full(p, y0, o);
    }
    return *tr;
  };

  for (const std::string& check : checks) {
    if (check == "main_bound") {
      const DecayFit f = verify_main_bound(trajectory(), alpha, fo);
      reports.push_back(report_from_fit("main_bound", p, f, std::abs(f.slope - f.expected) <= tol));
    } else if (check == "free_bound") {
      trajectory();
      const DecayFit f = verify_free_bound(p, y0, alpha, cfg.num("verify.sample_dt", 0.25), fo);
      reports.push_back(report_from_fit("free_bound", p, f, std::abs(f.slope - f.expected) <= tol));
    } else if (check == "scattering") {
      const Trajectory& t = trajectory();
      const ScatteringVectors sv = scattering_vectors(
          p, Index(cfg.num("verify.x_window", 64.0)), Index(std::ceil(p.band_hi() * fo.t_max)) + 100);
      const ScatteringResidual r = verify_scattering(t, y0, alpha, sv, fo);
      CheckReport rep = report_from_fit("scattering", p, r.fit, r.fit.envelope_flat);
      rep.detail = "compensated_slope=" + num_str(r.fit.compensated_slope);
      reports.push_back(rep);
    } else if (check == "kernel_bounds") {
      const KernelBoundsReport kb = verify_kernel_bounds(p, cfg.num("verify.kernel_dt", 0.1),
                                                         Index(cfg.num("verify.k_sites", 64.0)), fo);
      for (std::size_t i = 0; i < kb.fits.size(); ++i) {
        CheckReport rep = report_from_fit("kernel_bounds." + kb.names[i], p, kb.fits[i], kb.fits[i].envelope_flat);
        rep.detail = "compensated_slope=" + num_str(kb.fits[i].compensated_slope);
        reports.push_back(rep);
      }
    } else if (check == "witness") {
      const WitnessReport w = degenerate_witness(p);
      CheckReport rep{"witness", p, 0.0, 0.0, 0.0, 0.0, 0.0, w.residual < 1e-8 && w.norm_ratio > 0.9, {}};
      rep.detail = std::string(to_string(w.reason)) + " frequency=" + num_str(w.frequency) +
                   " residual=" + num_str(w.residual) + " norm_ratio=" + num_str(w.norm_ratio);
      reports.push_back(rep);
    } else {
      throw Error(ErrorKind::Config, "field 'verify.checks' has unknown check '" + check + "'");
    }
  }

  nlohmann::ordered_json doc;
  doc["provenance"] = provenance_json(ctx, p);
  doc["reports"] = nlohmann::ordered_json::parse(to_json(reports));
  auto os = open_out(ctx, "report.json", false);
  os << doc.dump(2) << "\n";
  bool all = true;
  for (const auto& r : reports) {
    std::cout << (r.pass ? "pass " : "FAIL ") << r.check_id << " slope=" << r.slope << " expected=" << r.expected
              << (r.detail.empty() ? "" : " " + r.detail) << "\n";
    all = all && r.pass;
  }
  return all ? 0 : 3;
}

std::vector<double> read_range(const Config& c, const std::string& key) {
  // "lo:hi:n" or an explicit list
  const std::string s = c.str(key);
  if (s.find(':') != std::string::npos) {
    double lo, hi, n;
    char c1, c2;
    std::stringstream ss(s);
    require(bool(ss >> lo >> c1 >> hi >> c2 >> n) && n >= 1, key, "must be 'lo:hi:n'");
    std::vector<double> out;
    for (int i = 0; i < int(n); ++i) out.push_back(n == 1 ? lo : lo + (hi - lo) * i / (n - 1));
    return out;
  }
  return c.list(key);
}

int cmd_sweep(const Context& ctx) {
  const Config& cfg = ctx.cfg;
  for (const char* k : {"params.nu", "params.m"})
    if (!cfg.has(k)) throw Error(ErrorKind::Config, std::string("missing field '") + k + "'");
  const double nu = cfg.num("params.nu"), m = cfg.num("params.m");
  require(nu > 0, "params.nu", "must be positive");
  require(m >= 0, "params.m", "must be non-negative");
  const std::vector<double> kappas = read_range(cfg, "sweep.kappa");
  const std::vector<double> gammas = read_range(cfg, "sweep.gamma");
  for (double k : kappas) require(k >= 0, "sweep.kappa", "values must be non-negative");
  for (double g : gammas) require(g >= 0, "sweep.gamma", "values must be non-negative");
  const int workers = int(cfg.num("sweep.workers", 1.0));
  require(workers >= 1, "sweep.workers", "must be >= 1");

  const std::size_t total = kappas.size() * gammas.size();
  std::vector<SpectralClass> out(total, SpectralClass{SpectralTag::ConditionC, {}, {}, {}});
  std::atomic<std::size_t> next{0};
  auto work = [&] {
    for (std::size_t i; (i = next.fetch_add(1)) < total;)
      out[i] = classify_conditions(ChainParams(nu, m, kappas[i / gammas.size()], gammas[i % gammas.size()]));
  };
  std::vector<std::thread> pool;
  for (int w = 0; w < workers; ++w) pool.emplace_back(work);
  for (auto& t : pool) t.join();

  auto os = open_out(ctx, "classification.csv");
  os.precision(17);
  os << "kappa,gamma,tag,beta,reason,frequency\n";
  for (std::size_t i = 0; i < total; ++i) {
    const SpectralClass& c = out[i];
    os << kappas[i / gammas.size()] << ',' << gammas[i % gammas.size()] << ',' << to_string(c.tag) << ','
       << (c.beta ? std::to_string(*c.beta) : std::string()) << ',' << (c.reason ? to_string(*c.reason) : "") << ',';
    if (c.frequency) os << *c.frequency;
    os << '\n';
  }
  std::cout << "sweep: " << total << " points on " << workers << " workers -> " << ctx.out << "\n";
  return 0;
}

std::string provenance_lines(const Config& cfg) {
  std::ostringstream os;
  os.precision(17);
  os << "# chain " << CHAIN_VERSION << " config_hash=" << cfg.hash() << "\n";
  os << "# echo";
  for (const char* k : {"params.nu", "params.m", "params.kappa", "params.gamma"})
    if (cfg.has(k)) os << ' ' << (k + 7) << '=' << cfg.str(k);
  os << "\n";
  return os.str();
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Semi-infinite harmonic chain with boundary dissipation"};
  std::string command, config_path, out_dir = ".";
  app.add_option("command", command, "simulate | kernels | spectrum | verify | sweep")
      ->required()
      ->check(CLI::IsMember({"simulate", "kernels", "spectrum", "verify", "sweep"}));
  app.add_option("--config", config_path, "config file (key = value with [sections], or JSON)")->required();
  app.add_option("--out", out_dir, "output directory");
  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : 1;
  }

  try {
    const Config cfg = Config::load(config_path);
    fs::create_directories(out_dir);
    const Context ctx{cfg, out_dir, provenance_lines(cfg)};
    if (command == "simulate") return cmd_simulate(ctx);
    if (command == "kernels") return cmd_kernels(ctx);
    if (command == "spectrum") return cmd_spectrum(ctx);
    if (command == "verify") return cmd_verify(ctx);
    return cmd_sweep(ctx);
  } catch (const Error& e) {
    std::cerr << "chain " << command << ": " << e.what() << "\n";
    return e.kind() == ErrorKind::Config ? 1 : 2;
  } catch (const std::exception& e) {
    std::cerr << "chain " << command << ": " << e.what() << "\n";
    return 2;
  }
}
