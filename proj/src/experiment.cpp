#include "wparab/experiment.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <random>
#include <set>
#include <sstream>

#include <json.hpp>

#include "wparab/error.hpp"
#include "wparab/flattening.hpp"
#include "wparab/geometry.hpp"
#include "wparab/inequality.hpp"
#include "wparab/io.hpp"
#include "wparab/maximal.hpp"
#include "wparab/oscillation.hpp"
#include "wparab/solver.hpp"

namespace wparab {

namespace {

namespace fs = std::filesystem;
using json = nlohmann::json;

constexpr double kPi = 3.141592653589793238462643383279502884;

[[noreturn]] void config_fail(const std::string& msg) { fail(ErrorKind::ConfigError, msg); }

// Typed reader over one JSON object that rejects keys nobody asked for.
class Section {
 public:
  Section(const json* j, std::string path) : j_(j), path_(std::move(path)) {
    if (j_ && !j_->is_object()) config_fail(path_ + " must be an object");
  }

  double num(const std::string& k, double d) {
    const json* v = get(k);
    if (!v) return d;
    if (!v->is_number()) config_fail(where(k) + " must be a number");
    const double x = v->get<double>();
    if (!std::isfinite(x)) config_fail(where(k) + " must be finite");
    return x;
  }
  double positive(const std::string& k, double d) {
    const double x = num(k, d);
    if (!(x > 0.0)) config_fail(where(k) + " must be positive");
    return x;
  }
  int integer(const std::string& k, int d, int lo = 1) {
    const json* v = get(k);
    if (!v) return d;
    if (!v->is_number_integer()) config_fail(where(k) + " must be an integer");
    const auto x = v->get<long long>();
    if (x < lo || x > 100000000) config_fail(where(k) + " is out of range");
    return int(x);
  }
  bool flag(const std::string& k, bool d) {
    const json* v = get(k);
    if (!v) return d;
    if (!v->is_boolean()) config_fail(where(k) + " must be true or false");
    return v->get<bool>();
  }
  std::string text(const std::string& k, const std::string& d, const std::vector<std::string>& allowed) {
    const json* v = get(k);
    if (!v) return d;
    if (!v->is_string()) config_fail(where(k) + " must be a string");
    const std::string s = v->get<std::string>();
    if (!allowed.empty() && std::find(allowed.begin(), allowed.end(), s) == allowed.end())
      config_fail(where(k) + " has unknown value '" + s + "'");
    return s;
  }
  std::vector<double> nums(const std::string& k, std::vector<double> d) {
    const json* v = get(k);
    if (!v) return d;
    if (!v->is_array() || v->empty()) config_fail(where(k) + " must be a non-empty array of numbers");
    std::vector<double> out;
    for (const json& e : *v) {
      if (!e.is_number()) config_fail(where(k) + " must hold numbers");
      out.push_back(e.get<double>());
    }
    return out;
  }
  std::optional<std::uint64_t> u64(const std::string& k) {
    const json* v = get(k);
    if (!v) return std::nullopt;
    if (!v->is_number_unsigned() && !(v->is_number_integer() && v->get<long long>() >= 0))
      config_fail(where(k) + " must be a non-negative integer");
    return v->get<std::uint64_t>();
  }
  Section sub(const std::string& k) { return Section(get(k), where(k)); }
  void finish() const {
    if (!j_) return;
    for (const auto& item : j_->items())
      if (!used_.count(item.key())) config_fail("unknown key " + where(item.key()));
  }

 private:
  std::string where(const std::string& k) const { return path_.empty() ? k : path_ + "." + k; }
  const json* get(const std::string& k) {
    used_.insert(k);
    if (!j_) return nullptr;
    auto it = j_->find(k);
    return it == j_->end() ? nullptr : &*it;
  }
  const json* j_;
  std::string path_;
  std::set<std::string> used_;
};

struct WeightCfg {
  std::string type = "constant";
  double a = 0.0, b = 1.0, center = 0.5, alpha = 0.0, scale = 1.0;
};
struct CoefCfg {
  std::string type = "constant";
  double value = 1.0, amplitude = 0.0, frequency = 8.0, nu = 0.5;
  int cells = 256;
};
struct ForcingCfg {
  std::string type = "manufactured";
  double amplitude = 1.0;
};
struct GridCfg {
  int nx = 16;
  double T = 0.25, tau_over_h2 = 1.0;
};

struct Config {
  std::string name = "experiment";
  std::optional<std::uint64_t> seed;
  WeightCfg weight;
  CoefCfg coef;
  ForcingCfg forcing;
  GridCfg grid;

  struct {
    bool enabled = true;
    double M0 = 4.0, theta = 0.5, rh_budget = 2.0;
    std::vector<double> q{1, 2, 3};
    int nodes = 33, radii = 32;
  } weights;
  struct {
    bool enabled = true;
    int samples = 10000, lattice = 100;
    double r = 0.25, t0 = 0.5;
  } geometry;
  struct {
    bool enabled = true;
    double min_order = 1.0;
    int refinements = 3;
  } convergence;
  struct {
    bool enabled = true;
    double delta = 0.5, R0 = 0.5;
    int time_points = 4;
  } oscillation;
  struct {
    bool enabled = true;
    double r = 0.1, t_frac = 0.9, budget = 100.0, basic_budget = 100.0, max_variation = 0.1;
    int levels = 3;
  } energy;
  struct {
    bool enabled = true;
    double r = 0.2, t_frac = 0.9, budget = 5.0;
  } poincare;
  struct {
    bool enabled = true;
    std::vector<double> p{2, 4};
    double budget = 10.0, max_variation = 0.1, T = 0.5;
    int levels = 3;
  } apriori;
  struct {
    bool enabled = true;
    std::vector<double> steps{1, 2, 4};
    double budget = 1.0;
  } time_shift;
  struct {
    bool enabled = true;
    std::vector<double> amplitudes{0.4, 0.2, 0.1, 0.05};
    double frequency = 8.0, T = 0.4, t_frac = 0.5, R = 0.4, baseline_factor = 2.0;
    int nx = 64, nt = 256;
  } freeze;
  struct {
    bool enabled = true;
    double q = 2.0, gamma_lq = 0.1, M0 = 10.0, gamma_embed = 0.5, gamma_interp = 0.1;
  } inequality;
  struct {
    bool enabled = true;
    int seeds = 5, nx = 24, nt = 24;
    double T = 0.5;
    std::vector<double> lambdas{0.05, 0.1, 0.3, 1.0, 3.0};
  } weak;
  struct {
    bool enabled = true;
    int cylinders = 100;
    double rmin = 0.01, rmax = 0.2;
  } vitali;
  struct {
    bool enabled = true;
    double K = 4.0, q0 = 0.25, delta_hat = 0.1, T = 0.25;
    int m_max = 5, nx = 32, nt = 256;
  } levelset;
  struct {
    bool enabled = true;
    std::string chart = "bump";
    double delta = 0.2, base = 0.0, width = 0.25, r = 0.5, R = 0.5, Lambda = 2.0, M0 = 4.0;
    double weight_alpha = 0.1, nu = 0.5;
    std::vector<double> weight_center{0.1, 0.05};
    std::vector<double> deltas{0.05, 0.1, 0.2};
    std::vector<double> rho_radii{0.5, 0.25, 0.125, 0.0625, 0.03125};
    int shape = 48, fam_nodes = 5, fam_radii = 5, roundtrip = 10000, cells = 16;
  } flatten;
};

Config parse_config(const json& root) {
  Config c;
  Section s(&root, "");
  c.name = s.text("name", c.name, {});
  c.seed = s.u64("seed");

  Section w = s.sub("weight");
  c.weight.type = w.text("type", c.weight.type, {"constant", "power"});
  c.weight.a = w.num("a", c.weight.a);
  c.weight.b = w.num("b", c.weight.b);
  if (!(c.weight.b > c.weight.a)) config_fail("weight.b must exceed weight.a");
  c.weight.center = w.num("center", 0.5 * (c.weight.a + c.weight.b));
  c.weight.alpha = w.num("alpha", c.weight.alpha);
  c.weight.scale = w.positive("scale", c.weight.scale);
  w.finish();

  Section a = s.sub("coefficients");
  c.coef.type = a.text("type", c.coef.type, {"constant", "oscillating"});
  c.coef.value = a.positive("value", c.coef.value);
  c.coef.amplitude = a.num("amplitude", c.coef.amplitude);
  c.coef.frequency = a.num("frequency", c.coef.frequency);
  c.coef.nu = a.positive("nu", c.coef.nu);
  c.coef.cells = a.integer("cells", c.coef.cells);
  a.finish();

  Section f = s.sub("forcing");
  c.forcing.type = f.text("type", c.forcing.type, {"manufactured", "smooth", "zero"});
  c.forcing.amplitude = f.num("amplitude", c.forcing.amplitude);
  f.finish();

  Section g = s.sub("grid");
  c.grid.nx = g.integer("nx", c.grid.nx, 4);
  c.grid.T = g.positive("T", c.grid.T);
  c.grid.tau_over_h2 = g.positive("tau_over_h2", c.grid.tau_over_h2);
  g.finish();

  Section au = s.sub("audits");
  {
    Section x = au.sub("weights");
    auto& o = c.weights;
    o.enabled = x.flag("enabled", o.enabled);
    o.M0 = x.positive("M0", o.M0);
    o.theta = x.positive("theta", o.theta);
    o.rh_budget = x.positive("reverse_holder_budget", o.rh_budget);
    o.q = x.nums("q", o.q);
    o.nodes = x.integer("nodes", o.nodes, 2);
    o.radii = x.integer("radii", o.radii, 1);
    x.finish();
  }
  {
    Section x = au.sub("geometry");
    auto& o = c.geometry;
    o.enabled = x.flag("enabled", o.enabled);
    o.samples = x.integer("triangle_samples", o.samples);
    o.lattice = x.integer("lattice", o.lattice, 2);
    o.r = x.positive("r", o.r);
    o.t0 = x.num("t0", o.t0);
    x.finish();
  }
  {
    Section x = au.sub("convergence");
    auto& o = c.convergence;
    o.enabled = x.flag("enabled", o.enabled);
    o.min_order = x.num("min_order", o.min_order);
    o.refinements = x.integer("refinements", o.refinements);
    x.finish();
  }
  {
    Section x = au.sub("oscillation");
    auto& o = c.oscillation;
    o.enabled = x.flag("enabled", o.enabled);
    o.delta = x.num("delta", o.delta);
    if (o.delta < 0.0) config_fail("audits.oscillation.delta must be non-negative");
    o.R0 = x.positive("R0", o.R0);
    o.time_points = x.integer("time_points", o.time_points);
    x.finish();
  }
  {
    Section x = au.sub("energy");
    auto& o = c.energy;
    o.enabled = x.flag("enabled", o.enabled);
    o.r = x.positive("r", o.r);
    o.t_frac = x.positive("t_frac", o.t_frac);
    o.budget = x.positive("budget", o.budget);
    o.basic_budget = x.positive("basic_budget", o.basic_budget);
    o.max_variation = x.positive("max_variation", o.max_variation);
    o.levels = x.integer("levels", o.levels, 2);
    x.finish();
  }
  {
    Section x = au.sub("poincare");
    auto& o = c.poincare;
    o.enabled = x.flag("enabled", o.enabled);
    o.r = x.positive("r", o.r);
    o.t_frac = x.positive("t_frac", o.t_frac);
    o.budget = x.positive("budget", o.budget);
    x.finish();
  }
  {
    Section x = au.sub("apriori");
    auto& o = c.apriori;
    o.enabled = x.flag("enabled", o.enabled);
    o.p = x.nums("p", o.p);
    o.budget = x.positive("budget", o.budget);
    o.max_variation = x.positive("max_variation", o.max_variation);
    o.T = x.positive("T", o.T);
    o.levels = x.integer("levels", o.levels, 2);
    x.finish();
  }
  {
    Section x = au.sub("time_shift");
    auto& o = c.time_shift;
    o.enabled = x.flag("enabled", o.enabled);
    o.steps = x.nums("steps", o.steps);
    o.budget = x.positive("budget", o.budget);
    x.finish();
  }
  {
    Section x = au.sub("freeze");
    auto& o = c.freeze;
    o.enabled = x.flag("enabled", o.enabled);
    o.amplitudes = x.nums("amplitudes", o.amplitudes);
    o.frequency = x.num("frequency", o.frequency);
    o.T = x.positive("T", o.T);
    o.t_frac = x.positive("t_frac", o.t_frac);
    o.R = x.positive("R", o.R);
    o.baseline_factor = x.positive("baseline_factor", o.baseline_factor);
    o.nx = x.integer("nx", o.nx, 4);
    o.nt = x.integer("nt", o.nt);
    x.finish();
  }
  {
    Section x = au.sub("inequality");
    auto& o = c.inequality;
    o.enabled = x.flag("enabled", o.enabled);
    o.q = x.num("q", o.q);
    o.gamma_lq = x.num("gamma_lq", o.gamma_lq);
    o.M0 = x.positive("M0", o.M0);
    o.gamma_embed = x.num("gamma_embed", o.gamma_embed);
    o.gamma_interp = x.positive("gamma_interp", o.gamma_interp);
    x.finish();
  }
  {
    Section x = au.sub("weak_1_1");
    auto& o = c.weak;
    o.enabled = x.flag("enabled", o.enabled);
    o.seeds = x.integer("seeds", o.seeds);
    o.nx = x.integer("nx", o.nx, 2);
    o.nt = x.integer("nt", o.nt);
    o.T = x.positive("T", o.T);
    o.lambdas = x.nums("lambdas", o.lambdas);
    x.finish();
  }
  {
    Section x = au.sub("vitali");
    auto& o = c.vitali;
    o.enabled = x.flag("enabled", o.enabled);
    o.cylinders = x.integer("cylinders", o.cylinders);
    o.rmin = x.positive("rmin", o.rmin);
    o.rmax = x.positive("rmax", o.rmax);
    if (o.rmax < o.rmin) config_fail("audits.vitali.rmax must be at least rmin");
    x.finish();
  }
  {
    Section x = au.sub("levelset");
    auto& o = c.levelset;
    o.enabled = x.flag("enabled", o.enabled);
    o.K = x.positive("K", o.K);
    o.q0 = x.positive("q0", o.q0);
    o.delta_hat = x.positive("delta_hat", o.delta_hat);
    o.m_max = x.integer("m_max", o.m_max);
    o.nx = x.integer("nx", o.nx, 4);
    o.nt = x.integer("nt", o.nt);
    o.T = x.positive("T", o.T);
    x.finish();
  }
  {
    Section x = au.sub("flatten");
    auto& o = c.flatten;
    o.enabled = x.flag("enabled", o.enabled);
    o.chart = x.text("chart", o.chart, {"affine", "bump"});
    o.delta = x.num("delta", o.delta);
    o.base = x.num("base", o.base);
    o.width = x.positive("width", o.width);
    o.r = x.positive("r", o.r);
    o.R = x.positive("R", o.R);
    o.Lambda = x.positive("Lambda", o.Lambda);
    o.M0 = x.positive("M0", o.M0);
    o.weight_alpha = x.num("weight_alpha", o.weight_alpha);
    o.nu = x.positive("nu", o.nu);
    o.weight_center = x.nums("weight_center", o.weight_center);
    if (o.weight_center.size() != 2) config_fail("audits.flatten.weight_center needs two entries");
    o.deltas = x.nums("deltas", o.deltas);
    o.rho_radii = x.nums("rho_radii", o.rho_radii);
    o.shape = x.integer("shape", o.shape, 2);
    o.fam_nodes = x.integer("family_nodes", o.fam_nodes, 2);
    o.fam_radii = x.integer("family_radii", o.fam_radii);
    o.roundtrip = x.integer("roundtrip_samples", o.roundtrip);
    o.cells = x.integer("cells", o.cells);
    x.finish();
  }
  au.finish();
  s.finish();
  return c;
}

// ---------------------------------------------------------------------------

Matrix scalar(double v) { return Matrix::Constant(1, 1, v); }

double fit_slope(const std::vector<double>& x, const std::vector<double>& y) {
  const double n = double(x.size());
  double mx = 0, my = 0;
  for (std::size_t j = 0; j < x.size(); ++j) mx += x[j] / n, my += y[j] / n;
  double sxy = 0, sxx = 0;
  for (std::size_t j = 0; j < x.size(); ++j) {
    sxy += (x[j] - mx) * (y[j] - my);
    sxx += (x[j] - mx) * (x[j] - mx);
  }
  return sxy / sxx;
}

void absorb(AuditReport& into, const AuditReport& from, const std::string& prefix) {
  for (AuditRow row : from.rows) {
    row.label = prefix + row.label;
    into.add_row(row);
  }
  for (const auto& [k, v] : from.notes) into.notes[prefix + k] = v;
}

class Runner {
 public:
  Runner(Config cfg, fs::path out, std::optional<std::uint64_t> seed)
      : cfg_(std::move(cfg)), out_(std::move(out)), seed_(seed ? seed : cfg_.seed) {}

  RunResult run(Stage stage) {
    std::error_code ec;
    fs::create_directories(out_, ec);
    if (ec) fail(ErrorKind::IoError, "cannot create output directory " + out_.string());
    const bool all = stage == Stage::All;
    if (all || stage == Stage::Weights) stage_weights();
    if (all || stage == Stage::Geometry) stage_geometry();
    if (all || stage == Stage::Solve) stage_solve();
    if (all || stage == Stage::Audit) stage_audit();
    if (all || stage == Stage::Levelset) stage_levelset();
    if (all || stage == Stage::Flatten) stage_flatten();
    write_summary(stage);
    result_.exit_code = std::all_of(result_.reports.begin(), result_.reports.end(),
                                    [](const auto& kv) { return kv.second; })
                            ? 0
                            : 1;
    std::sort(result_.files.begin(), result_.files.end());
    return result_;
  }

 private:
  // ---- shared problem data ----
  Weight weight() const {
    const auto& w = cfg_.weight;
    if (w.type == "constant") return Weight::constant(interval(w.a, w.b), w.scale);
    return Weight::power(interval(w.a, w.b), {w.center}, w.alpha, w.scale);
  }

  Grid1D base_grid(int nx, double T) const {
    Grid1D g;
    g.a = cfg_.weight.a;
    g.b = cfg_.weight.b;
    g.nx = nx;
    g.t1 = T;
    const double h = g.hx();
    g.nt = std::max(1, int(std::lround(T / (cfg_.grid.tau_over_h2 * h * h))));
    return g;
  }

  CoefficientField coefficients(double T, double amplitude) const {
    const auto& c = cfg_.coef;
    const Box dom = interval(cfg_.weight.a, cfg_.weight.b);
    if (amplitude == 0.0) return CoefficientField::constant(dom, {c.cells}, T, 1, scalar(c.value), c.nu);
    const double a0 = cfg_.weight.a, L = cfg_.weight.b - cfg_.weight.a;
    const double freq = c.frequency;
    const double v = c.value;
    return CoefficientField::sample(
        dom, {c.cells}, T, 1,
        [=](const Point& x, double) { return scalar(v * (1.0 + amplitude * std::sin(freq * kPi * (x[0] - a0) / L))); },
        c.nu);
  }
  CoefficientField coefficients(double T) const {
    return coefficients(T, cfg_.coef.type == "oscillating" ? cfg_.coef.amplitude : 0.0);
  }

  SpaceTimeField forcing(const Weight& beta, const Grid1D& g) const {
    const auto& f = cfg_.forcing;
    if (f.type == "zero") return SpaceTimeField(g);
    if (f.type == "manufactured") return manufactured_forcing(beta, g).scaled(f.amplitude);
    return smooth_forcing(g).scaled(f.amplitude);
  }
  static SpaceTimeField smooth_forcing(const Grid1D& g) {
    return SpaceTimeField::sample(g, [](double x, double t) { return std::sin(3 * x + 1) * (1 + t); });
  }
  std::function<double(double)> initial() const {
    const double a = cfg_.weight.a, k = kPi / (cfg_.weight.b - cfg_.weight.a);
    if (cfg_.forcing.type == "manufactured") {
      const double amp = cfg_.forcing.amplitude;
      return [=](double x) { return amp * std::sin(k * (x - a)); };
    }
    return [](double) { return 0.0; };
  }

  double x_mid() const {
    return cfg_.weight.type == "power" ? cfg_.weight.center : 0.5 * (cfg_.weight.a + cfg_.weight.b);
  }

  std::uint64_t require_seed(const std::string& who) const {
    if (!seed_) config_fail(who + " is randomized and needs a seed (--seed or \"seed\" in the config)");
    return *seed_;
  }

  // ---- output ----
  void emit(const AuditReport& r) {
    if (result_.reports.count(r.name)) fail(ErrorKind::InvalidInput, "duplicate report name " + r.name);
    result_.reports[r.name] = r.pass;
    file(r.name + ".json", report_to_json(r));
    for (const auto& [t, table] : r.tables) file(r.name + "." + t + ".csv", table_to_csv(table));
  }
  void file(const std::string& name, const std::string& text) {
    write_text(out_ / name, text);
    result_.files.push_back(name);
  }
  void svg(const std::string& name, const SvgPlot& p) { file(name + ".svg", plot_to_svg(p)); }

  // Runs an audit; library failures other than bad input become a failing report.
  template <class F>
  void guarded(const std::string& name, const std::string& anchor, F&& f) {
    try {
      AuditReport r = f();
      r.name = name;
      emit(r);
    } catch (const Error& e) {
      if (e.kind() == ErrorKind::ConfigError || e.kind() == ErrorKind::InvalidInput ||
          e.kind() == ErrorKind::IoError)
        throw;
      AuditReport r;
      r.name = name;
      r.anchor = anchor;
      r.pass = false;
      r.notes["error"] = e.what();
      emit(r);
    }
  }

  void write_summary(Stage stage) {
    std::ostringstream o;
    bool all = true;
    for (const auto& kv : result_.reports) all = all && kv.second;
    o << "{\n  \"config\": " << json_string(cfg_.name) << ",\n  \"pass\": " << (all ? "true" : "false")
      << ",\n  \"reports\": {";
    bool first = true;
    for (const auto& [k, v] : result_.reports) {
      o << (first ? "\n" : ",\n") << "    " << json_string(k) << ": " << (v ? "true" : "false");
      first = false;
    }
    o << (result_.reports.empty() ? "},\n" : "\n  },\n");
    o << "  \"seed\": " << (seed_ ? std::to_string(*seed_) : std::string("null")) << ",\n";
    o << "  \"stage\": " << json_string(to_string(stage)) << "\n}\n";
    file("summary.json", o.str());
  }

  // ---- stages ----
  void stage_weights() {
    const auto& o = cfg_.weights;
    if (!o.enabled) return;
    const Weight beta = weight();
    const WeightContext ctx{1, o.M0};
    const BallFamily fam = BallFamily::default_for(beta, o.nodes, o.radii);
    guarded("weights_beta_condition", "inverse weight in A_{1+2/n0}",
            [&] { return check_beta_condition(beta, ctx, fam); });
    guarded("weights_aq", "Muckenhoupt characteristics", [&] {
      AuditReport r;
      r.anchor = "Muckenhoupt characteristics";
      for (double q : o.q) {
        const double v = aq_characteristic(beta, q, fam);
        const std::string key = "A_" + json_number(q);
        r.values[key] = v;
        r.add_row({"[beta]_" + key + " >= 1", v, 1.0, v, std::numeric_limits<double>::infinity(),
                   v >= 1.0 - 1e-12});
      }
      if (cfg_.weight.type == "power") {
        const double L = std::min(cfg_.weight.center - cfg_.weight.a, cfg_.weight.b - cfg_.weight.center);
        if (L > 0.0) r.values["A_2_centered"] = aq_ball_quantity(beta, 2.0, {cfg_.weight.center}, L);
      }
      r.values["reverse_holder_gamma"] = reverse_holder_gamma(beta, fam, o.rh_budget);
      r.values["reverse_holder_budget"] = o.rh_budget;
      return r;
    });
    guarded("weights_doubling", "doubling and measure-ratio properties of the lifted weight",
            [&] { return doubling_report(beta, 0.5 * ctx.n0(), fam, o.theta, ctx); });
  }

  void stage_geometry() {
    const auto& o = cfg_.geometry;
    if (!o.enabled) return;
    const Weight beta = weight();
    const std::uint64_t seed = require_seed("geometry");
    const WeightContext ctx{1, cfg_.weights.M0};
    guarded("geometry_quasi_triangle", "quasi-triangle inequality", [&] {
      return quasi_triangle_audit(beta, QuasiMetricParams::estimate(beta, ctx), o.samples, seed);
    });
    guarded("geometry_cylinders", "relations between weighted cylinders",
            [&] { return cylinder_relations_audit(beta, {{x_mid()}, o.t0}, o.r, o.lattice); });
  }

  void stage_solve() {
    const Weight beta = weight();
    const Grid1D g = base_grid(cfg_.grid.nx, cfg_.grid.T);
    const CoefficientField A = coefficients(g.t1);
    const SpaceTimeField F = forcing(beta, g);
    guarded("solve_norms", "norms of the computed solution", [&] {
      const SolutionField u = solve_ivbp(beta, A, F, g, initial());
      u.write_csv((out_ / "solution.csv").string());
      u.write_binary((out_ / "solution.bin").string());
      result_.files.push_back("solution.csv");
      result_.files.push_back("solution.bin");
      AuditReport r;
      r.anchor = "solution norms";
      r.values = compute_norms(u, A, F, 2.0).as_values();
      r.values["nx"] = g.nx;
      r.values["nt"] = g.nt;
      bool finite = true;
      for (double v : u.values()) finite = finite && std::isfinite(v);
      r.add_row({"solution is finite", 0.0, 0.0, 0.0, 0.0, finite});
      return r;
    });

    const auto& o = cfg_.convergence;
    if (!o.enabled) return;
    guarded("solve_convergence", "manufactured-solution convergence", [&] {
      AuditReport r;
      r.anchor = "manufactured-solution convergence";
      const bool unit = cfg_.coef.type == "constant" && cfg_.coef.value == 1.0 &&
                        cfg_.forcing.type == "manufactured";
      if (!unit) {
        r.notes["skipped"] = "the manufactured solution needs A = 1 and manufactured forcing";
        return r;
      }
      Table t{{"nx", "h", "tau", "l2_error", "order"}, {}};
      std::vector<double> hs, es;
      const auto init = initial();
      const double amp = cfg_.forcing.amplitude;
      for (int j = 0; j <= o.refinements; ++j) {
        const Grid1D gj = base_grid(cfg_.grid.nx << j, cfg_.grid.T);
        const SpaceTimeField Fj = forcing(beta, gj);
        const SolutionField u = solve_ivbp(beta, coefficients(gj.t1), Fj, gj, init);
        const double e = l2_error(u, [&](double x, double tt) { return amp * manufactured_exact(gj, x, tt); });
        const double order = es.empty() ? std::numeric_limits<double>::quiet_NaN() : std::log2(es.back() / e);
        t.rows.push_back({double(gj.nx), gj.hx(), gj.tau(), e, order});
        hs.push_back(gj.hx());
        es.push_back(e);
      }
      double worst = std::numeric_limits<double>::infinity();
      for (std::size_t j = 1; j < es.size(); ++j) worst = std::min(worst, std::log2(es[j - 1] / es[j]));
      r.tables["convergence"] = t;
      r.values["min_order"] = worst;
      std::vector<double> lh, le;
      for (std::size_t j = 0; j < hs.size(); ++j) lh.push_back(std::log(hs[j])), le.push_back(std::log(es[j]));
      r.values["fitted_order"] = fit_slope(lh, le);
      r.add_row({"observed order >= " + json_number(o.min_order), worst, o.min_order, worst, o.min_order,
                 worst >= o.min_order});
      svg("solve_convergence", {"L2 error under refinement", "h", "L2 error", true, true,
                                {{"error", hs, es}}});
      return r;
    });
  }

  AuditReport oscillation_report() const {
    const auto& o = cfg_.oscillation;
    OscillationConfig oc;
    oc.R0 = o.R0;
    oc.delta = o.delta;
    oc.time_points = o.time_points;
    return oscillation_supremum(coefficients(cfg_.grid.T), weight(), oc);
  }

  void stage_audit() {
    const Weight beta = weight();
    bool gate = true;
    if (cfg_.oscillation.enabled) {
      guarded("audit_oscillation", "smallness of the mean oscillations", [&] {
        AuditReport r = oscillation_report();
        gate = r.pass;
        if (!r.pass) r.notes["gate_failed"] = "Theta_A + Theta_beta < delta";
        return r;
      });
    }
    const double T = cfg_.grid.T;
    const double xm = x_mid();

    if (cfg_.energy.enabled) {
      const auto& o = cfg_.energy;
      guarded("audit_energy", "improved Caccioppoli estimate", [&] {
        AuditReport r;
        Table t{{"nx", "N_emp", "N_basic"}, {}};
        std::vector<double> N;
        double scale_gap = 0.0;
        for (int j = 0; j < o.levels; ++j) {
          const Grid1D g = base_grid(cfg_.grid.nx << j, T);
          const SpaceTimeField F = forcing(beta, g);
          const SolutionField u = solve_ivbp(beta, coefficients(T), F, g, initial());
          const SpaceTimePoint z0{{xm}, o.t_frac * T};
          const AuditReport e = energy_audit(u, F, beta, z0, o.r, o.budget, o.basic_budget);
          const AuditReport s = energy_audit(u.scaled(3.5), F.scaled(3.5), beta, z0, o.r, o.budget, o.basic_budget);
          r.anchor = e.anchor;
          absorb(r, e, "nx=" + std::to_string(g.nx) + ": ");
          const double n = e.values.at("N_emp");
          N.push_back(n);
          scale_gap = std::max(scale_gap, n > 0 ? std::abs(s.values.at("N_emp") / n - 1) : 0.0);
          t.rows.push_back({double(g.nx), n, e.rows.size() > 1 ? e.rows[1].constant : 0.0});
        }
        double var = 0.0;
        for (std::size_t j = 1; j < N.size(); ++j)
          if (N[j - 1] > 0) var = std::max(var, std::abs(N[j] / N[j - 1] - 1));
        r.tables["refinement"] = t;
        r.values["max_variation"] = var;
        r.values["scaling_gap"] = scale_gap;
        r.add_row({"N_emp varies < " + json_number(o.max_variation) + " under refinement", var, o.max_variation,
                   var, o.max_variation, var < o.max_variation});
        r.add_row({"N_emp invariant under (u,F) scaling", scale_gap, 1e-10, scale_gap, 1e-10, scale_gap <= 1e-10});
        return r;
      });
    }

    const Grid1D g = base_grid(cfg_.grid.nx, T);
    const CoefficientField A = coefficients(T);
    const SpaceTimeField F = forcing(beta, g);
    const SolutionField u = solve_ivbp(beta, A, F, g, initial());

    if (cfg_.poincare.enabled) {
      const auto& o = cfg_.poincare;
      guarded("audit_poincare_interior", "weighted parabolic Poincare inequality", [&] {
        return poincare_audit(u, F, beta, {{xm}, o.t_frac * T}, o.r, PoincareVariant::Interior, o.budget);
      });
      guarded("audit_poincare_boundary", "weighted parabolic Poincare inequality at the boundary", [&] {
        return poincare_audit(u, F, beta, {{cfg_.weight.a}, o.t_frac * T}, o.r, PoincareVariant::Boundary, o.budget);
      });
    }

    if (cfg_.apriori.enabled) {
      const auto& o = cfg_.apriori;
      for (double p : o.p) {
        const std::string name = "audit_apriori_p" + json_number(p);
        if (p != 2.0 && !gate) {
          AuditReport r;
          r.name = name;
          r.anchor = "global a priori estimate";
          r.notes["skipped"] = "the oscillation gate failed; the estimate is only claimed under it";
          emit(r);
          continue;
        }
        guarded(name, "global a priori estimate", [&] {
          AuditReport r;
          Table t{{"nx", "ratio"}, {}};
          std::vector<double> ratios;
          for (int j = 0; j < o.levels; ++j) {
            const Grid1D gj = base_grid(cfg_.grid.nx << j, o.T);
            const SpaceTimeField Fj = smooth_forcing(gj);
            const CoefficientField Aj = coefficients(o.T);
            const SolutionField uj = solve_ivbp(beta, Aj, Fj, gj, [](double) { return 0.0; });
            const AuditReport a = apriori_ratio(uj, Aj, Fj, p, o.budget);
            r.anchor = a.anchor;
            absorb(r, a, "nx=" + std::to_string(gj.nx) + ": ");
            ratios.push_back(a.values.at("ratio"));
            t.rows.push_back({double(gj.nx), ratios.back()});
          }
          double var = 0.0;
          for (std::size_t j = 1; j < ratios.size(); ++j) var = std::max(var, std::abs(ratios[j] / ratios[j - 1] - 1));
          r.tables["refinement"] = t;
          r.values["ratio"] = ratios.back();
          r.values["max_variation"] = var;
          r.add_row({"ratio varies < " + json_number(o.max_variation) + " under refinement", var, o.max_variation,
                     var, o.max_variation, var < o.max_variation});
          return r;
        });
      }
    }

    if (cfg_.time_shift.enabled) {
      const auto& o = cfg_.time_shift;
      const double a = cfg_.weight.a, L = cfg_.weight.b - cfg_.weight.a;
      const auto phi = [=](double x) {
        const double s = (x - a) / L;
        return s > 0.2 && s < 0.8 ? std::sin(kPi * (s - 0.2) / 0.6) : 0.0;
      };
      guarded("audit_time_shift", "time-shift bound", [&] {
        AuditReport r;
        Table t{{"steps", "h", "lhs", "rhs"}, {}};
        for (double s : o.steps) {
          const AuditReport a = time_shift_audit(u, A, F, phi, int(s), o.budget);
          r.anchor = a.anchor;
          absorb(r, a, "shift=" + json_number(s) + ": ");
          t.rows.push_back({s, a.values.at("h"), a.rows[0].lhs, a.rows[0].rhs});
        }
        r.tables["shifts"] = t;
        return r;
      });
    }

    if (cfg_.freeze.enabled) stage_freeze();
    if (cfg_.inequality.enabled) stage_inequality();
  }

  void stage_freeze() {
    const auto& o = cfg_.freeze;
    const Weight beta = weight();
    guarded("audit_freeze_sweep", "comparison with the frozen-coefficient solution", [&] {
      Grid1D g;
      g.a = cfg_.weight.a;
      g.b = cfg_.weight.b;
      g.nx = o.nx;
      g.t1 = o.T;
      g.nt = o.nt;
      const double a0 = g.a, L = g.b - g.a;
      const auto init = [=](double x) { return std::sin(kPi * (x - a0) / L); };
      const SpaceTimePoint z0{{0.5 * (g.a + g.b)}, o.t_frac * o.T};
      auto run = [&](double amp) {
        const double v = cfg_.coef.value, f = o.frequency;
        const auto A = CoefficientField::sample(
            interval(g.a, g.b), {cfg_.coef.cells}, o.T, 1,
            [=](const Point& x, double) { return scalar(v * (1.0 + amp * std::sin(f * kPi * (x[0] - a0) / L))); },
            cfg_.coef.nu);
        const SolutionField u = solve_ivbp(beta, A, SpaceTimeField(g), g, init);
        return freeze_compare(u, beta, A, SpaceTimeField(g), z0, o.R);
      };
      AuditReport r;
      const AuditReport base = run(0.0);
      r.anchor = base.anchor;
      const double eps0 = base.values.at("epsilon");
      Table t{{"amplitude", "epsilon", "delta", "theta_A"}, {}};
      t.rows.push_back({0.0, eps0, base.values.at("delta"), base.values.at("theta_A")});
      std::vector<double> amps = o.amplitudes;
      std::sort(amps.begin(), amps.end(), std::greater<>());
      std::vector<double> eps;
      for (double a : amps) {
        const AuditReport x = run(a);
        eps.push_back(x.values.at("epsilon"));
        t.rows.push_back({a, eps.back(), x.values.at("delta"), x.values.at("theta_A")});
      }
      bool decreasing = true;
      for (std::size_t j = 1; j < eps.size(); ++j) decreasing = decreasing && eps[j] < eps[j - 1];
      r.tables["sweep"] = t;
      r.values["baseline_epsilon"] = eps0;
      r.values["smallest_amplitude_epsilon"] = eps.back();
      r.add_row({"epsilon strictly decreasing as the amplitude decreases", eps.front(), eps.back(), 0.0, 0.0,
                 decreasing});
      const double ratio = eps0 > 0 ? eps.back() / eps0 : (eps.back() == 0 ? 1.0 : std::numeric_limits<double>::infinity());
      r.values["baseline_ratio"] = ratio;
      r.values["baseline_factor"] = o.baseline_factor;
      r.notes["baseline"] = ratio <= o.baseline_factor
                                ? "smallest amplitude within the baseline factor"
                                : "smallest amplitude above the baseline factor; epsilon is still amplitude dominated";
      std::vector<double> ax(amps.begin(), amps.end());
      svg("audit_freeze_sweep", {"gradient gap against coefficient amplitude", "amplitude", "epsilon", true, true,
                                 {{"epsilon", ax, eps}, {"baseline", {ax.back(), ax.front()}, {eps0, eps0}}}});
      return r;
    });
  }

  void stage_inequality() {
    const auto& o = cfg_.inequality;
    const Weight beta = weight();
    const double a = cfg_.weight.a, L = cfg_.weight.b - cfg_.weight.a;
    const double k = kPi / L;
    const double x0 = x_mid();
    const double r = std::max(x0 - a, cfg_.weight.b - x0);
    const TestFunction s = TestFunction::trigonometric(1.0, k, -k * a);
    guarded("audit_inequality_lq", "weighted L^q control by the weighted L^2 average",
            [&] { return weighted_lq_control_audit(s, beta, o.q, x0, r, o.gamma_lq, o.M0); });
    guarded("audit_inequality_embedding", "weighted Lebesgue embedding", [&] {
      return weighted_embedding_audit(TestFunction::polynomial({1.0, 1.0}), beta, EmbeddingCase::LowDimension,
                                      o.gamma_embed, x0, r);
    });
    guarded("audit_inequality_interpolation", "weighted interpolation inequality on cylinders", [&] {
      SpaceTimeFunction u;
      u.space = s;
      u.time_poly = {1.0, 1.0};
      InterpolationOptions io;
      io.gamma = o.gamma_interp;
      io.r_sweep = {r, r / 2, r / 4};
      return interpolation_audit(u, beta, x0, r, io);
    });
  }

  void stage_levelset() {
    const Weight beta = weight();
    if (cfg_.weak.enabled) {
      const auto& o = cfg_.weak;
      const std::uint64_t seed = require_seed("weak_1_1");
      Grid1D g;
      g.a = cfg_.weight.a;
      g.b = cfg_.weight.b;
      g.nx = o.nx;
      g.nt = o.nt;
      g.t1 = o.T;
      const auto radii = default_maximal_radii(g);
      for (int j = 0; j < o.seeds; ++j) {
        guarded("levelset_weak_1_1_" + std::to_string(j), "weak (1,1) bound for the maximal function", [&] {
          std::mt19937_64 rng(seed + std::uint64_t(j));
          std::uniform_real_distribution<double> d(-1.0, 1.0);
          SpaceTimeField f(g);
          for (double& v : f.values()) v = d(rng) * d(rng) * 3.0;
          return weak_1_1_audit(f, beta, o.lambdas, radii);
        });
      }
    }
    if (cfg_.vitali.enabled) {
      const auto& o = cfg_.vitali;
      const std::uint64_t seed = require_seed("vitali");
      guarded("levelset_vitali", "Vitali covering", [&] {
        std::mt19937_64 rng(seed);
        const double a = cfg_.weight.a, b = cfg_.weight.b;
        std::uniform_real_distribution<double> ux(a, b), ut(0.0, cfg_.grid.T), ur(std::log(o.rmin), std::log(o.rmax));
        std::vector<CenteredCylinder> fam;
        for (int j = 0; j < o.cylinders; ++j) {
          const double x = ux(rng), t = ut(rng), rr = std::exp(ur(rng));
          fam.push_back(centered_cylinder(beta, {{x}, t}, rr));
        }
        return verify_covering(vitali_select(fam), beta);
      });
    }
    if (cfg_.levelset.enabled) {
      const auto& o = cfg_.levelset;
      guarded("levelset_decay", "level-set decay estimate", [&] {
        Grid1D g;
        g.a = cfg_.weight.a;
        g.b = cfg_.weight.b;
        g.nx = o.nx;
        g.nt = o.nt;
        g.t1 = o.T;
        const CoefficientField A = coefficients(o.T);
        const SpaceTimeField F = forcing(beta, g);
        const SolutionField u = solve_ivbp(beta, A, F, g, initial());
        LevelsetOptions lo;
        lo.K = o.K;
        lo.q0 = o.q0;
        lo.m_max = o.m_max;
        lo.delta_hat = o.delta_hat;
        AuditReport r = levelset_decay_audit(u, F, beta, lo);
        const auto& t = r.tables.at("decay");
        std::vector<double> m, lhs, rhs;
        for (const auto& row : t.rows) m.push_back(row[0]), lhs.push_back(row[1]), rhs.push_back(row[2]);
        svg("levelset_decay", {"level-set decay", "m", "measure", false, true, {{"lhs", m, lhs}, {"rhs", m, rhs}}});
        return r;
      });
    }
  }

  BoundaryChart chart(double delta) const {
    const auto& o = cfg_.flatten;
    if (!(delta >= 0.0 && delta < 1.0)) config_fail("audits.flatten delta values must lie in [0, 1)");
    return o.chart == "affine" ? BoundaryChart::affine(delta, o.base) : BoundaryChart::bump(delta, o.base, o.width);
  }

  void stage_flatten() {
    const auto& o = cfg_.flatten;
    if (!o.enabled) return;
    const BoundaryChart c = chart(o.delta);
    for (double d : o.deltas) chart(d);
    const std::uint64_t seed = require_seed("flatten");
    const Box sq = rectangle(-1, 1, -1, 1);

    guarded("flatten_roundtrip", "flattening map round trip", [&] {
      std::mt19937_64 rng(seed);
      std::uniform_real_distribution<double> u(-1.0, 1.0);
      double worst = 0.0, det_gap = 0.0;
      for (int j = 0; j < o.roundtrip; ++j) {
        const Point x{u(rng), u(rng)};
        const Point back = phi_inverse(c, phi_map(c, x));
        worst = std::max({worst, std::abs(back[0] - x[0]), std::abs(back[1] - x[1])});
        det_gap = std::max(det_gap, std::abs(phi_jacobian(c, x).determinant() - 1.0));
      }
      AuditReport r;
      r.anchor = "flattening map and its inverse";
      r.values["max_roundtrip_error"] = worst;
      r.values["max_det_gap"] = det_gap;
      const double tol = 4 * std::numeric_limits<double>::epsilon() * 2.0;
      r.add_row({"Phi^-1(Phi(x)) = x", worst, tol, worst, tol, worst <= tol});
      r.add_row({"det grad Phi = 1", det_gap, 0.0, det_gap, 0.0, det_gap == 0.0});
      return r;
    });
    guarded("flatten_inclusion", "inclusion of balls under the flattening map",
            [&] { return inclusion_audit(c, {o.base, 0.0}, o.r); });
    guarded("flatten_rho", "choice of the flattened cylinder radius",
            [&] { return rho_search(c, {o.base, 0.0}, o.R, o.Lambda, o.rho_radii); });
    const CoefficientField I =
        CoefficientField::constant(sq, {o.cells, o.cells}, 1.0, 1, Matrix::Identity(2, 2), o.nu);
    guarded("flatten_coefficients", "flattened coefficient decomposition A~ = A + B",
            [&] { return pushforward_coefficients(c, I).report; });
    const Weight b2 = Weight::power(sq, o.weight_center, o.weight_alpha);
    const BallFamily fam = BallFamily::default_for(b2, o.fam_nodes, o.fam_radii);
    guarded("flatten_weight", "flattened weight condition and oscillation", [&] {
      return pushforward_weight_audit(c, b2, WeightContext{2, o.M0}, fam, {o.shape, o.shape});
    });
    guarded("flatten_delta_sweep", "delta dependence of the flattened coefficients and weight", [&] {
      DeltaSweepOptions so;
      so.deltas = o.deltas;
      so.weight_center = o.weight_center;
      so.shape = {o.shape, o.shape};
      AuditReport r = flattening_delta_sweep(c, I, fam, so);
      std::vector<double> d, bn, ot;
      for (const auto& row : r.tables.at("delta_sweep").rows) d.push_back(row[0]), bn.push_back(row[1]), ot.push_back(row[2]);
      svg("flatten_delta_sweep", {"flattening against delta", "delta", "size", true, true,
                                  {{"||B||", d, bn}, {"Theta_beta~", d, ot}}});
      return r;
    });
  }

  Config cfg_;
  fs::path out_;
  std::optional<std::uint64_t> seed_;
  RunResult result_;
};

RunResult run_parsed(Stage stage, const json& j, const fs::path& out, std::optional<std::uint64_t> seed) {
  RunResult res;
  try {
    Config cfg = parse_config(j);
    Runner runner(std::move(cfg), out, seed);
    return runner.run(stage);
  } catch (const Error& e) {
    res.exit_code = 2;
    res.message = e.what();
  } catch (const std::exception& e) {
    res.exit_code = 2;
    res.message = std::string("IoError: ") + e.what();
  }
  return res;
}

}  // namespace

std::optional<Stage> parse_stage(const std::string& name) {
  static const std::pair<const char*, Stage> table[] = {
      {"weights", Stage::Weights}, {"geometry", Stage::Geometry}, {"solve", Stage::Solve},
      {"audit", Stage::Audit},     {"levelset", Stage::Levelset}, {"flatten", Stage::Flatten},
      {"all", Stage::All}};
  for (const auto& [n, s] : table)
    if (name == n) return s;
  return std::nullopt;
}

const char* to_string(Stage stage) {
  switch (stage) {
    case Stage::Weights: return "weights";
    case Stage::Geometry: return "geometry";
    case Stage::Solve: return "solve";
    case Stage::Audit: return "audit";
    case Stage::Levelset: return "levelset";
    case Stage::Flatten: return "flatten";
    case Stage::All: return "all";
  }
  return "unknown";
}

RunResult run_experiment_text(Stage stage, const std::string& config_json, const fs::path& out,
                              std::optional<std::uint64_t> seed) {
  json j;
  try {
    j = json::parse(config_json);
  } catch (const json::exception& e) {
    RunResult r;
    r.exit_code = 2;
    r.message = std::string("ConfigError: malformed JSON: ") + e.what();
    return r;
  }
  return run_parsed(stage, j, out, seed);
}

RunResult run_experiment(Stage stage, const fs::path& config, const fs::path& out,
                         std::optional<std::uint64_t> seed) {
  std::ifstream f(config, std::ios::binary);
  if (!f) {
    RunResult r;
    r.exit_code = 2;
    r.message = "ConfigError: cannot read " + config.string();
    return r;
  }
  std::stringstream ss;
  ss << f.rdbuf();
  return run_experiment_text(stage, ss.str(), out, seed);
}

}  // namespace wparab
