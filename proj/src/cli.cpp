#include "seqlr/cli.hpp"

#include <fmt/format.h>
#include <fmt/os.h>
#include <fmt/ostream.h>

#include <algorithm>
#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>
#include <charconv>
#include <chrono>
#include <cmath>
#include <fstream>
#include <iostream>
#include <numbers>
#include <sstream>

#include "json.hpp"
#include "seqlr/constants.hpp"
#include "seqlr/errors.hpp"
#include "seqlr/parallel.hpp"
#include "seqlr/response.hpp"

namespace seqlr::cli {

namespace {

constexpr const char* kVersion = "0.1.0";

using boost::property_tree::ptree;
using nlohmann::json;
namespace fs = std::filesystem;

// Section names may contain '.', so tree paths use '/'.
ptree::path_type key(const std::string& field) { return ptree::path_type(field, '/'); }

std::string display(std::string field) {
  std::replace(field.begin(), field.end(), '/', '.');
  return field;
}

std::string_view trim(std::string_view s) {
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
  return s;
}

std::vector<std::string> split(std::string_view s, char sep) {
  std::vector<std::string> out;
  if (trim(s).empty()) return out;
  std::size_t start = 0;
  while (true) {
    const auto pos = s.find(sep, start);
    out.emplace_back(trim(s.substr(start, pos == std::string_view::npos ? std::string_view::npos : pos - start)));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return out;
}

template <class T>
T parse_value(std::string_view text, const std::string& field) {
  text = trim(text);
  T v{};
  if constexpr (std::is_same_v<T, bool>) {
    if (text == "true" || text == "yes" || text == "1") return true;
    if (text == "false" || text == "no" || text == "0") return false;
  } else if constexpr (std::is_same_v<T, std::string>) {
    return std::string(text);
  } else {
    const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
    if (ec == std::errc() && ptr == text.data() + text.size()) return v;
  }
  throw ConfigError(fmt::format("field '{}': cannot parse '{}'", display(field), text));
}

class Reader {
 public:
  explicit Reader(const ptree& t) : t_(t) {}

  bool has(const std::string& field) const { return t_.get_optional<std::string>(key(field)).has_value(); }
  bool has_section(const std::string& name) const { return t_.get_child_optional(key(name)).has_value(); }

  template <class T>
  std::optional<T> get(const std::string& field) const {
    const auto raw = t_.get_optional<std::string>(key(field));
    if (!raw) return std::nullopt;
    return parse_value<T>(*raw, field);
  }

  template <class T>
  T require(const std::string& field) const {
    if (auto v = get<T>(field)) return *v;
    throw ConfigError(fmt::format("missing field '{}'", display(field)));
  }

  template <class T>
  T get_or(const std::string& field, T fallback) const {
    if (auto v = get<T>(field)) return *v;
    return fallback;
  }

 private:
  const ptree& t_;
};

std::vector<FourierTerm> parse_terms(const std::string& text, const std::string& field) {
  std::vector<FourierTerm> out;
  for (const auto& item : split(text, ',')) {
    const auto parts = split(item, ':');
    if (parts.size() != 3)
      throw ConfigError(fmt::format("field '{}': term '{}' is not k:a:b", display(field), item));
    out.push_back({parse_value<int>(parts[0], field), parse_value<double>(parts[1], field),
                   parse_value<double>(parts[2], field)});
  }
  return out;
}

std::vector<double> parse_list(const std::string& text, const std::string& field) {
  std::vector<double> out;
  for (const auto& item : split(text, ',')) out.push_back(parse_value<double>(item, field));
  return out;
}

std::optional<fs::path> relative_path(const Reader& r, const std::string& field, const fs::path& base) {
  auto s = r.get<std::string>(field);
  if (!s || s->empty()) return std::nullopt;
  fs::path p(*s);
  return p.is_absolute() ? p : base / p;
}

MapSpec parse_map(const Reader& r, const std::string& section, const std::string& name, const fs::path& base) {
  MapSpec m;
  m.name = name;
  m.degree = r.require<int>(section + "/degree");
  m.terms = parse_terms(r.get_or<std::string>(section + "/terms", ""), section + "/terms");
  if (r.has(section + "/dot")) m.dot = parse_terms(r.require<std::string>(section + "/dot"), section + "/dot");
  m.base_file = relative_path(r, section + "/base_file", base);
  m.dot_file = relative_path(r, section + "/dot_file", base);
  return m;
}

ScheduleKind parse_schedule_kind(const std::string& s) {
  if (s == "constant") return ScheduleKind::Constant;
  if (s == "periodic") return ScheduleKind::Periodic;
  if (s == "parametric") return ScheduleKind::Parametric;
  if (s == "random") return ScheduleKind::SeededRandom;
  throw ConfigError(fmt::format("field 'schedule.kind': unknown schedule '{}'", s));
}

// ---------------------------------------------------------------------------

CircleMap circle_map(const MapSpec& m) { return CircleMap(m.degree, TrigPolynomial(m.terms)); }

DensityGrid sample_terms(int n, const std::vector<FourierTerm>& terms) {
  const TrigPolynomial p(terms);
  return DensityGrid::sample(n, [&](double x) { return p.value(x); });
}

DriftMap drift_map(const MapSpec& m, const std::vector<FourierTerm>& default_dot, int n) {
  DensityGrid dot = m.dot_file ? read_density_csv(*m.dot_file) : sample_terms(n, m.dot.empty() ? default_dot : m.dot);
  if (dot.size() != n) throw DimensionMismatch(fmt::format("drift direction for '{}' has {} points", m.name, dot.size()));
  if (m.base_file) {
    DensityGrid base = read_density_csv(*m.base_file);
    if (base.size() != n) throw DimensionMismatch(fmt::format("drift base for '{}' has {} points", m.name, base.size()));
    return DriftMap(std::move(base), std::move(dot));
  }
  return DriftMap(LiftMap(m.degree, TrigPolynomial(m.terms)), std::move(dot));
}

NoiseDensity noise_density(const ExperimentConfig& c) {
  if (c.noise_file) return NoiseDensity(read_density_csv(*c.noise_file));
  return NoiseDensity::from_preset(c.noise_preset, c.n);
}

SequenceSystem make_system(const ExperimentConfig& c, Window w, double eps) {
  Schedule s;
  s.kind = c.schedule;
  s.amplitude = c.amplitude;
  s.period = c.period;
  s.seed = c.schedule_seed;
  if (c.mode == SystemMode::Deterministic) {
    std::vector<CircleMap> maps;
    for (const auto& m : c.maps) maps.push_back(circle_map(m));
    return SequenceSystem::deterministic(w, s, std::move(maps),
                                         KickField(TrigPolynomial(c.kick_field), TrigPolynomial(c.kick_remainder)),
                                         eps, c.n);
  }
  std::vector<DriftMap> drifts;
  for (const auto& m : c.maps) drifts.push_back(drift_map(m, c.drift_dot, c.n));
  return SequenceSystem::noisy(w, s, std::move(drifts), noise_density(c), eps, c.n);
}

// Largest |eps| keeping every scheduled kicked map expanding and the kick a
// diffeomorphism.
double admissible_eps(const ExperimentConfig& c) {
  if (c.mode == SystemMode::Noisy) return INFINITY;
  const KickField k(TrigPolynomial(c.kick_field), TrigPolynomial(c.kick_remainder));
  const double lip = k.field_lipschitz();
  if (lip == 0.0 && TrigPolynomial(c.kick_remainder).is_zero()) return INFINITY;
  double lambda = INFINITY;
  const SequenceSystem sys = make_system(c, {0, 0}, 0.0);
  for (const auto& m : c.maps) lambda = std::min(lambda, constants(circle_map(m)).lambda0);
  if (c.schedule == ScheduleKind::Parametric)
    for (int n = 0; n < std::max(c.period, 64); ++n) lambda = std::min(lambda, constants(sys.map_at(n)).lambda0);
  const double r = probe_sup_norms(TrigPolynomial(c.kick_remainder)).c1;
  // Solve (1 - e lip - e^2 r) lambda = 1 and e lip + e^2 r = 0.5 for e > 0.
  auto root = [&](double target) {
    if (r == 0.0) return target / lip;
    return (-lip + std::sqrt(lip * lip + 4.0 * r * target)) / (2.0 * r);
  };
  return std::min(root(1.0 - 1.0 / lambda), root(0.5));
}

void require_admissible(const ExperimentConfig& c, double eps) {
  const double e0 = admissible_eps(c);
  if (!(std::abs(eps) < e0))
    throw KickTooLarge(fmt::format("|eps| = {} is not below the admissible bound {:.6g}", eps, e0));
}

// ---------------------------------------------------------------------------

struct Context {
  const ExperimentConfig& cfg;
  const Invocation& inv;
  std::ostream& out;
  std::ostream& err;
  json outputs = json::array();
  json extra = json::object();

  fs::path path(const std::string& name) {
    outputs.push_back(name);
    return cfg.output / name;
  }

  void write_json(const std::string& name, const json& j) {
    std::ofstream f(path(name));
    f << j.dump(2) << '\n';
  }

  void write_gnuplot(const std::string& name, const std::string& body) {
    if (!inv.emit_gnuplot) return;
    std::ofstream f(path(name));
    f << body;
  }
};

struct Rate {
  RateBound bound;
  std::optional<Certificate> certificate;
};

Rate system_rate(Context& ctx, const SequenceSystem& sys) {
  const auto& c = ctx.cfg;
  if (c.mode == SystemMode::Noisy) return {doeblin_rate(sys.noise()), std::nullopt};
  const CircleMap t0 = circle_map(c.reference);
  Certificate cert = certify(t0, c.n);
  const double dist = sys.max_distance_to(t0);
  ctx.extra["max_c2_distance_to_reference"] = dist;
  ctx.extra["delta_star"] = cert.delta_star;
  if (dist > cert.delta_star) {
    const std::string msg =
        fmt::format("scheduled maps reach C2 distance {:.6g} from the reference, beyond delta* = {:.6g}", dist,
                    cert.delta_star);
    if (c.certified) throw InvalidSystem(msg);
    fmt::print(ctx.err, "warning: {}\n", msg);
    ctx.extra["warning"] = msg;
  }
  return {rate_bound(cert), std::move(cert)};
}

int burn_in_for(const ExperimentConfig& c, const RateBound& r) {
  return c.burn_in ? *c.burn_in : default_burn_in(r.C, r.rho, c.pullback_tolerance);
}

DensityGrid seed_density(const ExperimentConfig& c) {
  if (c.seed_file) {
    DensityGrid s = read_density_csv(*c.seed_file);
    if (s.size() != c.n) throw DimensionMismatch("seed density grid differs from grid.n");
    return normalize(s);
  }
  return DensityGrid::constant(c.n, 1.0);
}

json certificate_json(const Certificate& cert) { return to_json(cert); }

// ---------------------------------------------------------------------------

int cmd_certify(Context& ctx) {
  const auto& c = ctx.cfg;
  const CircleMap t0 = circle_map(c.reference);
  const Certificate cert = certify(t0, c.n);
  json j = certificate_json(cert);
  if (c.mode == SystemMode::Deterministic && !c.maps.empty()) {
    json maps = json::array();
    for (const auto& m : c.maps) {
      const CircleMap t = circle_map(m);
      const DisplacementBounds d = displacement_bounds(t0, t);
      maps.push_back({{"name", m.name},
                      {"c2_distance", d.delta},
                      {"within_delta_star", d.delta <= cert.delta_star},
                      {"displacement", to_json(d)}});
    }
    j["schedule_maps"] = maps;
  }
  ctx.write_json("certificate.json", j);
  fmt::print(ctx.out, "certificate: delta* = {:.6g}, M = {}, rho = {:.6g}, C_ELoM = {:.6g}, C(T0) = {:.6g} ({})\n",
             cert.delta_star, cert.M, cert.elom_rate, cert.elom_C, cert.C_T0,
             cert.verified() ? "numerically certified" : "FAILED");
  return cert.verified() ? 0 : 4;
}

int cmd_equivariant(Context& ctx) {
  const auto& c = ctx.cfg;
  const SequenceSystem probe = make_system(c, c.window.value_or(Window{0, 0}), c.eps);
  const Rate rate = system_rate(ctx, probe);
  const int burn = burn_in_for(c, rate.bound);
  const Window w = c.window.value_or(Window{0, 2 * burn + c.report});
  const SequenceSystem sys = make_system(c, w, c.eps);
  const EquivariantFamily fam = pullback_equivariant(sys, burn, seed_density(c), c.pullback_tolerance);

  fs::create_directories(c.output / "mu");
  json idx = json::array();
  for (int n = fam.first_index; n <= fam.last_index(); ++n) {
    const std::string file = fmt::format("mu/mu_{}.csv", n);
    write_density_csv(ctx.path(file), fam.at(n));
    const double res = n == fam.first_index ? 0.0 : norm_l1(fam.at(n) - apply(sys.step(n - 1), fam.at(n - 1)));
    idx.push_back({{"n", n}, {"file", file}, {"mass", mass(fam.at(n))}, {"w11_norm", norm_w11(fam.at(n))},
                   {"residual", res}});
  }
  json j{{"burn_in", burn},
         {"window", {w.lo, w.hi}},
         {"convergence_residual", fam.convergence_residual},
         {"equivariance_residual", fam.equivariance_residual},
         {"indices", idx}};
  if (c.two_seed) {
    const auto other =
        normalize(DensityGrid::sample(c.n, [](double x) { return 1.0 + 0.9 * std::cos(2 * std::numbers::pi * x); }));
    const EquivariantFamily fam2 = pullback_equivariant(sys, burn, other, c.pullback_tolerance);
    double d = 0.0;
    for (int n = fam.first_index; n <= fam.last_index(); ++n) d = std::max(d, norm_l1(fam.at(n) - fam2.at(n)));
    const double bound = 10.0 * std::max(fam.convergence_residual, fam2.convergence_residual);
    j["uniqueness"] = {{"second_seed", "1 + 0.9 cos(2 pi x)"},
                       {"max_l1_distance", d},
                       {"bound", bound},
                       {"agree", d <= std::max(bound, 1e-12)}};
    fmt::print(ctx.out, "two-seed distance {:.3e} (bound {:.3e})\n", d, bound);
  }
  ctx.write_json("equivariant.json", j);
  ctx.write_gnuplot("equivariant.gp", fmt::format("set datafile separator ','\nset key autotitle columnhead\n"
                                                  "plot 'mu/mu_{0}.csv' using 1:2 with lines title 'mu_{0}'\n",
                                                  fam.first_index));
  fmt::print(ctx.out, "equivariant family on [{}, {}], burn-in {}, residual {:.3e}\n", fam.first_index,
             fam.last_index(), burn, fam.convergence_residual);
  return 0;
}

int cmd_memory(Context& ctx) {
  const auto& c = ctx.cfg;
  const Window w = c.window.value_or(Window{std::min(0, c.memory_start), c.memory_start + c.memory_k_max});
  const SequenceSystem sys = make_system(c, w, c.eps);
  const Rate rate = system_rate(ctx, sys);
  DensityGrid v = DensityGrid::sample(
      c.n, [k = c.memory_harmonic](double x) { return std::cos(2 * std::numbers::pi * k * x); });
  if (c.memory_file) {
    v = read_density_csv(*c.memory_file);
    if (std::abs(mass(v)) > 1e-12) throw ConfigError("field 'memory.file': density must have zero mass");
  }
  const MemoryDecay m = memory_decay(sys, v, c.memory_start, c.memory_k_max);
  {
    auto f = fmt::output_file(ctx.path("memory.csv").string());
    f.print("k,w11,l1\n");
    f.print("0,{:.17g},{:.17g}\n", m.initial_w11, m.initial_l1);
    for (const auto& p : m.points) f.print("{},{:.17g},{:.17g}\n", p.k, p.w11, p.l1);
  }
  ctx.write_json("memory.json", {{"fitted_rate", m.fitted_rate},
                                 {"certified_rate", rate.bound.rho},
                                 {"certified_C", rate.bound.C},
                                 {"norm", rate.bound.norm},
                                 {"start", c.memory_start},
                                 {"k_max", c.memory_k_max},
                                 {"initial_w11", m.initial_w11},
                                 {"initial_l1", m.initial_l1}});
  ctx.write_gnuplot("memory.gp", "set datafile separator ','\nset key autotitle columnhead\nset logscale y\n"
                                 "plot 'memory.csv' using 1:2 with linespoints, '' using 1:3 with linespoints\n");
  fmt::print(ctx.out, "fitted rate {:.4g} (certified {:.6g})\n", m.fitted_rate, rate.bound.rho);
  return 0;
}

int cmd_respond(Context& ctx) {
  const auto& c = ctx.cfg;
  for (double e : c.eps_list) require_admissible(c, e);
  const SequenceSystem probe = make_system(c, c.window.value_or(Window{0, 0}), 0.0);
  const Rate rate = system_rate(ctx, probe);
  const int burn = burn_in_for(c, rate.bound);
  const DensityGrid seed = seed_density(c);

  Window w{0, 0};
  if (c.window) {
    w = *c.window;
  } else {
    // Size the window from a short pilot family.
    const SequenceSystem pilot = make_system(c, {0, 2 * burn + 2}, 0.0);
    const EquivariantFamily pf = pullback_equivariant(pilot, burn, seed, c.pullback_tolerance);
    double sup_g = 0.0;
    for (const auto& g : forcing(pilot, pf).values)
      sup_g = std::max(sup_g, rate.bound.norm == "L1" ? norm_l1(g) : norm_w11(g));
    const int K = c.truncation ? *c.truncation : default_truncation(rate.bound, 1.5 * sup_g, c.tail_tolerance);
    w = {0, std::max(2 * burn, burn + K + 1 + c.report)};
  }
  const SequenceSystem sys = make_system(c, w, 0.0);
  const EquivariantFamily fam = pullback_equivariant(sys, burn, seed, c.pullback_tolerance);
  const IndexedSequence g = forcing(sys, fam);
  const ResponseReport report = c.truncation
                                    ? neumann_response(sys, g, *c.truncation, rate.bound, c.tail_tolerance)
                                    : neumann_response_auto(sys, g, rate.bound, c.tail_tolerance);
  fs::create_directories(c.output / "eta");
  for (int n = report.eta.first_index; n <= report.eta.last_index(); ++n)
    write_density_csv(ctx.path(fmt::format("eta/eta_{}.csv", n)), report.eta.at(n));

  json rj = to_json(report);
  rj["burn_in"] = burn;
  rj["window"] = {w.lo, w.hi};
  double worst_mass = 0.0;
  for (double m : report.masses) worst_mass = std::max(worst_mass, std::abs(m));
  rj["mass_ok"] = worst_mass <= 1e-8;
  ctx.write_json("response.json", rj);

  int code = 0;
  if (!c.eps_list.empty()) {
    const auto fd = finite_difference_response(sys, c.eps_list, burn, seed, c.symmetric, c.pullback_tolerance);
    const ValidationSummary v = validate(report, fd, c.validate_tolerance);
    json vj = to_json(v);
    vj["symmetric"] = c.symmetric;
    ctx.write_json("validation.json", vj);
    for (const auto& e : v.entries) fmt::print(ctx.out, "eps {:.3g}: D = {:.3e}\n", e.eps, e.D);
    fmt::print(ctx.out, "validation {}\n", v.pass ? "passed" : "FAILED");
    if (!v.pass) code = 4;
  }
  ctx.write_gnuplot("respond.gp", fmt::format("set datafile separator ','\nset key autotitle columnhead\n"
                                              "plot 'eta/eta_{0}.csv' using 1:2 with lines title 'eta_{0}'\n",
                                              report.eta.first_index));
  fmt::print(ctx.out, "response on [{}, {}], K = {}, tail bound {:.3e}, resolvent residual {:.3e}\n",
             report.eta.first_index, report.eta.last_index(), report.K, report.tail_bound,
             report.resolvent_residual);
  return code;
}

int cmd_simulate(Context& ctx) {
  const auto& c = ctx.cfg;
  if (c.mode != SystemMode::Noisy) throw InvalidSystem("simulate needs experiment.mode = noisy");
  const double eps = c.sim_eps.value_or(c.eps);
  const int lo = c.window ? c.window->lo : 0;
  const SequenceSystem sys = make_system(c, {lo, lo + c.steps}, eps);
  std::vector<DriftMap> drifts;
  for (int s = 0; s < c.steps; ++s) drifts.push_back(sys.drift_at(lo + s));
  const Histogram sim = simulate_marginal(drifts, eps, sys.noise(), c.steps, c.samples, c.sim_seed, c.bins);
  const Histogram op = bin_density(compose(sys, lo, c.steps, DensityGrid::constant(c.n, 1.0)), c.bins);
  write_histogram_csv(ctx.path("histogram.csv"), sim);
  write_histogram_csv(ctx.path("operator_histogram.csv"), op);
  const double d = histogram_l1_distance(sim, op);
  ctx.write_json("simulate.json", {{"l1_distance", d},
                                   {"samples", c.samples},
                                   {"bins", c.bins},
                                   {"steps", c.steps},
                                   {"seed", c.sim_seed},
                                   {"eps", eps}});
  ctx.write_gnuplot("simulate.gp", "set datafile separator ','\nset key autotitle columnhead\n"
                                   "plot 'histogram.csv' using 1:2 with steps title 'Monte Carlo', "
                                   "'operator_histogram.csv' using 1:2 with steps title 'operator'\n");
  fmt::print(ctx.out, "Monte Carlo vs operator L1 distance {:.4g}\n", d);
  return 0;
}

void write_manifest(Context& ctx, int code, double seconds) {
  json j{{"command", ctx.inv.command},
         {"config", ctx.cfg.source.string()},
         {"config_hash", fmt::format("{:016x}", ctx.cfg.hash)},
         {"versions", {{"seqlr", kVersion}, {"fmt", FMT_VERSION}, {"compiler", __VERSION__}}},
         {"threads", thread_count()},
         {"wall_time_seconds", seconds},
         {"exit_code", code},
         {"outputs", ctx.outputs}};
  if (!ctx.extra.empty()) j["notes"] = ctx.extra;
  std::ofstream f(ctx.cfg.output / "manifest.json");
  f << j.dump(2) << '\n';
}

}  // namespace

std::uint64_t fnv1a(std::string_view bytes) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char ch : bytes) {
    h ^= ch;
    h *= 0x100000001b3ULL;
  }
  return h;
}

ExperimentConfig load_config(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError(fmt::format("cannot open config '{}'", path.string()));
  std::stringstream buf;
  buf << in.rdbuf();
  const std::string text = buf.str();

  ptree tree;
  try {
    std::istringstream s(text);
    boost::property_tree::ini_parser::read_ini(s, tree);
  } catch (const boost::property_tree::ini_parser_error& e) {
    throw ConfigError(fmt::format("{}: line {}: {}", path.string(), e.line(), e.message()));
  }
  const Reader r(tree);
  const fs::path base = path.parent_path();

  ExperimentConfig c;
  c.source = path;
  c.hash = fnv1a(text);

  c.output = relative_path(r, "run/output", base).value_or(base / "out");
  c.threads = static_cast<unsigned>(r.get_or<int>("run/threads", 0));
  c.certified = r.get_or<bool>("run/certified", false);

  c.n = r.require<int>("grid/n");
  if (c.n < 16 || c.n % 2 != 0) throw ConfigError(fmt::format("field 'grid.n': {} must be even and >= 16", c.n));

  const auto mode = r.require<std::string>("experiment/mode");
  if (mode == "deterministic") c.mode = SystemMode::Deterministic;
  else if (mode == "noisy") c.mode = SystemMode::Noisy;
  else throw ConfigError(fmt::format("field 'experiment.mode': unknown mode '{}'", mode));

  c.reference = parse_map(r, "reference", "reference", base);

  c.schedule = parse_schedule_kind(r.get_or<std::string>("schedule/kind", "constant"));
  const auto names = split(r.get_or<std::string>("schedule/maps", ""), ',');
  if (names.empty()) {
    c.maps.push_back(c.reference);
  } else {
    for (const auto& name : names) {
      const std::string section = "map." + name;
      if (!r.has_section(section)) throw ConfigError(fmt::format("missing section '[{}]'", section));
      c.maps.push_back(parse_map(r, section, name, base));
    }
  }
  c.amplitude = r.get_or<double>("schedule/amplitude", 0.0);
  c.period = r.get_or<int>("schedule/period", 0);
  c.schedule_seed = static_cast<std::uint64_t>(r.get_or<long long>("schedule/seed", 0));
  if (c.schedule == ScheduleKind::Parametric && c.mode == SystemMode::Noisy)
    throw ConfigError("field 'schedule.kind': parametric schedules need deterministic mode");
  if (const auto w = r.get<std::string>("schedule/window"); w && *w != "auto") {
    const auto v = parse_list(*w, "schedule/window");
    if (v.size() != 2 || v[1] < v[0]) throw ConfigError("field 'schedule.window': expected 'lo, hi' with lo <= hi");
    c.window = Window{static_cast<int>(v[0]), static_cast<int>(v[1])};
  }

  if (c.mode == SystemMode::Deterministic) {
    c.kick_field = parse_terms(r.require<std::string>("kick/field"), "kick/field");
    c.kick_remainder = parse_terms(r.get_or<std::string>("kick/remainder", ""), "kick/remainder");
  } else {
    c.noise_file = relative_path(r, "noise/file", base);
    if (!c.noise_file) c.noise_preset = r.require<std::string>("noise/preset");
    c.drift_dot = parse_terms(r.get_or<std::string>("drift/dot", ""), "drift/dot");
  }

  c.eps = r.get_or<double>("experiment/eps", 0.0);
  c.eps_list = parse_list(r.get_or<std::string>("experiment/eps_list", ""), "experiment/eps_list");
  for (double e : c.eps_list)
    if (!(e > 0.0)) throw ConfigError(fmt::format("field 'experiment.eps_list': {} is not positive", e));
  c.symmetric = r.get_or<bool>("experiment/symmetric", false);
  if (const auto b = r.get<std::string>("experiment/burn_in"); b && *b != "auto")
    c.burn_in = parse_value<int>(*b, "experiment/burn_in");
  if (const auto k = r.get<std::string>("experiment/truncation"); k && *k != "auto")
    c.truncation = parse_value<int>(*k, "experiment/truncation");
  c.tail_tolerance = r.get_or<double>("experiment/tolerance", c.tail_tolerance);
  c.validate_tolerance = r.get_or<double>("experiment/validate_tolerance", c.validate_tolerance);
  c.pullback_tolerance = r.get_or<double>("experiment/pullback_tolerance", c.pullback_tolerance);
  c.report = r.get_or<int>("experiment/report", c.report);
  c.two_seed = r.get_or<bool>("experiment/two_seed", false);
  c.seed_file = relative_path(r, "experiment/seed_file", base);

  c.memory_start = r.get_or<int>("memory/start", c.memory_start);
  c.memory_k_max = r.get_or<int>("memory/k_max", c.memory_k_max);
  c.memory_harmonic = r.get_or<int>("memory/harmonic", c.memory_harmonic);
  c.memory_file = relative_path(r, "memory/file", base);

  c.samples = r.get_or<long>("simulate/samples", c.samples);
  c.steps = r.get_or<int>("simulate/steps", c.steps);
  c.bins = r.get_or<int>("simulate/bins", c.bins);
  c.sim_seed = static_cast<std::uint64_t>(r.get_or<long long>("simulate/seed", 1));
  c.sim_eps = r.get<double>("simulate/eps");
  return c;
}

int run(const Invocation& inv, std::ostream& out, std::ostream& err) {
  const auto& known = commands();
  if (std::find(known.begin(), known.end(), inv.command) == known.end()) {
    fmt::print(err, "error: unknown command '{}'\n", inv.command);
    return 1;
  }
  std::optional<ExperimentConfig> cfg;
  try {
    cfg = load_config(inv.config);
  } catch (const Error& e) {
    fmt::print(err, "error: {}\n", e.what());
    return static_cast<int>(e.category());
  }
  fs::create_directories(cfg->output);
  set_thread_count(cfg->threads);
  Context ctx{*cfg, inv, out, err};
  const auto t0 = std::chrono::steady_clock::now();
  int code = 0;
  try {
    if (inv.command == "certify") code = cmd_certify(ctx);
    else if (inv.command == "equivariant") code = cmd_equivariant(ctx);
    else if (inv.command == "memory") code = cmd_memory(ctx);
    else if (inv.command == "respond") code = cmd_respond(ctx);
    else code = cmd_simulate(ctx);
  } catch (const TailNotSmall& e) {
    fmt::print(err, "error: {}\nrequired truncation order K = {}\n", e.what(), e.required_order);
    code = 4;
  } catch (const Error& e) {
    fmt::print(err, "error: {}\n", e.what());
    code = static_cast<int>(e.category());
  } catch (const std::invalid_argument& e) {
    fmt::print(err, "error: {}\n", e.what());
    code = 1;
  }
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  write_manifest(ctx, code, secs);
  return code;
}

}  // namespace seqlr::cli
