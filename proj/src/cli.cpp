#include "layerlab/cli.hpp"

#include <CLI11.hpp>
#include <algorithm>
#include <charconv>
#include <chrono>
#include <cstdlib>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <json.hpp>
#include <map>
#include <optional>
#include <sstream>

#include "layerlab/girsanov.hpp"
#include "layerlab/limits.hpp"
#include "layerlab/qfunc.hpp"
#include "layerlab/series.hpp"
#include "layerlab/special.hpp"
#include "layerlab/spherical.hpp"
#include "layerlab/stats.hpp"

namespace layerlab::cli {

namespace {

using json = nlohmann::ordered_json;

struct IoError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

std::string fmt(double v) {
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v, std::chars_format::general, 17);
  return std::string(buf, ptr);
}

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

// `key = value` lines; '#' starts a comment. Returns --key=value arguments.
std::vector<std::string> read_config_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot read config file '" + path + "'");
  std::vector<std::string> args;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw DomainError(path + ":" + std::to_string(lineno) + ": expected key = value");
    std::string key = trim(line.substr(0, eq));
    std::string value = trim(line.substr(eq + 1));
    if (value.size() >= 2 && value.front() == '"' && value.back() == '"')
      value = value.substr(1, value.size() - 2);
    for (char& c : key)
      if (c == '_') c = '-';
    if (key.empty() || key == "config" || key == "manifest")
      throw DomainError(path + ":" + std::to_string(lineno) + ": invalid key '" + key + "'");
    args.push_back("--" + key + "=" + value);
  }
  return args;
}

std::vector<std::string> read_manifest(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot read manifest '" + path + "'");
  json m;
  try {
    in >> m;
  } catch (const json::exception& e) {
    throw DomainError("manifest '" + path + "' is not valid JSON: " + e.what());
  }
  if (!m.contains("config") || !m["config"].is_object())
    throw DomainError("manifest '" + path + "' has no config object");
  std::vector<std::string> args;
  for (const auto& [key, value] : m["config"].items()) {
    std::string text;
    if (value.is_string()) text = value.get<std::string>();
    else if (value.is_boolean()) text = value.get<bool>() ? "true" : "false";
    else if (value.is_number_unsigned()) text = std::to_string(value.get<std::uint64_t>());
    else if (value.is_number_integer()) text = std::to_string(value.get<std::int64_t>());
    else if (value.is_number()) text = fmt(value.get<double>());
    else throw DomainError("manifest key '" + key + "' has an unsupported type");
    std::string flag = key;
    for (char& c : flag)
      if (c == '_') c = '-';
    args.push_back("--" + flag + "=" + text);
  }
  return args;
}

// Moves --config/--manifest files into leading --key=value arguments so that
// explicit command-line flags take precedence.
std::vector<std::string> expand_files(const std::vector<std::string>& args) {
  std::vector<std::string> head, tail;
  for (std::size_t i = 0; i < args.size(); ++i) {
    const std::string& a = args[i];
    for (const std::string name : {"--config", "--manifest"}) {
      std::optional<std::string> file;
      if (a == name) {
        if (i + 1 >= args.size()) throw DomainError(name + " needs a file argument");
        file = args[++i];
      } else if (a.starts_with(name + "=")) {
        file = a.substr(name.size() + 1);
      }
      if (file) {
        auto extra = name == "--config" ? read_config_file(*file) : read_manifest(*file);
        head.insert(head.end(), extra.begin(), extra.end());
        goto next;
      }
    }
    tail.push_back(a);
  next:;
  }
  head.insert(head.end(), tail.begin(), tail.end());
  return head;
}

void write_file(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write '" + path + "'");
  out << content;
  out.close();
  if (!out) throw IoError("write failed for '" + path + "'");
}

std::string path_csv(const SamplePath& p) {
  std::string s = "t";
  for (std::size_t c = 0; c < p.dimension(); ++c) s += ",x" + std::to_string(c + 1);
  s += '\n';
  for (std::size_t k = 0; k < p.grid().size(); ++k) {
    s += fmt(p.grid()[k]);
    for (std::size_t c = 0; c < p.dimension(); ++c) s += "," + fmt(p.value(k)[c]);
    s += '\n';
  }
  return s;
}

std::string path_json(const SamplePath& p) {
  json j;
  j["t"] = p.grid();
  json xs = json::array();
  for (std::size_t k = 0; k < p.grid().size(); ++k) xs.push_back(p.value_vec(k));
  j["x"] = xs;
  return j.dump() + "\n";
}

// ---------------------------------------------------------------------------
// Process model shared by the subcommands

struct Model {
  std::string process = "layered";
  double alpha = 1.3;
  double beta = 1.9;
  std::string sigma = "discrete:[(1):1,(-1):1]";
  std::string q = "canonical";
  double qmass = 0.0;
  std::string base = "inner";
  std::string mix;
  bool residual = false;
};

struct Built {
  std::optional<SphericalMeasure> sigma;
  std::optional<LayeredQ> q;
  std::optional<MixingLaw> mix;
  RejectionBase base = RejectionBase::Inner;
};

void add_model_options(CLI::App* app, Model& m) {
  app->add_option("--process", m.process, "stable | layered | layered-rejection | mixed")
      ->check(CLI::IsMember({"stable", "layered", "layered-rejection", "mixed"}));
  app->add_option("--alpha", m.alpha, "inner (or stable) index");
  app->add_option("--beta", m.beta, "outer index");
  app->add_option("--sigma", m.sigma, "discrete:[(x1,...,xd):w, ...] or uniform:d:mass");
  app->add_option("--q", m.q, "canonical | smooth")->check(CLI::IsMember({"canonical", "smooth"}));
  app->add_option("--qmass", m.qmass, "normalizing mass of q (default: total mass of sigma)");
  app->add_option("--base", m.base, "rejection base: inner | outer")
      ->check(CLI::IsMember({"inner", "outer"}));
  app->add_option("--mix", m.mix, "mixing law: discrete:a:w,... or uniform:a:b");
  app->add_flag("--residual", m.residual, "add the Gaussian approximation of truncated jumps");
}

Built build_model(const Model& m) {
  Built b;
  b.sigma = SphericalMeasure::parse(m.sigma);
  const double qmass = m.qmass > 0.0 ? m.qmass : b.sigma->total_mass();
  if (m.qmass < 0.0) throw DomainError("qmass must be positive");
  if (m.process == "stable") {
    if (!(m.alpha > 0.0 && m.alpha < 2.0)) throw DomainError("alpha must lie in (0, 2)");
  } else if (m.process == "mixed") {
    if (m.mix.empty()) throw DomainError("mixed process needs --mix");
    b.mix = MixingLaw::parse(m.mix);
  } else {
    b.q = m.q == "canonical" ? LayeredQ::canonical(m.alpha, m.beta, qmass)
                             : LayeredQ::smooth(m.alpha, m.beta, qmass, b.sigma->dimension());
  }
  if (m.process == "layered-rejection" && m.q != "canonical")
    throw DomainError("the rejection series needs the canonical q");
  b.base = m.base == "outer" ? RejectionBase::Outer : RejectionBase::Inner;
  return b;
}

DrawOptions draw_options(const Model& m, const Built& b) {
  DrawOptions o;
  o.rejects = m.process == "layered-rejection";
  o.mix = b.mix;
  return o;
}

SeriesTerms make_terms(const Model& m, const Built& b, const ShotNoiseDraw& draw) {
  SeriesTerms t;
  const auto& sigma = *b.sigma;
  if (m.process == "stable") {
    t = stable_terms(m.alpha, sigma, draw);
    if (m.residual) add_stable_residual(t, m.alpha, sigma);
    return t;
  }
  if (m.process == "mixed") {
    if (m.residual) throw DomainError("--residual is not available for the mixed process");
    return mixed_terms(sigma, draw);
  }
  if (m.process == "layered-rejection") t = layered_rejection_terms(*b.q, sigma, draw, b.base);
  else t = layered_general_terms(*b.q, sigma, draw);
  if (m.residual) add_layered_residual(t, *b.q, sigma);
  return t;
}


// ---------------------------------------------------------------------------
// simulate

struct SimulateConfig {
  Model model;
  double T = 1.0;
  std::size_t grid_n = 1000;
  std::size_t paths = 1;
  std::uint64_t seed = 1;
  double gamma_cap = 1e4;
  std::string out = "layerlab";
  std::string format = "csv";
  std::string coupled;
};

struct Companion {
  enum Kind { Stable, Brownian } kind;
  double parameter;
  std::string label;
};

std::vector<Companion> parse_companions(const std::string& spec) {
  std::vector<Companion> out;
  if (spec.empty()) return out;
  std::stringstream ss(spec);
  std::string item;
  while (std::getline(ss, item, ',')) {
    item = trim(item);
    const auto colon = item.find(':');
    if (colon == std::string::npos) throw DomainError("companion '" + item + "': expected kind:value");
    const std::string kind = item.substr(0, colon);
    const std::string value = item.substr(colon + 1);
    double v = 0.0;
    auto [ptr, ec] = std::from_chars(value.data(), value.data() + value.size(), v);
    if (ec != std::errc() || ptr != value.data() + value.size())
      throw DomainError("companion '" + item + "': bad number");
    if (kind == "stable") {
      if (!(v > 0.0 && v < 2.0)) throw DomainError("companion stable index must lie in (0, 2)");
      out.push_back({Companion::Stable, v, "stable" + value});
    } else if (kind == "brownian") {
      if (!(v > 0.0)) throw DomainError("companion brownian variance must be positive");
      out.push_back({Companion::Brownian, v, "brownian" + value});
    } else {
      throw DomainError("unknown companion kind '" + kind + "'");
    }
  }
  return out;
}

// Independent Brownian motion with the given variance per unit time in each
// coordinate, from its own substream.
SamplePath brownian_companion(const ShotNoiseDraw& draw, double variance, const Vec& grid) {
  Rng rng = make_rng(draw.seed, draw.path, Stream::Companion);
  const std::size_t d = draw.dimension;
  Vec values(grid.size() * d, 0.0);
  for (std::size_t k = 1; k < grid.size(); ++k) {
    const double sd = std::sqrt(variance * (grid[k] - grid[k - 1]));
    for (std::size_t c = 0; c < d; ++c)
      values[k * d + c] = values[(k - 1) * d + c] + sd * standard_normal(rng);
  }
  return SamplePath::from_values(d, draw.horizon, grid, std::move(values));
}

json model_json(const Model& m) {
  json j;
  j["process"] = m.process;
  j["alpha"] = m.alpha;
  if (m.process != "stable" && m.process != "mixed") {
    j["beta"] = m.beta;
    j["q"] = m.q;
  }
  j["sigma"] = m.sigma;
  if (m.qmass > 0.0) j["qmass"] = m.qmass;
  if (m.process == "layered-rejection") j["base"] = m.base;
  if (!m.mix.empty()) j["mix"] = m.mix;
  if (m.residual) j["residual"] = true;
  return j;
}

int cmd_simulate(const SimulateConfig& c, std::ostream& out) {
  const auto start = std::chrono::steady_clock::now();
  if (!(c.T > 0.0)) throw DomainError("T must be positive");
  if (c.grid_n == 0) throw DomainError("grid_n must be positive");
  if (c.paths == 0) throw DomainError("paths must be positive");
  if (!(c.gamma_cap > 0.0)) throw DomainError("gamma_cap must be positive");
  const Built b = build_model(c.model);
  const auto companions = parse_companions(c.coupled);
  std::optional<SphericalMeasure> companion_sigma;
  if (b.q) companion_sigma = derive_sigma_pair(*b.q, *b.sigma).sigma1;
  else companion_sigma = b.sigma;

  const Vec grid = uniform_grid(c.T, c.grid_n);
  const DrawOptions opts = draw_options(c.model, b);
  const std::size_t per_path = 1 + companions.size();
  std::vector<std::string> texts(c.paths * per_path);
  std::vector<double> bounds(c.paths, 0.0);
  parallel_for(c.paths, [&](std::size_t k) {
    const ShotNoiseDraw draw = draw_shot_noise(c.seed, k, c.T, *b.sigma, c.gamma_cap, opts);
    const SeriesTerms terms = make_terms(c.model, b, draw);
    bounds[k] = terms.largest_discarded;
    auto render = [&](const SamplePath& p) { return c.format == "json" ? path_json(p) : path_csv(p); };
    texts[k * per_path] = render(build_path(draw, terms, grid));
    for (std::size_t j = 0; j < companions.size(); ++j) {
      const auto& comp = companions[j];
      if (comp.kind == Companion::Brownian) {
        texts[k * per_path + 1 + j] = render(brownian_companion(draw, comp.parameter, grid));
      } else {
        // Same arrivals, times and directions; magnitudes from the stable series.
        const SeriesTerms st = stable_terms(comp.parameter, *companion_sigma, draw);
        texts[k * per_path + 1 + j] = render(build_path(draw, st, grid));
      }
    }
  });

  json manifest;
  json files = json::array();
  const std::string ext = c.format == "json" ? ".json" : ".csv";
  for (std::size_t k = 0; k < c.paths; ++k) {
    for (std::size_t j = 0; j < per_path; ++j) {
      const std::string label = j == 0 ? c.model.process : companions[j - 1].label;
      const std::string name = c.out + "." + label + ".path" + std::to_string(k) + ext;
      write_file(name, texts[k * per_path + j]);
      files.push_back(name);
    }
  }
  json config = model_json(c.model);
  config["T"] = c.T;
  config["grid_n"] = c.grid_n;
  config["paths"] = c.paths;
  config["seed"] = c.seed;
  config["gamma_cap"] = c.gamma_cap;
  config["out"] = c.out;
  config["format"] = c.format;
  if (!c.coupled.empty()) config["coupled"] = c.coupled;
  manifest["command"] = "simulate";
  manifest["config"] = config;
  manifest["seed"] = c.seed;
  manifest["truncation_bound"] = *std::max_element(bounds.begin(), bounds.end());
  manifest["files"] = files;
  manifest["wall_time_seconds"] =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  const std::string manifest_name = c.out + ".manifest.json";
  write_file(manifest_name, manifest.dump(2) + "\n");
  out << "wrote " << files.size() << " path file(s) and " << manifest_name << "\n";
  return kOk;
}

// ---------------------------------------------------------------------------
// limit-check

struct LimitConfig {
  Model model;
  std::string mode = "short";
  double h = 1e-3;
  std::size_t samples = 10000;
  std::uint64_t seed = 1;
  double terms = 0.0;
  double threshold = 0.07;
  std::string y_grid = "default";
  std::string out;
};

// `default` or `lo:hi:n` (n points per axis, same layout as the default grid).
std::vector<Vec> parse_y_grid(const std::string& spec, std::size_t d) {
  if (spec == "default") return default_cf_grid(d);
  double lo = 0.0, hi = 0.0, n = 0.0;
  char c1 = 0, c2 = 0;
  std::istringstream in(spec);
  if (!(in >> lo >> c1 >> hi >> c2 >> n) || c1 != ':' || c2 != ':' || !(in >> std::ws).eof() ||
      !(hi > lo) || n < 2 || n != std::floor(n) || n > 1000)
    throw DomainError("y_grid must be 'default' or lo:hi:n");
  Vec axis;
  for (int i = 0; i < static_cast<int>(n); ++i) axis.push_back(lo + (hi - lo) * i / (n - 1.0));
  std::vector<Vec> grid;
  if (d == 1) {
    for (double a : axis) grid.push_back({a});
  } else if (d == 2) {
    for (double a : axis)
      for (double b : axis) grid.push_back({a, b});
  } else {
    for (std::size_t k = 0; k < d; ++k)
      for (double a : axis) {
        Vec y(d, 0.0);
        y[k] = a;
        grid.push_back(y);
      }
  }
  return grid;
}

void emit_report(const json& report, const std::string& path, std::ostream& out) {
  const std::string text = report.dump(2) + "\n";
  if (path.empty()) out << text;
  else write_file(path, text);
}

int cmd_limit_check(const LimitConfig& c, std::ostream& out) {
  const Model& m = c.model;
  if (m.process != "layered") throw DomainError("limit-check needs --process layered");
  if (c.samples < 10) throw DomainError("limit-check needs at least 10 samples");
  const Built b = build_model(m);
  const LimitSpec spec = c.mode == "short" ? short_time_spec(*b.q, *b.sigma, c.h)
                                           : long_time_spec(*b.q, *b.sigma, c.h);
  const bool gaussian = spec.mode == LimitMode::LongGaussian;
  const double budget = c.terms > 0.0 ? c.terms : (gaussian ? 1e5 : 2e4);
  const double source_t = c.h;
  const double gamma_cap = budget / source_t;
  const std::size_t d = b.sigma->dimension();

  std::vector<Vec> values(c.samples);
  parallel_for(c.samples, [&](std::size_t i) {
    const ShotNoiseDraw draw = draw_shot_noise(c.seed, i, source_t, *b.sigma, gamma_cap, {});
    SeriesTerms terms = layered_general_terms(*b.q, *b.sigma, draw);
    if (m.residual) add_layered_residual(terms, *b.q, *b.sigma);
    values[i] = rescale_value(terminal_value(draw, terms), source_t, spec);
  });

  const auto grid = parse_y_grid(c.y_grid, d);
  const CFTarget target = gaussian ? CFTarget::gaussian(spec.target_covariance)
                                   : CFTarget::stable(spec.index, *spec.target_sigma, Vec(d, 0.0));
  const double distance = cf_distance(values, target, grid);
  const bool pass = distance < c.threshold;

  json report;
  report["command"] = "limit-check";
  report["mode"] = to_string(spec.mode);
  report["h"] = c.h;
  report["index"] = spec.index;
  report["samples"] = c.samples;
  report["seed"] = c.seed;
  report["terms_per_sample"] = budget;
  report["target"] = target.name();
  report["distance"] = distance;
  report["threshold"] = c.threshold;
  report["pass"] = pass;
  emit_report(report, c.out, out);
  return pass ? kOk : kFailed;
}

// ---------------------------------------------------------------------------
// tail

struct TailConfig {
  Model model;
  double T = 1.0;
  std::size_t paths = 100000;
  std::uint64_t seed = 1;
  double gamma_cap = 2000.0;
  std::size_t k = 0;
  std::size_t resamples = 200;
  double level = 0.95;
  std::string out;
};

int cmd_tail(const TailConfig& c, std::ostream& out) {
  if (c.paths < 1000) throw DomainError("tail needs at least 1000 paths");
  if (c.k >= c.paths) throw DomainError("k must be smaller than the number of paths");
  if (!(c.level > 0.0 && c.level < 1.0)) throw DomainError("level must lie in (0, 1)");
  if (!(c.gamma_cap > 0.0)) throw DomainError("gamma_cap must be positive");
  const Built b = build_model(c.model);
  const DrawOptions opts = draw_options(c.model, b);
  std::vector<double> mags(c.paths);
  parallel_for(c.paths, [&](std::size_t i) {
    const ShotNoiseDraw draw = draw_shot_noise(c.seed, i, c.T, *b.sigma, c.gamma_cap, opts);
    mags[i] = norm(terminal_value(draw, make_terms(c.model, b, draw)));
  });
  const std::size_t k =
      c.k > 0 ? c.k : static_cast<std::size_t>(std::floor(std::sqrt(static_cast<double>(c.paths))));
  const double estimate = hill_tail_index(mags, k);
  const Interval ci = bootstrap_ci(
      mags, [k](const std::vector<double>& v) { return hill_tail_index(v, k); }, c.resamples,
      c.level, mix64(c.seed ^ 0x7a11ULL));

  json report;
  report["command"] = "tail";
  report["process"] = c.model.process;
  report["paths"] = c.paths;
  report["seed"] = c.seed;
  report["k"] = k;
  report["estimate"] = estimate;
  report["ci_level"] = c.level;
  report["ci_lo"] = ci.lo;
  report["ci_hi"] = ci.hi;
  emit_report(report, c.out, out);
  return kOk;
}

// ---------------------------------------------------------------------------
// rn

struct RnConfig {
  Model model;
  double T = 1.0;
  std::size_t paths = 10000;
  std::uint64_t seed = 1;
  double gamma_cap = 1e4;
  std::string functional = "sup-exceeds:3";
  std::string out;
};

// sup-exceeds:c is 1{sup_t |X_t| > c}; terminal-exceeds:c is 1{|X_T| > c}.
std::function<double(const SamplePath&)> parse_functional(const std::string& spec) {
  const auto colon = spec.find(':');
  const std::string name = spec.substr(0, colon);
  if (colon == std::string::npos || (name != "sup-exceeds" && name != "terminal-exceeds"))
    throw DomainError("unknown functional '" + spec + "' (expected sup-exceeds:c or terminal-exceeds:c)");
  const std::string v = spec.substr(colon + 1);
  double level = 0.0;
  auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), level);
  if (ec != std::errc() || ptr != v.data() + v.size() || !(level > 0.0))
    throw DomainError(name + " needs a positive level");
  if (name == "sup-exceeds")
    return [level](const SamplePath& p) { return p.sup_norm() > level ? 1.0 : 0.0; };
  return [level](const SamplePath& p) { return norm(p.terminal()) > level ? 1.0 : 0.0; };
}

json estimate_json(const WeightedEstimate& e) {
  json j;
  j["estimate"] = e.estimate;
  j["std_error"] = e.std_error;
  j["clipped"] = e.clipped;
  return j;
}

int cmd_rn(const RnConfig& c, std::ostream& out) {
  const Model& m = c.model;
  if (m.process != "layered") throw DomainError("rn needs --process layered");
  if (m.q != "canonical") throw DomainError("rn supports the canonical q only");
  if (m.alpha == m.beta) throw DomainError("rn: alpha equals beta, the change of measure is trivial");
  if (m.residual) throw DomainError("rn works with jump paths only; drop --residual");
  if (c.paths < 2) throw DomainError("rn needs at least 2 paths");
  const Built b = build_model(m);
  if (!b.sigma->is_symmetric()) throw DomainError("rn needs a symmetric sigma");
  const auto f = parse_functional(c.functional);
  const LayeredQ& q = *b.q;
  const SphericalMeasure sigma1 = derive_sigma_pair(q, *b.sigma).sigma1;
  const double kappa = sigma1.total_mass();
  const Vec grid{0.0, c.T};
  const std::size_t n = c.paths;

  std::vector<WeightedValue> weight_p(n), weight_q(n), reweighted(n), direct(n);
  parallel_for(n, [&](std::size_t i) {
    // Stable paths under Q, weighted by e^{U'} towards P.
    const ShotNoiseDraw ds = draw_shot_noise(c.seed, i, c.T, sigma1, c.gamma_cap, {});
    const SamplePath ps = stable_path(m.alpha, sigma1, ds, grid);
    const double u1 = u_series(ds, m.alpha, m.beta, kappa, c.T, USeries::Prime);
    weight_p[i] = {1.0, u1, MeasureTag::Q};
    reweighted[i] = {f(ps), u1, MeasureTag::Q};
    // Layered paths under P, weighted by e^{-U''} towards Q.
    const ShotNoiseDraw dl = draw_shot_noise(c.seed, n + i, c.T, *b.sigma, c.gamma_cap, {});
    const SamplePath pl = layered_path_canonical(q, *b.sigma, dl, grid);
    const double u2 = u_series(dl, m.alpha, m.beta, kappa, c.T, USeries::DoublePrime);
    weight_q[i] = {1.0, -u2, MeasureTag::P};
    direct[i] = {f(pl), 0.0, MeasureTag::P};
  });
  const auto wp = reweighted_expectation(weight_p);
  const auto wq = reweighted_expectation(weight_q);
  const auto rw = reweighted_expectation(reweighted);
  const auto dr = reweighted_expectation(direct);
  const double combined = std::hypot(rw.std_error, dr.std_error);
  const double z = combined > 0.0 ? (rw.estimate - dr.estimate) / combined : 0.0;

  json report;
  report["command"] = "rn";
  report["alpha"] = m.alpha;
  report["beta"] = m.beta;
  report["paths"] = n;
  report["seed"] = c.seed;
  report["functional"] = c.functional;
  report["mean_weight"] = wp.estimate;
  report["mean_weight_se"] = wp.std_error;
  report["mean_inverse_weight"] = wq.estimate;
  report["mean_inverse_weight_se"] = wq.std_error;
  report["reweighted"] = estimate_json(rw);
  report["direct"] = estimate_json(dr);
  report["combined_se"] = combined;
  report["z"] = z;
  report["clipped"] = wp.clipped + wq.clipped + rw.clipped;
  emit_report(report, c.out, out);
  return kOk;
}

// ---------------------------------------------------------------------------
// selftest

struct Check {
  std::string name;
  double value;
  double limit;
  bool pass() const { return std::isfinite(value) && value < limit; }
};

std::vector<Check> selftest_checks() {
  std::vector<Check> checks;
  auto add = [&](std::string name, double value, double limit) {
    checks.push_back({std::move(name), value, limit});
  };

  double bt_err = 0.0;
  for (double a : {1.2, 1.5, 1.8}) {
    const double ref = std::pow(a / 2.0, -1.0 / a) * special::zeta_euler_maclaurin(1.0 / a);
    bt_err = std::max(bt_err, std::fabs(stable_bt(a, 2.0) - ref) / std::fabs(ref));
  }
  add("b_T", bt_err, 1e-10);

  const auto q = LayeredQ::canonical(1.3, 1.9, 2.0);
  double inv_err = 0.0;
  for (int i = 0; i <= 200; ++i) {
    const double r = std::pow(10.0, -6.0 + 12.0 * i / 200.0);
    inv_err = std::max(inv_err, std::fabs(q.inverse_tail(q.tail_integral(r, {}), {}) - r) / r);
  }
  add("inverse_tail", inv_err, 1e-8);

  const auto sigma = SphericalMeasure::parse("discrete:[(1):1,(-1):1]");
  const auto grid = default_cf_grid(1);
  const std::size_t n = 2000;
  {
    std::vector<Vec> xs(n);
    parallel_for(n, [&](std::size_t i) {
      const auto draw = draw_shot_noise(11, i, 1.0, sigma, 2000.0);
      xs[i] = terminal_value(draw, stable_terms(1.5, sigma, draw));
    });
    add("stable_cf", cf_distance(xs, CFTarget::stable(1.5, sigma, Vec{0.0}), grid), 0.1);
  }
  {
    std::vector<Vec> xs(n);
    parallel_for(n, [&](std::size_t i) {
      const auto draw = draw_shot_noise(12, i, 1.0, sigma, 2000.0);
      xs[i] = terminal_value(draw, layered_general_terms(q, sigma, draw));
    });
    add("layered_cf", cf_distance(xs, CFTarget::layered(q, sigma, Vec{0.0}), grid), 0.1);
  }
  {
    const double kappa = sigma.total_mass() / q.mass();
    double err = 0.0;
    for (std::size_t i = 0; i < 10; ++i) {
      const auto draw = draw_shot_noise(13, i, 1.0, sigma, 1000.0);
      const auto path = layered_path_canonical(q, sigma, draw, {0.0, 1.0});
      err = std::max(err, std::fabs(u_from_jumps(q, sigma, path, 1.0).value -
                                    u_canonical(1.3, 1.9, kappa, path, 1.0)));
    }
    add("u_jump_sum", err, 1e-8);
  }
  {
    DrawOptions opts;
    opts.mix = MixingLaw::point(1.4);
    const auto draw = draw_shot_noise(14, 0, 1.0, sigma, 1000.0, opts);
    const auto a = mixed_terms(sigma, draw).magnitude;
    const auto b = stable_terms(1.4, sigma, draw).magnitude;
    double mismatch = a.size() == b.size() ? 0.0 : 1.0;
    for (std::size_t i = 0; i < std::min(a.size(), b.size()); ++i)
      if (a[i] != b[i]) mismatch += 1.0;
    add("mixed_point_mass", mismatch, 0.5);
  }
  {
    const auto s1 = derive_sigma_pair(q, sigma).sigma1;
    std::vector<WeightedValue> w(n);
    parallel_for(n, [&](std::size_t i) {
      const auto draw = draw_shot_noise(15, i, 1.0, s1, 200.0);
      w[i] = {1.0, u_series(draw, 1.3, 1.9, s1.total_mass(), 1.0, USeries::Prime), MeasureTag::Q};
    });
    const auto e = reweighted_expectation(w);
    add("rn_mean_weight", std::fabs(e.estimate - 1.0) / e.std_error, 4.0);
  }
  {
    const auto d1 = draw_shot_noise(16, 3, 1.0, sigma, 500.0);
    const auto d2 = draw_shot_noise(16, 3, 1.0, sigma, 500.0);
    const Vec x1 = terminal_value(d1, layered_general_terms(q, sigma, d1));
    const Vec x2 = terminal_value(d2, layered_general_terms(q, sigma, d2));
    add("determinism", x1 == x2 ? 0.0 : 1.0, 0.5);
  }
  add("boundary_constant", std::fabs(isotropic_constant(1.999, 2, 2.0 * (2.0 - 1.999)) - 0.5), 2e-3);
  return checks;
}

int cmd_selftest(std::ostream& out) {
  const auto checks = selftest_checks();
  bool ok = true;
  out << std::left << std::setprecision(4);
  out << "      check               value         limit\n";
  for (const auto& c : checks) {
    ok = ok && c.pass();
    out << (c.pass() ? "PASS  " : "FAIL  ");
    out.width(20);
    out << c.name;
    out.width(14);
    out << c.value;
    out.width(14);
    out << c.limit << "  margin " << c.limit - c.value << "\n";
  }
  out << (ok ? "selftest passed\n" : "selftest FAILED\n");
  return ok ? kOk : kFailed;
}

void take_last(CLI::App* app) {
  app->option_defaults()->multi_option_policy(CLI::MultiOptionPolicy::TakeLast);
}

}  // namespace

int run(const std::vector<std::string>& raw_args, std::ostream& out, std::ostream& err) {
  if (const char* env = std::getenv("LAYERLAB_TEST_CORRUPT_ZETA"); env && *env && *env != '0')
    special::set_zeta_corruption_for_testing(true);

  CLI::App app{"Shot-noise simulation of stable, layered stable and mixed stable processes", "layerlab"};
  app.require_subcommand(1);
  take_last(&app);

  SimulateConfig sim;
  auto* sim_cmd = app.add_subcommand("simulate", "simulate sample paths and write CSV/JSON");
  take_last(sim_cmd);
  add_model_options(sim_cmd, sim.model);
  sim_cmd->add_option("--T", sim.T, "horizon");
  sim_cmd->add_option("--grid-n", sim.grid_n, "number of grid intervals");
  sim_cmd->add_option("--paths", sim.paths, "number of paths");
  sim_cmd->add_option("--seed", sim.seed, "master seed");
  sim_cmd->add_option("--gamma-cap", sim.gamma_cap, "arrival truncation per unit time");
  sim_cmd->add_option("--out", sim.out, "output prefix");
  sim_cmd->add_option("--format", sim.format, "csv | json")->check(CLI::IsMember({"csv", "json"}));
  sim_cmd->add_option("--coupled", sim.coupled, "companions, e.g. stable:1.3,stable:1.9");

  LimitConfig lim;
  auto* lim_cmd = app.add_subcommand("limit-check", "compare rescaled terminals with a scaling limit");
  take_last(lim_cmd);
  lim_cmd->set_help_flag("--help", "Print this help message and exit");
  add_model_options(lim_cmd, lim.model);
  lim_cmd->add_option("--mode", lim.mode, "short | long")->check(CLI::IsMember({"short", "long"}));
  lim_cmd->add_option("--h", lim.h, "time scale");
  lim_cmd->add_option("--samples,--paths", lim.samples, "number of terminal values");
  lim_cmd->add_option("--seed", lim.seed, "master seed");
  lim_cmd->add_option("--terms", lim.terms, "expected series terms per sample");
  lim_cmd->add_option("--threshold", lim.threshold, "pass threshold on the CF distance");
  lim_cmd->add_option("--y-grid", lim.y_grid, "default or lo:hi:n");
  lim_cmd->add_option("--out", lim.out, "report path (default: stdout)");

  RnConfig rn;
  auto* rn_cmd = app.add_subcommand("rn", "Radon-Nikodym diagnostics for the canonical q");
  take_last(rn_cmd);
  add_model_options(rn_cmd, rn.model);
  rn_cmd->add_option("--T", rn.T, "horizon");
  rn_cmd->add_option("--paths", rn.paths, "paths per measure");
  rn_cmd->add_option("--seed", rn.seed, "master seed");
  rn_cmd->add_option("--gamma-cap", rn.gamma_cap, "arrival truncation per unit time");
  rn_cmd->add_option("--functional", rn.functional, "sup-exceeds:c or terminal-exceeds:c");
  rn_cmd->add_option("--out", rn.out, "report path (default: stdout)");

  TailConfig tail;
  auto* tail_cmd = app.add_subcommand("tail", "Hill estimate of the terminal tail index");
  take_last(tail_cmd);
  add_model_options(tail_cmd, tail.model);
  tail_cmd->add_option("--T", tail.T, "horizon");
  tail_cmd->add_option("--paths", tail.paths, "number of terminal values");
  tail_cmd->add_option("--seed", tail.seed, "master seed");
  tail_cmd->add_option("--gamma-cap", tail.gamma_cap, "arrival truncation per unit time");
  tail_cmd->add_option("--k", tail.k, "order statistics used (0: floor(sqrt(N)))");
  tail_cmd->add_option("--resamples", tail.resamples, "bootstrap resamples");
  tail_cmd->add_option("--level", tail.level, "confidence level");
  tail_cmd->add_option("--out", tail.out, "report path (default: stdout)");

  auto* self_cmd = app.add_subcommand("selftest", "run the invariant checks at reduced size");

  try {
    std::vector<std::string> args;
    if (!raw_args.empty()) {
      args.push_back(raw_args.front());
      auto rest = expand_files({raw_args.begin() + 1, raw_args.end()});
      args.insert(args.end(), rest.begin(), rest.end());
    }
    std::reverse(args.begin(), args.end());
    app.parse(args);
  } catch (const CLI::Success& e) {
    return app.exit(e, out, err);
  } catch (const CLI::ParseError& e) {
    app.exit(e, out, err);
    return kConfigError;
  } catch (const DomainError& e) {
    err << "error: " << e.what() << "\n";
    return kConfigError;
  } catch (const IoError& e) {
    err << "error: " << e.what() << "\n";
    return kIoError;
  }

  try {
    if (*sim_cmd) return cmd_simulate(sim, out);
    if (*lim_cmd) return cmd_limit_check(lim, out);
    if (*rn_cmd) return cmd_rn(rn, out);
    if (*tail_cmd) return cmd_tail(tail, out);
    if (*self_cmd) return cmd_selftest(out);
  } catch (const DomainError& e) {
    err << "error: " << e.what() << "\n";
    return kConfigError;
  } catch (const IoError& e) {
    err << "error: " << e.what() << "\n";
    return kIoError;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kFailed;
  }
  return kConfigError;
}

int main(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  return run(args, std::cout, std::cerr);
}

}  // namespace layerlab::cli
