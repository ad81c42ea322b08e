#include "saturex/config.hpp"

#include <algorithm>
#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include "saturex/errors.hpp"

namespace saturex {

namespace {

RawConfig from_ptree(const boost::property_tree::ptree& pt) {
  RawConfig raw;
  for (const auto& [section, body] : pt) {
    if (body.empty() && !body.data().empty())
      throw ConfigError("key '" + section + "' appears outside any [section]");
    auto& dst = raw[section];
    for (const auto& [key, node] : body) dst[key] = node.data();
  }
  return raw;
}

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::string cur;
  std::istringstream is(s);
  while (std::getline(is, cur, sep)) out.push_back(trim(cur));
  return out;
}

double to_double(const std::string& text, const std::string& field) {
  const std::string t = trim(text);
  if (t == "inf" || t == "infinity") return std::numeric_limits<double>::infinity();
  size_t pos = 0;
  double v = 0.0;
  try {
    v = std::stod(t, &pos);
  } catch (const std::exception&) {
    throw ConfigError(field + ": expected a number, got '" + text + "'");
  }
  if (pos != t.size()) throw ConfigError(field + ": expected a number, got '" + text + "'");
  return v;
}

// Reads typed values from one section and remembers which keys were used.
class Section {
 public:
  Section(const RawConfig& raw, const std::string& name) : name_(name) {
    auto it = raw.find(name);
    if (it != raw.end()) kv_ = &it->second;
  }

  bool has(const std::string& key) const { return kv_ && kv_->count(key); }
  std::string field(const std::string& key) const { return "[" + name_ + "] " + key; }

  std::optional<std::string> str(const std::string& key) {
    used_.insert(key);
    if (!has(key)) return std::nullopt;
    return trim(kv_->at(key));
  }
  void get(const std::string& key, std::string& out) {
    if (auto v = str(key)) out = *v;
  }
  void get(const std::string& key, double& out) {
    if (auto v = str(key)) out = to_double(*v, field(key));
  }
  void get(const std::string& key, std::optional<double>& out) {
    if (auto v = str(key)) out = to_double(*v, field(key));
  }
  void get(const std::string& key, int& out) {
    if (auto v = str(key)) {
      const double d = to_double(*v, field(key));
      if (d != std::floor(d) || std::abs(d) > 1e9) throw ConfigError(field(key) + ": expected an integer, got '" + *v + "'");
      out = static_cast<int>(d);
    }
  }
  void get(const std::string& key, std::uint64_t& out) {
    if (auto v = str(key)) {
      try {
        size_t pos = 0;
        out = std::stoull(*v, &pos);
        if (pos != v->size()) throw std::invalid_argument("trailing");
      } catch (const std::exception&) {
        throw ConfigError(field(key) + ": expected a non-negative integer, got '" + *v + "'");
      }
    }
  }
  void get(const std::string& key, bool& out) {
    if (auto v = str(key)) {
      if (*v == "true" || *v == "yes" || *v == "on" || *v == "1")
        out = true;
      else if (*v == "false" || *v == "no" || *v == "off" || *v == "0")
        out = false;
      else
        throw ConfigError(field(key) + ": expected true or false, got '" + *v + "'");
    }
  }

  void reject_unknown() const {
    if (!kv_) return;
    for (const auto& [k, v] : *kv_)
      if (!used_.count(k)) throw ConfigError("unknown key " + field(k));
  }

 private:
  std::string name_;
  const std::map<std::string, std::string>* kv_ = nullptr;
  std::set<std::string> used_;
};

double overlap(double a0, double a1, double b0, double b1) { return std::max(0.0, std::min(a1, b1) - std::max(a0, b0)); }

}  // namespace

RawConfig parse_raw_config(const std::string& text) {
  std::istringstream is(text);
  boost::property_tree::ptree pt;
  try {
    boost::property_tree::read_ini(is, pt);
  } catch (const boost::property_tree::ini_parser_error& e) {
    throw ConfigError("malformed config at line " + std::to_string(e.line()) + ": " + e.message());
  }
  return from_ptree(pt);
}

RawConfig read_raw_config(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw ConfigError("cannot open config file '" + path + "'");
  std::stringstream ss;
  ss << f.rdbuf();
  return parse_raw_config(ss.str());
}

Vec parse_number_list(const std::string& text, const std::string& field) {
  const std::string t = trim(text);
  if (t.empty()) return {};
  if (t.find(':') != std::string::npos) {
    const auto parts = split(t, ':');
    if (parts.size() != 3) throw ConfigError(field + ": range must read a:b:step, got '" + text + "'");
    const double a = to_double(parts[0], field), b = to_double(parts[1], field), h = to_double(parts[2], field);
    if (!(h > 0.0) || !(b >= a)) throw ConfigError(field + ": range needs b >= a and step > 0, got '" + text + "'");
    const long n = std::lround(std::floor((b - a) / h + 1e-9));
    Vec out;
    for (long i = 0; i <= n; ++i) out.push_back(a + static_cast<double>(i) * h);
    return out;
  }
  Vec out;
  for (const auto& p : split(t, ',')) out.push_back(to_double(p, field));
  return out;
}

std::string to_string(DatumKind k) {
  switch (k) {
    case DatumKind::Box:
      return "box";
    case DatumKind::Semicircle:
      return "semicircle";
    case DatumKind::Gaussian:
      return "gaussian";
    case DatumKind::Staircase:
      return "staircase";
    case DatumKind::Samples:
      return "samples";
  }
  return "unknown";
}

Vec DatumSpec::cell_averages(const Grid1D& grid) const {
  const int n = grid.n_cells;
  const double dx = grid.dx();
  Vec u(static_cast<size_t>(n), 0.0);
  if (kind == DatumKind::Samples) {
    if (samples.size() != u.size())
      throw ConfigError("[datum] values: " + std::to_string(samples.size()) + " samples for " + std::to_string(n) +
                        " cells");
    return samples;
  }
  for (int i = 0; i < n; ++i) {
    const double x0 = grid.x_min + i * dx, x1 = x0 + dx, xc = grid.center(i);
    double v = 0.0;
    switch (kind) {
      case DatumKind::Box:
        v = height * overlap(x0, x1, center - half_width, center + half_width) / dx;
        break;
      case DatumKind::Staircase:
        v = (high * overlap(x0, x1, left, step) + low * overlap(x0, x1, step, right)) / dx;
        break;
      case DatumKind::Semicircle: {
        const double y = (xc - center) / radius;
        v = std::abs(y) < 1.0 ? height * std::sqrt((1.0 - y) * (1.0 + y)) : 0.0;
        break;
      }
      case DatumKind::Gaussian: {
        const double y = (xc - center) / sigma;
        v = std::abs(y) < cutoff ? height * std::exp(-0.5 * y * y) : 0.0;
        break;
      }
      case DatumKind::Samples:
        break;
    }
    u[static_cast<size_t>(i)] = v;
  }
  return u;
}

DatumSpec DatumSpec::widened(double factor) const {
  if (!(factor > 0.0)) throw ConfigError("[verify] contraction_widen must be positive");
  DatumSpec d = *this;
  switch (kind) {
    case DatumKind::Box:
      d.half_width *= factor;
      break;
    case DatumKind::Semicircle:
      d.radius *= factor;
      break;
    case DatumKind::Gaussian:
      d.sigma *= factor;
      break;
    case DatumKind::Staircase: {
      const double mid = 0.5 * (left + right);
      d.left = mid + (left - mid) * factor;
      d.step = mid + (step - mid) * factor;
      d.right = mid + (right - mid) * factor;
      break;
    }
    case DatumKind::Samples:
      throw ConfigError("[verify] contraction needs a parametric datum, not samples");
  }
  return d;
}

ModelSpec ExperimentConfig::model() const {
  try {
    return ModelSpec(parse_psi(psi), parse_phi(phi, s), L, 1);
  } catch (const ModelError& e) {
    throw ConfigError(std::string("[model] ") + e.what());
  }
}

ExperimentConfig config_from_raw(const RawConfig& raw) {
  static const std::set<std::string> known = {"experiment", "model",  "grid",   "datum",
                                              "solver",     "verify", "output", "sweep"};
  for (const auto& [name, body] : raw)
    if (!known.count(name)) throw ConfigError("unknown section [" + name + "]");

  ExperimentConfig cfg;
  cfg.raw = raw;
  {
    Section s(raw, "experiment");
    s.get("id", cfg.id);
    s.get("seed", cfg.seed);
    s.reject_unknown();
    if (cfg.id.empty() || cfg.id.find_first_of("/\\ ") != std::string::npos)
      throw ConfigError("[experiment] id: must be non-empty without spaces or slashes");
  }
  {
    Section s(raw, "model");
    s.get("psi", cfg.psi);
    s.get("phi", cfg.phi);
    s.get("s", cfg.s);
    s.get("L", cfg.L);
    std::optional<double> m, scale;
    s.get("m", m);
    s.get("scale", scale);
    s.reject_unknown();
    if (m || scale) {
      if (cfg.phi != "power") throw ConfigError("[model] m/scale: only valid with phi = power");
    }
    if (cfg.phi == "power") {
      if (!m) throw ConfigError("[model] m: required with phi = power");
      char buf[96];
      std::snprintf(buf, sizeof buf, "power:m=%.17g,scale=%.17g", *m, scale.value_or(1.0));
      cfg.phi = buf;
    }
    try {
      parse_psi(cfg.psi);
    } catch (const ModelError& e) {
      throw ConfigError(std::string("[model] psi: ") + e.what());
    }
    try {
      parse_phi(cfg.phi, cfg.s);
    } catch (const ModelError& e) {
      throw ConfigError(std::string("[model] phi: ") + e.what());
    }
    if (!(cfg.s > 0.0)) throw ConfigError("[model] s: must be positive");
    if (!(cfg.L > 0.0)) throw ConfigError("[model] L: must be positive");
  }
  {
    Section s(raw, "grid");
    s.get("x_min", cfg.grid.x_min);
    s.get("x_max", cfg.grid.x_max);
    s.get("cells", cfg.grid.n_cells);
    s.reject_unknown();
    if (!(cfg.grid.x_max > cfg.grid.x_min)) throw ConfigError("[grid] x_max: must exceed x_min");
    if (cfg.grid.n_cells < 8) throw ConfigError("[grid] cells: need at least 8");
  }
  {
    Section s(raw, "datum");
    DatumSpec& d = cfg.datum;
    std::string kind = "box";
    s.get("kind", kind);
    if (kind == "box")
      d.kind = DatumKind::Box;
    else if (kind == "semicircle")
      d.kind = DatumKind::Semicircle;
    else if (kind == "gaussian")
      d.kind = DatumKind::Gaussian;
    else if (kind == "staircase")
      d.kind = DatumKind::Staircase;
    else if (kind == "samples")
      d.kind = DatumKind::Samples;
    else
      throw ConfigError("[datum] kind: unknown datum '" + kind + "'");
    s.get("center", d.center);
    s.get("half_width", d.half_width);
    s.get("height", d.height);
    s.get("radius", d.radius);
    s.get("sigma", d.sigma);
    s.get("cutoff", d.cutoff);
    s.get("left", d.left);
    s.get("step", d.step);
    s.get("right", d.right);
    s.get("high", d.high);
    s.get("low", d.low);
    std::string values, file;
    s.get("values", values);
    s.get("file", file);
    s.reject_unknown();
    if (d.kind == DatumKind::Samples) {
      if (!values.empty() == !file.empty()) throw ConfigError("[datum] values/file: give exactly one for samples");
      if (!file.empty()) {
        std::ifstream f(file);
        if (!f) throw ConfigError("[datum] file: cannot open '" + file + "'");
        std::string line;
        int ln = 0;
        while (std::getline(f, line)) {
          ++ln;
          const std::string t = trim(line);
          if (t.empty() || t[0] == '#') continue;
          d.samples.push_back(to_double(t, "[datum] file line " + std::to_string(ln)));
        }
      } else {
        d.samples = parse_number_list(values, "[datum] values");
      }
      for (double v : d.samples)
        if (!(v >= 0.0) || !std::isfinite(v)) throw ConfigError("[datum] values: samples must be finite and >= 0");
    }
    if (!(d.height >= 0.0)) throw ConfigError("[datum] height: must be >= 0");
    if (d.kind == DatumKind::Box && !(d.half_width > 0.0)) throw ConfigError("[datum] half_width: must be positive");
    if (d.kind == DatumKind::Semicircle && !(d.radius > 0.0)) throw ConfigError("[datum] radius: must be positive");
    if (d.kind == DatumKind::Gaussian && !(d.sigma > 0.0 && d.cutoff > 0.0))
      throw ConfigError("[datum] sigma: sigma and cutoff must be positive");
    if (d.kind == DatumKind::Staircase && !(d.left < d.step && d.step < d.right && d.high >= 0.0 && d.low >= 0.0))
      throw ConfigError("[datum] step: staircase needs left < step < right and non-negative levels");
  }
  {
    Section s(raw, "solver");
    SolverConfig& sc = cfg.solver;
    s.get("cfl", sc.cfl);
    s.get("u_floor_rel", sc.u_floor_rel);
    s.get("end_time", sc.end_time);
    std::string snaps, avg;
    s.get("snapshots", snaps);
    s.get("averaging", avg);
    s.reject_unknown();
    if (!snaps.empty()) sc.snapshot_times = parse_number_list(snaps, "[solver] snapshots");
    if (sc.snapshot_times.empty()) sc.snapshot_times = {sc.end_time};
    if (!avg.empty()) {
      try {
        sc.averaging = parse_averaging(avg);
      } catch (const Error& e) {
        throw ConfigError(std::string("[solver] averaging: ") + e.what());
      }
    }
    try {
      sc.validate();
    } catch (const Error& e) {
      throw ConfigError(std::string("[solver] ") + e.what());
    }
  }
  {
    Section s(raw, "verify");
    VerifySpec& v = cfg.verify;
    s.get("support", v.support);
    s.get("edge_threshold_rel", v.edge_threshold_rel);
    s.get("edge_speed", v.edge_speed);
    s.get("edge_speed_tol", v.edge_speed_tol);
    s.get("edge_slack_cells", v.edge_slack_cells);
    s.get("jump", v.jump);
    s.get("jump_pick", v.jump_pick);
    s.get("jump_t_from", v.jump_t_from);
    s.get("jump_t_to", v.jump_t_to);
    s.get("jump_min_gap", v.jump_min_gap);
    s.get("jump_speed", v.jump_speed);
    s.get("jump_speed_tol", v.jump_speed_tol);
    s.get("jump_threshold", v.jump_threshold);
    s.get("jump_plateau", v.jump_plateau);
    s.get("jump_skip", v.jump_skip);
    s.get("jump_span", v.jump_span);
    s.get("jump_fit_fraction", v.jump_fit_fraction);
    s.get("super", v.super);
    std::string sub = "none";
    s.get("sub", sub);
    if (sub == "none")
      v.sub = SubProfile::None;
    else if (sub == "semicircle")
      v.sub = SubProfile::Semicircle;
    else if (sub == "theta_power")
      v.sub = SubProfile::ThetaPower;
    else
      throw ConfigError("[verify] sub: expected none, semicircle or theta_power, got '" + sub + "'");
    s.get("sub_R", v.sub_R);
    s.get("sub_c", v.sub_c);
    s.get("sub_theta", v.sub_theta);
    s.get("sub_gamma0", v.sub_gamma0);
    s.get("sub_center", v.sub_center);
    s.get("contraction", v.contraction);
    s.get("contraction_widen", v.contraction_widen);
    s.get("tol_cells", v.tol_cells);
    s.reject_unknown();
    if (v.jump_pick != "rightmost" && v.jump_pick != "leftmost" && v.jump_pick != "rightmost_interior")
      throw ConfigError("[verify] jump_pick: expected rightmost, leftmost or rightmost_interior");
    if (!(v.edge_threshold_rel > 0.0)) throw ConfigError("[verify] edge_threshold_rel: must be positive");
    if (!(v.jump_fit_fraction > 0.0 && v.jump_fit_fraction <= 1.0))
      throw ConfigError("[verify] jump_fit_fraction: must lie in (0, 1]");
    if (v.jump_plateau < 2) throw ConfigError("[verify] jump_plateau: must be >= 2");
    if (v.jump_span < 1) throw ConfigError("[verify] jump_span: must be >= 1");
    if (v.jump_skip < 0) throw ConfigError("[verify] jump_skip: must be >= 0");
    if (!(v.tol_cells >= 0.0)) throw ConfigError("[verify] tol_cells: must be >= 0");
  }
  {
    Section s(raw, "output");
    s.get("dir", cfg.output_dir);
    s.reject_unknown();
  }
  {
    auto it = raw.find("sweep");
    if (it != raw.end()) {
      for (const auto& [key, value] : it->second) {
        if (key == "mode") {
          cfg.sweep.mode = trim(value);
          if (cfg.sweep.mode != "verify" && cfg.sweep.mode != "simulate")
            throw ConfigError("[sweep] mode: expected verify or simulate");
          continue;
        }
        const auto dot = key.find('.');
        if (dot == std::string::npos || dot == 0 || dot + 1 == key.size())
          throw ConfigError("[sweep] " + key + ": axes are written <section>.<key> = v1, v2, ...");
        SweepAxis ax{key.substr(0, dot), key.substr(dot + 1), split(value, ',')};
        if (ax.section == "sweep" || !known.count(ax.section))
          throw ConfigError("[sweep] " + key + ": unknown section '" + ax.section + "'");
        if (ax.values.empty() || std::any_of(ax.values.begin(), ax.values.end(), [](const std::string& x) { return x.empty(); }))
          throw ConfigError("[sweep] " + key + ": empty value list");
        cfg.sweep.axes.push_back(std::move(ax));
      }
    }
  }
  return cfg;
}

ExperimentConfig load_config(const std::string& path) { return config_from_raw(read_raw_config(path)); }

}  // namespace saturex
