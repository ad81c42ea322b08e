#include "saturex/models.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <random>
#include <sstream>

#include "saturex/errors.hpp"

namespace saturex {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

std::string fmt_num(double x) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%g", x);
  return buf;
}

double central_diff(const ScalarFn& f, double x) {
  const double h = std::max(1e-6, 1e-6 * std::abs(x));
  return (f(x + h) - f(x - h)) / (2.0 * h);
}

// Langevin function coth(x) - 1/x and helpers.
double langevin_series(double x) {
  const double x2 = x * x;
  return x * (1.0 / 3.0 +
              x2 * (-1.0 / 45.0 +
                    x2 * (2.0 / 945.0 +
                          x2 * (-1.0 / 4725.0 + x2 * (2.0 / 93555.0 - x2 * 1382.0 / 638512875.0)))));
}

double langevin(double r) {
  const double a = std::abs(r);
  if (a < 0.1) return langevin_series(r);
  if (std::isinf(a)) return std::copysign(1.0, r);
  if (a > 40.0) return std::copysign(1.0 - 1.0 / a, r);
  return 1.0 / std::tanh(r) - 1.0 / r;
}

double langevin_prime(double r) {
  const double a = std::abs(r);
  if (a < 0.1) {
    const double x2 = a * a;
    return 1.0 / 3.0 +
           x2 * (-1.0 / 15.0 +
                 x2 * (2.0 / 189.0 + x2 * (-1.0 / 675.0 + x2 * (2.0 / 10395.0))));
  }
  if (std::isinf(a)) return 0.0;
  const double sh = std::sinh(a);
  return 1.0 / (a * a) - 1.0 / (sh * sh);
}

double langevin_gap(double a) {
  if (a < 0.1) return 1.0 - langevin_series(a);
  if (std::isinf(a)) return 0.0;
  return 1.0 / a - 2.0 / std::expm1(2.0 * a);
}

// (1 + a^p)^(-1/p) for a >= 0 without overflow.
double rel_g(double a, double p) {
  if (a == 0.0) return 1.0;
  if (std::isinf(a)) return 0.0;
  if (p == 2.0) {
    if (a <= 1.0) return 1.0 / std::sqrt(1.0 + a * a);
    const double ia = 1.0 / a;
    return ia / std::sqrt(1.0 + ia * ia);
  }
  if (p == 1.0) return 1.0 / (1.0 + a);
  if (a <= 1.0) return std::pow(1.0 + std::pow(a, p), -1.0 / p);
  return std::pow(1.0 + std::pow(a, -p), -1.0 / p) / a;
}

double rel_value(double r, double p) {
  const double a = std::abs(r);
  if (a == 0.0) return r;
  if (std::isinf(a)) return std::copysign(1.0, r);
  if (a <= 1.0) return r * rel_g(a, p);
  if (p == 2.0) return std::copysign(1.0 / std::sqrt(1.0 + 1.0 / (a * a)), r);
  return std::copysign(std::pow(1.0 + std::pow(a, -p), -1.0 / p), r);
}

double rel_derivative(double r, double p) {
  const double a = std::abs(r);
  if (std::isinf(a)) return 0.0;
  if (a <= 1.0) return std::pow(1.0 + std::pow(a, p), -1.0 / p - 1.0);
  return std::pow(a, -(p + 1.0)) * std::pow(1.0 + std::pow(a, -p), -(p + 1.0) / p);
}

double rel_gap(double a, double p) {
  if (a == 0.0) return 1.0;
  if (std::isinf(a)) return 0.0;
  if (a <= 1.0) return 1.0 - a * rel_g(a, p);
  return -std::expm1(-std::log1p(std::pow(a, -p)) / p);
}

double rel_dg(double a, double p) {
  if (std::isinf(a)) return 0.0;
  if (a == 0.0) return p == 1.0 ? -1.0 : 0.0;
  if (a <= 1.0) return -std::pow(a, p - 1.0) * std::pow(1.0 + std::pow(a, p), -1.0 / p - 1.0);
  return -std::pow(a, -2.0) * std::pow(1.0 + std::pow(a, -p), -(p + 1.0) / p);
}

double tanh_derivative(double x) {
  const double a = std::abs(x);
  if (a < 1.0) {
    const double t = std::tanh(a);
    return 1.0 - t * t;
  }
  const double e = std::exp(-2.0 * a);
  return 4.0 * e / ((1.0 + e) * (1.0 + e));
}

double tanh_gap(double a) {
  const double e = std::exp(-2.0 * a);
  return 2.0 * e / (1.0 + e);
}

// tanh(x)/x and its derivative.
double tanh_ratio(double x) {
  if (x < 0.02) {
    const double x2 = x * x;
    return 1.0 + x2 * (-1.0 / 3.0 + x2 * (2.0 / 15.0 + x2 * (-17.0 / 315.0)));
  }
  return std::tanh(x) / x;
}

double tanh_ratio_prime(double x) {
  if (x < 0.02) {
    const double x2 = x * x;
    return x * (-2.0 / 3.0 + x2 * (8.0 / 15.0 + x2 * (-102.0 / 315.0)));
  }
  if (std::isinf(x)) return 0.0;
  return (tanh_derivative(x) * x - std::tanh(x)) / (x * x);
}

}  // namespace

// ---------------------------------------------------------------- PsiFamily

PsiFamily PsiFamily::relativistic(double p) {
  if (!(p >= 1.0) || !std::isfinite(p)) throw ModelError("relativistic family needs p >= 1, got " + fmt_num(p));
  PsiFamily f;
  f.kind_ = PsiKind::RelativisticP;
  f.param_ = p;
  if (p == 2.0)
    f.id_ = "rhe";
  else if (p == 1.0)
    f.id_ = "wilson";
  else
    f.id_ = "larsen:p=" + fmt_num(p);
  return f;
}

PsiFamily PsiFamily::levermore() {
  PsiFamily f;
  f.kind_ = PsiKind::LevermoreCoth;
  f.id_ = "coth";
  return f;
}

PsiFamily PsiFamily::coulombel_tanh(double gamma) {
  if (!(gamma > 0.0) || !std::isfinite(gamma)) throw ModelError("tanh model needs gamma > 0, got " + fmt_num(gamma));
  PsiFamily f;
  f.kind_ = PsiKind::CoulombelTanh;
  f.param_ = gamma;
  f.id_ = "tanh:gamma=" + fmt_num(gamma);
  return f;
}

PsiFamily PsiFamily::linear() {
  PsiFamily f;
  f.kind_ = PsiKind::Linear;
  f.id_ = "linear";
  return f;
}

PsiFamily PsiFamily::custom(CustomPsi c) {
  if (!c.psi) throw ModelError("custom psi needs an evaluator");
  PsiFamily f;
  f.kind_ = PsiKind::Custom;
  f.id_ = c.name;
  f.custom_ = std::move(c);
  return f;
}

double PsiFamily::value(double r) const {
  switch (kind_) {
    case PsiKind::RelativisticP:
      return rel_value(r, param_);
    case PsiKind::LevermoreCoth:
      return langevin(r);
    case PsiKind::CoulombelTanh:
      return std::tanh(r / param_);
    case PsiKind::Linear:
      return r;
    case PsiKind::Custom:
      return custom_.psi(r);
  }
  return 0.0;
}

double PsiFamily::derivative(double r) const {
  switch (kind_) {
    case PsiKind::RelativisticP:
      return rel_derivative(r, param_);
    case PsiKind::LevermoreCoth:
      return langevin_prime(r);
    case PsiKind::CoulombelTanh:
      return tanh_derivative(r / param_) / param_;
    case PsiKind::Linear:
      return 1.0;
    case PsiKind::Custom:
      if (custom_.dpsi) return custom_.dpsi(r);
      return central_diff(custom_.psi, r);
  }
  return 0.0;
}

double PsiFamily::gap(double r) const {
  const double a = std::abs(r);
  switch (kind_) {
    case PsiKind::RelativisticP:
      return rel_gap(a, param_);
    case PsiKind::LevermoreCoth:
      return langevin_gap(a);
    case PsiKind::CoulombelTanh:
      return tanh_gap(a / param_);
    case PsiKind::Linear:
      return std::abs(a - 1.0);
    case PsiKind::Custom:
      return std::abs(custom_.psi(a) - 1.0);
  }
  return 0.0;
}

bool PsiFamily::has_radial() const { return kind_ != PsiKind::Custom || static_cast<bool>(custom_.g); }

double PsiFamily::g(double rho) const {
  const double a = std::abs(rho);
  switch (kind_) {
    case PsiKind::RelativisticP:
      return rel_g(a, param_);
    case PsiKind::LevermoreCoth:
      if (a < 0.1) {
        const double x2 = a * a;
        return 1.0 / 3.0 +
               x2 * (-1.0 / 45.0 + x2 * (2.0 / 945.0 + x2 * (-1.0 / 4725.0 + x2 * (2.0 / 93555.0))));
      }
      return langevin(a) / a;
    case PsiKind::CoulombelTanh:
      return tanh_ratio(a / param_) / param_;
    case PsiKind::Linear:
      return 1.0;
    case PsiKind::Custom:
      if (!custom_.g) throw ModelError("custom psi '" + id_ + "' has no radial profile");
      return custom_.g(a);
  }
  return 0.0;
}

double PsiFamily::dg(double rho) const {
  const double a = std::abs(rho);
  switch (kind_) {
    case PsiKind::RelativisticP:
      return rel_dg(a, param_);
    case PsiKind::LevermoreCoth: {
      if (a < 0.1) {
        const double x2 = a * a;
        return a * (-2.0 / 45.0 + x2 * (8.0 / 945.0 + x2 * (-6.0 / 4725.0 + x2 * (16.0 / 93555.0))));
      }
      if (std::isinf(a)) return 0.0;
      return (langevin_prime(a) * a - langevin(a)) / (a * a);
    }
    case PsiKind::CoulombelTanh:
      return tanh_ratio_prime(a / param_) / (param_ * param_);
    case PsiKind::Linear:
      return 0.0;
    case PsiKind::Custom:
      if (!custom_.g) throw ModelError("custom psi '" + id_ + "' has no radial profile");
      if (custom_.dg) return custom_.dg(a);
      {
        const double h = std::max(1e-6, 1e-6 * a);
        if (a < h) return (custom_.g(a + h) - custom_.g(a)) / h;
        return (custom_.g(a + h) - custom_.g(a - h)) / (2.0 * h);
      }
  }
  return 0.0;
}

// ---------------------------------------------------------------- PhiFamily

PhiFamily PhiFamily::linear_speed(double s) {
  if (!(s > 0.0) || !std::isfinite(s)) throw ModelError("linear phi needs s > 0, got " + fmt_num(s));
  PhiFamily f;
  f.kind_ = PhiKind::LinearSpeed;
  f.m_ = 1.0;
  f.scale_ = s;
  return f;
}

PhiFamily PhiFamily::power(double m, double scale) {
  if (!(m > 1.0) || !std::isfinite(m)) throw ModelError("power phi needs m > 1, got " + fmt_num(m));
  if (!(scale > 0.0) || !std::isfinite(scale)) throw ModelError("power phi needs scale > 0, got " + fmt_num(scale));
  PhiFamily f;
  f.kind_ = PhiKind::Power;
  f.m_ = m;
  f.scale_ = scale;
  return f;
}

PhiFamily PhiFamily::custom(CustomPhi c) {
  if (!c.phi) throw ModelError("custom phi needs an evaluator");
  if (!(c.speed > 0.0)) throw ModelError("custom phi needs a positive speed scale");
  PhiFamily f;
  f.kind_ = PhiKind::Custom;
  f.custom_ = std::move(c);
  return f;
}

std::string PhiFamily::id() const {
  switch (kind_) {
    case PhiKind::LinearSpeed:
      return "linear:s=" + fmt_num(scale_);
    case PhiKind::Power:
      return "power:m=" + fmt_num(m_) + ",scale=" + fmt_num(scale_);
    case PhiKind::Custom:
      return custom_.name;
  }
  return {};
}

double PhiFamily::value(double z) const {
  const double a = std::abs(z);
  switch (kind_) {
    case PhiKind::LinearSpeed:
      return scale_ * a;
    case PhiKind::Power:
      if (m_ == 2.0) return scale_ * a * a;
      return scale_ * std::pow(a, m_);
    case PhiKind::Custom:
      return custom_.phi(a);
  }
  return 0.0;
}

double PhiFamily::derivative(double z) const {
  const double a = std::abs(z);
  switch (kind_) {
    case PhiKind::LinearSpeed:
      return scale_;
    case PhiKind::Power:
      return scale_ * m_ * std::pow(a, m_ - 1.0);
    case PhiKind::Custom:
      if (custom_.dphi) return custom_.dphi(a);
      {
        const double h = std::max(1e-7, 1e-7 * a);
        if (a < h) return (custom_.phi(a + h) - custom_.phi(a)) / h;
        return (custom_.phi(a + h) - custom_.phi(a - h)) / (2.0 * h);
      }
  }
  return 0.0;
}

double PhiFamily::speed() const {
  switch (kind_) {
    case PhiKind::LinearSpeed:
    case PhiKind::Power:
      return scale_;
    case PhiKind::Custom:
      return custom_.speed;
  }
  return 1.0;
}

// ---------------------------------------------------------------- ModelSpec

ModelSpec::ModelSpec(PsiFamily psi_, PhiFamily phi_, double L_, int dimension_)
    : psi(std::move(psi_)), phi(std::move(phi_)), s(phi.speed()), L(L_), dimension(dimension_) {
  validate();
}

ModelSpec ModelSpec::template_model(PsiFamily psi, double s, double L, int dimension) {
  return ModelSpec(std::move(psi), PhiFamily::linear_speed(s), L, dimension);
}

std::string ModelSpec::id() const {
  std::string out = psi.id() + "/" + phi.id();
  if (L != 1.0) out += "/L=" + fmt_num(L);
  if (dimension != 1) out += "/d=" + std::to_string(dimension);
  return out;
}

void ModelSpec::validate() const {
  if (!(s > 0.0) || !std::isfinite(s)) throw ModelError("model speed s must be positive, got " + fmt_num(s));
  if (!(L > 0.0) || !std::isfinite(L)) throw ModelError("model length L must be positive, got " + fmt_num(L));
  if (dimension < 1) throw ModelError("model dimension must be >= 1");
  if (dimension > 1 && !psi.has_radial())
    throw ModelError("psi '" + psi.id() + "' has no radial profile; dimension " + std::to_string(dimension) +
                     " needs the isotropy form");
}

namespace {

double parse_param(const std::string& id, const std::string& key, double fallback, bool required) {
  const auto colon = id.find(':');
  if (colon == std::string::npos) {
    if (required) throw ModelError("model id '" + id + "' needs parameter " + key);
    return fallback;
  }
  std::stringstream ss(id.substr(colon + 1));
  std::string part;
  while (std::getline(ss, part, ',')) {
    const auto eq = part.find('=');
    if (eq == std::string::npos) throw ModelError("malformed parameter '" + part + "' in model id '" + id + "'");
    if (part.substr(0, eq) != key) continue;
    try {
      size_t used = 0;
      const std::string val = part.substr(eq + 1);
      const double x = std::stod(val, &used);
      if (used != val.size()) throw std::invalid_argument(val);
      return x;
    } catch (const std::logic_error&) {
      throw ModelError("parameter " + key + " in model id '" + id + "' is not a number");
    }
  }
  if (required) throw ModelError("model id '" + id + "' needs parameter " + key);
  return fallback;
}

void check_keys(const std::string& id, std::initializer_list<const char*> allowed) {
  const auto colon = id.find(':');
  if (colon == std::string::npos) return;
  std::stringstream ss(id.substr(colon + 1));
  std::string part;
  while (std::getline(ss, part, ',')) {
    const std::string key = part.substr(0, part.find('='));
    bool ok = false;
    for (const char* a : allowed) ok = ok || key == a;
    if (!ok) throw ModelError("unknown parameter '" + key + "' in model id '" + id + "'");
  }
}

}  // namespace

PsiFamily parse_psi(const std::string& id) {
  const std::string head = id.substr(0, id.find(':'));
  if (head == "rhe" && head == id) return PsiFamily::rhe();
  if (head == "wilson" && head == id) return PsiFamily::wilson();
  if (head == "coth" && head == id) return PsiFamily::levermore();
  if (head == "linear" && head == id) return PsiFamily::linear();
  if (head == "larsen") {
    check_keys(id, {"p"});
    return PsiFamily::relativistic(parse_param(id, "p", 2.0, true));
  }
  if (head == "tanh") {
    check_keys(id, {"gamma"});
    return PsiFamily::coulombel_tanh(parse_param(id, "gamma", 1.0, false));
  }
  throw ModelError("unknown model id '" + id + "'");
}

PhiFamily parse_phi(const std::string& id, double s) {
  const std::string head = id.substr(0, id.find(':'));
  if (head == "linear") {
    check_keys(id, {"s"});
    return PhiFamily::linear_speed(parse_param(id, "s", s, false));
  }
  if (head == "power") {
    check_keys(id, {"m", "scale"});
    return PhiFamily::power(parse_param(id, "m", 2.0, true), parse_param(id, "scale", s, false));
  }
  throw ModelError("unknown phi id '" + id + "'");
}

// ---------------------------------------------------------------- evaluation

Vec eval_psi(const ModelSpec& model, const Vec& r) {
  if (static_cast<int>(r.size()) != model.dimension)
    throw ModelError("argument has dimension " + std::to_string(r.size()) + ", model has " +
                     std::to_string(model.dimension));
  if (model.dimension == 1) return {model.psi.value(r[0])};
  double rho = 0.0;
  for (double x : r) rho += x * x;
  rho = std::sqrt(rho);
  const double g = model.psi.g(rho);
  Vec out(r.size());
  for (size_t i = 0; i < r.size(); ++i) out[i] = r[i] * g;
  return out;
}

Mat eval_dpsi(const ModelSpec& model, const Vec& r) {
  const size_t d = r.size();
  if (static_cast<int>(d) != model.dimension)
    throw ModelError("argument has dimension " + std::to_string(d) + ", model has " +
                     std::to_string(model.dimension));
  if (d == 1) return {{model.psi.derivative(r[0])}};
  double rho = 0.0;
  for (double x : r) rho += x * x;
  rho = std::sqrt(rho);
  const double g = model.psi.g(rho);
  Mat J(d, Vec(d, 0.0));
  if (rho == 0.0) {
    for (size_t i = 0; i < d; ++i) J[i][i] = g;
    return J;
  }
  const double c = model.psi.dg(rho) / rho;
  for (size_t i = 0; i < d; ++i)
    for (size_t j = 0; j < d; ++j) J[i][j] = (i == j ? g : 0.0) + c * r[i] * r[j];
  return J;
}

// ---------------------------------------------------------------- sampling

SampleGrid SampleGrid::make(double log_min, double log_max, int n_log, double lin_max, int n_lin) {
  if (!(log_min > 0.0) || !(log_max > log_min) || n_log < 2 || !(lin_max > 0.0) || n_lin < 2)
    throw ModelError("invalid sample grid");
  SampleGrid g;
  g.log_min = log_min;
  g.log_max = log_max;
  g.lin_max = lin_max;
  const double a = std::log10(log_min), b = std::log10(log_max);
  for (int i = 0; i < n_log; ++i) g.log_points.push_back(std::pow(10.0, a + (b - a) * i / (n_log - 1)));
  g.log_points.back() = log_max;
  for (int i = 0; i < n_lin; ++i) g.linear_points.push_back(lin_max * i / (n_lin - 1));
  return g;
}

SampleGrid SampleGrid::standard() { return make(1e-6, 1e6, 200, 2.0, 100); }

Vec SampleGrid::all_positive() const {
  Vec out = log_points;
  for (double x : linear_points)
    if (x > 0.0) out.push_back(x);
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

std::string to_string(Verdict v) {
  switch (v) {
    case Verdict::Pass:
      return "pass";
    case Verdict::Fail:
      return "fail";
    case Verdict::Indeterminate:
      return "indeterminate";
    case Verdict::NotApplicable:
      return "not_applicable";
  }
  return "indeterminate";
}

TailFit fit_tail(const ScalarFn& f, const Vec& rs, double fit_tol) {
  TailFit fit;
  if (rs.empty()) return fit;
  const double r_hi = rs.back();
  const double r_lo = r_hi / 10.0 * (1.0 - 1e-12);
  fit.r_lo = r_lo;
  fit.r_hi = r_hi;
  std::vector<double> xs, ys;
  int n_decade = 0, n_zero = 0;
  for (double r : rs) {
    if (r < r_lo) continue;
    ++n_decade;
    const double y = f(r);
    if (!std::isfinite(y)) return fit;
    if (y < 1e-300) {
      ++n_zero;
      continue;
    }
    xs.push_back(std::log10(r));
    ys.push_back(std::log10(y));
  }
  if (n_decade >= 2 && n_zero == n_decade) {
    fit.reported = true;
    fit.super_polynomial = true;
    fit.exponent = kInf;
    return fit;
  }
  if (xs.size() < 3) return fit;
  const double n = static_cast<double>(xs.size());
  double mx = 0, my = 0;
  for (size_t i = 0; i < xs.size(); ++i) {
    mx += xs[i];
    my += ys[i];
  }
  mx /= n;
  my /= n;
  double sxx = 0, sxy = 0;
  for (size_t i = 0; i < xs.size(); ++i) {
    sxx += (xs[i] - mx) * (xs[i] - mx);
    sxy += (xs[i] - mx) * (ys[i] - my);
  }
  const double slope = sxy / sxx;
  const double icpt = my - slope * mx;
  double ss = 0;
  for (size_t i = 0; i < xs.size(); ++i) {
    const double e = ys[i] - (icpt + slope * xs[i]);
    ss += e * e;
  }
  fit.residual = std::sqrt(ss / n);
  fit.exponent = -slope;
  fit.prefactor = std::pow(10.0, icpt);
  // Partial underflow inside the decade means decay faster than the fit shows.
  if (n_zero > 0) {
    fit.super_polynomial = true;
    fit.exponent = kInf;
  }
  fit.reported = fit.residual < fit_tol;
  return fit;
}

// ---------------------------------------------------------------- reports

const AssumptionItem& AssumptionReport::at(const std::string& name) const {
  for (const auto& it : items)
    if (it.item == name) return it;
  throw ModelError("no assumption item '" + name + "'");
}

bool AssumptionReport::assumptions_pass() const {
  for (const auto& it : items) {
    if (it.item.rfind("persistence", 0) == 0 || it.item == "c_equals_s_decay") continue;
    if (it.verdict == Verdict::NotApplicable) continue;
    if (it.verdict != Verdict::Pass) return false;
  }
  return true;
}

bool AssumptionReport::persistence_holds() const {
  return verdict("persistence_d_decay") == Verdict::Pass && verdict("persistence_dpsi_decay") == Verdict::Pass;
}

bool AssumptionReport::allows_c_equal_s() const { return verdict("c_equals_s_decay") == Verdict::Pass; }

bool AssumptionReport::theta_condition(double theta, bool c_equals_s, std::string* why) const {
  auto say = [&](const std::string& s) {
    if (why) *why = s;
  };
  if (!(theta > 0.0 && theta < 1.0)) {
    say("theta must lie in (0,1)");
    return false;
  }
  if (!dpsi_fit.reported) {
    say("psi' tail exponent could not be fitted");
    return false;
  }
  if (!c_equals_s) {
    const double need = 1.0 / (1.0 - theta);
    if (dpsi_fit.exponent > need + tol.exponent_tol) return true;
    say("psi' exponent " + fmt_num(dpsi_fit.exponent) + " must exceed 1/(1-theta) = " + fmt_num(need));
    return false;
  }
  if (!d_fit.reported || d_fit.exponent < 1.0 - tol.exponent_tol) {
    say("d(r) = O(1/r) does not hold (exponent " + fmt_num(d_fit.exponent) + ")");
    return false;
  }
  const double need = (2.0 - theta) / (1.0 - theta);
  if (dpsi_fit.exponent >= need - tol.exponent_tol) return true;
  say("psi' exponent " + fmt_num(dpsi_fit.exponent) + " is below (2-theta)/(1-theta) = " + fmt_num(need));
  return false;
}

namespace {

struct Probe {
  bool finite = true;
  double worst_point = 0.0;
};

double max_adjacent_jump(const ScalarFn& f, const Vec& xs, double* where, bool* finite) {
  double best = 0.0;
  double prev = f(xs[0]);
  for (size_t i = 1; i < xs.size(); ++i) {
    const double cur = f(xs[i]);
    if (!std::isfinite(cur) || !std::isfinite(prev)) *finite = false;
    const double j = std::abs(cur - prev);
    if (j > best) {
      best = j;
      *where = xs[i];
    }
    prev = cur;
  }
  return best;
}

Vec refine(const Vec& xs, bool geometric) {
  Vec out;
  for (size_t i = 0; i + 1 < xs.size(); ++i) {
    out.push_back(xs[i]);
    out.push_back(geometric && xs[i] > 0 ? std::sqrt(xs[i] * xs[i + 1]) : 0.5 * (xs[i] + xs[i + 1]));
  }
  out.push_back(xs.back());
  return out;
}

double leading_minor(const Mat& J, size_t k) {
  Mat a(k, Vec(k));
  for (size_t i = 0; i < k; ++i)
    for (size_t j = 0; j < k; ++j) a[i][j] = J[i][j];
  double det = 1.0;
  for (size_t c = 0; c < k; ++c) {
    size_t piv = c;
    for (size_t r = c + 1; r < k; ++r)
      if (std::abs(a[r][c]) > std::abs(a[piv][c])) piv = r;
    if (a[piv][c] == 0.0) return 0.0;
    if (piv != c) {
      std::swap(a[piv], a[c]);
      det = -det;
    }
    det *= a[c][c];
    for (size_t r = c + 1; r < k; ++r) {
      const double m = a[r][c] / a[c][c];
      for (size_t j = c; j < k; ++j) a[r][j] -= m * a[c][j];
    }
  }
  return det;
}

AssumptionItem make_item(std::string name, bool finite, bool pass, double worst, double residual,
                         std::string note = {}) {
  AssumptionItem it;
  it.item = std::move(name);
  it.verdict = !finite ? Verdict::Indeterminate : (pass ? Verdict::Pass : Verdict::Fail);
  it.worst_point = worst;
  it.residual = residual;
  it.note = std::move(note);
  return it;
}

}  // namespace

AssumptionReport check_assumptions(const ModelSpec& model, const SampleGrid& grid, const Tolerances& tol) {
  model.validate();
  if (grid.log_max < 1e3) throw ModelError("assumption grid must reach r >= 1e3");
  AssumptionReport rep;
  rep.model_id = model.id();
  rep.dimension = model.dimension;
  rep.tol = tol;
  rep.grid = grid;
  const PsiFamily& psi = model.psi;
  const Vec pos = grid.all_positive();
  const double r_max = pos.back();

  auto dpsi_f = [&](double r) { return psi.derivative(r); };
  auto gap_f = [&](double r) { return psi.gap(r); };
  auto absdpsi_f = [&](double r) { return std::abs(psi.derivative(r)); };

  rep.d_fit = fit_tail(gap_f, grid.log_points, tol.fit_tol);
  rep.dpsi_fit = fit_tail(absdpsi_f, grid.log_points, tol.fit_tol);

  // smoothness proxy: jumps of sampled psi' must shrink under refinement
  {
    bool finite = true;
    double w1 = 0, w2 = 0, w3 = 0, w4 = 0;
    const double j_lin = max_adjacent_jump(dpsi_f, grid.linear_points, &w1, &finite);
    const double j_lin2 = max_adjacent_jump(dpsi_f, refine(grid.linear_points, false), &w2, &finite);
    const double j_log = max_adjacent_jump(dpsi_f, grid.log_points, &w3, &finite);
    const double j_log2 = max_adjacent_jump(dpsi_f, refine(grid.log_points, true), &w4, &finite);
    double scale = 1.0;
    for (double r : pos) scale = std::max(scale, std::abs(psi.derivative(r)));
    const double floor = 1e-10 * scale;
    const bool ok_lin = j_lin2 <= 0.75 * j_lin || j_lin2 <= floor;
    const bool ok_log = j_log2 <= 0.75 * j_log || j_log2 <= floor;
    const bool lin_worse = j_lin2 / std::max(j_lin, floor) >= j_log2 / std::max(j_log, floor);
    auto it = make_item("smoothness", finite, ok_lin && ok_log, lin_worse ? w2 : w4, std::max(j_lin2, j_log2),
                        "max jump of sampled psi' after one refinement; a proxy, not a C1 proof");
    rep.items.push_back(it);
  }

  {
    const double v = psi.value(0.0);
    rep.items.push_back(make_item("zero_at_origin", std::isfinite(v), v == 0.0, 0.0, std::abs(v)));
  }

  // saturation |psi(r)| -> 1 with a decreasing gap d(r)
  {
    bool finite = true;
    double worst = 0, res = 0;
    const size_t n = grid.log_points.size();
    for (size_t i = n >= 3 ? n - 3 : 0; i < n; ++i) {
      const double r = grid.log_points[i];
      const double d = std::abs(1.0 - std::abs(psi.value(r)));
      if (!std::isfinite(d)) finite = false;
      if (d >= res) {
        res = d;
        worst = r;
      }
    }
    bool decreasing;
    if (rep.d_fit.reported)
      decreasing = rep.d_fit.exponent > 0.0;
    else
      decreasing = psi.gap(r_max) < psi.gap(r_max / 10.0);
    auto it = make_item("saturation", finite, res < tol.sat_tol && decreasing, worst, res);
    if (rep.d_fit.reported) it.fitted_exponent = rep.d_fit.exponent;
    rep.items.push_back(it);
  }

  {
    bool finite = true;
    double worst = 0, res = 0;
    for (double r : pos) {
      const double a = psi.value(r), b = psi.value(-r);
      if (!std::isfinite(a) || !std::isfinite(b)) finite = false;
      const double e = std::abs(a + b) / std::max(1.0, std::abs(a));
      if (e > res) {
        res = e;
        worst = r;
      }
    }
    rep.items.push_back(make_item("oddness", finite, res <= tol.odd_tol, worst, res));
  }

  // monotonicity: sampled psi' >= -mono_tol and sampled psi non-decreasing
  {
    bool finite = true;
    double worst = 0, res = 0;
    Vec all;
    for (auto it = pos.rbegin(); it != pos.rend(); ++it) all.push_back(-*it);
    all.push_back(0.0);
    all.insert(all.end(), pos.begin(), pos.end());
    double prev = psi.value(all[0]);
    for (size_t i = 0; i < all.size(); ++i) {
      const double d = psi.derivative(all[i]);
      const double v = psi.value(all[i]);
      if (!std::isfinite(d) || !std::isfinite(v)) finite = false;
      if (-d > res) {
        res = -d;
        worst = all[i];
      }
      if (i > 0 && prev - v > res) {
        res = prev - v;
        worst = all[i];
      }
      prev = v;
    }
    rep.items.push_back(make_item("monotonicity", finite, res <= tol.mono_tol, worst, res));
  }

  // |psi(r) r| <= |r|
  {
    bool finite = true;
    double worst = 0, res = 0;
    for (double r : pos) {
      const double e = std::abs(psi.value(r)) - 1.0;
      if (!std::isfinite(e)) finite = false;
      if (e > res) {
        res = e;
        worst = r;
      }
    }
    rep.items.push_back(make_item("flux_bound", finite, res <= 1e-12, worst, res));
  }

  // psi'(r) = o(1/r)
  {
    const double rd = r_max * std::abs(psi.derivative(r_max));
    const bool finite = std::isfinite(rd);
    if (!rep.dpsi_fit.reported) {
      auto it = make_item("dpsi_decay", finite, false, r_max, rd, "psi' tail fit residual above fit_tol");
      it.verdict = Verdict::Indeterminate;
      rep.items.push_back(it);
    } else {
      auto it = make_item("dpsi_decay", finite, rep.dpsi_fit.exponent > 1.0 + tol.exponent_tol && rd < tol.sat_tol,
                          r_max, rd);
      it.fitted_exponent = rep.dpsi_fit.exponent;
      rep.items.push_back(it);
    }
  }

  if (psi.has_radial()) {
    bool finite = true;
    double worst = 0, res = 0;
    for (double r : pos) {
      const double q = std::abs(r * psi.dg(r) / psi.g(r));
      if (!std::isfinite(q)) finite = false;
      if (q > res) {
        res = q;
        worst = r;
      }
    }
    rep.items.push_back(make_item("isotropy_rg_ratio", finite, res <= 1.0 + 1e-10, worst, res));
    const double lim1 = std::abs(1.0 - r_max * psi.g(r_max));
    rep.items.push_back(make_item("isotropy_rg_limit", std::isfinite(lim1), lim1 < tol.sat_tol, r_max, lim1));
    const double lim2 = std::abs(1.0 + r_max * r_max * psi.dg(r_max));
    rep.items.push_back(make_item("isotropy_r2dg_limit", std::isfinite(lim2), lim2 < tol.sat_tol, r_max, lim2));
  } else {
    for (const char* name : {"isotropy_rg_ratio", "isotropy_rg_limit", "isotropy_r2dg_limit"}) {
      AssumptionItem it;
      it.item = name;
      it.verdict = Verdict::NotApplicable;
      it.note = "no radial profile";
      rep.items.push_back(it);
    }
  }

  if (model.dimension > 1) {
    const size_t d = static_cast<size_t>(model.dimension);
    std::mt19937_64 rng(20240917);
    std::normal_distribution<double> nd;
    std::vector<Vec> dirs;
    Vec e1(d, 0.0);
    e1[0] = 1.0;
    dirs.push_back(e1);
    dirs.push_back(Vec(d, 1.0 / std::sqrt(static_cast<double>(d))));
    for (int k = 0; k < 4; ++k) {
      Vec v(d);
      double n = 0;
      for (auto& x : v) {
        x = nd(rng);
        n += x * x;
      }
      for (auto& x : v) x /= std::sqrt(n);
      dirs.push_back(v);
    }
    bool finite = true;
    double worst = 0, res = 0;
    for (double rho : pos) {
      for (const auto& e : dirs) {
        Vec r(d);
        for (size_t i = 0; i < d; ++i) r[i] = rho * e[i];
        const Mat J = eval_dpsi(model, r);
        const double gk = std::abs(psi.g(rho));
        for (size_t k = 1; k <= d; ++k) {
          const double m = leading_minor(J, k);
          if (!std::isfinite(m)) finite = false;
          const double scale = std::max(std::pow(gk, static_cast<double>(k)), 1e-300);
          const double viol = -m / scale;
          if (viol > res) {
            res = viol;
            worst = rho;
          }
        }
      }
    }
    rep.items.push_back(make_item("psd_jacobian", finite, res <= tol.mono_tol, worst, res,
                                  "Sylvester leading minors of D psi"));
  } else {
    AssumptionItem it;
    it.item = "psd_jacobian";
    it.verdict = Verdict::NotApplicable;
    it.note = "dimension 1: covered by monotonicity";
    rep.items.push_back(it);
  }

  auto classify = [&](const std::string& name, const TailFit& fit, double threshold, double value_at_max) {
    AssumptionItem it;
    it.item = name;
    it.worst_point = r_max;
    it.residual = fit.residual;
    if (!fit.reported) {
      it.verdict = Verdict::Indeterminate;
      it.note = "tail fit residual above fit_tol";
    } else {
      it.fitted_exponent = fit.exponent;
      it.verdict = fit.exponent >= threshold ? Verdict::Pass : Verdict::Fail;
      it.note = "needs exponent >= " + fmt_num(threshold) + "; value at r_max " + fmt_num(value_at_max);
    }
    rep.items.push_back(it);
  };
  classify("persistence_d_decay", rep.d_fit, 1.0 - tol.exponent_tol, psi.gap(r_max));
  classify("persistence_dpsi_decay", rep.dpsi_fit, 2.0 + tol.persistence_eps, std::abs(psi.derivative(r_max)));
  {
    AssumptionItem it;
    it.item = "c_equals_s_decay";
    it.worst_point = r_max;
    if (!rep.d_fit.reported || !rep.dpsi_fit.reported) {
      it.verdict = Verdict::Indeterminate;
      it.note = "tail fit residual above fit_tol";
    } else {
      const bool ok = rep.d_fit.exponent >= 1.0 - tol.exponent_tol && rep.dpsi_fit.exponent >= 2.0 - tol.exponent_tol;
      it.verdict = ok ? Verdict::Pass : Verdict::Fail;
      it.fitted_exponent = rep.dpsi_fit.exponent;
      it.residual = std::max(rep.d_fit.residual, rep.dpsi_fit.residual);
      it.note = "d(r) = O(1/r) and psi'(r) = O(1/r^2)";
    }
    rep.items.push_back(it);
  }
  return rep;
}

// ---------------------------------------------------------------- phi

const AssumptionItem& PhiReport::at(const std::string& name) const {
  for (const auto& it : items)
    if (it.item == name) return it;
  throw ModelError("no phi item '" + name + "'");
}

bool PhiReport::pass() const {
  for (const auto& it : items)
    if (it.item != "convexity" && it.verdict != Verdict::Pass) return false;
  return true;
}

PhiReport check_phi(const PhiFamily& phi, double z_max) {
  if (!(z_max > 0.0)) throw ModelError("check_phi needs z_max > 0");
  PhiReport rep;
  rep.phi_id = phi.id();
  rep.z_max = z_max;

  {
    const double v = phi.value(0.0);
    rep.items.push_back(make_item("zero_at_origin", std::isfinite(v), v == 0.0, 0.0, std::abs(v)));
  }

  const int n = 1000;
  Vec zs(n + 1);
  for (int i = 0; i <= n; ++i) zs[i] = z_max * i / n;
  Vec fz(n + 1);
  bool finite = true;
  for (int i = 0; i <= n; ++i) {
    fz[i] = phi.value(zs[i]);
    if (!std::isfinite(fz[i])) finite = false;
  }

  {
    double worst = 0, res = kInf;
    bool f2 = finite;
    for (int k = 0; k <= 12; ++k) {
      const double z = z_max * std::pow(10.0, -k);
      const double v = phi.value(z);
      if (!std::isfinite(v)) f2 = false;
      if (v < res) {
        res = v;
        worst = z;
      }
    }
    for (int i = 1; i <= n; ++i)
      if (fz[i] < res) {
        res = fz[i];
        worst = zs[i];
      }
    rep.items.push_back(make_item("positivity", f2, res > 0.0, worst, res));
  }

  {
    Vec q;
    for (int k = 1; k <= 12; ++k) {
      const double h = z_max * std::pow(10.0, -k);
      q.push_back(phi.value(h) / h);
    }
    bool f2 = true;
    for (double x : q) f2 = f2 && std::isfinite(x);
    const double last = q.back(), prev = q[q.size() - 2];
    const double diff = std::abs(last - prev);
    bool converged = diff <= 1e-3 * std::max(1.0, std::abs(last));
    if (!converged) {
      bool nonincreasing = true;
      for (size_t i = 6; i < q.size(); ++i) nonincreasing = nonincreasing && q[i] <= q[i - 1] * (1.0 + 1e-12);
      converged = nonincreasing && std::abs(last) <= 10.0 * std::max(1.0, std::abs(q.front()));
    }
    rep.phi_prime0 = last;
    auto it = make_item("finite_derivative_at_0", f2, converged, z_max * 1e-12, diff,
                        "one-sided difference quotients phi(h)/h, h = z_max 10^-k");
    rep.items.push_back(it);
  }

  {
    double lip = 0, worst = 0;
    for (int i = 1; i <= n; ++i) {
      const double sl = std::abs(fz[i] - fz[i - 1]) / (zs[i] - zs[i - 1]);
      if (sl > lip) {
        lip = sl;
        worst = zs[i];
      }
    }
    rep.lipschitz = lip;
    rep.items.push_back(make_item("lipschitz", finite && std::isfinite(lip), std::isfinite(lip), worst, lip));
  }

  {
    double scale = 0;
    for (double v : fz) scale = std::max(scale, std::abs(v));
    scale = std::max(scale, 1e-300);
    double worst = 0, res = 0, min_second = kInf;
    for (int i = 1; i < n; ++i) {
      const double d2 = fz[i + 1] - 2.0 * fz[i] + fz[i - 1];
      min_second = std::min(min_second, d2 / scale);
      if (-d2 / scale > res) {
        res = -d2 / scale;
        worst = zs[i];
      }
    }
    rep.convex = res <= 1e-12;
    rep.strictly_convex = min_second > 1e-13;
    rep.items.push_back(make_item("convexity", finite, rep.convex, worst, res,
                                  rep.strictly_convex ? "strictly convex" : "not strictly convex"));
  }
  return rep;
}

}  // namespace saturex
