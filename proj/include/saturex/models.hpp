#pragma once

#include <functional>
#include <optional>
#include <string>
#include <vector>

namespace saturex {

using Vec = std::vector<double>;
using Mat = std::vector<Vec>;
using ScalarFn = std::function<double(double)>;

enum class PsiKind { RelativisticP, LevermoreCoth, CoulombelTanh, Linear, Custom };
enum class PhiKind { LinearSpeed, Power, Custom };

// User-supplied psi. Only `psi` is mandatory; missing derivatives fall back to
// central differences. `g` enables the isotropic extension to d > 1.
struct CustomPsi {
  std::string name = "custom";
  ScalarFn psi;
  ScalarFn dpsi;
  ScalarFn g;
  ScalarFn dg;
};

class PsiFamily {
 public:
  static PsiFamily relativistic(double p);
  static PsiFamily rhe() { return relativistic(2.0); }
  static PsiFamily wilson() { return relativistic(1.0); }
  static PsiFamily levermore();
  static PsiFamily coulombel_tanh(double gamma);
  static PsiFamily linear();
  static PsiFamily custom(CustomPsi c);

  PsiKind kind() const { return kind_; }
  // p for RelativisticP, gamma for CoulombelTanh, 0 otherwise.
  double parameter() const { return param_; }
  const std::string& id() const { return id_; }

  double value(double r) const;
  double derivative(double r) const;
  // |psi(r) - sign(r)|, evaluated without cancellation for catalog kinds.
  double gap(double r) const;

  bool has_radial() const;
  double g(double rho) const;
  double dg(double rho) const;

 private:
  PsiKind kind_ = PsiKind::Linear;
  double param_ = 0.0;
  std::string id_ = "linear";
  CustomPsi custom_;
};

struct CustomPhi {
  std::string name = "custom";
  ScalarFn phi;
  ScalarFn dphi;
  double speed = 1.0;
};

// Evaluated on |z|: the equation is only posed for non-negative densities.
class PhiFamily {
 public:
  static PhiFamily linear_speed(double s);
  static PhiFamily power(double m, double scale = 1.0);
  static PhiFamily custom(CustomPhi c);

  PhiKind kind() const { return kind_; }
  double m() const { return m_; }
  double scale() const { return scale_; }
  std::string id() const;

  double value(double z) const;
  double derivative(double z) const;
  // Speed scale carried by phi: s for LinearSpeed, scale for Power.
  double speed() const;

 private:
  PhiKind kind_ = PhiKind::LinearSpeed;
  double m_ = 1.0;
  double scale_ = 1.0;
  CustomPhi custom_;
};

struct ModelSpec {
  PsiFamily psi;
  PhiFamily phi;
  double s = 1.0;
  double L = 1.0;
  int dimension = 1;

  ModelSpec(PsiFamily psi, PhiFamily phi, double L = 1.0, int dimension = 1);
  // u_t = div(s u psi(L grad u / u))
  static ModelSpec template_model(PsiFamily psi, double s = 1.0, double L = 1.0,
                                  int dimension = 1);

  std::string id() const;
  void validate() const;
};

PsiFamily parse_psi(const std::string& id);
// "linear" (uses s), "power:m=<m>" or "power:m=<m>,scale=<c>"
PhiFamily parse_phi(const std::string& id, double s);

Vec eval_psi(const ModelSpec& model, const Vec& r);
Mat eval_dpsi(const ModelSpec& model, const Vec& r);

struct SampleGrid {
  Vec log_points;
  Vec linear_points;
  double log_min = 1e-6;
  double log_max = 1e6;
  double lin_max = 2.0;

  static SampleGrid standard();
  static SampleGrid make(double log_min, double log_max, int n_log, double lin_max, int n_lin);
  Vec all_positive() const;
};

struct Tolerances {
  double sat_tol = 1e-3;
  double mono_tol = 1e-10;
  double fit_tol = 0.1;
  double odd_tol = 1e-12;
  double exponent_tol = 0.05;
  double persistence_eps = 0.1;
};

enum class Verdict { Pass, Fail, Indeterminate, NotApplicable };
std::string to_string(Verdict v);

struct TailFit {
  bool reported = false;
  bool super_polynomial = false;
  double exponent = 0.0;
  double prefactor = 0.0;
  double residual = 0.0;
  double r_lo = 0.0;
  double r_hi = 0.0;
};

// Least-squares fit of log f = log C - q log r over the last decade of `rs`.
// Values that underflow to zero over the whole decade classify as faster than
// any power.
TailFit fit_tail(const ScalarFn& f, const Vec& rs, double fit_tol);

struct AssumptionItem {
  std::string item;
  Verdict verdict = Verdict::Indeterminate;
  double worst_point = 0.0;
  double residual = 0.0;
  std::optional<double> fitted_exponent;
  std::string note;
};

struct AssumptionReport {
  std::string model_id;
  int dimension = 1;
  std::vector<AssumptionItem> items;
  TailFit d_fit;
  TailFit dpsi_fit;
  Tolerances tol;
  SampleGrid grid;

  const AssumptionItem& at(const std::string& name) const;
  Verdict verdict(const std::string& name) const { return at(name).verdict; }
  // Structural assumptions (everything except the persistence classification).
  bool assumptions_pass() const;
  // d(r) = O(1/r) and psi'(r) = O(r^{-2-eps}).
  bool persistence_holds() const;
  // d(r) = O(1/r) and psi'(r) = O(1/r^2).
  bool allows_c_equal_s() const;
  // c < s: r^{1/(1-theta)} psi'(r) -> 0.  c = s: d = O(1/r) and
  // psi'(r) = O(r^{(theta-2)/(1-theta)}).
  bool theta_condition(double theta, bool c_equals_s, std::string* why = nullptr) const;
};

AssumptionReport check_assumptions(const ModelSpec& model,
                                   const SampleGrid& grid = SampleGrid::standard(),
                                   const Tolerances& tol = {});

struct PhiReport {
  std::string phi_id;
  double z_max = 1.0;
  std::vector<AssumptionItem> items;
  double phi_prime0 = 0.0;
  double lipschitz = 0.0;
  bool convex = false;
  bool strictly_convex = false;

  const AssumptionItem& at(const std::string& name) const;
  bool pass() const;
};

PhiReport check_phi(const PhiFamily& phi, double z_max);

}  // namespace saturex
