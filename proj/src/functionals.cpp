#include "choquard/functionals.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace choquard {

namespace {

std::shared_ptr<const RieszOperator> checked(std::shared_ptr<const RieszOperator> r, const Problem& prob) {
  if (!r) throw std::invalid_argument("EnergyModel: null Riesz operator");
  if (r->alpha() != prob.alpha) throw std::invalid_argument("EnergyModel: Riesz alpha does not match problem");
  if (r->grid().dim() != prob.dim) throw std::invalid_argument("EnergyModel: grid dimension does not match problem");
  return r;
}

// Non-owning view so the free functions can reuse EnergyModel.
std::shared_ptr<const RieszOperator> borrow(const RieszOperator& r) {
  return std::shared_ptr<const RieszOperator>(&r, [](const RieszOperator*) {});
}

double signed_power(double v, double e) { return v == 0.0 ? 0.0 : std::copysign(std::pow(std::abs(v), e), v); }

}  // namespace

void Problem::validate() const {
  if (dim < 1 || dim > 3) throw std::invalid_argument("problem: N must be 1, 2 or 3");
  if (!(alpha > 0.0 && alpha < dim)) throw std::invalid_argument("problem: alpha must lie in (0, N)");
  if (!(gamma >= 0.0) || !std::isfinite(gamma)) throw std::invalid_argument("problem: gamma must be >= 0");
  if (!(mu >= 0.0) || !std::isfinite(mu)) throw std::invalid_argument("problem: mu must be >= 0");
  if (!(c > 0.0) || !std::isfinite(c)) throw std::invalid_argument("problem: c must be > 0");
  if (!(q > 2.0 && q <= critical_q()))
    throw std::invalid_argument("problem: q must lie in (2, 2+4/N] = (2, " + std::to_string(critical_q()) + "]");
}

double power_difference(double a, double b, double r) {
  const double aa = std::abs(a);
  const double bb = std::abs(b);
  if (bb == 0.0) return std::pow(aa, r);
  return std::pow(bb, r) * std::expm1(r * std::log1p((aa - bb) / bb));
}

EnergyModel::EnergyModel(Problem prob, std::shared_ptr<const RieszOperator> riesz)
    : EnergyModel(prob, std::move(riesz), prob.gamma, std::nullopt) {}

EnergyModel::EnergyModel(Problem prob, std::shared_ptr<const RieszOperator> riesz, double coupling,
                         std::optional<Field> weight)
    : prob_(prob), riesz_(checked(std::move(riesz), prob)), coupling_(coupling), weight_(std::move(weight)) {
  prob_.validate();
  if (weight_ && !(weight_->grid() == riesz_->grid())) throw std::invalid_argument("EnergyModel: weight grid mismatch");
}

EnergyModel EnergyModel::with_weight(std::optional<Field> weight) const {
  return EnergyModel(prob_, riesz_, coupling_, std::move(weight));
}

Field EnergyModel::density(const Field& u) const {
  const double p = prob_.p();
  std::vector<double> v(u.size());
  for (std::size_t i = 0; i < v.size(); ++i) {
    v[i] = std::pow(std::abs(u[i]), p);
    if (weight_) v[i] *= (*weight_)[i];
  }
  return Field(u.grid(), std::move(v));
}

EnergyBreakdown EnergyModel::energy(const Field& u) const {
  if (!(u.grid() == grid())) throw std::invalid_argument("energy: grid mismatch");
  EnergyBreakdown e;
  e.eta_q = prob_.eta_q();
  e.nonlocal_coefficient = coupling_ * prob_.dim / (2.0 * (prob_.dim + prob_.alpha));
  e.kinetic = 0.5 * grad_norm_sq(u);
  const Field f = density(u);
  e.nonlocal = riesz_->bilinear_energy(f, f);
  e.local = lp_integral(u, prob_.q);
  e.total = e.kinetic - e.nonlocal_coefficient * e.nonlocal - prob_.mu / prob_.q * e.local;
  return e;
}

EnergyModel::Evaluation EnergyModel::evaluate(const Field& u) const {
  if (!(u.grid() == grid())) throw std::invalid_argument("gradient: grid mismatch");
  EnergyBreakdown e;
  e.eta_q = prob_.eta_q();
  e.nonlocal_coefficient = coupling_ * prob_.dim / (2.0 * (prob_.dim + prob_.alpha));
  e.kinetic = 0.5 * grad_norm_sq(u);
  const Field f = density(u);
  const Field potential = riesz_->apply(f);
  e.nonlocal = inner(potential, f);
  e.local = lp_integral(u, prob_.q);
  e.total = e.kinetic - e.nonlocal_coefficient * e.nonlocal - prob_.mu / prob_.q * e.local;

  Field g = neg_laplacian(u);
  auto& gv = g.mutable_values();
  const double p = prob_.p();
  const double q = prob_.q;
  for (std::size_t i = 0; i < gv.size(); ++i) {
    double w = potential[i];
    if (weight_) w *= (*weight_)[i];
    gv[i] -= coupling_ * w * signed_power(u[i], p - 1.0) + prob_.mu * signed_power(u[i], q - 1.0);
  }
  return {e, std::move(g)};
}

double EnergyModel::multiplier(const Field& u) const {
  const double m = mass(u);
  if (!(m > 0.0)) throw std::invalid_argument("lagrange_multiplier: zero mass");
  const auto e = energy(u);
  return (-2.0 * e.kinetic + coupling_ * e.nonlocal + prob_.mu * e.local) / m;
}

double EnergyModel::difference(const Field& u, const Field& v) const {
  require_same_grid(u, v, "energy difference");
  const double d_kinetic = grad_inner(v - u, v + u);
  const double p = prob_.p();
  std::vector<double> df(u.size());
  std::vector<double> sf(u.size());
  double d_local = 0.0;
  for (std::size_t i = 0; i < u.size(); ++i) {
    const double w = weight_ ? (*weight_)[i] : 1.0;
    df[i] = w * power_difference(v[i], u[i], p);
    sf[i] = w * (std::pow(std::abs(v[i]), p) + std::pow(std::abs(u[i]), p));
    d_local += power_difference(v[i], u[i], prob_.q);
  }
  d_local *= grid().cell_volume();
  const Field dfield(grid(), std::move(df));
  const Field sfield(grid(), std::move(sf));
  const double d_nonlocal = riesz_->bilinear_energy(dfield, sfield);
  const double coeff = coupling_ * prob_.dim / (2.0 * (prob_.dim + prob_.alpha));
  return d_kinetic - coeff * d_nonlocal - prob_.mu / prob_.q * d_local;
}

EnergyBreakdown energy(const Problem& prob, const Field& u, const RieszOperator& riesz) {
  return EnergyModel(prob, borrow(riesz)).energy(u);
}

Field euler_lagrange_gradient(const Problem& prob, const Field& u, const RieszOperator& riesz) {
  return EnergyModel(prob, borrow(riesz)).gradient(u);
}

double pohozaev_residual(const Problem& prob, const Field& u) {
  return grad_norm_sq(u) - prob.mu * prob.eta_q() * lp_integral(u, prob.q);
}

double lagrange_multiplier(const Problem& prob, const Field& u, const RieszOperator& riesz) {
  return EnergyModel(prob, borrow(riesz)).multiplier(u);
}

double energy_bound(const Problem& prob, double s_alpha) {
  const double n = prob.dim;
  const double a = prob.alpha;
  return -prob.gamma * n / (2.0 * (n + a)) * std::pow(s_alpha, -(n + a) / n) * std::pow(prob.c, 2.0 * (n + a) / n);
}

double multiplier_bound(const Problem& prob, double s_alpha) {
  const double n = prob.dim;
  const double a = prob.alpha;
  return prob.gamma * n / (n + a) * std::pow(s_alpha, -(n + a) / n) * std::pow(prob.c, 2.0 * a / n);
}

}  // namespace choquard
