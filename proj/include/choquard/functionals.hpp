// Energy E_q(u) = 1/2 |grad u|^2 - g N/(2(N+alpha)) int (I_alpha * w|u|^p) w|u|^p
//               - mu/q int |u|^q,   p = (N + alpha)/N,
// its L2 gradient, the Lagrange multiplier and the Pohozaev residual.
#pragma once

#include <memory>
#include <optional>

#include "choquard/grid.hpp"
#include "choquard/riesz.hpp"

namespace choquard {

struct Problem {
  int dim = 1;
  double alpha = 0.5;
  double gamma = 1.0;
  double mu = 1.0;
  double q = 3.0;
  double c = 1.0;

  double p() const { return (dim + alpha) / dim; }
  double critical_q() const { return 2.0 + 4.0 / dim; }
  bool is_critical() const { return q == critical_q(); }
  /// eta_r = N/2 - N/r.
  double eta(double r) const { return dim / 2.0 - dim / r; }
  double eta_q() const { return eta(q); }
  /// gamma == 0 or mu == 0: outside the theory, allowed for diagnostics.
  bool degenerate() const { return gamma == 0.0 || mu == 0.0; }

  /// Throws std::invalid_argument naming the offending field.
  void validate() const;
};

struct EnergyBreakdown {
  double kinetic = 0.0;   // 1/2 int |grad u|^2
  double nonlocal = 0.0;  // int (I_alpha * w|u|^p) w|u|^p
  double local = 0.0;     // int |u|^q
  double total = 0.0;
  double eta_q = 0.0;
  /// Factor in front of `nonlocal` in `total`.
  double nonlocal_coefficient = 0.0;
};

/// |a|^r - |b|^r without cancellation when a and b are close.
double power_difference(double a, double b, double r);

/// The energy for one coupling and optional density weight. With no weight
/// and coupling gamma this is E_q; with weight h(eps x) and coupling 1 it is
/// the potential problem; with constant weight 1 and coupling g^2 it is J_g.
class EnergyModel {
 public:
  EnergyModel(Problem prob, std::shared_ptr<const RieszOperator> riesz);
  EnergyModel(Problem prob, std::shared_ptr<const RieszOperator> riesz, double coupling,
              std::optional<Field> weight);

  const Problem& problem() const { return prob_; }
  const Grid& grid() const { return riesz_->grid(); }
  const RieszOperator& riesz() const { return *riesz_; }
  std::shared_ptr<const RieszOperator> riesz_ptr() const { return riesz_; }
  double coupling() const { return coupling_; }
  const std::optional<Field>& weight() const { return weight_; }

  EnergyBreakdown energy(const Field& u) const;

  struct Evaluation {
    EnergyBreakdown energy;
    Field gradient;
  };
  /// Energy and L2 gradient -Lap u - g w (I_alpha * w|u|^p) |u|^{p-2} u
  /// - mu |u|^{q-2} u, sharing one convolution.
  Evaluation evaluate(const Field& u) const;
  Field gradient(const Field& u) const { return evaluate(u).gradient; }

  /// lambda with E'(u) + lambda u = 0 tested against u.
  double multiplier(const Field& u) const;
  /// E(v) - E(u) assembled from differences, accurate when v is close to u.
  double difference(const Field& u, const Field& v) const;

  /// Same model on another grid (weight must be resampled by the caller).
  EnergyModel with_weight(std::optional<Field> weight) const;

 private:
  Field density(const Field& u) const;

  Problem prob_;
  std::shared_ptr<const RieszOperator> riesz_;
  double coupling_;
  std::optional<Field> weight_;
};

EnergyBreakdown energy(const Problem& prob, const Field& u, const RieszOperator& riesz);
Field euler_lagrange_gradient(const Problem& prob, const Field& u, const RieszOperator& riesz);
/// Q_q(u) = int |grad u|^2 - mu eta_q int |u|^q.
double pohozaev_residual(const Problem& prob, const Field& u);
/// (-int |grad u|^2 + gamma nonlocal + mu local) / mass(u).
double lagrange_multiplier(const Problem& prob, const Field& u, const RieszOperator& riesz);

/// -gamma N/(2(N+alpha)) S_alpha^{-(N+alpha)/N} c^{2(N+alpha)/N}.
double energy_bound(const Problem& prob, double s_alpha);
/// gamma N/(N+alpha) S_alpha^{-(N+alpha)/N} c^{2 alpha/N}.
double multiplier_bound(const Problem& prob, double s_alpha);

}  // namespace choquard
