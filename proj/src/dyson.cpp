#include "decolab/dyson.hpp"

#include <cmath>

namespace decolab::dyson {

namespace {

using Matrix2c = Eigen::Matrix2cd;

Matrix2c initial_state() {
  Matrix2c rho = Matrix2c::Zero();
  rho(0, 0) = 1.0;
  return rho;
}

// Unperturbed generator on a 2x2 density matrix: populations frozen,
// coherences damped at Gamma and rotated at the detuning.
Matrix2c apply_l0(const TwoLevelModel& m, const Matrix2c& rho) {
  const Complex f(-m.dephasing_rate(), m.detuning());
  Matrix2c out = Matrix2c::Zero();
  out(0, 1) = f * rho(0, 1);
  out(1, 0) = std::conj(f) * rho(1, 0);
  return out;
}

// L1 rho = -i [sigma_x, rho].
Matrix2c apply_l1(const Matrix2c& rho) {
  const Complex i_unit(0.0, 1.0);
  Matrix2c sx;
  sx << 0, 1, 1, 0;
  return -i_unit * (sx * rho - rho * sx);
}

}  // namespace

void TwoLevelModel::validate() const {
  if (gamma < 0.0) throw std::invalid_argument("TwoLevelModel: gamma must be >= 0");
  if (!std::isfinite(e1) || !std::isfinite(e2) || !std::isfinite(a1) || !std::isfinite(a2) ||
      !std::isfinite(g)) {
    throw std::invalid_argument("TwoLevelModel: non-finite parameter");
  }
}

lindblad::DephasingGenerator TwoLevelModel::full_generator() const {
  validate();
  lindblad::DephasingGenerator gen;
  ComplexMatrix h0(2, 2), l(2, 2);
  h0 << e1, 0, 0, e2;
  l << a1, 0, 0, a2;
  gen.hamiltonian = h0 + g * pauli_x();
  gen.channels.push_back({l, gamma});
  return gen;
}

lindblad::DephasingGenerator TwoLevelModel::unperturbed_generator() const {
  TwoLevelModel m = *this;
  m.g = 0.0;
  return m.full_generator();
}

ComplexMatrix unperturbed_propagator(const TwoLevelModel& m, double tau, const ComplexMatrix& rho) {
  m.validate();
  if (tau < 0.0) throw std::invalid_argument("unperturbed_propagator: tau must be >= 0");
  if (rho.rows() != 2 || rho.cols() != 2) {
    throw std::invalid_argument("unperturbed_propagator: expected a 2x2 matrix");
  }
  const Complex factor = std::exp(Complex(-m.dephasing_rate(), m.detuning()) * tau);
  ComplexMatrix out = rho;
  out(0, 1) *= factor;
  out(1, 0) *= std::conj(factor);
  return out;
}

FirstOrderCoherence first_order_coherence(const TwoLevelModel& m, double t) {
  m.validate();
  const double rate = m.dephasing_rate();
  const double dw = m.detuning();
  FirstOrderCoherence out;
  if (rate == 0.0 && dw == 0.0) {
    out.degenerate_limit = true;
    out.value = Complex(0.0, t);  // limit of the closed form: linear growth i t
    return out;
  }
  const Complex denom(rate, -dw);
  out.value = Complex(0.0, 1.0) * (1.0 - std::exp(Complex(-rate, dw) * t)) / denom;
  return out;
}

double transition_integral(const TwoLevelModel& m, double t) {
  m.validate();
  if (t < 0.0) throw std::invalid_argument("transition_integral: t must be >= 0");
  const double rate = m.dephasing_rate();
  const double dw = m.detuning();
  if (rate == 0.0 && dw == 0.0) return t;
  // antiderivative of exp(-Gamma u) cos(domega u) evaluated over [0, t]
  const double denom = rate * rate + dw * dw;
  const double damped = std::exp(-rate * t);
  return (rate + damped * (dw * std::sin(dw * t) - rate * std::cos(dw * t))) / denom;
}

double second_order_population_rate(const TwoLevelModel& m, double t) {
  return 2.0 * transition_integral(m, t);
}

double transition_integral_quadrature(const TwoLevelModel& m, double t, int n_panels) {
  m.validate();
  if (n_panels < 1) throw std::invalid_argument("transition_integral_quadrature: n_panels < 1");
  const double rate = m.dephasing_rate();
  const double dw = m.detuning();
  const double h = t / n_panels;
  auto f = [&](double u) { return std::exp(-rate * u) * std::cos(dw * u); };
  double sum = 0.5 * (f(0.0) + f(t));
  for (int i = 1; i < n_panels; ++i) sum += f(h * i);
  return sum * h;
}

double decoherence_gain(const TwoLevelModel& m) {
  m.validate();
  const double rate = m.dephasing_rate();
  const double dw = m.detuning();
  const double denom = rate * rate + dw * dw;
  if (denom == 0.0) {
    throw std::invalid_argument("decoherence_gain: degenerate model (Gamma, domega) = (0, 0)");
  }
  return rate / denom;
}

DysonTerms integrate_hierarchy(const TwoLevelModel& m, double t_end, double dt, int store_stride) {
  m.validate();
  if (dt <= 0.0 || t_end < 0.0 || store_stride < 1) {
    throw std::invalid_argument("integrate_hierarchy: bad grid");
  }

  struct State {
    Matrix2c r0, r1, r2;
  };
  auto rhs = [&](const State& s) {
    State d;
    d.r0 = apply_l0(m, s.r0);
    d.r1 = apply_l0(m, s.r1) + apply_l1(s.r0);
    d.r2 = apply_l0(m, s.r2) + apply_l1(s.r1);
    return d;
  };
  auto axpy = [](const State& s, double c, const State& d) {
    State out;
    out.r0 = s.r0 + c * d.r0;
    out.r1 = s.r1 + c * d.r1;
    out.r2 = s.r2 + c * d.r2;
    return out;
  };

  State s{initial_state(), Matrix2c::Zero(), Matrix2c::Zero()};
  const auto n_steps = static_cast<std::size_t>(std::llround(t_end / dt));

  DysonTerms out;
  auto store = [&](double t) {
    out.times.push_back(t);
    out.order0.push_back(s.r0);
    out.order1.push_back(s.r1);
    out.order2.push_back(s.r2);
  };
  store(0.0);
  for (std::size_t step = 0; step < n_steps; ++step) {
    const State k1 = rhs(s);
    const State k2 = rhs(axpy(s, 0.5 * dt, k1));
    const State k3 = rhs(axpy(s, 0.5 * dt, k2));
    const State k4 = rhs(axpy(s, dt, k3));
    s.r0 += (dt / 6.0) * (k1.r0 + 2.0 * k2.r0 + 2.0 * k3.r0 + k4.r0);
    s.r1 += (dt / 6.0) * (k1.r1 + 2.0 * k2.r1 + 2.0 * k3.r1 + k4.r1);
    s.r2 += (dt / 6.0) * (k1.r2 + 2.0 * k2.r2 + 2.0 * k3.r2 + k4.r2);
    if ((step + 1) % static_cast<std::size_t>(store_stride) == 0 || step + 1 == n_steps) {
      store(dt * static_cast<double>(step + 1));
    }
  }
  return out;
}

DysonComparison dyson_vs_exact(const TwoLevelModel& m, double t_end, double dt) {
  m.validate();
  const DensityMatrix rho0 = DensityMatrix::unchecked(initial_state());
  const lindblad::DensityPath exact = lindblad::propagate(m.full_generator(), rho0, t_end, dt);
  const DysonTerms terms = integrate_hierarchy(m, t_end, dt);

  DysonComparison cmp;
  const double g = m.g;
  for (std::size_t k = 0; k < exact.times.size(); ++k) {
    const Matrix2c series = terms.order0[k] + g * terms.order1[k] + g * g * terms.order2[k];
    const double pop_dev = std::abs(exact.densities[k](1, 1).real() -
                                    g * g * terms.order2[k](1, 1).real());
    cmp.max_population_deviation = std::max(cmp.max_population_deviation, pop_dev);
    cmp.max_series_residual = std::max(
        cmp.max_series_residual, (exact.densities[k] - ComplexMatrix(series)).cwiseAbs().maxCoeff());
  }

  // Late-window slope of the exact rho22, once the transient ~exp(-Gamma t)
  // has died out. Transfer rates are meaningless for g = 0.
  if (g != 0.0 && (m.dephasing_rate() != 0.0 || m.detuning() != 0.0)) {
    const std::size_t i2 = exact.times.size() - 1;
    const std::size_t i1 = i2 / 2;
    cmp.fitted_slope = (exact.densities[i2](1, 1).real() - exact.densities[i1](1, 1).real()) /
                       (exact.times[i2] - exact.times[i1]);
    cmp.predicted_slope = 2.0 * g * g * decoherence_gain(m);
    if (cmp.predicted_slope != 0.0) {
      cmp.slope_relative_error = std::abs(cmp.fitted_slope / cmp.predicted_slope - 1.0);
      cmp.validity_window = 0.1 / cmp.predicted_slope;
    }
  }
  return cmp;
}

std::vector<GainScanRow> gain_scan(const std::vector<double>& rates,
                                   const std::vector<double>& detunings, double g) {
  std::vector<GainScanRow> out;
  out.reserve(rates.size() * detunings.size());
  for (const double rate : rates) {
    if (rate <= 0.0) throw std::invalid_argument("gain_scan: dephasing rates must be > 0");
    for (const double dw : detunings) {
      TwoLevelModel m;
      m.e2 = dw;
      m.a2 = std::sqrt(2.0 * rate);  // gamma = 1, so Gamma = (a1 - a2)^2 / 2
      m.gamma = 1.0;
      m.g = g;
      const double t_end = std::clamp(20.0 / rate, 10.0, 200.0);
      const double dt = 5e-3 / std::max({1.0, rate, std::abs(dw)});
      const DysonComparison cmp = dyson_vs_exact(m, t_end, dt);
      out.push_back({rate, dw, decoherence_gain(m), cmp.fitted_slope});
    }
  }
  return out;
}

}  // namespace decolab::dyson
