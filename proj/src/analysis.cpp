#include "geoq/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <stdexcept>

#include <Eigen/Dense>

#include "geoq/rng.hpp"

namespace geoq {

namespace {

using Eigen::MatrixXd;
using Eigen::VectorXd;

// ---------------------------------------------------------------------------
// Damped Gauss-Newton (Levenberg-Marquardt) with analytic Jacobians and
// simple box bounds enforced by clamping the accepted step.  The parameter
// counts here are tiny (2-3), so no general optimizer is needed.
// ---------------------------------------------------------------------------

struct LmModel {
  std::function<double(double, const VectorXd&)> value;
  std::function<void(double, const VectorXd&, VectorXd&)> gradient;
  VectorXd lower;
  VectorXd upper;
};

struct LmOutcome {
  VectorXd params;
  MatrixXd covariance;
  double residual_norm = 0.0;
  bool converged = false;
  int iterations = 0;
};

VectorXd clamp_to_bounds(VectorXd theta, const LmModel& model) {
  for (Eigen::Index k = 0; k < theta.size(); ++k) {
    theta(k) = std::min(model.upper(k), std::max(model.lower(k), theta(k)));
  }
  return theta;
}

double sum_squared_residuals(const LmModel& model, const VectorXd& x, const VectorXd& y,
                             const VectorXd& theta) {
  double ssr = 0.0;
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    const double r = y(i) - model.value(x(i), theta);
    ssr += r * r;
  }
  return ssr;
}

LmOutcome lm_fit(const LmModel& model, const VectorXd& x, const VectorXd& y, VectorXd theta) {
  const Eigen::Index n_params = theta.size();
  const Eigen::Index m = x.size();
  theta = clamp_to_bounds(std::move(theta), model);

  double lambda = 1e-3;
  double ssr = sum_squared_residuals(model, x, y, theta);
  LmOutcome out;
  out.converged = false;

  VectorXd grad_row(n_params);
  MatrixXd jacobian(m, n_params);
  VectorXd residuals(m);

  const int max_iterations = 200;
  int iteration = 0;
  for (; iteration < max_iterations; ++iteration) {
    for (Eigen::Index i = 0; i < m; ++i) {
      residuals(i) = y(i) - model.value(x(i), theta);
      model.gradient(x(i), theta, grad_row);
      jacobian.row(i) = grad_row;
    }
    const MatrixXd jtj = jacobian.transpose() * jacobian;
    const VectorXd jtr = jacobian.transpose() * residuals;

    if (jtr.cwiseAbs().maxCoeff() < 1e-14 * (1.0 + std::sqrt(ssr))) {
      out.converged = true;
      break;
    }

    bool accepted = false;
    for (int tries = 0; tries < 40; ++tries) {
      MatrixXd damped = jtj;
      for (Eigen::Index k = 0; k < n_params; ++k) {
        damped(k, k) += lambda * std::max(jtj(k, k), 1e-12);
      }
      const VectorXd step = damped.ldlt().solve(jtr);
      const VectorXd candidate = clamp_to_bounds(theta + step, model);
      const double candidate_ssr = sum_squared_residuals(model, x, y, candidate);

      if (candidate_ssr <= ssr * (1.0 + 1e-14) + 1e-300) {
        const double step_size = (candidate - theta).cwiseAbs().maxCoeff();
        const double improvement = ssr - candidate_ssr;
        theta = candidate;
        ssr = candidate_ssr;
        lambda = std::max(lambda * 0.25, 1e-12);
        accepted = true;
        if (step_size < 1e-12 * (1.0 + theta.cwiseAbs().maxCoeff()) ||
            improvement < 1e-16 * (ssr + 1e-30)) {
          out.converged = true;
        }
        break;
      }
      lambda *= 10.0;
      if (lambda > 1e14) break;
    }
    if (!accepted || out.converged) {
      // A rejected step at maximal damping means a (possibly bound-pinned)
      // stationary point.
      if (!accepted) out.converged = true;
      break;
    }
  }

  // Covariance from the residual-scaled normal equations at the optimum.
  for (Eigen::Index i = 0; i < m; ++i) {
    residuals(i) = y(i) - model.value(x(i), theta);
    model.gradient(x(i), theta, grad_row);
    jacobian.row(i) = grad_row;
  }
  ssr = residuals.squaredNorm();
  const Eigen::Index dof = m - n_params;
  MatrixXd jtj = jacobian.transpose() * jacobian;
  for (Eigen::Index k = 0; k < n_params; ++k) jtj(k, k) += 1e-300;
  const double s2 = dof > 0 ? ssr / static_cast<double>(dof) : 0.0;
  out.covariance = s2 * jtj.inverse();
  out.params = theta;
  out.residual_norm = std::sqrt(ssr);
  out.iterations = iteration;
  return out;
}

FitResult package_fit(const LmOutcome& outcome, const std::vector<std::string>& names) {
  FitResult fit;
  fit.residual_norm = outcome.residual_norm;
  fit.converged = outcome.converged;
  fit.iterations = outcome.iterations;
  for (size_t k = 0; k < names.size(); ++k) {
    fit.parameters[names[k]] = outcome.params(static_cast<Eigen::Index>(k));
    const double var = outcome.covariance(static_cast<Eigen::Index>(k), static_cast<Eigen::Index>(k));
    fit.standard_errors[names[k]] = std::sqrt(std::max(0.0, var));
  }
  return fit;
}

void bootstrap_errors(FitResult& fit, const LmModel& model, const VectorXd& x, const VectorXd& y,
                      const VectorXd& theta0, const std::vector<std::string>& names,
                      const FitOptions& options) {
  if (options.bootstrap_resamples <= 0) return;
  const Eigen::Index m = x.size();

  VectorXd fitted(m), residuals(m);
  VectorXd best(static_cast<Eigen::Index>(names.size()));
  for (size_t k = 0; k < names.size(); ++k) {
    best(static_cast<Eigen::Index>(k)) = fit.parameters.at(names[k]);
  }
  for (Eigen::Index i = 0; i < m; ++i) {
    fitted(i) = model.value(x(i), best);
    residuals(i) = y(i) - fitted(i);
  }

  std::vector<VectorXd> samples;
  samples.reserve(options.bootstrap_resamples);
  for (int b = 0; b < options.bootstrap_resamples; ++b) {
    Rng rng(derive_seed(options.bootstrap_seed, static_cast<uint64_t>(b)));
    VectorXd resampled(m);
    for (Eigen::Index i = 0; i < m; ++i) {
      const auto pick = static_cast<Eigen::Index>(rng.uniform() * m);
      resampled(i) = fitted(i) + residuals(std::min(pick, m - 1));
    }
    samples.push_back(lm_fit(model, x, resampled, theta0).params);
  }

  for (size_t k = 0; k < names.size(); ++k) {
    double mean = 0.0;
    for (const auto& s : samples) mean += s(static_cast<Eigen::Index>(k));
    mean /= samples.size();
    double var = 0.0;
    for (const auto& s : samples) {
      const double d = s(static_cast<Eigen::Index>(k)) - mean;
      var += d * d;
    }
    var /= std::max<size_t>(1, samples.size() - 1);
    fit.standard_errors[names[k]] = std::sqrt(var);
  }
}

VectorXd to_eigen(const std::vector<double>& v) {
  return Eigen::Map<const VectorXd>(v.data(), static_cast<Eigen::Index>(v.size()));
}

}  // namespace

FitResult fit_gate_error(const std::vector<double>& n_values,
                         const std::vector<double>& fidelities, const FitOptions& options) {
  if (n_values.size() != fidelities.size()) {
    throw std::invalid_argument("fit_gate_error: size mismatch");
  }
  if (n_values.size() < 3) {
    throw std::invalid_argument("fit_gate_error: need at least 3 points");
  }
  for (double f : fidelities) {
    if (!(f >= 0.0 && f <= 1.0)) {
      throw std::invalid_argument("fit_gate_error: fidelities must lie in [0, 1]");
    }
  }

  LmModel model;
  model.lower = VectorXd::Constant(2, -1.0);
  model.upper = VectorXd::Constant(2, 1.0 - 1e-9);
  model.value = [](double n, const VectorXd& t) {
    return (1.0 - t(0)) * std::pow(1.0 - t(1), n);
  };
  model.gradient = [](double n, const VectorXd& t, VectorXd& g) {
    const double base = 1.0 - t(1);
    const double pow_n = std::pow(base, n);
    g(0) = -pow_n;
    g(1) = -(1.0 - t(0)) * n * std::pow(base, n - 1.0);
  };

  // Initial guesses: epsilon0 from the smallest-N fidelity, epsilon_gate
  // from the log-slope.
  const auto i_min = std::distance(
      n_values.begin(), std::min_element(n_values.begin(), n_values.end()));
  double eps0 = 1.0 - fidelities[i_min];
  double sum_n = 0.0, sum_n2 = 0.0, sum_l = 0.0, sum_nl = 0.0;
  int m_used = 0;
  for (size_t i = 0; i < n_values.size(); ++i) {
    if (fidelities[i] <= 0.0) continue;
    const double l = std::log(fidelities[i]);
    sum_n += n_values[i];
    sum_n2 += n_values[i] * n_values[i];
    sum_l += l;
    sum_nl += n_values[i] * l;
    ++m_used;
  }
  double eps_gate = 0.0;
  const double denom = m_used * sum_n2 - sum_n * sum_n;
  if (m_used >= 2 && std::abs(denom) > 0.0) {
    const double slope = (m_used * sum_nl - sum_n * sum_l) / denom;
    eps_gate = 1.0 - std::exp(slope);
  }

  VectorXd theta0(2);
  theta0 << eps0, eps_gate;
  const LmOutcome outcome = lm_fit(model, to_eigen(n_values), to_eigen(fidelities), theta0);
  FitResult fit = package_fit(outcome, {"epsilon0", "epsilon_gate"});
  bootstrap_errors(fit, model, to_eigen(n_values), to_eigen(fidelities), theta0,
                   {"epsilon0", "epsilon_gate"}, options);
  return fit;
}

FitResult fit_coherence_envelope(const std::vector<double>& times_ms,
                                 const std::vector<double>& amplitudes,
                                 const FitOptions& options) {
  if (times_ms.size() != amplitudes.size()) {
    throw std::invalid_argument("fit_coherence_envelope: size mismatch");
  }
  if (times_ms.size() < 4) {
    throw std::invalid_argument("fit_coherence_envelope: need at least 4 points");
  }
  double a_max = 0.0;
  for (size_t i = 0; i < times_ms.size(); ++i) {
    if (!(times_ms[i] > 0.0)) {
      throw std::invalid_argument("fit_coherence_envelope: times must be > 0");
    }
    if (!(amplitudes[i] >= 0.0 && amplitudes[i] <= 1.05)) {
      throw std::invalid_argument("fit_coherence_envelope: amplitudes must lie in [0, 1.05]");
    }
    a_max = std::max(a_max, amplitudes[i]);
  }
  if (a_max <= 0.0) {
    throw std::invalid_argument("fit_coherence_envelope: amplitudes are all zero");
  }

  LmModel model;
  model.lower = VectorXd(3);
  model.upper = VectorXd(3);
  model.lower << 1e-9, 1e-9, 1.0;
  model.upper << 2.0, 1e12, 4.0;
  model.value = [](double t, const VectorXd& th) {
    return th(0) * std::exp(-std::pow(t / th(1), th(2)));
  };
  model.gradient = [](double t, const VectorXd& th, VectorXd& g) {
    const double u = std::pow(t / th(1), th(2));
    const double e = std::exp(-u);
    g(0) = e;
    g(1) = th(0) * e * th(2) * u / th(1);
    g(2) = -th(0) * e * u * std::log(t / th(1));
  };

  // 1/e crossing of the normalized amplitude seeds T2.
  double t2_guess = times_ms.back();
  const double level = a_max / std::exp(1.0);
  for (size_t i = 0; i + 1 < times_ms.size(); ++i) {
    if (amplitudes[i] >= level && amplitudes[i + 1] < level) {
      const double frac = (amplitudes[i] - level) /
                          std::max(1e-300, amplitudes[i] - amplitudes[i + 1]);
      t2_guess = times_ms[i] + frac * (times_ms[i + 1] - times_ms[i]);
      break;
    }
  }

  VectorXd theta0(3);
  theta0 << a_max, t2_guess, 2.0;
  const LmOutcome outcome = lm_fit(model, to_eigen(times_ms), to_eigen(amplitudes), theta0);
  FitResult fit = package_fit(outcome, {"plateau", "t2_ms", "p"});
  bootstrap_errors(fit, model, to_eigen(times_ms), to_eigen(amplitudes), theta0,
                   {"plateau", "t2_ms", "p"}, options);
  return fit;
}

double pure_coherence_time(double t2_ms, double t1_ms) {
  if (!(t1_ms > 0.0)) {
    throw std::invalid_argument("pure_coherence_time: t1 must be > 0");
  }
  if (!(t2_ms > 0.0)) {
    throw std::invalid_argument("pure_coherence_time: t2 must be > 0");
  }
  if (t2_ms >= t1_ms * (1.0 - 1e-9)) {
    throw std::domain_error(
        "pure_coherence_time: t2 >= t1, the observed coherence time is limited by t1");
  }
  return 1.0 / (1.0 / t2_ms - 1.0 / t1_ms);
}

ValueWithError pure_coherence_time(const ValueWithError& t2_ms, const ValueWithError& t1_ms) {
  ValueWithError out;
  out.value = pure_coherence_time(t2_ms.value, t1_ms.value);
  const double d_t2 = out.value * out.value / (t2_ms.value * t2_ms.value);
  const double d_t1 = out.value * out.value / (t1_ms.value * t1_ms.value);
  out.std_error = std::hypot(d_t2 * t2_ms.std_error, d_t1 * t1_ms.std_error);
  return out;
}

FitResult fit_power_law(const std::vector<double>& n_values,
                        const std::vector<double>& t_values, const FitOptions& options) {
  if (n_values.size() != t_values.size()) {
    throw std::invalid_argument("fit_power_law: size mismatch");
  }
  const size_t m = n_values.size();
  if (m < 3) {
    throw std::invalid_argument("fit_power_law: need at least 3 points");
  }
  for (size_t i = 0; i < m; ++i) {
    if (!(n_values[i] > 0.0) || !(t_values[i] > 0.0)) {
      throw std::invalid_argument("fit_power_law: inputs must be positive");
    }
  }

  // Linear regression in log-log space.
  double sx = 0.0, sy = 0.0;
  for (size_t i = 0; i < m; ++i) {
    sx += std::log(n_values[i]);
    sy += std::log(t_values[i]);
  }
  const double x_bar = sx / m, y_bar = sy / m;
  double sxx = 0.0, sxy = 0.0;
  for (size_t i = 0; i < m; ++i) {
    const double dx = std::log(n_values[i]) - x_bar;
    sxx += dx * dx;
    sxy += dx * (std::log(t_values[i]) - y_bar);
  }
  if (!(sxx > 0.0)) {
    throw std::invalid_argument("fit_power_law: n values are all equal");
  }
  const double slope = sxy / sxx;
  const double intercept = y_bar - slope * x_bar;

  double ssr = 0.0;
  for (size_t i = 0; i < m; ++i) {
    const double r = std::log(t_values[i]) - (intercept + slope * std::log(n_values[i]));
    ssr += r * r;
  }
  const double s2 = m > 2 ? ssr / static_cast<double>(m - 2) : 0.0;

  FitResult fit;
  fit.parameters["exponent"] = slope;
  fit.parameters["prefactor"] = std::exp(intercept);
  fit.standard_errors["exponent"] = std::sqrt(s2 / sxx);
  fit.standard_errors["prefactor"] =
      std::exp(intercept) * std::sqrt(s2 * (1.0 / m + x_bar * x_bar / sxx));
  fit.residual_norm = std::sqrt(ssr);
  fit.converged = true;
  fit.iterations = 0;

  if (options.bootstrap_resamples > 0) {
    std::vector<double> fitted(m), residuals(m);
    for (size_t i = 0; i < m; ++i) {
      fitted[i] = intercept + slope * std::log(n_values[i]);
      residuals[i] = std::log(t_values[i]) - fitted[i];
    }
    std::vector<double> slopes;
    for (int b = 0; b < options.bootstrap_resamples; ++b) {
      Rng rng(derive_seed(options.bootstrap_seed, static_cast<uint64_t>(b)));
      double bsy = 0.0, bsxy = 0.0;
      std::vector<double> y_star(m);
      for (size_t i = 0; i < m; ++i) {
        const auto pick = std::min(m - 1, static_cast<size_t>(rng.uniform() * m));
        y_star[i] = fitted[i] + residuals[pick];
        bsy += y_star[i];
      }
      const double by_bar = bsy / m;
      for (size_t i = 0; i < m; ++i) {
        bsxy += (std::log(n_values[i]) - x_bar) * (y_star[i] - by_bar);
      }
      slopes.push_back(bsxy / sxx);
    }
    double mean = 0.0;
    for (double s : slopes) mean += s;
    mean /= slopes.size();
    double var = 0.0;
    for (double s : slopes) var += (s - mean) * (s - mean);
    var /= std::max<size_t>(1, slopes.size() - 1);
    fit.standard_errors["exponent"] = std::sqrt(var);
  }
  return fit;
}

DipReport find_dips(const std::vector<double>& taus_us, const std::vector<double>& fidelities,
                    double prominence) {
  if (taus_us.size() != fidelities.size()) {
    throw std::invalid_argument("find_dips: size mismatch");
  }
  const size_t n = taus_us.size();
  if (n < 5) {
    throw std::invalid_argument("find_dips: need at least 5 points");
  }
  for (size_t i = 1; i < n; ++i) {
    if (!(taus_us[i] > taus_us[i - 1])) {
      throw std::invalid_argument("find_dips: taus must be strictly increasing");
    }
  }

  // Rolling median as the local baseline.  The window is deliberately wide
  // so that a dip spanning a sizable fraction of the scan still sits below
  // its own baseline.
  size_t window = std::max<size_t>(5, (2 * n) / 3);
  if (window % 2 == 0) ++window;
  std::vector<double> baseline(n);
  std::vector<double> buffer;
  for (size_t i = 0; i < n; ++i) {
    const size_t lo = i >= window / 2 ? i - window / 2 : 0;
    const size_t hi = std::min(n, i + window / 2 + 1);
    buffer.assign(fidelities.begin() + lo, fidelities.begin() + hi);
    std::nth_element(buffer.begin(), buffer.begin() + buffer.size() / 2, buffer.end());
    baseline[i] = buffer[buffer.size() / 2];
  }

  // Candidate minima, merged when the curve between two of them never
  // recovers by at least the prominence (one broad dip, several wiggles).
  std::vector<size_t> candidates;
  for (size_t i = 1; i + 1 < n; ++i) {
    const bool local_min = fidelities[i] < fidelities[i - 1] && fidelities[i] <= fidelities[i + 1];
    if (!local_min || !(fidelities[i] < baseline[i] - prominence)) continue;
    if (!candidates.empty()) {
      const size_t prev = candidates.back();
      double recovery = 0.0;
      for (size_t j = prev; j <= i; ++j) recovery = std::max(recovery, fidelities[j]);
      if (recovery < std::min(fidelities[prev], fidelities[i]) + prominence) {
        if (fidelities[i] < fidelities[prev]) candidates.back() = i;
        continue;
      }
    }
    candidates.push_back(i);
  }

  DipReport report;
  for (size_t i : candidates) {

    // Parabolic refinement of the dip position.
    double position = taus_us[i];
    const double x0 = taus_us[i - 1], x1 = taus_us[i], x2 = taus_us[i + 1];
    const double y0 = fidelities[i - 1], y1 = fidelities[i], y2 = fidelities[i + 1];
    const double num = (x1 - x0) * (x1 - x0) * (y1 - y2) - (x1 - x2) * (x1 - x2) * (y1 - y0);
    const double den = (x1 - x0) * (y1 - y2) - (x1 - x2) * (y1 - y0);
    if (std::abs(den) > 1e-300) position = x1 - 0.5 * num / den;

    // Full width at half prominence, linearly interpolated crossings.
    const double level = fidelities[i] + 0.5 * (baseline[i] - fidelities[i]);
    double left = taus_us.front();
    for (size_t j = i; j-- > 0;) {
      if (fidelities[j] >= level) {
        const double frac = (level - fidelities[j + 1]) /
                            std::max(1e-300, fidelities[j] - fidelities[j + 1]);
        left = taus_us[j + 1] + frac * (taus_us[j] - taus_us[j + 1]);
        break;
      }
    }
    double right = taus_us.back();
    for (size_t j = i + 1; j < n; ++j) {
      if (fidelities[j] >= level) {
        const double frac = (level - fidelities[j - 1]) /
                            std::max(1e-300, fidelities[j] - fidelities[j - 1]);
        right = taus_us[j - 1] + frac * (taus_us[j] - taus_us[j - 1]);
        break;
      }
    }

    report.dip_positions_us.push_back(position);
    report.dip_widths_us.push_back(right - left);
  }

  if (!report.empty()) {
    if (report.dip_positions_us.size() >= 2) {
      double spacing = 0.0;
      for (size_t k = 1; k < report.dip_positions_us.size(); ++k) {
        spacing += report.dip_positions_us[k] - report.dip_positions_us[k - 1];
      }
      report.mean_spacing_us = spacing / (report.dip_positions_us.size() - 1);
    } else {
      report.mean_spacing_us = report.dip_positions_us.front();
    }
    report.estimated_detuning_khz = 1e3 / report.mean_spacing_us;
  }
  return report;
}

}  // namespace geoq
