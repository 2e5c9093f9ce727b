#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <optional>
#include <stdexcept>
#include <vector>

#include "squidres/levmar.hpp"
#include "squidres/lineshape.hpp"
#include "squidres/resonator.hpp"

namespace squidres {

/// Result of a complex S21 trace fit for {f0, Q, complex scale}.
struct ResonanceFit {
  double f0_hz = 0.0;
  double q = 0.0;
  std::complex<double> scale;
  double residual_norm = 0.0;  // RMS misfit per residual component
  double f0_stderr_hz = 0.0;
  double q_stderr = 0.0;
  double scale_re_stderr = 0.0;
  double scale_im_stderr = 0.0;
  double grad_norm = 0.0;
  int n_iter = 0;
  bool converged = false;
};

/// Result of a flux-tuning-curve fit for {omega_r, Ic0} with beta frozen to
/// the prior, or {omega_r, Ic0, beta} when beta is freed.
struct FluxCurveFit {
  double omega_r = 0.0;
  double ic0_a = 0.0;
  double beta = 0.0;
  bool beta_free = false;
  double residual_norm = 0.0;  // RMS misfit per point, Hz
  double omega_r_stderr = 0.0;
  double ic0_stderr_a = 0.0;
  double beta_stderr = 0.0;
  double grad_norm = 0.0;
  int n_iter = 0;
  bool converged = false;
};

struct FluxPoint {
  Flux flux;
  double f0_hz = 0.0;
  std::optional<double> q;
};

struct FluxDataset {
  std::vector<FluxPoint> points;
};

/// One row of a model Q(Phi) comparison curve. Points where the expansion
/// breaks down carry a flag and no numbers.
struct QCurvePoint {
  Flux flux;
  Validity validity = Validity::ok;
  std::optional<double> f0_hz;
  std::optional<double> q_ext;
  std::optional<double> q_inh;
  std::optional<double> q_total;
};

inline void validate(const FluxDataset& data) {
  for (const auto& pt : data.points) {
    if (!(pt.f0_hz > 0.0)) {
      throw std::invalid_argument("FluxDataset: f0_hz must be > 0");
    }
    if (pt.q && !(*pt.q > 0.0)) {
      throw std::invalid_argument("FluxDataset: q must be > 0 when given");
    }
  }
  std::vector<double> fluxes;
  fluxes.reserve(data.points.size());
  for (const auto& pt : data.points) fluxes.push_back(pt.flux.value);
  std::sort(fluxes.begin(), fluxes.end());
  if (std::adjacent_find(fluxes.begin(), fluxes.end()) != fluxes.end()) {
    throw std::invalid_argument("FluxDataset: flux values must be distinct");
  }
}

namespace detail {

/// Indices of strict local maxima of the magnitude sequence.
inline std::vector<std::size_t> local_maxima(const std::vector<double>& mags) {
  std::vector<std::size_t> idx;
  for (std::size_t i = 1; i + 1 < mags.size(); ++i) {
    if (mags[i] > mags[i - 1] && mags[i] >= mags[i + 1]) idx.push_back(i);
  }
  return idx;
}

/// Interpolated frequency where the magnitude crosses `level`, scanning
/// outward from the peak; nullopt when the trace never drops that far.
inline std::optional<double> half_power_crossing(
    const std::vector<double>& freqs, const std::vector<double>& mags,
    std::size_t peak, double level, bool leftward) {
  if (leftward) {
    for (std::size_t i = peak; i-- > 0;) {
      if (mags[i] < level) {
        const double t = (level - mags[i]) / (mags[i + 1] - mags[i]);
        return freqs[i] + t * (freqs[i + 1] - freqs[i]);
      }
    }
  } else {
    for (std::size_t i = peak + 1; i < mags.size(); ++i) {
      if (mags[i] < level) {
        const double t = (level - mags[i]) / (mags[i - 1] - mags[i]);
        return freqs[i] - t * (freqs[i] - freqs[i - 1]);
      }
    }
  }
  return std::nullopt;
}

}  // namespace detail

/// Peak-based starting point: f0 at the modulus maximum, Q from the
/// interpolated 3 dB width, scale from the peak value. Throws
/// NoPeakInWindow when the trace has no usable resonance and AmbiguousPeak
/// when a second, well-separated peak comes within 6 dB of the highest one.
[[nodiscard]] inline ResonanceFit initial_guess(const S21Trace& trace) {
  validate(trace);
  const std::size_t npts = trace.freqs_hz.size();
  if (npts < 8) {
    throw NoPeakInWindow("trace has " + std::to_string(npts) +
                         " points; at least 8 are needed");
  }
  std::vector<double> mags(npts);
  for (std::size_t i = 0; i < npts; ++i) mags[i] = std::abs(trace.values[i]);

  const std::size_t ipk = static_cast<std::size_t>(
      std::max_element(mags.begin(), mags.end()) - mags.begin());
  if (ipk == 0 || ipk + 1 == npts) {
    throw NoPeakInWindow("magnitude maximum sits on the window edge");
  }
  const double peak = mags[ipk];

  // A rival peak counts only if the valley between it and the main peak
  // drops 3 dB below it; noise wiggles on a flank do not qualify.
  for (std::size_t j : detail::local_maxima(mags)) {
    if (j == ipk || mags[j] < 0.5 * peak) continue;
    const auto [lo, hi] = std::minmax(j, ipk);
    const double valley = *std::min_element(mags.begin() + lo + 1, mags.begin() + hi);
    if (valley <= mags[j] / std::sqrt(2.0)) {
      throw AmbiguousPeak("two peaks within 6 dB of each other in the window");
    }
  }

  const double level = peak / std::sqrt(2.0);
  const auto f_lo = detail::half_power_crossing(trace.freqs_hz, mags, ipk, level, true);
  const auto f_hi = detail::half_power_crossing(trace.freqs_hz, mags, ipk, level, false);
  if (!f_lo || !f_hi) {
    throw NoPeakInWindow("3 dB points not bracketed by the window");
  }

  ResonanceFit guess;
  guess.f0_hz = trace.freqs_hz[ipk];
  guess.q = guess.f0_hz / (*f_hi - *f_lo);
  guess.scale = trace.values[ipk];
  return guess;
}

/// Least-squares fit of scale / (1 + 2iQ (f - f0)/f0) to the trace, stacking
/// real and imaginary residuals with uniform weights. Returns the best
/// iterate with converged=false rather than throwing when the optimizer
/// stalls or wanders out of the window.
[[nodiscard]] inline ResonanceFit fit_resonance(
    const S21Trace& trace, std::optional<ResonanceFit> init = {},
    const FitOptions& opt = {}) {
  if (!init) init = initial_guess(trace);
  validate(trace);
  const std::size_t npts = trace.freqs_hz.size();
  if (npts < 8) {
    throw NoPeakInWindow("trace has " + std::to_string(npts) +
                         " points; at least 8 are needed");
  }

  auto residuals = [&](const std::vector<double>& p) {
    const double f0 = p[0], q = p[1];
    const std::complex<double> scale(p[2], p[3]);
    std::vector<double> r(2 * npts);
    for (std::size_t i = 0; i < npts; ++i) {
      const std::complex<double> denom(1.0, 2.0 * q * (trace.freqs_hz[i] - f0) / f0);
      const std::complex<double> diff = scale / denom - trace.values[i];
      r[2 * i] = diff.real();
      r[2 * i + 1] = diff.imag();
    }
    return r;
  };

  const LevmarResult lm = levmar(
      residuals, {init->f0_hz, init->q, init->scale.real(), init->scale.imag()},
      opt);

  ResonanceFit fit;
  fit.f0_hz = lm.params[0];
  fit.q = lm.params[1];
  fit.scale = {lm.params[2], lm.params[3]};
  fit.residual_norm =
      lm.residual_norm / std::sqrt(2.0 * static_cast<double>(trace.freqs_hz.size()));
  fit.grad_norm = lm.grad_norm;
  fit.n_iter = lm.n_iter;
  fit.converged = lm.converged;
  if (lm.stderrs.size() == 4) {
    fit.f0_stderr_hz = lm.stderrs[0];
    fit.q_stderr = lm.stderrs[1];
    fit.scale_re_stderr = lm.stderrs[2];
    fit.scale_im_stderr = lm.stderrs[3];
  }
  if (fit.f0_hz < trace.freqs_hz.front() || fit.f0_hz > trace.freqs_hz.back() ||
      !(fit.q > 0.0)) {
    fit.converged = false;
  }
  return fit;
}

/// Fit the flux-tuning curve f0(Phi) = omega_r / (2 pi [1 + N eps(Phi)])
/// over {omega_r, Ic0}, optionally also beta. The prior device fixes L and
/// N and provides starting values; beta stays frozen to the prior by
/// default because beta and Ic0 are nearly degenerate over a limited span.
[[nodiscard]] inline FluxCurveFit fit_flux_curve(const FluxDataset& data,
                                                 const DeviceModel& dev_prior,
                                                 bool free_beta = false,
                                                 const FitOptions& opt = {}) {
  validate(data);
  validate(dev_prior);
  if (dev_prior.n_squids < 1 || !dev_prior.squid) {
    throw std::invalid_argument("fit_flux_curve: prior device has no SQUIDs");
  }
  if (data.points.size() < 4) {
    throw InsufficientFluxSpan("flux fit needs at least 4 points, got " +
                               std::to_string(data.points.size()));
  }
  double lo = data.points.front().flux.reduced().value, hi = lo;
  for (const auto& pt : data.points) {
    lo = std::min(lo, pt.flux.reduced().value);
    hi = std::max(hi, pt.flux.reduced().value);
  }
  if (hi - lo < 0.3) {
    throw InsufficientFluxSpan("flux span " + std::to_string(hi - lo) +
                               " Phi0 is below the 0.3 Phi0 minimum");
  }

  const double n = dev_prior.n_squids;
  const double l_total = dev_prior.bare.l_h;
  const double beta_prior = dev_prior.squid->beta();

  auto model_f0 = [&](double omega_r, double ic0, double beta, Flux flux) {
    const SquidParams sq{ic0, beta * constants::reduced_flux_quantum / ic0};
    const double eps = squid_linear_inductance(sq, flux) / l_total;
    return omega_r / (2.0 * constants::pi * (1.0 + n * eps));
  };

  auto residuals = [&](const std::vector<double>& p) {
    const double beta = free_beta ? p[2] : beta_prior;
    std::vector<double> r(data.points.size());
    for (std::size_t i = 0; i < data.points.size(); ++i) {
      const auto& pt = data.points[i];
      if (!(p[1] > 0.0) || beta < 0.0) {
        r[i] = 1e12;
        continue;
      }
      try {
        r[i] = model_f0(p[0], p[1], beta, pt.flux) - pt.f0_hz;
      } catch (const ModelError&) {
        r[i] = 1e12;
      }
    }
    return r;
  };

  std::vector<double> p0 = {dev_prior.bare.omega_r, dev_prior.squid->ic0_a};
  if (free_beta) p0.push_back(beta_prior);
  const LevmarResult lm = levmar(residuals, p0, opt);

  FluxCurveFit fit;
  fit.omega_r = lm.params[0];
  fit.ic0_a = lm.params[1];
  fit.beta = free_beta ? lm.params[2] : beta_prior;
  fit.beta_free = free_beta;
  fit.residual_norm =
      lm.residual_norm / std::sqrt(static_cast<double>(data.points.size()));
  fit.grad_norm = lm.grad_norm;
  fit.n_iter = lm.n_iter;
  fit.converged = lm.converged;
  if (lm.stderrs.size() >= 2) {
    fit.omega_r_stderr = lm.stderrs[0];
    fit.ic0_stderr_a = lm.stderrs[1];
    if (free_beta && lm.stderrs.size() == 3) fit.beta_stderr = lm.stderrs[2];
  }
  if (fit.beta > -1e-6 && fit.beta < 0.0) fit.beta = 0.0;
  if (!(fit.ic0_a > 0.0) || fit.beta < 0.0 || fit.beta >= 1.0) {
    fit.converged = false;
  }
  return fit;
}

/// Model Q(Phi) curve aligned with the requested flux list; points inside
/// the half-quantum cutoff are flagged, never fabricated.
[[nodiscard]] inline std::vector<QCurvePoint> model_q_curve(
    const DeviceModel& dev, ThermalEnv env, const std::vector<Flux>& fluxes) {
  validate(dev);
  std::vector<QCurvePoint> curve;
  curve.reserve(fluxes.size());
  for (Flux flux : fluxes) {
    QCurvePoint pt;
    pt.flux = flux;
    pt.validity = flux_validity(dev, flux);
    if (pt.validity == Validity::ok) {
      pt.f0_hz = resonance_frequency(dev, flux) / (2.0 * constants::pi);
      pt.q_ext = external_q(dev, flux);
      pt.q_inh = inhomogeneous_q(dev, flux, env);
      pt.q_total = total_q(dev, flux, env);
    }
    curve.push_back(pt);
  }
  return curve;
}

}  // namespace squidres
