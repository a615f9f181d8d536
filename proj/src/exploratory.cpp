#include "mvrl/exploratory.hpp"

#include <cmath>
#include <string>

#include "mvrl/common.hpp"

namespace mvrl {
namespace {

constexpr double kPi = 3.141592653589793238462643383279502884;

// Expands `g`'s knot set to span [a, b]: interior knots are kept, the span
// endpoints are added, knots outside are dropped (the curve is extended
// constantly there, so they carry no information).
TimeGrid span_grid(const TimeGrid& g, double a, double b) {
  std::vector<double> knots;
  knots.push_back(a);
  for (int i = 0; i <= g.segments(); ++i) {
    const double k = g.knot(i);
    if (k > a + 1e-12 && k < b - 1e-12) knots.push_back(k);
  }
  knots.push_back(b);
  return TimeGrid(std::move(knots));
}

// Everything segment-local that policy evaluation needs, with the policy's
// curves re-based so that h measures backward time from this segment's right
// end (h = 0 at the right knot, h = length at the left knot).
struct SegmentCoeffs {
  double f = 0.0;   // a1'(mu - r)
  double g = 0.0;   // a1' Sigma a1
  double b1 = 0.0;  // f - g
  double q = 0.0;   // 2 f - g
  ExpSum a0;
  double a2_level = 0.0;
  double a2_slope = 0.0;
  double ln_det_A3 = 0.0;
  double tr_sigma_A3 = 0.0;
};

SegmentCoeffs make_coeffs(const GaussianPolicy& policy, const MarketModel& model, double u,
                          double v) {
  const double mid = 0.5 * (u + v);
  SegmentCoeffs c;

  const Eigen::VectorXd excess = model.excess_at(mid);
  const Eigen::MatrixXd Sigma = covariance_from(model.sigma_at(mid), model.rho).first;

  const TimeGrid& pg = policy.grid();
  const double p_begin = pg.begin();
  const double p_end = pg.end();

  Eigen::VectorXd a1;
  Eigen::MatrixXd A3;
  if (v <= p_begin + 1e-12) {
    // Before the policy's span: frozen at its earliest instant.
    a1 = policy.a1_at(p_begin);
    A3 = policy.A3_at(p_begin);
    c.a0 = ExpSum::constant(policy.a0_at(p_begin));
    c.a2_level = policy.a2_at(p_begin);
    c.a2_slope = 0.0;
  } else if (u >= p_end - 1e-12) {
    // After the policy's span: frozen at its latest instant.
    a1 = policy.a1_at(p_end);
    A3 = policy.A3_at(p_end);
    c.a0 = ExpSum::constant(policy.a0_at(p_end));
    c.a2_level = policy.a2_at(p_end);
    c.a2_slope = 0.0;
  } else {
    const int kp = pg.segment_of(mid);
    const PolicySegment& seg = policy.segment(kp);
    a1 = seg.a1;
    A3 = seg.A3;
    // The policy segment's h is measured from its own right knot; shift the
    // argument by the offset between that knot and this segment's right end.
    const double delta = std::max(0.0, pg.knot(kp + 1) - v);
    c.a0 = seg.a0.shifted_argument(delta);
    c.a2_level = seg.a2_level + seg.a2_slope * delta;
    c.a2_slope = seg.a2_slope;
  }

  c.f = a1.dot(excess);
  c.g = a1.dot(Sigma * a1);
  c.b1 = c.f - c.g;
  // For improved policies b1 = f - g is zero in exact arithmetic; rounding
  // residue here would otherwise seed spurious mixture terms whose polynomial
  // degree grows with every evaluate/improve round.
  if (std::abs(c.b1) <= 1e-12 * std::max({1.0, std::abs(c.f), std::abs(c.g)})) c.b1 = 0.0;
  c.q = 2.0 * c.f - c.g;

  Eigen::LLT<Eigen::MatrixXd> llt(A3);
  require(llt.info() == Eigen::Success, ErrorCategory::numeric,
          "policy covariance shape matrix is not positive definite");
  double log_det = 0.0;
  for (Eigen::Index i = 0; i < A3.rows(); ++i) log_det += std::log(llt.matrixL()(i, i));
  c.ln_det_A3 = 2.0 * log_det;
  c.tr_sigma_A3 = (Sigma * A3).trace();
  return c;
}

// Piecewise-constant ln|Sigma(t)| on the model's grid.
PiecewiseScalar log_det_sigma_curve(const MarketModel& model) {
  std::vector<double> vals(static_cast<std::size_t>(model.grid.segments()));
  for (int k = 0; k < model.grid.segments(); ++k) {
    const double mid = 0.5 * (model.grid.knot(k) + model.grid.knot(k + 1));
    const Eigen::MatrixXd Sigma = covariance_from(model.sigma_at(mid), model.rho).first;
    Eigen::LLT<Eigen::MatrixXd> llt(Sigma);
    require(llt.info() == Eigen::Success, ErrorCategory::numeric,
            "covariance matrix is not positive definite");
    double log_det = 0.0;
    for (Eigen::Index i = 0; i < Sigma.rows(); ++i) log_det += std::log(llt.matrixL()(i, i));
    vals[k] = 2.0 * log_det;
  }
  return PiecewiseScalar{model.grid, std::move(vals)};
}

double optimal_value_impl(double t, double w, const ExploratoryConfig& cfg,
                          const Profitability& prof, const MarketModel& model) {
  const double T = cfg.T;
  const double n = static_cast<double>(model.assets());
  const PiecewiseScalar ln_sigma = log_det_sigma_curve(model);

  // Signed backward integrals; for t beyond T the curves are in their constant
  // extensions, which keeps the closed form smooth across the boundary.
  double int_A, dbl_A, int_ln_sigma;
  if (t <= T) {
    int_A = prof.A.integral(t, T);
    dbl_A = prof.A.backward_double_integral(t, T);
    int_ln_sigma = ln_sigma.integral(t, T);
  } else {
    const double over = t - T;
    const double a_end = prof.A.value_at(t);
    int_A = -prof.A.integral(T, t);
    dbl_A = 0.5 * a_end * over * over;
    int_ln_sigma = -ln_sigma.integral(T, t);
  }

  const double tau = prof.tau;
  const double dev = w - tau / (2.0 * cfg.gamma);
  const double quadratic = -cfg.gamma * std::exp(-int_A) * dev * dev;
  const double constant = tau * tau / (4.0 * cfg.gamma);
  const double entropy_term =
      0.5 * cfg.lambda *
      (n * std::log(kPi * cfg.lambda / cfg.gamma) * (T - t) - int_ln_sigma + n * dbl_A);
  return quadratic + constant + entropy_term;
}

}  // namespace

void ExploratoryConfig::validate() const {
  require(std::isfinite(lambda) && lambda > 0.0, ErrorCategory::validation,
          "exploration weight must be positive");
  require(std::isfinite(gamma) && gamma > 0.0, ErrorCategory::validation,
          "risk weight must be positive");
  require(std::isfinite(w0), ErrorCategory::validation, "initial wealth must be finite");
  require(std::isfinite(T) && T > 0.0, ErrorCategory::validation, "horizon must be positive");
}

double gaussian_entropy(const Eigen::MatrixXd& cov) {
  require(cov.rows() == cov.cols() && cov.rows() > 0, ErrorCategory::validation,
          "covariance must be square and non-empty");
  require(cov.isApprox(cov.transpose(), 1e-10), ErrorCategory::validation,
          "covariance must be symmetric");
  Eigen::LLT<Eigen::MatrixXd> llt(cov);
  require(llt.info() == Eigen::Success, ErrorCategory::validation,
          "covariance must be positive definite");
  double log_det = 0.0;
  for (Eigen::Index i = 0; i < cov.rows(); ++i) log_det += std::log(llt.matrixL()(i, i));
  log_det *= 2.0;
  const double n = static_cast<double>(cov.rows());
  return 0.5 * n * std::log(2.0 * kPi * std::exp(1.0)) + 0.5 * log_det;
}

PolicyMoments optimal_policy(double t, double w, const ExploratoryConfig& cfg,
                             const Profitability& prof, const Eigen::VectorXd& mu_minus_r,
                             const Eigen::MatrixXd& Sigma_inv) {
  cfg.validate();
  require(t >= -1e-12 && t <= cfg.T + 1e-12, ErrorCategory::validation,
          "time must lie within [0, T]");
  PolicyMoments out;
  out.mean = (prof.tau / (2.0 * cfg.gamma) - w) * (Sigma_inv * mu_minus_r);
  const double clamped = std::min(std::max(t, 0.0), cfg.T);
  const double tail = prof.A.integral(clamped, cfg.T);
  out.cov = 0.5 * cfg.lambda * std::exp(tail) / cfg.gamma * Sigma_inv;
  return out;
}

GaussianPolicy optimal_policy_curve(const ExploratoryConfig& cfg, const Profitability& prof,
                                    const MarketModel& model) {
  cfg.validate();
  const TimeGrid grid = model.effective_grid(0.0, cfg.T);
  std::vector<PolicySegment> segments;
  segments.reserve(static_cast<std::size_t>(grid.segments()));
  for (int k = 0; k < grid.segments(); ++k) {
    const double u = grid.knot(k);
    const double v = grid.knot(k + 1);
    const double mid = 0.5 * (u + v);
    const Eigen::VectorXd excess = model.excess_at(mid);
    const Eigen::MatrixXd Sigma_inv = covariance_from(model.sigma_at(mid), model.rho).second;

    PolicySegment seg;
    seg.a1 = Sigma_inv * excess;
    seg.A3 = Sigma_inv;
    seg.a0 = ExpSum::constant(prof.tau / (2.0 * cfg.gamma));
    // Covariance e^{a2} Sigma^{-1} with a2(t) = ln(lambda/(2 gamma)) + K(t,T)(T-t);
    // the tail integral of A is affine in backward time within a segment.
    const double tail_at_v = prof.A.integral(v, cfg.T);
    seg.a2_level = std::log(0.5 * cfg.lambda / cfg.gamma) + tail_at_v;
    seg.a2_slope = prof.A.value_at(mid);
    segments.push_back(std::move(seg));
  }
  return GaussianPolicy(grid, std::move(segments));
}

double optimal_value(double t, double w, const ExploratoryConfig& cfg, const Profitability& prof,
                     const MarketModel& model) {
  cfg.validate();
  require(t >= -1e-12 && t <= cfg.T + 1e-12, ErrorCategory::validation,
          "time must lie within [0, T]");
  return optimal_value_impl(std::min(std::max(t, 0.0), cfg.T), w, cfg, prof, model);
}

namespace detail {
double optimal_value_unchecked(double t, double w, const ExploratoryConfig& cfg,
                               const Profitability& prof, const MarketModel& model) {
  return optimal_value_impl(t, w, cfg, prof, model);
}
}  // namespace detail

double exploratory_wealth_step(double w, const Eigen::VectorXd& mean, const Eigen::MatrixXd& cov,
                               const Eigen::VectorXd& mu_minus_r, const Eigen::MatrixXd& Sigma,
                               double dt, double noise) {
  require(dt > 0.0, ErrorCategory::validation, "time step must be positive");
  const double drift = mean.dot(mu_minus_r);
  const double variance = mean.dot(Sigma * mean) + (Sigma * cov).trace();
  require(variance >= 0.0, ErrorCategory::numeric, "squared diffusion must be non-negative");
  return w + drift * dt + std::sqrt(variance * dt) * noise;
}

ValueQuadratic evaluate_policy(const GaussianPolicy& policy, const ExploratoryConfig& cfg,
                               const MarketModel& model,
                               std::optional<double> tau_override) {
  cfg.validate();
  model.validate();
  require(policy.assets() == model.assets(), ErrorCategory::validation,
          "policy and model must agree on the number of assets");

  const double T = cfg.T;
  const TimeGrid grid =
      model.effective_grid(0.0, T).merged_with(span_grid(policy.grid(), 0.0, T));
  const int S = grid.segments();

  std::vector<SegmentCoeffs> coeffs;
  coeffs.reserve(static_cast<std::size_t>(S));
  for (int k = 0; k < S; ++k)
    coeffs.push_back(make_coeffs(policy, model, grid.knot(k), grid.knot(k + 1)));

  // Cumulative backward integrals of f at the knots: F[k] = int_{t_k}^{T} f.
  std::vector<double> F(static_cast<std::size_t>(S) + 1, 0.0);
  for (int k = S - 1; k >= 0; --k) F[k] = F[k + 1] + coeffs[k].f * grid.length(k);

  // Expected terminal wealth under the policy:
  // E[W_T] = e^{-F(0)} w0 + sum_k f_k e^{-F(t_{k+1})} int_0^{L_k} a0(h) e^{-f_k h} dh.
  double mean_terminal = std::exp(-F[0]) * cfg.w0;
  for (int k = 0; k < S; ++k) {
    const SegmentCoeffs& c = coeffs[k];
    mean_terminal +=
        c.f * std::exp(-F[k + 1]) * c.a0.rate_shifted(c.f).integrate(grid.length(k));
  }

  const double tauP = tau_override ? *tau_override : 1.0 + 2.0 * cfg.gamma * mean_terminal;
  const double lambda = cfg.lambda;
  const double n = static_cast<double>(model.assets());
  const double ln_2pie = std::log(2.0 * kPi * std::exp(1.0));

  // Backward sweep building the coefficient curves segment by segment.
  // Node state at the current right knot:
  //   I_node = I(t),  G_node = G(t),  B1_node = int_t^T b1,  F_node = int_t^T f,
  //   J_node = int_t^T a0 b1 e^{-int_x^T b1} dx.
  std::vector<ValueSegment> segments(static_cast<std::size_t>(S));
  double I_node = cfg.gamma;
  double G_node = 0.0;
  double B1_node = 0.0;
  double F_node = 0.0;
  double J_node = 0.0;
  for (int k = S - 1; k >= 0; --k) {
    const SegmentCoeffs& c = coeffs[k];
    const double L = grid.length(k);
    ValueSegment& seg = segments[k];

    seg.I_end = I_node;
    seg.q = c.q;

    // H(h) = e^{-F(t)} [tauP - 2 gamma J(t)] expanded into explicit exponentials:
    // the running tail contributes a plain e^{-f h} term, the in-segment part of
    // J contributes -2 gamma b1 e^{-(B1+F)(v)} e^{-f h} int_0^h a0 e^{-b1 x} dx.
    const ExpSum phi =
        c.b1 == 0.0 ? ExpSum::zero() : c.a0.rate_shifted(c.b1).antiderivative();
    seg.H = ExpSum::term((tauP - 2.0 * cfg.gamma * J_node) * std::exp(-F_node), c.f, 0) +
            phi.rate_shifted(c.f).scaled(-2.0 * cfg.gamma * c.b1 * std::exp(-B1_node - F_node));

    // G'(t) = -[ H a0 f - I a0^2 g - I e^{a2} tr(Sigma A3)
    //            + (lambda/2)(n ln 2 pi e + n a2 + ln|A3|) ].
    ExpSum g_int = seg.H.product(c.a0).scaled(c.f);
    g_int = g_int + c.a0.product(c.a0).rate_shifted(c.q).scaled(-I_node * c.g);
    g_int = g_int + ExpSum::term(-I_node * std::exp(c.a2_level) * c.tr_sigma_A3,
                                 c.q - c.a2_slope, 0);
    g_int = g_int + ExpSum::constant(0.5 * lambda * (n * ln_2pie + c.ln_det_A3) +
                                     0.5 * lambda * n * c.a2_level);
    g_int = g_int + ExpSum::term(0.5 * lambda * n * c.a2_slope, 0.0, 1);
    seg.g_integrand = g_int;
    seg.G_end = G_node;

    // Roll the node state back to the segment's left knot.
    G_node += g_int.integrate(L);
    J_node += c.b1 * std::exp(-B1_node) * phi.value(L);
    B1_node += c.b1 * L;
    F_node += c.f * L;
    I_node *= std::exp(-c.q * L);
  }

  return ValueQuadratic(grid, std::move(segments), tauP);
}

GaussianPolicy improve_policy(const ValueQuadratic& value, const ExploratoryConfig& cfg,
                              const MarketModel& model) {
  cfg.validate();
  model.validate();
  const TimeGrid grid = value.grid().merged_with(model.effective_grid(0.0, cfg.T));
  std::vector<PolicySegment> segments;
  segments.reserve(static_cast<std::size_t>(grid.segments()));
  for (int k = 0; k < grid.segments(); ++k) {
    const double u = grid.knot(k);
    const double v = grid.knot(k + 1);
    const double mid = 0.5 * (u + v);

    const Eigen::VectorXd excess = model.excess_at(mid);
    const Eigen::MatrixXd Sigma_inv = covariance_from(model.sigma_at(mid), model.rho).second;

    // Re-base the value curves so h runs from this segment's right end.
    const int kv = value.grid().segment_of(mid);
    const ValueSegment& vseg = value.segment(kv);
    const double delta = std::max(0.0, value.grid().knot(kv + 1) - v);
    const double I_end = vseg.I_end * std::exp(-vseg.q * delta);
    require(I_end > 0.0, ErrorCategory::numeric,
            "value function must be strictly concave in wealth to improve the policy");
    const ExpSum H = vseg.H.shifted_argument(delta);

    PolicySegment seg;
    seg.a1 = Sigma_inv * excess;
    seg.A3 = Sigma_inv;
    // a0(h) = H(h) / (2 I(h)) with I(h) = I_end e^{-q h}.
    seg.a0 = H.rate_shifted(-vseg.q).scaled(0.5 / I_end);
    // e^{a2(h)} = lambda / (2 I(h)).
    seg.a2_level = std::log(0.5 * cfg.lambda / I_end);
    seg.a2_slope = vseg.q;
    segments.push_back(std::move(seg));
  }
  return GaussianPolicy(grid, std::move(segments));
}

GaussianPolicy improve_policy(const ValueQuadratic& value, const ExploratoryConfig& cfg,
                              const Eigen::VectorXd& mu_minus_r,
                              const Eigen::MatrixXd& Sigma_inv) {
  cfg.validate();
  require(mu_minus_r.size() == Sigma_inv.rows() && Sigma_inv.rows() == Sigma_inv.cols(),
          ErrorCategory::validation, "excess return and precision dimensions must agree");
  const TimeGrid& grid = value.grid();
  std::vector<PolicySegment> segments;
  segments.reserve(static_cast<std::size_t>(grid.segments()));
  for (int k = 0; k < grid.segments(); ++k) {
    const ValueSegment& vseg = value.segment(k);
    require(vseg.I_end > 0.0, ErrorCategory::numeric,
            "value function must be strictly concave in wealth to improve the policy");
    PolicySegment seg;
    seg.a1 = Sigma_inv * mu_minus_r;
    seg.A3 = 0.5 * (Sigma_inv + Sigma_inv.transpose());
    seg.a0 = vseg.H.rate_shifted(-vseg.q).scaled(0.5 / vseg.I_end);
    seg.a2_level = std::log(0.5 * cfg.lambda / vseg.I_end);
    seg.a2_slope = vseg.q;
    segments.push_back(std::move(seg));
  }
  return GaussianPolicy(grid, std::move(segments));
}

PolicyIterationResult policy_iterate(const GaussianPolicy& initial, const ExploratoryConfig& cfg,
                                     const MarketModel& model, double tol, int max_iter) {
  cfg.validate();
  require(tol > 0.0, ErrorCategory::validation, "tolerance must be positive");
  require(max_iter >= 1, ErrorCategory::validation, "iteration cap must be at least 1");

  MVProblem problem{cfg.gamma, cfg.w0, cfg.T, model};
  const Profitability prof = compute_profitability(problem);

  PolicyIterationResult out{initial, evaluate_policy(initial, cfg, model), {}, false, prof.tau};
  out.tau_sequence.push_back(out.value.tauP());
  for (int it = 0; it < max_iter; ++it) {
    out.policy = improve_policy(out.value, cfg, model);
    out.value = evaluate_policy(out.policy, cfg, model);
    out.tau_sequence.push_back(out.value.tauP());
    const std::size_t m = out.tau_sequence.size();
    if (std::abs(out.tau_sequence[m - 1] - out.tau_sequence[m - 2]) < tol) {
      out.converged = true;
      break;
    }
  }
  return out;
}

}  // namespace mvrl
