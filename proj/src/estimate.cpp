#include "biexp/estimate.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include <boost/math/tools/minima.hpp>

namespace biexp {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

struct Conditional {
  double n;
  double s11;
  double s22;
  double s12;
};

// argmin over sigma1^2 in [lo, hi] with sigma2^2, rho fixed. In u = 1/sigma1
// the objective -2n log u + c s11 u^2 - 2 c rho s12 u / sigma2 is convex.
double best_first_variance(const Conditional& c, double sigma_other, double rho, const Interval& box) {
  const double k = 1.0 / (1.0 - rho * rho);
  const double beta = k * rho * c.s12 / sigma_other;
  const double u = (beta + std::sqrt(beta * beta + 4.0 * k * c.s11 * c.n)) / (2.0 * k * c.s11);
  return box.clip(1.0 / (u * u));
}

// argmin over rho in [lo, hi] of n log(1 - rho^2) + (a - 2 rho b) / (1 - rho^2).
// Stationary points are the real roots of n r^3 - b r^2 + (a - n) r - b.
double best_rho(double n, double a, double b, double lo, double hi) {
  auto g = [&](double r) { return n * std::log1p(-r * r) + (a - 2.0 * r * b) / (1.0 - r * r); };
  auto p = [&](double r) { return ((n * r - b) * r + (a - n)) * r - b; };
  double best = lo;
  double best_val = g(lo);
  auto consider = [&](double r) {
    const double v = g(r);
    if (v < best_val) {
      best_val = v;
      best = r;
    }
  };
  consider(hi);
  constexpr int kCells = 64;
  double x0 = lo;
  double p0 = p(x0);
  for (int i = 1; i <= kCells; ++i) {
    const double x1 = i == kCells ? hi : lo + (hi - lo) * i / kCells;
    const double p1 = p(x1);
    if ((p0 < 0.0 && p1 >= 0.0) || (p0 > 0.0 && p1 <= 0.0)) {
      double a_ = x0, b_ = x1, pa = p0;
      for (int it = 0; it < 200 && b_ - a_ > 1e-16; ++it) {
        const double m = 0.5 * (a_ + b_);
        const double pm = p(m);
        if ((pa < 0.0) == (pm < 0.0)) {
          a_ = m;
          pa = pm;
        } else {
          b_ = m;
        }
      }
      consider(0.5 * (a_ + b_));
    }
    x0 = x1;
    p0 = p1;
  }
  return best;
}

double scale_of(Param p, double x) {
  switch (p) {
    case Param::rho: return 1.0;
    default: return std::abs(x);
  }
}

double fd_step(Param p, double x) {
  if (p == Param::rho) return std::min(1e-6, 0.5 * (1.0 - std::abs(x)));
  return 1e-6 * std::abs(x);
}

class Objective {
 public:
  Objective(const BivariateSample& sample, int budget) : sample_(sample), budget_(budget) {}

  double value(const Eigen::Vector4d& x) {
    ++evals_;
    try {
      return neg_log_lik_fast(Params(x(0), x(1), x(2), x(3)), sample_).total;
    } catch (const std::exception&) {
      return kInf;
    }
  }

  Eigen::Vector4d gradient(const Eigen::Vector4d& x) {
    ++evals_;
    return neg_log_lik_gradient(Params(x(0), x(1), x(2), x(3)), sample_);
  }

  [[nodiscard]] int evals() const noexcept { return evals_; }
  void add_evals(int k) noexcept { evals_ += k; }
  [[nodiscard]] bool exhausted() const noexcept { return evals_ >= budget_; }

 private:
  const BivariateSample& sample_;
  int budget_;
  int evals_ = 0;
};

}  // namespace

Microergodic microergodic(const Params& psi) noexcept {
  return {psi.sigma1_sq() * psi.theta(), psi.sigma2_sq() * psi.theta(), psi.rho()};
}

ProfilePoint profile_at(const InnovationStats& st, const ParamBox& box) {
  const double n = static_cast<double>(st.n);
  if (!(st.s11 > 0.0) || !(st.s22 > 0.0) || !std::isfinite(st.s12)) {
    return {0.0, 0.0, 0.0, kInf, false};
  }
  const Interval& b1 = box[Param::sigma1_sq];
  const Interval& b2 = box[Param::sigma2_sq];
  const Interval rb{std::max(box[Param::rho].lo, -kRhoClip), std::min(box[Param::rho].hi, kRhoClip)};

  double s1 = st.s11 / n;
  double s2 = st.s22 / n;
  double r = std::clamp(st.s12 / std::sqrt(st.s11 * st.s22), -kRhoClip, kRhoClip);

  bool clipped = false;
  auto place = [&](double& x, const Interval& iv) {
    if (iv.pinned()) {
      x = iv.lo;
      return;
    }
    const double c = iv.clip(x);
    if (c != x) clipped = true;
    x = c;
  };
  place(s1, b1);
  place(s2, b2);
  place(r, rb);

  const bool any_pinned = b1.pinned() || b2.pinned() || rb.pinned();
  if (any_pinned || clipped) {
    // Block-coordinate descent; every conditional update is an exact
    // constrained minimiser, so the objective never increases.
    const Conditional c{n, st.s11, st.s22, st.s12};
    for (int sweep = 0; sweep < 1000; ++sweep) {
      const double o1 = s1, o2 = s2, orr = r;
      if (!b1.pinned()) s1 = best_first_variance(c, std::sqrt(s2), r, b1);
      if (!b2.pinned()) {
        const Conditional swapped{n, st.s22, st.s11, st.s12};
        s2 = best_first_variance(swapped, std::sqrt(s1), r, b2);
      }
      if (!rb.pinned()) {
        const double a = st.s11 / s1 + st.s22 / s2;
        const double bb = st.s12 / std::sqrt(s1 * s2);
        r = best_rho(n, a, bb, rb.lo, rb.hi);
      }
      const double change = std::max({std::abs(s1 - o1) / o1, std::abs(s2 - o2) / o2, std::abs(r - orr)});
      if (change < 1e-14) break;
    }
  }
  const double nll = neg_log_lik_from_stats(st, s1, s2, r).total;
  return {s1, s2, r, std::isfinite(nll) ? nll : kInf, clipped};
}

FitResult fit_mle(const BivariateSample& sample, const ParamBox& box, const FitOptions& options) {
  const std::size_t n = sample.size();
  if (n < 2) throw DomainError("fit_mle: at least two observations are required");
  Objective objective(sample, options.max_evaluations);

  // Stage 1: theta-profile.
  bool profile_clipped = false;
  auto profile = [&](double theta, ProfilePoint* out = nullptr) {
    objective.add_evals(1);
    try {
      const auto pp = profile_at(innovation_stats(theta, sample), box);
      if (out != nullptr) *out = pp;
      return pp.nll;
    } catch (const NumericError&) {
      return kInf;
    }
  };

  const Interval& tb = box[Param::theta];
  double theta_star = tb.lo;
  if (!tb.pinned()) {
    const int k = std::max(options.theta_scan_points, 3);
    std::vector<double> thetas(static_cast<std::size_t>(k));
    std::vector<double> values(thetas.size());
    const double log_lo = std::log(tb.lo);
    const double log_hi = std::log(tb.hi);
    for (int i = 0; i < k; ++i) {
      thetas[i] = i == 0 ? tb.lo : (i == k - 1 ? tb.hi : std::exp(log_lo + (log_hi - log_lo) * i / (k - 1)));
      values[i] = profile(thetas[i]);
    }
    const double best = *std::min_element(values.begin(), values.end());
    if (!std::isfinite(best)) throw EstimationError("fit_mle: profile likelihood is non-finite everywhere");
    // Smallest theta attaining the minimum within tolerance.
    const double slack = 1e-10 * (1.0 + std::abs(best));
    const auto idx = static_cast<int>(std::find_if(values.begin(), values.end(),
                                                   [&](double v) { return v <= best + slack; }) -
                                      values.begin());
    const double lo = thetas[std::max(idx - 1, 0)];
    const double hi = thetas[std::min(idx + 1, k - 1)];
    std::uintmax_t iters = 500;
    const auto [t_brent, v_brent] = boost::math::tools::brent_find_minima(
        [&](double t) { return profile(t); }, lo, hi, std::numeric_limits<double>::digits, iters);
    theta_star = v_brent <= values[idx] ? t_brent : thetas[idx];
  }
  ProfilePoint pp{};
  if (!std::isfinite(profile(theta_star, &pp))) {
    throw EstimationError("fit_mle: likelihood is non-finite at the profiled point");
  }
  profile_clipped = pp.clipped;

  // Stage 2: projected Newton over the free coordinates.
  std::array<bool, kNumParams> pinned{};
  for (std::size_t k = 0; k < kNumParams; ++k) pinned[k] = box.pinned(static_cast<Param>(k));
  auto project = [&](Eigen::Vector4d x) {
    for (std::size_t k = 0; k < kNumParams; ++k) {
      x(static_cast<Eigen::Index>(k)) = box[static_cast<Param>(k)].clip(x(static_cast<Eigen::Index>(k)));
    }
    x(2) = std::clamp(x(2), -kRhoClip, kRhoClip);
    return x;
  };

  Eigen::Vector4d x(pp.sigma1_sq, pp.sigma2_sq, pp.rho, theta_star);
  x = project(x);
  double f = objective.value(x);
  const double f_start = f;
  const double tol = options.gradient_tolerance_per_obs * static_cast<double>(n);
  double pg_norm = kInf;
  bool budget_hit = false;

  for (int iter = 0; iter <= options.max_refine_iterations; ++iter) {
    const Eigen::Vector4d g = objective.gradient(x);
    std::array<bool, kNumParams> active{};
    pg_norm = 0.0;
    for (std::size_t k = 0; k < kNumParams; ++k) {
      const auto i = static_cast<Eigen::Index>(k);
      const Interval& iv = box[static_cast<Param>(k)];
      const bool at_lo = x(i) <= iv.lo && g(i) > 0.0;
      const bool at_hi = x(i) >= iv.hi && g(i) < 0.0;
      active[k] = !pinned[k] && !at_lo && !at_hi;
      if (active[k]) pg_norm = std::max(pg_norm, std::abs(g(i)));
    }
    if (pg_norm == 0.0 || iter == options.max_refine_iterations) break;
    if (objective.exhausted()) {
      budget_hit = true;
      break;
    }

    std::vector<Eigen::Index> idx;
    for (std::size_t k = 0; k < kNumParams; ++k) {
      if (active[k]) idx.push_back(static_cast<Eigen::Index>(k));
    }
    const auto m = static_cast<Eigen::Index>(idx.size());
    Eigen::MatrixXd h(m, m);
    Eigen::VectorXd gf(m);
    for (Eigen::Index a = 0; a < m; ++a) {
      const auto p = static_cast<Param>(idx[a]);
      const double step = fd_step(p, x(idx[a]));
      Eigen::Vector4d xp = x, xm = x;
      xp(idx[a]) += step;
      xm(idx[a]) -= step;
      const Eigen::Vector4d dg = (objective.gradient(xp) - objective.gradient(xm)) / (2.0 * step);
      for (Eigen::Index b = 0; b < m; ++b) h(b, a) = dg(idx[b]);
      gf(a) = g(idx[a]);
    }
    h = 0.5 * (h + h.transpose()).eval();

    Eigen::VectorXd d;
    const double diag_scale = std::max(h.diagonal().cwiseAbs().maxCoeff(), 1e-300);
    for (double lambda = 0.0; lambda < 1e12 * diag_scale; lambda = lambda == 0.0 ? 1e-10 * diag_scale : lambda * 10.0) {
      Eigen::MatrixXd hl = h;
      hl.diagonal().array() += lambda;
      const Eigen::LLT<Eigen::MatrixXd> llt(hl);
      if (llt.info() == Eigen::Success) {
        d = -llt.solve(gf);
        break;
      }
    }
    if (d.size() == 0) d = -gf / diag_scale;

    Eigen::Vector4d dir = Eigen::Vector4d::Zero();
    for (Eigen::Index a = 0; a < m; ++a) dir(idx[a]) = d(a);
    // Keep rho strictly inside (-1, 1) for trial points.
    if (dir(2) != 0.0) {
      const double room = dir(2) > 0 ? (kRhoClip - x(2)) : (x(2) + kRhoClip);
      if (std::abs(dir(2)) > room && room > 0.0) dir *= room / std::abs(dir(2));
    }

    bool accepted = false;
    Eigen::Vector4d x_new = x;
    double f_new = f;
    for (double t = 1.0; t > 1e-12; t *= 0.5) {
      x_new = project(x + t * dir);
      f_new = objective.value(x_new);
      if (f_new <= f + 1e-4 * g.dot(x_new - x)) {
        accepted = true;
        break;
      }
    }
    if (!accepted || !(f_new <= f)) break;
    double rel_step = 0.0;
    for (std::size_t k = 0; k < kNumParams; ++k) {
      const auto i = static_cast<Eigen::Index>(k);
      rel_step = std::max(rel_step, std::abs(x_new(i) - x(i)) / (1e-300 + std::max(scale_of(static_cast<Param>(k), x(i)), 1e-12)));
    }
    x = x_new;
    f = f_new;
    if (rel_step < 1e-13) {
      pg_norm = 0.0;
      const Eigen::Vector4d g_end = objective.gradient(x);
      for (std::size_t k = 0; k < kNumParams; ++k) {
        const auto i = static_cast<Eigen::Index>(k);
        const Interval& iv = box[static_cast<Param>(k)];
        if (!pinned[k] && !(x(i) <= iv.lo && g_end(i) > 0.0) && !(x(i) >= iv.hi && g_end(i) < 0.0)) {
          pg_norm = std::max(pg_norm, std::abs(g_end(i)));
        }
      }
      break;
    }
  }

  const Params psi_hat(x(0), x(1), x(2), x(3));
  FitResult out{psi_hat,
                microergodic(psi_hat),
                f,
                f_start,
                !budget_hit && pg_norm < tol,
                objective.evals(),
                pg_norm,
                {},
                pinned,
                profile_clipped};
  for (std::size_t k = 0; k < kNumParams; ++k) {
    if (pinned[k]) continue;
    const auto p = static_cast<Param>(k);
    const Interval& iv = box[p];
    const double v = x(static_cast<Eigen::Index>(k));
    const double eps = 1e-12 * (1.0 + std::abs(v));
    if (v <= iv.lo + eps) out.boundary_hit.push_back(std::string(param_name(p)) + "_lower");
    if (v >= iv.hi - eps) out.boundary_hit.push_back(std::string(param_name(p)) + "_upper");
  }
  return out;
}

}  // namespace biexp
