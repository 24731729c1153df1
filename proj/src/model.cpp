#include "biexp/model.hpp"

#include <cmath>
#include <sstream>
#include <string>

namespace biexp {

namespace {

std::string describe(double sigma1_sq, double sigma2_sq, double rho, double theta) {
  std::ostringstream os;
  os.precision(17);
  os << "(sigma1_sq=" << sigma1_sq << ", sigma2_sq=" << sigma2_sq << ", rho=" << rho
     << ", theta=" << theta << ")";
  return os.str();
}

void check_interval(Param p, const Interval& iv) {
  const auto name = std::string(param_name(p));
  if (!std::isfinite(iv.lo) || !std::isfinite(iv.hi) || iv.lo > iv.hi) {
    throw DomainError("ParamBox: bounds for " + name + " must be finite with lo <= hi");
  }
  if (p == Param::rho) {
    if (iv.lo <= -1.0 || iv.hi >= 1.0) throw DomainError("ParamBox: rho bounds must lie in (-1, 1)");
  } else if (iv.lo <= 0.0) {
    throw DomainError("ParamBox: lower bound for " + name + " must be > 0");
  }
}

}  // namespace

std::string_view param_name(Param p) noexcept {
  switch (p) {
    case Param::sigma1_sq: return "sigma1_sq";
    case Param::sigma2_sq: return "sigma2_sq";
    case Param::rho: return "rho";
    case Param::theta: return "theta";
  }
  return "?";
}

Param parse_param(std::string_view name) {
  if (name == "sigma1_sq" || name == "sigma1-sq") return Param::sigma1_sq;
  if (name == "sigma2_sq" || name == "sigma2-sq") return Param::sigma2_sq;
  if (name == "rho") return Param::rho;
  if (name == "theta") return Param::theta;
  throw DomainError("unknown parameter name '" + std::string(name) + "'");
}

Params::Params(double sigma1_sq, double sigma2_sq, double rho, double theta)
    : sigma1_sq_(sigma1_sq), sigma2_sq_(sigma2_sq), rho_(rho), theta_(theta) {
  const bool ok = std::isfinite(sigma1_sq) && sigma1_sq > 0.0 && std::isfinite(sigma2_sq) &&
                  sigma2_sq > 0.0 && std::isfinite(rho) && std::abs(rho) < 1.0 &&
                  std::isfinite(theta) && theta > 0.0;
  if (!ok) {
    std::string why;
    if (!(sigma1_sq > 0.0) || !std::isfinite(sigma1_sq)) why = "sigma1_sq must be > 0";
    else if (!(sigma2_sq > 0.0) || !std::isfinite(sigma2_sq)) why = "sigma2_sq must be > 0";
    else if (!(std::abs(rho) < 1.0)) why = "|rho| must be < 1";
    else why = "theta must be > 0";
    throw DomainError("invalid parameters " + describe(sigma1_sq, sigma2_sq, rho, theta) + ": " + why);
  }
}

Params Params::from_practical_range(double sigma1_sq, double sigma2_sq, double rho,
                                    double practical_range) {
  if (!(practical_range > 0.0) || !std::isfinite(practical_range)) {
    throw DomainError("practical range must be > 0");
  }
  return Params(sigma1_sq, sigma2_sq, rho, 3.0 / practical_range);
}

Params Params::from_array(const std::array<double, kNumParams>& v) {
  return Params(v[0], v[1], v[2], v[3]);
}

double Params::sigma1() const noexcept { return std::sqrt(sigma1_sq_); }
double Params::sigma2() const noexcept { return std::sqrt(sigma2_sq_); }

double Params::get(Param p) const noexcept {
  switch (p) {
    case Param::sigma1_sq: return sigma1_sq_;
    case Param::sigma2_sq: return sigma2_sq_;
    case Param::rho: return rho_;
    case Param::theta: return theta_;
  }
  return 0.0;
}

Eigen::Matrix2d Params::cross_covariance() const {
  const double cross = sigma1() * sigma2() * rho_;
  Eigen::Matrix2d a;
  a << sigma1_sq_, cross, cross, sigma2_sq_;
  return a;
}

std::array<double, kNumParams> Params::to_array() const noexcept {
  return {sigma1_sq_, sigma2_sq_, rho_, theta_};
}

ParamBox::ParamBox(Interval sigma1_sq, Interval sigma2_sq, Interval rho, Interval theta)
    : bounds_{sigma1_sq, sigma2_sq, rho, theta} {
  for (std::size_t k = 0; k < kNumParams; ++k) check_interval(static_cast<Param>(k), bounds_[k]);
}

ParamBox ParamBox::defaults() {
  return ParamBox({1e-4, 1e4}, {1e-4, 1e4}, {-0.999, 0.999}, {0.1, 100.0});
}

bool ParamBox::contains(const Params& psi) const noexcept {
  for (std::size_t k = 0; k < kNumParams; ++k) {
    if (!bounds_[k].contains(psi.get(static_cast<Param>(k)))) return false;
  }
  return true;
}

ParamBox ParamBox::with(Param p, Interval bounds) const {
  auto b = bounds_;
  b[static_cast<std::size_t>(p)] = bounds;
  return ParamBox(b[0], b[1], b[2], b[3]);
}

namespace detail {
bool gaps_admissible(const std::vector<double>& pts) noexcept {
  for (std::size_t i = 1; i < pts.size(); ++i) {
    if (!(pts[i] - pts[i - 1] >= SamplingGrid::kMinSpacing)) return false;
  }
  return true;
}
}  // namespace detail

SamplingGrid::SamplingGrid(std::vector<double> points) : points_(std::move(points)) {
  if (points_.empty()) throw DomainError("SamplingGrid: at least one point is required");
  for (double p : points_) {
    if (!std::isfinite(p) || p < 0.0 || p > 1.0) {
      throw DomainError("SamplingGrid: points must lie in [0, 1]");
    }
  }
  deltas_.reserve(points_.size() - 1);
  for (std::size_t i = 1; i < points_.size(); ++i) {
    const double d = points_[i] - points_[i - 1];
    if (d <= 0.0) throw DomainError("SamplingGrid: points must be strictly increasing");
    if (d < kMinSpacing) throw DomainError("SamplingGrid: points closer than 1e-12");
    deltas_.push_back(d);
  }
}

SamplingGrid SamplingGrid::equispaced(std::size_t n) {
  if (n == 0) throw DomainError("SamplingGrid::equispaced: n must be positive");
  std::vector<double> pts(n, 0.0);
  for (std::size_t i = 1; i < n; ++i) pts[i] = static_cast<double>(i) / static_cast<double>(n - 1);
  if (n > 1) pts.back() = 1.0;
  return SamplingGrid(std::move(pts));
}

BivariateSample::BivariateSample(SamplingGrid grid, std::vector<double> z1, std::vector<double> z2)
    : grid_(std::move(grid)), z1_(std::move(z1)), z2_(std::move(z2)) {
  if (z1_.size() != grid_.size() || z2_.size() != grid_.size()) {
    throw DomainError("BivariateSample: z1, z2 and grid must have equal length");
  }
  for (std::size_t i = 0; i < z1_.size(); ++i) {
    if (!std::isfinite(z1_[i]) || !std::isfinite(z2_[i])) {
      throw DomainError("BivariateSample: observations must be finite");
    }
  }
}

std::span<const double> BivariateSample::component(int k) const {
  if (k == 1) return z1_;
  if (k == 2) return z2_;
  throw DomainError("component index must be 1 or 2");
}

StepDecay step_decay(double theta, double delta) {
  const double innovation = -std::expm1(-2.0 * theta * delta);
  if (!(innovation > 0.0) || !std::isfinite(innovation)) {
    std::ostringstream os;
    os << "innovation variance 1 - exp(-2 theta delta) underflowed (theta=" << theta
       << ", delta=" << delta << ")";
    throw NumericError(os.str());
  }
  return {std::exp(-theta * delta), innovation};
}

double kernel(const Params& psi, int i, int j, double h) {
  if ((i != 1 && i != 2) || (j != 1 && j != 2)) {
    throw DomainError("kernel: component indices must be 1 or 2");
  }
  if (!std::isfinite(h)) throw DomainError("kernel: distance must be finite");
  const double si = i == 1 ? psi.sigma1() : psi.sigma2();
  const double sj = j == 1 ? psi.sigma1() : psi.sigma2();
  const double colocated = i == j ? 1.0 : psi.rho();
  return si * sj * colocated * std::exp(-psi.theta() * std::abs(h));
}

Eigen::MatrixXd correlation_matrix(double theta, const SamplingGrid& grid) {
  const auto n = static_cast<Eigen::Index>(grid.size());
  const auto s = grid.points();
  Eigen::MatrixXd r(n, n);
  for (Eigen::Index m = 0; m < n; ++m) {
    r(m, m) = 1.0;
    for (Eigen::Index l = 0; l < m; ++l) {
      r(m, l) = r(l, m) = std::exp(-theta * std::abs(s[m] - s[l]));
    }
  }
  return r;
}

Eigen::MatrixXd dense_covariance(const Params& psi, const SamplingGrid& grid) {
  const auto n = static_cast<Eigen::Index>(grid.size());
  if (n == 0) throw DomainError("dense_covariance: empty grid");
  const Eigen::MatrixXd r = correlation_matrix(psi.theta(), grid);
  const Eigen::Matrix2d a = psi.cross_covariance();
  Eigen::MatrixXd sigma(2 * n, 2 * n);
  for (int k = 0; k < 2; ++k) {
    for (int l = 0; l < 2; ++l) sigma.block(k * n, l * n, n, n) = a(k, l) * r;
  }
  return sigma;
}

}  // namespace biexp
