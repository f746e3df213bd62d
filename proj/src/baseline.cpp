#include "miest/baseline.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <tuple>

#include "miest/error.hpp"

namespace miest {

double pearson(std::span<const double> u, std::span<const double> v) {
  if (u.size() != v.size()) throw Error(ErrorCode::InvalidArgument, "pearson: length mismatch");
  if (u.size() < 2) throw Error(ErrorCode::InsufficientSamples, "pearson needs at least 2 samples");
  const double n = static_cast<double>(u.size());
  const double mu = std::accumulate(u.begin(), u.end(), 0.0) / n;
  const double mv = std::accumulate(v.begin(), v.end(), 0.0) / n;
  double suu = 0.0;
  double svv = 0.0;
  double suv = 0.0;
  for (std::size_t i = 0; i < u.size(); ++i) {
    const double du = u[i] - mu;
    const double dv = v[i] - mv;
    suu += du * du;
    svv += dv * dv;
    suv += du * dv;
  }
  if (!(suu > 0.0) || !(svv > 0.0)) {
    throw Error(ErrorCode::InvalidArgument, "pearson: zero variance");
  }
  const double r = (suv / n) / std::sqrt((suu / n) * (svv / n));
  return std::clamp(r, -1.0, 1.0);
}

double gaussian_mi(double pc) {
  if (!(std::abs(pc) < 1.0)) {
    throw Error(ErrorCode::Divergent, "Gaussian MI diverges for |pc| >= 1");
  }
  return -0.5 * std::log2(1.0 - pc * pc);
}

std::vector<PcMiPoint> compare_report(std::span<const PairEstimate> estimates, const Dataset& ds) {
  std::vector<PcMiPoint> out;
  out.reserve(estimates.size());
  for (const auto& e : estimates) {
    PcMiPoint p;
    p.var_a = std::min(e.var_a, e.var_b);
    p.var_b = std::max(e.var_a, e.var_b);
    p.mi_bits = e.estimate.value_bits;
    const std::size_t vars[] = {p.var_a, p.var_b};
    const JointSample js = joint_sample(ds, vars);
    p.n_joint = js.size();
    try {
      p.pc = pearson(js.columns[0], js.columns[1]);
      p.gaussian_mi_bits = gaussian_mi(p.pc);
    } catch (const Error& err) {
      p.error = std::string(error_code_name(err.code())) + ": " + err.what();
    }
    out.push_back(std::move(p));
  }
  std::sort(out.begin(), out.end(), [](const PcMiPoint& a, const PcMiPoint& b) {
    return std::tie(a.var_a, a.var_b) < std::tie(b.var_a, b.var_b);
  });
  return out;
}

}  // namespace miest
