#include "p3/model.hpp"

#include <cmath>
#include <random>
#include <sstream>

namespace p3 {

const Expression& Model3D::invariant(const std::string& n) const {
  auto it = invariants.find(n);
  if (it == invariants.end())
    throw std::runtime_error("model '" + name + "' has no invariant '" + n + "'");
  return it->second;
}

namespace {

// mt19937_64 output mapped to [0,1) by hand so draws do not depend on the
// standard library's distribution implementation.
double unit_draw(std::mt19937_64& rng) {
  return double(rng() >> 11) * 0x1.0p-53;
}

bool point_ok(const Vec3& x, const std::vector<Expression>& guards,
              const std::vector<Expression>& required, double sing_tol,
              const Params& params) {
  try {
    for (const auto& g : guards)
      if (std::fabs(eval(g, x, params)) <= sing_tol) return false;
    for (const auto& r : required) (void)eval(r, x, params);
  } catch (const EvalError&) {
    return false;
  }
  return true;
}

}  // namespace

std::vector<Vec3> sample_points(const SampleBox& box,
                                const std::vector<Expression>& guards,
                                const Params& params,
                                const std::vector<Expression>& required) {
  std::mt19937_64 rng(box.seed);
  std::vector<Vec3> out;
  out.reserve(box.samples);
  long long attempts = 0;
  const long long cap = std::max<long long>(1000, 100LL * box.samples);
  while ((int)out.size() < box.samples) {
    if (attempts >= cap) {
      std::ostringstream os;
      os << "rejected " << (attempts - out.size()) << " of " << attempts
         << " sample draws (>99%); box likely inside the singular set";
      throw SampleError(os.str());
    }
    ++attempts;
    Vec3 x;
    for (int k = 0; k < 3; ++k)
      x[k] = box.lo[k] + (box.hi[k] - box.lo[k]) * unit_draw(rng);
    if (point_ok(x, guards, required, box.sing_tol, params)) out.push_back(x);
  }
  return out;
}

ResidualReport check_first_integral(const Model3D& m, const Expression& H,
                                    double tol) {
  std::array<Expression, 3> gradH = {diff(H, 1), diff(H, 2), diff(H, 3)};
  std::vector<Expression> required(m.v.begin(), m.v.end());
  for (const auto& g : gradH) required.push_back(g);
  auto pts = sample_points(m.box, {}, m.params, required);

  ResidualReport rep;
  rep.check = "first_integral";
  rep.samples = (int)pts.size();
  rep.tolerance = tol;
  rep.normalization = "vgradH";
  double sum = 0;
  for (const auto& x : pts) {
    double dot = 0, nv = 0, ng = 0;
    for (int k = 0; k < 3; ++k) {
      double vk = eval(m.v[k], x, m.params);
      double gk = eval(gradH[k], x, m.params);
      dot += vk * gk;
      nv += vk * vk;
      ng += gk * gk;
    }
    double r = std::fabs(dot) / (1.0 + std::sqrt(nv) * std::sqrt(ng));
    sum += r;
    if (r > rep.max_abs) {
      rep.max_abs = r;
      rep.argmax = x;
    }
  }
  rep.mean_abs = pts.empty() ? 0 : sum / pts.size();
  rep.pass = rep.max_abs <= tol;
  return rep;
}

AxisPermutation choose_axis(const Model3D& m, const Expression& H,
                            const SampleBox& box) {
  std::array<Expression, 3> gradH = {diff(H, 1), diff(H, 2), diff(H, 3)};
  std::vector<Expression> required(gradH.begin(), gradH.end());
  auto pts = sample_points(box, {}, m.params, required);

  double best = -1;
  int best_axis = 0;
  double overall_max = 0;
  for (int axis = 1; axis <= 3; ++axis) {
    double mn = HUGE_VAL;
    for (const auto& x : pts) {
      double g = std::fabs(eval(gradH[axis - 1], x, m.params));
      mn = std::min(mn, g);
      overall_max = std::max(overall_max, g);
    }
    if (mn > best) {
      best = mn;
      best_axis = axis;
    }
  }
  if (overall_max == 0.0)
    throw std::runtime_error(
        "choose_axis: all partials of the invariant vanish on the box "
        "(constant invariant?)");
  return AxisPermutation::role3_to(best_axis);
}

}  // namespace p3
