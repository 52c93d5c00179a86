#include "wiretap/infotheory.hpp"

#include <algorithm>
#include <cmath>
#include <functional>

namespace wiretap {

namespace {

constexpr double kMassTol = 1e-9;

double log2_safe(double x) { return std::log2(x); }

}  // namespace

double binary_entropy(double p) {
  if (p <= 0.0 || p >= 1.0) return 0.0;
  return -p * std::log2(p) - (1.0 - p) * std::log2(1.0 - p);
}

double mutual_information(const Matrix& joint) {
  if (joint.empty() || joint[0].empty())
    throw DomainError("mutual_information: empty joint");
  const std::size_t na = joint.size();
  const std::size_t nb = joint[0].size();
  std::vector<double> pa(na, 0.0), pb(nb, 0.0);
  double mass = 0.0;
  for (std::size_t a = 0; a < na; ++a) {
    if (joint[a].size() != nb) throw DomainError("mutual_information: ragged joint");
    for (std::size_t b = 0; b < nb; ++b) {
      const double p = joint[a][b];
      if (p < 0.0) throw DomainError("mutual_information: negative entry");
      pa[a] += p;
      pb[b] += p;
      mass += p;
    }
  }
  if (std::abs(mass - 1.0) > kMassTol)
    throw DomainError("mutual_information: total mass " + std::to_string(mass));
  double mi = 0.0;
  for (std::size_t a = 0; a < na; ++a)
    for (std::size_t b = 0; b < nb; ++b) {
      const double p = joint[a][b];
      if (p > 0.0) mi += p * log2_safe(p / (pa[a] * pb[b]));
    }
  return std::max(mi, 0.0);
}

double conditional_mi(const std::vector<Matrix>& joint_abc) {
  if (joint_abc.empty()) throw DomainError("conditional_mi: empty joint");
  const std::size_t na = joint_abc.size();
  const std::size_t nb = joint_abc[0].size();
  const std::size_t nc = joint_abc[0].empty() ? 0 : joint_abc[0][0].size();
  if (nb == 0 || nc == 0) throw DomainError("conditional_mi: empty joint");

  double total = 0.0;
  double cmi = 0.0;
  for (std::size_t c = 0; c < nc; ++c) {
    Matrix slice(na, std::vector<double>(nb, 0.0));
    double pc = 0.0;
    for (std::size_t a = 0; a < na; ++a)
      for (std::size_t b = 0; b < nb; ++b) {
        const double p = joint_abc[a][b][c];
        if (p < 0.0) throw DomainError("conditional_mi: negative entry");
        slice[a][b] = p;
        pc += p;
      }
    total += pc;
    if (pc <= 0.0) continue;
    for (auto& row : slice)
      for (double& p : row) p /= pc;
    cmi += pc * mutual_information(slice);
  }
  if (std::abs(total - 1.0) > kMassTol)
    throw DomainError("conditional_mi: total mass " + std::to_string(total));
  return std::max(cmi, 0.0);
}

namespace {

double channel_mi(const std::vector<double>& px, const Matrix& kernel) {
  Matrix joint(px.size(), std::vector<double>(kernel[0].size()));
  for (std::size_t x = 0; x < px.size(); ++x)
    for (std::size_t o = 0; o < kernel[x].size(); ++o)
      joint[x][o] = px[x] * kernel[x][o];
  return mutual_information(joint);
}

// Enumerate input distributions on a simplex grid; keep the first argmax.
void simplex_grid(int dims, int steps,
                  const std::function<void(const std::vector<double>&)>& visit) {
  std::vector<int> counts(dims, 0);
  std::vector<double> point(dims, 0.0);
  const int total = steps - 1;
  std::function<void(int, int)> rec = [&](int dim, int remaining) {
    if (dim == dims - 1) {
      counts[dim] = remaining;
      for (int i = 0; i < dims; ++i)
        point[i] = static_cast<double>(counts[i]) / total;
      visit(point);
      return;
    }
    for (int c = remaining; c >= 0; --c) {
      counts[dim] = c;
      rec(dim + 1, remaining - c);
    }
  };
  rec(0, total);
}

// Golden-section maximization on [lo, hi].
double golden_max(double lo, double hi, const std::function<double(double)>& f,
                  double* best_val) {
  constexpr double phi = 0.6180339887498949;
  double a = lo, b = hi;
  double x1 = b - phi * (b - a), x2 = a + phi * (b - a);
  double f1 = f(x1), f2 = f(x2);
  for (int it = 0; it < 60; ++it) {
    if (f1 < f2) {
      a = x1;
      x1 = x2;
      f1 = f2;
      x2 = a + phi * (b - a);
      f2 = f(x2);
    } else {
      b = x2;
      x2 = x1;
      f2 = f1;
      x1 = b - phi * (b - a);
      f1 = f(x1);
    }
  }
  const double x = (f1 >= f2) ? x1 : x2;
  if (best_val) *best_val = std::max(f1, f2);
  return x;
}

std::vector<double> optimize_input(
    const ChannelModel& model, int grid_steps, int refine_iters,
    const std::function<double(const std::vector<double>&)>& objective,
    double* value) {
  const int dims = model.x_size();
  std::vector<double> best;
  double best_val = -1.0;
  simplex_grid(dims, grid_steps, [&](const std::vector<double>& p) {
    const double v = objective(p);
    if (v > best_val) {
      best_val = v;
      best = p;
    }
  });

  // Local refinement: shift mass between coordinate pairs.
  std::vector<double> p = best;
  for (int it = 0; it < refine_iters; ++it) {
    for (int i = 0; i < dims; ++i)
      for (int j = i + 1; j < dims; ++j) {
        const double s = p[i] + p[j];
        if (s <= 0.0) continue;
        double val = 0.0;
        const double t = golden_max(
            0.0, s,
            [&](double ti) {
              std::vector<double> q = p;
              q[i] = ti;
              q[j] = s - ti;
              return objective(q);
            },
            &val);
        if (val > best_val) {
          p[i] = t;
          p[j] = s - t;
          best_val = val;
          best = p;
        }
      }
  }
  if (value) *value = best_val;
  return best;
}

void fill_lambda(RateProfile& profile) {
  const double ratio = profile.main_capacity / profile.secrecy_capacity;
  const double rounded = std::round(ratio);
  profile.ratio_is_integer = std::abs(ratio - rounded) < 1e-9;
  profile.lambda = profile.ratio_is_integer ? static_cast<int>(rounded)
                                            : static_cast<int>(std::floor(ratio));
  if (profile.lambda < 1) profile.lambda = 1;
}

}  // namespace

RateProfile rate_profile(const ChannelModel& model, int grid_steps,
                         int refine_iters) {
  if (grid_steps < 2) throw std::invalid_argument("grid_steps must be >= 2");
  const Matrix py = model.y_marginal();
  const Matrix pz = model.z_marginal();
  const auto cap_obj = [&](const std::vector<double>& p) { return channel_mi(p, py); };
  const auto sec_obj = [&](const std::vector<double>& p) {
    return channel_mi(p, py) - channel_mi(p, pz);
  };

  RateProfile profile;
  profile.optimizer_c.probs =
      optimize_input(model, grid_steps, refine_iters, cap_obj, &profile.main_capacity);
  profile.optimizer_rs.probs =
      optimize_input(model, grid_steps, refine_iters, sec_obj, &profile.secrecy_capacity);

  if (profile.secrecy_capacity <= 1e-12)
    throw NoSecrecyError("no secrecy: R_s = 0 for this channel");
  fill_lambda(profile);
  return profile;
}

RateProfile gaussian_rates(const GaussianWiretapParams& params) {
  if (params.power <= 0.0 || params.sigma_b_sq <= 0.0 || params.sigma_e_sq <= 0.0)
    throw std::invalid_argument("Gaussian parameters must be positive");
  if (params.sigma_b_sq >= params.sigma_e_sq)
    throw NoSecrecyError("no secrecy: Bob's noise variance must be below Eve's");
  RateProfile profile;
  profile.main_capacity = 0.5 * std::log2(1.0 + params.power / params.sigma_b_sq);
  const double eve_capacity = 0.5 * std::log2(1.0 + params.power / params.sigma_e_sq);
  profile.secrecy_capacity = profile.main_capacity - eve_capacity;
  fill_lambda(profile);
  return profile;
}

}  // namespace wiretap
