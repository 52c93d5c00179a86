// Entropy/mutual-information kernels, capacity optimization and the
// Gaussian wiretap closed forms.
#pragma once

#include <vector>

#include "wiretap/channel.hpp"
#include "wiretap/common.hpp"

namespace wiretap {

// Probability vector over the channel input alphabet.
struct InputDistribution {
  std::vector<double> probs;
};

struct RateProfile {
  double main_capacity = 0.0;     // C, bits per channel use
  double secrecy_capacity = 0.0;  // R_s, bits per channel use
  int lambda = 0;                 // floor(C / R_s)
  bool ratio_is_integer = false;
  InputDistribution optimizer_c;
  InputDistribution optimizer_rs;
};

struct GaussianWiretapParams {
  double power = 0.0;
  double sigma_b_sq = 0.0;
  double sigma_e_sq = 0.0;
};

double binary_entropy(double p);

// I(A;B) in bits from a joint probability matrix. Total mass must be 1
// within 1e-9; the result is clamped to be nonnegative.
double mutual_information(const Matrix& joint);

// I(A;B|C) from a joint tensor indexed [a][b][c].
double conditional_mi(const std::vector<Matrix>& joint_abc);

// Grid search over the input simplex with coordinate-wise golden-section
// refinement. Throws NoSecrecyError when R_s vanishes.
RateProfile rate_profile(const ChannelModel& model, int grid_steps = 201,
                         int refine_iters = 3);

RateProfile gaussian_rates(const GaussianWiretapParams& params);

}  // namespace wiretap
