#pragma once

#include "tragraph/image.hpp"

namespace tragraph {

inline constexpr int kSsimWindow = 11;
inline constexpr double kSsimSigma = 1.5;
inline constexpr double kSsimC1 = 0.01 * 0.01;
inline constexpr double kSsimC2 = 0.03 * 0.03;

// Mean absolute difference over all channels.
double l1_distance(const Image& a, const Image& b);

// Mean SSIM over pixels and channels; 11x11 Gaussian window, sigma 1.5,
// zero-padded "same" filtering. When `grad_a` is non-null it receives
// d(mean SSIM)/d(a).
double ssim(const Image& a, const Image& b, Image* grad_a = nullptr);

double psnr(const Image& a, const Image& b);

// (1 - lambda) * L1 + lambda * (1 - SSIM). When `grad_rendered` is non-null
// it receives dLoss/d(rendered).
double loss_photometric(const Image& rendered, const Image& target, double lambda,
                        Image* grad_rendered = nullptr);

}  // namespace tragraph
