#include "tragraph/metrics.hpp"

#include <array>
#include <cmath>
#include <vector>

#include "tragraph/error.hpp"

namespace tragraph {

namespace {

void require_same_size(const Image& a, const Image& b) {
  if (a.width() != b.width() || a.height() != b.height())
    throw ArgumentError("image dimensions differ: " + std::to_string(a.width()) + "x" + std::to_string(a.height()) +
                        " vs " + std::to_string(b.width()) + "x" + std::to_string(b.height()));
}

std::array<double, kSsimWindow> ssim_kernel() {
  std::array<double, kSsimWindow> k{};
  double sum = 0.0;
  for (int i = 0; i < kSsimWindow; ++i) {
    const double d = i - kSsimWindow / 2;
    k[i] = std::exp(-d * d / (2.0 * kSsimSigma * kSsimSigma));
    sum += k[i];
  }
  for (double& v : k) v /= sum;
  return k;
}

// Separable zero-padded "same" Gaussian filter on a single-channel plane.
std::vector<double> gaussian_filter(const std::vector<double>& in, int w, int h) {
  static const auto kernel = ssim_kernel();
  constexpr int half = kSsimWindow / 2;
  std::vector<double> tmp(in.size(), 0.0), out(in.size(), 0.0);
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      double s = 0.0;
      for (int i = -half; i <= half; ++i) {
        const int xx = x + i;
        if (xx >= 0 && xx < w) s += kernel[i + half] * in[static_cast<std::size_t>(y) * w + xx];
      }
      tmp[static_cast<std::size_t>(y) * w + x] = s;
    }
  }
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      double s = 0.0;
      for (int i = -half; i <= half; ++i) {
        const int yy = y + i;
        if (yy >= 0 && yy < h) s += kernel[i + half] * tmp[static_cast<std::size_t>(yy) * w + x];
      }
      out[static_cast<std::size_t>(y) * w + x] = s;
    }
  }
  return out;
}

std::vector<double> channel(const Image& image, int c) {
  std::vector<double> plane(image.pixel_count());
  const auto data = image.data();
  for (std::size_t i = 0; i < plane.size(); ++i) plane[i] = data[i * 3 + c];
  return plane;
}

}  // namespace

double l1_distance(const Image& a, const Image& b) {
  require_same_size(a, b);
  const auto da = a.data();
  const auto db = b.data();
  if (da.empty()) return 0.0;
  double sum = 0.0;
  for (std::size_t i = 0; i < da.size(); ++i) sum += std::abs(da[i] - db[i]);
  return sum / static_cast<double>(da.size());
}

double ssim(const Image& a, const Image& b, Image* grad_a) {
  require_same_size(a, b);
  const int w = a.width();
  const int h = a.height();
  const std::size_t n = a.pixel_count();
  if (n == 0) throw ArgumentError("ssim of an empty image");
  if (grad_a) *grad_a = Image(w, h);
  const double norm = 1.0 / static_cast<double>(n * 3);
  double total = 0.0;

  for (int c = 0; c < 3; ++c) {
    const auto pa = channel(a, c);
    const auto pb = channel(b, c);
    std::vector<double> aa(n), bb(n), ab(n);
    for (std::size_t i = 0; i < n; ++i) {
      aa[i] = pa[i] * pa[i];
      bb[i] = pb[i] * pb[i];
      ab[i] = pa[i] * pb[i];
    }
    const auto mu_a = gaussian_filter(pa, w, h);
    const auto mu_b = gaussian_filter(pb, w, h);
    const auto e_aa = gaussian_filter(aa, w, h);
    const auto e_bb = gaussian_filter(bb, w, h);
    const auto e_ab = gaussian_filter(ab, w, h);

    std::vector<double> d_mean, d_sq, d_cross;
    if (grad_a) {
      d_mean.resize(n);
      d_sq.resize(n);
      d_cross.resize(n);
    }
    for (std::size_t i = 0; i < n; ++i) {
      const double ma = mu_a[i], mb = mu_b[i];
      const double var_a = e_aa[i] - ma * ma;
      const double var_b = e_bb[i] - mb * mb;
      const double cov = e_ab[i] - ma * mb;
      const double n1 = 2.0 * ma * mb + kSsimC1;
      const double n2 = 2.0 * cov + kSsimC2;
      const double d1 = ma * ma + mb * mb + kSsimC1;
      const double d2 = var_a + var_b + kSsimC2;
      const double s = (n1 * n2) / (d1 * d2);
      total += s;
      if (grad_a) {
        const double ds_dmu = 2.0 * mb * n2 / (d1 * d2) - s * 2.0 * ma / d1;
        const double ds_dvar = -s / d2;
        const double ds_dcov = 2.0 * n1 / (d1 * d2);
        // Chain to the raw moments E[a], E[a^2], E[ab].
        d_mean[i] = ds_dmu - 2.0 * ma * ds_dvar - mb * ds_dcov;
        d_sq[i] = ds_dvar;
        d_cross[i] = ds_dcov;
      }
    }
    if (grad_a) {
      const auto f_mean = gaussian_filter(d_mean, w, h);
      const auto f_sq = gaussian_filter(d_sq, w, h);
      const auto f_cross = gaussian_filter(d_cross, w, h);
      auto out = grad_a->data();
      for (std::size_t i = 0; i < n; ++i)
        out[i * 3 + c] = norm * (f_mean[i] + 2.0 * pa[i] * f_sq[i] + pb[i] * f_cross[i]);
    }
  }
  return total * norm;
}

double psnr(const Image& a, const Image& b) {
  require_same_size(a, b);
  const auto da = a.data();
  const auto db = b.data();
  if (da.empty()) throw ArgumentError("psnr of an empty image");
  double sum = 0.0;
  for (std::size_t i = 0; i < da.size(); ++i) sum += (da[i] - db[i]) * (da[i] - db[i]);
  const double mse = sum / static_cast<double>(da.size());
  if (mse < 1e-10) return 100.0;
  return 10.0 * std::log10(1.0 / mse);
}

double loss_photometric(const Image& rendered, const Image& target, double lambda, Image* grad_rendered) {
  require_same_size(rendered, target);
  if (!(lambda >= 0.0 && lambda <= 1.0)) throw ArgumentError("lambda must lie in [0, 1]");
  Image ssim_grad;
  const double s = lambda > 0.0 ? ssim(rendered, target, grad_rendered ? &ssim_grad : nullptr) : 1.0;
  const double l1 = l1_distance(rendered, target);
  if (grad_rendered) {
    *grad_rendered = Image(rendered.width(), rendered.height());
    auto g = grad_rendered->data();
    const auto r = rendered.data();
    const auto t = target.data();
    const double scale = (1.0 - lambda) / static_cast<double>(r.size());
    for (std::size_t i = 0; i < r.size(); ++i) {
      const double d = r[i] - t[i];
      g[i] = d > 0.0 ? scale : (d < 0.0 ? -scale : 0.0);
      if (lambda > 0.0) g[i] -= lambda * ssim_grad.data()[i];
    }
  }
  return (1.0 - lambda) * l1 + lambda * (1.0 - s);
}

}  // namespace tragraph
