#include <cmath>
#include <string>

#include "pcnvs/errors.hpp"
#include "pcnvs/losses.hpp"

namespace pcnvs {

void SsimParams::validate() const {
  if (window < 3 || window % 2 == 0) throw InputError("ssim: window must be odd and >= 3");
  if (!(c1 > 0.0) || !(c2 > 0.0)) throw InputError("ssim: C1 and C2 must be positive");
  if (type == SsimWindow::kGaussian && !(sigma > 0.0)) {
    throw InputError("ssim: gaussian sigma must be positive");
  }
}

std::vector<double> SsimParams::weights() const {
  validate();
  const int r = window / 2;
  std::vector<double> w(static_cast<std::size_t>(window) * window);
  double sum = 0.0;
  for (int dy = -r; dy <= r; ++dy) {
    for (int dx = -r; dx <= r; ++dx) {
      const double v = type == SsimWindow::kUniform
                           ? 1.0
                           : std::exp(-(dx * dx + dy * dy) / (2.0 * sigma * sigma));
      w[static_cast<std::size_t>(dy + r) * window + (dx + r)] = v;
      sum += v;
    }
  }
  for (auto& v : w) v /= sum;
  return w;
}

namespace {

int reflect(int i, int n) {
  if (i < 0) return -i;
  if (i >= n) return 2 * (n - 1) - i;
  return i;
}

/// Window geometry shared by the forward pass and the gradient.
struct WindowLayout {
  int radius = 0;
  int out_w = 0;
  int out_h = 0;
  bool reflect_pad = false;
  int width = 0;
  int height = 0;

  WindowLayout(const SsimParams& p, int w, int h)
      : radius(p.window / 2), reflect_pad(p.padding == SsimPadding::kReflect), width(w), height(h) {
    if (reflect_pad) {
      if (radius > w - 1 || radius > h - 1) {
        throw InputError("ssim: image " + std::to_string(w) + "x" + std::to_string(h) +
                         " too small for reflect padding with window " + std::to_string(p.window));
      }
      out_w = w;
      out_h = h;
    } else {
      if (w < p.window || h < p.window) {
        throw InputError("ssim: image " + std::to_string(w) + "x" + std::to_string(h) +
                         " smaller than the " + std::to_string(p.window) + "x" +
                         std::to_string(p.window) + " window");
      }
      out_w = w - p.window + 1;
      out_h = h - p.window + 1;
    }
  }

  /// Image x coordinate for output column ox and window offset dx.
  int tap_x(int ox, int dx) const {
    return reflect_pad ? reflect(ox + dx, width) : ox + radius + dx;
  }
  int tap_y(int oy, int dy) const {
    return reflect_pad ? reflect(oy + dy, height) : oy + radius + dy;
  }
};

struct WindowStats {
  double mu_a, mu_b, var_a, var_b, cov;
};

template <typename T>
WindowStats window_stats(const Raster<T>& a, const Raster<T>& b, int c, int ox, int oy,
                         const WindowLayout& L, const std::vector<double>& w) {
  double sa = 0, sb = 0, saa = 0, sbb = 0, sab = 0;
  const int win = 2 * L.radius + 1;
  for (int dy = -L.radius; dy <= L.radius; ++dy) {
    const int y = L.tap_y(oy, dy);
    for (int dx = -L.radius; dx <= L.radius; ++dx) {
      const int x = L.tap_x(ox, dx);
      const double wk = w[static_cast<std::size_t>(dy + L.radius) * win + (dx + L.radius)];
      const double va = a.at(x, y, c);
      const double vb = b.at(x, y, c);
      sa += wk * va;
      sb += wk * vb;
      saa += wk * va * va;
      sbb += wk * vb * vb;
      sab += wk * va * vb;
    }
  }
  return {sa, sb, saa - sa * sa, sbb - sb * sb, sab - sa * sb};
}

template <typename T>
SsimResult ssim_impl(const Raster<T>& a, const Raster<T>& b, const SsimParams& params) {
  params.validate();
  require_same_shape(a, b, "ssim");
  const WindowLayout L(params, a.width(), a.height());
  const std::vector<double> w = params.weights();
  const int channels = a.channels();

  SsimResult out;
  out.map = Map(L.out_w, L.out_h, 1, 0.0);
  double total = 0.0;
  for (int oy = 0; oy < L.out_h; ++oy) {
    for (int ox = 0; ox < L.out_w; ++ox) {
      double s = 0.0;
      for (int c = 0; c < channels; ++c) {
        const WindowStats st = window_stats(a, b, c, ox, oy, L, w);
        const double num = (2.0 * st.mu_a * st.mu_b + params.c1) * (2.0 * st.cov + params.c2);
        const double den = (st.mu_a * st.mu_a + st.mu_b * st.mu_b + params.c1) *
                           (st.var_a + st.var_b + params.c2);
        s += num / den;
      }
      s /= channels;
      out.map.at(ox, oy) = s;
      total += s;
    }
  }
  out.mean = total / static_cast<double>(out.map.pixel_count());
  return out;
}

}  // namespace

SsimResult ssim(const ImageD& a, const ImageD& b, const SsimParams& params) {
  return ssim_impl(a, b, params);
}

SsimResult ssim(const Image& a, const Image& b, const SsimParams& params) {
  return ssim_impl(a, b, params);
}

ImageD ssim_vjp(const ImageD& a, const ImageD& b, const SsimParams& params, const Map& upstream) {
  params.validate();
  require_same_shape(a, b, "ssim_vjp");
  const WindowLayout L(params, a.width(), a.height());
  if (upstream.width() != L.out_w || upstream.height() != L.out_h || upstream.channels() != 1) {
    throw InputError("ssim_vjp: upstream map does not match the SSIM map shape");
  }
  const std::vector<double> w = params.weights();
  const int channels = a.channels();
  const int win = params.window;
  const double c1 = params.c1;
  const double c2 = params.c2;

  ImageD grad(a.width(), a.height(), channels, 0.0);
  for (int oy = 0; oy < L.out_h; ++oy) {
    for (int ox = 0; ox < L.out_w; ++ox) {
      const double g = upstream.at(ox, oy) / channels;
      if (g == 0.0) continue;
      for (int c = 0; c < channels; ++c) {
        const WindowStats st = window_stats(a, b, c, ox, oy, L, w);
        const double a1 = 2.0 * st.mu_a * st.mu_b + c1;
        const double a2 = 2.0 * st.cov + c2;
        const double b1 = st.mu_a * st.mu_a + st.mu_b * st.mu_b + c1;
        const double b2 = st.var_a + st.var_b + c2;
        const double s = a1 * a2 / (b1 * b2);
        // dS/db_k = w_k / (B1 B2) * (k0 + ka a_k + kb b_k)
        const double inv = g / (b1 * b2);
        const double k0 = 2.0 * st.mu_a * a2 - 2.0 * a1 * st.mu_a - 2.0 * s * st.mu_b * b2 +
                          2.0 * s * b1 * st.mu_b;
        const double ka = 2.0 * a1;
        const double kb = -2.0 * s * b1;
        for (int dy = -L.radius; dy <= L.radius; ++dy) {
          const int y = L.tap_y(oy, dy);
          for (int dx = -L.radius; dx <= L.radius; ++dx) {
            const int x = L.tap_x(ox, dx);
            const double wk = w[static_cast<std::size_t>(dy + L.radius) * win + (dx + L.radius)];
            grad.at(x, y, c) += inv * wk * (k0 + ka * a.at(x, y, c) + kb * b.at(x, y, c));
          }
        }
      }
    }
  }
  return grad;
}

}  // namespace pcnvs
