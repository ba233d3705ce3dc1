#include <cmath>
#include <string>

#include "pcnvs/errors.hpp"
#include "pcnvs/losses.hpp"

namespace pcnvs {

namespace {

double sign(double x) { return (x > 0.0) - (x < 0.0); }

LossBreakdown make_breakdown(std::vector<LossTerm> terms) {
  LossBreakdown out;
  out.terms = std::move(terms);
  for (const auto& t : out.terms) out.total += t.weight * t.value;
  return out;
}

template <typename T>
double l1_impl(const Raster<T>& a, const Raster<T>& b) {
  require_same_shape(a, b, "l1_metric");
  if (a.empty()) throw InputError("l1_metric: empty images");
  double sum = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    sum += std::abs(static_cast<double>(a[i]) - static_cast<double>(b[i]));
  }
  return sum / static_cast<double>(a.size());
}

void require_reflect(const SsimParams& params, const char* what) {
  if (params.padding != SsimPadding::kReflect) {
    throw InputError(std::string(what) + ": per-pixel SSIM needs reflect padding");
  }
}

void require_disparity_shape(const Map& d, const ImageD& image, const char* what) {
  if (d.channels() != 1 || d.width() != image.width() || d.height() != image.height()) {
    throw InputError(std::string(what) + ": disparity must be single-channel and match the image");
  }
}

/// Channel mean of |I(p) - I(q)|.
double image_grad(const ImageD& img, int x0, int y0, int x1, int y1) {
  double g = 0.0;
  for (int c = 0; c < img.channels(); ++c) g += std::abs(img.at(x1, y1, c) - img.at(x0, y0, c));
  return g / img.channels();
}

}  // namespace

double LossBreakdown::value(const std::string& name) const {
  for (const auto& t : terms) {
    if (t.name == name) return t.value;
  }
  throw InputError("loss breakdown has no term named '" + name + "'");
}

double l1_metric(const ImageD& a, const ImageD& b) { return l1_impl(a, b); }
double l1_metric(const Image& a, const Image& b) { return l1_impl(a, b); }

PhotometricResult photometric_loss(const ImageD& src, const ImageD& recon, double alpha,
                                   const SsimParams& params) {
  require_same_shape(src, recon, "photometric_loss");
  require_reflect(params, "photometric_loss");
  const SsimResult s = ssim(src, recon, params);
  PhotometricResult out;
  out.map = Map(src.width(), src.height(), 1, 0.0);
  const int channels = src.channels();
  double total = 0.0;
  for (int y = 0; y < src.height(); ++y) {
    for (int x = 0; x < src.width(); ++x) {
      double l1 = 0.0;
      for (int c = 0; c < channels; ++c) l1 += std::abs(src.at(x, y, c) - recon.at(x, y, c));
      l1 /= channels;
      const double v = 0.5 * alpha * (1.0 - s.map.at(x, y)) + (1.0 - alpha) * l1;
      out.map.at(x, y) = v;
      total += v;
    }
  }
  out.mean = total / static_cast<double>(out.map.pixel_count());
  return out;
}

PhotometricGradient photometric_gradient(const ImageD& src, const ImageD& recon, double alpha,
                                         const SsimParams& params) {
  require_same_shape(src, recon, "photometric_gradient");
  require_reflect(params, "photometric_gradient");
  const double n_pixels = static_cast<double>(src.pixel_count());
  const Map upstream(src.width(), src.height(), 1, 1.0 / n_pixels);

  PhotometricGradient g{ssim_vjp(recon, src, params, upstream), ssim_vjp(src, recon, params, upstream)};
  const double l1_scale = (1.0 - alpha) / (n_pixels * src.channels());
  for (std::size_t i = 0; i < src.size(); ++i) {
    const double s = sign(src[i] - recon[i]);
    g.d_src[i] = -0.5 * alpha * g.d_src[i] + l1_scale * s;
    g.d_recon[i] = -0.5 * alpha * g.d_recon[i] - l1_scale * s;
  }
  return g;
}

Map mean_normalized_inverse_depth(const DepthMap& depth) {
  double sum = 0.0;
  std::size_t n = 0;
  for (double d : depth.values()) {
    if (d > 0.0) {
      sum += d;
      ++n;
    }
  }
  if (n == 0) throw InputError("mean_normalized_inverse_depth: depth map has no valid pixel");
  const double mean = sum / static_cast<double>(n);
  Map out(depth.width(), depth.height(), 1, 0.0);
  for (int y = 0; y < depth.height(); ++y) {
    for (int x = 0; x < depth.width(); ++x) {
      if (depth.valid(x, y)) out.at(x, y) = mean / depth.at(x, y);
    }
  }
  return out;
}

double smoothness_loss(const Map& d, const ImageD& image) {
  require_disparity_shape(d, image, "smoothness_loss");
  const int w = d.width();
  const int h = d.height();
  double sx = 0.0;
  double sy = 0.0;
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x + 1 < w; ++x) {
      sx += std::abs(d.at(x + 1, y) - d.at(x, y)) * std::exp(-image_grad(image, x, y, x + 1, y));
    }
  }
  for (int y = 0; y + 1 < h; ++y) {
    for (int x = 0; x < w; ++x) {
      sy += std::abs(d.at(x, y + 1) - d.at(x, y)) * std::exp(-image_grad(image, x, y, x, y + 1));
    }
  }
  const double nx = static_cast<double>(w - 1) * h;
  const double ny = static_cast<double>(h - 1) * w;
  return (nx > 0 ? sx / nx : 0.0) + (ny > 0 ? sy / ny : 0.0);
}

double smoothness_loss(const DepthMap& depth, const ImageD& image) {
  return smoothness_loss(mean_normalized_inverse_depth(depth), image);
}

SmoothnessGradient smoothness_gradient(const Map& d, const ImageD& image) {
  require_disparity_shape(d, image, "smoothness_gradient");
  const int w = d.width();
  const int h = d.height();
  const int channels = image.channels();
  SmoothnessGradient g{Map(w, h, 1, 0.0), ImageD(w, h, channels, 0.0)};

  auto accumulate = [&](int x0, int y0, int x1, int y1, double scale) {
    const double dd = d.at(x1, y1) - d.at(x0, y0);
    const double e = std::exp(-image_grad(image, x0, y0, x1, y1));
    g.d_disparity.at(x1, y1) += scale * sign(dd) * e;
    g.d_disparity.at(x0, y0) -= scale * sign(dd) * e;
    // d/dI of |dd| exp(-mean_c |I1 - I0|)
    const double outer = -scale * std::abs(dd) * e / channels;
    for (int c = 0; c < channels; ++c) {
      const double s = sign(image.at(x1, y1, c) - image.at(x0, y0, c));
      g.d_image.at(x1, y1, c) += outer * s;
      g.d_image.at(x0, y0, c) -= outer * s;
    }
  };

  if (w > 1) {
    const double scale = 1.0 / (static_cast<double>(w - 1) * h);
    for (int y = 0; y < h; ++y) {
      for (int x = 0; x + 1 < w; ++x) accumulate(x, y, x + 1, y, scale);
    }
  }
  if (h > 1) {
    const double scale = 1.0 / (static_cast<double>(h - 1) * w);
    for (int y = 0; y + 1 < h; ++y) {
      for (int x = 0; x < w; ++x) accumulate(x, y, x, y + 1, scale);
    }
  }
  return g;
}

DepthLossResult depth_loss(const ImageD& src, const ImageD& recon, const ImageD& target,
                           const Map& disparity, const DepthLossWeights& weights) {
  require_same_shape(src, recon, "depth_loss");
  require_same_shape(src, target, "depth_loss");
  require_disparity_shape(disparity, src, "depth_loss");

  const PhotometricResult lp_recon = photometric_loss(src, recon, weights.alpha, weights.ssim);
  const PhotometricResult lp_target = photometric_loss(src, target, weights.alpha, weights.ssim);

  DepthLossResult out;
  out.mu.assign(src.pixel_count(), 0);
  double masked = 0.0;
  for (std::size_t i = 0; i < src.pixel_count(); ++i) {
    if (lp_recon.map[i] < lp_target.map[i]) {
      out.mu[i] = 1;
      masked += lp_recon.map[i];
    }
  }
  masked /= static_cast<double>(src.pixel_count());

  out.breakdown = make_breakdown({{"photometric", masked, 1.0},
                                  {"smoothness", smoothness_loss(disparity, src), weights.smoothness}});
  return out;
}

LossBreakdown completion_losses(double d_real, double d_fake, const ImageD& target,
                                const ImageD& generated,
                                const std::vector<std::pair<FeatureMap, FeatureMap>>& features,
                                const CompletionWeights& weights) {
  require_same_shape(target, generated, "completion_losses");
  const double l_disc = (d_real - 1.0) * (d_real - 1.0) + d_fake * d_fake;
  const double l_gen = (1.0 - ssim(target, generated, weights.ssim).mean) + l1_metric(target, generated);

  double l_perc = 0.0;
  for (std::size_t i = 0; i < features.size(); ++i) {
    const auto& [fa, fb] = features[i];
    if (!fa.same_shape(fb) || fa.data.size() != fb.data.size()) {
      throw InputError("completion_losses: feature pair " + std::to_string(i) + " shape mismatch");
    }
    double sq = 0.0;
    for (std::size_t j = 0; j < fa.data.size(); ++j) {
      const double diff = fa.data[j] - fb.data[j];
      if (!std::isfinite(diff)) {
        throw InputError("completion_losses: non-finite feature value in pair " + std::to_string(i));
      }
      sq += diff * diff;
    }
    l_perc += std::sqrt(sq);
  }

  return make_breakdown({{"discriminator", l_disc, weights.discriminator},
                         {"generator", l_gen, weights.generator},
                         {"perceptual", l_perc, weights.perceptual}});
}

}  // namespace pcnvs
