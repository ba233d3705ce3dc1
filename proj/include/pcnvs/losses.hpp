#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "pcnvs/depth_map.hpp"
#include "pcnvs/raster.hpp"

namespace pcnvs {

// ---------------------------------------------------------------------------
// SSIM
// ---------------------------------------------------------------------------

enum class SsimWindow { kUniform, kGaussian };

/// kValid evaluates only window centers whose window fits in the image;
/// kReflect pads by mirror reflection (edge not repeated) so the map has the
/// image's size.
enum class SsimPadding { kValid, kReflect };

struct SsimParams {
  int window = 11;
  SsimWindow type = SsimWindow::kGaussian;
  double sigma = 1.5;
  double c1 = 0.01 * 0.01;
  double c2 = 0.03 * 0.03;
  SsimPadding padding = SsimPadding::kValid;

  /// 11x11 Gaussian (sigma 1.5), valid windows. Used for evaluation.
  static SsimParams evaluation() { return {}; }
  /// 3x3 uniform, reflect padding. Used inside the photometric loss.
  static SsimParams photometric() {
    return {3, SsimWindow::kUniform, 1.5, 0.01 * 0.01, 0.03 * 0.03, SsimPadding::kReflect};
  }

  void validate() const;
  /// Normalized window weights, row-major window x window.
  std::vector<double> weights() const;
};

struct SsimResult {
  double mean = 0.0;
  /// Per-window-center SSIM averaged over channels.
  Map map;
};

/// Per-channel SSIM, averaged over channels, then over window centers.
/// Throws InputError on shape mismatch or an image smaller than the window.
SsimResult ssim(const ImageD& a, const ImageD& b, const SsimParams& params = SsimParams::evaluation());
SsimResult ssim(const Image& a, const Image& b, const SsimParams& params = SsimParams::evaluation());

/// Vector-Jacobian product of the SSIM map: returns d(sum_p upstream(p) S(p)) / d b,
/// where S(p) is the channel-averaged map returned by ssim(a, b).
/// The gradient with respect to `a` is ssim_vjp(b, a, ...) by symmetry.
ImageD ssim_vjp(const ImageD& a, const ImageD& b, const SsimParams& params, const Map& upstream);

// ---------------------------------------------------------------------------
// Metrics
// ---------------------------------------------------------------------------

/// Mean absolute difference over all pixels and channels.
double l1_metric(const ImageD& a, const ImageD& b);
double l1_metric(const Image& a, const Image& b);

// ---------------------------------------------------------------------------
// Loss terms
// ---------------------------------------------------------------------------

struct LossTerm {
  std::string name;
  double value = 0.0;
  double weight = 1.0;
};

/// Named loss terms plus total = sum(weight * value).
struct LossBreakdown {
  std::vector<LossTerm> terms;
  double total = 0.0;

  /// Throws InputError for an unknown name.
  double value(const std::string& name) const;
};

struct PhotometricResult {
  double mean = 0.0;
  Map map;
};

/// Per-pixel (alpha / 2) (1 - SSIM) + (1 - alpha) |src - recon|, both terms
/// averaged over channels; `mean` averages over pixels. `params` must use
/// reflect padding so the SSIM map aligns with the pixels.
PhotometricResult photometric_loss(const ImageD& src, const ImageD& recon, double alpha = 0.85,
                                   const SsimParams& params = SsimParams::photometric());

struct PhotometricGradient {
  ImageD d_src;
  ImageD d_recon;
};

/// Analytic gradient of photometric_loss(...).mean.
PhotometricGradient photometric_gradient(const ImageD& src, const ImageD& recon,
                                         double alpha = 0.85,
                                         const SsimParams& params = SsimParams::photometric());

/// d = mean(D over valid pixels) / D, and 0 where D is invalid.
/// Throws InputError if no pixel is valid.
Map mean_normalized_inverse_depth(const DepthMap& depth);

/// Edge-aware smoothness: mean over the (w-1) x h horizontal differences of
/// |dx d| exp(-|dx I|) plus the mean over the w x (h-1) vertical ones of
/// |dy d| exp(-|dy I|). |dI| is the channel mean of absolute differences.
double smoothness_loss(const Map& disparity, const ImageD& image);
/// Same, with d computed from the depth map.
double smoothness_loss(const DepthMap& depth, const ImageD& image);

struct SmoothnessGradient {
  Map d_disparity;
  ImageD d_image;
};

SmoothnessGradient smoothness_gradient(const Map& disparity, const ImageD& image);

struct DepthLossWeights {
  double alpha = 0.85;
  double smoothness = 1e-3;
  SsimParams ssim = SsimParams::photometric();
};

struct DepthLossResult {
  /// Terms "photometric" (mu-masked mean, weight 1) and "smoothness" (weight w_d).
  LossBreakdown breakdown;
  /// mu(p) = 1 iff L_p(src, recon)(p) < L_p(src, target)(p).
  std::vector<std::uint8_t> mu;
};

DepthLossResult depth_loss(const ImageD& src, const ImageD& recon, const ImageD& target,
                           const Map& disparity, const DepthLossWeights& weights = {});

/// Caller-supplied activation tensor, stored channel-major (c, y, x).
struct FeatureMap {
  int channels = 0;
  int height = 0;
  int width = 0;
  std::vector<double> data;

  FeatureMap() = default;
  FeatureMap(int c, int h, int w, double fill = 0.0)
      : channels(c), height(h), width(w), data(static_cast<std::size_t>(c) * h * w, fill) {}

  bool same_shape(const FeatureMap& o) const {
    return channels == o.channels && height == o.height && width == o.width;
  }
};

struct CompletionWeights {
  double discriminator = 1.0;
  double generator = 100.0;
  double perceptual = 100.0;
  SsimParams ssim = SsimParams::evaluation();
};

/// Terms "discriminator" = (d_real - 1)^2 + d_fake^2,
/// "generator" = [1 - SSIM(target, generated)] + mean |target - generated|,
/// "perceptual" = sum over pairs of the Euclidean distance between features.
LossBreakdown completion_losses(double d_real, double d_fake, const ImageD& target,
                                const ImageD& generated,
                                const std::vector<std::pair<FeatureMap, FeatureMap>>& features,
                                const CompletionWeights& weights = {});

}  // namespace pcnvs
