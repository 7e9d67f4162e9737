// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <array>
#include <optional>

#include "lskdet/box.hpp"

namespace lskdet {

/// Loss value plus its gradient with respect to the predicted corners
/// (d/dx1, d/dy1, d/dx2, d/dy2).
struct BoxLossResult {
  double value = 0.0;
  std::array<double, 4> gradient{};
  /// Set when the predicted box has zero area; the gradient is then zero.
  bool degenerate = false;
};

enum class CiouVariant {
  /// 1 - IoU + rho^2/c^2 + alpha*v with the self-normalising trade-off alpha.
  kStandard,
  /// 1 - (GIoU - alpha*d^2/A_C - beta*v^2/(1 - IoU)) with user-supplied alpha, beta.
  kPaperForm,
};

/// Scalars for CiouVariant::kPaperForm. Both must be set.
struct CiouParams {
  std::optional<double> alpha;
  std::optional<double> beta;
};

BoxLossResult iou_loss(const Box& pred, const Box& gt);

/// Throws DomainError when the enclosing box has zero area.
BoxLossResult giou_loss(const Box& pred, const Box& gt);

/// Throws DomainError for a degenerate ground-truth box and ConfigError when
/// kPaperForm is requested without both scalars.
BoxLossResult ciou_loss(const Box& pred, const Box& gt,
                        CiouVariant variant = CiouVariant::kStandard,
                        const CiouParams& params = {});

/// Aspect-ratio consistency term v = 4/pi^2 (atan(w_gt/h_gt) - atan(w/h))^2.
double aspect_consistency(const Box& pred, const Box& gt);

struct SmoothL1 {
  double value = 0.0;
  double derivative = 0.0;
};

/// 0.5 x^2 for |x| < 1, |x| - 0.5 otherwise.
SmoothL1 smooth_l1(double x);

/// Mean smooth-L1 over the four corner differences pred - gt.
BoxLossResult smooth_l1_box(const Box& pred, const Box& gt);

}  // namespace lskdet
