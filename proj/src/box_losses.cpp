// SPDX-License-Identifier: Apache-2.0
#include "lskdet/box_losses.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "lskdet/error.hpp"

namespace lskdet {
namespace {

using Grad = std::array<double, 4>;  // order: x1, y1, x2, y2

constexpr int kX1 = 0;
constexpr int kY1 = 1;
constexpr int kX2 = 2;
constexpr int kY2 = 3;

Grad scale(const Grad& g, double s) { return {g[0] * s, g[1] * s, g[2] * s, g[3] * s}; }

Grad axpy(double a, const Grad& x, const Grad& y) {
  return {a * x[0] + y[0], a * x[1] + y[1], a * x[2] + y[2], a * x[3] + y[3]};
}

// d(n/d) from n, d and their gradients.
Grad quotient_grad(double n, const Grad& dn, double d, const Grad& dd) {
  Grad g{};
  const double d2 = d * d;
  for (int i = 0; i < 4; ++i) g[i] = (dn[i] * d - n * dd[i]) / d2;
  return g;
}

// Overlap quantities and their partials w.r.t. the predicted corners.
// At max/min ties the predicted box's branch is taken.
struct Overlap {
  double inter = 0.0;
  double uni = 0.0;
  double iou = 0.0;
  double enclose = 0.0;
  Grad d_inter{};
  Grad d_union{};
  Grad d_iou{};
  Grad d_enclose{};
  double enc_w = 0.0;
  double enc_h = 0.0;
  Grad d_enc_w{};
  Grad d_enc_h{};
};

Overlap overlap(const Box& p, const Box& g) {
  Overlap o;
  const double w = p.x2 - p.x1;
  const double h = p.y2 - p.y1;
  const double area_p = w * h;
  const double area_g = (g.x2 - g.x1) * (g.y2 - g.y1);

  double iw = std::min(p.x2, g.x2) - std::max(p.x1, g.x1);
  double ih = std::min(p.y2, g.y2) - std::max(p.y1, g.y1);
  Grad d_iw{}, d_ih{};
  if (iw > 0.0) {
    d_iw[kX1] = p.x1 >= g.x1 ? -1.0 : 0.0;
    d_iw[kX2] = p.x2 <= g.x2 ? 1.0 : 0.0;
  } else {
    iw = 0.0;
  }
  if (ih > 0.0) {
    d_ih[kY1] = p.y1 >= g.y1 ? -1.0 : 0.0;
    d_ih[kY2] = p.y2 <= g.y2 ? 1.0 : 0.0;
  } else {
    ih = 0.0;
  }
  o.inter = iw * ih;
  for (int i = 0; i < 4; ++i) o.d_inter[i] = d_iw[i] * ih + iw * d_ih[i];

  const Grad d_area_p{-h, -w, h, w};
  o.uni = area_p + area_g - o.inter;
  for (int i = 0; i < 4; ++i) o.d_union[i] = d_area_p[i] - o.d_inter[i];

  if (o.uni > 0.0) {
    o.iou = o.inter / o.uni;
    o.d_iou = quotient_grad(o.inter, o.d_inter, o.uni, o.d_union);
  }

  o.enc_w = std::max(p.x2, g.x2) - std::min(p.x1, g.x1);
  o.enc_h = std::max(p.y2, g.y2) - std::min(p.y1, g.y1);
  o.d_enc_w[kX1] = p.x1 <= g.x1 ? -1.0 : 0.0;
  o.d_enc_w[kX2] = p.x2 >= g.x2 ? 1.0 : 0.0;
  o.d_enc_h[kY1] = p.y1 <= g.y1 ? -1.0 : 0.0;
  o.d_enc_h[kY2] = p.y2 >= g.y2 ? 1.0 : 0.0;
  o.enclose = o.enc_w * o.enc_h;
  for (int i = 0; i < 4; ++i) o.d_enclose[i] = o.d_enc_w[i] * o.enc_h + o.enc_w * o.d_enc_h[i];
  return o;
}

struct Aspect {
  double v = 0.0;
  Grad dv{};
};

Aspect aspect(const Box& p, const Box& g) {
  constexpr double kScale = 4.0 / (std::numbers::pi * std::numbers::pi);
  const double w = p.x2 - p.x1;
  const double h = p.y2 - p.y1;
  const double diff = std::atan2(g.x2 - g.x1, g.y2 - g.y1) - std::atan2(w, h);
  Aspect a;
  a.v = kScale * diff * diff;
  const double r2 = w * w + h * h;
  if (r2 > 0.0) {
    // d atan2(w, h) = (h dw - w dh) / (w^2 + h^2)
    const double dv_dw = -2.0 * kScale * diff * (h / r2);
    const double dv_dh = 2.0 * kScale * diff * (w / r2);
    a.dv = {-dv_dw, -dv_dh, dv_dw, dv_dh};
  }
  return a;
}

struct CenterDistance {
  double rho2 = 0.0;
  Grad d_rho2{};
};

CenterDistance center_distance(const Box& p, const Box& g) {
  const double dx = p.center_x() - g.center_x();
  const double dy = p.center_y() - g.center_y();
  return {dx * dx + dy * dy, {dx, dy, dx, dy}};
}

void check_normalized(const Box& b, const char* what) {
  if (!b.is_normalized()) throw DomainError(std::string(what) + " box is not normalized (x1 > x2 or y1 > y2)");
}

}  // namespace

double iou(const Box& pred, const Box& gt) {
  const double iw = std::max(0.0, std::min(pred.x2, gt.x2) - std::max(pred.x1, gt.x1));
  const double ih = std::max(0.0, std::min(pred.y2, gt.y2) - std::max(pred.y1, gt.y1));
  const double inter = iw * ih;
  const double uni = (pred.x2 - pred.x1) * (pred.y2 - pred.y1) + (gt.x2 - gt.x1) * (gt.y2 - gt.y1) - inter;
  if (!(uni > 0.0)) return 0.0;
  return inter / uni;
}

BoxLossResult iou_loss(const Box& pred, const Box& gt) {
  check_normalized(pred, "predicted");
  check_normalized(gt, "ground-truth");
  BoxLossResult r;
  if (pred.is_degenerate()) {
    r.value = 1.0;
    r.degenerate = true;
    return r;
  }
  const Overlap o = overlap(pred, gt);
  r.value = 1.0 - o.iou;
  r.gradient = scale(o.d_iou, -1.0);
  return r;
}

BoxLossResult giou_loss(const Box& pred, const Box& gt) {
  check_normalized(pred, "predicted");
  check_normalized(gt, "ground-truth");
  const Overlap o = overlap(pred, gt);
  if (!(o.enclose > 0.0)) throw DomainError("GIoU undefined: enclosing box has zero area");

  BoxLossResult r;
  r.degenerate = pred.is_degenerate();
  // Enclosure never trails the union; the clamp absorbs rounding so the loss
  // can never drop below the IoU loss.
  const double penalty = std::max(0.0, (o.enclose - o.uni) / o.enclose);
  r.value = (1.0 - o.iou) + penalty;
  // loss = 2 - IoU - U / A_C
  const Grad d_ratio = quotient_grad(o.uni, o.d_union, o.enclose, o.d_enclose);
  for (int i = 0; i < 4; ++i) r.gradient[i] = -o.d_iou[i] - d_ratio[i];
  return r;
}

double aspect_consistency(const Box& pred, const Box& gt) { return aspect(pred, gt).v; }

BoxLossResult ciou_loss(const Box& pred, const Box& gt, CiouVariant variant, const CiouParams& params) {
  check_normalized(pred, "predicted");
  check_normalized(gt, "ground-truth");
  if (gt.is_degenerate()) throw DomainError("CIoU requires a ground-truth box with positive area");

  const Overlap o = overlap(pred, gt);
  const Aspect a = aspect(pred, gt);
  const CenterDistance cd = center_distance(pred, gt);
  const double s = 1.0 - o.iou;
  const Grad d_s = scale(o.d_iou, -1.0);

  BoxLossResult r;
  r.degenerate = pred.is_degenerate();

  if (variant == CiouVariant::kStandard) {
    // Positive because gt is non-degenerate.
    const double c2 = o.enc_w * o.enc_w + o.enc_h * o.enc_h;
    Grad d_c2{};
    for (int i = 0; i < 4; ++i) d_c2[i] = 2.0 * o.enc_w * o.d_enc_w[i] + 2.0 * o.enc_h * o.d_enc_h[i];

    r.value = s;
    r.gradient = d_s;

    r.value += cd.rho2 / c2;
    r.gradient = axpy(1.0, quotient_grad(cd.rho2, cd.d_rho2, c2, d_c2), r.gradient);

    // alpha * v = v^2 / (S + v); alpha := 0 when S + v == 0.
    const double denom = s + a.v;
    if (denom > 0.0) {
      r.value += a.v * a.v / denom;
      Grad d_num{}, d_den{};
      for (int i = 0; i < 4; ++i) {
        d_num[i] = 2.0 * a.v * a.dv[i];
        d_den[i] = d_s[i] + a.dv[i];
      }
      r.gradient = axpy(1.0, quotient_grad(a.v * a.v, d_num, denom, d_den), r.gradient);
    }
    return r;
  }

  if (!params.alpha || !params.beta) {
    std::string missing;
    if (!params.alpha) missing += "ciou_alpha";
    if (!params.beta) missing += missing.empty() ? "ciou_beta" : ", ciou_beta";
    throw ConfigError("ciou paper form requires " + missing);
  }
  const double alpha = *params.alpha;
  const double beta = *params.beta;

  const double giou = o.iou - (o.enclose - o.uni) / o.enclose;
  // GIoU = IoU - 1 + U / A_C
  const Grad d_giou = axpy(1.0, quotient_grad(o.uni, o.d_union, o.enclose, o.d_enclose), o.d_iou);

  double inner = giou - alpha * cd.rho2 / o.enclose;
  Grad d_inner = axpy(-alpha, quotient_grad(cd.rho2, cd.d_rho2, o.enclose, o.d_enclose), d_giou);
  if (s > 0.0) {
    const double v2 = a.v * a.v;
    Grad d_v2{};
    for (int i = 0; i < 4; ++i) d_v2[i] = 2.0 * a.v * a.dv[i];
    inner -= beta * v2 / s;
    d_inner = axpy(-beta, quotient_grad(v2, d_v2, s, d_s), d_inner);
  }
  r.value = 1.0 - inner;
  r.gradient = scale(d_inner, -1.0);
  return r;
}

SmoothL1 smooth_l1(double x) {
  const double ax = std::abs(x);
  if (ax < 1.0) return {0.5 * x * x, x};
  return {ax - 0.5, x > 0.0 ? 1.0 : -1.0};
}

BoxLossResult smooth_l1_box(const Box& pred, const Box& gt) {
  const auto p = pred.as_array();
  const auto g = gt.as_array();
  BoxLossResult r;
  double sum = 0.0;
  for (int i = 0; i < 4; ++i) {
    const SmoothL1 s = smooth_l1(p[i] - g[i]);
    sum += s.value;
    r.gradient[i] = s.derivative / 4.0;
  }
  r.value = sum / 4.0;
  return r;
}

}  // namespace lskdet
