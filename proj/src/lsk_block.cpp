// SPDX-License-Identifier: Apache-2.0
#include "lskdet/lsk_block.hpp"

#include <cmath>
#include <limits>
#include <random>
#include <string>

#include "lskdet/error.hpp"
#include "lskdet/simd/kernels.hpp"

namespace lskdet {
namespace {

constexpr int kAttnRadius = kAttentionKernelSize / 2;

double sigmoid(double x) {
  if (x >= 0.0) return 1.0 / (1.0 + std::exp(-x));
  const double e = std::exp(x);
  return e / (1.0 + e);
}

std::size_t attn_index(int branch, int m, int i, int j) {
  return ((static_cast<std::size_t>(branch) * 2 + m) * kAttentionKernelSize + i) * kAttentionKernelSize + j;
}

DepthwiseKernel flipped(const DepthwiseKernel& k) {
  DepthwiseKernel f(k.channels, k.ksize);
  for (int c = 0; c < k.channels; ++c) {
    for (int i = 0; i < k.ksize; ++i) {
      for (int j = 0; j < k.ksize; ++j) f.at(c, i, j) = k.at(c, k.ksize - 1 - i, k.ksize - 1 - j);
    }
  }
  return f;
}

void add_into(FeatureMap& dst, const FeatureMap& src) {
  auto d = dst.data();
  auto s = src.data();
  for (std::size_t i = 0; i < d.size(); ++i) d[i] += s[i];
}

// d loss / d kernel for out = depthwise_conv(in, k, dilation), given d loss / d out.
DepthwiseKernel depthwise_weight_grad(const FeatureMap& in, const FeatureMap& grad_out, int ksize, int dilation) {
  DepthwiseKernel g(in.channels(), ksize);
  const int r = ksize / 2;
  const int h = in.height();
  const int w = in.width();
  for (int c = 0; c < in.channels(); ++c) {
    for (int i = 0; i < ksize; ++i) {
      const int dy = (i - r) * dilation;
      for (int j = 0; j < ksize; ++j) {
        const int dx = (j - r) * dilation;
        double acc = 0.0;
        for (int y = std::max(0, -dy); y < std::min(h, h - dy); ++y) {
          for (int x = std::max(0, -dx); x < std::min(w, w - dx); ++x) {
            acc += grad_out.at(c, y, x) * in.at(c, y + dy, x + dx);
          }
        }
        g.at(c, i, j) = acc;
      }
    }
  }
  return g;
}

struct SelectionTrace {
  FeatureMap descriptor;
  std::vector<std::int32_t> argmax;
  FeatureMap attention;
  FeatureMap selected;
  FeatureMap projected;
};

void check_selection_inputs(std::span<const FeatureMap> features, const SelectionParams& p) {
  if (features.empty()) throw ShapeError("spatial kernel selection needs at least one feature map");
  const FeatureMap& first = features.front();
  for (const FeatureMap& f : features) {
    if (!f.same_shape(first)) throw ShapeError("spatial kernel selection inputs differ in shape");
  }
  const int n = static_cast<int>(features.size());
  const int c = first.channels();
  if (p.branches != n || p.channels != c) {
    throw ShapeError("selection params sized for " + std::to_string(p.branches) + " branches x " +
                     std::to_string(p.channels) + " channels, got " + std::to_string(n) + " x " + std::to_string(c));
  }
  if (p.attn_weight.size() != static_cast<std::size_t>(n) * 2 * kAttentionKernelSize * kAttentionKernelSize ||
      p.attn_bias.size() != static_cast<std::size_t>(n) || p.proj_weight.size() != static_cast<std::size_t>(c) * c) {
    throw ShapeError("selection parameter arrays have the wrong size");
  }
}

SelectionTrace run_selection(std::span<const FeatureMap> features, const SelectionParams& p) {
  check_selection_inputs(features, p);
  const int n_br = static_cast<int>(features.size());
  const int ch = features.front().channels();
  const int h = features.front().height();
  const int w = features.front().width();
  const std::size_t plane = features.front().plane_size();

  SelectionTrace t;
  t.descriptor = FeatureMap(2, h, w);
  t.argmax.assign(plane, 0);
  const double inv_count = 1.0 / static_cast<double>(n_br * ch);
  for (std::size_t px = 0; px < plane; ++px) {
    double sum = 0.0;
    double best = -std::numeric_limits<double>::infinity();
    std::int32_t best_idx = 0;
    for (int b = 0; b < n_br; ++b) {
      for (int c = 0; c < ch; ++c) {
        const double v = features[b].plane(c)[px];
        sum += v;
        if (v > best) {
          best = v;
          best_idx = b * ch + c;
        }
      }
    }
    t.descriptor.plane(0)[px] = sum * inv_count;
    t.descriptor.plane(1)[px] = best;
    t.argmax[px] = best_idx;
  }

  t.attention = FeatureMap(n_br, h, w);
  for (int b = 0; b < n_br; ++b) {
    for (int y = 0; y < h; ++y) {
      for (int x = 0; x < w; ++x) {
        double acc = p.attn_bias[b];
        for (int m = 0; m < 2; ++m) {
          for (int i = 0; i < kAttentionKernelSize; ++i) {
            const int yy = y + i - kAttnRadius;
            if (yy < 0 || yy >= h) continue;
            for (int j = 0; j < kAttentionKernelSize; ++j) {
              const int xx = x + j - kAttnRadius;
              if (xx < 0 || xx >= w) continue;
              acc += p.attn_weight[attn_index(b, m, i, j)] * t.descriptor.at(m, yy, xx);
            }
          }
        }
        t.attention.at(b, y, x) = sigmoid(acc);
      }
    }
  }

  t.selected = FeatureMap(ch, h, w);
  for (int b = 0; b < n_br; ++b) {
    auto att = t.attention.plane(b);
    for (int c = 0; c < ch; ++c) {
      auto src = features[b].plane(c);
      auto dst = t.selected.plane(c);
      for (std::size_t px = 0; px < plane; ++px) dst[px] += att[px] * src[px];
    }
  }

  t.projected = FeatureMap(ch, h, w);
  for (int co = 0; co < ch; ++co) {
    auto dst = t.projected.plane(co);
    for (int ci = 0; ci < ch; ++ci) {
      const double wgt = p.proj_weight[static_cast<std::size_t>(co) * ch + ci];
      auto src = t.selected.plane(ci);
      for (std::size_t px = 0; px < plane; ++px) dst[px] += wgt * src[px];
    }
  }
  return t;
}

// Gradients of the selection w.r.t. its inputs and parameters given
// d loss / d projected.
std::vector<FeatureMap> selection_backward(const FeatureMap& grad_proj, std::span<const FeatureMap> features,
                                           const SelectionTrace& t, const SelectionParams& p,
                                           SelectionParams& grads) {
  const int n_br = p.branches;
  const int ch = p.channels;
  const int h = grad_proj.height();
  const int w = grad_proj.width();
  const std::size_t plane = grad_proj.plane_size();

  grads.branches = n_br;
  grads.channels = ch;
  grads.proj_weight.assign(p.proj_weight.size(), 0.0);
  grads.attn_weight.assign(p.attn_weight.size(), 0.0);
  grads.attn_bias.assign(p.attn_bias.size(), 0.0);

  FeatureMap grad_sel(ch, h, w);
  for (int co = 0; co < ch; ++co) {
    auto gp = grad_proj.plane(co);
    for (int ci = 0; ci < ch; ++ci) {
      auto sel = t.selected.plane(ci);
      auto gs = grad_sel.plane(ci);
      const double wgt = p.proj_weight[static_cast<std::size_t>(co) * ch + ci];
      double acc = 0.0;
      for (std::size_t px = 0; px < plane; ++px) {
        acc += gp[px] * sel[px];
        gs[px] += wgt * gp[px];
      }
      grads.proj_weight[static_cast<std::size_t>(co) * ch + ci] = acc;
    }
  }

  std::vector<FeatureMap> grad_feat;
  grad_feat.reserve(n_br);
  FeatureMap grad_logit(n_br, h, w);
  for (int b = 0; b < n_br; ++b) {
    FeatureMap gf(ch, h, w);
    auto att = t.attention.plane(b);
    auto gl = grad_logit.plane(b);
    for (int c = 0; c < ch; ++c) {
      auto gs = grad_sel.plane(c);
      auto f = features[b].plane(c);
      auto dst = gf.plane(c);
      for (std::size_t px = 0; px < plane; ++px) {
        gl[px] += gs[px] * f[px];
        dst[px] = gs[px] * att[px];
      }
    }
    for (std::size_t px = 0; px < plane; ++px) gl[px] *= att[px] * (1.0 - att[px]);
    grad_feat.push_back(std::move(gf));
  }

  FeatureMap grad_desc(2, h, w);
  for (int b = 0; b < n_br; ++b) {
    double bias_acc = 0.0;
    for (int y = 0; y < h; ++y) {
      for (int x = 0; x < w; ++x) {
        const double g = grad_logit.at(b, y, x);
        bias_acc += g;
        if (g == 0.0) continue;
        for (int m = 0; m < 2; ++m) {
          for (int i = 0; i < kAttentionKernelSize; ++i) {
            const int yy = y + i - kAttnRadius;
            if (yy < 0 || yy >= h) continue;
            for (int j = 0; j < kAttentionKernelSize; ++j) {
              const int xx = x + j - kAttnRadius;
              if (xx < 0 || xx >= w) continue;
              const std::size_t k = attn_index(b, m, i, j);
              grads.attn_weight[k] += g * t.descriptor.at(m, yy, xx);
              grad_desc.at(m, yy, xx) += p.attn_weight[k] * g;
            }
          }
        }
      }
    }
    grads.attn_bias[b] = bias_acc;
  }

  const double inv_count = 1.0 / static_cast<double>(n_br * ch);
  auto g_mean = grad_desc.plane(0);
  auto g_max = grad_desc.plane(1);
  for (int b = 0; b < n_br; ++b) {
    for (int c = 0; c < ch; ++c) {
      auto dst = grad_feat[b].plane(c);
      for (std::size_t px = 0; px < plane; ++px) dst[px] += g_mean[px] * inv_count;
    }
  }
  for (std::size_t px = 0; px < plane; ++px) {
    const int idx = t.argmax[px];
    grad_feat[idx / ch].plane(idx % ch)[px] += g_max[px];
  }
  return grad_feat;
}

}  // namespace

DepthwiseKernel::DepthwiseKernel(int channels_, int ksize_, double fill)
    : channels(channels_), ksize(ksize_),
      weights(static_cast<std::size_t>(channels_) * ksize_ * ksize_, fill) {}

FeatureMap depthwise_conv(const FeatureMap& input, const DepthwiseKernel& kernel, int dilation) {
  if (kernel.channels != input.channels()) {
    throw ShapeError("depthwise kernel has " + std::to_string(kernel.channels) + " channels, input has " +
                     std::to_string(input.channels()));
  }
  if (kernel.ksize < 1 || kernel.ksize % 2 == 0) throw ShapeError("depthwise kernel size must be odd");
  if (kernel.weights.size() != static_cast<std::size_t>(kernel.channels) * kernel.ksize * kernel.ksize) {
    throw ShapeError("depthwise kernel weight array has the wrong size");
  }
  if (dilation < 1) throw ShapeError("dilation must be >= 1");
  FeatureMap out(input.channels(), input.height(), input.width());
  const auto& k = simd::kernels();
  for (int c = 0; c < input.channels(); ++c) {
    k.depthwise_plane(input.plane(c).data(), input.height(), input.width(), kernel.channel(c), kernel.ksize, dilation,
                      out.plane(c).data());
  }
  return out;
}

FeatureMap spatial_kernel_selection(std::span<const FeatureMap> features, const SelectionParams& params) {
  return run_selection(features, params).projected;
}

void LskBlockConfig::validate() const {
  if (channels < 1) throw ConfigError("LSK block channels must be >= 1");
  kernel_spec.validate();
}

LskBlockParams init_lsk_params(const LskBlockConfig& cfg, std::uint64_t seed) {
  cfg.validate();
  std::mt19937_64 rng(seed);
  auto uniform_fill = [&rng](std::vector<double>& v, double fan_in) {
    const double bound = 1.0 / std::sqrt(fan_in);
    std::uniform_real_distribution<double> dist(-bound, bound);
    for (double& x : v) x = dist(rng);
  };

  LskBlockParams p = zero_lsk_params(cfg);
  for (DepthwiseKernel& k : p.stage_kernels) uniform_fill(k.weights, static_cast<double>(k.ksize * k.ksize));
  uniform_fill(p.selection.attn_weight, 2.0 * kAttentionKernelSize * kAttentionKernelSize);
  uniform_fill(p.selection.proj_weight, static_cast<double>(cfg.channels));
  return p;
}

LskBlockParams zero_lsk_params(const LskBlockConfig& cfg) {
  cfg.validate();
  LskBlockParams p;
  for (const KernelStage& s : cfg.kernel_spec.stages) p.stage_kernels.emplace_back(cfg.channels, s.kernel_size);
  const int n = static_cast<int>(cfg.kernel_spec.stages.size());
  p.selection.branches = n;
  p.selection.channels = cfg.channels;
  p.selection.attn_weight.assign(static_cast<std::size_t>(n) * 2 * kAttentionKernelSize * kAttentionKernelSize, 0.0);
  p.selection.attn_bias.assign(n, 0.0);
  p.selection.proj_weight.assign(static_cast<std::size_t>(cfg.channels) * cfg.channels, 0.0);
  return p;
}

void validate_lsk_params(const LskBlockConfig& cfg, const LskBlockParams& params) {
  cfg.validate();
  const auto& stages = cfg.kernel_spec.stages;
  if (params.stage_kernels.size() != stages.size()) throw ShapeError("LSK params: one kernel per stage required");
  for (std::size_t i = 0; i < stages.size(); ++i) {
    const DepthwiseKernel& k = params.stage_kernels[i];
    if (k.channels != cfg.channels || k.ksize != stages[i].kernel_size ||
        k.weights.size() != static_cast<std::size_t>(k.channels) * k.ksize * k.ksize) {
      throw ShapeError("LSK params: stage " + std::to_string(i) + " kernel does not match the config");
    }
  }
  if (params.selection.branches != static_cast<int>(stages.size()) || params.selection.channels != cfg.channels) {
    throw ShapeError("LSK params: selection sized for a different block");
  }
}

FeatureMap lsk_block_forward(const FeatureMap& input, const LskBlockConfig& cfg, const LskBlockParams& params,
                             LskForwardCache* cache) {
  validate_lsk_params(cfg, params);
  if (input.channels() != cfg.channels) {
    throw ShapeError("LSK block expects " + std::to_string(cfg.channels) + " channels, got " +
                     std::to_string(input.channels()));
  }
  validate_feature_map(input, "LSK block input");

  std::vector<FeatureMap> stages;
  stages.reserve(cfg.kernel_spec.stages.size());
  const FeatureMap* prev = &input;
  for (std::size_t s = 0; s < cfg.kernel_spec.stages.size(); ++s) {
    stages.push_back(depthwise_conv(*prev, params.stage_kernels[s], cfg.kernel_spec.stages[s].dilation));
    prev = &stages.back();
  }

  SelectionTrace trace = run_selection(stages, params.selection);

  FeatureMap out(input.channels(), input.height(), input.width());
  activate(cfg.activation, trace.projected.data(), out.data());
  if (cfg.residual) add_into(out, input);

  if (cache) {
    cache->valid = true;
    cache->config = cfg;
    cache->input = input;
    cache->stage_outputs = std::move(stages);
    cache->descriptor = std::move(trace.descriptor);
    cache->argmax = std::move(trace.argmax);
    cache->attention = std::move(trace.attention);
    cache->selected = std::move(trace.selected);
    cache->projected = std::move(trace.projected);
  }
  return out;
}

LskGradients lsk_block_backward(const FeatureMap& upstream, const LskForwardCache& cache,
                                const LskBlockParams& params) {
  if (!cache.valid) throw Error("LSK backward called without a cached forward pass");
  const LskBlockConfig& cfg = cache.config;
  validate_lsk_params(cfg, params);
  if (!upstream.same_shape(cache.input)) throw ShapeError("upstream gradient does not match the block output");

  LskGradients g;
  g.params = zero_lsk_params(cfg);

  FeatureMap grad_proj(upstream.channels(), upstream.height(), upstream.width());
  {
    auto gp = grad_proj.data();
    auto up = upstream.data();
    auto pre = cache.projected.data();
    std::vector<double> deriv(pre.size());
    activate_derivative(cfg.activation, pre, deriv);
    for (std::size_t i = 0; i < gp.size(); ++i) gp[i] = up[i] * deriv[i];
  }

  SelectionTrace trace{cache.descriptor, cache.argmax, cache.attention, cache.selected, cache.projected};
  std::vector<FeatureMap> grad_stage =
      selection_backward(grad_proj, cache.stage_outputs, trace, params.selection, g.params.selection);

  // Walk the depthwise chain backwards; stage s consumed stage s-1 (or the input).
  const auto& spec = cfg.kernel_spec.stages;
  for (std::size_t s = spec.size(); s-- > 0;) {
    const FeatureMap& stage_in = s == 0 ? cache.input : cache.stage_outputs[s - 1];
    g.params.stage_kernels[s] = depthwise_weight_grad(stage_in, grad_stage[s], spec[s].kernel_size, spec[s].dilation);
    FeatureMap back = depthwise_conv(grad_stage[s], flipped(params.stage_kernels[s]), spec[s].dilation);
    if (s == 0) {
      g.input = std::move(back);
    } else {
      add_into(grad_stage[s - 1], back);
    }
  }
  if (cfg.residual) add_into(g.input, upstream);
  return g;
}

FeatureMap avg_pool(const FeatureMap& input, int factor) {
  if (factor < 1) throw ShapeError("downsample factor must be >= 1");
  if (input.height() % factor != 0 || input.width() % factor != 0) {
    throw ShapeError("spatial size " + std::to_string(input.height()) + "x" + std::to_string(input.width()) +
                     " is not divisible by downsample factor " + std::to_string(factor));
  }
  if (factor == 1) return input;
  const int h = input.height() / factor;
  const int w = input.width() / factor;
  const double inv = 1.0 / static_cast<double>(factor * factor);
  FeatureMap out(input.channels(), h, w);
  for (int c = 0; c < input.channels(); ++c) {
    for (int y = 0; y < h; ++y) {
      for (int x = 0; x < w; ++x) {
        double acc = 0.0;
        for (int dy = 0; dy < factor; ++dy) {
          for (int dx = 0; dx < factor; ++dx) acc += input.at(c, y * factor + dy, x * factor + dx);
        }
        out.at(c, y, x) = acc * inv;
      }
    }
  }
  return out;
}

namespace {

FeatureMap avg_pool_backward(const FeatureMap& grad_out, int factor, int in_h, int in_w) {
  if (factor == 1) return grad_out;
  const double inv = 1.0 / static_cast<double>(factor * factor);
  FeatureMap g(grad_out.channels(), in_h, in_w);
  for (int c = 0; c < g.channels(); ++c) {
    for (int y = 0; y < in_h; ++y) {
      for (int x = 0; x < in_w; ++x) g.at(c, y, x) = grad_out.at(c, y / factor, x / factor) * inv;
    }
  }
  return g;
}

}  // namespace

std::vector<FeatureMap> fpn_forward(const FeatureMap& input, std::span<const FpnStage> stages, FpnCache* cache) {
  if (stages.empty()) throw ConfigError("feature pyramid needs at least one stage");
  std::vector<FeatureMap> outputs;
  outputs.reserve(stages.size());
  if (cache) {
    *cache = FpnCache{};
    cache->blocks.resize(stages.size());
  }
  const FeatureMap* cur = &input;
  for (std::size_t s = 0; s < stages.size(); ++s) {
    const FpnStage& st = stages[s];
    if (cur->channels() != st.config.channels) {
      throw ShapeError("pyramid stage " + std::to_string(s) + " expects " + std::to_string(st.config.channels) +
                       " channels, got " + std::to_string(cur->channels()));
    }
    FeatureMap pooled = avg_pool(*cur, st.downsample);
    if (cache) {
      cache->factors.push_back(st.downsample);
      cache->in_heights.push_back(cur->height());
      cache->in_widths.push_back(cur->width());
    }
    outputs.push_back(lsk_block_forward(pooled, st.config, st.params, cache ? &cache->blocks[s] : nullptr));
    if (cache) cache->pooled_inputs.push_back(std::move(pooled));
    cur = &outputs.back();
  }
  if (cache) cache->valid = true;
  return outputs;
}

FpnGradients fpn_backward(std::span<const FeatureMap> upstream, const FpnCache& cache,
                          std::span<const FpnStage> stages) {
  if (!cache.valid) throw Error("pyramid backward called without a cached forward pass");
  if (upstream.size() != stages.size() || cache.blocks.size() != stages.size()) {
    throw ShapeError("pyramid backward needs one upstream gradient per stage");
  }
  FpnGradients g;
  g.stage_params.resize(stages.size());
  FeatureMap carry;
  for (std::size_t s = stages.size(); s-- > 0;) {
    const LskForwardCache& bc = cache.blocks[s];
    FeatureMap grad = upstream[s].empty() ? FeatureMap(bc.input.channels(), bc.input.height(), bc.input.width())
                                          : upstream[s];
    if (!carry.empty()) add_into(grad, carry);
    LskGradients bg = lsk_block_backward(grad, bc, stages[s].params);
    g.stage_params[s] = std::move(bg.params);
    carry = avg_pool_backward(bg.input, cache.factors[s], cache.in_heights[s], cache.in_widths[s]);
  }
  g.input = std::move(carry);
  return g;
}

}  // namespace lskdet
