#include "moero/recon.hpp"

#include <cmath>
#include <string>

#include "moero/metrics.hpp"

namespace moero::recon {
namespace {

int wrap(int i, int n) { return ((i % n) + n) % n; }

// Separable periodic convolution with a symmetric kernel; rows then columns.
ComplexImage blur(const ComplexImage& x, const std::vector<double>& k) {
  const int h = x.height(), w = x.width(), r = static_cast<int>(k.size() / 2);
  ComplexImage tmp(h, w), out(h, w);
#pragma omp parallel for schedule(static)
  for (int y = 0; y < h; ++y)
    for (int xi = 0; xi < w; ++xi) {
      cplx acc{};
      for (int i = -r; i <= r; ++i) acc += k[static_cast<std::size_t>(i + r)] * x(y, wrap(xi + i, w));
      tmp(y, xi) = acc;
    }
#pragma omp parallel for schedule(static)
  for (int y = 0; y < h; ++y)
    for (int xi = 0; xi < w; ++xi) {
      cplx acc{};
      for (int i = -r; i <= r; ++i) acc += k[static_cast<std::size_t>(i + r)] * tmp(wrap(y + i, h), xi);
      out(y, xi) = acc;
    }
  return out;
}

template <class... Ts>
struct overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

}  // namespace

std::vector<double> binomial_kernel(int radius) {
  if (radius < 0) throw ParameterError("kernel radius must be >= 0");
  const int n = 2 * radius;
  std::vector<double> k(static_cast<std::size_t>(n + 1));
  double c = 1.0;
  for (int i = 0; i <= n; ++i) {
    k[static_cast<std::size_t>(i)] = c;
    c = c * (n - i) / (i + 1);
  }
  const double scale = std::ldexp(1.0, -n);
  for (auto& v : k) v *= scale;
  return k;
}

void validate(const ExpertSpec& e) {
  std::visit(overloaded{
                 [](const GaussianSmooth& g) {
                   if (!(g.strength >= 0.0 && g.strength <= 1.0)) throw ParameterError("smoothing strength must lie in [0, 1]");
                   if (g.radius < 0) throw ParameterError("smoothing radius must be >= 0");
                 },
                 [](const SoftThreshold& s) {
                   if (!(s.tau >= 0.0)) throw ParameterError("soft threshold must be >= 0");
                 },
             },
             e);
}

ComplexImage apply_expert(const ComplexImage& x, const ExpertSpec& spec) {
  validate(spec);
  return std::visit(overloaded{
                        [&](const GaussianSmooth& g) {
                          if (g.strength == 0.0) return x;
                          const ComplexImage b = blur(x, binomial_kernel(g.radius));
                          ComplexImage out(x.height(), x.width());
                          auto o = out.data();
                          const auto xs = x.data(), bs = b.data();
                          for (std::size_t p = 0; p < o.size(); ++p) o[p] = (1.0 - g.strength) * xs[p] + g.strength * bs[p];
                          return out;
                        },
                        [&](const SoftThreshold& s) {
                          if (s.tau == 0.0) return x;
                          ComplexImage out = x;
                          for (auto& v : out.data()) {
                            const double mag = std::abs(v);
                            v *= std::max(mag - s.tau, 0.0) / std::max(mag, 1e-12);
                          }
                          return out;
                        },
                    },
                    spec);
}

ComplexImage dc_step(const ComplexImage& x, const KSpace& y, const AcquisitionModel& model, double eta) {
  if (!(eta > 0.0)) {
    if (eta == 0.0) return x;
    throw ParameterError("data-consistency step size must be > 0");
  }
  KSpace r = forward(x, model);
  if (!r.same_shape(y)) throw DimensionError("measured k-space does not match the acquisition model");
  auto rd = r.data();
  const auto yd = y.data();
  for (std::size_t i = 0; i < rd.size(); ++i) rd[i] -= yd[i];
  const ComplexImage g = adjoint(r, model);
  ComplexImage out = x;
  auto o = out.data();
  const auto gd = g.data();
  for (std::size_t p = 0; p < o.size(); ++p) o[p] -= eta * gd[p];
  return out;
}

double dc_residual(const ComplexImage& x, const KSpace& y, const AcquisitionModel& model) {
  KSpace r = forward(x, model);
  if (!r.same_shape(y)) throw DimensionError("measured k-space does not match the acquisition model");
  double acc = 0.0;
  // only sampled lines of y count, matching the masked forward operator
  for (int c = 0; c < y.coils(); ++c)
    for (int k = 0; k < y.height(); ++k) {
      if (!model.mask.sampled(k)) continue;
      for (int w = 0; w < y.width(); ++w) acc += std::norm(r(c, k, w) - y(c, k, w));
    }
  return std::sqrt(acc);
}

void BranchGrid::validate() const {
  if (n_cascade < 1 || n_branch < 1) throw ParameterError("grid needs at least one cascade and one branch");
  if (experts.size() != static_cast<std::size_t>(n_cascade)) throw DimensionError("expert rows must equal n_cascade");
  for (const auto& row : experts) {
    if (row.size() != static_cast<std::size_t>(n_branch)) throw DimensionError("expert columns must equal n_branch");
    for (const auto& e : row) recon::validate(e);
  }
  if (codebooks.size() != static_cast<std::size_t>(n_cascade)) throw DimensionError("one codebook per cascade required");
  if (navs.size() != static_cast<std::size_t>(n_cascade)) throw DimensionError("one router per cascade required");
  for (const auto& n : navs)
    if (n.branches() != n_branch) throw DimensionError("router branch count differs from grid");
  if (!(eta >= 0.0)) throw ParameterError("eta must be >= 0");
  if (!(alpha >= 0.0 && alpha <= 1.0)) throw ParameterError("alpha must lie in [0, 1]");
  if (patch < 1) throw ParameterError("patch must be >= 1");
  for (const auto& cb : codebooks)
    if (cb.dim() != static_cast<std::size_t>(2 * patch * patch)) throw DimensionError("codeword dimension must equal 2 * patch^2");
}

BranchGrid make_grid(int n_cascade, int n_branch, const ExpertSpec& expert, std::vector<vq::Codebook> codebooks,
                     std::size_t nav_buffer, std::uint64_t nav_seed) {
  BranchGrid g;
  g.n_cascade = n_cascade;
  g.n_branch = n_branch;
  g.experts.assign(static_cast<std::size_t>(n_cascade), std::vector<ExpertSpec>(static_cast<std::size_t>(n_branch), expert));
  g.codebooks = std::move(codebooks);
  for (int t = 0; t < n_cascade; ++t) g.navs.emplace_back(n_branch, nav_buffer, nav_seed + static_cast<std::uint64_t>(t));
  if (!g.codebooks.empty()) g.patch = static_cast<int>(std::lround(std::sqrt(g.codebooks.front().dim() / 2.0)));
  return g;
}

CascadeOutput run_cascade(const ComplexImage& x, const KSpace& y, const AcquisitionModel& model, const BranchGrid& grid,
                          int cascade, int branch) {
  if (cascade < 0 || cascade >= grid.n_cascade) throw std::out_of_range("cascade index out of range");
  if (branch < 0 || branch >= grid.n_branch) throw std::out_of_range("branch index out of range");
  const auto& cb = grid.codebooks[static_cast<std::size_t>(cascade)];
  const ComplexImage consistent = dc_step(x, y, model, grid.eta);
  const ComplexImage denoised =
      apply_expert(consistent, grid.experts[static_cast<std::size_t>(cascade)][static_cast<std::size_t>(branch)]);
  const RealMatrix features = vq::extract_features(denoised, grid.patch);
  const vq::Quantized q = vq::quantize(features, cb);
  ComplexImage fused = vq::prompt_fuse(denoised, q.values, grid.patch, grid.alpha);
  return {std::move(fused), vq::word_frequency(q.indices, cb.size(), features.rows)};
}

std::vector<int> ReconTrace::branch_path() const {
  std::vector<int> out;
  for (const auto& c : cascades) out.push_back(c.branch);
  return out;
}

vq::WordFrequency image_word_frequency(const ComplexImage& x, const vq::Codebook& cb, int patch) {
  const RealMatrix f = vq::extract_features(x, patch);
  const auto q = vq::quantize(f, cb);
  return vq::word_frequency(q.indices, cb.size(), f.rows);
}

ReconResult reconstruct(const KSpace& y, const AcquisitionModel& model, BranchGrid& grid, const vq::WordFrequency& wf0,
                        const ComplexImage* ground_truth) {
  grid.validate();
  if (!y.same_shape(model.sens)) throw DimensionError("k-space does not match the acquisition model");
  ReconResult res{sense_combine(y, model.sens), {}};
  res.trace.initial_residual = dc_residual(res.image, y, model);
  if (ground_truth) res.trace.initial_nmse = metrics::nmse(res.image, *ground_truth);

  vq::WordFrequency wf = wf0;
  for (int t = 0; t < grid.n_cascade; ++t) {
    auto& router = grid.navs[static_cast<std::size_t>(t)];
    if (grid.observe_routing) router.observe(wf);
    const nav::RouteDecision d = router.route(wf);
    CascadeOutput out = run_cascade(res.image, y, model, grid, t, d.branch);
    res.image = std::move(out.image);
    CascadeTrace ct;
    ct.branch = d.branch;
    ct.reason = d.reason;
    ct.kernel_branch = d.kernel_branch;
    ct.residual = dc_residual(res.image, y, model);
    if (ground_truth) ct.nmse = metrics::nmse(res.image, *ground_truth);
    ct.wf = out.wf;
    res.trace.cascades.push_back(std::move(ct));
    wf = std::move(out.wf);
  }
  return res;
}

}  // namespace moero::recon
