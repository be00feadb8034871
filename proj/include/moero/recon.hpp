#pragma once

#include <optional>
#include <variant>
#include <vector>

#include "moero/branch_nav.hpp"
#include "moero/mri_core.hpp"
#include "moero/vq.hpp"

namespace moero::recon {

inline constexpr int kDefaultCascades = 12;
inline constexpr double kDefaultEta = 0.5;

/// (1 - strength) x + strength * blur(x), separable binomial kernel of the
/// given radius with periodic boundaries.
struct GaussianSmooth {
  double strength = 0.5;
  int radius = 1;
};

/// Complex soft threshold on the magnitude, phase preserved.
struct SoftThreshold {
  double tau = 0.0;
};

using ExpertSpec = std::variant<GaussianSmooth, SoftThreshold>;

void validate(const ExpertSpec& e);
ComplexImage apply_expert(const ComplexImage& x, const ExpertSpec& spec);

/// Normalized binomial weights C(2r, i) / 4^r, i = 0..2r.
std::vector<double> binomial_kernel(int radius);

/// x - eta * A^H (A x - y).
ComplexImage dc_step(const ComplexImage& x, const KSpace& y, const AcquisitionModel& model, double eta);

/// ||A x - y||_2.
double dc_residual(const ComplexImage& x, const KSpace& y, const AcquisitionModel& model);

/// n_cascade x n_branch experts, one shared codebook per cascade and one
/// router per cascade. Experts in a cascade share that cascade's codebook.
struct BranchGrid {
  int n_cascade = kDefaultCascades;
  int n_branch = 1;
  std::vector<std::vector<ExpertSpec>> experts;  ///< [cascade][branch]
  std::vector<vq::Codebook> codebooks;           ///< [cascade]
  std::vector<nav::BranchNavState> navs;         ///< [cascade], routes into that cascade
  double eta = kDefaultEta;
  double alpha = 0.0;  ///< prompt fusion weight
  int patch = vq::kDefaultPatch;
  bool observe_routing = true;  ///< feed word frequencies to the routers' buffers

  void validate() const;
};

/// Grid with the same expert in every cell and fresh routers.
BranchGrid make_grid(int n_cascade, int n_branch, const ExpertSpec& expert, std::vector<vq::Codebook> codebooks,
                     std::size_t nav_buffer = nav::kDefaultBufferSize, std::uint64_t nav_seed = 0);

struct CascadeOutput {
  ComplexImage image;
  vq::WordFrequency wf;
};

/// dc_step -> expert -> quantize with the cascade codebook -> prompt fuse.
CascadeOutput run_cascade(const ComplexImage& x, const KSpace& y, const AcquisitionModel& model, const BranchGrid& grid,
                          int cascade, int branch);

struct CascadeTrace {
  int branch = 0;
  nav::RouteReason reason = nav::RouteReason::Uninitialized;
  std::optional<int> kernel_branch;
  double residual = 0.0;
  std::optional<double> nmse;
  vq::WordFrequency wf;
};

struct ReconTrace {
  double initial_residual = 0.0;
  std::optional<double> initial_nmse;
  std::vector<CascadeTrace> cascades;

  std::vector<int> branch_path() const;
};

struct ReconResult {
  ComplexImage image;
  ReconTrace trace;
};

/// Word frequency of an image under a codebook (stands in for the router
/// input of the first cascade).
vq::WordFrequency image_word_frequency(const ComplexImage& x, const vq::Codebook& cb, int patch);

/// Unrolled reconstruction from the zero-filled SENSE image; each cascade is
/// routed by the previous cascade's word frequency (wf0 for the first).
/// Routers in `grid` are updated.
ReconResult reconstruct(const KSpace& y, const AcquisitionModel& model, BranchGrid& grid, const vq::WordFrequency& wf0,
                        const ComplexImage* ground_truth = nullptr);

}  // namespace moero::recon
