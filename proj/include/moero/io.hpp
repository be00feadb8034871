#pragma once

// JSON schemas and file persistence shared by the CLI and the experiment driver.

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "moero/augment.hpp"
#include "moero/branch_nav.hpp"
#include "moero/mask.hpp"
#include "moero/metrics.hpp"
#include "moero/recon.hpp"
#include "moero/sampler.hpp"
#include "moero/vq.hpp"

namespace moero::io {

using nlohmann::json;

json read_json(const std::filesystem::path& path);
void write_json(const std::filesystem::path& path, const json& j);
void write_text(const std::filesystem::path& path, const std::string& text);

/// Non-finite values are written as the strings "inf", "-inf" and "nan".
json number(double v);

// Masks are stored as uint8 CTNS [H].
void save_mask(const std::filesystem::path& path, const SamplingMask& m);
SamplingMask load_mask(const std::filesystem::path& path);

// Augmentation policy:
// { "flip_h": p, "flip_v": p, "shift": {"p":p,"max":d}, "rot90": p,
//   "rot": {"p":p,"max_deg":a}, "scale": {"p":p,"min":s0,"max":s1},
//   "elastic": {"p":p,"alpha":a,"sigma":s}, "noise": {"p":p,"level":"light"|"heavy"},
//   "motion": {"p":p} }
augment::AugPolicy policy_from_json(const json& j);
json to_json(const augment::AugPolicy& p);
json to_json(const augment::Augmentation& a);

/// Codebook tensor [K, d] float32 at `path`, sidecar JSON next to it
/// (same stem, ".json"): { "decay", "ema_counts", "K", "d" }.
void save_codebook(const std::filesystem::path& path, const vq::Codebook& cb);
vq::Codebook load_codebook(const std::filesystem::path& path);
std::filesystem::path sidecar_path(const std::filesystem::path& tensor_path);

/// Router snapshot: JSON { "n_branch", "counts", "epoch", "N_buffer", "kmeans_seed",
/// "centers": file name or null } plus a float32 CTNS tensor for the centers.
void save_nav(const std::filesystem::path& json_path, const nav::BranchNavState& s);
nav::BranchNavState load_nav(const std::filesystem::path& json_path);

/// Grid description:
/// { "n_cascade", "n_branch", "eta", "alpha", "patch",
///   "experts": [[{"kind":"gaussian","strength":s,"radius":r} | {"kind":"soft","tau":t}, ...], ...]
///       or a single expert object applied to every cell,
///   "codebooks": [path per cascade] (relative to the grid file),
///   "nav": {"buffer": n, "seed": s} }
/// Pass `codebooks` to supply them directly instead of loading paths.
recon::BranchGrid grid_from_json(const json& j, const std::filesystem::path& base_dir,
                                 std::optional<std::vector<vq::Codebook>> codebooks = std::nullopt);
json to_json(const recon::ExpertSpec& e);
recon::ExpertSpec expert_from_json(const json& j);

json to_json(const recon::ReconTrace& t);
json to_json(const metrics::MetricReport& r);

/// One SampleRecord per line: {"id": ..., "attributes": {...}} or {"id": ..., <category>: <group>, ...}.
std::vector<sampler::SampleRecord> read_manifest(const std::filesystem::path& path);
std::vector<sampler::SampleRecord> parse_manifest(const std::string& text);

}  // namespace moero::io
