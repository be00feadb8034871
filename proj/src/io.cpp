#include "moero/io.hpp"

#include <cmath>
#include <fstream>
#include <sstream>

#include "moero/ctns.hpp"

namespace moero::io {
namespace {

template <class... Ts>
struct overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

double prob(const json& j) { return j.get<double>(); }

// Accepts either a bare probability or an object with "p".
double nested_p(const json& j) { return j.is_object() ? j.value("p", 0.0) : prob(j); }

augment::NoiseLevel parse_level(const std::string& s) {
  if (s == "light") return augment::NoiseLevel::Light;
  if (s == "heavy") return augment::NoiseLevel::Heavy;
  throw ParameterError("noise level must be \"light\" or \"heavy\", got \"" + s + "\"");
}

const char* level_name(augment::NoiseLevel l) { return l == augment::NoiseLevel::Light ? "light" : "heavy"; }

}  // namespace

json read_json(const std::filesystem::path& path) {
  std::ifstream f(path);
  if (!f) throw FormatError("cannot open " + path.string());
  try {
    return json::parse(f);
  } catch (const json::exception& e) {
    throw FormatError(path.string() + ": " + e.what());
  }
}

void write_text(const std::filesystem::path& path, const std::string& text) {
  std::ofstream f(path, std::ios::binary | std::ios::trunc);
  if (!f) throw FormatError("cannot open " + path.string() + " for writing");
  f << text;
}

void write_json(const std::filesystem::path& path, const json& j) { write_text(path, j.dump(2) + "\n"); }

json number(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  return v;
}

void save_mask(const std::filesystem::path& path, const SamplingMask& m) {
  ctns::write(path, ctns::Tensor::from_bytes({static_cast<std::uint32_t>(m.height())}, m.lines));
}

SamplingMask load_mask(const std::filesystem::path& path) {
  const auto t = ctns::read(path);
  if (t.dtype != ctns::DType::UInt8 || t.dims.size() != 1) throw FormatError(path.string() + ": mask must be uint8 [H]");
  SamplingMask m;
  m.lines = t.to_bytes();
  for (auto& v : m.lines) v = v ? 1 : 0;
  const int n = m.sampled_count();
  m.acceleration = n > 0 ? static_cast<int>(std::lround(static_cast<double>(m.height()) / n)) : 1;
  // the longest sampled run through the center is taken as the ACS block
  int lo = m.height() / 2, hi = m.height() / 2;
  if (n > 0 && m.sampled(lo)) {
    while (lo > 0 && m.sampled(lo - 1)) --lo;
    while (hi + 1 < m.height() && m.sampled(hi + 1)) ++hi;
    m.acs_count = hi - lo + 1;
  }
  return m;
}

augment::AugPolicy policy_from_json(const json& j) {
  augment::AugPolicy p;
  try {
    if (j.contains("flip_h")) p.flip_h = nested_p(j["flip_h"]);
    if (j.contains("flip_v")) p.flip_v = nested_p(j["flip_v"]);
    if (j.contains("shift")) {
      p.shift_p = nested_p(j["shift"]);
      if (j["shift"].is_object()) p.shift_max = j["shift"].value("max", p.shift_max);
    }
    if (j.contains("rot90")) p.rot90 = nested_p(j["rot90"]);
    if (j.contains("rot")) {
      p.rot_p = nested_p(j["rot"]);
      if (j["rot"].is_object()) p.rot_max_deg = j["rot"].value("max_deg", p.rot_max_deg);
    }
    if (j.contains("scale")) {
      p.scale_p = nested_p(j["scale"]);
      if (j["scale"].is_object()) {
        p.scale_min = j["scale"].value("min", p.scale_min);
        p.scale_max = j["scale"].value("max", p.scale_max);
      }
    }
    if (j.contains("elastic")) {
      p.elastic_p = nested_p(j["elastic"]);
      if (j["elastic"].is_object()) {
        p.elastic_alpha = j["elastic"].value("alpha", p.elastic_alpha);
        p.elastic_sigma = j["elastic"].value("sigma", p.elastic_sigma);
      }
    }
    if (j.contains("noise")) {
      p.noise_p = nested_p(j["noise"]);
      if (j["noise"].is_object()) p.noise_level = parse_level(j["noise"].value("level", std::string("light")));
    }
    if (j.contains("motion")) p.motion_p = nested_p(j["motion"]);
  } catch (const json::exception& e) {
    throw FormatError(std::string("augmentation policy: ") + e.what());
  }
  p.validate();
  return p;
}

json to_json(const augment::AugPolicy& p) {
  return json{{"flip_h", p.flip_h},
              {"flip_v", p.flip_v},
              {"shift", {{"p", p.shift_p}, {"max", p.shift_max}}},
              {"rot90", p.rot90},
              {"rot", {{"p", p.rot_p}, {"max_deg", p.rot_max_deg}}},
              {"scale", {{"p", p.scale_p}, {"min", p.scale_min}, {"max", p.scale_max}}},
              {"elastic", {{"p", p.elastic_p}, {"alpha", p.elastic_alpha}, {"sigma", p.elastic_sigma}}},
              {"noise", {{"p", p.noise_p}, {"level", level_name(p.noise_level)}}},
              {"motion", {{"p", p.motion_p}}}};
}

json to_json(const augment::Augmentation& a) {
  return std::visit(overloaded{
                        [](const augment::GeoTransform& g) { return json{{"kind", "geo"}, {"op", augment::describe(g)}}; },
                        [](const augment::NoiseStep& n) {
                          return json{{"kind", "noise"}, {"level", level_name(n.level)}, {"seed", n.seed}};
                        },
                        [](const augment::MotionSpec& m) {
                          return json{{"kind", "motion"}, {"phi_odd", m.phi_odd}, {"phi_even", m.phi_even}};
                        },
                    },
                    a);
}

std::filesystem::path sidecar_path(const std::filesystem::path& tensor_path) {
  auto p = tensor_path;
  p.replace_extension(".json");
  return p;
}

void save_codebook(const std::filesystem::path& path, const vq::Codebook& cb) {
  ctns::write(path, ctns::to_tensor(cb.codewords()));
  write_json(sidecar_path(path), json{{"decay", cb.decay()}, {"ema_counts", cb.ema_counts()}, {"K", cb.size()}, {"d", cb.dim()}});
}

vq::Codebook load_codebook(const std::filesystem::path& path) {
  RealMatrix words = ctns::to_matrix(ctns::read(path));
  const json meta = read_json(sidecar_path(path));
  const auto k = meta.at("K").get<std::size_t>(), d = meta.at("d").get<std::size_t>();
  if (k != words.rows || d != words.cols) throw FormatError(path.string() + ": sidecar K/d disagree with the tensor");
  return vq::Codebook(std::move(words), meta.at("ema_counts").get<std::vector<double>>(), meta.at("decay").get<double>());
}

void save_nav(const std::filesystem::path& json_path, const nav::BranchNavState& s) {
  json j{{"n_branch", s.branches()},
         {"counts", s.routing_counts()},
         {"epoch", s.epoch()},
         {"N_buffer", s.buffer_capacity()},
         {"kmeans_seed", s.kmeans_seed()},
         {"centers", nullptr}};
  if (s.centers()) {
    auto centers = json_path;
    centers.replace_filename(json_path.stem().string() + "_centers.ctns");
    ctns::write(centers, ctns::to_tensor(*s.centers()));
    j["centers"] = centers.filename().string();
  }
  write_json(json_path, j);
}

nav::BranchNavState load_nav(const std::filesystem::path& json_path) {
  const json j = read_json(json_path);
  nav::BranchNavState s(j.at("n_branch").get<int>(), j.at("N_buffer").get<std::size_t>(), j.value("kmeans_seed", std::uint64_t{0}));
  std::optional<RealMatrix> centers;
  if (!j.at("centers").is_null())
    centers = ctns::to_matrix(ctns::read(json_path.parent_path() / j.at("centers").get<std::string>()));
  s.restore(j.at("counts").get<std::vector<std::uint64_t>>(), j.at("epoch").get<int>(), std::move(centers));
  return s;
}

recon::ExpertSpec expert_from_json(const json& j) {
  const auto kind = j.at("kind").get<std::string>();
  recon::ExpertSpec e;
  if (kind == "gaussian" || kind == "GaussianSmooth")
    e = recon::GaussianSmooth{j.value("strength", 0.5), j.value("radius", 1)};
  else if (kind == "soft" || kind == "SoftThreshold")
    e = recon::SoftThreshold{j.value("tau", 0.0)};
  else
    throw ParameterError("unknown expert kind '" + kind + "'");
  recon::validate(e);
  return e;
}

json to_json(const recon::ExpertSpec& e) {
  return std::visit(overloaded{
                        [](const recon::GaussianSmooth& g) {
                          return json{{"kind", "gaussian"}, {"strength", g.strength}, {"radius", g.radius}};
                        },
                        [](const recon::SoftThreshold& s) { return json{{"kind", "soft"}, {"tau", s.tau}}; },
                    },
                    e);
}

recon::BranchGrid grid_from_json(const json& j, const std::filesystem::path& base_dir,
                                 std::optional<std::vector<vq::Codebook>> codebooks) {
  recon::BranchGrid g;
  try {
    g.n_cascade = j.value("n_cascade", recon::kDefaultCascades);
    g.n_branch = j.value("n_branch", 1);
    g.eta = j.value("eta", recon::kDefaultEta);
    g.alpha = j.value("alpha", 0.0);
    g.patch = j.value("patch", vq::kDefaultPatch);
    if (g.n_cascade < 1 || g.n_branch < 1) throw ParameterError("grid needs n_cascade >= 1 and n_branch >= 1");

    const json& ex = j.at("experts");
    if (ex.is_object()) {
      g.experts.assign(static_cast<std::size_t>(g.n_cascade),
                       std::vector<recon::ExpertSpec>(static_cast<std::size_t>(g.n_branch), expert_from_json(ex)));
    } else {
      for (const auto& row : ex) {
        std::vector<recon::ExpertSpec> r;
        for (const auto& cell : row) r.push_back(expert_from_json(cell));
        g.experts.push_back(std::move(r));
      }
    }

    if (codebooks) {
      g.codebooks = std::move(*codebooks);
    } else {
      for (const auto& p : j.at("codebooks")) g.codebooks.push_back(load_codebook(base_dir / p.get<std::string>()));
    }

    const json nav = j.value("nav", json::object());
    const auto buffer = nav.value("buffer", nav::kDefaultBufferSize);
    const auto seed = nav.value("seed", std::uint64_t{0});
    for (int t = 0; t < g.n_cascade; ++t) g.navs.emplace_back(g.n_branch, buffer, seed + static_cast<std::uint64_t>(t));
  } catch (const json::exception& e) {
    throw FormatError(std::string("grid description: ") + e.what());
  }
  g.validate();
  return g;
}

json to_json(const recon::ReconTrace& t) {
  json cascades = json::array();
  for (std::size_t i = 0; i < t.cascades.size(); ++i) {
    const auto& c = t.cascades[i];
    json e{{"cascade", i},
           {"branch", c.branch},
           {"reason", nav::to_string(c.reason)},
           {"kernel_branch", c.kernel_branch ? json(*c.kernel_branch) : json(nullptr)},
           {"residual", number(c.residual)},
           {"word_frequency", std::vector<double>(c.wf.values().begin(), c.wf.values().end())}};
    e["nmse"] = c.nmse ? number(*c.nmse) : json(nullptr);
    cascades.push_back(std::move(e));
  }
  json j{{"initial_residual", number(t.initial_residual)}, {"branch_path", t.branch_path()}, {"cascades", cascades}};
  j["initial_nmse"] = t.initial_nmse ? number(*t.initial_nmse) : json(nullptr);
  return j;
}

json to_json(const metrics::MetricReport& r) {
  return json{{"ssim", number(r.ssim)}, {"psnr", number(r.psnr)}, {"nmse", number(r.nmse)}};
}

std::vector<sampler::SampleRecord> parse_manifest(const std::string& text) {
  std::vector<sampler::SampleRecord> out;
  std::istringstream in(text);
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    json j;
    try {
      j = json::parse(line);
    } catch (const json::exception& e) {
      throw FormatError("manifest line " + std::to_string(lineno) + ": " + e.what());
    }
    sampler::SampleRecord r;
    if (!j.contains("id")) throw FormatError("manifest line " + std::to_string(lineno) + ": missing \"id\"");
    r.id = j["id"].is_string() ? j["id"].get<std::string>() : j["id"].dump();
    const json& attrs = j.contains("attributes") ? j["attributes"] : j;
    for (const auto& [key, value] : attrs.items()) {
      if (&attrs == &j && key == "id") continue;
      r.attributes[key] = value.is_string() ? value.get<std::string>() : value.dump();
    }
    out.push_back(std::move(r));
  }
  return out;
}

std::vector<sampler::SampleRecord> read_manifest(const std::filesystem::path& path) {
  std::ifstream f(path);
  if (!f) throw FormatError("cannot open " + path.string());
  std::stringstream ss;
  ss << f.rdbuf();
  return parse_manifest(ss.str());
}

}  // namespace moero::io
