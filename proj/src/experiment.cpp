#include "moero/experiment.hpp"

#include <spdlog/spdlog.h>

#include <charconv>
#include <cmath>
#include <sstream>

#include "moero/io.hpp"
#include "moero/metrics.hpp"
#include "moero/mri_core.hpp"
#include "moero/recon.hpp"
#include "moero/rng.hpp"
#include "moero/vq.hpp"

namespace moero::experiment {
namespace {

using nlohmann::json;

struct Sample {
  std::string id;
  ComplexImage truth;
  CoilSensitivityMaps sens;
};

struct Row {
  std::string id;
  MaskFamily family = MaskFamily::Uniform;
  int accel = 0;
  std::vector<int> path;
  metrics::MetricReport metrics;
  json detail;
};

std::string join_path(const std::vector<int>& path) {
  std::string s;
  for (std::size_t i = 0; i < path.size(); ++i) {
    if (i) s += '-';
    s += std::to_string(path[i]);
  }
  return s;
}

json resolve(const json& j, const std::filesystem::path& base_dir) {
  if (j.is_string()) return io::read_json(base_dir / j.get<std::string>());
  return j;
}

std::vector<vq::Codebook> train_codebooks(const ExperimentConfig& cfg, const std::vector<Sample>& samples, int n_cascade,
                                          int patch) {
  // features of the fully sampled images of every sample
  RealMatrix pool;
  for (const auto& s : samples) {
    const RealMatrix f = vq::extract_features(s.truth, patch);
    if (pool.cols == 0) pool = RealMatrix(0, f.cols);
    pool.values.insert(pool.values.end(), f.values.begin(), f.values.end());
    pool.rows += f.rows;
  }
  std::vector<vq::Codebook> out;
  for (int t = 0; t < n_cascade; ++t)
    out.push_back(vq::train(pool, cfg.codebook.k, cfg.codebook.decay, cfg.codebook.iterations,
                            sub_seed(cfg.seed, "codebook", std::to_string(t))));
  return out;
}

Row run_sample(const ExperimentConfig& cfg, const Sample& s, int epoch, recon::BranchGrid& grid) {
  const std::string tag = s.id + "/" + std::to_string(epoch);
  Rng pick(sub_seed(cfg.seed, "mask-choice", tag));
  Row row;
  row.id = s.id;
  row.family = cfg.families[static_cast<std::size_t>(pick.uniform_int(0, static_cast<std::int64_t>(cfg.families.size()) - 1))];
  row.accel = cfg.accelerations[static_cast<std::size_t>(pick.uniform_int(0, static_cast<std::int64_t>(cfg.accelerations.size()) - 1))];
  const SamplingMask mask = make_mask(row.family, cfg.height, row.accel, cfg.acs, sub_seed(cfg.seed, "mask", tag));

  ComplexImage truth = s.truth;
  CoilSensitivityMaps sens = s.sens;
  KSpace full;
  json steps = json::array();
  if (cfg.policy) {
    const auto plan = augment::sample_augmentation(*cfg.policy, sub_seed(cfg.seed, "augment", tag));
    for (const auto& a : plan) steps.push_back(io::to_json(a));
    auto aug = augment::apply_augmentations(truth, sens, plan);
    truth = std::move(aug.image);
    sens = std::move(aug.sens);
    full = std::move(aug.kspace);
  } else {
    full = forward(truth, AcquisitionModel(sens, SamplingMask::full(cfg.height)));
  }

  const AcquisitionModel model(sens, mask);
  KSpace y = full;
  for (int c = 0; c < y.coils(); ++c)
    for (int k = 0; k < y.height(); ++k)
      if (!mask.sampled(k))
        for (int x = 0; x < y.width(); ++x) y(c, k, x) = cplx{};

  const ComplexImage zero_filled = sense_combine(y, sens);
  const auto wf0 = recon::image_word_frequency(zero_filled, grid.codebooks.front(), grid.patch);
  const auto res = recon::reconstruct(y, model, grid, wf0, &truth);
  row.path = res.trace.branch_path();
  row.metrics = metrics::evaluate(res.image, truth);
  row.detail = json{{"sample_id", s.id},
                    {"epoch", epoch},
                    {"family", std::string(to_string(row.family))},
                    {"accel", row.accel},
                    {"augmentations", steps},
                    {"zero_filled_nmse", io::number(metrics::nmse(zero_filled, truth))},
                    {"metrics", io::to_json(row.metrics)},
                    {"trace", io::to_json(res.trace)}};
  return row;
}

}  // namespace

std::string format_number(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[64];
  auto [end, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, end);
}

void ExperimentConfig::validate() const {
  if (height < 16 || width < 16) throw ParameterError("experiment images must be at least 16x16");
  if (coils < 1) throw ParameterError("experiment needs at least one coil");
  if (epochs < 1) throw ParameterError("epochs must be >= 1");
  if (families.empty() || accelerations.empty()) throw ParameterError("mask families and accelerations must be non-empty");
  for (int a : accelerations)
    if (a < 2) throw ParameterError("accelerations must be >= 2");
  if (acs < 1 || acs >= height) throw ParameterError("acs must lie in [1, height)");
  if (policy) policy->validate();
  if (!grid.is_object()) throw ParameterError("experiment needs a grid description");
}

ExperimentConfig config_from_json(const json& j, const std::filesystem::path& base_dir) {
  ExperimentConfig c;
  c.base_dir = base_dir;
  try {
    c.seed = j.value("seed", std::uint64_t{0});
    c.height = j.value("height", 64);
    c.width = j.value("width", c.height);
    c.coils = j.value("coils", 8);
    c.epochs = j.value("epochs", 1);
    if (j.contains("samples")) {
      c.samples = j["samples"].get<std::vector<std::string>>();
    } else {
      const int n = j.value("n_samples", 0);
      for (int i = 0; i < n; ++i) c.samples.push_back("sample" + std::to_string(i));
    }
    const json masks = j.value("masks", json::object());
    if (masks.contains("families")) {
      c.families.clear();
      for (const auto& f : masks["families"]) c.families.push_back(parse_mask_family(f.get<std::string>()));
    }
    if (masks.contains("accelerations")) c.accelerations = masks["accelerations"].get<std::vector<int>>();
    c.acs = masks.value("acs", kDefaultAcsLines);
    if (j.contains("policy") && !j["policy"].is_null()) c.policy = io::policy_from_json(resolve(j["policy"], base_dir));
    if (j.contains("grid")) {
      c.grid = resolve(j["grid"], base_dir);
      if (j["grid"].is_string()) c.base_dir = (base_dir / j["grid"].get<std::string>()).parent_path();
    }
    const json cb = j.value("codebook", json::object());
    c.codebook.k = cb.value("K", c.codebook.k);
    c.codebook.decay = cb.value("decay", c.codebook.decay);
    c.codebook.iterations = cb.value("iters", c.codebook.iterations);
    c.independent_routing = j.value("independent_routing", false);
  } catch (const json::exception& e) {
    throw FormatError(std::string("experiment config: ") + e.what());
  }
  c.validate();
  return c;
}

ExperimentConfig load_config(const std::filesystem::path& path) {
  return config_from_json(io::read_json(path), path.parent_path());
}

ExperimentResult run_experiment(const ExperimentConfig& cfg) {
  cfg.validate();
  ExperimentResult result;

  std::vector<Sample> samples;
  for (const auto& id : cfg.samples)
    samples.push_back({id, make_phantom(cfg.height, cfg.width, sub_seed(cfg.seed, "phantom", id)),
                       make_coil_maps(cfg.coils, cfg.height, cfg.width, sub_seed(cfg.seed, "coil-maps", id))});

  const json& gj = cfg.grid;
  std::optional<std::vector<vq::Codebook>> codebooks;
  if (!gj.contains("codebooks")) {
    const int n_cascade = gj.value("n_cascade", recon::kDefaultCascades);
    const int patch = gj.value("patch", vq::kDefaultPatch);
    if (samples.empty()) {
      // nothing to train on; a placeholder codebook keeps grid validation meaningful
      RealMatrix words(cfg.codebook.k, static_cast<std::size_t>(2 * patch * patch));
      for (std::size_t k = 0; k < words.rows; ++k) words(k, 0) = static_cast<double>(k);
      codebooks = std::vector<vq::Codebook>(static_cast<std::size_t>(n_cascade), vq::Codebook(words, cfg.codebook.decay));
    } else {
      codebooks = train_codebooks(cfg, samples, n_cascade, patch);
    }
  }
  recon::BranchGrid grid = io::grid_from_json(gj, cfg.base_dir, std::move(codebooks));

  std::vector<Row> final_rows;
  json epochs = json::array();
  for (int epoch = 1; epoch <= cfg.epochs; ++epoch) {
    std::vector<std::optional<Row>> rows(samples.size());
    std::vector<std::optional<std::string>> errors(samples.size());
    auto attempt = [&](std::size_t i, recon::BranchGrid& g) {
      try {
        rows[i] = run_sample(cfg, samples[i], epoch, g);
      } catch (const std::exception& e) {
        errors[i] = e.what();
      }
    };
    if (cfg.independent_routing) {
      const recon::BranchGrid snapshot = grid;
#pragma omp parallel for schedule(dynamic)
      for (std::ptrdiff_t i = 0; i < static_cast<std::ptrdiff_t>(samples.size()); ++i) {
        recon::BranchGrid local = snapshot;
        attempt(static_cast<std::size_t>(i), local);
      }
    } else {
      for (std::size_t i = 0; i < samples.size(); ++i) attempt(i, grid);
    }

    json epoch_rows = json::array();
    for (std::size_t i = 0; i < samples.size(); ++i) {
      if (errors[i]) {
        spdlog::error("sample {} (epoch {}): {}", samples[i].id, epoch, *errors[i]);
        if (epoch == cfg.epochs) result.failures.push_back({samples[i].id, *errors[i]});
        epoch_rows.push_back(json{{"sample_id", samples[i].id}, {"epoch", epoch}, {"error", *errors[i]}});
        continue;
      }
      epoch_rows.push_back(rows[i]->detail);
      if (epoch == cfg.epochs) final_rows.push_back(std::move(*rows[i]));
    }
    epochs.push_back(std::move(epoch_rows));
    for (auto& n : grid.navs) n.advance_epoch();
  }

  std::ostringstream csv;
  csv << kCsvHeader << '\n';
  for (const auto& r : final_rows)
    csv << r.id << ',' << to_string(r.family) << ',' << r.accel << ',' << join_path(r.path) << ','
        << format_number(r.metrics.nmse) << ',' << format_number(r.metrics.psnr) << ',' << format_number(r.metrics.ssim)
        << '\n';
  result.csv = csv.str();

  json utilization = json::array();
  for (std::size_t t = 0; t < grid.navs.size(); ++t) {
    const auto& n = grid.navs[t];
    utilization.push_back(json{{"cascade", t},
                               {"counts", n.routing_counts()},
                               {"kernel_initialized", n.kernel_initialized()},
                               {"epoch", n.epoch()}});
  }
  json failures = json::array();
  for (const auto& f : result.failures) failures.push_back(json{{"sample_id", f.sample_id}, {"error", f.message}});
  result.report = json{{"seed", cfg.seed},
                       {"height", cfg.height},
                       {"width", cfg.width},
                       {"coils", cfg.coils},
                       {"epochs", epochs},
                       {"routing", utilization},
                       {"failures", failures}};
  return result;
}

}  // namespace moero::experiment
