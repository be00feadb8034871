#include <spdlog/spdlog.h>

#include <CLI11.hpp>
#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <iostream>
#include <map>
#include <sstream>

#include "moero/ctns.hpp"
#include "moero/experiment.hpp"
#include "moero/io.hpp"
#include "moero/mri_core.hpp"
#include "moero/rng.hpp"

namespace fs = std::filesystem;
using namespace moero;
using nlohmann::json;

namespace {

struct Globals {
  std::uint64_t seed = 0;
  fs::path out_dir = ".";
  std::string log_level = "info";
};

Globals g;

// Outputs are placed under --out-dir unless given as absolute paths.
fs::path out_path(const fs::path& p) {
  if (p.is_absolute()) return p;
  fs::create_directories(g.out_dir);
  return g.out_dir / p;
}

void set_log_level(const std::string& name) {
  const auto lvl = spdlog::level::from_str(name);
  if (lvl == spdlog::level::off && name != "off") throw ParameterError("unknown log level '" + name + "'");
  spdlog::set_level(lvl);
}

std::vector<std::string> split_csv(const std::string& s) {
  std::vector<std::string> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ','))
    if (!item.empty()) out.push_back(item);
  return out;
}

KSpace masked(KSpace y, const SamplingMask& mask) {
  for (int c = 0; c < y.coils(); ++c)
    for (int k = 0; k < y.height(); ++k)
      if (!mask.sampled(k))
        for (int x = 0; x < y.width(); ++x) y(c, k, x) = cplx{};
  return y;
}

struct PhantomOpts {
  int height = 64, width = 64;
  fs::path out = "phantom.ctns";
};

struct CoilOpts {
  int coils = 8, height = 64, width = 64;
  fs::path out = "sens.ctns";
};

struct MaskOpts {
  std::string family = "uniform";
  int height = 64, accel = 4, acs = kDefaultAcsLines;
  bool strict = false;
  fs::path out = "mask.ctns";
};

struct AugmentOpts {
  fs::path in, sens, policy, out = "y_aug.ctns", sens_out, image_out, log;
};

struct CodebookOpts {
  std::vector<fs::path> images;
  std::size_t k = 16;
  double decay = 0.99;
  int iters = 10, patch = vq::kDefaultPatch;
  fs::path out = "codebook.ctns";
};

struct NavOpts {
  int branches = 2, epochs = 2;
  std::size_t buffer = nav::kDefaultBufferSize;
  fs::path stream, out = "branchnav.json", state_out;
};

struct ReconOpts {
  fs::path y, sens, mask, grid, trace = "trace.json", out = "xhat.ctns", ref, nav_dir;
};

struct MetricOpts {
  fs::path ref, test, out = "metrics.json";
};

struct SamplerOpts {
  fs::path manifest, out = "draws.json";
  std::string categories;
  bool compound = false;
  int epochs = 1;
};

struct ExperimentOpts {
  fs::path config, csv = "results.csv", report = "report.json";
  bool independent = false;
};

int cmd_phantom(const PhantomOpts& o) {
  ctns::write(out_path(o.out), ctns::to_tensor(make_phantom(o.height, o.width, g.seed)));
  return 0;
}

int cmd_coilmaps(const CoilOpts& o) {
  ctns::write(out_path(o.out), ctns::to_tensor(make_coil_maps(o.coils, o.height, o.width, g.seed)));
  return 0;
}

int cmd_maskgen(const MaskOpts& o) {
  const auto m = make_mask(parse_mask_family(o.family), o.height, o.accel, o.acs, g.seed, o.strict);
  io::save_mask(out_path(o.out), m);
  spdlog::info("{} mask: {} of {} lines sampled", o.family, m.sampled_count(), m.height());
  return 0;
}

int cmd_augment(const AugmentOpts& o) {
  // --in is either an image [H, W] or fully sampled k-space [C, H, W]
  const auto in = ctns::read(o.in);
  const CoilSensitivityMaps sens = ctns::to_maps(ctns::read(o.sens));
  const ComplexImage x = in.dims.size() == 2 ? ctns::to_image(in) : sense_combine(ctns::to_kspace(in), sens);
  const auto policy = io::policy_from_json(io::read_json(o.policy));
  const auto plan = augment::sample_augmentation(policy, g.seed);
  const auto res = augment::apply_augmentations(x, sens, plan);
  ctns::write(out_path(o.out), ctns::to_tensor(res.kspace));
  if (!o.sens_out.empty()) ctns::write(out_path(o.sens_out), ctns::to_tensor(res.sens));
  if (!o.image_out.empty()) ctns::write(out_path(o.image_out), ctns::to_tensor(res.image));
  json steps = json::array();
  for (const auto& a : plan) steps.push_back(io::to_json(a));
  if (!o.log.empty()) io::write_json(out_path(o.log), json{{"seed", g.seed}, {"augmentations", steps}});
  spdlog::info("applied {} augmentations", plan.size());
  return 0;
}

int cmd_codebook(const CodebookOpts& o) {
  RealMatrix pool;
  for (const auto& p : o.images) {
    const RealMatrix f = vq::extract_features(ctns::to_image(ctns::read(p)), o.patch);
    if (pool.cols == 0) pool = RealMatrix(0, f.cols);
    if (f.cols != pool.cols) throw DimensionError(p.string() + ": feature width differs from earlier images");
    pool.values.insert(pool.values.end(), f.values.begin(), f.values.end());
    pool.rows += f.rows;
  }
  const auto cb = vq::train(pool, o.k, o.decay, o.iters, sub_seed(g.seed, "codebook"));
  io::save_codebook(out_path(o.out), cb);
  const auto loss = vq::vq_loss(pool, cb);
  spdlog::info("codebook K={} d={} trained on {} features, mean gap {}", cb.size(), cb.dim(), pool.rows,
               loss.codebook_loss);
  return 0;
}

int cmd_branchnav(const NavOpts& o) {
  RealMatrix stream;
  if (o.stream.extension() == ".json") {
    const auto rows = io::read_json(o.stream).get<std::vector<std::vector<double>>>();
    if (rows.empty()) throw FormatError("empty word-frequency stream");
    stream = RealMatrix(rows.size(), rows.front().size());
    for (std::size_t i = 0; i < rows.size(); ++i) {
      if (rows[i].size() != stream.cols) throw DimensionError("stream rows differ in length");
      std::copy(rows[i].begin(), rows[i].end(), stream.row(i).begin());
    }
  } else {
    stream = ctns::to_matrix(ctns::read(o.stream));
  }
  nav::BranchNavState state(o.branches, o.buffer, sub_seed(g.seed, "kmeans"));
  json log = json::array();
  for (int e = 1; e <= o.epochs; ++e) {
    for (std::size_t i = 0; i < stream.rows; ++i) {
      const auto row = stream.row(i);
      const vq::WordFrequency wf(std::vector<double>(row.begin(), row.end()));
      state.observe(wf);
      const auto d = state.route(wf);
      json entry{{"epoch", e}, {"index", i}, {"branch", d.branch}, {"reason", nav::to_string(d.reason)}};
      entry["kernel_branch"] = d.kernel_branch ? json(*d.kernel_branch) : json(nullptr);
      log.push_back(std::move(entry));
    }
    if (e < o.epochs) state.advance_epoch();
  }
  const auto& counts = state.routing_counts();
  std::uint64_t total = 0;
  for (auto c : counts) total += c;
  json util = json::array();
  for (std::size_t b = 0; b < counts.size(); ++b)
    util.push_back(json{{"branch", b}, {"count", counts[b]},
                        {"fraction", total ? static_cast<double>(counts[b]) / static_cast<double>(total) : 0.0}});
  io::write_json(out_path(o.out), json{{"n_branch", o.branches},
                                       {"epochs", o.epochs},
                                       {"kernel_initialized", state.kernel_initialized()},
                                       {"degenerate_kernel", state.degenerate_kernel()},
                                       {"utilization", util},
                                       {"assignments", log}});
  if (!o.state_out.empty()) io::save_nav(out_path(o.state_out), state);
  return 0;
}

int cmd_recon(const ReconOpts& o) {
  const CoilSensitivityMaps sens = ctns::to_maps(ctns::read(o.sens));
  const SamplingMask mask = io::load_mask(o.mask);
  const AcquisitionModel model(sens, mask);
  const KSpace y = masked(ctns::to_kspace(ctns::read(o.y)), mask);
  auto grid = io::grid_from_json(io::read_json(o.grid), o.grid.parent_path());
  if (!o.nav_dir.empty())
    for (int t = 0; t < grid.n_cascade; ++t) {
      const auto p = o.nav_dir / ("nav_" + std::to_string(t) + ".json");
      if (fs::exists(p)) grid.navs[static_cast<std::size_t>(t)] = io::load_nav(p);
    }
  std::optional<ComplexImage> ref;
  if (!o.ref.empty()) ref = ctns::to_image(ctns::read(o.ref));
  const auto wf0 = recon::image_word_frequency(sense_combine(y, sens), grid.codebooks.front(), grid.patch);
  const auto res = recon::reconstruct(y, model, grid, wf0, ref ? &*ref : nullptr);
  ctns::write(out_path(o.out), ctns::to_tensor(res.image));
  json trace = io::to_json(res.trace);
  if (ref) trace["metrics"] = io::to_json(metrics::evaluate(res.image, *ref));
  io::write_json(out_path(o.trace), trace);
  if (!o.nav_dir.empty()) {
    fs::create_directories(o.nav_dir);
    for (int t = 0; t < grid.n_cascade; ++t)
      io::save_nav(o.nav_dir / ("nav_" + std::to_string(t) + ".json"), grid.navs[static_cast<std::size_t>(t)]);
  }
  return 0;
}

int cmd_metrics(const MetricOpts& o) {
  const auto ref = ctns::to_image(ctns::read(o.ref));
  const auto test = ctns::to_image(ctns::read(o.test));
  const json j = io::to_json(metrics::evaluate(test, ref));
  io::write_json(out_path(o.out), j);
  std::cout << j.dump() << '\n';
  return 0;
}

int cmd_sampler(const SamplerOpts& o) {
  const auto records = io::read_manifest(o.manifest);
  const auto categories = split_csv(o.categories);
  json epochs = json::array();
  sampler::WeightTable weights;
  for (int e = 1; e <= o.epochs; ++e) {
    sampler::UpdateStats stats;
    weights = sampler::update_weights(records, categories, o.compound ? weights : sampler::WeightTable{}, &stats);
    const auto draws = sampler::draws_from_weights(weights, sub_seed(g.seed, "sampler", std::to_string(e)));
    json masses = json::object();
    for (const auto& c : categories) masses[c] = sampler::group_mass(records, weights, c);
    epochs.push_back(json{{"epoch", e}, {"weights", weights}, {"draws", draws}, {"group_mass", masses},
                          {"clamped", stats.clamped}});
  }
  io::write_json(out_path(o.out), json{{"seed", g.seed}, {"categories", categories}, {"compound", o.compound},
                                       {"epochs", epochs}});
  return 0;
}

int cmd_experiment(const ExperimentOpts& o) {
  auto cfg = experiment::load_config(o.config);
  if (o.independent) cfg.independent_routing = true;
  const auto res = experiment::run_experiment(cfg);
  io::write_text(out_path(o.csv), res.csv);
  io::write_json(out_path(o.report), res.report);
  if (!res.failures.empty()) {
    std::cerr << "failed samples:";
    for (const auto& f : res.failures) std::cerr << ' ' << f.sample_id;
    std::cerr << '\n';
    return 1;
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"moero: multi-coil MRI augmentation, VQ prompts and routed unrolled reconstruction"};
  app.fallthrough();
  app.require_subcommand(1);
  app.add_option("--seed", g.seed, "master seed");
  app.add_option("--out-dir", g.out_dir, "directory for relative output paths");
  app.add_option("--log-level", g.log_level, "trace, debug, info, warn, error, off");

  PhantomOpts po;
  auto* phantom = app.add_subcommand("phantom", "seeded ellipse phantom");
  phantom->add_option("--height", po.height);
  phantom->add_option("--width", po.width);
  phantom->add_option("--out", po.out);

  CoilOpts co;
  auto* coil = app.add_subcommand("coilmaps", "normalized Gaussian coil sensitivities");
  coil->add_option("--coils", co.coils);
  coil->add_option("--height", co.height);
  coil->add_option("--width", co.width);
  coil->add_option("--out", co.out);

  MaskOpts mo;
  auto* mask = app.add_subcommand("maskgen", "phase-encode line mask");
  mask->add_option("--family", mo.family, "uniform, kt-gaussian, kt-radial");
  mask->add_option("--height", mo.height);
  mask->add_option("--accel", mo.accel);
  mask->add_option("--acs", mo.acs);
  mask->add_flag("--strict", mo.strict, "only accept the training acceleration set");
  mask->add_option("--out", mo.out);

  AugmentOpts ao;
  auto* aug = app.add_subcommand("augment", "augment fully sampled k-space");
  aug->add_option("--in", ao.in, "image [H, W] or full k-space [C, H, W]")->required()->check(CLI::ExistingFile);
  aug->add_option("--sens", ao.sens)->required()->check(CLI::ExistingFile);
  aug->add_option("--policy", ao.policy)->required()->check(CLI::ExistingFile);
  aug->add_option("--out", ao.out);
  aug->add_option("--sens-out", ao.sens_out, "transformed coil maps");
  aug->add_option("--image-out", ao.image_out, "transformed image");
  aug->add_option("--log", ao.log, "JSON list of the applied augmentations");

  CodebookOpts cbo;
  auto* cbt = app.add_subcommand("codebook-train", "k-means++ and EMA codebook training on image patches");
  cbt->add_option("--images", cbo.images)->required()->check(CLI::ExistingFile);
  cbt->add_option("--K", cbo.k);
  cbt->add_option("--decay", cbo.decay);
  cbt->add_option("--iters", cbo.iters);
  cbt->add_option("--patch", cbo.patch);
  cbt->add_option("--out", cbo.out);

  NavOpts no;
  auto* bn = app.add_subcommand("branchnav", "router tools");
  bn->require_subcommand(1);
  auto* sim = bn->add_subcommand("simulate", "replay a word-frequency stream [N, K] (CTNS or JSON rows) through a router");
  sim->add_option("--branches", no.branches);
  sim->add_option("--stream", no.stream)->required()->check(CLI::ExistingFile);
  sim->add_option("--epochs", no.epochs, "times the stream is replayed");
  sim->add_option("--buffer", no.buffer);
  sim->add_option("--out", no.out);
  sim->add_option("--state-out", no.state_out, "persist the final router state");

  ReconOpts ro;
  auto* rec = app.add_subcommand("recon", "routed unrolled reconstruction");
  rec->add_option("--y", ro.y)->required()->check(CLI::ExistingFile);
  rec->add_option("--sens", ro.sens)->required()->check(CLI::ExistingFile);
  rec->add_option("--mask", ro.mask)->required()->check(CLI::ExistingFile);
  rec->add_option("--grid", ro.grid)->required()->check(CLI::ExistingFile);
  rec->add_option("--trace", ro.trace);
  rec->add_option("--out", ro.out);
  rec->add_option("--ref", ro.ref, "ground truth for per-cascade NMSE")->check(CLI::ExistingFile);
  rec->add_option("--nav-dir", ro.nav_dir, "load and save router states nav_<t>.json");

  MetricOpts meo;
  auto* met = app.add_subcommand("metrics", "SSIM, PSNR and NMSE on magnitudes");
  met->add_option("--ref", meo.ref)->required()->check(CLI::ExistingFile);
  met->add_option("--test", meo.test)->required()->check(CLI::ExistingFile);
  met->add_option("--out", meo.out);

  SamplerOpts so;
  auto* smp = app.add_subcommand("sampler", "group-balancing draw counts");
  smp->add_option("--manifest", so.manifest)->required()->check(CLI::ExistingFile);
  smp->add_option("--categories", so.categories, "comma separated")->required();
  smp->add_option("--out", so.out);
  smp->add_option("--epochs", so.epochs);
  smp->add_flag("--compound", so.compound, "carry weights over between epochs");

  ExperimentOpts eo;
  auto* exp = app.add_subcommand("experiment", "end-to-end seeded experiment");
  exp->add_option("--config", eo.config)->required()->check(CLI::ExistingFile);
  exp->add_option("--csv", eo.csv);
  exp->add_option("--report", eo.report);
  exp->add_flag("--independent-routing", eo.independent, "private router copies per sample");

  int rc = 0;
  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e);
  }
  try {
    set_log_level(g.log_level);
    if (*phantom) rc = cmd_phantom(po);
    else if (*coil) rc = cmd_coilmaps(co);
    else if (*mask) rc = cmd_maskgen(mo);
    else if (*aug) rc = cmd_augment(ao);
    else if (*cbt) rc = cmd_codebook(cbo);
    else if (*sim) rc = cmd_branchnav(no);
    else if (*rec) rc = cmd_recon(ro);
    else if (*met) rc = cmd_metrics(meo);
    else if (*smp) rc = cmd_sampler(so);
    else if (*exp) rc = cmd_experiment(eo);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  }
  return rc;
}
