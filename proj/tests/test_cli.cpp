#include <filesystem>
#include <fstream>
#include <sstream>

#include "doctest.h"
#include "wdmdiff/commands.hpp"

using namespace wdmdiff;
namespace fs = std::filesystem;

namespace {

RunConfig tiny_config(const std::string& out_dir) {
  RunConfig cfg;
  cfg.k = 1;
  cfg.layer_side = 8;
  cfg.fov_side = 2;
  cfg.n_w = 2;
  cfg.has_master_seed = true;
  cfg.master_seed = 4242;
  cfg.train = 16;
  cfg.val = 4;
  cfg.test = 4;
  cfg.epochs = 2;
  cfg.out_dir = out_dir;
  cfg.run_id = "tiny";
  return cfg;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  REQUIRE(in.good());
  std::stringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

struct TempDir {
  fs::path path;
  explicit TempDir(const std::string& name) : path(fs::temp_directory_path() / name) {
    fs::remove_all(path);
    fs::create_directories(path);
  }
  ~TempDir() { fs::remove_all(path); }
};

}  // namespace

TEST_SUITE_BEGIN("cli");

TEST_CASE("config serialization round trips exactly") {
  RunConfig cfg = tiny_config("somewhere/out");
  cfg.n_target = 0;
  cfg.channels = {0.93, 1.0, 1.07};
  cfg.material = "dispersion-free";
  cfg.beta = 1e4;
  cfg.has_eta_th = true;
  cfg.eta_th = 3e-4;
  cfg.bit_depth = 8;
  cfg.adaptive_alpha = false;
  cfg.has_init_seed = true;
  cfg.init_seed = 99;
  const RunConfig back = parse_config_text(serialize_config(cfg));
  CHECK(back == cfg);
  // defaults survive the trip too
  RunConfig defaults;
  defaults.has_master_seed = true;
  defaults.master_seed = 1;
  CHECK(parse_config_text(serialize_config(defaults)) == defaults);
}

TEST_CASE("config parser names unknown fields and bad values") {
  CHECK_THROWS_WITH_AS(parse_config_text("[geometry]\nbogus = 1\n"),
                       doctest::Contains("geometry.bogus"), ConfigError);
  CHECK_THROWS_AS(parse_config_text("[nosuch]\nk = 1\n"), ConfigError);
  CHECK_THROWS_AS(parse_config_text("[geometry]\nk 1\n"), ConfigError);
  CHECK_THROWS_AS(parse_config_text("[training]\ndeterministic = maybe\n"), ConfigError);
}

TEST_CASE("validation requires the master seed and names it") {
  RunConfig cfg = tiny_config("x");
  cfg.has_master_seed = false;
  CHECK_THROWS_WITH_AS(validate_config(cfg), doctest::Contains("task.master_seed"),
                       ConfigError);
}

TEST_CASE("explicit task dimensions must match the FOV") {
  RunConfig cfg = tiny_config("x");
  cfg.n_i = 4;  // fov_side = 2
  cfg.n_o = 4;
  CHECK_NOTHROW(validate_config(cfg));
  CHECK(parse_config_text(serialize_config(cfg)) == cfg);
  cfg.n_i = 9;
  CHECK_THROWS_WITH_AS(validate_config(cfg), doctest::Contains("task.n_i"), ConfigError);
}

TEST_CASE("layer_side and n_target are exclusive alternatives") {
  RunConfig cfg = tiny_config("x");
  cfg.layer_side = 0;
  cfg.n_target = 0;
  CHECK_THROWS_AS(validate_config(cfg), ConfigError);
  cfg.n_target = 128;
  CHECK_NOTHROW(validate_config(cfg));
  CHECK(make_geometry(cfg).layer_side == 11);  // round(sqrt(128))
  cfg.layer_side = 8;
  CHECK_THROWS_AS(validate_config(cfg), ConfigError);
}

TEST_CASE("explicit channel lists override n_w") {
  RunConfig cfg = tiny_config("x");
  cfg.channels = {0.95, 1.05};
  cfg.n_w = 7;  // ignored
  const StackGeometry geo = make_geometry(cfg);
  CHECK(geo.channels == std::vector<double>{0.95, 1.05});
}

TEST_CASE("eta_th resolves by material absorption when set to auto") {
  RunConfig cfg = tiny_config("x");
  const Material lossless = Material::dispersion_free();
  CHECK(make_train_config(cfg, lossless).eta_th == 3e-4);
  const Material lossy = Material::constant(1.72, 0.1);
  CHECK(make_train_config(cfg, lossy).eta_th == 3e-5);
  cfg.has_eta_th = true;
  cfg.eta_th = 0.2;
  CHECK(make_train_config(cfg, lossy).eta_th == 0.2);
}

TEST_CASE("init seed derives from the master seed unless pinned") {
  RunConfig a = tiny_config("x");
  RunConfig b = tiny_config("x");
  CHECK(resolved_init_seed(a) == resolved_init_seed(b));
  b.master_seed = 999;
  CHECK(resolved_init_seed(a) != resolved_init_seed(b));
  b.has_init_seed = true;
  b.init_seed = 5;
  CHECK(resolved_init_seed(b) == 5);
}

TEST_CASE("gen-tasks writes per-channel transforms and reruns byte-identically") {
  TempDir dir("wdmdiff_cli_gen");
  RunConfig cfg = tiny_config((dir.path / "out").string());
  std::ostringstream log;
  cmd_gen_tasks(cfg, false, log);
  const fs::path t1 = dir.path / "out" / "transform_ch1.bin";
  const fs::path t2 = dir.path / "out" / "transform_ch2.bin";
  REQUIRE(fs::exists(t1));
  REQUIRE(fs::exists(t2));
  CHECK(log.str().find("max pairwise |CosSim|") != std::string::npos);
  const std::string first = slurp(t1);
  cmd_gen_tasks(cfg, false, log);
  CHECK(slurp(t1) == first);
}

TEST_CASE("gen-tasks with caching writes one file per channel and split") {
  TempDir dir("wdmdiff_cli_cache");
  RunConfig cfg = tiny_config((dir.path / "out").string());
  std::ostringstream log;
  cmd_gen_tasks(cfg, true, log);
  for (int w = 1; w <= 2; ++w)
    for (const char* split : {"train", "val", "test"})
      CHECK(fs::exists(dir.path / "out" /
                       ("dataset_ch" + std::to_string(w) + "_" + split + ".bin")));
}

TEST_CASE("train writes checkpoints and history; eval writes metrics") {
  TempDir dir("wdmdiff_cli_train");
  RunConfig cfg = tiny_config((dir.path / "out").string());
  std::ostringstream log;
  cmd_train(cfg, std::nullopt, log);
  REQUIRE(fs::exists(dir.path / "out" / "checkpoint_best.wdc"));
  REQUIRE(fs::exists(dir.path / "out" / "checkpoint_last.wdc"));
  REQUIRE(fs::exists(dir.path / "out" / "history.csv"));
  const std::string hist = slurp(dir.path / "out" / "history.csv");
  CHECK(hist.rfind("epoch,channel,train_mse,val_mse,alpha,eta,lr\n", 0) == 0);
  // 2 epochs x 2 channels + header
  CHECK(std::count(hist.begin(), hist.end(), '\n') == 5);

  cmd_eval(cfg, EvalOptions{}, log);
  REQUIRE(fs::exists(dir.path / "out" / "metrics.csv"));
  const std::string metrics = slurp(dir.path / "out" / "metrics.csv");
  CHECK(metrics.find("run_id,N_w,N,K,channel") == 0);
  CHECK(std::count(metrics.begin(), metrics.end(), '\n') == 3);
}

TEST_CASE("resume continues the schedule from the stored epoch") {
  TempDir dir("wdmdiff_cli_resume");
  RunConfig cfg = tiny_config((dir.path / "out").string());
  cfg.epochs = 12;  // crosses the first decay boundary
  std::ostringstream log;
  {
    RunConfig first = cfg;
    first.epochs = 11;
    cmd_train(first, std::nullopt, log);
  }
  const std::string last = (dir.path / "out" / "checkpoint_last.wdc").string();
  cmd_train(cfg, last, log);
  const std::string hist = slurp(dir.path / "out" / "history.csv");
  // resumed run records only epoch 11, at the decayed rate
  CHECK(hist.find("\n11,1,") != std::string::npos);
  CHECK(hist.find(",5e-04\n") != std::string::npos);
}

TEST_CASE("eval refuses a checkpoint whose geometry mismatches the config") {
  TempDir dir("wdmdiff_cli_mismatch");
  RunConfig cfg = tiny_config((dir.path / "out").string());
  std::ostringstream log;
  cmd_train(cfg, std::nullopt, log);
  RunConfig other = cfg;
  other.layer_side = 12;
  try {
    cmd_eval(other, EvalOptions{}, log);
    FAIL("expected a geometry mismatch error");
  } catch (const ConfigError& e) {
    const std::string what = e.what();
    CHECK(what.find("layer_side=8") != std::string::npos);
    CHECK(what.find("layer_side=12") != std::string::npos);
  }
}

TEST_CASE("jitter and bitdepth flags multiply the metric rows") {
  TempDir dir("wdmdiff_cli_sweeps");
  RunConfig cfg = tiny_config((dir.path / "out").string());
  std::ostringstream log;
  cmd_train(cfg, std::nullopt, log);
  EvalOptions opts;
  opts.jitter = {0.0, 0.005, 0.01};
  cmd_eval(cfg, opts, log);
  std::string metrics = slurp(dir.path / "out" / "metrics.csv");
  CHECK(std::count(metrics.begin(), metrics.end(), '\n') == 1 + 3 * 2);
  opts.jitter.clear();
  opts.bitdepths = {8, 2};
  cmd_eval(cfg, opts, log);
  metrics = slurp(dir.path / "out" / "metrics.csv");
  CHECK(std::count(metrics.begin(), metrics.end(), '\n') == 1 + 2 * 2);
}

TEST_CASE("the full pipeline is reproducible byte for byte") {
  TempDir dir("wdmdiff_cli_repro");
  std::ostringstream log;
  RunConfig a = tiny_config((dir.path / "a").string());
  cmd_all(a, log);
  RunConfig b = tiny_config((dir.path / "b").string());
  cmd_all(b, log);
  CHECK(slurp(dir.path / "a" / "metrics.csv") == slurp(dir.path / "b" / "metrics.csv"));
  CHECK(slurp(dir.path / "a" / "history.csv") == slurp(dir.path / "b" / "history.csv"));
  CHECK(slurp(dir.path / "a" / "checkpoint_best.wdc") ==
        slurp(dir.path / "b" / "checkpoint_best.wdc"));
}

TEST_SUITE_END();
