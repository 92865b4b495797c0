#include "uavnet/cli.hpp"

#include <CLI11.hpp>

#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <map>
#include <memory>
#include <optional>

#include "uavnet/error.hpp"
#include "uavnet/eval.hpp"
#include "uavnet/kernels.hpp"
#include "uavnet/trainer.hpp"

namespace uavnet {

namespace {

namespace fs = std::filesystem;
using nlohmann::json;

struct Overrides {
  std::optional<std::uint64_t> seed;
  std::optional<std::uint64_t> world_seed;
  std::optional<std::uint64_t> pool_seed;
  std::optional<int> episodes;
  std::optional<int> epo_inner;
  std::optional<int> n_tiers;
  std::optional<std::size_t> n_rb;
  std::optional<int> antennas;
  std::optional<double> p_dbm;
  std::optional<int> varsigma;
  std::optional<double> rho;

  void add(CLI::App* app) {
    app->add_option("--seed", seed, "Training / evaluation seed");
    app->add_option("--world-seed", world_seed, "Building realization seed");
    app->add_option("--pool-seed", pool_seed, "RBP pool seed");
    app->add_option("--episodes", episodes, "Training episodes");
    app->add_option("--epo-inner", epo_inner, "Inner epochs per outer epoch");
    app->add_option("--n-tiers", n_tiers, "Hexagonal tiers (B = 3n^2 + 3n + 1)");
    app->add_option("--n-rb", n_rb, "Resource blocks K");
    app->add_option("--antennas", antennas, "BS antennas M");
    app->add_option("--p-dbm", p_dbm, "Transmit power in dBm");
    app->add_option("--varsigma", varsigma, "SINR realizations per slot");
    app->add_option("--rho", rho, "CSI correlation");
  }

  void apply(TrainConfig& c) const {
    if (seed) c.seed = *seed;
    if (world_seed) c.world_seed = *world_seed;
    if (pool_seed) c.pool_seed = *pool_seed;
    if (episodes) c.episodes = *episodes;
    if (epo_inner) c.epo_inner = *epo_inner;
    if (n_tiers) c.n_tiers = *n_tiers;
    if (n_rb) c.n_rb = *n_rb;
    if (antennas) c.radio.antennas = *antennas;
    if (p_dbm) c.radio.p_dbm = *p_dbm;
    if (varsigma) c.radio.varsigma = *varsigma;
    if (rho) c.channel.rho = *rho;
  }
};

json read_json(const fs::path& path, const std::string& what) {
  std::ifstream in(path);
  if (!in) throw ConfigError(what + " not found: " + path.string());
  try {
    return json::parse(in);
  } catch (const json::exception& e) {
    throw ConfigError(what + " " + path.string() + " is not valid JSON: " + e.what());
  }
}

void write_text(const fs::path& path, const std::string& text) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << text;
}

TrainConfig config_from(const std::string& path, const Overrides& ov) {
  TrainConfig c = path.empty() ? TrainConfig{} : load_config(path);
  ov.apply(c);
  return c;
}

BuildingWorld world_from(const std::string& path, const TrainConfig& cfg) {
  if (path.empty()) return make_world(cfg);
  auto w = read_json(path, "world file").get<BuildingWorld>();
  if (w.layout.size() != cfg.n_bs())
    throw DimensionError("world file has " + std::to_string(w.layout.size()) + " BSs, config expects " +
                         std::to_string(cfg.n_bs()));
  return w;
}

RbpPool pool_from(const std::string& path, const TrainConfig& cfg, const HexLayout& layout) {
  if (path.empty()) return make_pool(cfg, layout);
  auto p = read_json(path, "pool file").get<RbpPool>();
  if (p.maps.empty() || p.maps.front().n_bs() != layout.size() || p.maps.front().n_rb() != cfg.n_rb)
    throw DimensionError("pool file does not match B=" + std::to_string(layout.size()) +
                         ", K=" + std::to_string(cfg.n_rb));
  return p;
}

std::vector<NamedPolicy> policies_from(const std::vector<std::string>& names) {
  if (names.empty()) return named_policies();
  std::vector<NamedPolicy> out;
  for (const auto& n : names) out.push_back(policy_by_name(n));
  return out;
}

std::vector<std::uint64_t> seed_list(std::uint64_t base, int count) {
  if (count < 1) throw ConfigError("--seeds must be >= 1");
  std::vector<std::uint64_t> s;
  for (int i = 0; i < count; ++i) s.push_back(base + static_cast<std::uint64_t>(i));
  return s;
}

std::string fmt(double v, int prec = 6) {
  std::ostringstream os;
  os << std::setprecision(prec) << v;
  return os.str();
}

int run(const std::vector<std::string>& args, std::ostream& out) {
  CLI::App app{"Hybrid D3QN-DDPG resource-block and beamforming simulator for a cellular-connected UAV"};
  app.require_subcommand(1);
  std::string isa = "auto";
  app.add_option("--isa", isa, "Kernel variant: auto, scalar or avx2")->check(CLI::IsMember({"auto", "scalar", "avx2"}));

  std::string config_path, world_path, pool_path, out_path, out_dir, checkpoint_path, ckpt_pattern, axis, csv_path;
  std::vector<std::string> policy_names;
  std::vector<double> values;
  std::uint64_t seed_base = 0;
  int n_seeds = 1;
  bool write_tops = false;

  Overrides ov_world, ov_pool, ov_train, ov_eval, ov_sweep, ov_inspect;

  auto* gen_world = app.add_subcommand("gen-world", "Generate the building field and BS layout");
  gen_world->add_option("--config", config_path, "Config JSON");
  gen_world->add_option("--out", out_path, "World JSON output")->required();
  ov_world.add(gen_world);

  auto* gen_pool = app.add_subcommand("gen-pool", "Generate the RBP pool");
  gen_pool->add_option("--config", config_path, "Config JSON");
  gen_pool->add_option("--world", world_path, "World JSON (default: generated from config)");
  gen_pool->add_option("--out", out_path, "Pool JSON output")->required();
  ov_pool.add(gen_pool);

  auto* train = app.add_subcommand("train", "Run the hybrid training loop");
  train->add_option("--config", config_path, "Config JSON");
  train->add_option("--world", world_path, "World JSON");
  train->add_option("--pool", pool_path, "Pool JSON");
  train->add_option("--out-dir", out_dir, "Directory for checkpoint.json, final.json, train_log.csv")->required();
  ov_train.add(train);

  auto* eval = app.add_subcommand("eval", "Evaluate EOD of benchmark policies");
  eval->add_option("--config", config_path, "Config JSON (default: the checkpoint's config)");
  eval->add_option("--checkpoint", checkpoint_path, "Checkpoint JSON for learned policies");
  eval->add_option("--world", world_path, "World JSON");
  eval->add_option("--pool", pool_path, "Pool JSON");
  eval->add_option("--policy", policy_names, "Policy names (default: all six)");
  eval->add_option("--seed-base", seed_base, "First evaluation seed");
  eval->add_option("--seeds", n_seeds, "Number of evaluation seeds");
  eval->add_option("--out", out_path, "CSV output (policy,axis,value,seed,eod_s)");
  eval->add_flag("--tops", write_tops, "Also print per-slot TOPs");
  ov_eval.add(eval);

  auto* sw = app.add_subcommand("sweep", "Sweep EOD over transmit power or antenna count");
  sw->add_option("--config", config_path, "Config JSON");
  sw->add_option("--axis", axis, "p_dbm or antennas")->required();
  sw->add_option("--values", values, "Axis values (default: -20..40 step 10 dBm or 2,4,6,8)");
  sw->add_option("--checkpoint", checkpoint_path, "Checkpoint for a power sweep");
  sw->add_option("--checkpoint-pattern", ckpt_pattern, "Per-M checkpoint path with {M} placeholder");
  sw->add_option("--world", world_path, "World JSON");
  sw->add_option("--pool", pool_path, "Pool JSON");
  sw->add_option("--policy", policy_names, "Policy names (default: all six)");
  sw->add_option("--seed-base", seed_base, "First evaluation seed");
  sw->add_option("--seeds", n_seeds, "Number of evaluation seeds");
  sw->add_option("--out", out_path, "CSV output")->required();
  ov_sweep.add(sw);

  auto* inspect = app.add_subcommand("inspect", "Print the effective config and derived quantities");
  inspect->add_option("--config", config_path, "Config JSON");
  inspect->add_option("--csv", csv_path, "Parse a training log or sweep CSV and summarize it");
  ov_inspect.add(inspect);

  std::vector<std::string> argv_store{"uavnet"};
  argv_store.insert(argv_store.end(), args.begin(), args.end());
  std::vector<char*> argv;
  for (auto& a : argv_store) argv.push_back(a.data());
  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return 0;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return 0;
  } catch (const CLI::ParseError& e) {
    throw ConfigError(e.what());
  }

  if (isa == "scalar") kernels::set_isa(kernels::Isa::Scalar);
  if (isa == "avx2" && !kernels::set_isa(kernels::Isa::Avx2)) throw ConfigError("AVX2 kernels unavailable here");

  if (*gen_world) {
    auto cfg = config_from(config_path, ov_world);
    cfg.itu.validate();
    const auto w = make_world(cfg);
    write_text(out_path, json(w).dump());
    out << "world: " << w.buildings.size() << " buildings, " << w.layout.size() << " BSs -> " << out_path << '\n';
    return 0;
  }
  if (*gen_pool) {
    auto cfg = config_from(config_path, ov_pool);
    const auto w = world_from(world_path, cfg);
    const auto p = make_pool(cfg, w.layout);
    write_text(out_path, json(p).dump());
    out << "pool: " << p.maps.size() << " maps of " << w.layout.size() << " x " << cfg.n_rb << " -> " << out_path
        << '\n';
    return 0;
  }
  if (*train) {
    auto cfg = config_from(config_path, ov_train);
    cfg.validate();
    const auto w = world_from(world_path, cfg);
    const auto p = pool_from(pool_path, cfg, w.layout);
    fs::create_directories(out_dir);
    auto res = train_hybrid(cfg, w, p.maps, [&](const TrainLogRow& r) {
      out << "episode " << r.episode << " outer " << fmt(r.avg_outer_reward) << " inner "
          << fmt(r.avg_inner_reward) << " eps " << fmt(r.epsilon) << " sigma2 " << fmt(r.sigma2) << " ("
          << fmt(r.seconds, 3) << " s)\n";
    });
    std::ostringstream log;
    res.log.write_csv(log);
    write_text(fs::path(out_dir) / "train_log.csv", log.str());
    save_checkpoint(make_checkpoint(cfg, res), fs::path(out_dir) / "checkpoint.json");
    save_checkpoint({cfg, res.d3qn, res.ddpg, cfg.episodes - 1, cfg.episodes - 1}, fs::path(out_dir) / "final.json");
    out << "trained " << cfg.episodes << " episodes; best outer episode " << res.best_outer_episode
        << ", best inner episode " << res.best_inner_episode << "; D3QN updates " << res.counters.d3qn_updates
        << ", target syncs " << res.counters.target_syncs << '\n';
    return 0;
  }
  if (*eval) {
    const auto policies = policies_from(policy_names);
    std::optional<Checkpoint> ck;
    bool need = false;
    for (const auto& p : policies) need = need || p.kind.needs_agents();
    if (need && checkpoint_path.empty()) throw ConfigError("learned policies need --checkpoint");
    if (!checkpoint_path.empty()) ck.emplace(load_checkpoint(checkpoint_path));
    TrainConfig cfg = !config_path.empty() ? load_config(config_path) : ck ? ck->config : TrainConfig{};
    ov_eval.apply(cfg);
    const auto w = world_from(world_path, cfg);
    const auto p = pool_from(pool_path, cfg, w.layout);
    const auto sc = EvalScenario::from_config(cfg, w, p.maps);
    std::vector<SweepRow> rows;
    for (const auto& pol : policies)
      for (auto s : seed_list(seed_base, n_seeds)) {
        const auto r = evaluate_eod(sc, pol, ck ? &*ck : nullptr, s);
        rows.push_back({pol.name, "p_dbm", cfg.radio.p_dbm, s, r.eod_s});
        out << pol.name << " seed " << s << " EOD " << fmt(r.eod_s) << " s\n";
        if (write_tops)
          for (std::size_t n = 0; n < r.tops.size(); ++n)
            out << "  slot " << n << " rb " << r.rbs[n] << " top " << fmt(r.tops[n]) << '\n';
      }
    if (!out_path.empty()) {
      std::ostringstream csv;
      write_sweep_csv(csv, rows);
      write_text(out_path, csv.str());
    }
    return 0;
  }
  if (*sw) {
    const auto ax = axis_from_name(axis);
    const auto policies = policies_from(policy_names);
    if (values.empty())
      values = ax == SweepAxis::Power ? std::vector<double>{-20, -10, 0, 10, 20, 30, 40} : std::vector<double>{2, 4, 6, 8};
    bool need = false;
    for (const auto& p : policies) need = need || p.kind.needs_agents();
    std::map<double, std::unique_ptr<Checkpoint>> cks;
    if (need) {
      if (ax == SweepAxis::Power) {
        if (checkpoint_path.empty()) throw ConfigError("learned policies need --checkpoint");
        auto ck = std::make_unique<Checkpoint>(load_checkpoint(checkpoint_path));
        for (double v : values) cks[v] = std::make_unique<Checkpoint>(*ck);
      } else {
        if (ckpt_pattern.find("{M}") == std::string::npos)
          throw ConfigError("an antenna sweep with learned policies needs --checkpoint-pattern containing {M}");
        for (double v : values) {
          auto path = ckpt_pattern;
          path.replace(path.find("{M}"), 3, std::to_string(static_cast<int>(v)));
          cks[v] = std::make_unique<Checkpoint>(load_checkpoint(path));
        }
      }
    }
    TrainConfig cfg = !config_path.empty()  ? load_config(config_path)
                      : !cks.empty()        ? cks.begin()->second->config
                                            : TrainConfig{};
    ov_sweep.apply(cfg);
    const auto w = world_from(world_path, cfg);
    const auto p = pool_from(pool_path, cfg, w.layout);
    const auto sc = EvalScenario::from_config(cfg, w, p.maps);
    const auto rows = sweep(sc, ax, values, policies, seed_list(seed_base, n_seeds), [&](double v) -> const Checkpoint* {
      auto it = cks.find(v);
      return it == cks.end() ? nullptr : it->second.get();
    });
    std::ostringstream csv;
    write_sweep_csv(csv, rows);
    write_text(out_path, csv.str());
    out << rows.size() << " rows -> " << out_path << '\n';
    return 0;
  }
  if (*inspect) {
    if (!csv_path.empty()) {
      std::ifstream in(csv_path);
      if (!in) throw ConfigError("CSV not found: " + csv_path);
      std::string header;
      std::getline(in, header);
      in.seekg(0);
      if (header == TrainLog::kHeader) {
        const auto log = TrainLog::read_csv(in);
        out << "training log: " << log.rows.size() << " episodes\n";
        if (!log.rows.empty())
          out << "last episode outer " << fmt(log.rows.back().avg_outer_reward) << " inner "
              << fmt(log.rows.back().avg_inner_reward) << '\n';
      } else {
        const auto rows = read_sweep_csv(in);
        std::map<std::pair<std::string, double>, std::pair<double, int>> agg;
        for (const auto& r : rows) {
          auto& a = agg[{r.policy, r.value}];
          a.first += r.eod_s;
          ++a.second;
        }
        out << "sweep: " << rows.size() << " rows\n";
        for (const auto& [key, a] : agg)
          out << key.first << " " << fmt(key.second) << " mean EOD " << fmt(a.first / a.second) << " s\n";
      }
      return 0;
    }
    auto cfg = config_from(config_path, ov_inspect);
    cfg.validate();
    out << json(cfg).dump(2) << '\n';
    out << "B (BSs): " << cfg.n_bs() << '\n'
        << "K (RBs): " << cfg.n_rb << '\n'
        << "M (antennas): " << cfg.antennas() << '\n'
        << "buildings: " << cfg.itu.building_count() << '\n'
        << "footprint side: " << fmt(cfg.itu.footprint_side_m()) << " m\n"
        << "trajectory: " << fmt(cfg.trajectory.travel_time_s()) << " s, " << cfg.trajectory.n_slots() << " slots\n"
        << "D3QN state dim: " << cfg.n_bs() * cfg.n_rb << ", actions: " << cfg.n_rb << '\n'
        << "actor: " << 2 * cfg.antennas() + 1 << " -> " << 2 * cfg.antennas() << ", critic: "
        << 4 * cfg.antennas() + 1 << " -> 1\n"
        << "kernels: " << kernels::active().name << '\n';
    return 0;
  }
  return 0;
}

}  // namespace

int cli_main(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  try {
    return run(args, out);
  } catch (const ConfigError& e) {
    err << "config error: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return 1;
  }
}

int cli_main(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  return cli_main(args, std::cout, std::cerr);
}

}  // namespace uavnet
