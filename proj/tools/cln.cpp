#include <iostream>

#include "CLI11.hpp"

#include "cln/experiments.hpp"

using namespace cln;

namespace {

int cmd_field(const std::string& desc) {
  auto F = parse_field(desc);
  std::cout << "field " << F->descriptor() << "\n";
  std::cout << "modulus (c0..cd, ascending): ";
  for (size_t i = 0; i < F->modulus().size(); ++i)
    std::cout << (i ? " " : "") << F->modulus()[i];
  std::cout << "\ngenerator " << F->generator() << "\n";
  if (F->theta_defined()) std::cout << "theta-fixed subfield size " << F->q0() << "\n";
  return 0;
}

int cmd_group_sample(const std::string& desc_str, unsigned count, u64 seed) {
  auto desc = parse_group(desc_str);
  Rng rng = seed_stream(seed, 0);
  std::cout << "group " << desc.descriptor() << " order "
            << to_string_u128(desc.order());
  if (!is_quasisimple_range(desc)) std::cout << " (non-quasisimple range)";
  std::cout << "\n";
  for (unsigned i = 0; i < count; ++i)
    std::cout << sample_uniform(desc, rng).to_text() << "\n";
  return 0;
}

int cmd_trajectory_run(const std::string& desc_str, const std::string& wtext,
                       unsigned r, u64 trials, u64 seed, bool materialized) {
  auto desc = parse_group(desc_str);
  const FormedSpace& sp = *desc.space();
  unsigned k = 0;
  Word w = Word::from_text(8, wtext);
  for (int l : w.letters()) k = std::max(k, (unsigned)(l > 0 ? l : -l));
  if (k == 0) throw ClnError("trajectory: word must be nontrivial");
  w = Word(k, w.letters());
  std::vector<VecGF> starts;
  for (unsigned i = 0; i < r; ++i) starts.push_back(sp.basis_vector(i));
  Rng rng = seed_stream(seed, 0);
  JointRunner runner(desc.space(), w, starts, starts);
  for (u64 t = 0; t < trials; ++t) {
    if (materialized) {
      std::vector<MatGF> xs;
      for (unsigned i = 0; i < k; ++i) xs.push_back(sample_uniform(desc, rng));
      runner.set_elements(xs);
    }
    std::cout << runner.run_record(rng).to_jsonl() << "\n";
  }
  return 0;
}

int cmd_diameter(const std::string& desc_str, unsigned k, u64 seed) {
  auto desc = parse_group(desc_str);
  Rng rng = seed_stream(seed, 0);
  std::vector<MatGF> gens;
  for (unsigned i = 0; i < k; ++i) gens.push_back(sample_uniform(desc, rng));
  auto rep = cayley_diameter_bfs(desc, gens);
  if (rep.generates)
    std::cout << "diameter " << rep.diameter << " (order " << rep.reached
              << ")\n";
  else
    std::cout << "generators reach a proper subgroup of order " << rep.reached
              << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"finite classical group toolkit"};
  app.require_subcommand(1);

  u64 seed = 0;
  u64 trials = 1;
  unsigned threads = 1;

  // field
  std::string field_desc;
  auto* field_cmd = app.add_subcommand("field", "inspect a finite field");
  field_cmd->add_option("descriptor", field_desc, "e.g. GF(9) or GF(2^4)")
      ->required();

  // group sample
  auto* group_cmd = app.add_subcommand("group", "group operations");
  auto* sample_cmd =
      group_cmd->add_subcommand("sample", "sample uniform elements");
  std::string group_desc;
  unsigned count = 1;
  sample_cmd->add_option("descriptor", group_desc,
                         "e.g. GL(4,3), Sp(6,2), GO+(4,3):S")
      ->required();
  sample_cmd->add_option("--count", count, "number of samples");
  sample_cmd->add_option("--seed", seed, "master seed");

  // trajectory run
  auto* traj_cmd = app.add_subcommand("trajectory", "trajectory engine");
  auto* traj_run = traj_cmd->add_subcommand("run", "run joint trajectories");
  std::string traj_group, traj_word;
  unsigned traj_r = 1;
  bool traj_mat = false;
  traj_run->add_option("descriptor", traj_group, "group descriptor")->required();
  traj_run->add_option("word", traj_word, "word, e.g. 'x1 x2^-1'")->required();
  traj_run->add_option("--r", traj_r, "number of strands");
  traj_run->add_option("--trials", trials, "number of records");
  traj_run->add_option("--seed", seed, "master seed");
  traj_run->add_flag("--materialized", traj_mat,
                     "sample explicit elements instead of lazy choices");

  // experiment run
  auto* exp_cmd = app.add_subcommand("experiment", "experiment harness");
  auto* exp_run = exp_cmd->add_subcommand("run", "run a config file");
  std::string config_path, output_root;
  exp_run->add_option("config", config_path, "JSON config file")->required();
  exp_run->add_option("--output", output_root, "output root directory");
  exp_run->add_option("--threads", threads, "worker threads");

  // diameter bfs
  auto* diam_cmd = app.add_subcommand("diameter", "exact diameters");
  auto* diam_bfs = diam_cmd->add_subcommand("bfs", "Cayley diameter by BFS");
  std::string diam_group;
  unsigned diam_k = 2;
  diam_bfs->add_option("descriptor", diam_group, "group descriptor")->required();
  diam_bfs->add_option("--generators", diam_k, "random generator count");
  diam_bfs->add_option("--seed", seed, "master seed");

  // sn pipeline
  auto* sn_cmd = app.add_subcommand("sn", "symmetric group lab");
  auto* sn_pipe = sn_cmd->add_subcommand("pipeline", "three-generator pipeline");
  unsigned sn_n = 200, sn_seeds = 1, sn_maxlen = 12;
  sn_pipe->add_option("--n", sn_n, "degree");
  sn_pipe->add_option("--seeds", sn_seeds, "number of seeds");
  sn_pipe->add_option("--max-word-length", sn_maxlen, "inner word length cap");
  sn_pipe->add_option("--seed", seed, "master seed");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*field_cmd) return cmd_field(field_desc);
    if (*sample_cmd) return cmd_group_sample(group_desc, count, seed);
    if (*traj_run)
      return cmd_trajectory_run(traj_group, traj_word, traj_r, trials, seed,
                                traj_mat);
    if (*exp_run) {
      auto cfg = ExperimentConfig::load_file(config_path);
      auto res = run_experiment(cfg, output_root);
      std::cout << res.summary.dump(2) << "\n";
      std::cout << "wall seconds: " << res.wall_seconds << "\n";
      return 0;
    }
    if (*diam_bfs) return cmd_diameter(diam_group, diam_k, seed);
    if (*sn_pipe) {
      for (unsigned s = 0; s < sn_seeds; ++s) {
        auto rep = sn_pipeline(sn_n, seed ^ (0x9e3779b97f4a7c15ULL * (s + 1)),
                               sn_maxlen);
        std::cout << rep.to_json() << "\n";
      }
      return 0;
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
