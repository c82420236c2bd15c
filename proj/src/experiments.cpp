#include "cln/experiments.hpp"

#include <atomic>
#include <mutex>
#include <chrono>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <map>
#include <set>
#include <sstream>
#include <thread>

namespace cln {

void parallel_for(unsigned tasks, unsigned threads,
                  const std::function<void(unsigned)>& fn) {
  if (threads <= 1 || tasks <= 1) {
    for (unsigned t = 0; t < tasks; ++t) fn(t);
    return;
  }
  std::atomic<unsigned> next{0};
  std::vector<std::thread> pool;
  std::atomic<bool> failed{false};
  std::string error;
  std::mutex error_mutex;
  unsigned workers = std::min(threads, tasks);
  for (unsigned w = 0; w < workers; ++w) {
    pool.emplace_back([&] {
      while (true) {
        unsigned t = next.fetch_add(1);
        if (t >= tasks || failed.load()) return;
        try {
          fn(t);
        } catch (const std::exception& e) {
          std::lock_guard<std::mutex> lock(error_mutex);
          failed = true;
          if (error.empty()) error = e.what();
        }
      }
    });
  }
  for (auto& th : pool) th.join();
  if (failed) throw ClnError("parallel task failed: " + error);
}

namespace {

const std::map<std::string, std::set<std::string>>& allowed_keys() {
  static const std::map<std::string, std::set<std::string>> keys = {
      {"return-prob",
       {"experiment", "group", "word", "words", "r", "trials", "seed",
        "threads", "output"}},
      {"lambda",
       {"experiment", "group", "generators", "seeds", "seed", "action",
        "tolerance", "max_iters", "threads", "output", "rho_threshold"}},
      {"xwz-search",
       {"experiment", "group", "d", "inner_generators", "max_word_length",
        "seeds", "seed", "threads", "output"}},
      {"cd-density",
       {"experiment", "group", "d", "trials", "seed", "threads", "output"}},
      {"supp-tail",
       {"experiment", "group", "word", "delta", "trials", "seed", "threads",
        "output"}},
      {"sn-pipeline",
       {"experiment", "n", "seeds", "seed", "max_word_length", "spectral_cap",
        "threads", "output"}},
      {"diameter-bfs",
       {"experiment", "group", "generators", "seeds", "seed", "threads",
        "output"}},
      {"witt-count-check",
       {"experiment", "group", "max_codim", "output", "seed", "threads"}},
  };
  return keys;
}

u64 fnv1a(const std::string& s) {
  u64 h = 14695981039346656037ULL;
  for (unsigned char c : s) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  return h;
}

std::string csv_escape(const std::string& s) { return s; }

}  // namespace

ExperimentConfig ExperimentConfig::from_json(const nlohmann::json& j) {
  ExperimentConfig c;
  if (!j.is_object()) throw ClnError("config: expected a JSON object");
  if (!j.contains("experiment"))
    throw ClnError("config: missing 'experiment' key");
  c.experiment_ = j.at("experiment").get<std::string>();
  auto it = allowed_keys().find(c.experiment_);
  if (it == allowed_keys().end()) {
    std::string known;
    for (auto& [k, v] : allowed_keys()) known += k + " ";
    throw ClnError("config: unknown experiment '" + c.experiment_ +
                   "' (known: " + known + ")");
  }
  for (auto& [key, val] : j.items()) {
    if (!it->second.count(key))
      throw ClnError("config: unknown key '" + key + "' for experiment " +
                     c.experiment_);
  }
  c.j_ = j;
  return c;
}

ExperimentConfig ExperimentConfig::from_text(const std::string& text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const std::exception& e) {
    throw ClnError(std::string("config: JSON parse error: ") + e.what());
  }
  return from_json(j);
}

ExperimentConfig ExperimentConfig::load_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ClnError("config: cannot open " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return from_text(ss.str());
}

std::string ExperimentConfig::canonical_text() const { return j_.dump(); }

u64 ExperimentConfig::hash() const { return fnv1a(canonical_text()); }

namespace {

struct Sink {
  std::vector<std::string> jsonl;      // ordered lines
  std::vector<std::string> csv_rows;   // ordered rows
  std::string csv_header;
};

std::vector<std::string> config_words(const ExperimentConfig& cfg) {
  std::vector<std::string> words;
  if (cfg.has("word")) words.push_back(cfg.require<std::string>("word"));
  if (cfg.has("words"))
    for (auto& w : cfg.raw().at("words")) words.push_back(w.get<std::string>());
  if (words.empty()) throw ClnError("config: need 'word' or 'words'");
  return words;
}

void run_return_prob(const ExperimentConfig& cfg, Sink& sink) {
  auto desc = parse_group(cfg.require<std::string>("group"));
  unsigned r = cfg.get<unsigned>("r", 1);
  u64 trials = cfg.require<u64>("trials");
  u64 seed = cfg.get<u64>("seed", 0);
  unsigned threads = cfg.get<unsigned>("threads", 1);
  sink.csv_header = "word,r,trials,closures,orbit_size,n_times_freq,lo,hi";
  unsigned widx = 0;
  for (const auto& wtext : config_words(cfg)) {
    Word w = Word::from_text(2, wtext);
    // alphabet from the word letters themselves
    unsigned k = 0;
    for (int l : w.letters()) k = std::max(k, (unsigned)(l > 0 ? l : -l));
    w = Word(k, w.letters());
    auto cr = cyclic_reduce(w);
    if (cr.core.empty() || is_proper_power(cr.core).proper_power)
      throw ClnError("return-prob: word must be nontrivial and not a proper power");

    const FormedSpace& sp = *desc.space();
    std::vector<VecGF> starts;
    for (unsigned i = 0; i < r; ++i) starts.push_back(sp.basis_vector(i));
    u128 N = tuple_orbit_size(sp, starts);

    // fixed task granularity: the decomposition (and hence every stream)
    // is independent of the worker count
    unsigned tasks = (unsigned)std::min<u64>(trials, 64);
    if (tasks == 0) tasks = 1;
    std::vector<u64> closures(tasks, 0), counts(tasks, 0);
    parallel_for(tasks, threads, [&](unsigned t) {
      u64 lo = trials * t / tasks, hi = trials * (t + 1) / tasks;
      Rng rng = seed_stream(seed, (u64)widx << 32 | t);
      JointRunner runner(desc.space(), cr.core, starts, starts);
      std::vector<StrandStat> st;
      u64 hits = 0;
      for (u64 i = lo; i < hi; ++i) {
        runner.run(rng, st);
        bool all = true;
        for (auto& s : st)
          if (!s.closed) all = false;
        if (all) ++hits;
      }
      closures[t] = hits;
      counts[t] = hi - lo;
    });
    u64 total = 0, done = 0;
    for (unsigned t = 0; t < tasks; ++t) {
      total += closures[t];
      done += counts[t];
      nlohmann::json line{{"word", wtext}, {"task", t},
                          {"trials", counts[t]}, {"closures", closures[t]}};
      sink.jsonl.push_back(line.dump());
    }
    auto wil = wilson_interval(total, done);
    double Nd = (double)N;
    std::ostringstream row;
    row << csv_escape(wtext) << "," << r << "," << done << "," << total << ","
        << to_string_u128(N) << "," << Nd * total / done << "," << Nd * wil.lo
        << "," << Nd * wil.hi;
    sink.csv_rows.push_back(row.str());
    ++widx;
  }
}

void run_lambda(const ExperimentConfig& cfg, Sink& sink) {
  auto desc = parse_group(cfg.require<std::string>("group"));
  unsigned k = cfg.get<unsigned>("generators", 4);
  unsigned seeds = cfg.get<unsigned>("seeds", 20);
  u64 seed = cfg.get<u64>("seed", 0);
  double tol = cfg.get<double>("tolerance", 1e-10);
  unsigned max_iters = cfg.get<unsigned>("max_iters", 50000);
  unsigned threads = cfg.get<unsigned>("threads", 1);
  std::string action = cfg.get<std::string>("action", "vectors");
  double rho_threshold = cfg.get<double>("rho_threshold", 0.9);
  sink.csv_header = "seed,orbit_size,lambda2,lambda_n,rho,converged";
  std::vector<SpectralReport> reports(seeds);
  parallel_for(seeds, threads, [&](unsigned s) {
    Rng rng = seed_stream(seed, s);
    std::vector<MatGF> gens;
    for (unsigned i = 0; i < k; ++i) gens.push_back(sample_uniform(desc, rng));
    OrbitIndex orbit =
        action == "transvection-class"
            ? OrbitIndex::conjugation_orbit(
                  desc.space(), gens,
                  [&] {
                    MatGF t = MatGF::identity(desc.field(), desc.dim());
                    t.at(0, 1) = 1;
                    return t;
                  }())
            : OrbitIndex::vectors_orbit(desc.space(), gens,
                                        {desc.space()->basis_vector(0)});
    reports[s] = estimate_lambda_power(orbit, tol, max_iters, rng);
  });
  unsigned good = 0;
  for (unsigned s = 0; s < seeds; ++s) {
    const auto& rep = reports[s];
    if (rep.converged && rep.rho <= rho_threshold) ++good;
    nlohmann::json line = nlohmann::json::parse(rep.to_json());
    line["seed"] = s;
    sink.jsonl.push_back(line.dump());
    std::ostringstream row;
    row << s << "," << rep.orbit_size << "," << rep.lambda2 << ","
        << rep.lambda_n << "," << rep.rho << "," << rep.converged;
    sink.csv_rows.push_back(row.str());
  }
  std::ostringstream row;
  row << "summary," << good << "/" << seeds << " at rho<=" << rho_threshold
      << ",,,,";
  sink.csv_rows.push_back(row.str());
}

void run_xwz_search(const ExperimentConfig& cfg, Sink& sink) {
  auto desc = parse_group(cfg.require<std::string>("group"));
  unsigned d = cfg.require<unsigned>("d");
  unsigned inner = cfg.get<unsigned>("inner_generators", 2);
  unsigned max_len = cfg.get<unsigned>("max_word_length", 8);
  unsigned seeds = cfg.get<unsigned>("seeds", 20);
  u64 seed = cfg.get<u64>("seed", 0);
  unsigned threads = cfg.get<unsigned>("threads", 1);
  sink.csv_header = "seed,found,inner_word,words_tested,exponent";
  std::vector<MinimalWordSearch> results(seeds);
  parallel_for(seeds, threads, [&](unsigned s) {
    Rng rng = seed_stream(seed, s);
    std::vector<MatGF> xs;
    for (unsigned i = 0; i <= inner; ++i) xs.push_back(sample_uniform(desc, rng));
    results[s] = search_word_to_minimal_degree(*desc.space(), xs, max_len, d);
  });
  unsigned found = 0;
  for (unsigned s = 0; s < seeds; ++s) {
    const auto& res = results[s];
    if (res.found) ++found;
    nlohmann::json line{{"seed", s},
                        {"found", res.found},
                        {"inner_word", res.found ? res.inner.to_text() : ""},
                        {"words_tested", res.words_tested},
                        {"exponent", res.exponent}};
    sink.jsonl.push_back(line.dump());
    std::ostringstream row;
    row << s << "," << res.found << ","
        << (res.found ? res.inner.to_text() : "-") << "," << res.words_tested
        << "," << res.exponent;
    sink.csv_rows.push_back(row.str());
  }
  std::ostringstream row;
  row << "summary," << found << "/" << seeds << ",,,";
  sink.csv_rows.push_back(row.str());
}

void run_cd_density(const ExperimentConfig& cfg, Sink& sink) {
  auto desc = parse_group(cfg.require<std::string>("group"));
  unsigned d = cfg.require<unsigned>("d");
  u64 trials = cfg.require<u64>("trials");
  u64 seed = cfg.get<u64>("seed", 0);
  BlockSpec spec = BlockSpec::make(desc, d, 0);
  Rng rng = seed_stream(seed, 0);
  auto density = estimate_block_density(spec, trials, rng);
  sink.csv_header = "fibre,hits,draws,freq";
  for (auto& [code, est] : density) {
    nlohmann::json line{{"fibre", code},
                        {"hits", est.hits},
                        {"draws", est.trials},
                        {"freq", est.trials ? (double)est.hits / est.trials : 0}};
    sink.jsonl.push_back(line.dump());
    std::ostringstream row;
    row << code << "," << est.hits << "," << est.trials << ","
        << (est.trials ? (double)est.hits / est.trials : 0);
    sink.csv_rows.push_back(row.str());
  }
}

void run_supp_tail(const ExperimentConfig& cfg, Sink& sink) {
  auto desc = parse_group(cfg.require<std::string>("group"));
  std::string wtext = cfg.require<std::string>("word");
  double delta = cfg.require<double>("delta");
  u64 trials = cfg.require<u64>("trials");
  u64 seed = cfg.get<u64>("seed", 0);
  Word w = Word::from_text(3, wtext);
  unsigned k = 0;
  for (int l : w.letters()) k = std::max(k, (unsigned)(l > 0 ? l : -l));
  if (k == 0) throw ClnError("supp-tail: word must be nontrivial");
  w = Word(k, w.letters());
  Rng rng = seed_stream(seed, 0);
  auto est = estimate_small_support_prob(desc, w, delta, trials, rng);
  nlohmann::json line{{"word", wtext},       {"delta", delta},
                      {"trials", est.trials}, {"hits", est.hits},
                      {"freq", (double)est.hits / est.trials},
                      {"reference_bound", est.bound}};
  sink.jsonl.push_back(line.dump());
  sink.csv_header = "word,delta,trials,hits,freq,reference_bound";
  std::ostringstream row;
  row << csv_escape(wtext) << "," << delta << "," << est.trials << ","
      << est.hits << "," << (double)est.hits / est.trials << "," << est.bound;
  sink.csv_rows.push_back(row.str());
}

void run_sn_pipeline(const ExperimentConfig& cfg, Sink& sink) {
  unsigned n = cfg.require<unsigned>("n");
  unsigned seeds = cfg.get<unsigned>("seeds", 20);
  u64 seed = cfg.get<u64>("seed", 0);
  unsigned max_len = cfg.get<unsigned>("max_word_length", 12);
  unsigned cap = cfg.get<unsigned>("spectral_cap", 40);
  unsigned threads = cfg.get<unsigned>("threads", 1);
  std::vector<PipelineReport> reports(seeds);
  parallel_for(seeds, threads, [&](unsigned s) {
    reports[s] = sn_pipeline(n, seed ^ (0x9e3779b97f4a7c15ULL * (s + 1)),
                             max_len, cap);
  });
  sink.csv_header = "seed,word_found,word_length,within_budget,class_rho";
  unsigned good = 0;
  for (unsigned s = 0; s < seeds; ++s) {
    const auto& rep = reports[s];
    if (rep.word_found && rep.within_budget) ++good;
    nlohmann::json line = nlohmann::json::parse(rep.to_json());
    line["seed"] = s;
    sink.jsonl.push_back(line.dump());
    std::ostringstream row;
    row << s << "," << rep.word_found << "," << rep.three_cycle_word_length
        << "," << rep.within_budget << "," << rep.class_rho;
    sink.csv_rows.push_back(row.str());
  }
  std::ostringstream row;
  row << "summary," << good << "/" << seeds << ",,,";
  sink.csv_rows.push_back(row.str());
}

void run_diameter_bfs(const ExperimentConfig& cfg, Sink& sink) {
  auto desc = parse_group(cfg.require<std::string>("group"));
  unsigned k = cfg.get<unsigned>("generators", 2);
  unsigned seeds = cfg.get<unsigned>("seeds", 3);
  u64 seed = cfg.get<u64>("seed", 0);
  sink.csv_header = "seed,generates,reached,diameter";
  for (unsigned s = 0; s < seeds; ++s) {
    Rng rng = seed_stream(seed, s);
    std::vector<MatGF> gens;
    for (unsigned i = 0; i < k; ++i) gens.push_back(sample_uniform(desc, rng));
    auto rep = cayley_diameter_bfs(desc, gens);
    nlohmann::json line{{"seed", s},
                        {"generates", rep.generates},
                        {"reached", rep.reached},
                        {"diameter", rep.diameter}};
    sink.jsonl.push_back(line.dump());
    std::ostringstream row;
    row << s << "," << rep.generates << "," << rep.reached << ","
        << rep.diameter;
    sink.csv_rows.push_back(row.str());
  }
}

void run_witt_count_check(const ExperimentConfig& cfg, Sink& sink) {
  auto desc = parse_group(cfg.require<std::string>("group"));
  unsigned max_codim = cfg.get<unsigned>("max_codim", 2);
  const FormedSpace& sp = *desc.space();
  if (ipow128(sp.field()->q(), sp.dim()) > 6561)
    throw ClnError("witt-count-check: q^n must be <= 3^8");
  auto rep = verify_counting_bound(sp, max_codim);
  nlohmann::json line{{"space", sp.descriptor()},
                      {"max_codim", max_codim},
                      {"cosets", rep.cosets},
                      {"checks", rep.checks},
                      {"violations", rep.violations},
                      {"pass", rep.violations == 0}};
  sink.jsonl.push_back(line.dump());
  sink.csv_header = "space,max_codim,cosets,checks,violations,pass";
  std::ostringstream row;
  row << sp.descriptor() << "," << max_codim << "," << rep.cosets << ","
      << rep.checks << "," << rep.violations << ","
      << (rep.violations == 0 ? "1" : "0");
  sink.csv_rows.push_back(row.str());
}

}  // namespace

ExperimentResult run_experiment(const ExperimentConfig& cfg,
                                const std::string& output_root) {
  auto start = std::chrono::steady_clock::now();
  Sink sink;
  const std::string& id = cfg.experiment();
  if (id == "return-prob") run_return_prob(cfg, sink);
  else if (id == "lambda") run_lambda(cfg, sink);
  else if (id == "xwz-search") run_xwz_search(cfg, sink);
  else if (id == "cd-density") run_cd_density(cfg, sink);
  else if (id == "supp-tail") run_supp_tail(cfg, sink);
  else if (id == "sn-pipeline") run_sn_pipeline(cfg, sink);
  else if (id == "diameter-bfs") run_diameter_bfs(cfg, sink);
  else if (id == "witt-count-check") run_witt_count_check(cfg, sink);
  else throw ClnError("unknown experiment id: " + id);

  std::string root = output_root;
  if (root.empty()) root = cfg.get<std::string>("output", "");
  if (root.empty()) {
    const char* env = std::getenv("CLN_OUTPUT_ROOT");
    root = env ? env : ".";
  }
  std::filesystem::create_directories(root);
  ExperimentResult res;
  res.config_hash = cfg.hash();
  std::ostringstream base;
  base << root << "/" << id << "-" << std::hex << res.config_hash;
  res.jsonl_path = base.str() + ".jsonl";
  res.csv_path = base.str() + ".csv";
  res.meta_path = base.str() + ".meta.json";
  {
    std::ofstream out(res.jsonl_path);
    for (const auto& line : sink.jsonl) out << line << "\n";
  }
  {
    std::ofstream out(res.csv_path);
    out << sink.csv_header << "\n";
    for (const auto& row : sink.csv_rows) out << row << "\n";
  }
  auto end = std::chrono::steady_clock::now();
  res.wall_seconds = std::chrono::duration<double>(end - start).count();
  res.summary = nlohmann::json{{"experiment", id},
                               {"config_hash", res.config_hash},
                               {"jsonl", res.jsonl_path},
                               {"csv", res.csv_path},
                               {"lines", sink.jsonl.size()},
                               {"version", kVersionTag}};
  {
    nlohmann::json meta = res.summary;
    meta["wall_seconds"] = res.wall_seconds;
    meta["config"] = cfg.raw();
    std::ofstream out(res.meta_path);
    out << meta.dump(2) << "\n";
  }
  return res;
}

}  // namespace cln
