#include "htnagent/harness.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <fstream>
#include <map>
#include <mutex>
#include <set>
#include <thread>

#include "htnagent/errors.hpp"
#include "htnagent/rng.hpp"
#include "htnagent/text.hpp"

namespace htnagent {

using nlohmann::json;
namespace fs = std::filesystem;

Interval wilson_interval(long successes, long trials, double z) {
  if (trials < 1 || successes < 0 || successes > trials || !(z > 0)) {
    throw InvalidArgument("wilson_interval: need 0 <= successes <= trials, trials >= 1, z > 0");
  }
  const double n = static_cast<double>(trials);
  const double p = static_cast<double>(successes) / n;
  const double z2 = z * z;
  const double denom = 1.0 + z2 / n;
  const double center = (p + z2 / (2.0 * n)) / denom;
  const double half = z * std::sqrt(p * (1.0 - p) / n + z2 / (4.0 * n * n)) / denom;
  Interval iv{std::clamp(center - half, 0.0, 1.0), std::clamp(center + half, 0.0, 1.0)};
  // The bounds are exact at the extremes; rounding must not move them.
  if (successes == 0) iv.lo = 0.0;
  if (successes == trials) iv.hi = 1.0;
  return iv;
}

BatchSpec BatchSpec::from_json(const json& j) {
  BatchSpec s;
  auto domain = parse_domain(j.value("domain", std::string("blocksworld")));
  if (!domain) throw ConfigError("unknown domain: " + j.value("domain", std::string()));
  s.domain = *domain;
  if (auto it = j.find("cells"); it != j.end()) {
    for (const auto& c : *it) s.cells.push_back(DomainParams::from_json(c));
  }
  if (auto it = j.find("conditions"); it != j.end()) {
    for (const auto& c : *it) {
      auto cond = parse_condition(c.get<std::string>());
      if (!cond) throw ConfigError("unknown condition: " + c.get<std::string>());
      if (std::find(s.conditions.begin(), s.conditions.end(), *cond) == s.conditions.end()) {
        s.conditions.push_back(*cond);
      }
    }
  } else {
    s.conditions = {Condition::HumanTn, Condition::NoTn};
  }
  s.trials = j.value("trials", 0);
  s.seed = j.value("seed", std::uint64_t{0});
  s.workers = j.value("workers", 1);
  if (auto it = j.find("reward"); it != j.end()) {
    s.reward.r_success = it->value("r_success", s.reward.r_success);
    s.reward.r_step = it->value("r_step", s.reward.r_step);
  }
  s.reward.horizon = j.value("horizon", s.reward.horizon);
  if (auto it = j.find("actor"); it != j.end()) s.actor = *it;
  if (auto it = j.find("verifier"); it != j.end()) s.verifier = *it;
  if (auto it = j.find("solver"); it != j.end()) {
    if (auto i = it->find("interpreter"); i != it->end()) {
      s.solver.interpreter = i->get<std::vector<std::string>>();
    }
    s.solver.timeout_s = it->value("timeout_s", s.solver.timeout_s);
    s.solver.max_output_bytes = it->value("max_output_bytes", s.solver.max_output_bytes);
  }
  s.read_copies_to_notes = j.value("read_copies_to_notes", false);
  s.clock = j.value("clock", std::string("steady"));
  if (auto it = j.find("llm_tn_file"); it != j.end() && it->is_string()) {
    s.llm_tn_file = it->get<std::string>();
  }
  if (j.value("llm_tn_order", std::string("ascending")) == "descending") {
    s.llm_tn_order = SubtaskOrder::Descending;
  }
  s.save_transcripts = j.value("save_transcripts", false);

  if (s.trials < 0) throw ConfigError("trials must be non-negative");
  if (s.workers < 1) throw ConfigError("workers must be at least 1");
  if (s.clock != "steady" && s.clock != "step") throw ConfigError("clock must be steady or step");
  try {
    s.reward.validate();
  } catch (const InvalidArgument& e) {
    throw ConfigError(e.what());
  }
  return s;
}

json BatchSpec::to_json() const {
  json cells_json = json::array();
  for (const auto& c : cells) cells_json.push_back(c.to_json(domain));
  json conds = json::array();
  for (auto c : conditions) conds.push_back(condition_name(c));
  json j{{"domain", domain_name(domain)},
         {"cells", cells_json},
         {"conditions", conds},
         {"trials", trials},
         {"seed", seed},
         {"workers", workers},
         {"reward", {{"r_success", reward.r_success}, {"r_step", reward.r_step}}},
         {"horizon", reward.horizon},
         {"actor", actor},
         {"verifier", verifier},
         {"solver",
          {{"interpreter", solver.interpreter},
           {"timeout_s", solver.timeout_s},
           {"max_output_bytes", solver.max_output_bytes}}},
         {"read_copies_to_notes", read_copies_to_notes},
         {"clock", clock},
         {"llm_tn_order", llm_tn_order == SubtaskOrder::Ascending ? "ascending" : "descending"},
         {"save_transcripts", save_transcripts}};
  if (llm_tn_file) j["llm_tn_file"] = *llm_tn_file;
  return j;
}

std::string EpisodeRecord::key() const {
  return cell_label + "/" + std::string(condition_name(condition)) + "/" + std::to_string(trial);
}

json EpisodeRecord::to_json() const {
  json j{{"cell", cell},
         {"cell_label", cell_label},
         {"condition", condition_name(condition)},
         {"trial", trial},
         {"seed", seed},
         {"instance_seed", instance_seed},
         {"success", success},
         {"verified_complete", verified_complete},
         {"check_reason", check_reason},
         {"termination", termination_name(termination)},
         {"iterations", iterations},
         {"reward", reward},
         {"wall_times", htnagent::to_json(wall_times)},
         {"command_log", command_log},
         {"completed_tasks", completed_tasks},
         {"final_answer", final_answer},
         {"error", error},
         {"max_stack_size", max_stack_size},
         {"actor_calls", actor_calls},
         {"verifier_calls", verifier_calls}};
  j["checker_accepted"] = checker_accepted ? json(*checker_accepted) : json(nullptr);
  return j;
}

EpisodeRecord EpisodeRecord::from_json(const json& j) {
  EpisodeRecord r;
  r.cell = j.at("cell").get<std::size_t>();
  r.cell_label = j.at("cell_label").get<std::string>();
  auto cond = parse_condition(j.at("condition").get<std::string>());
  if (!cond) throw InvalidArgument("record has unknown condition");
  r.condition = *cond;
  r.trial = j.at("trial").get<int>();
  r.seed = j.value("seed", std::uint64_t{0});
  r.instance_seed = j.value("instance_seed", std::uint64_t{0});
  r.success = j.at("success").get<bool>();
  r.verified_complete = j.value("verified_complete", false);
  if (auto it = j.find("checker_accepted"); it != j.end() && it->is_boolean()) {
    r.checker_accepted = it->get<bool>();
  }
  r.check_reason = j.value("check_reason", std::string());
  auto term = parse_termination(j.at("termination").get<std::string>());
  if (!term) throw InvalidArgument("record has unknown termination");
  r.termination = *term;
  r.iterations = j.at("iterations").get<int>();
  r.reward = j.value("reward", 0.0);
  if (auto it = j.find("wall_times"); it != j.end()) r.wall_times = phase_times_from_json(*it);
  r.command_log = j.value("command_log", std::vector<std::string>{});
  r.completed_tasks = j.value("completed_tasks", std::vector<std::string>{});
  r.final_answer = j.value("final_answer", std::string());
  r.error = j.value("error", std::string());
  r.max_stack_size = j.value("max_stack_size", std::size_t{0});
  r.actor_calls = j.value("actor_calls", std::size_t{0});
  r.verifier_calls = j.value("verifier_calls", std::size_t{0});
  return r;
}

namespace {

json interval_json(const std::optional<Interval>& iv) {
  if (!iv) return nullptr;
  return {{"lo", iv->lo}, {"hi", iv->hi}};
}

std::size_t condition_rank(const std::vector<Condition>& order, Condition c) {
  auto it = std::find(order.begin(), order.end(), c);
  return static_cast<std::size_t>(it - order.begin());
}

}  // namespace

json BatchResult::to_json() const {
  json conds = json::array();
  for (auto c : condition_order) conds.push_back(condition_name(c));
  json cells_json = json::array();
  for (const auto& c : cells) {
    cells_json.push_back({{"cell", c.cell},
                          {"label", c.label},
                          {"condition", condition_name(c.condition)},
                          {"trials", c.trials},
                          {"successes", c.successes},
                          {"timeouts", c.timeouts},
                          {"infra_errors", c.infra_errors},
                          {"rate", c.rate ? json(*c.rate) : json(nullptr)},
                          {"interval", interval_json(c.interval)},
                          {"mean_iterations", c.mean_iterations},
                          {"mean_wall_times", htnagent::to_json(c.mean_wall_times)}});
  }
  json pooled_json = json::array();
  for (const auto& p : pooled) {
    pooled_json.push_back({{"condition", condition_name(p.condition)},
                           {"episodes", p.episodes},
                           {"mean_wall_times", htnagent::to_json(p.mean_wall_times)}});
  }
  json recs = json::array();
  for (const auto& r : records) recs.push_back(r.to_json());
  return {{"domain", domain_name(domain)},
          {"conditions", conds},
          {"cells", cells_json},
          {"pooled_runtime", pooled_json},
          {"records", recs}};
}

BatchResult aggregate(DomainKind domain, const std::vector<Condition>& condition_order,
                      std::vector<EpisodeRecord> records, double z) {
  BatchResult out;
  out.domain = domain;
  out.condition_order = condition_order;
  for (const auto& r : records) {
    if (std::find(out.condition_order.begin(), out.condition_order.end(), r.condition) ==
        out.condition_order.end()) {
      out.condition_order.push_back(r.condition);
    }
  }
  const auto& order = out.condition_order;
  std::sort(records.begin(), records.end(), [&](const EpisodeRecord& a, const EpisodeRecord& b) {
    const auto ka = std::make_tuple(a.cell, condition_rank(order, a.condition), a.trial);
    const auto kb = std::make_tuple(b.cell, condition_rank(order, b.condition), b.trial);
    return ka < kb;
  });

  auto add = [](PhaseTimes& acc, const PhaseTimes& t) {
    acc.action_llm += t.action_llm;
    acc.verify_llm += t.verify_llm;
    acc.environment += t.environment;
    acc.solver += t.solver;
  };
  auto scale = [](PhaseTimes& acc, int n) {
    if (n == 0) return;
    const double d = static_cast<double>(n);
    acc.action_llm /= d;
    acc.verify_llm /= d;
    acc.environment /= d;
    acc.solver /= d;
  };

  std::map<Condition, PooledRuntime> pooled;
  for (std::size_t i = 0; i < records.size();) {
    std::size_t j = i;
    CellResult cell;
    cell.cell = records[i].cell;
    cell.label = records[i].cell_label;
    cell.condition = records[i].condition;
    long iterations = 0;
    while (j < records.size() && records[j].cell == cell.cell &&
           records[j].condition == cell.condition) {
      const auto& r = records[j++];
      if (r.termination == Termination::InfrastructureError) {
        ++cell.infra_errors;
        continue;
      }
      ++cell.trials;
      if (r.success) ++cell.successes;
      if (r.termination == Termination::HorizonExceeded) ++cell.timeouts;
      iterations += r.iterations;
      add(cell.mean_wall_times, r.wall_times);
      auto& p = pooled[r.condition];
      p.condition = r.condition;
      ++p.episodes;
      add(p.mean_wall_times, r.wall_times);
    }
    if (cell.trials > 0) {
      cell.rate = static_cast<double>(cell.successes) / static_cast<double>(cell.trials);
      cell.interval = wilson_interval(cell.successes, cell.trials, z);
      cell.mean_iterations = static_cast<double>(iterations) / static_cast<double>(cell.trials);
      scale(cell.mean_wall_times, cell.trials);
    }
    out.cells.push_back(std::move(cell));
    i = j;
  }
  for (auto c : order) {
    auto it = pooled.find(c);
    if (it == pooled.end()) continue;
    scale(it->second.mean_wall_times, it->second.episodes);
    out.pooled.push_back(it->second);
  }
  out.records = std::move(records);
  return out;
}

std::uint64_t episode_seed(std::uint64_t batch_seed, std::string_view cell_label,
                           Condition condition, int trial) {
  std::uint64_t h = hash_combine(batch_seed, hash_string(cell_label));
  h = hash_combine(h, hash_string(condition_name(condition)));
  return hash_combine(h, static_cast<std::uint64_t>(trial));
}

std::uint64_t instance_seed(std::uint64_t batch_seed, std::string_view cell_label, int trial) {
  std::uint64_t h = hash_combine(batch_seed, hash_string(cell_label));
  return hash_combine(h, static_cast<std::uint64_t>(trial));
}

std::vector<EpisodeRecord> read_records(const fs::path& jsonl) {
  std::vector<EpisodeRecord> out;
  std::ifstream in(jsonl);
  if (!in) return out;
  std::string line;
  while (std::getline(in, line)) {
    if (text::trim(line).empty()) continue;
    const json j = json::parse(line, nullptr, false);
    // A torn final line from an interrupted run is dropped.
    if (j.is_discarded()) continue;
    out.push_back(EpisodeRecord::from_json(j));
  }
  return out;
}

namespace {

std::string action_json(const Action& a) {
  return format_agent_response({"", "", a});
}

}  // namespace

std::unique_ptr<Backend> make_episode_backend(const json& cfg, const DomainInstance& instance) {
  const std::string kind = cfg.value("kind", std::string());
  if (kind == "oracle") {
    const std::string write = action_json(Action::write(std::string(paths::kAnswer), instance.oracle_answer()));
    const std::string verify = action_json(Action::verify());
    auto calls = std::make_shared<std::size_t>(0);
    return std::make_unique<FunctionBackend>(
        [write, verify, calls](const std::string&) { return (*calls)++ % 2 == 0 ? write : verify; },
        "oracle");
  }
  if (kind == "loop") {
    const std::string read = action_json(Action::read(std::string(paths::kRequest)));
    return std::make_unique<FunctionBackend>([read](const std::string&) { return read; }, "loop");
  }
  if (kind == "pass" || kind == "fail") {
    const std::string reply = kind == "pass" ? "ANALYSIS: ok\nPASS: TRUE" : "ANALYSIS: no\nPASS: FALSE";
    return std::make_unique<FunctionBackend>([reply](const std::string&) { return reply; }, kind);
  }
  return make_backend(cfg);
}

MethodLibrary library_for(DomainKind domain, Condition condition,
                          const std::optional<std::string>& llm_tn_file, SubtaskOrder order,
                          Backend* generator) {
  switch (condition) {
    case Condition::HumanTn: return human_network(domain);
    case Condition::NoTn: return make_no_tn_library(human_network(domain));
    case Condition::LlmTn: {
      if (llm_tn_file) return load_method_library_file(*llm_tn_file, order);
      if (auto lib = bundled_llm_network(domain)) {
        return order == SubtaskOrder::Ascending ? *lib
                                                : load_method_library(dump_method_library(*lib), order);
      }
      if (generator == nullptr) {
        throw ConfigError("llm-tn for " + std::string(domain_name(domain)) +
                          " needs llm_tn_file or an http actor to generate a network");
      }
      NetworkGenerationOptions opts;
      opts.order = order;
      return generate_task_network(*generator, problem_spec(domain), opts);
    }
  }
  return human_network(domain);
}

EpisodeConfig make_episode_config(const DomainInstance& instance, Condition condition,
                                  const MethodLibrary& library, Backend& actor, Backend& verifier,
                                  const RewardConfig& reward, const SolverConfig& solver,
                                  bool read_copies_to_notes, bool step_clock) {
  EpisodeConfig cfg;
  cfg.reward = reward;
  cfg.condition = condition;
  cfg.library = library;
  cfg.actor = &actor;
  cfg.verifier = &verifier;
  cfg.manifest = instance.manifest();
  cfg.env_options.solver = solver;
  cfg.env_options.read_copies_to_notes = read_copies_to_notes;
  cfg.seed = instance.seed;
  if (step_clock) cfg.clock = make_step_clock();
  cfg.answer_checker = [&instance](const std::string& answer) { return instance.check(answer); };
  return cfg;
}

namespace {

struct Job {
  std::size_t cell;
  Condition condition;
  int trial;
};

EpisodeRecord to_record(const Job& job, const std::string& label, std::uint64_t seed,
                        std::uint64_t inst_seed, const EpisodeResult& r, const RewardConfig& reward) {
  EpisodeRecord rec;
  rec.cell = job.cell;
  rec.cell_label = label;
  rec.condition = job.condition;
  rec.trial = job.trial;
  rec.seed = seed;
  rec.instance_seed = inst_seed;
  rec.success = r.success;
  rec.verified_complete = r.verified_complete;
  rec.checker_accepted = r.checker_accepted;
  rec.check_reason = r.check_reason;
  rec.termination = r.termination;
  rec.iterations = r.iterations;
  rec.reward = cumulative_reward(r, reward);
  rec.wall_times = r.wall_times;
  rec.command_log = r.command_log;
  rec.completed_tasks = r.completed_tasks;
  rec.final_answer = r.final_answer;
  rec.error = r.error;
  rec.max_stack_size = r.max_stack_size;
  rec.actor_calls = r.actor_calls;
  rec.verifier_calls = r.verifier_calls;
  return rec;
}

json default_verifier(const json& actor) {
  if (actor.value("kind", std::string()) == "http") return actor;
  return {{"kind", "pass"}};
}

}  // namespace

BatchResult run_batch(const BatchSpec& spec, const BatchRunOptions& opts) {
  std::vector<std::string> labels;
  for (const auto& c : spec.cells) labels.push_back(c.label(spec.domain));

  std::map<std::string, EpisodeRecord> done;
  fs::path records_path;
  if (opts.out_dir) {
    fs::create_directories(*opts.out_dir);
    records_path = *opts.out_dir / "records.jsonl";
    if (opts.resume) {
      for (auto& r : read_records(records_path)) {
        // Infrastructure failures are retried on resume.
        if (r.termination != Termination::InfrastructureError) done[r.key()] = std::move(r);
      }
    } else {
      std::ofstream(records_path, std::ios::trunc);
    }
    text::write_file((*opts.out_dir / "spec.json").string(), spec.to_json().dump(2) + "\n");
    if (spec.save_transcripts) fs::create_directories(*opts.out_dir / "episodes");
  }

  std::vector<Job> jobs;
  std::vector<EpisodeRecord> records;
  for (std::size_t c = 0; c < spec.cells.size(); ++c) {
    for (auto cond : spec.conditions) {
      for (int t = 0; t < spec.trials; ++t) {
        EpisodeRecord probe;
        probe.cell_label = labels[c];
        probe.condition = cond;
        probe.trial = t;
        if (auto it = done.find(probe.key()); it != done.end()) {
          it->second.cell = c;
          records.push_back(it->second);
        } else {
          jobs.push_back({c, cond, t});
        }
      }
    }
  }

  const bool http_actor = spec.actor.value("kind", std::string()) == "http";
  const json verifier_cfg = spec.verifier.is_null() ? default_verifier(spec.actor) : spec.verifier;
  const bool http_verifier = verifier_cfg.value("kind", std::string()) == "http";
  std::unique_ptr<Backend> shared_actor = http_actor ? make_backend(spec.actor) : nullptr;
  std::unique_ptr<Backend> shared_verifier = http_verifier ? make_backend(verifier_cfg) : nullptr;

  std::map<Condition, MethodLibrary> libraries;
  for (auto cond : spec.conditions) {
    libraries.emplace(cond, library_for(spec.domain, cond, spec.llm_tn_file, spec.llm_tn_order,
                                        shared_actor.get()));
  }

  std::vector<std::optional<EpisodeRecord>> slots(jobs.size());
  std::mutex io_mu;
  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;

  auto run_job = [&](std::size_t idx) {
    const Job& job = jobs[idx];
    const std::string& label = labels[job.cell];
    const std::uint64_t seed = episode_seed(spec.seed, label, job.condition, job.trial);
    const std::uint64_t iseed = instance_seed(spec.seed, label, job.trial);
    const DomainInstance instance = make_instance(spec.domain, spec.cells[job.cell], iseed);

    std::unique_ptr<Backend> own_actor, own_verifier;
    Backend* actor = shared_actor.get();
    Backend* verifier = shared_verifier.get();
    if (!actor) {
      own_actor = make_episode_backend(spec.actor, instance);
      actor = own_actor.get();
    }
    if (!verifier) {
      own_verifier = make_episode_backend(verifier_cfg, instance);
      verifier = own_verifier.get();
    }
    EpisodeConfig cfg = make_episode_config(instance, job.condition, libraries.at(job.condition),
                                            *actor, *verifier, spec.reward, spec.solver,
                                            spec.read_copies_to_notes, spec.clock == "step");
    cfg.seed = seed;
    cfg.record_prompts = spec.save_transcripts;
    const EpisodeResult result = run_episode(cfg);
    EpisodeRecord rec = to_record(job, label, seed, iseed, result, spec.reward);

    std::lock_guard lock(io_mu);
    if (opts.out_dir) {
      std::ofstream(records_path, std::ios::app) << rec.to_json().dump() << "\n";
      if (spec.save_transcripts) {
        json t = json::array();
        for (const auto& e : result.transcript) t.push_back(to_json(e));
        std::string name = rec.key();
        std::replace(name.begin(), name.end(), '/', '_');
        std::replace(name.begin(), name.end(), ',', '_');
        std::replace(name.begin(), name.end(), '=', '-');
        text::write_file((*opts.out_dir / "episodes" / (name + ".json")).string(),
                         json{{"record", rec.to_json()}, {"instance", instance.describe()},
                              {"transcript", t}, {"final_workspace", result.final_workspace}}
                                 .dump(2));
      }
    }
    if (opts.on_record) opts.on_record(rec);
    slots[idx] = std::move(rec);
  };

  auto worker = [&] {
    for (;;) {
      const std::size_t idx = next.fetch_add(1);
      if (idx >= jobs.size()) return;
      try {
        run_job(idx);
      } catch (...) {
        std::lock_guard lock(io_mu);
        if (!failure) failure = std::current_exception();
        next = jobs.size();
        return;
      }
    }
  };

  const std::size_t nthreads =
      std::min<std::size_t>(static_cast<std::size_t>(spec.workers), std::max<std::size_t>(jobs.size(), 1));
  if (nthreads <= 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (std::size_t i = 0; i < nthreads; ++i) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
  }
  if (failure) std::rethrow_exception(failure);

  for (auto& s : slots) {
    if (s) records.push_back(std::move(*s));
  }
  BatchResult result = aggregate(spec.domain, spec.conditions, std::move(records));
  if (opts.out_dir) {
    text::write_file((*opts.out_dir / "batch_result.json").string(), result.to_json().dump(2) + "\n");
  }
  return result;
}

}  // namespace htnagent
