// Command-line front end: gen, run, batch, report, make-tn, validate-tn.

#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>
#include <json.hpp>

#include "htnagent/agent_loop.hpp"
#include "htnagent/domain.hpp"
#include "htnagent/errors.hpp"
#include "htnagent/harness.hpp"
#include "htnagent/llm_gateway.hpp"
#include "htnagent/report.hpp"
#include "htnagent/text.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace htnagent;

namespace {

struct DomainArgs {
  std::string domain = "blocksworld";
  DomainParams params;
  std::uint64_t seed = 0;

  void add(CLI::App* app) {
    app->add_option("-d,--domain", domain, "blocksworld|unit-movement|recipe-generator (bw|um|rg)");
    app->add_option("-b,--blocks", params.b, "blocks (blocks world)");
    app->add_option("--height", params.h, "goal stack height (blocks world)");
    app->add_option("-n,--units", params.n, "units per group (unit movement)");
    app->add_option("-k,--required", params.k, "units required per covered neighbor (unit movement)");
    app->add_option("--distractors", params.distractors, "extra ingredients (recipe generator)");
    app->add_flag("--teleport", params.teleport, "allow non-adjacent unit moves");
    app->add_option("--seed", seed, "instance seed");
  }

  DomainKind kind() const {
    auto k = parse_domain(domain);
    if (!k) throw ConfigError("unknown domain: " + domain);
    return *k;
  }
};

json read_json(const std::string& path) {
  return json::parse(text::read_file(path));
}

int cmd_gen(const DomainArgs& d, const std::string& out) {
  const DomainInstance inst = make_instance(d.kind(), d.params, d.seed);
  if (out.empty()) {
    std::cout << inst.request;
    return 0;
  }
  fs::create_directories(out);
  for (const auto& f : inst.manifest()) {
    const fs::path p = fs::path(out) / f.path;
    fs::create_directories(p.parent_path());
    text::write_file(p.string(), f.content);
  }
  text::write_file((fs::path(out) / "instance.json").string(), inst.describe().dump(2) + "\n");
  text::write_file((fs::path(out) / "oracle_answer.txt").string(), inst.oracle_answer());
  std::cout << "wrote " << out << "\n";
  return 0;
}

int cmd_run(const DomainArgs& d, const std::string& config_path, const std::string& condition,
            const std::string& transcript_path, bool keep_workspace, bool step_clock) {
  json cfg_json = config_path.empty() ? json::object() : read_json(config_path);
  cfg_json["domain"] = d.domain;
  const BatchSpec spec = BatchSpec::from_json(cfg_json);
  auto cond = parse_condition(condition);
  if (!cond) throw ConfigError("unknown condition: " + condition);

  const DomainInstance inst = make_instance(spec.domain, d.params, d.seed);
  const json verifier_cfg = spec.verifier.is_null()
                                ? (spec.actor.value("kind", std::string()) == "http" ? spec.actor
                                                                                      : json{{"kind", "pass"}})
                                : spec.verifier;
  auto actor = make_episode_backend(spec.actor, inst);
  auto verifier = make_episode_backend(verifier_cfg, inst);
  const MethodLibrary lib =
      library_for(spec.domain, *cond, spec.llm_tn_file, spec.llm_tn_order, actor.get());
  EpisodeConfig cfg = make_episode_config(inst, *cond, lib, *actor, *verifier, spec.reward,
                                          spec.solver, spec.read_copies_to_notes, step_clock);
  cfg.env_options.keep_workspace = keep_workspace;
  const EpisodeResult r = run_episode(cfg);

  json out{{"success", r.success},
           {"verified_complete", r.verified_complete},
           {"checker_accepted", r.checker_accepted ? json(*r.checker_accepted) : json(nullptr)},
           {"check_reason", r.check_reason},
           {"termination", termination_name(r.termination)},
           {"iterations", r.iterations},
           {"reward", cumulative_reward(r, spec.reward)},
           {"wall_times", to_json(r.wall_times)},
           {"command_log", r.command_log},
           {"completed_tasks", r.completed_tasks},
           {"final_answer", r.final_answer},
           {"error", r.error}};
  if (!transcript_path.empty()) {
    json t = json::array();
    for (const auto& e : r.transcript) t.push_back(to_json(e));
    text::write_file(transcript_path, json{{"result", out}, {"instance", inst.describe()},
                                           {"transcript", t}, {"final_workspace", r.final_workspace}}
                                          .dump(2) + "\n");
  }
  std::cout << out.dump(2) << "\n";
  return r.termination == Termination::InfrastructureError ? 2 : 0;
}

int cmd_batch(const std::string& spec_path, const std::string& out, int workers, bool no_resume) {
  BatchSpec spec = BatchSpec::from_json(read_json(spec_path));
  if (workers > 0) spec.workers = workers;
  BatchRunOptions opts;
  opts.out_dir = out;
  opts.resume = !no_resume;
  opts.on_record = [](const EpisodeRecord& r) {
    std::cerr << r.key() << " " << termination_name(r.termination) << " success=" << r.success
              << " iterations=" << r.iterations << "\n";
  };
  const BatchResult result = run_batch(spec, opts);
  emit_report(result, out);
  std::cout << summary_csv(result);
  return 0;
}

int cmd_report(const std::string& dir, const std::string& out) {
  const BatchResult result = load_batch_dir(dir);
  for (const auto& p : emit_report(result, out.empty() ? dir : out)) std::cout << p.string() << "\n";
  return 0;
}

int cmd_make_tn(const std::string& domain, const std::string& spec_file,
                const std::string& config_path, const std::string& out, int retries,
                bool descending) {
  std::string spec_text;
  if (!spec_file.empty()) {
    spec_text = text::read_file(spec_file);
  } else {
    auto k = parse_domain(domain);
    if (!k) throw ConfigError("unknown domain: " + domain);
    spec_text = std::string(problem_spec(*k));
  }
  json backend_cfg = config_path.empty() ? json{{"kind", "http"}} : read_json(config_path);
  if (backend_cfg.contains("actor")) backend_cfg = backend_cfg["actor"];
  auto backend = make_backend(backend_cfg);
  NetworkGenerationOptions opts;
  opts.retries = retries;
  opts.order = descending ? SubtaskOrder::Descending : SubtaskOrder::Ascending;
  const MethodLibrary lib = generate_task_network(*backend, spec_text, opts);
  const std::string dumped = dump_method_library(lib);
  if (out.empty()) {
    std::cout << dumped;
  } else {
    text::write_file(out, dumped);
    std::cout << "wrote " << lib.size() << " methods to " << out << "\n";
  }
  return 0;
}

int cmd_validate(const std::string& file, const std::string& domain, bool descending) {
  const MethodLibrary lib =
      load_method_library_file(file, descending ? SubtaskOrder::Descending : SubtaskOrder::Ascending);
  std::optional<std::set<std::string>> known;
  if (!domain.empty()) {
    auto k = parse_domain(domain);
    if (!k) throw ConfigError("unknown domain: " + domain);
    known = workspace_paths(*k);
  }
  const ValidationReport report = validate_library(lib, known);
  std::cout << lib.size() << " methods\n";
  for (const auto& m : report.messages()) std::cout << m << "\n";
  if (report.messages().empty()) std::cout << "ok\n";
  return report.has_errors() ? 1 : 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Task-network guided LLM agent: instances, episodes, batches and reports"};
  app.require_subcommand(1);

  DomainArgs gen_args;
  std::string gen_out;
  auto* gen = app.add_subcommand("gen", "Generate an instance workspace");
  gen_args.add(gen);
  gen->add_option("-o,--out", gen_out, "directory for the workspace files (stdout request if empty)");

  DomainArgs run_args;
  std::string run_config, run_condition = "human-tn", run_transcript;
  bool keep_workspace = false, step_clock = false;
  auto* run = app.add_subcommand("run", "Run one episode and print its result");
  run_args.add(run);
  run->add_option("-c,--config", run_config, "JSON config (actor, verifier, horizon, reward, solver)");
  run->add_option("--condition", run_condition, "human-tn|llm-tn|no-tn");
  run->add_option("-t,--transcript", run_transcript, "write the full transcript here");
  run->add_flag("--keep-workspace", keep_workspace, "leave the episode directory on disk");
  run->add_flag("--step-clock", step_clock, "deterministic timings");

  std::string batch_spec, batch_out;
  int batch_workers = 0;
  bool no_resume = false;
  auto* batch = app.add_subcommand("batch", "Run a batch spec and write records and reports");
  batch->add_option("-s,--spec", batch_spec, "batch spec JSON")->required();
  batch->add_option("-o,--out", batch_out, "output directory")->required();
  batch->add_option("-w,--workers", batch_workers, "parallel episodes (overrides the spec)");
  batch->add_flag("--no-resume", no_resume, "discard earlier records in the output directory");

  std::string report_dir, report_out;
  auto* report = app.add_subcommand("report", "Rebuild tables and charts from a batch directory");
  report->add_option("dir", report_dir, "batch output directory")->required();
  report->add_option("-o,--out", report_out, "write reports here instead");

  std::string tn_domain = "blocksworld", tn_spec, tn_config, tn_out;
  int tn_retries = 2;
  bool tn_desc = false;
  auto* make_tn = app.add_subcommand("make-tn", "Generate a task network with a chat backend");
  make_tn->add_option("-d,--domain", tn_domain, "domain whose problem specification is used");
  make_tn->add_option("--spec-file", tn_spec, "problem specification file instead of a domain");
  make_tn->add_option("-c,--config", tn_config, "backend JSON (or a config with an \"actor\" entry)");
  make_tn->add_option("-o,--out", tn_out, "output file (stdout if empty)");
  make_tn->add_option("--retries", tn_retries, "extra attempts after an invalid reply");
  make_tn->add_flag("--descending", tn_desc, "subtaskN keys run from highest to lowest");

  std::string val_file, val_domain;
  bool val_desc = false;
  auto* validate = app.add_subcommand("validate-tn", "Lint a task network file");
  validate->add_option("file", val_file, "network JSON")->required();
  validate->add_option("-d,--domain", val_domain, "check effect files against this domain's workspace");
  validate->add_flag("--descending", val_desc, "subtaskN keys run from highest to lowest");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*gen) return cmd_gen(gen_args, gen_out);
    if (*run) {
      return cmd_run(run_args, run_config, run_condition, run_transcript, keep_workspace, step_clock);
    }
    if (*batch) return cmd_batch(batch_spec, batch_out, batch_workers, no_resume);
    if (*report) return cmd_report(report_dir, report_out);
    if (*make_tn) return cmd_make_tn(tn_domain, tn_spec, tn_config, tn_out, tn_retries, tn_desc);
    if (*validate) return cmd_validate(val_file, val_domain, val_desc);
  } catch (const htnagent::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const nlohmann::json::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
