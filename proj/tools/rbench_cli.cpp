// rbench: command-line entry point.
//
// Exit codes: 0 success, 1 usage / IO / parse errors, 2 generation
// exhausted, 3 hazard during execution.

#include <csignal>
#include <cstdlib>
#include <iostream>
#include <pthread.h>
#include <thread>

#include <CLI11.hpp>

#include "rbench/rbench.hpp"
#include "rbench/service/http_api.hpp"

namespace fs = std::filesystem;
using namespace rbench;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitFailure = 1;
constexpr int kExitExhausted = 2;
constexpr int kExitHazard = 3;

struct Globals {
  std::string data_dir;
  bool quiet = false;
};

struct PolicyFlags {
  std::string variant = "size_based";
  double constant = 0.0;

  scoring::UebPolicy policy() const {
    if (variant == "size_based") return scoring::UebPolicy::size_based();
    if (constant <= 0.0) throw Error(ErrorCode::InvalidArgument, "--policy constant requires --ueb-constant > 0");
    return scoring::UebPolicy::constant(constant);
  }

  void add_to(CLI::App* cmd) {
    cmd->add_option("--policy", variant, "UEB policy")->check(CLI::IsMember({"size_based", "constant"}));
    cmd->add_option("--ueb-constant", constant, "UEB value in cm for --policy constant");
  }
};

struct TolFlags {
  scenegen::Tolerances tol;
  void add_to(CLI::App* cmd) {
    cmd->add_option("--clearance-tol", tol.clearance, "interpenetration tolerance (cm)")->check(CLI::NonNegativeNumber);
    cmd->add_option("--support-tol", tol.support, "resting-contact tolerance (cm)")->check(CLI::NonNegativeNumber);
  }
};

// ---- gen-tasks ----

struct GenTasksArgs {
  std::vector<std::string> templates;
  std::string db;
  std::string out;
  std::uint64_t seed = 0;
  std::vector<int> counts{1};
  double trial_fraction = 1.0;
  int max_rejections = 100;
  unsigned jobs = 1;
  TolFlags tol;
};

int cmd_gen_tasks(const GenTasksArgs& a, const Globals& g) {
  if (a.counts.size() != 1 && a.counts.size() != a.templates.size()) {
    throw Error(ErrorCode::InvalidArgument, "--count takes one value or one per template");
  }
  const ObjectDatabase db = load_database(a.db);
  std::vector<scenegen::BatchItem> items;
  for (std::size_t i = 0; i < a.templates.size(); ++i) {
    items.push_back({scenegen::load_template(a.templates[i]), a.counts.size() == 1 ? a.counts[0] : a.counts[i]});
  }
  scenegen::GenerationConfig cfg;
  cfg.seed = a.seed;
  cfg.max_rejections = a.max_rejections;
  cfg.tol = a.tol.tol;
  const auto set = scenegen::generate_batch(items, db, Workspace{}, cfg, a.trial_fraction, a.jobs);
  const fs::path out(a.out);
  for (const auto& t : set.tasks) write_json_file(out / "tasks" / (t.task.task_id + ".json"), task_to_json(t.task));
  write_json_file(out / "manifest.json", set.manifest());
  if (!g.quiet) std::cout << "generated " << set.tasks.size() << " tasks into " << out.string() << "\n";
  return kExitOk;
}

// ---- score ----

struct ScoreArgs {
  std::vector<std::string> tasks;
  std::vector<std::string> solutions;
  PolicyFlags policy;
  bool strict = false;
  bool baseline = false;
  std::string team = "team";
  std::string run_id = "run-1";
  std::string out;
};

int cmd_score(const ScoreArgs& a, const Globals& g) {
  if (a.tasks.size() != a.solutions.size()) {
    throw Error(ErrorCode::InvalidArgument, "--task and --solution must be given in pairs");
  }
  const auto policy = a.policy.policy();
  const auto mode = a.strict ? scoring::MissingObjects::Strict : scoring::MissingObjects::Lenient;
  std::vector<scoring::TaskScore> scores;
  double total_time = 0.0;
  double baseline_total = 0.0;
  scoring::GraspStats grasp;
  for (std::size_t i = 0; i < a.tasks.size(); ++i) {
    const Task task = load_task(a.tasks[i]);
    const Json sol = read_json_file(a.solutions[i]);
    SceneConfiguration solution;
    if (sol.contains("final")) {
      const auto report = harness::report_from_json(sol);
      solution = report.final;
      total_time += report.elapsed_s;
      grasp += {report.grasp_successes, report.grasp_attempts};
    } else {
      solution = config_from_json(sol);
    }
    auto score = scoring::evaluate_task(task, solution, policy, mode);
    baseline_total += scoring::baseline_error(task, policy);
    if (!g.quiet) {
      std::cout << "task " << score.task_id << "\n";
      for (const auto& [id, err] : score.per_object_error) std::cout << "  " << id << ": " << format_cm(err) << " cm\n";
      std::cout << "  capped " << score.capped_count << "\n";
      std::cout << "E = " << format_cm(score.task_error) << "\n";
    }
    scores.push_back(std::move(score));
  }
  const auto run = scoring::make_run_score(a.run_id, std::move(scores), total_time, grasp);
  if (!g.quiet && run.task_scores.size() > 1) std::cout << "average E = " << format_cm(run.average_error) << "\n";
  if (a.baseline) {
    const double base = baseline_total / static_cast<double>(a.tasks.size());
    std::cout << "baseline = " << format_cm(base) << "\n";
    std::cout << "improvement " << format_pct(scoring::improvement(run.average_error, base)) << "\n";
  }
  if (!a.out.empty()) {
    write_json_file(a.out, scoring::score_report_to_json({a.team, policy, run}));
  }
  return kExitOk;
}

// ---- run ----

struct RunArgs {
  std::string task;
  std::string script;
  std::string out;
  std::optional<std::uint64_t> noise_seed;
  std::optional<double> grasp_fail_prob;
  std::optional<double> place_jitter;
  double time_limit = 600.0;
  double action_cost = 15.0;
  bool wall_clock = false;
  TolFlags tol;
};

int cmd_run(const RunArgs& a, const Globals& g) {
  const Task task = load_task(a.task);
  const auto script = harness::load_script(a.script);
  harness::ExecutionConfig cfg;
  cfg.time_limit_s = a.time_limit;
  cfg.per_action_cost_s = a.action_cost;
  cfg.tol = a.tol.tol;
  cfg.time_source = a.wall_clock ? harness::TimeSource::WallClock : harness::TimeSource::PerActionCost;
  if (a.noise_seed || a.grasp_fail_prob || a.place_jitter) {
    cfg.noise = harness::Noise{a.grasp_fail_prob.value_or(0.0), a.place_jitter.value_or(0.0), a.noise_seed.value_or(0)};
  }
  const auto report = harness::execute(task, script, cfg);
  const Json j = harness::report_to_json(report);
  if (a.out.empty()) {
    std::cout << dump_json(j);
  } else {
    write_json_file(a.out, j);
  }
  if (!g.quiet) {
    std::cerr << "terminated: " << harness::to_string(report.terminated) << ", elapsed " << fixed(report.elapsed_s, 1)
              << " s, grasps " << report.grasp_successes << "/" << report.grasp_attempts << "\n";
  }
  return report.terminated == harness::Termination::Hazard ? kExitHazard : kExitOk;
}

// ---- plan ----

struct PlanArgs {
  std::string task;
  std::string out;
  TolFlags tol;
};

int cmd_plan(const PlanArgs& a, const Globals&) {
  const auto script = harness::make_reference_script(load_task(a.task), a.tol.tol);
  const Json j = harness::script_to_json(script);
  if (a.out.empty()) {
    std::cout << dump_json(j);
  } else {
    write_json_file(a.out, j);
  }
  return kExitOk;
}

// ---- rank ----

struct RankArgs {
  std::vector<std::string> reports;
  std::optional<double> baseline;
  std::vector<std::string> tasks;
  PolicyFlags policy;
  bool beat_baseline_only = false;
  std::string out;
};

int cmd_rank(const RankArgs& a, const Globals& g) {
  double baseline = 0.0;
  if (a.baseline) {
    baseline = *a.baseline;
  } else if (!a.tasks.empty()) {
    std::vector<Task> tasks;
    for (const auto& t : a.tasks) tasks.push_back(load_task(t));
    baseline = service::task_set_baseline(tasks, a.policy.policy());
  } else {
    throw Error(ErrorCode::InvalidArgument, "rank needs --baseline or --task files");
  }
  // Several reports of one team are runs of that team: keep the best.
  std::map<std::string, std::vector<scoring::RunScore>> runs;
  for (const auto& path : a.reports) {
    auto report = scoring::score_report_from_json(read_json_file(path));
    runs[report.team_id].push_back(std::move(report.run));
  }
  std::vector<std::pair<std::string, scoring::RunScore>> finals;
  for (const auto& [team, rs] : runs) finals.emplace_back(team, scoring::aggregate_best_of_runs(rs));
  auto inputs = scoring::rank_inputs(finals, baseline);
  if (a.beat_baseline_only) {
    std::erase_if(inputs, [](const scoring::RankInput& r) { return !(r.improvement_pct > 0.0); });
  }
  const auto ranked = scoring::rank(std::move(inputs));
  if (!g.quiet) std::cout << scoring::leaderboard_table(ranked, baseline);
  if (!a.out.empty()) write_text_file(a.out, scoring::leaderboard_csv(ranked, baseline));
  return kExitOk;
}

// ---- validate-task ----

struct ValidateArgs {
  std::vector<std::string> tasks;
  std::string db;
  TolFlags tol;
};

int cmd_validate(const ValidateArgs& a, const Globals& g) {
  std::optional<ObjectDatabase> db;
  if (!a.db.empty()) db = load_database(a.db);
  bool all_valid = true;
  for (const auto& path : a.tasks) {
    const Task task = load_task(path);
    std::vector<std::string> problems;
    if (db) {
      for (const auto& o : task.objects) {
        const ObjectModel* m = db->find(o.model.model_id);
        if (!m) {
          problems.push_back("unknown model " + o.model.model_id);
        } else if (!(m->bbox == o.model.bbox)) {
          problems.push_back("bbox of " + o.instance_id + " differs from the database");
        }
      }
    }
    for (const auto& [name, config] : {std::pair{"initial", &task.initial}, std::pair{"target", &task.target}}) {
      const auto r = scenegen::validate_scene(*config, task, a.tol.tol);
      for (const auto& v : r.violations) {
        std::string s = std::string(name) + ": " + std::string(scenegen::to_string(v.kind));
        for (const auto& id : v.instances) s += " " + id;
        problems.push_back(s);
      }
    }
    all_valid = all_valid && problems.empty();
    if (!g.quiet) {
      std::cout << task.task_id << ": " << (problems.empty() ? "VALID" : "INVALID") << "\n";
      for (const auto& p : problems) std::cout << "  " << p << "\n";
    }
  }
  return all_valid ? kExitOk : kExitFailure;
}

// ---- serve ----

struct ServeArgs {
  std::string bind;
  std::vector<std::string> contests;
  bool no_worker = false;
};

int cmd_serve(const ServeArgs& a, const Globals& g) {
  std::string data_dir = g.data_dir;
  if (data_dir.empty()) {
    const char* env = std::getenv("BENCH_DATA_DIR");
    data_dir = env ? env : "bench-data";
  }
  std::string bind = a.bind;
  if (bind.empty()) {
    const char* env = std::getenv("BENCH_BIND");
    bind = env ? env : "127.0.0.1:8080";
  }
  const auto colon = bind.rfind(':');
  if (colon == std::string::npos) throw Error(ErrorCode::InvalidArgument, "bind address must be host:port");
  const std::string host = bind.substr(0, colon);
  const int port = std::stoi(bind.substr(colon + 1));

  // Signals are taken synchronously by a dedicated thread.
  sigset_t signals;
  sigemptyset(&signals);
  sigaddset(&signals, SIGINT);
  sigaddset(&signals, SIGTERM);
  pthread_sigmask(SIG_BLOCK, &signals, nullptr);

  service::Service svc(data_dir);
  std::vector<fs::path> contest_files(a.contests.begin(), a.contests.end());
  if (fs::is_directory(fs::path(data_dir) / "contests")) {
    std::vector<fs::path> found;
    for (const auto& e : fs::directory_iterator(fs::path(data_dir) / "contests")) {
      if (e.path().extension() == ".json") found.push_back(e.path());
    }
    std::sort(found.begin(), found.end());
    contest_files.insert(contest_files.end(), found.begin(), found.end());
  }
  for (const auto& f : contest_files) svc.add_contest(service::load_contest(f));

  httplib::Server server;
  service::register_routes(server, svc);
  if (!server.bind_to_port(host, port)) {
    std::cerr << "error: cannot bind " << bind << "\n";
    return kExitFailure;
  }
  if (!a.no_worker) svc.start_worker();
  std::thread signal_thread([&] {
    int sig = 0;
    sigwait(&signals, &sig);
    server.stop();
  });
  if (!g.quiet) std::cerr << "listening on " << bind << " (data dir " << data_dir << ")" << std::endl;
  server.listen_after_bind();
  svc.shutdown();
  if (signal_thread.joinable()) {
    pthread_kill(signal_thread.native_handle(), SIGTERM);
    signal_thread.join();
  }
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Tabletop rearrangement benchmark: task generation, execution, scoring and contest service"};
  app.require_subcommand(1);
  app.set_config("--config", "", "read flag values from a TOML/INI file");
  Globals g;
  app.add_option("--data-dir", g.data_dir, "service data directory (default $BENCH_DATA_DIR)");
  app.add_flag("--quiet", g.quiet, "suppress informational output");

  GenTasksArgs gen;
  auto* gen_cmd = app.add_subcommand("gen-tasks", "generate tasks from scene-graph templates");
  gen_cmd->add_option("--template", gen.templates, "template file(s)")->required()->check(CLI::ExistingFile);
  gen_cmd->add_option("--db", gen.db, "object database file")->required()->check(CLI::ExistingFile);
  gen_cmd->add_option("--out", gen.out, "output directory")->required();
  gen_cmd->add_option("--seed", gen.seed, "base seed");
  gen_cmd->add_option("--count", gen.counts, "tasks per template (one value, or one per template)")
      ->check(CLI::NonNegativeNumber);
  gen_cmd->add_option("--trial-fraction", gen.trial_fraction, "fraction of tasks tagged trial")
      ->check(CLI::Range(0.0, 1.0));
  gen_cmd->add_option("--max-rejections", gen.max_rejections, "attempts per task")->check(CLI::PositiveNumber);
  gen_cmd->add_option("--jobs", gen.jobs, "worker threads")->check(CLI::PositiveNumber);
  gen.tol.add_to(gen_cmd);

  ScoreArgs score;
  auto* score_cmd = app.add_subcommand("score", "score solution scenes against task targets");
  score_cmd->add_option("--task", score.tasks, "task file(s)")->required()->check(CLI::ExistingFile);
  score_cmd->add_option("--solution", score.solutions, "scene configuration or execution report, one per task")
      ->required()
      ->check(CLI::ExistingFile);
  score.policy.add_to(score_cmd);
  score_cmd->add_flag("--strict", score.strict, "fail on objects missing from the solution");
  score_cmd->add_flag("--baseline", score.baseline, "print baseline error and improvement");
  score_cmd->add_option("--team", score.team, "team id written to the report");
  score_cmd->add_option("--run-id", score.run_id, "run id written to the report");
  score_cmd->add_option("--out", score.out, "score report output file");

  RunArgs run;
  auto* run_cmd = app.add_subcommand("run", "execute an action script in the kinematic world");
  run_cmd->add_option("--task", run.task, "task file")->required()->check(CLI::ExistingFile);
  run_cmd->add_option("--script", run.script, "action script file")->required()->check(CLI::ExistingFile);
  run_cmd->add_option("--out", run.out, "execution report output file (default stdout)");
  run_cmd->add_option("--noise-seed", run.noise_seed, "seed of the noise stream (enables noise)");
  run_cmd->add_option("--grasp-fail-prob", run.grasp_fail_prob, "probability that a grasp fails")
      ->check(CLI::Range(0.0, 1.0));
  run_cmd->add_option("--place-jitter", run.place_jitter, "placement jitter sigma (cm)")->check(CLI::NonNegativeNumber);
  run_cmd->add_option("--time-limit", run.time_limit, "time limit (s)")->check(CLI::PositiveNumber);
  run_cmd->add_option("--action-cost", run.action_cost, "simulated seconds per action")->check(CLI::NonNegativeNumber);
  run_cmd->add_flag("--wall-clock", run.wall_clock, "measure elapsed time with the wall clock");
  run.tol.add_to(run_cmd);

  PlanArgs plan;
  auto* plan_cmd = app.add_subcommand("plan", "write the reference pick-and-place script for a task");
  plan_cmd->add_option("--task", plan.task, "task file")->required()->check(CLI::ExistingFile);
  plan_cmd->add_option("--out", plan.out, "script output file (default stdout)");
  plan.tol.add_to(plan_cmd);

  RankArgs rank;
  auto* rank_cmd = app.add_subcommand("rank", "rank teams from score reports");
  rank_cmd->add_option("--report", rank.reports, "score report(s)")->required()->check(CLI::ExistingFile);
  rank_cmd->add_option("--baseline", rank.baseline, "baseline error (cm)")->check(CLI::PositiveNumber);
  rank_cmd->add_option("--task", rank.tasks, "task files to derive the baseline from")->check(CLI::ExistingFile);
  rank.policy.add_to(rank_cmd);
  rank_cmd->add_flag("--beat-baseline-only", rank.beat_baseline_only, "list only teams that beat the baseline");
  rank_cmd->add_option("--out", rank.out, "leaderboard CSV output file");

  ValidateArgs validate;
  auto* validate_cmd = app.add_subcommand("validate-task", "parse task files and check scene validity");
  validate_cmd->add_option("--task", validate.tasks, "task file(s)")->required()->check(CLI::ExistingFile);
  validate_cmd->add_option("--db", validate.db, "object database to cross-check")->check(CLI::ExistingFile);
  validate.tol.add_to(validate_cmd);

  ServeArgs serve;
  auto* serve_cmd = app.add_subcommand("serve", "run the contest HTTP service");
  serve_cmd->add_option("--bind", serve.bind, "host:port (default $BENCH_BIND or 127.0.0.1:8080)");
  serve_cmd->add_option("--contest", serve.contests, "contest definition file(s)")->check(CLI::ExistingFile);
  serve_cmd->add_flag("--no-worker", serve.no_worker, "do not evaluate submissions in the background");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? kExitOk : kExitFailure;
  }

  try {
    if (*gen_cmd) return cmd_gen_tasks(gen, g);
    if (*score_cmd) return cmd_score(score, g);
    if (*run_cmd) return cmd_run(run, g);
    if (*plan_cmd) return cmd_plan(plan, g);
    if (*rank_cmd) return cmd_rank(rank, g);
    if (*validate_cmd) return cmd_validate(validate, g);
    if (*serve_cmd) return cmd_serve(serve, g);
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return e.code() == ErrorCode::GenerationExhausted ? kExitExhausted : kExitFailure;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitFailure;
  }
  return kExitFailure;
}
