#pragma once

// Contest pipeline: ingest, evaluate, rank. All state changes go through the
// record store under one mutex; evaluation itself runs outside the lock.

#include <chrono>
#include <condition_variable>
#include <ctime>
#include <deque>
#include <functional>
#include <mutex>
#include <thread>

#include "rbench/service/store.hpp"

namespace rbench::service {

struct LeaderboardEntry {
  scoring::RankedEntry ranked;
  std::string submission_id;
};

struct LeaderboardSnapshot {
  std::string contest_id;
  Stage stage = Stage::Contest;
  std::vector<LeaderboardEntry> entries;
  std::string generated_at;
  double baseline_error = 0.0;
};

inline Json leaderboard_to_json(const LeaderboardSnapshot& s) {
  Json entries = Json::array();
  for (const auto& e : s.entries) {
    const auto& r = e.ranked;
    entries.push_back(Json{{"rank", r.rank},
                           {"team_id", r.team_id},
                           {"final_error", r.final_error},
                           {"improvement_pct", r.improvement_pct},
                           {"total_execution_time_s", r.total_execution_time_s},
                           {"grasp", scoring::grasp_to_json(r.grasp)},
                           {"qualified", r.qualified},
                           {"submission_id", e.submission_id}});
  }
  return Json{{"contest_id", s.contest_id},
              {"stage", std::string(to_string(s.stage))},
              {"generated_at", s.generated_at},
              {"baseline_error", s.baseline_error},
              {"entries", entries}};
}

inline std::string utc_now_iso8601() {
  const std::time_t t = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

class Service {
 public:
  using Clock = std::function<std::string()>;

  explicit Service(std::filesystem::path data_dir, Clock clock = utc_now_iso8601,
                   std::size_t snapshot_every = 256)
      : store_(std::move(data_dir)), clock_(std::move(clock)), snapshot_every_(snapshot_every) {}

  ~Service() { stop_worker(); }

  void add_contest(ContestConfig contest) {
    contest.check();
    std::lock_guard lock(mu_);
    const std::string id = contest.contest_id;
    contests_.insert_or_assign(id, std::move(contest));
  }

  std::vector<std::string> contest_ids() const {
    std::lock_guard lock(mu_);
    std::vector<std::string> out;
    for (const auto& [id, c] : contests_) out.push_back(id);
    return out;
  }

  Stage stage(const std::string& contest_id) const {
    std::lock_guard lock(mu_);
    return stage_locked(contest_id);
  }

  /// Moves a contest forward (Trial -> Contest -> Closed).
  Stage transition(const std::string& contest_id, Stage to) {
    std::lock_guard lock(mu_);
    check_transition(stage_locked(contest_id), to);
    store_.set_stage(contest_id, to);
    return to;
  }

  /// Tasks published for the contest's current stage.
  std::vector<Task> published_tasks(const std::string& contest_id) const {
    std::lock_guard lock(mu_);
    const Stage s = stage_locked(contest_id);
    return contest_locked(contest_id).tasks_for(s);
  }

  /// Validates the payload against the current stage's task set and
  /// persists it durably; the returned id is acknowledged only after that.
  std::string submit(const std::string& contest_id, const std::string& team_id, const Json& payload,
                     std::size_t payload_bytes = 0) {
    std::unique_lock lock(mu_);
    const ContestConfig& contest = contest_locked(contest_id);
    const Stage s = stage_locked(contest_id);
    if (s == Stage::Closed) throw Error(ErrorCode::ContestClosed, contest_id);
    if (team_id.empty()) throw Error(ErrorCode::InvalidPayload, "team_id must not be empty");
    if (payload_bytes == 0) payload_bytes = payload.dump().size();
    if (payload_bytes > contest.max_payload_bytes) {
      throw Error(ErrorCode::PayloadTooLarge, std::to_string(payload_bytes) + " bytes");
    }
    check_payload(payload_from_json(payload), contest, s);
    SubmissionRecord rec;
    rec.contest_id = contest_id;
    rec.team_id = team_id;
    rec.stage = s;
    rec.received_at = clock_();
    rec.payload = payload;
    const std::string id = store_.add_submission(std::move(rec)).submission_id;
    maybe_snapshot_locked();
    lock.unlock();
    work_cv_.notify_all();
    return id;
  }

  SubmissionRecord submission(const std::string& id) const {
    std::lock_guard lock(mu_);
    return submission_locked(id);
  }

  /// Scores a submission and records the outcome. A Scored submission is
  /// returned as stored unless `force`, in which case it is recomputed and
  /// the (identical) result rewritten.
  scoring::RunScore evaluate_submission(const std::string& id, bool force = false) {
    std::unique_lock lock(mu_);
    SubmissionRecord rec = submission_locked(id);
    if (rec.status == Status::Scored && !force) return scoring::run_score_from_json(*rec.result);
    if (rec.status == Status::Rejected && !force) throw Error(ErrorCode::EvaluationFailed, rec.reason);
    const ContestConfig contest = contest_locked(rec.contest_id);
    if (rec.status == Status::Queued) store_.set_status(id, Status::Evaluating);
    lock.unlock();

    std::optional<scoring::RunScore> result;
    std::string reason;
    try {
      result = evaluate_payload(payload_from_json(rec.payload), contest, rec.stage, rec.submission_id);
    } catch (const std::exception& e) {
      reason = e.what();
    }

    lock.lock();
    if (result) {
      store_.set_status(id, Status::Scored, scoring::run_score_to_json(*result));
    } else {
      store_.set_status(id, Status::Rejected, std::nullopt, reason);
    }
    maybe_snapshot_locked();
    if (!result) throw Error(ErrorCode::EvaluationFailed, reason);
    return *result;
  }

  /// Evaluates every Queued or interrupted (Evaluating) submission in arrival
  /// order. Returns how many were processed.
  std::size_t process_pending() {
    std::size_t n = 0;
    while (auto id = next_pending()) {
      try {
        evaluate_submission(*id);
      } catch (const Error&) {
        // recorded as Rejected
      }
      ++n;
    }
    return n;
  }

  /// Single background evaluator; submissions are processed one at a time.
  void start_worker() {
    std::lock_guard lock(mu_);
    if (worker_.joinable()) return;
    stopping_ = false;
    worker_ = std::thread([this] {
      std::unique_lock lock(mu_);
      while (!stopping_) {
        lock.unlock();
        process_pending();
        lock.lock();
        if (stopping_) break;
        if (!next_pending_locked()) work_cv_.wait(lock, [&] { return stopping_ || next_pending_locked(); });
      }
    });
  }

  void stop_worker() {
    {
      std::lock_guard lock(mu_);
      stopping_ = true;
    }
    work_cv_.notify_all();
    if (worker_.joinable()) worker_.join();
  }

  /// Ranks each team's best (or latest) Scored submission of the given
  /// stage against the stage's task-set baseline.
  LeaderboardSnapshot leaderboard(const std::string& contest_id, Stage stage = Stage::Contest) const {
    std::lock_guard lock(mu_);
    const ContestConfig& contest = contest_locked(contest_id);
    if (stage == Stage::Closed) stage = Stage::Contest;
    LeaderboardSnapshot snap;
    snap.contest_id = contest_id;
    snap.stage = stage;
    snap.generated_at = clock_();
    const auto& tasks = contest.tasks_for(stage);
    if (tasks.empty()) return snap;
    snap.baseline_error = task_set_baseline(tasks, contest.policy);

    struct Pick {
      const SubmissionRecord* rec;
      scoring::RunScore run;
    };
    std::map<std::string, Pick> per_team;
    for (const auto& [id, rec] : store_.state().submissions) {
      if (rec.contest_id != contest_id || rec.stage != stage || rec.status != Status::Scored) continue;
      Pick candidate{&rec, scoring::run_score_from_json(*rec.result)};
      auto it = per_team.find(rec.team_id);
      if (it == per_team.end()) {
        per_team.emplace(rec.team_id, std::move(candidate));
        continue;
      }
      const Pick& cur = it->second;
      const bool replace =
          contest.selection == TeamSelection::Latest
              ? rec.number > cur.rec->number
              : std::tie(candidate.run.average_error, candidate.run.total_execution_time_s, rec.number) <
                    std::tie(cur.run.average_error, cur.run.total_execution_time_s, cur.rec->number);
      if (replace) it->second = std::move(candidate);
    }
    std::vector<scoring::RankInput> inputs;
    std::map<std::string, std::string> sub_of_team;
    for (const auto& [team, pick] : per_team) {
      const double imp = scoring::improvement(pick.run.average_error, snap.baseline_error);
      if (contest.beat_baseline_only && !(imp > 0.0)) continue;
      inputs.push_back({team, pick.run.average_error, imp, pick.run.total_execution_time_s, pick.run.grasp});
      sub_of_team[team] = pick.rec->submission_id;
    }
    for (auto& r : scoring::rank(std::move(inputs))) {
      const std::string sub = sub_of_team.at(r.team_id);
      snap.entries.push_back({std::move(r), sub});
    }
    return snap;
  }

  void snapshot() {
    std::lock_guard lock(mu_);
    store_.snapshot();
  }

  /// Stops the worker and folds the log into a snapshot.
  void shutdown() {
    stop_worker();
    snapshot();
  }

 private:
  const ContestConfig& contest_locked(const std::string& id) const {
    auto it = contests_.find(id);
    if (it == contests_.end()) throw Error(ErrorCode::UnknownContest, id);
    return it->second;
  }

  Stage stage_locked(const std::string& id) const {
    const ContestConfig& c = contest_locked(id);
    auto it = store_.state().stages.find(id);
    return it == store_.state().stages.end() ? c.stage : it->second;
  }

  const SubmissionRecord& submission_locked(const std::string& id) const {
    auto it = store_.state().submissions.find(id);
    if (it == store_.state().submissions.end()) throw Error(ErrorCode::UnknownSubmission, id);
    return it->second;
  }

  std::optional<std::string> next_pending_locked() const {
    const SubmissionRecord* best = nullptr;
    for (const auto& [id, rec] : store_.state().submissions) {
      if (rec.status != Status::Queued && rec.status != Status::Evaluating) continue;
      if (!contests_.count(rec.contest_id)) continue;
      if (!best || rec.number < best->number) best = &rec;
    }
    if (!best) return std::nullopt;
    return best->submission_id;
  }

  std::optional<std::string> next_pending() const {
    std::lock_guard lock(mu_);
    return next_pending_locked();
  }

  void maybe_snapshot_locked() {
    if (snapshot_every_ > 0 && store_.records_since_snapshot() >= snapshot_every_) store_.snapshot();
  }

  mutable std::mutex mu_;
  std::condition_variable work_cv_;
  RecordStore store_;
  Clock clock_;
  std::size_t snapshot_every_;
  std::map<std::string, ContestConfig> contests_;
  std::thread worker_;
  bool stopping_ = false;
};

}  // namespace rbench::service
