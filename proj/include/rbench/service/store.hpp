#pragma once

// Durable service state: an append-only log of JSON records (one per line,
// fsync'd before the write is acknowledged) plus a snapshot that lets the log
// be truncated. Every record carries a sequence number; replay skips
// records already folded into the snapshot, so a crash between writing the
// snapshot and truncating the log is harmless. A torn final line is ignored.

#include <fcntl.h>
#include <unistd.h>

#include <cerrno>
#include <cstring>
#include <filesystem>
#include <map>
#include <optional>
#include <string>

#include "rbench/service/contest.hpp"

namespace rbench::service {

enum class Status { Queued, Evaluating, Scored, Rejected };

inline std::string_view to_string(Status s) {
  switch (s) {
    case Status::Queued: return "queued";
    case Status::Evaluating: return "evaluating";
    case Status::Scored: return "scored";
    case Status::Rejected: return "rejected";
  }
  return "?";
}

inline Status status_from_string(const std::string& s) {
  if (s == "queued") return Status::Queued;
  if (s == "evaluating") return Status::Evaluating;
  if (s == "scored") return Status::Scored;
  if (s == "rejected") return Status::Rejected;
  throw Error(ErrorCode::Parse, "unknown status '" + s + "'");
}

struct SubmissionRecord {
  std::string submission_id;
  std::uint64_t number = 0;  ///< arrival order
  std::string contest_id;
  std::string team_id;
  Stage stage = Stage::Trial;
  std::string received_at;
  Json payload;
  Status status = Status::Queued;
  std::optional<Json> result;  ///< run score, when Scored
  std::string reason;          ///< when Rejected
};

inline Json submission_to_json(const SubmissionRecord& s) {
  Json j{{"submission_id", s.submission_id}, {"number", s.number},   {"contest_id", s.contest_id},
         {"team_id", s.team_id},             {"stage", std::string(to_string(s.stage))},
         {"received_at", s.received_at},     {"payload", s.payload}, {"status", std::string(to_string(s.status))}};
  if (s.result) j["result"] = *s.result;
  if (!s.reason.empty()) j["reason"] = s.reason;
  return j;
}

inline SubmissionRecord submission_from_json(const Json& j) {
  SubmissionRecord s;
  s.submission_id = j.at("submission_id").get<std::string>();
  s.number = j.at("number").get<std::uint64_t>();
  s.contest_id = j.at("contest_id").get<std::string>();
  s.team_id = j.at("team_id").get<std::string>();
  s.stage = stage_from_string(j.at("stage").get<std::string>());
  s.received_at = j.at("received_at").get<std::string>();
  s.payload = j.at("payload");
  s.status = status_from_string(j.at("status").get<std::string>());
  if (j.contains("result")) s.result = j.at("result");
  s.reason = j.value("reason", std::string());
  return s;
}

/// Public view of a submission, without its payload.
inline Json submission_status_json(const SubmissionRecord& s) {
  Json j = submission_to_json(s);
  j.erase("payload");
  return j;
}

struct StoreState {
  std::uint64_t last_seq = 0;
  std::uint64_t submissions_received = 0;
  std::map<std::string, SubmissionRecord> submissions;
  std::map<std::string, Stage> stages;  ///< only contests that moved past their configured stage
};

class RecordStore {
 public:
  explicit RecordStore(std::filesystem::path dir) : dir_(std::move(dir)) {
    std::filesystem::create_directories(dir_);
    load();
    fd_ = ::open(log_path().c_str(), O_WRONLY | O_CREAT | O_APPEND | O_CLOEXEC, 0644);
    if (fd_ < 0) throw Error(ErrorCode::Io, "cannot open record log: " + std::string(std::strerror(errno)));
  }

  ~RecordStore() {
    if (fd_ >= 0) ::close(fd_);
  }

  RecordStore(const RecordStore&) = delete;
  RecordStore& operator=(const RecordStore&) = delete;

  const StoreState& state() const { return state_; }
  const std::filesystem::path& dir() const { return dir_; }

  /// Durably records a new submission. Returns once the record is on disk.
  const SubmissionRecord& add_submission(SubmissionRecord s) {
    s.number = state_.submissions_received + 1;
    char id[32];
    std::snprintf(id, sizeof id, "sub-%06llu", static_cast<unsigned long long>(s.number));
    s.submission_id = id;
    Json rec{{"type", "submission"}, {"submission", submission_to_json(s)}};
    append(rec);
    return state_.submissions.at(s.submission_id);
  }

  void set_status(const std::string& id, Status status, const std::optional<Json>& result = std::nullopt,
                  const std::string& reason = {}) {
    Json rec{{"type", "status"}, {"submission_id", id}, {"status", std::string(to_string(status))}};
    if (result) rec["result"] = *result;
    if (!reason.empty()) rec["reason"] = reason;
    append(rec);
  }

  void set_stage(const std::string& contest_id, Stage stage) {
    append(Json{{"type", "stage"}, {"contest_id", contest_id}, {"stage", std::string(to_string(stage))}});
  }

  /// Writes the full state atomically, then truncates the log.
  void snapshot() {
    Json subs = Json::array();
    for (const auto& [id, s] : state_.submissions) subs.push_back(submission_to_json(s));
    Json stages = Json::object();
    for (const auto& [c, s] : state_.stages) stages[c] = std::string(to_string(s));
    const Json snap{{"last_seq", state_.last_seq},
                    {"submissions_received", state_.submissions_received},
                    {"submissions", subs},
                    {"stages", stages}};
    const auto tmp = dir_ / "snapshot.json.tmp";
    write_durably(tmp, snap.dump());
    std::filesystem::rename(tmp, snapshot_path());
    sync_dir();
    if (::ftruncate(fd_, 0) != 0) throw Error(ErrorCode::Io, "cannot truncate record log");
    ::fsync(fd_);
    records_since_snapshot_ = 0;
  }

  std::size_t records_since_snapshot() const { return records_since_snapshot_; }

  std::filesystem::path log_path() const { return dir_ / "records.jsonl"; }
  std::filesystem::path snapshot_path() const { return dir_ / "snapshot.json"; }

 private:
  void append(Json rec) {
    rec["seq"] = state_.last_seq + 1;
    const std::string line = rec.dump() + "\n";
    std::size_t written = 0;
    while (written < line.size()) {
      const ssize_t n = ::write(fd_, line.data() + written, line.size() - written);
      if (n < 0) {
        if (errno == EINTR) continue;
        throw Error(ErrorCode::Io, "record log write failed: " + std::string(std::strerror(errno)));
      }
      written += static_cast<std::size_t>(n);
    }
    if (::fsync(fd_) != 0) throw Error(ErrorCode::Io, "record log fsync failed");
    apply(rec);
    ++records_since_snapshot_;
  }

  void apply(const Json& rec) {
    const auto seq = rec.at("seq").get<std::uint64_t>();
    if (seq <= state_.last_seq) return;
    state_.last_seq = seq;
    const auto type = rec.at("type").get<std::string>();
    if (type == "submission") {
      auto s = submission_from_json(rec.at("submission"));
      state_.submissions_received = std::max(state_.submissions_received, s.number);
      state_.submissions[s.submission_id] = std::move(s);
    } else if (type == "status") {
      auto& s = state_.submissions.at(rec.at("submission_id").get<std::string>());
      s.status = status_from_string(rec.at("status").get<std::string>());
      s.result = rec.contains("result") ? std::optional<Json>(rec.at("result")) : std::nullopt;
      s.reason = rec.value("reason", std::string());
    } else if (type == "stage") {
      state_.stages[rec.at("contest_id").get<std::string>()] = stage_from_string(rec.at("stage").get<std::string>());
    }
  }

  void load() {
    if (std::filesystem::exists(snapshot_path())) {
      const Json snap = read_json_file(snapshot_path());
      state_.last_seq = snap.at("last_seq").get<std::uint64_t>();
      state_.submissions_received = snap.at("submissions_received").get<std::uint64_t>();
      for (const auto& s : snap.at("submissions")) {
        auto rec = submission_from_json(s);
        state_.submissions[rec.submission_id] = std::move(rec);
      }
      for (const auto& [c, s] : snap.at("stages").items()) state_.stages[c] = stage_from_string(s.get<std::string>());
    }
    if (!std::filesystem::exists(log_path())) return;
    const std::string text = read_text_file(log_path());
    std::size_t pos = 0;
    while (pos < text.size()) {
      const std::size_t end = text.find('\n', pos);
      if (end == std::string::npos) break;  // torn tail: never acknowledged
      const Json rec = Json::parse(text.substr(pos, end - pos), nullptr, false);
      if (!rec.is_discarded()) apply(rec);
      pos = end + 1;
    }
  }

  static void write_durably(const std::filesystem::path& path, const std::string& data) {
    const int fd = ::open(path.c_str(), O_WRONLY | O_CREAT | O_TRUNC | O_CLOEXEC, 0644);
    if (fd < 0) throw Error(ErrorCode::Io, "cannot write " + path.string());
    const ssize_t n = ::write(fd, data.data(), data.size());
    const bool ok = n == static_cast<ssize_t>(data.size()) && ::fsync(fd) == 0;
    ::close(fd);
    if (!ok) throw Error(ErrorCode::Io, "short write to " + path.string());
  }

  void sync_dir() const {
    const int fd = ::open(dir_.c_str(), O_RDONLY | O_DIRECTORY | O_CLOEXEC);
    if (fd >= 0) {
      ::fsync(fd);
      ::close(fd);
    }
  }

  std::filesystem::path dir_;
  StoreState state_;
  int fd_ = -1;
  std::size_t records_since_snapshot_ = 0;
};

}  // namespace rbench::service
