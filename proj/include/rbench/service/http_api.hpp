#pragma once

// HTTP/JSON front end of the contest service. Every route lives under /v1.
//
//   GET  /v1/health
//   GET  /v1/contests
//   POST /v1/contests/{id}/submissions      {team_id, payload} -> 202 {submission_id}
//   GET  /v1/submissions/{id}
//   POST /v1/submissions/{id}/evaluate      re-run scoring (idempotent)
//   GET  /v1/contests/{id}/leaderboard      ?stage=trial|contest, ?format=csv
//   GET  /v1/contests/{id}/tasks            task bundle of the current stage
//   POST /v1/contests/{id}/stage            {stage: "contest"|"closed"}

// service (and Eigen) first: <resolv.h>, pulled in by httplib, defines a `_res`
// macro that breaks Eigen headers parsed after it.
#include "rbench/service/service.hpp"

#include <httplib.h>

namespace rbench::service {

inline int http_status(ErrorCode code) {
  switch (code) {
    case ErrorCode::UnknownContest:
    case ErrorCode::UnknownSubmission: return 404;
    case ErrorCode::ContestClosed:
    case ErrorCode::InvalidTransition: return 409;
    case ErrorCode::PayloadTooLarge: return 413;
    case ErrorCode::TaskSetMismatch:
    case ErrorCode::InvalidPayload:
    case ErrorCode::EvaluationFailed: return 422;
    case ErrorCode::Parse:
    case ErrorCode::InvalidArgument: return 400;
    default: return 500;
  }
}

namespace detail {

inline void send_json(httplib::Response& res, int status, const Json& body) {
  res.status = status;
  res.set_content(body.dump(), "application/json");
}

inline void send_error(httplib::Response& res, const Error& e) {
  send_json(res, http_status(e.code()), Json{{"error", std::string(to_string(e.code()))}, {"message", e.what()}});
}

template <typename Fn>
auto guarded(Fn fn) {
  return [fn](const httplib::Request& req, httplib::Response& res) {
    try {
      fn(req, res);
    } catch (const Error& e) {
      send_error(res, e);
    } catch (const Json::exception& e) {
      send_error(res, Error(ErrorCode::Parse, e.what()));
    } catch (const std::exception& e) {
      send_json(res, 500, Json{{"error", "Internal"}, {"message", e.what()}});
    }
  };
}

}  // namespace detail

inline void register_routes(httplib::Server& server, Service& svc) {
  using detail::guarded;
  using detail::send_json;

  server.Get("/v1/health", guarded([](const httplib::Request&, httplib::Response& res) {
               send_json(res, 200, Json{{"status", "ok"}});
             }));

  server.Get("/v1/contests", guarded([&svc](const httplib::Request&, httplib::Response& res) {
               Json out = Json::array();
               for (const auto& id : svc.contest_ids()) {
                 out.push_back(Json{{"contest_id", id}, {"stage", std::string(to_string(svc.stage(id)))}});
               }
               send_json(res, 200, out);
             }));

  server.Post(R"(/v1/contests/([^/]+)/submissions)",
              guarded([&svc](const httplib::Request& req, httplib::Response& res) {
                const std::string contest = req.matches[1];
                const Json body = parse_json_text(req.body, "request body");
                if (!body.is_object() || !body.contains("team_id") || !body.contains("payload")) {
                  throw Error(ErrorCode::InvalidPayload, "body must be {team_id, payload}");
                }
                const std::string id =
                    svc.submit(contest, body.at("team_id").get<std::string>(), body.at("payload"), req.body.size());
                send_json(res, 202, Json{{"submission_id", id}, {"status", "queued"}});
              }));

  server.Get(R"(/v1/submissions/([^/]+))", guarded([&svc](const httplib::Request& req, httplib::Response& res) {
               send_json(res, 200, submission_status_json(svc.submission(req.matches[1])));
             }));

  server.Post(R"(/v1/submissions/([^/]+)/evaluate)",
              guarded([&svc](const httplib::Request& req, httplib::Response& res) {
                const std::string id = req.matches[1];
                svc.evaluate_submission(id, true);
                send_json(res, 200, submission_status_json(svc.submission(id)));
              }));

  server.Get(R"(/v1/contests/([^/]+)/leaderboard)",
             guarded([&svc](const httplib::Request& req, httplib::Response& res) {
               const std::string contest = req.matches[1];
               const Stage stage =
                   req.has_param("stage") ? stage_from_string(req.get_param_value("stage")) : Stage::Contest;
               const auto snap = svc.leaderboard(contest, stage);
               if (req.get_param_value("format") == "csv") {
                 std::vector<scoring::RankedEntry> ranked;
                 for (const auto& e : snap.entries) ranked.push_back(e.ranked);
                 res.status = 200;
                 res.set_content(scoring::leaderboard_csv(ranked, snap.baseline_error), "text/csv");
                 return;
               }
               send_json(res, 200, leaderboard_to_json(snap));
             }));

  server.Get(R"(/v1/contests/([^/]+)/tasks)", guarded([&svc](const httplib::Request& req, httplib::Response& res) {
               const std::string contest = req.matches[1];
               Json tasks = Json::array();
               for (const auto& t : svc.published_tasks(contest)) tasks.push_back(task_to_json(t));
               send_json(res, 200,
                         Json{{"contest_id", contest}, {"stage", std::string(to_string(svc.stage(contest)))},
                              {"tasks", tasks}});
             }));

  server.Post(R"(/v1/contests/([^/]+)/stage)", guarded([&svc](const httplib::Request& req, httplib::Response& res) {
                const std::string contest = req.matches[1];
                const Json body = parse_json_text(req.body, "request body");
                const Stage to = svc.transition(contest, stage_from_string(body.at("stage").get<std::string>()));
                send_json(res, 200, Json{{"contest_id", contest}, {"stage", std::string(to_string(to))}});
              }));
}

}  // namespace rbench::service
