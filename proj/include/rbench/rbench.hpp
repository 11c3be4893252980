#pragma once

// Umbrella header. The HTTP front end (rbench/service/http_api.hpp) is not
// included here so that library users do not pull in the HTTP server.

#include "rbench/core/error.hpp"
#include "rbench/core/geometry.hpp"
#include "rbench/core/json_io.hpp"
#include "rbench/core/model.hpp"
#include "rbench/harness/action_script.hpp"
#include "rbench/harness/executor.hpp"
#include "rbench/scenegen/generator.hpp"
#include "rbench/scenegen/obb.hpp"
#include "rbench/scenegen/scene_graph.hpp"
#include "rbench/scenegen/validity.hpp"
#include "rbench/scoring/evaluation.hpp"
#include "rbench/scoring/metric.hpp"
#include "rbench/scoring/ranking.hpp"
#include "rbench/scoring/report.hpp"
#include "rbench/service/contest.hpp"
#include "rbench/service/service.hpp"
#include "rbench/service/store.hpp"
#include "rbench/util/format.hpp"
#include "rbench/util/random.hpp"
