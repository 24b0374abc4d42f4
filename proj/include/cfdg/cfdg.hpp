#pragma once

#include "cfdg/coverage.hpp"
#include "cfdg/dot.hpp"
#include "cfdg/expr.hpp"
#include "cfdg/graph.hpp"
#include "cfdg/inference.hpp"
#include "cfdg/minimal_suites.hpp"
#include "cfdg/report_json.hpp"
#include "cfdg/trace.hpp"
