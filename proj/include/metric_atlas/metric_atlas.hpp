#pragma once

#include "metric_atlas/numeric.hpp"
#include "metric_atlas/spaces.hpp"
#include "metric_atlas/divergences.hpp"
#include "metric_atlas/max_flow.hpp"
#include "metric_atlas/min_cost_flow.hpp"
#include "metric_atlas/transport.hpp"
#include "metric_atlas/bounds.hpp"
#include "metric_atlas/walks.hpp"
#include "metric_atlas/io.hpp"
