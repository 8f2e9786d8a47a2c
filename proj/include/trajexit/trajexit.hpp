#pragma once

#include "trajexit/cost_model.hpp"
#include "trajexit/error.hpp"
#include "trajexit/fixture.hpp"
#include "trajexit/geo_motion.hpp"
#include "trajexit/heads.hpp"
#include "trajexit/ingest.hpp"
#include "trajexit/lr_planner.hpp"
#include "trajexit/policy.hpp"
#include "trajexit/sim.hpp"
