#pragma once

#include "seasonsim/batting_walk.hpp"
#include "seasonsim/csv.hpp"
#include "seasonsim/date.hpp"
#include "seasonsim/era_kalman.hpp"
#include "seasonsim/ingest.hpp"
#include "seasonsim/league.hpp"
#include "seasonsim/mcmc.hpp"
#include "seasonsim/model.hpp"
#include "seasonsim/nelder_mead.hpp"
#include "seasonsim/parallel.hpp"
#include "seasonsim/pipeline.hpp"
#include "seasonsim/random.hpp"
#include "seasonsim/season_sim.hpp"
#include "seasonsim/stats.hpp"
#include "seasonsim/synthetic.hpp"
