#pragma once

#include "nemarb/analytics.hpp"
#include "nemarb/forecast.hpp"
#include "nemarb/interval.hpp"
#include "nemarb/io.hpp"
#include "nemarb/model.hpp"
#include "nemarb/mpc.hpp"
#include "nemarb/oracle.hpp"
#include "nemarb/solver.hpp"
#include "nemarb/thresholds.hpp"
