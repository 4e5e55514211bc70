#pragma once

// Umbrella header.
#include "cabee/env.hpp"
#include "cabee/clustering.hpp"
#include "cabee/strategy.hpp"
#include "cabee/abee.hpp"
#include "cabee/equilibrium.hpp"
#include "cabee/learning.hpp"
#include "cabee/applications/matching_pennies.hpp"
#include "cabee/applications/monitoring.hpp"
#include "cabee/applications/density.hpp"
#include "cabee/applications/linear.hpp"
#include "cabee/applications/beauty.hpp"
#include "cabee/io.hpp"
#include "cabee/scenario.hpp"
