#pragma once

// Umbrella header for the firmlab library (the experiment runner and CLI
// live in experiment.hpp / cli.hpp and pull heavier dependencies).

#include "firmlab/asymptotics.hpp"
#include "firmlab/core.hpp"
#include "firmlab/firmness.hpp"
#include "firmlab/functionals.hpp"
#include "firmlab/io.hpp"
#include "firmlab/mappings.hpp"
#include "firmlab/point.hpp"
#include "firmlab/sampler.hpp"
#include "firmlab/spaces.hpp"
#include "firmlab/version.hpp"
