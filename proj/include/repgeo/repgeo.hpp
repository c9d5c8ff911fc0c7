#pragma once

#include "repgeo/analysis.hpp"
#include "repgeo/drift.hpp"
#include "repgeo/io.hpp"
#include "repgeo/numerics.hpp"
#include "repgeo/perturb.hpp"
#include "repgeo/probe.hpp"
#include "repgeo/rdm.hpp"
#include "repgeo/rng.hpp"
#include "repgeo/stability.hpp"
#include "repgeo/synthgen.hpp"
#include "repgeo/types.hpp"
